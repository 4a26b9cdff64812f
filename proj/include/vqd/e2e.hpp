#pragma once

#include "vqd/backend.hpp"
#include "vqd/core.hpp"
#include "vqd/trace.hpp"

namespace vqd {

/// One VLM call with the short-answer template; returns the raw answer.
/// Beam settings are forwarded to the backend.
Prediction answer_direct(const BenchmarkInstance& instance, const BackendSuite& backends,
                         const DecodingParams& decoding = {}, Trace* trace = nullptr);

/// One scoring call: every choice as a continuation of the templated question,
/// image-conditioned; the likeliest choice wins, ties to the first listed.
Prediction answer_multiple_choice(const BenchmarkInstance& instance, const BackendSuite& backends,
                                  Trace* trace = nullptr);

Prediction run_e2e(const BenchmarkInstance& instance, const EvaluationSetting& setting, const BackendSuite& backends,
                   const DecodingParams& decoding = {}, Trace* trace = nullptr);

}  // namespace vqd
