#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vqd/backend.hpp"
#include "vqd/core.hpp"
#include "vqd/modular.hpp"
#include "vqd/successive.hpp"

namespace vqd {

struct EvaluationPlan {
    RunConfig config;
    ModularOptions modular;
    SuccessiveOptions successive = default_successive_options();
    std::size_t jobs = 1;
    /// Also score direct answers with the instruct-LM judge.
    bool judge = false;
    /// Where few-shot demonstrations came from, for the report.
    std::optional<std::string> demos_source;
};

/// "mock:PATH" loads a fixture world; "remote:URL" talks to a gateway.
BackendSuite open_backends(const std::string& spec);

/// Every instance in file order, or a seeded sample of `sample_size`.
std::vector<BenchmarkInstance> select_instances(const std::vector<BenchmarkInstance>& instances,
                                                std::optional<std::size_t> sample_size, std::uint64_t seed);

struct InstanceRecord {
    BenchmarkInstance instance;
    Prediction prediction;
    json scores = json::object();
};

struct RunStats {
    std::uint64_t backend_calls = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t cache_corrupt = 0;
    double seconds = 0;
};

struct EvaluationRun {
    /// Sorted by instance id.
    std::vector<InstanceRecord> records;
    RunStats stats;
};

/// Metric values for one prediction. Direct answers get vqa_accuracy and
/// exact_match (plus the judge when `judge_lm` is set); multiple choice gets
/// mc_accuracy, null when the first annotation is not among the choices.
json score_prediction(const BenchmarkInstance& instance, const EvaluationSetting& setting,
                      const Prediction& prediction, Backend* judge_lm = nullptr);

/// Runs the plan's method over `instances` on up to `jobs` threads. Program
/// failures are data; any backend or fixture failure aborts the run and is
/// rethrown once the workers stop.
EvaluationRun evaluate(const EvaluationPlan& plan, const std::vector<BenchmarkInstance>& instances,
                       const BackendSuite& backends);

}  // namespace vqd
