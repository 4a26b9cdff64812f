#pragma once

#include <filesystem>
#include <string>

#include "vqd/analysis.hpp"
#include "vqd/core.hpp"
#include "vqd/runner.hpp"

namespace vqd {

inline constexpr const char* kReportFormat = "vqd-report/1";

/// One document per run: header notes, config echo, predictions with traces
/// and scores, metric means, error tables in both IndentationError views,
/// the per-type breakdown, and a "run" section (timing, call and cache counts).
json build_report(const EvaluationPlan& plan, const EvaluationRun& run);

/// The report without the "run" section and without any "ts" field, at any
/// depth. Two runs of the same inputs compare equal after this.
json canonicalize(json report);

/// id, question_type, answer, outcome_class and one column per metric.
std::string scores_csv(const json& report);

json read_report(const std::filesystem::path& path);

/// "scores", "errors" (both views), "types", or "all".
std::string render_report(const json& report, const std::string& view = "all");

/// The outcome records behind the error tables, one per modular prediction.
std::vector<OutcomeRecord> outcome_records(const json& report);

}  // namespace vqd
