#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vqd/program/interpreter.hpp"

namespace vqd {

enum class OutcomeClass { NoException, Parsing, Runtime };

std::string to_string(OutcomeClass c);

/// Where a layout fault (IndentationError found by the parser) is counted.
enum class IndentationView {
    /// Summary: Parsing. Breakdown: excluded. Matches "parsing errors are SyntaxError".
    AsParsing,
    /// Summary: Runtime. Breakdown: its own IndentationError row.
    AsRuntime,
};

std::string to_string(IndentationView v);

/// The minimal record the tables need; derivable from a modular Prediction.
struct OutcomeRecord {
    program::ExecutionStatus status = program::ExecutionStatus::Ok;
    std::optional<program::ErrorLabel> error_label;
    std::optional<program::ParseLabel> parse_label;

    static OutcomeRecord from(const program::ExecutionOutcome& o);
};

OutcomeClass classify_outcome(const OutcomeRecord& o, IndentationView view = IndentationView::AsParsing);
/// The runtime label an outcome contributes to the breakdown, if any.
std::optional<program::ErrorLabel> breakdown_label(const OutcomeRecord& o, IndentationView view);

struct ErrorTable {
    std::size_t total = 0;
    std::array<std::size_t, 3> counts{};
    /// Percent of all outcomes, in NoException, Parsing, Runtime order.
    std::array<double, 3> percent{};
};

/// Throws std::invalid_argument on an empty input.
ErrorTable error_table(const std::vector<OutcomeRecord>& outcomes, IndentationView view = IndentationView::AsParsing);

struct RuntimeBreakdown {
    std::size_t total = 0;
    std::array<std::size_t, 9> counts{};
    /// Percent of runtime failures per label, in program::kErrorLabels order.
    /// All zero (and `total` 0) when nothing failed at runtime.
    std::array<double, 9> percent{};
};

RuntimeBreakdown runtime_breakdown(const std::vector<OutcomeRecord>& outcomes,
                                   IndentationView view = IndentationView::AsRuntime);

/// Integer percent, rounded half away from zero.
std::string format_percent(double percent);

/// One column per benchmark: a header row, then rows such as
/// "No Exception          & 99\% & 98\%". Columns must be non-empty and equal in count to headers.
std::string render_error_table(const std::vector<std::string>& headers, const std::vector<ErrorTable>& columns);
std::string render_runtime_breakdown(const std::vector<std::string>& headers,
                                     const std::vector<RuntimeBreakdown>& columns);

struct TypedScore {
    std::string question_type;
    double score = 0;
};

struct TypeFailureRow {
    std::string question_type;
    std::size_t count = 0;
    std::size_t failures = 0;
    double failure_rate = 0;
};

/// Per question type, the share of items scoring below `threshold`; types
/// with fewer than `min_count` items are dropped. Rows sorted by type.
std::vector<TypeFailureRow> breakdown_by_type(const std::vector<TypedScore>& scores, std::size_t min_count = 50,
                                              double threshold = 1.0);

}  // namespace vqd
