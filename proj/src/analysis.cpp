#include "vqd/analysis.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace vqd {

using program::ErrorLabel;
using program::ExecutionStatus;
using program::ParseLabel;

std::string to_string(OutcomeClass c) {
    switch (c) {
        case OutcomeClass::NoException: return "NoException";
        case OutcomeClass::Parsing: return "Parsing";
        case OutcomeClass::Runtime: return "Runtime";
    }
    return "Runtime";
}

std::string to_string(IndentationView v) { return v == IndentationView::AsParsing ? "indentation-as-parsing" : "indentation-as-runtime"; }

OutcomeRecord OutcomeRecord::from(const program::ExecutionOutcome& o) { return {o.status, o.error_label, o.parse_label}; }

namespace {

bool layout_fault(const OutcomeRecord& o) {
    return o.status == ExecutionStatus::ParseError && o.parse_label == ParseLabel::IndentationError;
}

std::size_t label_index(ErrorLabel label) {
    for (std::size_t i = 0; i < program::kErrorLabels.size(); ++i)
        if (program::kErrorLabels[i] == label) return i;
    return program::kErrorLabels.size() - 1;
}

}  // namespace

OutcomeClass classify_outcome(const OutcomeRecord& o, IndentationView view) {
    switch (o.status) {
        case ExecutionStatus::Ok: return OutcomeClass::NoException;
        case ExecutionStatus::ParseError:
            return layout_fault(o) && view == IndentationView::AsRuntime ? OutcomeClass::Runtime : OutcomeClass::Parsing;
        case ExecutionStatus::RuntimeError: return OutcomeClass::Runtime;
    }
    return OutcomeClass::Runtime;
}

std::optional<ErrorLabel> breakdown_label(const OutcomeRecord& o, IndentationView view) {
    if (o.status == ExecutionStatus::RuntimeError) return o.error_label.value_or(ErrorLabel::Other);
    if (layout_fault(o) && view == IndentationView::AsRuntime) return ErrorLabel::IndentationError;
    return std::nullopt;
}

ErrorTable error_table(const std::vector<OutcomeRecord>& outcomes, IndentationView view) {
    if (outcomes.empty()) throw std::invalid_argument("error_table: no outcomes");
    ErrorTable t;
    t.total = outcomes.size();
    for (const auto& o : outcomes) ++t.counts[static_cast<std::size_t>(classify_outcome(o, view))];
    for (std::size_t i = 0; i < 3; ++i) t.percent[i] = 100.0 * static_cast<double>(t.counts[i]) / static_cast<double>(t.total);
    return t;
}

RuntimeBreakdown runtime_breakdown(const std::vector<OutcomeRecord>& outcomes, IndentationView view) {
    RuntimeBreakdown b;
    for (const auto& o : outcomes) {
        if (auto label = breakdown_label(o, view)) {
            ++b.counts[label_index(*label)];
            ++b.total;
        }
    }
    if (b.total == 0) return b;
    for (std::size_t i = 0; i < b.counts.size(); ++i)
        b.percent[i] = 100.0 * static_cast<double>(b.counts[i]) / static_cast<double>(b.total);
    return b;
}

std::string format_percent(double percent) { return std::to_string(std::lround(percent)) + "\\%"; }

namespace {

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

template <typename Column, typename Cell>
std::string render(const std::vector<std::string>& headers, const std::vector<Column>& columns,
                   const std::vector<std::string>& row_names, Cell cell) {
    if (columns.empty() || columns.size() != headers.size())
        throw std::invalid_argument("table needs one header per column");
    const std::size_t width = 22;
    std::string out = pad("", width);
    for (const auto& h : headers) out += "& " + h + " ";
    out += "\\\\\n";
    for (std::size_t r = 0; r < row_names.size(); ++r) {
        std::string line = pad(row_names[r], width);
        for (const auto& c : columns) line += "& " + pad(format_percent(cell(c, r)), 5) + " ";
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + " \\\\\n";
    }
    return out;
}

}  // namespace

std::string render_error_table(const std::vector<std::string>& headers, const std::vector<ErrorTable>& columns) {
    return render(headers, columns, {"No Exception", "Parsing", "Runtime"},
                  [](const ErrorTable& t, std::size_t r) { return t.percent[r]; });
}

std::string render_runtime_breakdown(const std::vector<std::string>& headers,
                                     const std::vector<RuntimeBreakdown>& columns) {
    std::vector<std::string> names;
    for (auto label : program::kErrorLabels) names.push_back(program::to_string(label));
    return render(headers, columns, names, [](const RuntimeBreakdown& b, std::size_t r) { return b.percent[r]; });
}

std::vector<TypeFailureRow> breakdown_by_type(const std::vector<TypedScore>& scores, std::size_t min_count,
                                              double threshold) {
    std::map<std::string, TypeFailureRow> groups;
    for (const auto& s : scores) {
        auto& row = groups[s.question_type];
        row.question_type = s.question_type;
        ++row.count;
        if (s.score < threshold) ++row.failures;
    }
    std::vector<TypeFailureRow> rows;
    for (auto& [type, row] : groups) {
        if (row.count < min_count) continue;
        row.failure_rate = 100.0 * static_cast<double>(row.failures) / static_cast<double>(row.count);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace vqd
