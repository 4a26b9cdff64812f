#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vqd/backend.hpp"
#include "vqd/program/ast.hpp"
#include "vqd/program/syntax.hpp"
#include "vqd/trace.hpp"

namespace vqd::program {

/// Runtime failure labels, in report order.
enum class ErrorLabel {
    NameError,
    AttributeError,
    IndexError,
    TypeError,
    IndentationError,
    ValueError,
    KeyError,
    ZeroDivisionError,
    Other,
};

inline constexpr std::array<ErrorLabel, 9> kErrorLabels = {
    ErrorLabel::NameError,        ErrorLabel::AttributeError, ErrorLabel::IndexError,
    ErrorLabel::TypeError,        ErrorLabel::IndentationError, ErrorLabel::ValueError,
    ErrorLabel::KeyError,         ErrorLabel::ZeroDivisionError, ErrorLabel::Other};

std::string to_string(ErrorLabel label);
ErrorLabel parse_error_label(const std::string& text);

enum class ExecutionStatus { Ok, ParseError, RuntimeError };

std::string to_string(ExecutionStatus status);
ExecutionStatus parse_execution_status(const std::string& text);

struct ExecutionOutcome {
    ExecutionStatus status = ExecutionStatus::Ok;
    std::optional<std::string> result;
    /// Set for RuntimeError outcomes only.
    std::optional<ErrorLabel> error_label;
    /// Set for ParseError outcomes only.
    std::optional<ParseLabel> parse_label;
    std::string message;
    std::size_t steps_used = 0;
};

/// Which parts of the image API a program may use.
enum class ApiSurface {
    Full,
    /// `simple_query` is unbound; calling it raises AttributeError.
    WithoutSimpleQuery,
    /// Only the ImagePatch constructor, box attributes and `simple_query`.
    OnlySimpleQuery,
};

struct ExecutionOptions {
    std::size_t step_budget = 100000;
    double verify_threshold = 0.5;
    ApiSurface surface = ApiSurface::Full;
    /// Bound to the function's second parameter when it declares one.
    std::optional<std::vector<std::string>> possible_choices;
};

/// Runs the program's function with `image` bound to a patch over the whole
/// image. Program faults are captured in the outcome. Errors that are not the
/// program's fault (TransportError, FixtureError) propagate.
ExecutionOutcome execute(const Program& program, const std::string& image_ref, const BackendSuite& backends,
                         const ExecutionOptions& options = {}, Trace* trace = nullptr);

/// parse + execute; a ParseError becomes a ParseError outcome.
ExecutionOutcome run_source(const std::string& source, const std::string& image_ref,
                            const BackendSuite& backends, const ExecutionOptions& options = {},
                            Trace* trace = nullptr);

}  // namespace vqd::program
