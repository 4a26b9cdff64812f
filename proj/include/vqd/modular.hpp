#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vqd/core.hpp"
#include "vqd/program/api_prompt.hpp"
#include "vqd/program/interpreter.hpp"

namespace vqd {

struct ModularOptions {
    program::PromptVariant variant = program::PromptVariant::TaskAgnostic;
    /// Used by the few-shot variant only; it needs exactly 3.
    std::vector<program::Demonstration> demos;
    std::size_t step_budget = 100000;
    double verify_threshold = 0.5;
    int max_tokens = 512;
};

/// Stop sequences for program generation: the next top-level comment or
/// definition ends the program.
const std::vector<std::string>& program_stops();

/// Source to execute for a completion of a prompt ending in `signature`: the
/// completion itself when it restates a definition, else signature + body.
std::string assemble_program(const std::string& signature, const std::string& completion);

/// Table-3 class of an outcome: "NoException", "Parsing" or "Runtime".
std::string outcome_class(const program::ExecutionOutcome& outcome);

/// Prompt -> code LM -> parse -> execute; in MC mode the result is mapped
/// onto a choice with the instruct LM. Program failures become a Prediction
/// with an empty answer and outcome_class set. Backend failures propagate.
Prediction run_modular(const BenchmarkInstance& instance, const EvaluationSetting& setting,
                       const BackendSuite& backends, const ModularOptions& options, Trace* trace = nullptr);

}  // namespace vqd
