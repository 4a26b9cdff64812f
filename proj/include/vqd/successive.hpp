#pragma once

#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqd/backend.hpp"
#include "vqd/core.hpp"
#include "vqd/trace.hpp"

namespace vqd {

inline constexpr const char* kFollowUpLabel = "Follow-up:";
inline constexpr const char* kFollowUpAnswerLabel = "Follow-up answer:";
inline constexpr const char* kAnswerLabel = "Answer to the original question:";

struct DecompositionStep {
    std::string question;
    std::string answer;
};

enum class Termination { AnswerPrefix, StepCap };

std::string to_string(Termination t);

struct DecompositionTrace {
    std::string instruction;
    std::vector<std::string> demonstrations;
    std::vector<DecompositionStep> steps;
    std::optional<std::string> final_answer;
    Termination terminated_by = Termination::AnswerPrefix;

    /// "Question: ..." followed by the follow-up lines and, when present, the answer line.
    std::string transcript(const std::string& question) const;
    json to_json() const;
};

struct SuccessiveOptions {
    std::string instruction;
    /// Worked transcripts; exactly 3.
    std::vector<std::string> demonstrations;
    std::size_t max_steps = 8;
    int max_tokens = 64;
};

/// Options loaded from the shipped instruction and demonstration assets.
SuccessiveOptions default_successive_options();

/// Splits "@@ example" blocks of transcript text; each must start with "Question:".
std::vector<std::string> parse_transcript_demonstrations(const std::string& text);

/// Instruction, the 3 demonstrations, the question block (with the choice list
/// in MC mode), then one Follow-up / Follow-up answer pair per step. Always
/// ends with a newline. Throws std::invalid_argument unless there are exactly 3 demos.
std::string build_decomposition_prompt(const std::string& instruction, const std::vector<std::string>& demos,
                                       const std::string& question,
                                       const std::optional<std::vector<std::string>>& choices,
                                       const std::vector<DecompositionStep>& steps);

/// Thrown when a backend fails mid-decomposition; carries what was done so far.
class DecompositionFailure : public std::runtime_error {
public:
    DecompositionFailure(const std::string& message, DecompositionTrace partial, std::exception_ptr cause)
        : std::runtime_error(message), partial_(std::move(partial)), cause_(std::move(cause)) {}

    const DecompositionTrace& partial() const { return partial_; }
    [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

private:
    DecompositionTrace partial_;
    std::exception_ptr cause_;
};

struct DecompositionResult {
    Prediction prediction;
    DecompositionTrace trace;
};

/// Instruct LM proposes follow-ups, the VLM answers each one, and the likelier
/// of the two prefixes decides whether to continue. After max_steps follow-ups
/// the answer prefix is forced.
DecompositionResult run_decomposition(const BenchmarkInstance& instance, const EvaluationSetting& setting,
                                      const BackendSuite& backends, const SuccessiveOptions& options,
                                      Trace* trace = nullptr);

}  // namespace vqd
