#pragma once

#include <string>
#include <vector>

#include "vqd/backend.hpp"

namespace vqd {

/// Lowercase, trim, collapse whitespace, strip trailing punctuation, drop a
/// leading article, spell "zero".."ten" as digits. Idempotent.
std::string normalize_answer(const std::string& text);

/// min(1, matches / 3), counting annotations equal to the prediction.
double vqa_accuracy(const std::string& prediction, const std::vector<std::string>& answers, bool normalize = true);

int exact_match(const std::string& prediction, const std::string& answer, bool normalize = true);

/// 1 iff prediction == choices[correct_index]. An empty prediction (a failed
/// run) scores 0; any other prediction outside the choices is an error.
int mc_accuracy(const std::string& prediction, const std::vector<std::string>& choices, std::size_t correct_index);

enum class Verdict { Correct, Incorrect };

std::string to_string(Verdict v);

struct JudgeResult {
    Verdict verdict = Verdict::Incorrect;
    double yes = 0;
    double no = 0;
};

/// Distinct answers in first-seen order, joined by " or ".
std::string join_answers(const std::vector<std::string>& answers);

/// The four-line judge prompt; ends with "Is the candidate correct? ".
std::string judge_prompt(const std::string& question, const std::vector<std::string>& answers,
                         const std::string& candidate);

/// Correct iff the normalized log likelihood of "yes" beats "no"; ties are Incorrect.
JudgeResult llm_judge(Backend& lm, const std::string& question, const std::vector<std::string>& answers,
                      const std::string& candidate, bool normalize = false);

}  // namespace vqd
