#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqd/backend.hpp"

namespace vqd {

struct ContinuationScore {
    std::string continuation;
    std::vector<TokenScore> tokens;
    double normalized = 0;
};

/// Byte-length weighted mean of continuation token logprobs:
///   sum_j logprob_j * L_j / sum_k L_k
/// Throws std::invalid_argument on an empty sequence or a zero byte length.
double normalized_loglikelihood(std::span<const TokenScore> tokens);

/// Scores each continuation of `prompt` in one backend call.
std::vector<ContinuationScore> score_all(Backend& lm, const std::string& prompt,
                                         const std::vector<std::string>& continuations,
                                         std::optional<std::string> image_ref = {});

/// Index of the first maximum; ties resolve to the earliest entry.
std::size_t argmax_first(std::span<const ContinuationScore> scores);

struct PrefixSelection {
    std::size_t index = 0;
    std::array<double, 2> scores{};
};

/// Which of two prefixes is the likelier continuation of `prompt`; exact
/// ties pick the first.
PrefixSelection select_prefix(Backend& lm, const std::string& prompt,
                              const std::array<std::string, 2>& prefixes);

struct ChoiceSelection {
    std::size_t index = 0;
    std::string choice;
    std::vector<ContinuationScore> scores;
};

ChoiceSelection select_choice(Backend& lm, const std::string& prompt, const std::vector<std::string>& choices,
                              std::optional<std::string> image_ref = {});

/// Python-style list literal with single-quoted items: ['dog', 'cat'].
std::string render_choice_list(const std::vector<std::string>& choices);

/// "Choices: [...] Candidate: <candidate> Most similar choice: "
std::string nearest_choice_prompt(const std::string& candidate, const std::vector<std::string>& choices);

struct NearestChoice {
    std::string choice;
    /// False when the candidate already matched a choice and no call was made.
    bool used_model = false;
    std::vector<ContinuationScore> scores;
};

/// Maps free text onto one of `choices`. A candidate equal to a choice after
/// trimming surrounding whitespace is returned without a backend call.
NearestChoice map_to_nearest_choice(Backend& lm, const std::string& candidate,
                                    const std::vector<std::string>& choices);

std::string trim(std::string_view text);

}  // namespace vqd
