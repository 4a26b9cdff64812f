#include "vqd/scoring.hpp"

#include <stdexcept>

namespace vqd {

double normalized_loglikelihood(std::span<const TokenScore> tokens) {
    if (tokens.empty()) throw std::invalid_argument("normalized_loglikelihood: empty continuation");
    double total_bytes = 0;
    for (const auto& t : tokens) {
        if (t.byte_length == 0) throw std::invalid_argument("normalized_loglikelihood: zero byte length");
        total_bytes += static_cast<double>(t.byte_length);
    }
    double sum = 0;
    for (const auto& t : tokens) sum += t.logprob * (static_cast<double>(t.byte_length) / total_bytes);
    return sum;
}

std::vector<ContinuationScore> score_all(Backend& lm, const std::string& prompt,
                                         const std::vector<std::string>& continuations,
                                         std::optional<std::string> image_ref) {
    auto sequences = score_continuations(lm, prompt, continuations, std::move(image_ref));
    std::vector<ContinuationScore> out;
    out.reserve(continuations.size());
    for (std::size_t i = 0; i < continuations.size(); ++i) {
        const double value = normalized_loglikelihood(sequences[i]);
        out.push_back(ContinuationScore{continuations[i], std::move(sequences[i]), value});
    }
    return out;
}

std::size_t argmax_first(std::span<const ContinuationScore> scores) {
    if (scores.empty()) throw std::invalid_argument("argmax over no scores");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i].normalized > scores[best].normalized) best = i;
    return best;
}

PrefixSelection select_prefix(Backend& lm, const std::string& prompt, const std::array<std::string, 2>& prefixes) {
    if (prefixes[0].empty() || prefixes[1].empty()) throw std::invalid_argument("select_prefix: empty prefix");
    const auto scores = score_all(lm, prompt, {prefixes[0], prefixes[1]});
    return PrefixSelection{argmax_first(scores), {scores[0].normalized, scores[1].normalized}};
}

ChoiceSelection select_choice(Backend& lm, const std::string& prompt, const std::vector<std::string>& choices,
                              std::optional<std::string> image_ref) {
    if (choices.size() < 2) throw std::invalid_argument("select_choice: need at least 2 choices");
    auto scores = score_all(lm, prompt, choices, std::move(image_ref));
    const std::size_t best = argmax_first(scores);
    return ChoiceSelection{best, choices[best], std::move(scores)};
}

std::string render_choice_list(const std::vector<std::string>& choices) {
    std::string out = "[";
    for (std::size_t i = 0; i < choices.size(); ++i) {
        if (i > 0) out += ", ";
        const std::string& c = choices[i];
        const char quote = (c.find('\'') != std::string::npos && c.find('"') == std::string::npos) ? '"' : '\'';
        out += quote;
        for (char ch : c) {
            if (ch == quote || ch == '\\') out += '\\';
            out += ch;
        }
        out += quote;
    }
    return out + "]";
}

std::string nearest_choice_prompt(const std::string& candidate, const std::vector<std::string>& choices) {
    return "Choices: " + render_choice_list(choices) + " Candidate: " + candidate + " Most similar choice: ";
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n\f\v");
    return std::string(text.substr(first, last - first + 1));
}

NearestChoice map_to_nearest_choice(Backend& lm, const std::string& candidate, const std::vector<std::string>& choices) {
    if (choices.size() < 2) throw std::invalid_argument("map_to_nearest_choice: need at least 2 choices");
    const std::string trimmed = trim(candidate);
    if (trimmed.empty()) throw std::invalid_argument("map_to_nearest_choice: empty candidate");
    for (const auto& c : choices)
        if (c == trimmed) return NearestChoice{c, false, {}};
    auto selection = select_choice(lm, nearest_choice_prompt(trimmed, choices), choices);
    return NearestChoice{selection.choice, true, std::move(selection.scores)};
}

}  // namespace vqd
