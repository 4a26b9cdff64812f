#include "vqd/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

#include "vqd/scoring.hpp"

namespace vqd {

namespace {

bool is_terminal_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string normalize_once(const std::string& text) {
    static const std::array<const char*, 11> numbers = {"zero", "one", "two", "three", "four", "five",
                                                        "six",  "seven", "eight", "nine", "ten"};
    std::vector<std::string> words;
    std::string word;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!word.empty()) words.push_back(std::move(word));
            word.clear();
        } else {
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (!word.empty()) words.push_back(std::move(word));

    while (!words.empty()) {
        auto& last = words.back();
        while (!last.empty() && is_terminal_punct(last.back())) last.pop_back();
        if (!last.empty()) break;
        words.pop_back();
    }
    if (words.size() > 1 && (words[0] == "a" || words[0] == "an" || words[0] == "the")) words.erase(words.begin());
    for (auto& w : words)
        for (std::size_t n = 0; n < numbers.size(); ++n)
            if (w == numbers[n]) w = std::to_string(n);

    std::string out;
    for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
    return out;
}

}  // namespace

std::string normalize_answer(const std::string& text) {
    // Dropping an article or punctuation can expose another one ("the the",
    // "x. ."), so iterate to a fixed point.
    std::string current = normalize_once(text);
    for (;;) {
        std::string next = normalize_once(current);
        if (next == current) return current;
        current = std::move(next);
    }
}

double vqa_accuracy(const std::string& prediction, const std::vector<std::string>& answers, bool normalize) {
    if (answers.empty()) throw std::invalid_argument("vqa_accuracy: no ground-truth answers");
    const std::string p = normalize ? normalize_answer(prediction) : prediction;
    std::size_t matches = 0;
    for (const auto& a : answers)
        if ((normalize ? normalize_answer(a) : a) == p) ++matches;
    return std::min(1.0, static_cast<double>(matches) / 3.0);
}

int exact_match(const std::string& prediction, const std::string& answer, bool normalize) {
    if (normalize) return normalize_answer(prediction) == normalize_answer(answer) ? 1 : 0;
    return prediction == answer ? 1 : 0;
}

int mc_accuracy(const std::string& prediction, const std::vector<std::string>& choices, std::size_t correct_index) {
    if (correct_index >= choices.size()) throw std::invalid_argument("mc_accuracy: correct index out of range");
    if (prediction.empty()) return 0;
    if (std::find(choices.begin(), choices.end(), prediction) == choices.end())
        throw std::invalid_argument("mc_accuracy: prediction '" + prediction + "' is not one of the choices");
    return prediction == choices[correct_index] ? 1 : 0;
}

std::string to_string(Verdict v) { return v == Verdict::Correct ? "Correct" : "Incorrect"; }

std::string join_answers(const std::vector<std::string>& answers) {
    std::vector<std::string> seen;
    std::string out;
    for (const auto& a : answers) {
        if (std::find(seen.begin(), seen.end(), a) != seen.end()) continue;
        seen.push_back(a);
        out += (out.empty() ? "" : " or ") + a;
    }
    return out;
}

std::string judge_prompt(const std::string& question, const std::vector<std::string>& answers,
                         const std::string& candidate) {
    return "Question: " + question + "\nAnswer: " + join_answers(answers) + "\nCandidate: " + candidate +
           "\nIs the candidate correct? ";
}

JudgeResult llm_judge(Backend& lm, const std::string& question, const std::vector<std::string>& answers,
                      const std::string& candidate, bool normalize) {
    if (answers.empty()) throw std::invalid_argument("llm_judge: no ground-truth answers");
    std::vector<std::string> shown = answers;
    std::string cand = candidate;
    if (normalize) {
        for (auto& a : shown) a = normalize_answer(a);
        cand = normalize_answer(cand);
    }
    const auto scores = score_all(lm, judge_prompt(question, shown, cand), {"yes", "no"});
    JudgeResult r;
    r.yes = scores[0].normalized;
    r.no = scores[1].normalized;
    r.verdict = r.yes > r.no ? Verdict::Correct : Verdict::Incorrect;
    return r;
}

}  // namespace vqd
