#include <doctest.h>

#include <random>
#include <regex>

#include "support.hpp"
#include "vqd/metrics.hpp"

using namespace vqd;

namespace {

// Regex-based restatement of the normalization rules.
std::string reference_normalize(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::string prev;
    while (prev != s) {
        prev = s;
        s = std::regex_replace(s, std::regex("\\s+"), " ");
        s = std::regex_replace(s, std::regex("^ | $"), "");
        s = std::regex_replace(s, std::regex("[.,!?;:]+$"), "");
        s = std::regex_replace(s, std::regex("^(a|an|the) "), "");
        s = std::regex_replace(s, std::regex("^(a|an|the)$"), "$1");
    }
    static const char* words[] = {"zero", "one", "two", "three", "four", "five",
                                  "six",  "seven", "eight", "nine", "ten"};
    for (int i = 0; i <= 10; ++i) {
        s = std::regex_replace(s, std::regex(std::string("\\b") + words[i] + "\\b"), std::to_string(i));
    }
    return s;
}

std::string random_text(std::mt19937_64& rng) {
    static const std::string alphabet = "aAbTtheHn eoOwTnr.!?,;: \t\nxyz0123";
    static const std::vector<std::string> pieces = {"The ", "a ", "An ", "two", "Ten", "  ", ".", "!?", "the"};
    std::uniform_int_distribution<int> len(0, 12), pick(0, 1);
    std::string out;
    for (int i = 0, n = len(rng); i < n; ++i) {
        if (pick(rng)) {
            out += pieces[rng() % pieces.size()];
        } else {
            out += alphabet[rng() % alphabet.size()];
        }
    }
    return out;
}

}  // namespace

TEST_CASE("normalize_answer examples") {
    CHECK(normalize_answer("A Horse ") == "horse");
    CHECK(normalize_answer("Two") == "2");
    CHECK(normalize_answer("") == "");
    CHECK(normalize_answer("  The   left. ") == "left");
    CHECK(normalize_answer("ten cats") == "10 cats");
    CHECK(normalize_answer("anyone") == "anyone");
}

TEST_CASE("normalize_answer is idempotent") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 10000; ++i) {
        const auto x = random_text(rng);
        const auto once = normalize_answer(x);
        CHECK_MESSAGE(normalize_answer(once) == once, x);
    }
}

TEST_CASE("normalize_answer agrees with the regex restatement on plain words") {
    std::mt19937_64 rng(7);
    static const std::vector<std::string> words = {"The", "a", "red", "Two", "ten", "cats", "Horse", "an", "on", "table"};
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        for (int k = 0, n = 1 + static_cast<int>(rng() % 5); k < n; ++k) s += (k ? " " : "") + words[rng() % words.size()];
        if (rng() % 2) s += ".";
        CHECK_MESSAGE(normalize_answer(s) == reference_normalize(s), s);
    }
}

TEST_CASE("vqa_accuracy") {
    const std::vector<int> matches{0, 1, 2, 3, 5};
    const std::vector<double> expected{0.0, 1.0 / 3, 2.0 / 3, 1.0, 1.0};
    for (std::size_t k = 0; k < matches.size(); ++k) {
        std::vector<std::string> answers(10, "other");
        for (int i = 0; i < matches[k]; ++i) answers[i] = "cat";
        CHECK(vqa_accuracy("cat", answers) == doctest::Approx(expected[k]).epsilon(1e-12));
    }
    CHECK(vqa_accuracy("Two", {"2", "two", "three"}) == doctest::Approx(2.0 / 3));
    CHECK(vqa_accuracy("Two", {"2", "two", "three"}, false) == 0.0);
    CHECK_THROWS_AS(vqa_accuracy("x", {}), std::invalid_argument);
}

TEST_CASE("exact_match") {
    CHECK(exact_match("left", "left") == 1);
    CHECK(exact_match("lefts", "left") == 0);
    CHECK(exact_match("The left", "left") == 1);
    CHECK(exact_match("The left", "left", false) == 0);
    for (const auto* s : {"left", "2 cats", "red"}) CHECK(exact_match(s, s, true) == exact_match(s, s, false));
}

TEST_CASE("mc_accuracy") {
    const std::vector<std::string> choices{"push", "pull"};
    CHECK(mc_accuracy("push", choices, 0) == 1);
    CHECK(mc_accuracy("pull", choices, 0) == 0);
    CHECK(mc_accuracy("", choices, 0) == 0);
    CHECK_THROWS_AS(mc_accuracy("kick", choices, 0), std::invalid_argument);
    CHECK_THROWS_AS(mc_accuracy("push", choices, 2), std::invalid_argument);
}

TEST_CASE("judge prompt") {
    CHECK(judge_prompt("What is he doing?", {"horseback riding"}, "riding a horse") ==
          "Question: What is he doing?\nAnswer: horseback riding\nCandidate: riding a horse\nIs the candidate correct? ");
    CHECK(join_answers({"a", "b", "a", "c"}) == "a or b or c");
}

TEST_CASE("judge verdicts") {
    ScriptedLM lm("instruct_lm");
    const auto prompt = judge_prompt("What is he doing?", {"horseback riding"}, "riding a horse");
    lm.add_score(prompt, "yes", {make_token("yes", -0.2)});
    lm.add_score(prompt, "no", {make_token("no", -1.9)});
    auto r = llm_judge(lm, "What is he doing?", {"horseback riding"}, "riding a horse");
    CHECK(r.verdict == Verdict::Correct);
    CHECK(r.yes == doctest::Approx(-0.2));

    ScriptedLM tie("instruct_lm");
    tie.add_score({PromptMatch::Kind::Any, ""}, "yes", {make_token("yes", -1.0)});
    tie.add_score({PromptMatch::Kind::Any, ""}, "no", {make_token("no", -1.0)});
    CHECK(llm_judge(tie, "q", {"a"}, "a").verdict == Verdict::Incorrect);
    CHECK_THROWS_AS(llm_judge(tie, "q", {}, "a"), std::invalid_argument);
}

TEST_CASE("judge depends only on the sign of the score gap") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> lp(-5.0, 0.0);
    for (int i = 0; i < 1000; ++i) {
        ScriptedLM lm("instruct_lm");
        const double y = lp(rng);
        const double n = (i % 10 == 0) ? y : lp(rng);
        lm.add_score({PromptMatch::Kind::Any, ""}, "yes", {make_token("yes", y)});
        lm.add_score({PromptMatch::Kind::Any, ""}, "no", {make_token("no", n)});
        const auto r = llm_judge(lm, "q?", {"x", "y"}, "z");
        CHECK((r.verdict == Verdict::Correct) == (y > n));
    }
}
