#include <doctest.h>

#include <algorithm>
#include <random>

#include "vqd/mock.hpp"
#include "vqd/scoring.hpp"

using namespace vqd;

namespace {

TokenScore tok(double logprob, std::size_t bytes) { return TokenScore{std::string(bytes, 'x'), logprob, bytes}; }

std::shared_ptr<ScriptedLM> scorer(const std::string& prompt, const std::vector<std::pair<std::string, double>>& table) {
    auto lm = std::make_shared<ScriptedLM>("scorer");
    for (const auto& [cont, lp] : table) lm->add_score(prompt, cont, {make_token(cont, lp)});
    return lm;
}

}  // namespace

TEST_CASE("normalized log likelihood weights tokens by byte length") {
    CHECK(normalized_loglikelihood(std::vector{tok(-1.5, 3)}) == doctest::Approx(-1.5));
    CHECK(normalized_loglikelihood(std::vector{tok(-1.0, 2), tok(-3.0, 2)}) == doctest::Approx(-2.0));
    CHECK(normalized_loglikelihood(std::vector{tok(-1.0, 1), tok(-3.0, 3)}) == doctest::Approx(-2.5));
    CHECK_THROWS_AS(normalized_loglikelihood(std::vector<TokenScore>{}), std::invalid_argument);
    CHECK_THROWS_AS(normalized_loglikelihood(std::vector{tok(-1.0, 0)}), std::invalid_argument);
}

TEST_CASE("equal byte lengths give the arithmetic mean; raising one token raises the score") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lp(-10.0, 0.0);
    std::uniform_int_distribution<std::size_t> len(1, 20), bytes(1, 8);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = len(rng), b = bytes(rng);
        std::vector<TokenScore> t;
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            t.push_back(tok(lp(rng), b));
            sum += t.back().logprob;
        }
        CHECK(normalized_loglikelihood(t) == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-12));

        auto mixed = t;
        for (auto& x : mixed) x.byte_length = x.text.size() == 0 ? 1 : bytes(rng);
        const double before = normalized_loglikelihood(mixed);
        mixed[n / 2].logprob += 0.5;
        CHECK(normalized_loglikelihood(mixed) > before);
    }
}

TEST_CASE("select_prefix picks the argmax, ties go to the first") {
    const std::array<std::string, 2> prefixes{"Follow-up:", "Answer to the original question:"};
    auto a = scorer("T", {{prefixes[0], -0.4}, {prefixes[1], -0.9}});
    CHECK(select_prefix(*a, "T", prefixes).index == 0);
    auto b = scorer("T", {{prefixes[0], -0.9}, {prefixes[1], -0.4}});
    auto sel = select_prefix(*b, "T", prefixes);
    CHECK(sel.index == 1);
    CHECK(sel.scores[1] == doctest::Approx(-0.4));
    auto c = scorer("T", {{prefixes[0], -0.7}, {prefixes[1], -0.7}});
    CHECK(select_prefix(*c, "T", prefixes).index == 0);
}

TEST_CASE("select_choice picks the argmax and reports every score") {
    auto lm = scorer("Q", {{"A", -2.0}, {"B", -1.0}});
    auto sel = select_choice(*lm, "Q", {"A", "B"});
    CHECK(sel.choice == "B");
    CHECK(sel.index == 1);
    REQUIRE(sel.scores.size() == 2);
    CHECK(sel.scores[0].normalized == -2.0);

    auto tie = scorer("Q", {{"A", -1.0}, {"B", -1.0}, {"C", -1.0}});
    CHECK(select_choice(*tie, "Q", {"C", "A", "B"}).choice == "C");
    CHECK_THROWS_AS(select_choice(*lm, "Q", {"A"}), std::invalid_argument);
}

TEST_CASE("select_choice is invariant to choice order and to a constant shift") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lp(-10.0, -1.0);
    for (int round = 0; round < 200; ++round) {
        std::vector<std::pair<std::string, double>> table, shifted;
        std::vector<std::string> choices;
        for (int i = 0; i < 5; ++i) {
            choices.push_back("choice" + std::to_string(i));
            const double v = lp(rng) + 1e-6 * i;
            table.push_back({choices.back(), v});
            shifted.push_back({choices.back(), v - 0.75});
        }
        auto lm = scorer("P", table);
        auto moved = scorer("P", shifted);
        const auto best = select_choice(*lm, "P", choices).choice;
        CHECK(select_choice(*moved, "P", choices).choice == best);
        auto perm = choices;
        std::shuffle(perm.begin(), perm.end(), rng);
        CHECK(select_choice(*lm, "P", perm).choice == best);
    }
}

TEST_CASE("nearest choice short-circuits exact matches") {
    auto lm = std::make_shared<ScriptedLM>("mapper");
    auto r = map_to_nearest_choice(*lm, "cat", {"dog", "cat"});
    CHECK(r.choice == "cat");
    CHECK_FALSE(r.used_model);
    CHECK(lm->calls() == 0);
    CHECK(map_to_nearest_choice(*lm, "  cat ", {"dog", "cat"}).choice == "cat");
    CHECK(lm->calls() == 0);
}

TEST_CASE("nearest choice scores the quoted prompt") {
    const auto prompt = nearest_choice_prompt("puppy", {"dog", "cat"});
    CHECK(prompt == "Choices: ['dog', 'cat'] Candidate: puppy Most similar choice: ");
    auto lm = scorer(prompt, {{"dog", -0.2}, {"cat", -3.0}});
    auto r = map_to_nearest_choice(*lm, "puppy", {"dog", "cat"});
    CHECK(r.choice == "dog");
    CHECK(r.used_model);
    CHECK(lm->calls() == 1);
    CHECK_THROWS_AS(map_to_nearest_choice(*lm, "", {"dog", "cat"}), std::invalid_argument);
}

TEST_CASE("choice lists render like python literals") {
    CHECK(render_choice_list({"dog", "cat", "foo", "bar"}) == "['dog', 'cat', 'foo', 'bar']");
    CHECK(render_choice_list({"it's"}) == "[\"it's\"]");
    CHECK(trim("  a b \n") == "a b");
}
