#include <doctest.h>

#include "vqd/assets.hpp"
#include "vqd/program/api_prompt.hpp"

using namespace vqd;
using namespace vqd::program;

namespace {

std::vector<Demonstration> gqa_demos() { return parse_code_demonstrations(asset("code_demos_gqa.txt")); }

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

const EvaluationSetting direct{};
const EvaluationSetting mc{EvaluationMode::MultipleChoice};

}  // namespace

TEST_CASE("variant spellings") {
    for (auto v : {PromptVariant::TaskAgnostic, PromptVariant::WithoutBlip2, PromptVariant::OnlyBlip2ZeroShot,
                   PromptVariant::OnlyBlip2FewShot})
        CHECK(parse_prompt_variant(to_string(v)) == v);
    CHECK_THROWS(parse_prompt_variant("blip"));
    CHECK(api_surface(PromptVariant::WithoutBlip2) == ApiSurface::WithoutSimpleQuery);
    CHECK(api_surface(PromptVariant::OnlyBlip2FewShot) == ApiSurface::OnlySimpleQuery);
}

TEST_CASE("task-agnostic prompt carries the full API and ends with the signature") {
    const auto p = build_code_prompt("How many black cats are there?", direct, std::nullopt, PromptVariant::TaskAgnostic);
    CHECK(p.find("class ImagePatch") != std::string::npos);
    CHECK(p.find("VideoSegment") == std::string::npos);
    for (const auto& m : non_vqa_modules()) CHECK_MESSAGE(p.find(m) != std::string::npos, m);
    CHECK(p.find("simple_query") != std::string::npos);
    CHECK(p.ends_with("# How many black cats are there?\ndef execute_command(image) -> str:"));
}

TEST_CASE("without-BLIP-2 prompt never mentions simple_query") {
    const auto p = build_code_prompt("Is the cup red?", direct, std::nullopt, PromptVariant::WithoutBlip2);
    CHECK(count(p, "simple_query") == 0);
    CHECK(p.find("verify_property") != std::string::npos);
}

TEST_CASE("only-BLIP-2 prompts expose no other module") {
    const auto demos = gqa_demos();
    for (auto v : {PromptVariant::OnlyBlip2ZeroShot, PromptVariant::OnlyBlip2FewShot}) {
        const auto p = build_code_prompt("Is the cup red?", direct, std::nullopt, v,
                                         v == PromptVariant::OnlyBlip2FewShot ? demos : std::vector<Demonstration>{});
        CHECK(count_calls(p, "simple_query") > 0);
        for (const auto& m : non_vqa_modules()) CHECK_MESSAGE(count_calls(p, m) == 0, m);
    }
}

TEST_CASE("few-shot embeds exactly three demonstrations") {
    const auto demos = gqa_demos();
    REQUIRE(demos.size() == 3);
    const auto zs = build_code_prompt("Is the cup red?", direct, std::nullopt, PromptVariant::OnlyBlip2ZeroShot);
    const auto fs = build_code_prompt("Is the cup red?", direct, std::nullopt, PromptVariant::OnlyBlip2FewShot, demos);
    CHECK(count(fs, "def execute_command(") - count(zs, "def execute_command(") == 3);
    CHECK(fs.find("Are there both windows and doors") != std::string::npos);
    for (const auto& d : demos) CHECK(fs.find("# " + d.question + "\n" + d.program) != std::string::npos);

    auto two = demos;
    two.pop_back();
    CHECK_THROWS_AS(build_code_prompt("q?", direct, std::nullopt, PromptVariant::OnlyBlip2FewShot, two),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_code_prompt("q?", direct, std::nullopt, PromptVariant::OnlyBlip2FewShot),
                    std::invalid_argument);
}

TEST_CASE("demonstrations that use hidden modules are rejected") {
    std::vector<Demonstration> bad(3, Demonstration{"Is there a cat?",
                                                    "def execute_command(image) -> str:\n    return "
                                                    "bool_to_yesno(image.exists('cat'))\n"});
    CHECK_THROWS_AS(build_code_prompt("q?", direct, std::nullopt, PromptVariant::OnlyBlip2FewShot, bad),
                    std::invalid_argument);
}

TEST_CASE("multiple choice adds the answers comment and extends the signature") {
    const std::vector<std::string> choices{"pull", "push"};
    const auto p = build_code_prompt("What would you do with the door?", mc, choices, PromptVariant::TaskAgnostic);
    CHECK(p.find("# What would you do with the door?\n# possible answers : ['pull', 'push']\n") != std::string::npos);
    CHECK(p.ends_with("def execute_command(image, possible_choices=['pull', 'push']) -> str:"));
    CHECK(code_signature(std::nullopt) == "def execute_command(image) -> str:");
    CHECK_THROWS_AS(build_code_prompt("q?", mc, std::nullopt, PromptVariant::TaskAgnostic), std::invalid_argument);
}

TEST_CASE("count_calls ignores longer identifiers") {
    CHECK(count_calls("a.simple_query(x) + my_simple_query(y) + simple_query (z)", "simple_query") == 1);
    CHECK(count_calls("find(x); image.find('y'); refind(z)", "find") == 2);
}

TEST_CASE("shipped assets") {
    CHECK(find_asset("api_full.txt").has_value());
    CHECK_FALSE(find_asset("missing.txt").has_value());
    CHECK_THROWS_AS(asset("missing.txt"), std::out_of_range);
    CHECK(load_text("successive_instruction.txt") == asset("successive_instruction.txt"));
}
