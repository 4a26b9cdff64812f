#include <doctest.h>

#include "soup.hpp"
#include "vqd/analysis.hpp"

using namespace vqd;
using namespace vqd::testing;

TEST_CASE("token soup always yields one classified outcome") {
    std::mt19937_64 rng(2024);
    const auto suite = soup_suite();
    program::ExecutionOptions opt;
    opt.step_budget = 20000;
    std::array<std::size_t, 3> seen{};
    for (int i = 0; i < 2000; ++i) {
        const auto src = token_soup(rng);
        program::ExecutionOutcome o;
        try {
            o = program::run_source(src, "img", suite, opt);
        } catch (const std::exception& e) {
            FAIL_CHECK("escaped: " << e.what() << "\n" << src);
            continue;
        }
        CHECK_MESSAGE(well_classified(o), src);
        CHECK(o.steps_used <= opt.step_budget);
        ++seen[static_cast<std::size_t>(classify_outcome(OutcomeRecord::from(o)))];
    }
    CHECK(seen[1] > 0);
    MESSAGE("ok " << seen[0] << " parse " << seen[1] << " runtime " << seen[2]);
}

TEST_CASE("well-formed fragments reach execution") {
    std::mt19937_64 rng(77);
    const auto suite = soup_suite();
    static const std::vector<std::string> exprs = {"1", "'cat'", "len(image_patch.find('cat'))", "[1, 2][3]",
                                                   "image_patch.simple_query('q?')", "1 / 0", "{}['k']", "zz",
                                                   "int('x')", "image_patch.colour", "'a' + 2"};
    for (int i = 0; i < 300; ++i) {
        std::string src = "def execute_command(image) -> str:\n  image_patch = ImagePatch(image)\n";
        src += "  return " + exprs[rng() % exprs.size()] + "\n";
        const auto o = program::run_source(src, "img", suite);
        CHECK(o.status != program::ExecutionStatus::ParseError);
        CHECK(well_classified(o));
    }
}
