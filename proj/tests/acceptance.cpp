// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "soup.hpp"
#include "support.hpp"
#include "vqd/analysis.hpp"
#include "vqd/assets.hpp"
#include "vqd/cli.hpp"
#include "vqd/e2e.hpp"
#include "vqd/metrics.hpp"
#include "vqd/program/api_prompt.hpp"
#include "vqd/report.hpp"
#include "vqd/scoring.hpp"
#include "vqd/successive.hpp"

using namespace vqd;
using namespace vqd::testing;
using program::ErrorLabel;
using program::ExecutionStatus;

namespace {

struct Check {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    std::string name;
    double limit_seconds;  // 0: no limit
    std::function<Check()> check;
};

std::size_t occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

// 1. Byte-length weighted likelihood against a recomputation over the full token sequence.
Check likelihood_oracle() {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> len(1, 20), bytes(1, 8), prompt_len(0, 10);
    std::uniform_real_distribution<double> lp(-10.0, 0.0);
    int agree = 0;
    double worst = 0;
    for (int round = 0; round < 1000; ++round) {
        const int m = prompt_len(rng), n = len(rng);
        std::vector<double> logp(m + n);
        std::vector<int> L(m + n);
        for (int i = 0; i < m + n; ++i) {
            logp[i] = lp(rng);
            L[i] = bytes(rng);
        }
        double denom = 0;
        for (int k = m; k <= m + n - 1; ++k) denom += L[k];
        double expected = 0;
        for (int j = m; j <= m + n - 1; ++j) expected += logp[j] * (L[j] / denom);

        std::vector<TokenScore> continuation;
        for (int j = m; j < m + n; ++j)
            continuation.push_back(TokenScore{std::string(static_cast<std::size_t>(L[j]), 'b'), logp[j],
                                              static_cast<std::size_t>(L[j])});
        const double got = normalized_loglikelihood(continuation);
        worst = std::max(worst, std::abs(got - expected));
        agree += std::abs(got - expected) <= 1e-9;
    }
    std::ostringstream d;
    d << agree << "/1000 within 1e-9, max error " << std::scientific << std::setprecision(2) << worst;
    return {agree == 1000, d.str()};
}

// 2. The black-cats listing against a direct count over random scene graphs.
Check black_cats() {
    const std::string listing = "def execute_command(image) -> str:\n"
                                "  image_patch = ImagePatch(image)\n"
                                "  cat_patches = image_patch.find('cat')\n"
                                "  black_cat_patches = [\n"
                                "    p for p in cat_patches if\n"
                                "    p.verify_property('cat', 'black')\n"
                                "  ]\n"
                                "  return len(black_cat_patches)\n";
    std::mt19937_64 rng(23);
    static const std::vector<std::string> categories{"cat", "dog", "bird", "cat"};
    static const std::vector<std::string> colours{"black", "white", "brown", "orange"};
    std::uniform_real_distribution<double> x(0, 600), y(0, 440), size(5, 200);
    int agree = 0;
    for (int round = 0; round < 200; ++round) {
        std::vector<SceneObject> objects;
        int expected = 0;
        for (int i = 0, n = static_cast<int>(rng() % 13); i < n; ++i) {
            const double l = x(rng), b = y(rng);
            const Box box{l, b, std::min(640.0, l + size(rng)), std::min(480.0, b + size(rng))};
            std::vector<std::string> attrs;
            for (const auto& c : colours)
                if (rng() % 3 == 0) attrs.push_back(c);
            const auto& cat = categories[rng() % categories.size()];
            if (cat == "cat" && std::find(attrs.begin(), attrs.end(), "black") != attrs.end()) ++expected;
            objects.push_back(object(i + 1, cat, box, attrs, 1.0 + i));
        }
        World w({scene("scene.jpg", objects)});
        const auto out = program::run_source(listing, "scene.jpg", w.suite());
        agree += out.status == ExecutionStatus::Ok && out.result == std::to_string(expected);
    }
    return {agree == 200, std::to_string(agree) + "/200 scenes match"};
}

// 3. Labelled corpus plus token-soup fuzzing.
Check taxonomy() {
    struct Case {
        std::string body;
        OutcomeClass cls;
        std::optional<ErrorLabel> label;
    };
    const std::string sig = "def execute_command(image) -> str:\n";
    const std::vector<Case> corpus = {
        {sig + "  return len(ImagePatch(image).find('cat'))\n", OutcomeClass::NoException, std::nullopt},
        {"def execute_command(image) -> str\n  return 'x'\n", OutcomeClass::Parsing, std::nullopt},
        {sig + "  return len(image.find('cat')\n", OutcomeClass::Parsing, std::nullopt},
        {sig + "  return image_p.find('cat')\n", OutcomeClass::Runtime, ErrorLabel::NameError},
        {sig + "  return ImagePatch(image).colour\n", OutcomeClass::Runtime, ErrorLabel::AttributeError},
        {sig + "  return ImagePatch(image).find('unicorn')[0]\n", OutcomeClass::Runtime, ErrorLabel::IndexError},
        {sig + "  return 'cats: ' + len(ImagePatch(image).find('cat'))\n", OutcomeClass::Runtime,
         ErrorLabel::TypeError},
        {sig + "    x = 1\n  return x\n", OutcomeClass::Runtime, ErrorLabel::IndentationError},
        {sig + "  return int('many')\n", OutcomeClass::Runtime, ErrorLabel::ValueError},
        {sig + "  return {'cat': 1}['dog']\n", OutcomeClass::Runtime, ErrorLabel::KeyError},
        {sig + "  return len(ImagePatch(image).find('bird')) / 0\n", OutcomeClass::Runtime,
         ErrorLabel::ZeroDivisionError},
        {sig + "  n = 0\n  while True:\n    n += 1\n", OutcomeClass::Runtime, ErrorLabel::Other},
    };
    const auto suite = soup_suite();
    std::size_t correct = 0;
    std::set<ErrorLabel> labels;
    for (const auto& c : corpus) {
        const auto o = program::run_source(c.body, "img", suite);
        const OutcomeRecord r = OutcomeRecord::from(o);
        const auto cls = classify_outcome(r, IndentationView::AsRuntime);
        const auto label = breakdown_label(r, IndentationView::AsRuntime);
        if (cls == c.cls && label == c.label) ++correct;
        if (label) labels.insert(*label);
    }

    std::mt19937_64 rng(4242);
    std::size_t unclassified = 0, escapes = 0, over_budget = 0;
    program::ExecutionOptions opt;
    for (int i = 0; i < 10000; ++i) {
        const auto src = token_soup(rng);
        try {
            const auto o = program::run_source(src, "img", suite, opt);
            unclassified += !well_classified(o);
            over_budget += o.steps_used > opt.step_budget;
        } catch (...) {
            ++escapes;
        }
    }
    std::ostringstream d;
    d << correct << "/" << corpus.size() << " corpus programs, " << labels.size()
      << "/9 runtime labels covered; fuzz 10000: " << unclassified << " unclassified, " << escapes
      << " escapes, " << over_budget << " over budget";
    return {correct == corpus.size() && labels.size() == 9 && unclassified == 0 && escapes == 0 && over_budget == 0,
            d.str()};
}

// 4. Prompt variants at the string level.
Check variants() {
    using program::PromptVariant;
    const auto demos = program::parse_code_demonstrations(asset("code_demos_gqa.txt"));
    const std::vector<std::string> questions{"Is the cup red?", "How many dogs are left of the car?",
                                             "What is the man holding?"};
    const EvaluationSetting direct{EvaluationMode::DirectAnswer};
    const EvaluationSetting mc{EvaluationMode::MultipleChoice};
    const std::vector<std::string> choices{"yes", "no"};
    int checks = 0, ok = 0;
    for (const auto& q : questions) {
        for (bool is_mc : {false, true}) {
            const auto& setting = is_mc ? mc : direct;
            const auto ch = is_mc ? std::optional(choices) : std::nullopt;
            const auto without = program::build_code_prompt(q, setting, ch, PromptVariant::WithoutBlip2);
            ++checks;
            ok += occurrences(without, "simple_query") == 0;
            const auto zs = program::build_code_prompt(q, setting, ch, PromptVariant::OnlyBlip2ZeroShot);
            const auto fs = program::build_code_prompt(q, setting, ch, PromptVariant::OnlyBlip2FewShot, demos);
            for (const auto* p : {&zs, &fs}) {
                bool clean = program::count_calls(*p, "simple_query") > 0;
                for (const auto& m : program::non_vqa_modules()) clean = clean && program::count_calls(*p, m) == 0;
                ++checks;
                ok += clean;
            }
            std::size_t embedded = 0;
            for (const auto& d : demos) embedded += occurrences(fs, "# " + d.question + "\n" + d.program);
            ++checks;
            ok += demos.size() == 3 && embedded == 3 &&
                  occurrences(fs, "def execute_command(") - occurrences(zs, "def execute_command(") == 3;
        }
    }
    return {ok == checks, std::to_string(ok) + "/" + std::to_string(checks) + " prompt assertions"};
}

double weighted_mean(const std::vector<TokenScore>& t) {
    double total = 0, acc = 0;
    for (const auto& x : t) total += static_cast<double>(x.byte_length);
    for (const auto& x : t) acc += x.logprob * static_cast<double>(x.byte_length) / total;
    return acc;
}

// 5. Successive prompting: transcript replay, step cap, prefix selection.
Check successive() {
    const std::string question = "Has the food this woman is preparing been fried?";
    const std::string expected = "Question: Has the food this woman is preparing been fried?\n"
                                 "Follow-up: What's in the image?\n"
                                 "Follow-up answer: a person is preparing a salad on the counter\n"
                                 "Follow-up: Has the lettuce been fried?\n"
                                 "Follow-up answer: no\n"
                                 "Answer to the original question: no\n";
    auto kitchen = [] {
        auto s = scene("kitchen.jpg", {object(1, "woman", {100, 50, 300, 450})});
        s.scene_qa["What's in the image?"] = "a person is preparing a salad on the counter";
        s.scene_qa["Has the lettuce been fried?"] = "no";
        return World({s});
    };
    auto prefix = [](ScriptedLM& lm, PromptMatch m, double f, double a) {
        lm.add_score(m, kFollowUpLabel, {make_token(kFollowUpLabel, f)});
        lm.add_score(m, kAnswerLabel, {make_token(kAnswerLabel, a)});
    };
    const BenchmarkInstance inst{"salad", "kitchen.jpg", question, {"no"}, std::nullopt, std::nullopt, "val"};

    auto w = kitchen();
    auto& lm = *w.instruct_lm;
    prefix(lm, {PromptMatch::Kind::Suffix, "Question: " + question + "\n"}, -0.1, -2.0);
    prefix(lm, {PromptMatch::Kind::Suffix, "on the counter\n"}, -0.2, -1.0);
    prefix(lm, {PromptMatch::Kind::Suffix, "Follow-up answer: no\n"}, -3.0, -0.1);
    lm.add_rule({PromptMatch::Kind::Suffix, "Question: " + question + "\nFollow-up: "}, "What's in the image?\n");
    lm.add_rule({PromptMatch::Kind::Suffix, "on the counter\nFollow-up: "}, "Has the lettuce been fried?");
    lm.add_rule({PromptMatch::Kind::Suffix, "Answer to the original question: "}, "no\n");
    const auto [pred, dt] = run_decomposition(inst, {}, w.suite(), default_successive_options());
    const bool replay = dt.transcript(question) == expected && dt.steps.size() == 2 && pred.answer_text == "no";

    int capped = 0;
    for (std::size_t cap = 1; cap <= 6; ++cap) {
        auto c = kitchen();
        prefix(*c.instruct_lm, {PromptMatch::Kind::Any, ""}, -0.1, -5.0);
        c.instruct_lm->add_rule({PromptMatch::Kind::Suffix, "Follow-up: "}, "What's in the image?");
        c.instruct_lm->add_rule({PromptMatch::Kind::Any, ""}, "no");
        auto opts = default_successive_options();
        opts.max_steps = cap;
        const auto [p, d] = run_decomposition(inst, {}, c.suite(), opts);
        capped += d.steps.size() == cap && d.terminated_by == Termination::StepCap;
    }

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> lp(-10.0, 0.0);
    int agree = 0;
    for (int round = 0; round < 500; ++round) {
        auto r = kitchen();
        std::vector<TokenScore> f, a;
        for (int i = 0, n = 1 + static_cast<int>(rng() % 4); i < n; ++i)
            f.push_back(TokenScore{std::string(1 + rng() % 6, 'f'), lp(rng), 0});
        for (int i = 0, n = 1 + static_cast<int>(rng() % 6); i < n; ++i)
            a.push_back(TokenScore{std::string(1 + rng() % 6, 'a'), lp(rng), 0});
        for (auto* seq : {&f, &a})
            for (auto& t : *seq) t.byte_length = t.text.size();
        r.instruct_lm->add_score({PromptMatch::Kind::Any, ""}, kFollowUpLabel, f);
        r.instruct_lm->add_score({PromptMatch::Kind::Any, ""}, kAnswerLabel, a);
        r.instruct_lm->add_rule({PromptMatch::Kind::Suffix, "Follow-up: "}, "What's in the image?");
        r.instruct_lm->add_rule({PromptMatch::Kind::Any, ""}, "no");
        auto opts = default_successive_options();
        opts.max_steps = 1;
        const auto [p, d] = run_decomposition(inst, {}, r.suite(), opts);
        const bool follow = weighted_mean(f) >= weighted_mean(a);
        agree += d.steps.size() == (follow ? 1u : 0u);
    }
    std::ostringstream out;
    out << "transcript " << (replay ? "verbatim" : "differs") << ", step cap " << capped << "/6, prefix argmax "
        << agree << "/500";
    return {replay && capped == 6 && agree == 500, out.str()};
}

// 6. Metric values and properties.
Check metrics() {
    const std::vector<int> matches{0, 1, 2, 3, 5};
    const std::vector<double> expected{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0};
    int values = 0;
    for (std::size_t k = 0; k < matches.size(); ++k) {
        std::vector<std::string> answers(10, "tree");
        for (int i = 0; i < matches[k]; ++i) answers[static_cast<std::size_t>(i)] = "horse";
        values += std::abs(vqa_accuracy("horse", answers) - expected[k]) <= 1e-9;
    }

    std::mt19937_64 rng(59);
    static const std::string alphabet = "aAbTeHhnN oOwtrT.!?,;:\t\nxyz019 ";
    static const std::vector<std::string> pieces{"The ", "a ", "An ", "two", "Ten", "  ", ".", "!?", "THE", "zero"};
    int idempotent = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string s;
        for (int k = 0, n = static_cast<int>(rng() % 14); k < n; ++k)
            s += rng() % 2 ? pieces[rng() % pieces.size()] : std::string(1, alphabet[rng() % alphabet.size()]);
        const auto once = normalize_answer(s);
        idempotent += normalize_answer(once) == once;
    }

    std::uniform_real_distribution<double> lp(-6.0, 0.0);
    int judged = 0;
    for (int i = 0; i < 1000; ++i) {
        ScriptedLM lm("instruct_lm");
        std::vector<TokenScore> yes{make_token("yes", lp(rng))}, no{make_token("no", lp(rng))};
        if (i % 7 == 0) no = {make_token("no", yes[0].logprob)};
        if (i % 5 == 0) yes.push_back(make_token("!", lp(rng)));
        lm.add_score({PromptMatch::Kind::Any, ""}, "yes", yes);
        lm.add_score({PromptMatch::Kind::Any, ""}, "no", no);
        const auto r = llm_judge(lm, "What is he doing?", {"horseback riding", "riding"}, "riding a horse");
        // Fixtures built as ties can differ by an ulp in the oracle's arithmetic; a tie must be Incorrect.
        const double gap = weighted_mean(yes) - weighted_mean(no);
        const bool correct = std::abs(gap) > 1e-12 && gap > 0;
        judged += (r.verdict == vqd::Verdict::Correct) == correct;
    }
    std::ostringstream d;
    d << "vqa_accuracy " << values << "/5, idempotent " << idempotent << "/10000, judge " << judged << "/1000";
    return {values == 5 && idempotent == 10000 && judged == 1000, d.str()};
}

// 7. Choice selection does not depend on choice order.
Check choice_invariance() {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> lp(-8.0, 0.0);
    int e2e_ok = 0, map_ok = 0;
    for (int round = 0; round < 1000; ++round) {
        const std::size_t n = 2 + rng() % 5;
        std::vector<std::string> choices;
        std::set<double> used;
        auto world = World({scene("img.jpg", {})});
        auto mapper = std::make_shared<ScriptedLM>("instruct_lm");
        const auto prompt = vqa_prompt("Which one fits?");
        for (std::size_t i = 0; i < n; ++i) {
            choices.push_back("choice " + std::to_string(round) + "-" + std::to_string(i));
            double s;
            do s = lp(rng); while (!used.insert(s).second);
            world.vlm_lm->add_score(prompt, choices.back(), {make_token(choices.back(), s)});
            mapper->add_score({PromptMatch::Kind::Any, ""}, choices.back(), {make_token(choices.back(), -8.0 - s)});
        }
        auto shuffled = choices;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        BenchmarkInstance a{"x", "img.jpg", "Which one fits?", {choices[0]}, choices, std::nullopt, ""};
        BenchmarkInstance b = a;
        b.choices = shuffled;
        e2e_ok += answer_multiple_choice(a, world.suite()).answer_text ==
                  answer_multiple_choice(b, world.suite()).answer_text;
        map_ok += map_to_nearest_choice(*mapper, "something else", choices).choice ==
                  map_to_nearest_choice(*mapper, "something else", shuffled).choice;
    }
    return {e2e_ok == 1000 && map_ok == 1000,
            "end-to-end " + std::to_string(e2e_ok) + "/1000, nearest-choice mapping " + std::to_string(map_ok) + "/1000"};
}

// 8. Report determinism across cold runs and zero calls on a warm cache.
Check determinism() {
    const auto dir = std::filesystem::temp_directory_path() / ("vqd-acceptance-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
    std::ostringstream detail;
    bool pass = true;
    for (const std::string method : {"e2e", "viper", "successive"}) {
        auto run = [&](const std::string& name, const std::string& cache, const std::string& jobs) {
            std::ostringstream out, err;
            const std::vector<std::string> args{
                "run",      "--method", method, "--setting", "direct", "--dataset",
                source_path("fixtures/scene_vqa.jsonl"), "--backends", "mock:" + source_path("fixtures/world.json"),
                "--seed",   "7",        "--cache", (dir / cache).string(), "--jobs", jobs,
                "--out",    (dir / (method + "-" + name + ".json")).string()};
            if (cli_main(args, out, err) != kExitOk) throw std::runtime_error(method + ": " + err.str());
            return read_report(dir / (method + "-" + name + ".json"));
        };
        const auto a = run("cold-a", method + "-cache-a", "1");
        const auto b = run("cold-b", method + "-cache-b", "4");
        const auto warm = run("warm", method + "-cache-a", "2");
        const bool same = canonicalize(a) == canonicalize(b) && canonicalize(a) == canonicalize(warm);
        const auto calls = warm["run"]["backend_calls"].get<std::uint64_t>();
        pass = pass && same && calls == 0 && a["predictions"].size() == 50;
        detail << method << ": " << a["predictions"].size() << " instances, "
               << (same ? "identical" : "DIFFERENT") << ", warm calls " << calls << "; ";
    }
    std::filesystem::remove_all(dir);
    auto text = detail.str();
    text.resize(text.size() - 2);
    return {pass, text};
}

// 9. Table percentages and row format.
Check tables() {
    using program::ParseLabel;
    const OutcomeRecord ok{ExecutionStatus::Ok, std::nullopt, std::nullopt};
    const OutcomeRecord syntax{ExecutionStatus::ParseError, std::nullopt, ParseLabel::SyntaxError};
    const OutcomeRecord indent{ExecutionStatus::ParseError, std::nullopt, ParseLabel::IndentationError};
    auto rt = [](ErrorLabel l) { return OutcomeRecord{ExecutionStatus::RuntimeError, l, std::nullopt}; };

    std::vector<OutcomeRecord> vqa(99, ok);
    vqa.push_back(rt(ErrorLabel::AttributeError));
    std::vector<OutcomeRecord> gqa(50, ok);
    gqa.insert(gqa.end(), 25, syntax);
    gqa.insert(gqa.end(), 25, rt(ErrorLabel::NameError));
    std::vector<OutcomeRecord> mixed(6, ok);
    mixed.insert(mixed.end(), 8, rt(ErrorLabel::NameError));
    mixed.insert(mixed.end(), 4, rt(ErrorLabel::IndexError));
    mixed.insert(mixed.end(), 2, rt(ErrorLabel::TypeError));
    mixed.insert(mixed.end(), 1, rt(ErrorLabel::Other));
    mixed.insert(mixed.end(), 5, indent);
    mixed.push_back(syntax);

    int ok_checks = 0, checks = 0;
    auto expect = [&](bool c) { ++checks; ok_checks += c; };
    const auto t1 = error_table(vqa), t2 = error_table(gqa);
    expect(t1.percent == std::array<double, 3>{99.0, 0.0, 1.0});
    expect(t2.percent == std::array<double, 3>{50.0, 25.0, 25.0});
    const auto summary_rt = error_table(mixed, IndentationView::AsRuntime);
    expect(summary_rt.counts == std::array<std::size_t, 3>{6, 1, 20});
    const auto b = runtime_breakdown(mixed, IndentationView::AsRuntime);
    std::array<double, 9> want{};
    want[0] = 40.0;  // NameError 8/20
    want[2] = 20.0;  // IndexError 4/20
    want[3] = 10.0;  // TypeError 2/20
    want[4] = 25.0;  // IndentationError 5/20
    want[8] = 5.0;   // Other 1/20
    expect(b.total == 20 && b.percent == want);
    const auto bp = runtime_breakdown(mixed, IndentationView::AsParsing);
    expect(bp.total == 15 && std::abs(bp.percent[0] - 800.0 / 15.0) < 1e-12);
    bool threw = false;
    try {
        error_table({});
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    expect(threw);

    const auto summary = render_error_table({"VQAv2", "GQA"}, {t1, t2});
    expect(summary ==
           "                      & VQAv2 & GQA \\\\\n"
           "No Exception          & 99\\%  & 50\\% \\\\\n"
           "Parsing               & 0\\%   & 25\\% \\\\\n"
           "Runtime               & 1\\%   & 25\\% \\\\\n");
    const auto breakdown = render_runtime_breakdown({"GQA"}, {b});
    expect(breakdown.find("NameError             & 40\\% \\\\\n") != std::string::npos &&
           breakdown.find("IndentationError      & 25\\% \\\\\n") != std::string::npos &&
           breakdown.find("KeyError              & 0\\% \\\\\n") != std::string::npos &&
           occurrences(breakdown, "\n") == 10);
    return {ok_checks == checks, std::to_string(ok_checks) + "/" + std::to_string(checks) + " table assertions"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"likelihood-normalization-oracle", 1.0, likelihood_oracle},
        {"black-cats-interpreter-oracle", 5.0, black_cats},
        {"error-taxonomy-coverage", 60.0, taxonomy},
        {"prompt-variant-invariants", 0, variants},
        {"successive-prompting-replay", 0, successive},
        {"metric-values", 0, metrics},
        {"choice-selection-invariance", 0, choice_invariance},
        {"end-to-end-determinism", 0, determinism},
        {"table-shapes", 0, tables},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Check v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ostringstream time;
        time << std::fixed << std::setprecision(3) << secs << " s";
        if (c.limit_seconds > 0) {
            time << " (limit " << c.limit_seconds << " s)";
            if (secs >= c.limit_seconds) v.pass = false;
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << ": " << v.detail << "; " << time.str() << "\n";
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
