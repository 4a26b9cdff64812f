#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"
#include "vqd/cli.hpp"
#include "vqd/report.hpp"
#include "vqd/runner.hpp"

using namespace vqd;
using vqd::testing::source_path;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("vqd-test-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> run_args(const std::string& method, const std::string& setting, const std::string& out) {
    return {"run", "--method", method, "--setting", setting, "--dataset", source_path("fixtures/scene_vqa.jsonl"),
            "--backends", "mock:" + source_path("fixtures/world.json"), "--seed", "7", "--out", out};
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("successive run writes a report with traces") {
    TempDir tmp;
    const auto r = run(run_args("successive", "direct", tmp / "r.json"));
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto report = read_report(tmp / "r.json");
    CHECK(report["format"] == kReportFormat);
    CHECK(report["config"]["method"] == "successive");
    CHECK(report["predictions"].size() == 50);
    for (const auto& p : report["predictions"]) CHECK_FALSE(p["trace"].empty());
    CHECK(std::filesystem::exists(tmp / "r.csv"));
    CHECK(r.out.find("wrote") != std::string::npos);
}

TEST_CASE("cold runs agree and a warm cache makes no calls") {
    for (const std::string method : {"e2e", "viper", "successive"}) {
        TempDir tmp;
        auto cold = run_args(method, "mc", tmp / "a.json");
        cold.insert(cold.end(), {"--cache", tmp / "cache", "--jobs", "1"});
        REQUIRE(run(cold).code == kExitOk);
        auto other = run_args(method, "mc", tmp / "b.json");
        other.insert(other.end(), {"--jobs", "4"});
        REQUIRE(run(other).code == kExitOk);
        auto warm = run_args(method, "mc", tmp / "c.json");
        warm.insert(warm.end(), {"--cache", tmp / "cache", "--jobs", "3"});
        REQUIRE(run(warm).code == kExitOk);

        const auto a = read_report(tmp / "a.json");
        const auto b = read_report(tmp / "b.json");
        const auto c = read_report(tmp / "c.json");
        CHECK(canonicalize(a) == canonicalize(b));
        CHECK(canonicalize(a) == canonicalize(c));
        CHECK(a["run"]["backend_calls"].get<int>() > 0);
        CHECK(c["run"]["backend_calls"] == 0);
        CHECK(c["run"]["cache_misses"] == 0);
    }
}

TEST_CASE("canonicalize drops run info and timestamps only") {
    const json r = {{"format", "x"}, {"run", {{"seconds", 1}}}, {"a", {{"ts", 5}, {"b", {{{"ts", 1}, {"c", 2}}}}}}};
    CHECK(canonicalize(r) == json{{"format", "x"}, {"a", {{"b", {{{"c", 2}}}}}}});
}

TEST_CASE("scores csv") {
    TempDir tmp;
    auto args = run_args("e2e", "direct", tmp / "r.json");
    args.insert(args.end(), {"--judge", "--limit", "5"});
    REQUIRE(run(args).code == kExitOk);
    std::ifstream in(tmp / "r.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "id,question_type,answer,outcome_class,vqa_accuracy,exact_match,judge");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) rows += !line.empty();
    CHECK(rows == 5);

    const json quoted = {{"config", {{"setting", "mc"}}},
                         {"predictions",
                          {{{"instance_id", "x"},
                            {"question_type", "a,b"},
                            {"answer_text", "say \"hi\""},
                            {"outcome_class", "NoException"},
                            {"scores", {{"mc_accuracy", 1}}}}}}};
    CHECK(scores_csv(quoted) == "id,question_type,answer,outcome_class,mc_accuracy\nx,\"a,b\",\"say \"\"hi\"\"\",NoException,1\n");
}

TEST_CASE("seeded sampling is reproducible") {
    TempDir tmp;
    auto a = run_args("e2e", "direct", tmp / "a.json");
    a.insert(a.end(), {"--limit", "10"});
    auto b = run_args("e2e", "direct", tmp / "b.json");
    b.insert(b.end(), {"--limit", "10"});
    REQUIRE(run(a).code == kExitOk);
    REQUIRE(run(b).code == kExitOk);
    const auto ra = read_report(tmp / "a.json");
    CHECK(ra["predictions"].size() == 10);
    CHECK(canonicalize(ra) == canonicalize(read_report(tmp / "b.json")));
}

TEST_CASE("configuration errors") {
    TempDir tmp;
    auto fs = run_args("viper", "direct", tmp / "r.json");
    fs.insert(fs.end(), {"--variant", "only-blip2-fs"});
    const auto r = run(fs);
    CHECK(r.code == kExitConfig);
    CHECK_FALSE(r.err.empty());
    CHECK_FALSE(std::filesystem::exists(tmp / "r.json"));

    auto variant = run_args("e2e", "direct", tmp / "r.json");
    variant.insert(variant.end(), {"--variant", "without-blip2"});
    CHECK(run(variant).code == kExitConfig);

    auto judge = run_args("e2e", "mc", tmp / "r.json");
    judge.push_back("--judge");
    CHECK(run(judge).code == kExitConfig);

    auto backends = run_args("e2e", "direct", tmp / "r.json");
    backends[8] = "carrier-pigeon:home";
    CHECK(run(backends).code == kExitConfig);

    CHECK(run({"run", "--method", "e2e"}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
}

TEST_CASE("missing data exits with the data code") {
    TempDir tmp;
    auto missing = run_args("e2e", "direct", tmp / "r.json");
    missing[6] = tmp / "nope.jsonl";
    CHECK(run(missing).code == kExitData);
    CHECK(run({"report", tmp / "nope.json"}).code == kExitData);
}

TEST_CASE("report views") {
    TempDir tmp;
    REQUIRE(run(run_args("viper", "direct", tmp / "r.json")).code == kExitOk);
    const auto errors = run({"report", tmp / "r.json", "--view", "errors"});
    REQUIRE(errors.code == kExitOk);
    CHECK(errors.out.find("No Exception") != std::string::npos);
    CHECK(errors.out.find("indentation-as-parsing") != std::string::npos);
    CHECK(errors.out.find("indentation-as-runtime") != std::string::npos);
    CHECK(errors.out.find("NameError") != std::string::npos);

    const auto report = read_report(tmp / "r.json");
    const auto records = outcome_records(report);
    CHECK(records.size() == 50);
    const auto table = error_table(records);
    CHECK(report["errors"]["indentation-as-parsing"]["summary"]["counts"]["NoException"] == table.counts[0]);

    const auto csv = run({"report", tmp / "r.json", "--csv"});
    CHECK(csv.out.starts_with("id,question_type,answer,outcome_class,"));
    CHECK(run({"report", tmp / "r.json", "--view", "bogus"}).code != kExitOk);

    REQUIRE(run(run_args("e2e", "direct", tmp / "e.json")).code == kExitOk);
    const auto e2e_errors = run({"report", tmp / "e.json", "--view", "errors"});
    CHECK(e2e_errors.out.find("No Exception") == std::string::npos);
}

TEST_CASE("validate") {
    TempDir tmp;
    const auto good = run({"validate", source_path("fixtures/scene_vqa.jsonl")});
    CHECK(good.code == kExitOk);
    CHECK(good.out.find("50 records, 0 violations") != std::string::npos);

    write(tmp / "bad.jsonl",
          R"({"id":"a","image_ref":"x","question":"q?","answers":["1"]})"
          "\n"
          R"({"id":"a","image_ref":"x","question":"q2?","answers":["2"]})"
          "\n"
          R"({"id":"b","image_ref":"x","question":"q3?","answers":["2"]})"
          "\n"
          "not json\n");
    const auto direct = run({"validate", tmp / "bad.jsonl"});
    CHECK(direct.code == kExitData);
    CHECK(direct.out.find(":2: warning: duplicate id") != std::string::npos);
    CHECK(direct.out.find(":4: error:") != std::string::npos);

    const auto mc = run({"validate", tmp / "bad.jsonl", "--setting", "mc"});
    CHECK(mc.code == kExitData);
    CHECK(mc.out.find(":1: error:") != std::string::npos);
    CHECK(mc.out.find("4 records, 4 violations") != std::string::npos);
}

TEST_CASE("config file") {
    TempDir tmp;
    write(tmp / "run.toml", "method = \"e2e\"\nsetting = \"mc\"\nseed = 7\nlimit = 4\n");
    const auto r = run({"run", "--config", tmp / "run.toml", "--dataset", source_path("fixtures/scene_vqa.jsonl"),
                        "--backends", "mock:" + source_path("fixtures/world.json"), "--out", tmp / "r.json"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto report = read_report(tmp / "r.json");
    CHECK(report["config"]["setting"] == "mc");
    CHECK(report["predictions"].size() == 4);

    write(tmp / "section.ini", "[run]\nmethod = viper\njudge = true\nlimit = 3\n");
    const auto flags_win = run({"run", "--config", tmp / "section.ini", "--dataset",
                                source_path("fixtures/scene_vqa.jsonl"), "--backends",
                                "mock:" + source_path("fixtures/world.json"), "--limit", "2", "--out", tmp / "s.json"});
    REQUIRE_MESSAGE(flags_win.code == kExitOk, flags_win.err);
    const auto s = read_report(tmp / "s.json");
    CHECK(s["config"]["method"] == "viper");
    CHECK(s["config"]["judge"] == true);
    CHECK(s["predictions"].size() == 2);

    CHECK(run({"run", "--config", tmp / "missing.toml", "--dataset", "x", "--backends", "y"}).code == kExitConfig);
    write(tmp / "odd.toml", "[elsewhere]\nmethod = \"e2e\"\n");
    CHECK(run({"run", "--config", tmp / "odd.toml", "--dataset", "x", "--backends", "y"}).code == kExitConfig);
}

TEST_CASE("score_prediction") {
    BenchmarkInstance mc{"m", "x", "q?", {"pull"}, std::vector<std::string>{"push", "pull"}, std::nullopt, ""};
    Prediction p;
    p.answer_text = "pull";
    CHECK(score_prediction(mc, {EvaluationMode::MultipleChoice}, p)["mc_accuracy"] == 1);
    p.answer_text = "";
    CHECK(score_prediction(mc, {EvaluationMode::MultipleChoice}, p)["mc_accuracy"] == 0);

    BenchmarkInstance direct{"d", "x", "q?", {"two", "2", "3"}, std::nullopt, std::nullopt, ""};
    p.answer_text = "Two";
    const auto s = score_prediction(direct, {}, p);
    CHECK(s["vqa_accuracy"].get<double>() == doctest::Approx(2.0 / 3));
    CHECK(s["exact_match"] == 1);
    CHECK_FALSE(s.contains("judge"));
}
