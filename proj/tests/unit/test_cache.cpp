#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <unistd.h>

#include "support.hpp"
#include "vqd/cache.hpp"
#include "vqd/wire.hpp"

using namespace vqd;
using vqd::testing::object;
using vqd::testing::scene;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("vqd-cache-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

std::shared_ptr<ScriptedLM> lm() {
    auto m = std::make_shared<ScriptedLM>("lm");
    m->add_rule({PromptMatch::Kind::Any, ""}, "a cat");
    m->add_score("P", "yes", {make_token("yes", -0.25)});
    return m;
}

}  // namespace

TEST_CASE("miss stores, hit serves without calling the backend") {
    TempDir dir;
    auto inner = lm();
    CachedBackend cache(inner, dir.path);
    auto first = cache.complete({"prompt"});
    CHECK(inner->calls() == 1);
    CHECK(cache.misses() == 1);
    auto second = cache.complete({"prompt"});
    CHECK(inner->calls() == 1);
    CHECK(cache.hits() == 1);
    CHECK(first == second);
}

TEST_CASE("cache survives a new process and keys on the request") {
    TempDir dir;
    auto inner = lm();
    {
        CachedBackend cache(inner, dir.path);
        cache.complete({"prompt"});
        cache.score({"P", {"yes"}});
    }
    CachedBackend again(inner, dir.path);
    again.complete({"prompt"});
    again.score({"P", {"yes"}});
    CHECK(inner->calls() == 2);
    CompletionRequest other{"prompt"};
    other.stop = {"\n"};
    again.complete(other);
    CHECK(inner->calls() == 3);
}

TEST_CASE("truncated entry is recomputed and repaired") {
    TempDir dir;
    auto inner = lm();
    CachedBackend cache(inner, dir.path);
    auto original = cache.complete({"prompt"});
    const auto key = cache.key_for("complete", wire::to_json(CompletionRequest{"prompt"}));
    const auto path = cache.entry_path(key);
    REQUIRE(std::filesystem::exists(path));
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);

    auto recomputed = cache.complete({"prompt"});
    CHECK(recomputed == original);
    CHECK(cache.corrupt_entries() == 1);
    CHECK(inner->calls() == 2);
    CHECK(std::filesystem::file_size(path) == size);
    cache.complete({"prompt"});
    CHECK(inner->calls() == 2);
}

TEST_CASE("tampered payload fails its checksum") {
    TempDir dir;
    auto inner = lm();
    CachedBackend cache(inner, dir.path);
    cache.complete({"prompt"});
    const auto path = cache.entry_path(cache.key_for("complete", wire::to_json(CompletionRequest{"prompt"})));
    std::ifstream in(path);
    auto entry = nlohmann::json::parse(in);
    in.close();
    entry["payload"]["text"] = "a dog";
    std::ofstream(path) << entry.dump();
    CHECK(cache.complete({"prompt"}).text == "a cat");
    CHECK(cache.corrupt_entries() == 1);
}

TEST_CASE("vision operations are cached too") {
    TempDir dir;
    auto oracle = std::make_shared<SceneOracle>(
        std::vector<SceneGraph>{scene("a.jpg", {object(1, "cat", {0, 0, 10, 10}, {"black"}, 3.5)})});
    auto counting = std::make_shared<CountingBackend>(oracle);
    CachedBackend cache(counting, dir.path);
    for (int i = 0; i < 2; ++i) {
        CHECK(cache.detect("a.jpg", "cat").size() == 1);
        CHECK(cache.depth("a.jpg", {0, 0, 10, 10}) == 3.5);
        CHECK(cache.similarity("a.jpg", {0, 0, 10, 10}, {"black"}) == std::vector<double>{1.0});
        CHECK(cache.vqa({"a.jpg", "q?"}) == "unknown");
        CHECK(cache.extent("a.jpg").width == 640);
    }
    CHECK(counting->calls() == 5);
}

TEST_CASE("concurrent misses on one key compute once") {
    TempDir dir;
    auto inner = lm();
    auto counting = std::make_shared<CountingBackend>(inner);
    CachedBackend cache(counting, dir.path);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([&] {
            for (int i = 0; i < 50; ++i) CHECK(cache.complete({"prompt " + std::to_string(i % 5)}).text == "a cat");
        });
    for (auto& t : threads) t.join();
    CHECK(counting->calls() == 5);
}

TEST_CASE("tracing records one event per call with digests") {
    Trace trace;
    TracingBackend traced_lm(lm(), "instruct_lm", trace);
    traced_lm.complete({"prompt"});
    traced_lm.score({"P", {"yes"}});
    REQUIRE(trace.size() == 2);
    const auto& e = trace.events()[0];
    CHECK(e.kind == TraceKind::BackendCall);
    CHECK(e.payload["role"] == "instruct_lm");
    CHECK(e.payload["op"] == "complete");
    CHECK(e.payload.contains("request_digest"));
    CHECK(e.payload.contains("response_digest"));
    CHECK(e.payload.contains("ts"));
    CHECK(trace.events()[1].seq > e.seq);
}
