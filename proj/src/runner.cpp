#include "vqd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "vqd/cache.hpp"
#include "vqd/e2e.hpp"
#include "vqd/metrics.hpp"
#include "vqd/mock.hpp"
#include "vqd/remote.hpp"

namespace vqd {

BackendSuite open_backends(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("backends must be mock:PATH or remote:URL, got '" + spec + "'");
    const std::string kind = spec.substr(0, colon);
    const std::string target = spec.substr(colon + 1);
    if (target.empty()) throw std::invalid_argument("backends: empty target in '" + spec + "'");
    if (kind == "mock") return load_mock_fixture(target).suite();
    if (kind == "remote") {
        RemoteOptions options;
        if (const char* token = std::getenv(kGatewayTokenEnv); token && *token) options.auth_token = token;
        return remote_suite(target, options);
    }
    throw std::invalid_argument("backends must be mock:PATH or remote:URL, got '" + spec + "'");
}

std::vector<BenchmarkInstance> select_instances(const std::vector<BenchmarkInstance>& instances,
                                                std::optional<std::size_t> sample_size, std::uint64_t seed) {
    if (!sample_size) return instances;
    return sample(instances, *sample_size, seed);
}

json score_prediction(const BenchmarkInstance& instance, const EvaluationSetting& setting,
                      const Prediction& prediction, Backend* judge_lm) {
    json s = json::object();
    if (setting.multiple_choice()) {
        auto correct = instance.correct_choice();
        if (correct)
            s["mc_accuracy"] = mc_accuracy(prediction.answer_text, *instance.choices, *correct);
        else
            s["mc_accuracy"] = nullptr;
        return s;
    }
    s["vqa_accuracy"] = vqa_accuracy(prediction.answer_text, instance.answers);
    s["exact_match"] = exact_match(prediction.answer_text, instance.answers.front());
    if (judge_lm) {
        if (prediction.answer_text.empty()) {
            s["judge"] = {{"verdict", to_string(Verdict::Incorrect)}, {"skipped", true}};
        } else {
            auto r = llm_judge(*judge_lm, instance.question, instance.answers, prediction.answer_text);
            s["judge"] = {{"verdict", to_string(r.verdict)}, {"yes", r.yes}, {"no", r.no}};
        }
    }
    return s;
}

namespace {

Prediction run_one(const EvaluationPlan& plan, const BenchmarkInstance& instance, const BackendSuite& suite,
                   Trace& trace) {
    const auto& cfg = plan.config;
    switch (cfg.method) {
        case Method::EndToEnd: return run_e2e(instance, cfg.setting, suite, cfg.decoding, &trace);
        case Method::Modular: return run_modular(instance, cfg.setting, suite, plan.modular, &trace);
        case Method::Successive:
            try {
                return run_decomposition(instance, cfg.setting, suite, plan.successive, &trace).prediction;
            } catch (const DecompositionFailure& failure) {
                failure.rethrow_cause();
            }
    }
    throw std::logic_error("unknown method");
}

}  // namespace

EvaluationRun evaluate(const EvaluationPlan& plan, const std::vector<BenchmarkInstance>& instances,
                       const BackendSuite& backends) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& inst : instances)
        if (auto problem = validate_instance(inst, plan.config.setting))
            throw std::invalid_argument("instance '" + inst.id + "': " + *problem);

    std::vector<std::shared_ptr<CountingBackend>> counters;
    std::vector<std::shared_ptr<CachedBackend>> caches;
    BackendSuite wrapped = backends.map([&](const std::string&, const BackendPtr& b) -> BackendPtr {
        auto counting = std::make_shared<CountingBackend>(b);
        counters.push_back(counting);
        if (!plan.config.cache_dir) return counting;
        auto cached = std::make_shared<CachedBackend>(counting, *plan.config.cache_dir);
        caches.push_back(cached);
        return cached;
    });

    std::vector<InstanceRecord> records(instances.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) return;
            try {
                Trace trace;
                BackendSuite suite = traced(wrapped, trace);
                Prediction p = run_one(plan, instances[i], suite, trace);
                json scores = score_prediction(instances[i], plan.config.setting, p,
                                               plan.judge ? suite.instruct_lm.get() : nullptr);
                p.trace = trace.take();
                records[i] = InstanceRecord{instances[i], std::move(p), std::move(scores)};
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed = true;
            }
        }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(plan.jobs, std::max<std::size_t>(1, instances.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);

    std::stable_sort(records.begin(), records.end(),
                     [](const InstanceRecord& a, const InstanceRecord& b) { return a.instance.id < b.instance.id; });

    EvaluationRun run;
    run.records = std::move(records);
    for (const auto& c : counters) run.stats.backend_calls += c->calls();
    for (const auto& c : caches) {
        run.stats.cache_hits += c->hits();
        run.stats.cache_misses += c->misses();
        run.stats.cache_corrupt += c->corrupt_entries();
    }
    run.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

}  // namespace vqd
