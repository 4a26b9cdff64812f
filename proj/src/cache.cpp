#include "vqd/cache.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "vqd/digest.hpp"
#include "vqd/wire.hpp"

namespace vqd {

using nlohmann::json;

namespace {

json encode_boxes(const std::vector<Box>& boxes) {
    json arr = json::array();
    for (const auto& b : boxes) arr.push_back(wire::to_json(b));
    return arr;
}

std::vector<Box> decode_boxes(const json& j) {
    std::vector<Box> out;
    for (const auto& b : j) out.push_back(wire::box_from_json(b));
    return out;
}

json encode_scores(const std::vector<std::vector<TokenScore>>& scores) {
    json arr = json::array();
    for (const auto& seq : scores) arr.push_back(wire::to_json(seq));
    return arr;
}

std::vector<std::vector<TokenScore>> decode_scores(const json& j) {
    std::vector<std::vector<TokenScore>> out;
    for (const auto& seq : j) out.push_back(wire::tokens_from_json(seq));
    return out;
}

}  // namespace

CachedBackend::CachedBackend(BackendPtr inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string CachedBackend::key_for(const std::string& operation, const json& request) const {
    const json canonical = {{"backend", inner_->id()}, {"op", operation}, {"request", request}};
    return sha256_hex(canonical.dump());
}

std::filesystem::path CachedBackend::entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<json> CachedBackend::read_entry(const std::string& key, bool report) {
    const auto path = entry_path(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        const json entry = json::parse(buffer.str());
        const json& payload = entry.at("payload");
        if (entry.at("key").get<std::string>() == key &&
            entry.at("checksum").get<std::string>() == sha256_hex(payload.dump())) {
            return std::optional<json>(std::in_place, payload);
        }
    } catch (const json::exception&) {
    }
    if (!report) return std::nullopt;
    ++corrupt_;
    std::cerr << "warning: corrupt cache entry " << path.string() << "; recomputing\n";
    return std::nullopt;
}

void CachedBackend::write_entry(const std::string& key, const json& payload) {
    const auto path = entry_path(key);
    std::filesystem::create_directories(path.parent_path());
    const json entry = {{"key", key}, {"checksum", sha256_hex(payload.dump())}, {"payload", payload}};
    std::ostringstream tmp_name;
    tmp_name << key << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.'
             << tmp_counter_++;
    const auto tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write cache entry " + tmp.string());
        out << entry.dump();
    }
    std::filesystem::rename(tmp, path);
}

template <typename Compute>
json CachedBackend::through(const std::string& operation, const json& request, Compute&& compute) {
    const std::string key = key_for(operation, request);
    // The unlocked read stays quiet about damage; the locked one reports and repairs it.
    if (auto hit = read_entry(key, false)) {
        ++hits_;
        return *hit;
    }
    std::lock_guard lock(stripes_[std::hash<std::string>{}(key) % stripes_.size()]);
    if (auto hit = read_entry(key, true)) {
        ++hits_;
        return *hit;
    }
    ++misses_;
    json payload = compute();
    write_entry(key, payload);
    return payload;
}

Completion CachedBackend::complete(const CompletionRequest& request) {
    return wire::completion_from_json(
        through("complete", wire::to_json(request), [&] { return wire::to_json(inner_->complete(request)); }));
}

std::vector<std::vector<TokenScore>> CachedBackend::score(const ScoreRequest& request) {
    return decode_scores(
        through("score", wire::to_json(request), [&] { return encode_scores(inner_->score(request)); }));
}

std::string CachedBackend::vqa(const VqaRequest& request) {
    return through("vqa", wire::to_json(request), [&] { return json(inner_->vqa(request)); }).get<std::string>();
}

std::vector<Box> CachedBackend::detect(const std::string& image_ref, const std::string& category) {
    const json req = {{"image_ref", image_ref}, {"category", category}};
    return decode_boxes(through("detect", req, [&] { return encode_boxes(inner_->detect(image_ref, category)); }));
}

double CachedBackend::depth(const std::string& image_ref, const Box& region) {
    const json req = {{"image_ref", image_ref}, {"box", wire::to_json(region)}};
    return through("depth", req, [&] { return json(inner_->depth(image_ref, region)); }).get<double>();
}

std::vector<double> CachedBackend::similarity(const std::string& image_ref, const Box& region,
                                              const std::vector<std::string>& texts) {
    const json req = {{"image_ref", image_ref}, {"box", wire::to_json(region)}, {"texts", texts}};
    return through("similarity", req, [&] { return json(inner_->similarity(image_ref, region, texts)); })
        .get<std::vector<double>>();
}

ImageExtent CachedBackend::extent(const std::string& image_ref) {
    const json req = {{"image_ref", image_ref}};
    const json r = through("extent", req, [&] {
        const auto e = inner_->extent(image_ref);
        return json{{"width", e.width}, {"height", e.height}};
    });
    return ImageExtent{r.at("width").get<double>(), r.at("height").get<double>()};
}

Completion CountingBackend::complete(const CompletionRequest& r) {
    ++calls_;
    return inner_->complete(r);
}
std::vector<std::vector<TokenScore>> CountingBackend::score(const ScoreRequest& r) {
    ++calls_;
    return inner_->score(r);
}
std::string CountingBackend::vqa(const VqaRequest& r) {
    ++calls_;
    return inner_->vqa(r);
}
std::vector<Box> CountingBackend::detect(const std::string& image_ref, const std::string& category) {
    ++calls_;
    return inner_->detect(image_ref, category);
}
double CountingBackend::depth(const std::string& image_ref, const Box& region) {
    ++calls_;
    return inner_->depth(image_ref, region);
}
std::vector<double> CountingBackend::similarity(const std::string& image_ref, const Box& region,
                                                const std::vector<std::string>& texts) {
    ++calls_;
    return inner_->similarity(image_ref, region, texts);
}
ImageExtent CountingBackend::extent(const std::string& image_ref) {
    ++calls_;
    return inner_->extent(image_ref);
}

void TracingBackend::record(const std::string& operation, json request, const json& response) {
    if (request.contains("prompt")) {
        const std::string prompt = request["prompt"].get<std::string>();
        request["prompt_digest"] = sha256_hex(prompt).substr(0, 16);
        request["prompt_bytes"] = prompt.size();
        request.erase("prompt");
    }
    json payload = {{"role", role_},
                    {"op", operation},
                    {"request", request},
                    {"response", response},
                    {"request_digest", sha256_hex(request.dump()).substr(0, 16)},
                    {"response_digest", sha256_hex(response.dump()).substr(0, 16)},
                    {"ts", now_micros()}};
    trace_.append(TraceKind::BackendCall, std::move(payload));
}

Completion TracingBackend::complete(const CompletionRequest& r) {
    auto c = inner_->complete(r);
    record("complete", wire::to_json(r), {{"text", c.text}, {"finish_reason", wire::to_string(c.finish_reason)}});
    return c;
}

std::vector<std::vector<TokenScore>> TracingBackend::score(const ScoreRequest& r) {
    auto s = inner_->score(r);
    record("score", wire::to_json(r), encode_scores(s));
    return s;
}

std::string TracingBackend::vqa(const VqaRequest& r) {
    auto a = inner_->vqa(r);
    record("vqa", wire::to_json(r), {{"answer", a}});
    return a;
}

std::vector<Box> TracingBackend::detect(const std::string& image_ref, const std::string& category) {
    auto b = inner_->detect(image_ref, category);
    record("detect", {{"image_ref", image_ref}, {"category", category}}, {{"boxes", encode_boxes(b)}});
    return b;
}

double TracingBackend::depth(const std::string& image_ref, const Box& region) {
    auto d = inner_->depth(image_ref, region);
    record("depth", {{"image_ref", image_ref}, {"box", wire::to_json(region)}}, {{"depth", d}});
    return d;
}

std::vector<double> TracingBackend::similarity(const std::string& image_ref, const Box& region,
                                               const std::vector<std::string>& texts) {
    auto s = inner_->similarity(image_ref, region, texts);
    record("similarity", {{"image_ref", image_ref}, {"box", wire::to_json(region)}, {"texts", texts}},
           {{"scores", s}});
    return s;
}

ImageExtent TracingBackend::extent(const std::string& image_ref) {
    auto e = inner_->extent(image_ref);
    record("extent", {{"image_ref", image_ref}}, {{"width", e.width}, {"height", e.height}});
    return e;
}

BackendSuite traced(const BackendSuite& suite, Trace& trace) {
    return suite.map([&trace](const std::string& role, const BackendPtr& b) -> BackendPtr {
        if (!b) return nullptr;
        return std::make_shared<TracingBackend>(b, role, trace);
    });
}

}  // namespace vqd
