#include "vqd/remote.hpp"

#include <thread>

#include <httplib.h>

#include "vqd/wire.hpp"

namespace vqd {

using nlohmann::json;

RemoteBackend::RemoteBackend(std::string base_url, std::string role, RemoteOptions options)
    : base_url_(std::move(base_url)), role_(std::move(role)), options_(std::move(options)) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string RemoteBackend::id() const { return "remote:" + base_url_ + "#" + role_; }

json RemoteBackend::post(const std::string& path, json body) {
    body["model"] = role_;
    const std::string payload = body.dump();

    httplib::Client client(base_url_);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    if (options_.auth_token) headers.emplace("Authorization", "Bearer " + *options_.auth_token);

    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(options_.backoff * attempt);
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "POST " + path + ": " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "POST " + path + ": HTTP " + std::to_string(res->status) + " " + res->body;
            continue;
        }
        if (res->status >= 400) {
            throw InvalidRequest("POST " + path + ": HTTP " + std::to_string(res->status) + " " + res->body);
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            last_error = "POST " + path + ": malformed response body: " + e.what();
        }
    }
    throw TransportError(last_error, options_.max_retries);
}

Completion RemoteBackend::complete(const CompletionRequest& request) {
    return wire::completion_from_json(post("/v1/complete", wire::to_json(request)));
}

std::vector<std::vector<TokenScore>> RemoteBackend::score(const ScoreRequest& request) {
    const json r = post("/v1/score", wire::to_json(request));
    std::vector<std::vector<TokenScore>> out;
    for (const auto& seq : r.at("scores")) out.push_back(wire::tokens_from_json(seq));
    return out;
}

std::string RemoteBackend::vqa(const VqaRequest& request) {
    return post("/v1/vqa", wire::to_json(request)).at("answer").get<std::string>();
}

std::vector<Box> RemoteBackend::detect(const std::string& image_ref, const std::string& category) {
    const json r = post("/v1/detect", {{"image_ref", image_ref}, {"category", category}});
    std::vector<Box> out;
    for (const auto& b : r.at("boxes")) out.push_back(wire::box_from_json(b));
    return out;
}

double RemoteBackend::depth(const std::string& image_ref, const Box& region) {
    return post("/v1/depth", {{"image_ref", image_ref}, {"box", wire::to_json(region)}}).at("depth").get<double>();
}

std::vector<double> RemoteBackend::similarity(const std::string& image_ref, const Box& region,
                                              const std::vector<std::string>& texts) {
    return post("/v1/similarity", {{"image_ref", image_ref}, {"box", wire::to_json(region)}, {"texts", texts}})
        .at("scores")
        .get<std::vector<double>>();
}

ImageExtent RemoteBackend::extent(const std::string& image_ref) {
    const json r = post("/v1/extent", {{"image_ref", image_ref}});
    return ImageExtent{r.at("width").get<double>(), r.at("height").get<double>()};
}

BackendSuite remote_suite(const std::string& base_url, RemoteOptions options) {
    auto make = [&](const char* role) { return std::make_shared<RemoteBackend>(base_url, role, options); };
    return BackendSuite{make("code_lm"), make("instruct_lm"), make("vlm"),
                        make("detector"), make("depth"),       make("similarity")};
}

}  // namespace vqd
