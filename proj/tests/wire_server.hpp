#pragma once

// In-process HTTP server speaking the backend wire protocol over a
// BackendSuite, so RemoteBackend can be tested against known answers.

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "vqd/backend.hpp"
#include "vqd/wire.hpp"

namespace vqd::testing {

class WireServer {
public:
    explicit WireServer(BackendSuite suite) : suite_(std::move(suite)) {
        route("/v1/complete", [this](const json& b) {
            return wire::to_json(role(b).complete(wire::completion_request_from_json(b)));
        });
        route("/v1/score", [this](const json& b) {
            json scores = json::array();
            for (const auto& seq : role(b).score(wire::score_request_from_json(b))) scores.push_back(wire::to_json(seq));
            return json{{"scores", scores}};
        });
        route("/v1/vqa", [this](const json& b) {
            return json{{"answer", role(b).vqa(wire::vqa_request_from_json(b))}};
        });
        route("/v1/detect", [this](const json& b) {
            json boxes = json::array();
            for (const auto& box : role(b).detect(b.at("image_ref"), b.at("category"))) boxes.push_back(wire::to_json(box));
            return json{{"boxes", boxes}};
        });
        route("/v1/depth", [this](const json& b) {
            return json{{"depth", role(b).depth(b.at("image_ref"), wire::box_from_json(b.at("box")))}};
        });
        route("/v1/similarity", [this](const json& b) {
            return json{{"scores", role(b).similarity(b.at("image_ref"), wire::box_from_json(b.at("box")),
                                                      b.at("texts").get<std::vector<std::string>>())}};
        });
        route("/v1/extent", [this](const json& b) {
            auto e = role(b).extent(b.at("image_ref"));
            return json{{"width", e.width}, {"height", e.height}};
        });
        server_.Post("/v1/flaky", [this](const httplib::Request&, httplib::Response& res) {
            ++requests_;
            res.status = 503;
            res.set_content("{\"error\":\"unavailable\"}", "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~WireServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::size_t requests() const { return requests_.load(); }
    /// Requires "Authorization: Bearer <token>" from now on.
    void require_token(std::string token) { token_ = std::move(token); }
    /// Answers the next `n` requests with HTTP 503.
    void fail_next(int n) { fail_next_ = n; }

private:
    using json = nlohmann::json;

    Backend& role(const json& body) {
        const std::string r = body.value("model", std::string("vlm"));
        if (r == "code_lm") return *suite_.code_lm;
        if (r == "instruct_lm") return *suite_.instruct_lm;
        if (r == "vlm") return *suite_.vlm;
        if (r == "detector") return *suite_.detector;
        if (r == "depth") return *suite_.depth;
        if (r == "similarity") return *suite_.similarity;
        throw InvalidRequest("unknown model " + r);
    }

    template <typename Handler>
    void route(const std::string& path, Handler handler) {
        server_.Post(path, [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            if (fail_next_ > 0) {
                --fail_next_;
                res.status = 503;
                res.set_content("{\"error\":\"try again\"}", "application/json");
                return;
            }
            if (!token_.empty() && req.get_header_value("Authorization") != "Bearer " + token_) {
                res.status = 401;
                res.set_content("{\"error\":\"unauthorized\"}", "application/json");
                return;
            }
            try {
                res.set_content(handler(json::parse(req.body)).dump(), "application/json");
            } catch (const FixtureError& e) {
                res.status = 500;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            } catch (const std::exception& e) {
                res.status = 400;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            }
        });
    }

    BackendSuite suite_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::size_t> requests_{0};
    std::atomic<int> fail_next_{0};
    std::string token_;
};

}  // namespace vqd::testing
