#pragma once

#include <chrono>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vqd/backend.hpp"

namespace vqd {

struct RemoteOptions {
    int max_retries = 2;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds backoff{200};
    /// Sent as "Authorization: Bearer <token>" when set.
    std::optional<std::string> auth_token;
};

/// Environment variable holding the gateway token in remote mode.
inline constexpr const char* kGatewayTokenEnv = "VQD_GATEWAY_TOKEN";

/// HTTP client for the backend wire protocol (see wire.hpp). One instance
/// per role; the role travels in the "model" request field.
class RemoteBackend : public Backend {
public:
    RemoteBackend(std::string base_url, std::string role, RemoteOptions options = {});

    std::string id() const override;
    Completion complete(const CompletionRequest& request) override;
    std::vector<std::vector<TokenScore>> score(const ScoreRequest& request) override;
    std::string vqa(const VqaRequest& request) override;
    std::vector<Box> detect(const std::string& image_ref, const std::string& category) override;
    double depth(const std::string& image_ref, const Box& region) override;
    std::vector<double> similarity(const std::string& image_ref, const Box& region,
                                   const std::vector<std::string>& texts) override;
    ImageExtent extent(const std::string& image_ref) override;

private:
    nlohmann::json post(const std::string& path, nlohmann::json body);

    std::string base_url_;
    std::string role_;
    RemoteOptions options_;
};

/// Suite with every role served by the gateway at `base_url`.
BackendSuite remote_suite(const std::string& base_url, RemoteOptions options = {});

}  // namespace vqd
