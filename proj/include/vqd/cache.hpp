#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>

#include <nlohmann/json.hpp>

#include "vqd/backend.hpp"
#include "vqd/trace.hpp"

namespace vqd {

/// Persistent call cache wrapping any backend. Entries are keyed by the
/// SHA-256 of (backend id, operation, canonical request) and stored one file
/// per key with a checksum over the payload. A truncated or tampered entry
/// is reported, treated as a miss, and rewritten.
///
/// Reads are lock-free; misses for the same key serialize on a striped lock
/// so a key is computed at most once per process.
class CachedBackend : public Backend {
public:
    CachedBackend(BackendPtr inner, std::filesystem::path dir);

    std::string id() const override { return inner_->id(); }
    Completion complete(const CompletionRequest& request) override;
    std::vector<std::vector<TokenScore>> score(const ScoreRequest& request) override;
    std::string vqa(const VqaRequest& request) override;
    std::vector<Box> detect(const std::string& image_ref, const std::string& category) override;
    double depth(const std::string& image_ref, const Box& region) override;
    std::vector<double> similarity(const std::string& image_ref, const Box& region,
                                   const std::vector<std::string>& texts) override;
    ImageExtent extent(const std::string& image_ref) override;

    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }
    std::uint64_t corrupt_entries() const { return corrupt_.load(); }

    std::string key_for(const std::string& operation, const nlohmann::json& request) const;
    std::filesystem::path entry_path(const std::string& key) const;

private:
    template <typename Compute>
    nlohmann::json through(const std::string& operation, const nlohmann::json& request, Compute&& compute);

    std::optional<nlohmann::json> read_entry(const std::string& key, bool report);
    void write_entry(const std::string& key, const nlohmann::json& payload);

    BackendPtr inner_;
    std::filesystem::path dir_;
    std::array<std::mutex, 64> stripes_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    std::atomic<std::uint64_t> corrupt_{0};
    std::atomic<std::uint64_t> tmp_counter_{0};
};

/// Counts every call that reaches the wrapped backend.
class CountingBackend : public Backend {
public:
    explicit CountingBackend(BackendPtr inner) : inner_(std::move(inner)) {}

    std::string id() const override { return inner_->id(); }
    Completion complete(const CompletionRequest& r) override;
    std::vector<std::vector<TokenScore>> score(const ScoreRequest& r) override;
    std::string vqa(const VqaRequest& r) override;
    std::vector<Box> detect(const std::string& image_ref, const std::string& category) override;
    double depth(const std::string& image_ref, const Box& region) override;
    std::vector<double> similarity(const std::string& image_ref, const Box& region,
                                   const std::vector<std::string>& texts) override;
    ImageExtent extent(const std::string& image_ref) override;

    std::uint64_t calls() const { return calls_.load(); }

private:
    BackendPtr inner_;
    std::atomic<std::uint64_t> calls_{0};
};

/// Records one BackendCall event per operation into a per-instance trace.
/// The payload names the role and operation, carries request/response
/// digests, and a "ts" timestamp.
class TracingBackend : public Backend {
public:
    TracingBackend(BackendPtr inner, std::string role, Trace& trace)
        : inner_(std::move(inner)), role_(std::move(role)), trace_(trace) {}

    std::string id() const override { return inner_->id(); }
    Completion complete(const CompletionRequest& r) override;
    std::vector<std::vector<TokenScore>> score(const ScoreRequest& r) override;
    std::string vqa(const VqaRequest& r) override;
    std::vector<Box> detect(const std::string& image_ref, const std::string& category) override;
    double depth(const std::string& image_ref, const Box& region) override;
    std::vector<double> similarity(const std::string& image_ref, const Box& region,
                                   const std::vector<std::string>& texts) override;
    ImageExtent extent(const std::string& image_ref) override;

private:
    void record(const std::string& operation, nlohmann::json request, const nlohmann::json& response);

    BackendPtr inner_;
    std::string role_;
    Trace& trace_;
};

/// Wraps every role of the suite with a TracingBackend bound to `trace`.
BackendSuite traced(const BackendSuite& suite, Trace& trace);

}  // namespace vqd
