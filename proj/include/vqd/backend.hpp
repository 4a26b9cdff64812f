#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vqd {

/// Pixel box in (left, lower, right, upper) order; lower < upper.
struct Box {
    double left = 0;
    double lower = 0;
    double right = 0;
    double upper = 0;

    double width() const { return right - left; }
    double height() const { return upper - lower; }
    double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
    bool valid() const { return right > left && upper > lower; }
    bool contains(const Box& other) const {
        return other.left >= left && other.right <= right && other.lower >= lower &&
               other.upper <= upper;
    }
    double center_x() const { return (left + right) / 2; }
    double center_y() const { return (lower + upper) / 2; }

    friend bool operator==(const Box&, const Box&) = default;
};

/// Empty (area 0, valid() false) when the boxes do not overlap.
Box intersect(const Box& a, const Box& b);

struct ImageExtent {
    double width = 0;
    double height = 0;

    Box full() const { return Box{0, 0, width, height}; }
};

/// Log-probabilities are natural logs throughout.
struct TokenScore {
    std::string text;
    double logprob = 0;
    std::size_t byte_length = 0;

    friend bool operator==(const TokenScore&, const TokenScore&) = default;
};

TokenScore make_token(std::string text, double logprob);

enum class FinishReason { Stop, Length };

struct Completion {
    std::string text;
    std::vector<TokenScore> tokens;
    FinishReason finish_reason = FinishReason::Stop;

    friend bool operator==(const Completion&, const Completion&) = default;
};

/// Builds a completion whose tokens concatenate to `text`, one token per
/// whitespace-delimited piece (leading spaces stay attached).
Completion completion_from_text(const std::string& text, double logprob_per_token = -0.1);

/// True when the concatenated token texts equal `text`.
bool tokens_concatenate(const Completion& completion);

struct CompletionRequest {
    std::string prompt;
    int max_tokens = 256;
    std::vector<std::string> stop;
    std::optional<int> beam_width;
    std::optional<double> length_penalty;
};

struct ScoreRequest {
    std::string prompt;
    std::vector<std::string> continuations;
    /// Set when the scoring model is image-conditioned (the VLM path).
    std::optional<std::string> image_ref;
};

struct VqaRequest {
    std::string image_ref;
    std::string question;
    /// Region the question is scoped to; absent means the whole image.
    std::optional<Box> box;
    /// Decoding hints for generative VLMs; mocks ignore them.
    std::optional<int> beam_width;
    std::optional<double> length_penalty;
};

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Remote failure after exhausting retries.
class TransportError : public BackendError {
public:
    TransportError(const std::string& message, int retries)
        : BackendError(message + " (after " + std::to_string(retries) + " retries)"),
          retries_(retries) {}

    int retries() const { return retries_; }

private:
    int retries_;
};

/// A mock fixture has no answer for the request.
class FixtureError : public BackendError {
public:
    using BackendError::BackendError;
};

/// The request itself is invalid (unknown image, degenerate region, wrong backend kind).
class InvalidRequest : public BackendError {
public:
    using BackendError::BackendError;
};

/// Uniform protocol for every neural module. Implementations override the
/// operations they support; the rest reject the call as a kind mismatch.
/// All implementations must be safe for concurrent calls.
class Backend {
public:
    virtual ~Backend() = default;

    /// Stable identity; part of every cache key.
    virtual std::string id() const = 0;

    virtual Completion complete(const CompletionRequest& request);
    virtual std::vector<std::vector<TokenScore>> score(const ScoreRequest& request);
    virtual std::string vqa(const VqaRequest& request);
    virtual std::vector<Box> detect(const std::string& image_ref, const std::string& category);
    virtual double depth(const std::string& image_ref, const Box& region);
    virtual std::vector<double> similarity(const std::string& image_ref, const Box& region,
                                           const std::vector<std::string>& texts);
    virtual ImageExtent extent(const std::string& image_ref);

protected:
    [[noreturn]] void unsupported(const std::string& operation) const;
};

using BackendPtr = std::shared_ptr<Backend>;

/// Routes language operations to one backend and vision operations to another.
class CompositeBackend : public Backend {
public:
    CompositeBackend(BackendPtr language, BackendPtr vision);

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
    BackendPtr language_;
    BackendPtr vision_;
};

/// Every engine resolves modules through this suite and nowhere else.
struct BackendSuite {
    BackendPtr code_lm;
    BackendPtr instruct_lm;
    BackendPtr vlm;
    BackendPtr detector;
    BackendPtr depth;
    BackendPtr similarity;

    /// Applies `wrap(role, backend)` to every role.
    template <typename Fn>
    BackendSuite map(Fn&& wrap) const {
        return BackendSuite{wrap("code_lm", code_lm), wrap("instruct_lm", instruct_lm),
                            wrap("vlm", vlm),         wrap("detector", detector),
                            wrap("depth", depth),     wrap("similarity", similarity)};
    }
};

/// The VQA template "Question: {} Short answer: " used for every VLM query.
std::string vqa_prompt(const std::string& question);
/// Recovers the bare question from a templated prompt, if it is one.
std::optional<std::string> unwrap_vqa_prompt(const std::string& prompt);

// Free-function forms of the protocol; they check preconditions before the call.
Completion complete(Backend& lm, const CompletionRequest& request);
std::vector<std::vector<TokenScore>> score_continuations(Backend& lm, const std::string& prompt,
                                                         const std::vector<std::string>& continuations,
                                                         std::optional<std::string> image_ref = {});
std::string vqa(Backend& vlm, const std::string& image_ref, const std::string& question,
                std::optional<Box> box = {});
std::string vqa(Backend& vlm, const VqaRequest& request);
std::vector<Box> detect(Backend& detector, const std::string& image_ref, const std::string& category);
std::vector<double> similarity(Backend& sim, const std::string& image_ref, const Box& region,
                               const std::vector<std::string>& texts);
double depth_at(Backend& depth, const std::string& image_ref, const Box& region);

}  // namespace vqd
