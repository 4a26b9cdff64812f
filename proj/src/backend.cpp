#include "vqd/backend.hpp"

#include <algorithm>

namespace vqd {

Box intersect(const Box& a, const Box& b) {
    Box r{std::max(a.left, b.left), std::max(a.lower, b.lower), std::min(a.right, b.right),
          std::min(a.upper, b.upper)};
    if (!r.valid()) return Box{r.left, r.lower, r.left, r.lower};
    return r;
}

TokenScore make_token(std::string text, double logprob) {
    const std::size_t bytes = text.size();
    return TokenScore{std::move(text), logprob, bytes};
}

Completion completion_from_text(const std::string& text, double logprob_per_token) {
    Completion c;
    c.text = text;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t j = i;
        while (j < text.size() && text[j] == ' ') ++j;
        while (j < text.size() && text[j] != ' ') ++j;
        c.tokens.push_back(make_token(text.substr(i, j - i), logprob_per_token));
        i = j;
    }
    return c;
}

bool tokens_concatenate(const Completion& completion) {
    std::string joined;
    for (const auto& t : completion.tokens) joined += t.text;
    return joined == completion.text;
}

Completion Backend::complete(const CompletionRequest&) { unsupported("complete"); }
std::vector<std::vector<TokenScore>> Backend::score(const ScoreRequest&) { unsupported("score"); }
std::string Backend::vqa(const VqaRequest&) { unsupported("vqa"); }
std::vector<Box> Backend::detect(const std::string&, const std::string&) { unsupported("detect"); }
double Backend::depth(const std::string&, const Box&) { unsupported("depth"); }
std::vector<double> Backend::similarity(const std::string&, const Box&,
                                        const std::vector<std::string>&) {
    unsupported("similarity");
}
ImageExtent Backend::extent(const std::string&) { unsupported("extent"); }

void Backend::unsupported(const std::string& operation) const {
    throw InvalidRequest("backend '" + id() + "' does not support operation '" + operation + "'");
}

CompositeBackend::CompositeBackend(BackendPtr language, BackendPtr vision)
    : language_(std::move(language)), vision_(std::move(vision)) {}

std::string CompositeBackend::id() const {
    return "composite(" + language_->id() + "," + vision_->id() + ")";
}
Completion CompositeBackend::complete(const CompletionRequest& r) { return language_->complete(r); }
std::vector<std::vector<TokenScore>> CompositeBackend::score(const ScoreRequest& r) {
    return language_->score(r);
}
std::string CompositeBackend::vqa(const VqaRequest& r) { return vision_->vqa(r); }
std::vector<Box> CompositeBackend::detect(const std::string& image, const std::string& category) {
    return vision_->detect(image, category);
}
double CompositeBackend::depth(const std::string& image, const Box& region) {
    return vision_->depth(image, region);
}
std::vector<double> CompositeBackend::similarity(const std::string& image, const Box& region,
                                                 const std::vector<std::string>& texts) {
    return vision_->similarity(image, region, texts);
}
ImageExtent CompositeBackend::extent(const std::string& image) { return vision_->extent(image); }

namespace {
constexpr std::string_view kVqaHead = "Question: ";
constexpr std::string_view kVqaTail = " Short answer: ";
}  // namespace

std::string vqa_prompt(const std::string& question) {
    return std::string(kVqaHead) + question + std::string(kVqaTail);
}

std::optional<std::string> unwrap_vqa_prompt(const std::string& prompt) {
    if (prompt.size() < kVqaHead.size() + kVqaTail.size()) return std::nullopt;
    if (!prompt.starts_with(kVqaHead) || !prompt.ends_with(kVqaTail)) return std::nullopt;
    return prompt.substr(kVqaHead.size(), prompt.size() - kVqaHead.size() - kVqaTail.size());
}

Completion complete(Backend& lm, const CompletionRequest& request) {
    if (request.prompt.empty()) throw InvalidRequest("complete: prompt must be non-empty");
    return lm.complete(request);
}

std::vector<std::vector<TokenScore>> score_continuations(Backend& lm, const std::string& prompt,
                                                         const std::vector<std::string>& continuations,
                                                         std::optional<std::string> image_ref) {
    if (continuations.empty()) throw InvalidRequest("score: continuations must be non-empty");
    ScoreRequest request{prompt, {}, std::move(image_ref)};
    for (const auto& c : continuations)
        if (!c.empty()) request.continuations.push_back(c);

    std::vector<std::vector<TokenScore>> scored;
    if (!request.continuations.empty()) {
        scored = lm.score(request);
        if (scored.size() != request.continuations.size()) {
            throw BackendError("score: backend returned " + std::to_string(scored.size()) +
                               " sequences for " + std::to_string(request.continuations.size()) +
                               " continuations");
        }
    }
    std::vector<std::vector<TokenScore>> out;
    out.reserve(continuations.size());
    std::size_t k = 0;
    for (const auto& c : continuations) out.push_back(c.empty() ? std::vector<TokenScore>{} : scored[k++]);
    return out;
}

std::string vqa(Backend& vlm, const std::string& image_ref, const std::string& question,
                std::optional<Box> box) {
    return vqa(vlm, VqaRequest{image_ref, question, box, std::nullopt, std::nullopt});
}

std::string vqa(Backend& vlm, const VqaRequest& request) {
    if (request.question.empty()) throw InvalidRequest("vqa: question must be non-empty");
    return vlm.vqa(request);
}

std::vector<Box> detect(Backend& detector, const std::string& image_ref, const std::string& category) {
    if (category.empty()) throw InvalidRequest("detect: category must be non-empty");
    return detector.detect(image_ref, category);
}

std::vector<double> similarity(Backend& sim, const std::string& image_ref, const Box& region,
                               const std::vector<std::string>& texts) {
    if (texts.empty()) throw InvalidRequest("similarity: texts must be non-empty");
    if (!region.valid()) throw InvalidRequest("similarity: region has zero area");
    auto scores = sim.similarity(image_ref, region, texts);
    if (scores.size() != texts.size()) throw BackendError("similarity: score count mismatch");
    return scores;
}

double depth_at(Backend& depth, const std::string& image_ref, const Box& region) {
    if (!region.valid()) throw InvalidRequest("depth: region has zero area");
    return depth.depth(image_ref, region);
}

}  // namespace vqd
