#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vqd/backend.hpp"

namespace vqd {

struct SceneObject {
    std::int64_t id = 0;
    std::string category;
    Box box;
    std::vector<std::string> attributes;
    double depth = 0;
};

/// Deterministic mock world standing in for detector, depth, VQA and
/// text-image similarity models.
struct SceneGraph {
    std::string image_ref;
    ImageExtent extent;
    std::vector<SceneObject> objects;
    std::map<std::string, std::string> scene_qa;
    std::map<std::pair<std::int64_t, std::string>, std::string> patch_qa;
    std::string caption;
};

/// Throws std::invalid_argument on duplicate ids or boxes that are empty or
/// leave the image extent.
void validate_scene(const SceneGraph& scene);

SceneGraph scene_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const SceneGraph& scene);

/// Object with the largest share of `region` covered by its box; ties go to
/// the smaller box, then the smaller id. Nothing when no object overlaps the region.
std::optional<std::size_t> dominant_object(const SceneGraph& scene, const Box& region);

/// ASCII case-insensitive equality.
bool iequals(std::string_view a, std::string_view b);

class SceneOracle : public Backend {
public:
    explicit SceneOracle(std::vector<SceneGraph> scenes, std::string fallback_answer = "unknown",
                         std::string fixture_tag = "inline");

    std::string id() const override;

    /// Region-scoped questions consult patch_qa for the dominant object first,
    /// then scene_qa; templated prompts are matched by their bare question too.
    std::string vqa(const VqaRequest& request) override;
    /// Boxes of objects whose category equals `category` (case-insensitive),
    /// ordered by (left, lower, id).
    std::vector<Box> detect(const std::string& image_ref, const std::string& category) override;
    double depth(const std::string& image_ref, const Box& region) override;
    /// 1.0 when the dominant object carries the text as attribute or category.
    std::vector<double> similarity(const std::string& image_ref, const Box& region,
                                   const std::vector<std::string>& texts) override;
    ImageExtent extent(const std::string& image_ref) override;

    const SceneGraph& scene(const std::string& image_ref) const;
    std::uint64_t calls() const { return calls_.load(); }

private:
    std::map<std::string, SceneGraph> scenes_;
    std::string fallback_;
    std::string tag_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

struct PromptMatch {
    enum class Kind { Exact, Prefix, Suffix, Contains, Any };
    Kind kind = Kind::Exact;
    std::string pattern;

    bool matches(const std::string& prompt) const;
};

PromptMatch prompt_match_from_json(const nlohmann::json& j);

/// Applies stop sequences and a token limit at token granularity; the token
/// holding a stop sequence is cut just before it.
Completion apply_stops(Completion completion, const std::vector<std::string>& stop, int max_tokens);

/// Scripted stand-in for a language model. Completion rules are tried in
/// order and the first match wins; an unmatched prompt is a FixtureError.
class ScriptedLM : public Backend {
public:
    explicit ScriptedLM(std::string name, std::string fixture_tag = "inline");

    void add_rule(PromptMatch match, Completion completion);
    void add_rule(PromptMatch match, const std::string& text);
    /// Score entry for an exact prompt (looked up by prompt digest). With
    /// `image_ref` set the entry only answers image-conditioned requests for
    /// that image, and takes precedence over an unpinned entry.
    void add_score(const std::string& prompt, const std::string& continuation,
                   std::vector<TokenScore> tokens, std::optional<std::string> image_ref = {});
    /// Pattern score entry; consulted after exact entries, in insertion order.
    void add_score(PromptMatch match, const std::string& continuation, std::vector<TokenScore> tokens,
                   std::optional<std::string> image_ref = {});

    std::string id() const override;
    Completion complete(const CompletionRequest& request) override;
    std::vector<std::vector<TokenScore>> score(const ScoreRequest& request) override;

    std::uint64_t calls() const { return calls_.load(); }

private:
    struct Rule {
        PromptMatch match;
        Completion completion;
    };
    struct ScoreRule {
        PromptMatch match;
        std::string continuation;
        std::vector<TokenScore> tokens;
        std::optional<std::string> image_ref;
    };

    std::string name_;
    std::string tag_;
    std::vector<Rule> rules_;
    std::unordered_map<std::string, std::vector<TokenScore>> exact_scores_;
    std::vector<ScoreRule> pattern_scores_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

std::shared_ptr<ScriptedLM> scripted_lm_from_json(const std::string& name, const nlohmann::json& j,
                                                  const std::string& fixture_tag);

/// Mock world file: scenes plus one scripted model per language role.
struct MockFixture {
    std::shared_ptr<SceneOracle> oracle;
    std::shared_ptr<ScriptedLM> code_lm;
    std::shared_ptr<ScriptedLM> instruct_lm;
    std::shared_ptr<ScriptedLM> vlm_lm;

    BackendSuite suite() const;
};

MockFixture mock_fixture_from_json(const nlohmann::json& j);
MockFixture load_mock_fixture(const std::filesystem::path& path);

}  // namespace vqd
