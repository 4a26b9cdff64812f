#include "vqd/mock.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "vqd/digest.hpp"
#include "vqd/wire.hpp"

namespace vqd {

using nlohmann::json;

namespace {

constexpr double kBackgroundDepth = 100.0;
constexpr std::string_view kCaptionQuestion = "What is this?";

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

}  // namespace

bool iequals(std::string_view a, std::string_view b) { return a.size() == b.size() && lower(a) == lower(b); }

void validate_scene(const SceneGraph& scene) {
    if (scene.image_ref.empty()) throw std::invalid_argument("scene without image_ref");
    if (!(scene.extent.width > 0 && scene.extent.height > 0))
        throw std::invalid_argument("scene '" + scene.image_ref + "' has empty extent");
    const Box frame = scene.extent.full();
    std::set<std::int64_t> ids;
    for (const auto& o : scene.objects) {
        if (!ids.insert(o.id).second)
            throw std::invalid_argument("scene '" + scene.image_ref + "': duplicate object id " +
                                        std::to_string(o.id));
        if (!o.box.valid() || !frame.contains(o.box))
            throw std::invalid_argument("scene '" + scene.image_ref + "': object " + std::to_string(o.id) +
                                        " has an empty or out-of-frame box");
    }
}

SceneGraph scene_from_json(const json& j) {
    SceneGraph s;
    s.image_ref = j.at("image_ref").get<std::string>();
    s.extent.width = j.at("width").get<double>();
    s.extent.height = j.at("height").get<double>();
    s.caption = j.value("caption", std::string{});
    for (const auto& o : j.value("objects", json::array())) {
        SceneObject obj;
        obj.id = o.at("id").get<std::int64_t>();
        obj.category = o.at("category").get<std::string>();
        obj.box = wire::box_from_json(o.at("box"));
        obj.attributes = o.value("attributes", std::vector<std::string>{});
        obj.depth = o.value("depth", 0.0);
        s.objects.push_back(std::move(obj));
    }
    const json scene_qa = j.value("scene_qa", json::object());
    for (const auto& [q, a] : scene_qa.items()) s.scene_qa[q] = a.get<std::string>();
    for (const auto& e : j.value("patch_qa", json::array())) {
        s.patch_qa[{e.at("object").get<std::int64_t>(), e.at("question").get<std::string>()}] =
            e.at("answer").get<std::string>();
    }
    validate_scene(s);
    return s;
}

json scene_to_json(const SceneGraph& s) {
    json objects = json::array();
    for (const auto& o : s.objects) {
        objects.push_back({{"id", o.id},
                           {"category", o.category},
                           {"box", wire::to_json(o.box)},
                           {"attributes", o.attributes},
                           {"depth", o.depth}});
    }
    json patch_qa = json::array();
    for (const auto& [key, answer] : s.patch_qa)
        patch_qa.push_back({{"object", key.first}, {"question", key.second}, {"answer", answer}});
    return {{"image_ref", s.image_ref}, {"width", s.extent.width}, {"height", s.extent.height},
            {"caption", s.caption},     {"objects", objects},      {"scene_qa", s.scene_qa},
            {"patch_qa", patch_qa}};
}

std::optional<std::size_t> dominant_object(const SceneGraph& scene, const Box& region) {
    const double region_area = region.area();
    if (region_area <= 0) return std::nullopt;
    std::optional<std::size_t> best;
    double best_share = 0;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const double share = intersect(scene.objects[i].box, region).area() / region_area;
        if (share <= 0) continue;
        const auto& o = scene.objects[i];
        const auto& b = best ? scene.objects[*best] : o;
        const bool tighter = o.box.area() < b.box.area() || (o.box.area() == b.box.area() && o.id < b.id);
        if (!best || share > best_share || (share == best_share && tighter)) {
            best = i;
            best_share = share;
        }
    }
    return best;
}

SceneOracle::SceneOracle(std::vector<SceneGraph> scenes, std::string fallback_answer, std::string fixture_tag)
    : fallback_(std::move(fallback_answer)), tag_(std::move(fixture_tag)) {
    for (auto& s : scenes) {
        validate_scene(s);
        const std::string ref = s.image_ref;
        if (!scenes_.emplace(ref, std::move(s)).second)
            throw std::invalid_argument("duplicate scene for image_ref '" + ref + "'");
    }
}

std::string SceneOracle::id() const { return "scene-oracle:" + tag_; }

const SceneGraph& SceneOracle::scene(const std::string& image_ref) const {
    auto it = scenes_.find(image_ref);
    if (it == scenes_.end()) throw InvalidRequest("unknown image_ref '" + image_ref + "'");
    return it->second;
}

std::string SceneOracle::vqa(const VqaRequest& request) {
    ++calls_;
    const SceneGraph& s = scene(request.image_ref);
    std::vector<std::string> keys{request.question};
    if (auto bare = unwrap_vqa_prompt(request.question)) keys.push_back(*bare);

    if (request.box) {
        if (auto dom = dominant_object(s, *request.box)) {
            const auto object_id = s.objects[*dom].id;
            for (const auto& k : keys) {
                auto it = s.patch_qa.find({object_id, k});
                if (it != s.patch_qa.end()) return it->second;
            }
        }
    }
    for (const auto& k : keys) {
        auto it = s.scene_qa.find(k);
        if (it != s.scene_qa.end()) return it->second;
    }
    if (!request.box && keys.back() == kCaptionQuestion && !s.caption.empty()) return s.caption;
    return fallback_;
}

std::vector<Box> SceneOracle::detect(const std::string& image_ref, const std::string& category) {
    ++calls_;
    const SceneGraph& s = scene(image_ref);
    std::vector<const SceneObject*> hits;
    for (const auto& o : s.objects)
        if (iequals(o.category, category)) hits.push_back(&o);
    std::sort(hits.begin(), hits.end(), [](const SceneObject* a, const SceneObject* b) {
        if (a->box.left != b->box.left) return a->box.left < b->box.left;
        if (a->box.lower != b->box.lower) return a->box.lower < b->box.lower;
        return a->id < b->id;
    });
    std::vector<Box> out;
    for (const auto* o : hits) out.push_back(o->box);
    return out;
}

double SceneOracle::depth(const std::string& image_ref, const Box& region) {
    ++calls_;
    if (!region.valid()) throw InvalidRequest("depth: region has zero area");
    const SceneGraph& s = scene(image_ref);
    auto dom = dominant_object(s, region);
    return dom ? s.objects[*dom].depth : kBackgroundDepth;
}

std::vector<double> SceneOracle::similarity(const std::string& image_ref, const Box& region,
                                            const std::vector<std::string>& texts) {
    ++calls_;
    if (texts.empty()) throw InvalidRequest("similarity: texts must be non-empty");
    const SceneGraph& s = scene(image_ref);
    auto dom = dominant_object(s, region);
    std::vector<double> out;
    for (const auto& text : texts) {
        double score = 0.0;
        if (dom) {
            const auto& o = s.objects[*dom];
            if (iequals(o.category, text)) score = 1.0;
            for (const auto& a : o.attributes)
                if (iequals(a, text)) score = 1.0;
        }
        out.push_back(score);
    }
    return out;
}

ImageExtent SceneOracle::extent(const std::string& image_ref) {
    ++calls_;
    return scene(image_ref).extent;
}

bool PromptMatch::matches(const std::string& prompt) const {
    switch (kind) {
        case Kind::Exact: return prompt == pattern;
        case Kind::Prefix: return prompt.starts_with(pattern);
        case Kind::Suffix: return prompt.ends_with(pattern);
        case Kind::Contains: return prompt.find(pattern) != std::string::npos;
        case Kind::Any: return true;
    }
    return false;
}

PromptMatch prompt_match_from_json(const json& j) {
    if (j.is_string()) return {PromptMatch::Kind::Exact, j.get<std::string>()};
    if (j.contains("exact")) return {PromptMatch::Kind::Exact, j.at("exact").get<std::string>()};
    if (j.contains("prefix")) return {PromptMatch::Kind::Prefix, j.at("prefix").get<std::string>()};
    if (j.contains("suffix")) return {PromptMatch::Kind::Suffix, j.at("suffix").get<std::string>()};
    if (j.contains("contains")) return {PromptMatch::Kind::Contains, j.at("contains").get<std::string>()};
    if (j.value("any", false)) return {PromptMatch::Kind::Any, {}};
    throw std::invalid_argument("prompt match needs one of exact/prefix/suffix/contains/any");
}

Completion apply_stops(Completion c, const std::vector<std::string>& stop, int max_tokens) {
    std::size_t cut = std::string::npos;
    for (const auto& s : stop) {
        if (s.empty()) continue;
        cut = std::min(cut, c.text.find(s));
    }
    if (cut != std::string::npos) {
        std::vector<TokenScore> kept;
        std::size_t pos = 0;
        for (auto& t : c.tokens) {
            if (pos >= cut) break;
            if (pos + t.text.size() > cut) {
                t.text.resize(cut - pos);
                t.byte_length = t.text.size();
            }
            pos += t.text.size();
            kept.push_back(std::move(t));
        }
        c.tokens = std::move(kept);
        c.text.resize(cut);
        c.finish_reason = FinishReason::Stop;
    }
    if (max_tokens >= 0 && c.tokens.size() > static_cast<std::size_t>(max_tokens)) {
        c.tokens.resize(static_cast<std::size_t>(max_tokens));
        c.text.clear();
        for (const auto& t : c.tokens) c.text += t.text;
        c.finish_reason = FinishReason::Length;
    }
    return c;
}

ScriptedLM::ScriptedLM(std::string name, std::string fixture_tag)
    : name_(std::move(name)), tag_(std::move(fixture_tag)) {}

void ScriptedLM::add_rule(PromptMatch match, Completion completion) {
    if (!tokens_concatenate(completion))
        throw std::invalid_argument("scripted completion tokens do not concatenate to its text");
    rules_.push_back(Rule{std::move(match), std::move(completion)});
}

void ScriptedLM::add_rule(PromptMatch match, const std::string& text) {
    add_rule(std::move(match), completion_from_text(text));
}

namespace {

std::string score_key(const std::string& prompt_digest, const std::string& continuation,
                      const std::optional<std::string>& image_ref) {
    return prompt_digest + '\0' + continuation + '\0' + (image_ref ? "@" + *image_ref : std::string());
}

}  // namespace

void ScriptedLM::add_score(const std::string& prompt, const std::string& continuation,
                           std::vector<TokenScore> tokens, std::optional<std::string> image_ref) {
    exact_scores_[score_key(sha256_hex(prompt), continuation, image_ref)] = std::move(tokens);
}

void ScriptedLM::add_score(PromptMatch match, const std::string& continuation, std::vector<TokenScore> tokens,
                           std::optional<std::string> image_ref) {
    if (match.kind == PromptMatch::Kind::Exact) {
        add_score(match.pattern, continuation, std::move(tokens), std::move(image_ref));
        return;
    }
    pattern_scores_.push_back(ScoreRule{std::move(match), continuation, std::move(tokens), std::move(image_ref)});
}

std::string ScriptedLM::id() const { return "scripted:" + name_ + ":" + tag_; }

Completion ScriptedLM::complete(const CompletionRequest& request) {
    ++calls_;
    for (const auto& rule : rules_) {
        if (rule.match.matches(request.prompt)) return apply_stops(rule.completion, request.stop, request.max_tokens);
    }
    const std::string tail = request.prompt.size() > 80 ? "..." + request.prompt.substr(request.prompt.size() - 80)
                                                        : request.prompt;
    throw FixtureError("scripted model '" + name_ + "' has no rule for prompt: " + tail);
}

std::vector<std::vector<TokenScore>> ScriptedLM::score(const ScoreRequest& request) {
    ++calls_;
    const std::string digest = sha256_hex(request.prompt);
    std::vector<std::vector<TokenScore>> out;
    for (const auto& cont : request.continuations) {
        if (cont.empty()) {
            out.emplace_back();
            continue;
        }
        auto it = request.image_ref ? exact_scores_.find(score_key(digest, cont, request.image_ref))
                                    : exact_scores_.end();
        if (it == exact_scores_.end()) it = exact_scores_.find(score_key(digest, cont, std::nullopt));
        if (it != exact_scores_.end()) {
            out.push_back(it->second);
            continue;
        }
        auto rule = std::find_if(pattern_scores_.begin(), pattern_scores_.end(), [&](const ScoreRule& r) {
            if (r.image_ref && r.image_ref != request.image_ref) return false;
            return r.continuation == cont && r.match.matches(request.prompt);
        });
        if (rule == pattern_scores_.end())
            throw FixtureError("scripted model '" + name_ + "' has no score for continuation '" + cont + "'");
        out.push_back(rule->tokens);
    }
    return out;
}

std::shared_ptr<ScriptedLM> scripted_lm_from_json(const std::string& name, const json& j,
                                                  const std::string& fixture_tag) {
    auto lm = std::make_shared<ScriptedLM>(name, fixture_tag);
    for (const auto& r : j.value("rules", json::array())) {
        const PromptMatch match = prompt_match_from_json(r.contains("match") ? r.at("match") : r.at("prompt"));
        const json& c = r.at("completion");
        if (c.is_string()) {
            lm->add_rule(match, c.get<std::string>());
        } else {
            lm->add_rule(match, wire::completion_from_json(c));
        }
    }
    for (const auto& s : j.value("scores", json::array())) {
        const PromptMatch match = prompt_match_from_json(s.contains("match") ? s.at("match") : s.at("prompt"));
        const std::string cont = s.at("continuation").get<std::string>();
        std::vector<TokenScore> tokens;
        if (s.contains("tokens")) {
            tokens = wire::tokens_from_json(s.at("tokens"));
        } else {
            tokens.push_back(make_token(cont, s.at("logprob").get<double>()));
        }
        std::optional<std::string> image_ref;
        if (s.contains("image_ref")) image_ref = s.at("image_ref").get<std::string>();
        lm->add_score(match, cont, std::move(tokens), std::move(image_ref));
    }
    return lm;
}

BackendSuite MockFixture::suite() const {
    auto vlm = std::make_shared<CompositeBackend>(vlm_lm, oracle);
    return BackendSuite{code_lm, instruct_lm, vlm, oracle, oracle, oracle};
}

MockFixture mock_fixture_from_json(const json& j) {
    const std::string tag = sha256_hex(j.dump()).substr(0, 16);
    std::vector<SceneGraph> scenes;
    for (const auto& s : j.value("scenes", json::array())) scenes.push_back(scene_from_json(s));
    MockFixture f;
    f.oracle = std::make_shared<SceneOracle>(std::move(scenes), j.value("fallback_answer", std::string("unknown")),
                                             tag);
    const json models = j.value("language_models", json::object());
    f.code_lm = scripted_lm_from_json("code_lm", models.value("code_lm", json::object()), tag);
    f.instruct_lm = scripted_lm_from_json("instruct_lm", models.value("instruct_lm", json::object()), tag);
    f.vlm_lm = scripted_lm_from_json("vlm", models.value("vlm", json::object()), tag);
    return f;
}

MockFixture load_mock_fixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mock fixture: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed mock fixture " + path.string() + ": " + e.what());
    }
    return mock_fixture_from_json(j);
}

}  // namespace vqd
