#include "vqd/wire.hpp"

namespace vqd::wire {

json to_json(const Box& box) { return json::array({box.left, box.lower, box.right, box.upper}); }

Box box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [left, lower, right, upper]");
    return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json to_json(const TokenScore& token) {
    return {{"t", token.text}, {"logprob", token.logprob}, {"bytes", token.byte_length}};
}

TokenScore token_from_json(const json& j) {
    TokenScore t;
    t.text = j.at("t").get<std::string>();
    t.logprob = j.at("logprob").get<double>();
    t.byte_length = j.contains("bytes") ? j.at("bytes").get<std::size_t>() : t.text.size();
    return t;
}

json to_json(const std::vector<TokenScore>& tokens) {
    json arr = json::array();
    for (const auto& t : tokens) arr.push_back(to_json(t));
    return arr;
}

std::vector<TokenScore> tokens_from_json(const json& j) {
    std::vector<TokenScore> out;
    for (const auto& t : j) out.push_back(token_from_json(t));
    return out;
}

std::string to_string(FinishReason reason) { return reason == FinishReason::Length ? "length" : "stop"; }

FinishReason parse_finish_reason(const std::string& text) {
    if (text == "stop") return FinishReason::Stop;
    if (text == "length") return FinishReason::Length;
    throw std::invalid_argument("unknown finish_reason: " + text);
}

json to_json(const Completion& c) {
    return {{"text", c.text}, {"tokens", to_json(c.tokens)}, {"finish_reason", to_string(c.finish_reason)}};
}

Completion completion_from_json(const json& j) {
    Completion c;
    c.text = j.at("text").get<std::string>();
    if (j.contains("tokens")) {
        c.tokens = tokens_from_json(j.at("tokens"));
    } else {
        c.tokens = completion_from_text(c.text).tokens;
    }
    c.finish_reason = parse_finish_reason(j.value("finish_reason", std::string("stop")));
    return c;
}

json to_json(const CompletionRequest& r) {
    json j = {{"prompt", r.prompt}, {"max_tokens", r.max_tokens}, {"stop", r.stop}};
    if (r.beam_width) j["beam_width"] = *r.beam_width;
    if (r.length_penalty) j["length_penalty"] = *r.length_penalty;
    return j;
}

CompletionRequest completion_request_from_json(const json& j) {
    CompletionRequest r;
    r.prompt = j.at("prompt").get<std::string>();
    r.max_tokens = j.value("max_tokens", 256);
    r.stop = j.value("stop", std::vector<std::string>{});
    if (j.contains("beam_width")) r.beam_width = j.at("beam_width").get<int>();
    if (j.contains("length_penalty")) r.length_penalty = j.at("length_penalty").get<double>();
    return r;
}

json to_json(const ScoreRequest& r) {
    json j = {{"prompt", r.prompt}, {"continuations", r.continuations}};
    if (r.image_ref) j["image_ref"] = *r.image_ref;
    return j;
}

ScoreRequest score_request_from_json(const json& j) {
    ScoreRequest r;
    r.prompt = j.at("prompt").get<std::string>();
    r.continuations = j.at("continuations").get<std::vector<std::string>>();
    if (j.contains("image_ref")) r.image_ref = j.at("image_ref").get<std::string>();
    return r;
}

json to_json(const VqaRequest& r) {
    json j = {{"image_ref", r.image_ref}, {"question", r.question}};
    if (r.box) j["box"] = to_json(*r.box);
    if (r.beam_width) j["beam_width"] = *r.beam_width;
    if (r.length_penalty) j["length_penalty"] = *r.length_penalty;
    return j;
}

VqaRequest vqa_request_from_json(const json& j) {
    VqaRequest r;
    r.image_ref = j.at("image_ref").get<std::string>();
    r.question = j.at("question").get<std::string>();
    if (j.contains("box")) r.box = box_from_json(j.at("box"));
    if (j.contains("beam_width")) r.beam_width = j.at("beam_width").get<int>();
    if (j.contains("length_penalty")) r.length_penalty = j.at("length_penalty").get<double>();
    return r;
}

}  // namespace vqd::wire
