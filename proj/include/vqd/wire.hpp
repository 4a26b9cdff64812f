#pragma once

#include <nlohmann/json.hpp>

#include "vqd/backend.hpp"

// JSON encodings shared by the HTTP protocol, fixtures and the call cache.
//
//   POST /v1/complete   {prompt, max_tokens, stop[], beam_width?, length_penalty?, model?}
//                       -> {text, tokens:[{t, logprob, bytes}], finish_reason}
//   POST /v1/score      {prompt, continuations[], image_ref?, model?} -> {scores:[[{t, logprob, bytes}]]}
//   POST /v1/vqa        {image_ref, question, box?, beam_width?, length_penalty?, model?} -> {answer}
//   POST /v1/detect     {image_ref, category} -> {boxes:[[l,b,r,u]]}
//   POST /v1/depth      {image_ref, box} -> {depth}
//   POST /v1/similarity {image_ref, box, texts[]} -> {scores[]}
//   POST /v1/extent     {image_ref} -> {width, height}
//
// Logprobs are natural logs. `model` names the role (code_lm, instruct_lm, vlm).

namespace vqd::wire {

using nlohmann::json;

json to_json(const Box& box);
Box box_from_json(const json& j);

json to_json(const TokenScore& token);
/// `bytes` is optional in fixtures and then derived from the token text.
TokenScore token_from_json(const json& j);

json to_json(const std::vector<TokenScore>& tokens);
std::vector<TokenScore> tokens_from_json(const json& j);

json to_json(const Completion& completion);
Completion completion_from_json(const json& j);

json to_json(const CompletionRequest& request);
CompletionRequest completion_request_from_json(const json& j);

json to_json(const ScoreRequest& request);
ScoreRequest score_request_from_json(const json& j);

json to_json(const VqaRequest& request);
VqaRequest vqa_request_from_json(const json& j);

std::string to_string(FinishReason reason);
FinishReason parse_finish_reason(const std::string& text);

}  // namespace vqd::wire
