#include "vqd/e2e.hpp"

#include "vqd/backend.hpp"
#include "vqd/scoring.hpp"

namespace vqd {

Prediction answer_direct(const BenchmarkInstance& instance, const BackendSuite& backends,
                         const DecodingParams& decoding, Trace* trace) {
    if (trim(instance.question).empty()) throw std::invalid_argument("answer_direct: empty question");
    VqaRequest req{instance.image_ref, vqa_prompt(instance.question), std::nullopt, decoding.beam_width,
                   decoding.length_penalty};
    const std::string answer = vqa(*backends.vlm, req);
    if (trace) trace->append(TraceKind::EngineDecision, {{"engine", "e2e"}, {"stage", "answer"}, {"answer", answer}});
    Prediction p;
    p.instance_id = instance.id;
    p.answer_text = answer;
    p.method = Method::EndToEnd;
    p.variant = "e2e";
    return p;
}

Prediction answer_multiple_choice(const BenchmarkInstance& instance, const BackendSuite& backends, Trace* trace) {
    if (trim(instance.question).empty()) throw std::invalid_argument("answer_multiple_choice: empty question");
    if (!instance.choices || instance.choices->size() < 2)
        throw std::invalid_argument("answer_multiple_choice: instance '" + instance.id + "' has fewer than 2 choices");
    const auto sel = select_choice(*backends.vlm, vqa_prompt(instance.question), *instance.choices, instance.image_ref);
    json scores = json::array();
    for (const auto& s : sel.scores) scores.push_back({{"choice", s.continuation}, {"score", s.normalized}});
    if (trace)
        trace->append(TraceKind::EngineDecision,
                      {{"engine", "e2e"}, {"stage", "choice"}, {"choice", sel.choice}, {"scores", scores}});
    Prediction p;
    p.instance_id = instance.id;
    p.answer_text = sel.choice;
    p.method = Method::EndToEnd;
    p.variant = "e2e";
    p.details["choice_scores"] = scores;
    return p;
}

Prediction run_e2e(const BenchmarkInstance& instance, const EvaluationSetting& setting, const BackendSuite& backends,
                   const DecodingParams& decoding, Trace* trace) {
    if (setting.multiple_choice()) return answer_multiple_choice(instance, backends, trace);
    return answer_direct(instance, backends, decoding, trace);
}

}  // namespace vqd
