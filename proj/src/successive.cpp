#include "vqd/successive.hpp"

#include <sstream>

#include "vqd/assets.hpp"
#include "vqd/backend.hpp"
#include "vqd/digest.hpp"
#include "vqd/scoring.hpp"

namespace vqd {

std::string to_string(Termination t) { return t == Termination::AnswerPrefix ? "AnswerPrefix" : "StepCap"; }

namespace {

std::string question_block(const std::string& question, const std::optional<std::vector<std::string>>& choices) {
    std::string out = "Question: " + question + "\n";
    if (choices) out += "Choices: " + render_choice_list(*choices) + "\n";
    return out;
}

std::string step_lines(const DecompositionStep& s) {
    return std::string(kFollowUpLabel) + " " + s.question + "\n" + kFollowUpAnswerLabel + " " + s.answer + "\n";
}

}  // namespace

std::string DecompositionTrace::transcript(const std::string& question) const {
    std::string out = question_block(question, std::nullopt);
    for (const auto& s : steps) out += step_lines(s);
    if (final_answer) out += std::string(kAnswerLabel) + " " + *final_answer + "\n";
    return out;
}

json DecompositionTrace::to_json() const {
    json s = json::array();
    for (const auto& step : steps) s.push_back({{"question", step.question}, {"answer", step.answer}});
    json j = {{"steps", s}, {"terminated_by", to_string(terminated_by)}};
    j["final_answer"] = final_answer ? json(*final_answer) : json(nullptr);
    return j;
}

std::vector<std::string> parse_transcript_demonstrations(const std::string& text) {
    std::vector<std::string> demos;
    std::istringstream in(text);
    std::string line;
    bool open = false;
    while (std::getline(in, line)) {
        if (line.rfind("@@ example", 0) == 0) {
            demos.emplace_back();
            open = true;
        } else if (open) {
            if (!trim(line).empty()) demos.back() += line + "\n";
        } else if (!trim(line).empty()) {
            throw std::invalid_argument("text before the first '@@ example' marker");
        }
    }
    for (auto& d : demos) {
        if (d.rfind("Question:", 0) != 0) throw std::invalid_argument("demonstration must start with 'Question:'");
        if (d.find(kAnswerLabel) == std::string::npos)
            throw std::invalid_argument("demonstration must end with an answer line");
        d.pop_back();
    }
    return demos;
}

SuccessiveOptions default_successive_options() {
    SuccessiveOptions o;
    o.instruction = trim(asset("successive_instruction.txt"));
    o.demonstrations = parse_transcript_demonstrations(asset("successive_demos.txt"));
    return o;
}

std::string build_decomposition_prompt(const std::string& instruction, const std::vector<std::string>& demos,
                                       const std::string& question,
                                       const std::optional<std::vector<std::string>>& choices,
                                       const std::vector<DecompositionStep>& steps) {
    if (demos.size() != 3)
        throw std::invalid_argument("decomposition prompt needs exactly 3 demonstrations, got " +
                                    std::to_string(demos.size()));
    std::string out = instruction + "\n\n";
    for (const auto& d : demos) out += d + "\n\n";
    out += question_block(question, choices);
    for (const auto& s : steps) out += step_lines(s);
    return out;
}

DecompositionResult run_decomposition(const BenchmarkInstance& instance, const EvaluationSetting& setting,
                                      const BackendSuite& backends, const SuccessiveOptions& options,
                                      Trace* trace) {
    if (options.max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
    if (auto problem = validate_instance(instance, setting)) throw std::invalid_argument(*problem);
    const auto choices = setting.multiple_choice() ? instance.choices : std::nullopt;

    DecompositionTrace dt;
    dt.instruction = options.instruction;
    dt.demonstrations = options.demonstrations;
    auto prompt_now = [&] {
        return build_decomposition_prompt(options.instruction, options.demonstrations, instance.question, choices,
                                          dt.steps);
    };
    auto note = [&](json payload) {
        if (!trace) return;
        payload["engine"] = "successive";
        trace->append(TraceKind::EngineDecision, std::move(payload));
    };
    auto generate = [&](const std::string& prompt) {
        CompletionRequest req;
        req.prompt = prompt;
        req.max_tokens = options.max_tokens;
        req.stop = {"\n"};
        return trim(complete(*backends.instruct_lm, req).text);
    };

    Prediction p;
    p.instance_id = instance.id;
    p.method = Method::Successive;
    p.variant = "successive";
    try {
        prompt_now();  // validates the demonstrations before any backend call
        bool answer = false;
        while (dt.steps.size() < options.max_steps) {
            const std::string prompt = prompt_now();
            const auto sel = select_prefix(*backends.instruct_lm, prompt, {kFollowUpLabel, kAnswerLabel});
            note({{"stage", "prefix"},
                  {"step", dt.steps.size()},
                  {"prompt_sha256", sha256_hex(prompt)},
                  {"scores", sel.scores},
                  {"chosen", sel.index == 0 ? kFollowUpLabel : kAnswerLabel}});
            if (sel.index == 1) {
                answer = true;
                break;
            }
            const std::string question = generate(prompt + kFollowUpLabel + " ");
            if (question.empty()) {
                note({{"stage", "empty_followup"}, {"step", dt.steps.size()}});
                answer = true;
                break;
            }
            const std::string reply = vqa(*backends.vlm, instance.image_ref, vqa_prompt(question));
            dt.steps.push_back({question, trim(reply)});
            note({{"stage", "followup"}, {"question", question}, {"answer", dt.steps.back().answer}, {"source", "vlm"}});
        }
        dt.terminated_by = answer ? Termination::AnswerPrefix : Termination::StepCap;

        const std::string answer_prompt = prompt_now() + kAnswerLabel + " ";
        if (choices) {
            const auto sel = select_choice(*backends.instruct_lm, answer_prompt, *choices);
            dt.final_answer = sel.choice;
            json scores = json::array();
            for (const auto& s : sel.scores) scores.push_back({{"choice", s.continuation}, {"score", s.normalized}});
            p.details["choice_scores"] = scores;
        } else {
            dt.final_answer = generate(answer_prompt);
        }
        note({{"stage", "answer"}, {"answer", *dt.final_answer}, {"terminated_by", to_string(dt.terminated_by)}});
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception& e) {
        throw DecompositionFailure(std::string("decomposition failed after ") + std::to_string(dt.steps.size()) +
                                       " steps: " + e.what(),
                                   dt, std::current_exception());
    }
    p.answer_text = *dt.final_answer;
    p.details["decomposition"] = dt.to_json();
    return {p, dt};
}

}  // namespace vqd
