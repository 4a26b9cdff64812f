#include "vqd/modular.hpp"

#include "vqd/digest.hpp"
#include "vqd/scoring.hpp"

namespace vqd {

using program::ExecutionStatus;

const std::vector<std::string>& program_stops() {
    static const std::vector<std::string> stops = {"\n#", "\ndef ", "\n\n\n"};
    return stops;
}

std::string assemble_program(const std::string& signature, const std::string& completion) {
    const auto first = completion.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && completion.compare(first, 4, "def ") == 0) return completion.substr(first);
    if (!completion.empty() && completion.front() == '\n') return signature + completion;
    return signature + "\n" + completion;
}

std::string outcome_class(const program::ExecutionOutcome& outcome) {
    switch (outcome.status) {
        case ExecutionStatus::Ok: return "NoException";
        case ExecutionStatus::ParseError: return "Parsing";
        case ExecutionStatus::RuntimeError: return "Runtime";
    }
    return "Runtime";
}

Prediction run_modular(const BenchmarkInstance& instance, const EvaluationSetting& setting,
                       const BackendSuite& backends, const ModularOptions& options, Trace* trace) {
    if (auto problem = validate_instance(instance, setting)) throw std::invalid_argument(*problem);
    const auto choices = setting.multiple_choice() ? instance.choices : std::nullopt;
    const std::string prompt =
        program::build_code_prompt(instance.question, setting, choices, options.variant, options.demos);
    const std::string signature = program::code_signature(choices);

    CompletionRequest request;
    request.prompt = prompt;
    request.max_tokens = options.max_tokens;
    request.stop = program_stops();
    const Completion completion = complete(*backends.code_lm, request);
    const std::string source = assemble_program(signature, completion.text);
    if (trace)
        trace->append(TraceKind::EngineDecision, {{"engine", "modular"},
                                                  {"stage", "program"},
                                                  {"prompt_sha256", sha256_hex(prompt)},
                                                  {"source", source}});

    program::ExecutionOptions exec;
    exec.step_budget = options.step_budget;
    exec.verify_threshold = options.verify_threshold;
    exec.surface = program::api_surface(options.variant);
    exec.possible_choices = choices;
    const auto outcome = program::run_source(source, instance.image_ref, backends, exec, trace);

    Prediction p;
    p.instance_id = instance.id;
    p.method = Method::Modular;
    p.variant = program::to_string(options.variant);
    p.outcome_class = outcome_class(outcome);
    p.details = {{"program", source}, {"status", program::to_string(outcome.status)}, {"steps_used", outcome.steps_used}};
    if (outcome.error_label) p.details["error_label"] = program::to_string(*outcome.error_label);
    if (outcome.parse_label) p.details["parse_label"] = program::to_string(*outcome.parse_label);
    if (!outcome.message.empty()) p.details["message"] = outcome.message;
    if (outcome.status != ExecutionStatus::Ok) return p;

    p.details["result"] = *outcome.result;
    p.answer_text = *outcome.result;
    if (choices && !trim(*outcome.result).empty()) {
        const auto mapped = map_to_nearest_choice(*backends.instruct_lm, *outcome.result, *choices);
        p.answer_text = mapped.choice;
        json scores = json::array();
        for (const auto& s : mapped.scores) scores.push_back({{"choice", s.continuation}, {"score", s.normalized}});
        p.details["mapping"] = {{"used_model", mapped.used_model}, {"scores", scores}};
        if (trace)
            trace->append(TraceKind::EngineDecision, {{"engine", "modular"},
                                                      {"stage", "map_to_choice"},
                                                      {"candidate", *outcome.result},
                                                      {"choice", mapped.choice},
                                                      {"used_model", mapped.used_model}});
    }
    return p;
}

}  // namespace vqd
