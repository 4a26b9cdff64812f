#include "vqd/program/api_prompt.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "vqd/assets.hpp"
#include "vqd/scoring.hpp"

namespace vqd::program {

std::string to_string(PromptVariant variant) {
    switch (variant) {
        case PromptVariant::TaskAgnostic: return "task-agnostic";
        case PromptVariant::WithoutBlip2: return "no-blip2";
        case PromptVariant::OnlyBlip2ZeroShot: return "only-blip2-zs";
        case PromptVariant::OnlyBlip2FewShot: return "only-blip2-fs";
    }
    return "task-agnostic";
}

PromptVariant parse_prompt_variant(const std::string& text) {
    for (auto v : {PromptVariant::TaskAgnostic, PromptVariant::WithoutBlip2, PromptVariant::OnlyBlip2ZeroShot,
                   PromptVariant::OnlyBlip2FewShot})
        if (to_string(v) == text) return v;
    throw std::invalid_argument("unknown prompt variant '" + text +
                                "' (expected task-agnostic, no-blip2, only-blip2-zs or only-blip2-fs)");
}

ApiSurface api_surface(PromptVariant variant) {
    switch (variant) {
        case PromptVariant::TaskAgnostic: return ApiSurface::Full;
        case PromptVariant::WithoutBlip2: return ApiSurface::WithoutSimpleQuery;
        case PromptVariant::OnlyBlip2ZeroShot:
        case PromptVariant::OnlyBlip2FewShot: return ApiSurface::OnlySimpleQuery;
    }
    return ApiSurface::Full;
}

const std::vector<std::string>& non_vqa_modules() {
    static const std::vector<std::string> names = {"find",          "exists", "verify_property", "best_text_match",
                                                   "compute_depth", "crop",   "distance",        "llm_query",
                                                   "bool_to_yesno"};
    return names;
}

std::size_t count_calls(const std::string& text, const std::string& name) {
    const std::string needle = name + "(";
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
        const bool word_start = pos == 0 || !(std::isalnum(static_cast<unsigned char>(text[pos - 1])) || text[pos - 1] == '_');
        if (word_start) ++n;
    }
    return n;
}

namespace {

std::vector<std::string> split_blocks(const std::string& text, const std::string& marker,
                                      std::vector<std::string>* headers = nullptr) {
    std::vector<std::string> blocks;
    std::istringstream in(text);
    std::string line;
    bool open = false;
    while (std::getline(in, line)) {
        if (line.rfind(marker, 0) == 0) {
            blocks.emplace_back();
            if (headers) headers->push_back(trim(line.substr(marker.size())));
            open = true;
            continue;
        }
        if (!open) {
            if (!trim(line).empty()) throw std::invalid_argument("text before the first '" + marker + "' marker");
            continue;
        }
        blocks.back() += line + "\n";
    }
    return blocks;
}

std::vector<std::string> uses_of(const std::string& header) {
    std::vector<std::string> out;
    const std::string key = "uses=";
    const auto pos = header.find(key);
    if (pos == std::string::npos) return out;
    std::stringstream list(header.substr(pos + key.size()));
    std::string item;
    while (std::getline(list, item, ',')) out.push_back(trim(item));
    return out;
}

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

void require_only_simple_query(const std::string& text, const std::string& what) {
    for (const auto& m : non_vqa_modules())
        if (count_calls(text, m) > 0) throw std::invalid_argument(what + " calls '" + m + "', which this variant hides");
}

}  // namespace

std::vector<Demonstration> parse_code_demonstrations(const std::string& text) {
    std::vector<Demonstration> demos;
    for (const auto& block : split_blocks(text, "@@ example")) {
        std::istringstream in(block);
        std::string line, question, program;
        while (std::getline(in, line)) {
            if (program.empty() && line.rfind("# ", 0) == 0) {
                question += (question.empty() ? "" : " ") + trim(line.substr(2));
                continue;
            }
            if (program.empty() && trim(line).empty()) continue;
            program += line + "\n";
        }
        if (question.empty() || program.empty())
            throw std::invalid_argument("code demonstration needs a '# question' line and a program");
        demos.push_back({question, strip_trailing_newlines(program)});
    }
    return demos;
}

std::string api_text(PromptVariant variant) {
    if (variant == PromptVariant::OnlyBlip2ZeroShot || variant == PromptVariant::OnlyBlip2FewShot) {
        std::string text = asset("api_simple_query.txt");
        require_only_simple_query(text, "the simple_query API asset");
        return strip_trailing_newlines(text);
    }
    std::vector<std::string> headers;
    const auto blocks = split_blocks(asset("api_full.txt"), "@@ block", &headers);
    std::string text;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto uses = uses_of(headers[i]);
        const bool drops = variant == PromptVariant::WithoutBlip2 &&
                           std::find(uses.begin(), uses.end(), "simple_query") != uses.end();
        if (!drops) text += blocks[i];
    }
    if (variant == PromptVariant::WithoutBlip2 && text.find("simple_query") != std::string::npos)
        throw std::logic_error("API asset mentions simple_query outside a block tagged uses=simple_query");
    return strip_trailing_newlines(text);
}

std::string code_signature(const std::optional<std::vector<std::string>>& choices) {
    if (!choices) return "def execute_command(image) -> str:";
    return "def execute_command(image, possible_choices=" + render_choice_list(*choices) + ") -> str:";
}

std::string build_code_prompt(const std::string& question, const EvaluationSetting& setting,
                              const std::optional<std::vector<std::string>>& choices, PromptVariant variant,
                              const std::vector<Demonstration>& demos) {
    if (setting.multiple_choice() && (!choices || choices->size() < 2))
        throw std::invalid_argument("multiple-choice prompt needs at least 2 choices");
    std::string prompt = api_text(variant) + "\n\n";
    if (variant == PromptVariant::OnlyBlip2FewShot) {
        if (demos.size() != 3)
            throw std::invalid_argument("few-shot prompt needs exactly 3 demonstrations, got " +
                                        std::to_string(demos.size()));
        for (const auto& d : demos) {
            require_only_simple_query(d.program, "demonstration '" + d.question + "'");
            prompt += "# " + d.question + "\n" + d.program + "\n\n";
        }
    }
    prompt += "# " + question + "\n";
    const auto mc_choices = setting.multiple_choice() ? choices : std::nullopt;
    if (mc_choices) prompt += "# possible answers : " + render_choice_list(*mc_choices) + "\n";
    prompt += code_signature(mc_choices);
    return prompt;
}

}  // namespace vqd::program
