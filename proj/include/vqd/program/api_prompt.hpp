#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vqd/core.hpp"
#include "vqd/program/interpreter.hpp"

namespace vqd::program {

enum class PromptVariant { TaskAgnostic, WithoutBlip2, OnlyBlip2ZeroShot, OnlyBlip2FewShot };

/// CLI spellings: task-agnostic, no-blip2, only-blip2-zs, only-blip2-fs.
std::string to_string(PromptVariant variant);
PromptVariant parse_prompt_variant(const std::string& text);

/// Which image API a generated program may call under this variant.
ApiSurface api_surface(PromptVariant variant);

/// Module methods and functions other than simple_query, as they appear in calls.
const std::vector<std::string>& non_vqa_modules();

/// A worked example: the question comment and the full program that answers it.
struct Demonstration {
    std::string question;
    std::string program;

    friend bool operator==(const Demonstration&, const Demonstration&) = default;
};

/// Splits "@@ example" blocks. Each block starts with "# <question>" and
/// continues with the program.
std::vector<Demonstration> parse_code_demonstrations(const std::string& text);

/// The API listing for a variant (asset text with unsupported blocks removed).
std::string api_text(PromptVariant variant);

/// "def execute_command(image) -> str:", or with possible_choices=[...] in
/// multiple-choice mode.
std::string code_signature(const std::optional<std::vector<std::string>>& choices);

/// API, demonstrations (few-shot only), "# <question>", the possible-answers
/// comment in MC mode, then the signature. Throws std::invalid_argument when
/// a few-shot prompt does not get exactly 3 demonstrations, when a demo uses a
/// module the variant hides, or when MC mode lacks choices.
std::string build_code_prompt(const std::string& question, const EvaluationSetting& setting,
                              const std::optional<std::vector<std::string>>& choices, PromptVariant variant,
                              const std::vector<Demonstration>& demos = {});

/// Number of calls to `name(` in `text`, ignoring longer identifiers that end with it.
std::size_t count_calls(const std::string& text, const std::string& name);

}  // namespace vqd::program
