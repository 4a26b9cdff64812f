#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vqd/mock.hpp"
#include "vqd/program/interpreter.hpp"

namespace vqd::testing {

/// Language models that answer anything, so fuzzed programs never hit a fixture gap.
class AnswerAll : public Backend {
public:
    std::string id() const override { return "answer-all"; }
    Completion complete(const CompletionRequest&) override { return completion_from_text("yes"); }
    std::vector<std::vector<TokenScore>> score(const ScoreRequest& r) override {
        std::vector<std::vector<TokenScore>> out;
        for (const auto& c : r.continuations) out.push_back({make_token(c.empty() ? " " : c, -1.0)});
        return out;
    }
    std::string vqa(const VqaRequest&) override { return "yes"; }
};

inline BackendSuite soup_suite() {
    SceneGraph s;
    s.image_ref = "img";
    s.extent = {640, 480};
    s.objects = {{1, "cat", {10, 10, 60, 60}, {"black"}, 2.0}, {2, "dog", {100, 100, 300, 200}, {"brown"}, 4.0}};
    auto oracle = std::make_shared<SceneOracle>(std::vector<SceneGraph>{s});
    auto lm = std::make_shared<AnswerAll>();
    return BackendSuite{lm, lm, lm, oracle, oracle, oracle};
}

/// Random expression over the image API and builtins, valid or not at runtime.
inline std::string soup_expr(std::mt19937_64& rng, int depth = 0) {
    static const std::vector<std::string> atoms = {"1",     "0",      "-2",         "2.5",  "'cat'", "'dog'", "'black'",
                                                   "True",  "None",   "x",          "y",    "[]",    "{}",    "[1, 2]",
                                                   "image", "image_patch", "possible_choices", "{'a': 1}", "1e308"};
    static const std::vector<std::string> binops = {" + ", " - ", " * ", " / ", " // ", " % ", " ** ", " < ",
                                                    " == ", " and ", " or ", " in "};
    static const std::vector<std::string> calls = {"len",   "str", "int", "float", "sorted", "max",  "min",
                                                   "sum",   "list", "abs", "range", "bool_to_yesno", "llm_query"};
    static const std::vector<std::string> methods = {"find('cat')", "exists('dog')", "simple_query('What?')",
                                                     "verify_property('cat', 'black')", "compute_depth()",
                                                     "best_text_match(['a', 'b'])", "crop(0, 0, 50, 50)",
                                                     "left", "height", "upper()", "split(',')", "append(1)",
                                                     "get('a')", "keys()", "colour"};
    if (depth > 3) return atoms[rng() % atoms.size()];
    switch (rng() % 7) {
        case 0: return atoms[rng() % atoms.size()];
        case 1: return soup_expr(rng, depth + 1) + binops[rng() % binops.size()] + soup_expr(rng, depth + 1);
        case 2: return calls[rng() % calls.size()] + "(" + soup_expr(rng, depth + 1) + ")";
        case 3: return "(" + soup_expr(rng, depth + 1) + ")." + methods[rng() % methods.size()];
        case 4: return soup_expr(rng, depth + 1) + "[" + soup_expr(rng, depth + 1) + "]";
        case 5: return "[" + soup_expr(rng, depth + 1) + " for x in " + soup_expr(rng, depth + 1) + "]";
        default: return "ImagePatch(image)";
    }
}

/// Line-structured programs built from soup_expr, occasionally with a token dropped.
inline std::string statement_soup(std::mt19937_64& rng) {
    std::string src = "def execute_command(image) -> str:\n  image_patch = ImagePatch(image)\n";
    std::string indent = "  ";
    for (int i = 0, n = 1 + static_cast<int>(rng() % 6); i < n; ++i) {
        switch (rng() % 6) {
            case 0: src += indent + "x = " + soup_expr(rng) + "\n"; break;
            case 1: src += indent + "y = " + soup_expr(rng) + "\n"; break;
            case 2:
                src += indent + "for x in " + soup_expr(rng) + ":\n";
                indent += "  ";
                src += indent + "y = " + soup_expr(rng) + "\n";
                break;
            case 3:
                src += indent + "if " + soup_expr(rng) + ":\n";
                indent += "  ";
                src += indent + "return " + soup_expr(rng) + "\n";
                break;
            case 4: src += indent + "while " + soup_expr(rng) + ":\n" + indent + "  x = x + 1\n"; break;
            default:
                if (indent.size() > 2) indent.resize(indent.size() - 2);
                break;
        }
    }
    src += "  return " + soup_expr(rng) + "\n";
    if (rng() % 8 == 0 && src.size() > 60) src.erase(40 + rng() % (src.size() - 60), 1);
    return src;
}

/// Random sources assembled from Python-ish tokens, usually under the expected signature.
inline std::string token_soup(std::mt19937_64& rng) {
    static const std::vector<std::string> tokens = {
        "image", "image_patch", "ImagePatch", "(", ")", "[", "]", "{", "}", ":", ",", ".", "=", "==", "+", "-",
        "*", "/", "//", "%", "**", "<", ">", "not", "and", "or", "in", "is", "if", "else", "elif", "for",
        "while", "return", "def", "lambda", "pass", "break", "continue", "True", "False", "None", "0", "1",
        "2", "-3", "2.5", "1e308", "'cat'", "\"dog\"", "'black'", "f'{x}'", "x", "y", "p", "find", "exists",
        "simple_query", "verify_property", "best_text_match", "compute_depth", "crop", "len", "range", "sorted",
        "max", "min", "sum", "str", "int", "float", "list", "dict", "distance", "llm_query", "bool_to_yesno",
        "possible_choices", "left", "right", "upper", "lower", "width", "height", "\n", "\n  ", "\n    ", "\t",
        " ", "#", "\\", "'", "\"\"\"", ";", "@", "$", "import", "os", "__import__", "open", "exec", "eval"};
    if (rng() % 2 == 0) return statement_soup(rng);
    std::uniform_int_distribution<int> len(1, 40);
    std::string src;
    if (rng() % 4 != 0) src = "def execute_command(image) -> str:\n  ";
    for (int i = 0, n = len(rng); i < n; ++i) {
        src += tokens[rng() % tokens.size()];
        if (rng() % 3 == 0) src += ' ';
    }
    return src;
}

/// Exactly one well-formed outcome: the status and its label agree.
inline bool well_classified(const program::ExecutionOutcome& o) {
    using program::ExecutionStatus;
    switch (o.status) {
        case ExecutionStatus::Ok: return o.result.has_value() && !o.error_label && !o.parse_label;
        case ExecutionStatus::ParseError: return o.parse_label.has_value() && !o.error_label && !o.result;
        case ExecutionStatus::RuntimeError: return o.error_label.has_value() && !o.parse_label && !o.result;
    }
    return false;
}

}  // namespace vqd::testing
