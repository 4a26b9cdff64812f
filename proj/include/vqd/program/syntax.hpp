#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vqd/program/ast.hpp"

namespace vqd::program {

enum class ParseLabel { SyntaxError, IndentationError };

std::string to_string(ParseLabel label);
ParseLabel parse_parse_label(const std::string& text);

class ParseError : public std::runtime_error {
public:
    ParseError(ParseLabel label, int line, int column, const std::string& message);

    ParseLabel label() const { return label_; }
    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& detail() const { return detail_; }

private:
    ParseLabel label_;
    int line_;
    int column_;
    std::string detail_;
};

enum class TokenKind { Name, Int, Float, String, Op, Newline, Indent, Dedent, End };

struct Token {
    TokenKind kind;
    std::string text;  // identifier, operator, or decoded string contents
    int line = 0;
    int column = 0;
    std::int64_t int_value = 0;
    double float_value = 0;
    bool fstring = false;
};

/// Layout-sensitive tokenizer: emits Indent/Dedent at line starts outside
/// brackets, joins lines inside brackets and after a trailing backslash.
/// Inconsistent dedents and unexpected indents raise IndentationError.
std::vector<Token> tokenize(const std::string& source);

/// Parses a program consisting of exactly one function definition. Throws
/// ParseError with a 1-based position.
Program parse(const std::string& source);

/// Names the dialect refuses outright (imports, classes, lambdas, ...).
bool is_unsupported_keyword(const std::string& name);

}  // namespace vqd::program
