#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "vqd/program/syntax.hpp"

namespace vqd::program {

std::string to_string(ParseLabel label) {
    return label == ParseLabel::IndentationError ? "IndentationError" : "SyntaxError";
}

ParseLabel parse_parse_label(const std::string& text) {
    if (text == "IndentationError") return ParseLabel::IndentationError;
    if (text == "SyntaxError") return ParseLabel::SyntaxError;
    throw std::invalid_argument("unknown parse label: " + text);
}

ParseError::ParseError(ParseLabel label, int line, int column, const std::string& message)
    : std::runtime_error(to_string(label) + " at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      label_(label),
      line_(line),
      column_(column),
      detail_(message) {}

namespace {

constexpr int kMaxIndentDepth = 100;
constexpr int kMaxBracketDepth = 200;

constexpr std::array<std::string_view, 38> kOperators = {
    "**=", "//=", ">>=", "<<=", "->", ":=", "**", "//", "==", "!=", "<=", ">=", "+=",
    "-=",  "*=",  "/=",  "%=",  "<<", ">>", "+",  "-",  "*",  "/",  "%",  "<",  ">",
    "=",   "(",   ")",   "[",   "]",  "{",  "}",  ",",  ":",  ".",  ";",  "@"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        while (pos_ < src_.size()) {
            if (at_line_start_ && brackets_.empty()) {
                if (!handle_indentation()) continue;
                if (pos_ >= src_.size()) break;
            }
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\f') {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
            } else if (c == '\\') {
                std::size_t next = pos_ + 1;
                if (next < src_.size() && src_[next] == '\r') ++next;
                if (next >= src_.size() || src_[next] != '\n')
                    fail(ParseLabel::SyntaxError, "unexpected character after line continuation character");
                pos_ = next + 1;
                new_line();
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
                ++pos_;
                if (brackets_.empty()) {
                    emit_newline();
                    at_line_start_ = true;
                }
                new_line();
            } else if (ident_start(c)) {
                lex_name_or_prefixed_string();
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                lex_number();
            } else if (c == '\'' || c == '"') {
                lex_string(false, false);
            } else {
                lex_operator();
            }
        }
        if (!brackets_.empty()) {
            fail_at(ParseLabel::SyntaxError, bracket_lines_.back(), bracket_cols_.back(),
                    std::string("'") + brackets_.back() + "' was never closed");
        }
        emit_newline();
        while (indents_.size() > 1) {
            indents_.pop_back();
            push(TokenKind::Dedent, "");
        }
        push(TokenKind::End, "");
        return std::move(out_);
    }

private:
    int column() const { return static_cast<int>(pos_ - line_start_) + 1; }

    void new_line() {
        ++line_;
        line_start_ = pos_;
    }

    [[noreturn]] void fail(ParseLabel label, const std::string& message) const {
        throw ParseError(label, line_, column(), message);
    }
    [[noreturn]] void fail_at(ParseLabel label, int line, int col, const std::string& message) const {
        throw ParseError(label, line, col, message);
    }

    Token& push(TokenKind kind, std::string text) {
        out_.push_back(Token{kind, std::move(text), line_, column()});
        return out_.back();
    }

    void emit_newline() {
        if (out_.empty()) return;
        const auto last = out_.back().kind;
        if (last == TokenKind::Newline || last == TokenKind::Indent || last == TokenKind::Dedent) return;
        push(TokenKind::Newline, "");
    }

    // Returns false when the line was blank (and has been consumed).
    bool handle_indentation() {
        int width = 0;
        std::size_t p = pos_;
        while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
            if (src_[p] == '\t') {
                width = (width / 8 + 1) * 8;
            } else if (src_[p] == ' ') {
                ++width;
            }
            ++p;
        }
        if (p >= src_.size() || src_[p] == '\n' || src_[p] == '\r' || src_[p] == '#') {
            while (p < src_.size() && src_[p] != '\n' && src_[p] != '\r') ++p;
            if (p < src_.size()) {
                if (src_[p] == '\r' && p + 1 < src_.size() && src_[p + 1] == '\n') ++p;
                ++p;
                pos_ = p;
                new_line();
            } else {
                pos_ = p;
            }
            return false;
        }
        pos_ = p;
        at_line_start_ = false;
        if (width > indents_.back()) {
            if (out_.empty() || out_.back().kind != TokenKind::Newline) fail(ParseLabel::IndentationError, "unexpected indent");
            if (static_cast<int>(indents_.size()) > kMaxIndentDepth)
                fail(ParseLabel::IndentationError, "too many levels of indentation");
            indents_.push_back(width);
            push(TokenKind::Indent, "");
        } else if (width < indents_.back()) {
            while (width < indents_.back()) {
                indents_.pop_back();
                push(TokenKind::Dedent, "");
            }
            if (width != indents_.back())
                fail(ParseLabel::IndentationError, "unindent does not match any outer indentation level");
        }
        return true;
    }

    void lex_name_or_prefixed_string() {
        std::size_t end = pos_;
        while (end < src_.size() && ident_char(src_[end])) ++end;
        const std::string word = src_.substr(pos_, end - pos_);
        if (end < src_.size() && (src_[end] == '\'' || src_[end] == '"') && word.size() <= 2) {
            bool f = false, r = false, ok = true;
            for (char ch : word) {
                const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
                if (l == 'f' && !f) f = true;
                else if (l == 'r' && !r) r = true;
                else ok = false;
            }
            if (ok) {
                pos_ = end;
                lex_string(f, r);
                return;
            }
        }
        push(TokenKind::Name, word);
        pos_ = end;
    }

    void lex_number() {
        const int start_col = column();
        std::size_t p = pos_;
        std::string digits;
        bool is_float = false;
        auto take_digits = [&] {
            while (p < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[p])) || src_[p] == '_')) {
                if (src_[p] != '_') digits += src_[p];
                ++p;
            }
        };
        take_digits();
        if (p < src_.size() && src_[p] == '.') {
            is_float = true;
            digits += '.';
            ++p;
            take_digits();
        }
        if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
            std::size_t q = p + 1;
            if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
            if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
                is_float = true;
                digits += 'e';
                digits.append(src_, p + 1, q - p - 1);
                p = q;
                take_digits();
            }
        }
        if (p < src_.size() && ident_char(src_[p])) fail(ParseLabel::SyntaxError, "invalid decimal literal");
        Token t{is_float ? TokenKind::Float : TokenKind::Int, src_.substr(pos_, p - pos_), line_, start_col};
        if (is_float) {
            t.float_value = std::strtod(digits.c_str(), nullptr);
        } else {
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), t.int_value);
            if (ec != std::errc{}) fail(ParseLabel::SyntaxError, "integer literal too large");
        }
        out_.push_back(std::move(t));
        pos_ = p;
    }

    void lex_string(bool fstring, bool raw) {
        const int start_line = line_;
        const int start_col = column();
        const char quote = src_[pos_];
        const bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote;
        pos_ += triple ? 3 : 1;
        std::string value;
        while (true) {
            if (pos_ >= src_.size()) {
                fail_at(ParseLabel::SyntaxError, start_line, start_col,
                        triple ? "unterminated triple-quoted string literal" : "unterminated string literal");
            }
            const char c = src_[pos_];
            if (c == quote) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (pos_ + 2 < src_.size() && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote) {
                    pos_ += 3;
                    break;
                }
                value += c;
                ++pos_;
            } else if (c == '\n' || c == '\r') {
                if (!triple) fail_at(ParseLabel::SyntaxError, start_line, start_col, "unterminated string literal");
                value += '\n';
                if (c == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
                ++pos_;
                new_line();
            } else if (c == '\\' && pos_ + 1 < src_.size()) {
                const char n = src_[pos_ + 1];
                if (raw) {
                    value += c;
                    value += n;
                    pos_ += 2;
                    if (n == '\n') new_line();
                    continue;
                }
                pos_ += 2;
                switch (n) {
                    case 'n': value += '\n'; break;
                    case 't': value += '\t'; break;
                    case 'r': value += '\r'; break;
                    case '0': value += '\0'; break;
                    case '\\': value += '\\'; break;
                    case '\'': value += '\''; break;
                    case '"': value += '"'; break;
                    case '\n': new_line(); break;
                    default:
                        value += '\\';
                        value += n;
                        if (n == '\n') new_line();
                }
            } else {
                value += c;
                ++pos_;
            }
        }
        Token t{TokenKind::String, std::move(value), start_line, start_col};
        t.fstring = fstring;
        out_.push_back(std::move(t));
    }

    void lex_operator() {
        for (auto op : kOperators) {
            if (src_.compare(pos_, op.size(), op) != 0) continue;
            const char c = op[0];
            if (op.size() == 1 && (c == '(' || c == '[' || c == '{')) {
                if (static_cast<int>(brackets_.size()) >= kMaxBracketDepth)
                    fail(ParseLabel::SyntaxError, "too many nested parentheses");
                brackets_.push_back(c);
                bracket_lines_.push_back(line_);
                bracket_cols_.push_back(column());
            } else if (op.size() == 1 && (c == ')' || c == ']' || c == '}')) {
                const char open = c == ')' ? '(' : (c == ']' ? '[' : '{');
                if (brackets_.empty()) fail(ParseLabel::SyntaxError, std::string("unmatched '") + c + "'");
                if (brackets_.back() != open) {
                    fail(ParseLabel::SyntaxError, std::string("closing parenthesis '") + c +
                                                      "' does not match opening parenthesis '" + brackets_.back() + "'");
                }
                brackets_.pop_back();
                bracket_lines_.pop_back();
                bracket_cols_.pop_back();
            }
            push(TokenKind::Op, std::string(op));
            pos_ += op.size();
            return;
        }
        const unsigned char c = static_cast<unsigned char>(src_[pos_]);
        if (c >= 0x80) fail(ParseLabel::SyntaxError, "invalid non-ASCII character in identifier");
        fail(ParseLabel::SyntaxError, std::string("invalid character '") + src_[pos_] + "'");
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
    int line_ = 1;
    bool at_line_start_ = true;
    std::vector<int> indents_{0};
    std::vector<char> brackets_;
    std::vector<int> bracket_lines_;
    std::vector<int> bracket_cols_;
    std::vector<Token> out_;
};

}  // namespace

std::vector<Token> tokenize(const std::string& source) { return Lexer(source).run(); }

}  // namespace vqd::program
