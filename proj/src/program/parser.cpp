#include <set>

#include "vqd/program/syntax.hpp"

namespace vqd::program {

bool is_unsupported_keyword(const std::string& name) {
    static const std::set<std::string> kUnsupported = {
        "import", "from",   "class", "lambda", "with",  "try",   "except", "finally", "raise",
        "global", "nonlocal", "del", "yield",  "async", "await", "assert", "match"};
    return kUnsupported.count(name) > 0;
}

namespace {

constexpr int kMaxExpressionDepth = 100;

const std::set<std::string> kReserved = {"def",  "return", "if",   "elif",  "else",  "for",      "in",
                                         "while", "and",   "or",   "not",   "True",  "False",    "None",
                                         "pass", "break",  "continue", "is", "import", "from", "class",
                                         "lambda", "with", "try", "except", "finally", "raise", "global",
                                         "nonlocal", "del", "yield", "async", "await", "assert"};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Program program() {
        skip_newlines();
        if (at_kind(TokenKind::Indent)) fail_indent("unexpected indent");
        if (!at_name("def")) {
            if (at_kind(TokenKind::End)) fail("expected a function definition");
            if (peek().kind == TokenKind::Name && is_unsupported_keyword(peek().text))
                fail("'" + peek().text + "' is not supported");
            fail("expected a function definition");
        }
        Program prog;
        prog.function = function_def();
        skip_newlines();
        if (!at_kind(TokenKind::End)) {
            if (at_kind(TokenKind::Indent)) fail_indent("unexpected indent");
            fail("only one function definition is allowed");
        }
        prog.node_count = nodes_;
        prog.comprehension_count = comprehensions_;
        return prog;
    }

    ExprPtr standalone_expression() {
        auto e = expression_list();
        skip_newlines();
        if (!at_kind(TokenKind::End)) fail("invalid syntax");
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& advance() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool at_kind(TokenKind k) const { return peek().kind == k; }
    bool at_op(std::string_view op) const { return peek().kind == TokenKind::Op && peek().text == op; }
    bool at_name(std::string_view n) const { return peek().kind == TokenKind::Name && peek().text == n; }

    [[noreturn]] void fail(const std::string& message) const {
        const Token& t = peek();
        if (t.kind == TokenKind::Indent) throw ParseError(ParseLabel::IndentationError, t.line, t.column, "unexpected indent");
        throw ParseError(ParseLabel::SyntaxError, t.line, t.column, message);
    }
    [[noreturn]] void fail_indent(const std::string& message) const {
        throw ParseError(ParseLabel::IndentationError, peek().line, peek().column, message);
    }

    void expect_op(std::string_view op) {
        if (!at_op(op)) fail("expected '" + std::string(op) + "'");
        advance();
    }
    void expect_name(std::string_view n) {
        if (!at_name(n)) fail("expected '" + std::string(n) + "'");
        advance();
    }
    void skip_newlines() {
        while (at_kind(TokenKind::Newline)) advance();
    }

    ExprPtr node(ExprKind kind, const Token& at) {
        ++nodes_;
        return std::make_unique<Expr>(kind, at.line, at.column);
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxExpressionDepth) p.fail("too many nested parentheses");
        }
        ~DepthGuard() { --p.depth_; }
    };

    // ---- statements -------------------------------------------------------

    FunctionDef function_def() {
        FunctionDef fn;
        fn.line = peek().line;
        expect_name("def");
        if (!at_kind(TokenKind::Name) || kReserved.count(peek().text)) fail("expected function name");
        fn.name = advance().text;
        expect_op("(");
        std::set<std::string> seen;
        bool saw_default = false;
        while (!at_op(")")) {
            if (!at_kind(TokenKind::Name) || kReserved.count(peek().text)) fail("expected parameter name");
            Parameter param;
            param.name = advance().text;
            if (!seen.insert(param.name).second) fail("duplicate argument '" + param.name + "' in function definition");
            if (at_op(":")) {
                advance();
                expression();  // annotation, ignored
            }
            if (at_op("=")) {
                advance();
                param.default_value = expression();
                saw_default = true;
            } else if (saw_default) {
                fail("non-default argument follows default argument");
            }
            fn.params.push_back(std::move(param));
            if (!at_op(",")) break;
            advance();
        }
        expect_op(")");
        if (at_op("->")) {
            advance();
            const Token& ann = peek();
            expression();
            fn.return_annotation = ann.text;
        }
        expect_op(":");
        fn.body = suite();
        return fn;
    }

    Block suite() {
        Block body;
        if (!at_kind(TokenKind::Newline)) {
            simple_statements(body);
            return body;
        }
        advance();
        if (!at_kind(TokenKind::Indent)) fail_indent("expected an indented block");
        advance();
        while (!at_kind(TokenKind::Dedent) && !at_kind(TokenKind::End)) statement(body);
        if (at_kind(TokenKind::Dedent)) advance();
        return body;
    }

    void statement(Block& out) {
        if (at_kind(TokenKind::Indent)) fail_indent("unexpected indent");
        if (at_name("if")) {
            out.push_back(if_statement());
        } else if (at_name("for")) {
            out.push_back(for_statement());
        } else if (at_name("while")) {
            out.push_back(while_statement());
        } else if (at_name("def")) {
            fail("nested function definitions are not supported");
        } else if (at_name("elif") || at_name("else")) {
            fail("invalid syntax");
        } else {
            simple_statements(out);
        }
    }

    StmtPtr if_statement() {
        auto stmt = std::make_unique<Stmt>(StmtKind::If, peek().line);
        advance();
        auto test = expression();
        expect_op(":");
        stmt->branches.emplace_back(std::move(test), suite());
        while (at_name("elif")) {
            advance();
            auto t = expression();
            expect_op(":");
            stmt->branches.emplace_back(std::move(t), suite());
        }
        if (at_name("else")) {
            advance();
            expect_op(":");
            stmt->orelse = suite();
        }
        return stmt;
    }

    StmtPtr for_statement() {
        auto stmt = std::make_unique<Stmt>(StmtKind::For, peek().line);
        advance();
        stmt->targets.push_back(target_list());
        expect_name("in");
        stmt->value = expression_list();
        expect_op(":");
        stmt->body = suite();
        if (at_name("else")) fail("for-else is not supported");
        return stmt;
    }

    StmtPtr while_statement() {
        auto stmt = std::make_unique<Stmt>(StmtKind::While, peek().line);
        advance();
        stmt->value = expression();
        expect_op(":");
        stmt->body = suite();
        if (at_name("else")) fail("while-else is not supported");
        return stmt;
    }

    void simple_statements(Block& out) {
        out.push_back(simple_statement());
        while (at_op(";")) {
            advance();
            if (at_kind(TokenKind::Newline) || at_kind(TokenKind::End)) break;
            out.push_back(simple_statement());
        }
        if (at_kind(TokenKind::End)) return;
        if (!at_kind(TokenKind::Newline)) fail("invalid syntax");
        advance();
    }

    StmtPtr simple_statement() {
        const Token& start = peek();
        if (start.kind == TokenKind::Name) {
            if (start.text == "pass" || start.text == "break" || start.text == "continue") {
                const StmtKind k = start.text == "pass" ? StmtKind::Pass
                                   : start.text == "break" ? StmtKind::Break
                                                           : StmtKind::Continue;
                advance();
                return std::make_unique<Stmt>(k, start.line);
            }
            if (start.text == "return") {
                auto stmt = std::make_unique<Stmt>(StmtKind::Return, start.line);
                advance();
                if (!at_kind(TokenKind::Newline) && !at_kind(TokenKind::End) && !at_op(";"))
                    stmt->value = expression_list();
                return stmt;
            }
            if (is_unsupported_keyword(start.text)) fail("'" + start.text + "' is not supported");
        }
        auto first = expression_list();
        static const std::set<std::string> kAug = {"+=", "-=", "*=", "/=", "//=", "%=", "**="};
        if (peek().kind == TokenKind::Op && kAug.count(peek().text)) {
            check_target(*first, false);
            auto stmt = std::make_unique<Stmt>(StmtKind::AugAssign, start.line);
            std::string op = advance().text;
            op.pop_back();
            stmt->op = op;
            stmt->targets.push_back(std::move(first));
            stmt->value = expression_list();
            return stmt;
        }
        if (at_op("=")) {
            auto stmt = std::make_unique<Stmt>(StmtKind::Assign, start.line);
            std::vector<ExprPtr> chain;
            chain.push_back(std::move(first));
            while (at_op("=")) {
                advance();
                chain.push_back(expression_list());
            }
            stmt->value = std::move(chain.back());
            chain.pop_back();
            for (auto& t : chain) check_target(*t, true);
            stmt->targets = std::move(chain);
            return stmt;
        }
        if (at_op(":")) fail("annotated assignments are not supported");
        if (peek().kind == TokenKind::Op && peek().text != ";" && peek().text != ")") fail("invalid syntax");
        auto stmt = std::make_unique<Stmt>(StmtKind::ExprStmt, start.line);
        stmt->value = std::move(first);
        return stmt;
    }

    void check_target(const Expr& e, bool allow_tuple) const {
        switch (e.kind) {
            case ExprKind::Name:
            case ExprKind::Subscript: return;
            case ExprKind::Tuple:
            case ExprKind::List:
                if (!allow_tuple) break;
                for (const auto& c : e.children) check_target(*c, true);
                return;
            case ExprKind::Attribute:
                throw ParseError(ParseLabel::SyntaxError, e.line, e.column, "attribute assignment is not supported");
            default: break;
        }
        throw ParseError(ParseLabel::SyntaxError, e.line, e.column, "cannot assign to expression");
    }

    // Loop targets: NAME or comma-separated NAMEs, optionally parenthesized.
    ExprPtr target_list() {
        const Token& start = peek();
        std::vector<ExprPtr> items;
        bool trailing_comma = false;
        do {
            trailing_comma = false;
            items.push_back(single_target());
            if (!at_op(",")) break;
            advance();
            trailing_comma = true;
        } while (!at_name("in"));
        if (items.size() == 1 && !trailing_comma) return std::move(items.front());
        auto tuple = node(ExprKind::Tuple, start);
        tuple->children = std::move(items);
        return tuple;
    }

    ExprPtr single_target() {
        const Token& t = peek();
        if (at_op("(") || at_op("[")) {
            const std::string close = at_op("(") ? ")" : "]";
            advance();
            std::vector<ExprPtr> items;
            while (!at_op(close)) {
                items.push_back(single_target());
                if (!at_op(",")) break;
                advance();
            }
            expect_op(close);
            auto tuple = node(ExprKind::Tuple, t);
            tuple->children = std::move(items);
            return tuple;
        }
        if (t.kind != TokenKind::Name || kReserved.count(t.text)) fail("invalid loop target");
        auto n = node(ExprKind::Name, t);
        n->name = advance().text;
        return n;
    }

    // ---- expressions ------------------------------------------------------

    ExprPtr expression_list() {
        const Token& start = peek();
        auto first = expression();
        if (!at_op(",")) return first;
        auto tuple = node(ExprKind::Tuple, start);
        tuple->children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (ends_expression()) break;
            tuple->children.push_back(expression());
        }
        return tuple;
    }

    bool ends_expression() const {
        if (at_kind(TokenKind::Newline) || at_kind(TokenKind::End)) return true;
        if (peek().kind != TokenKind::Op) return false;
        static const std::set<std::string> kEnd = {"=", ")", "]", "}", ":", ";", "+=", "-=", "*=", "/=", "//=", "%=", "**="};
        return kEnd.count(peek().text) > 0;
    }

    ExprPtr expression() {
        DepthGuard guard(*this);
        const Token& start = peek();
        auto body = or_test();
        if (at_name("if")) {
            advance();
            auto test = or_test();
            expect_name("else");
            auto orelse = expression();
            auto cond = node(ExprKind::Conditional, start);
            cond->children.push_back(std::move(body));
            cond->children.push_back(std::move(test));
            cond->children.push_back(std::move(orelse));
            return cond;
        }
        if (at_op(":=")) fail("assignment expressions are not supported");
        return body;
    }

    // Expression that cannot absorb a trailing `if` (comprehension elements/conditions).
    ExprPtr or_test() {
        const Token& start = peek();
        auto left = and_test();
        if (!at_name("or")) return left;
        auto op = node(ExprKind::BoolOp, start);
        op->name = "or";
        op->children.push_back(std::move(left));
        while (at_name("or")) {
            advance();
            op->children.push_back(and_test());
        }
        return op;
    }

    ExprPtr and_test() {
        const Token& start = peek();
        auto left = not_test();
        if (!at_name("and")) return left;
        auto op = node(ExprKind::BoolOp, start);
        op->name = "and";
        op->children.push_back(std::move(left));
        while (at_name("and")) {
            advance();
            op->children.push_back(not_test());
        }
        return op;
    }

    ExprPtr not_test() {
        if (at_name("not")) {
            DepthGuard guard(*this);
            const Token& t = advance();
            auto u = node(ExprKind::Unary, t);
            u->name = "not";
            u->children.push_back(not_test());
            return u;
        }
        return comparison();
    }

    std::optional<std::string> comparison_op() {
        const Token& t = peek();
        if (t.kind == TokenKind::Op) {
            static const std::set<std::string> kCmp = {"<", ">", "==", ">=", "<=", "!="};
            if (kCmp.count(t.text)) {
                advance();
                return t.text;
            }
            return std::nullopt;
        }
        if (t.kind != TokenKind::Name) return std::nullopt;
        if (t.text == "in") {
            advance();
            return "in";
        }
        if (t.text == "not" && peek(1).kind == TokenKind::Name && peek(1).text == "in") {
            advance();
            advance();
            return "not in";
        }
        if (t.text == "is") {
            advance();
            if (at_name("not")) {
                advance();
                return "is not";
            }
            return "is";
        }
        return std::nullopt;
    }

    ExprPtr comparison() {
        const Token& start = peek();
        auto left = arith();
        auto op = comparison_op();
        if (!op) return left;
        auto cmp = node(ExprKind::Compare, start);
        cmp->children.push_back(std::move(left));
        while (op) {
            cmp->ops.push_back(*op);
            cmp->children.push_back(arith());
            op = comparison_op();
        }
        return cmp;
    }

    ExprPtr binary(ExprPtr left, const Token& at, std::string op, ExprPtr right) {
        auto b = node(ExprKind::Binary, at);
        b->name = std::move(op);
        b->children.push_back(std::move(left));
        b->children.push_back(std::move(right));
        return b;
    }

    ExprPtr arith() {
        auto left = term();
        while (at_op("+") || at_op("-")) {
            const Token& t = advance();
            left = binary(std::move(left), t, t.text, term());
        }
        return left;
    }

    ExprPtr term() {
        auto left = factor();
        while (at_op("*") || at_op("/") || at_op("//") || at_op("%")) {
            const Token& t = advance();
            left = binary(std::move(left), t, t.text, factor());
        }
        if (at_op("@") || at_op("<<") || at_op(">>")) fail("unsupported operator '" + peek().text + "'");
        return left;
    }

    ExprPtr factor() {
        if (at_op("-") || at_op("+")) {
            DepthGuard guard(*this);
            const Token& t = advance();
            auto u = node(ExprKind::Unary, t);
            u->name = t.text;
            u->children.push_back(factor());
            return u;
        }
        return power();
    }

    ExprPtr power() {
        auto base = primary();
        if (at_op("**")) {
            DepthGuard guard(*this);
            const Token& t = advance();
            return binary(std::move(base), t, "**", factor());
        }
        return base;
    }

    ExprPtr primary() {
        auto e = atom();
        while (true) {
            if (at_op("(")) {
                const Token& t = advance();
                auto call = node(ExprKind::Call, t);
                call->children.push_back(std::move(e));
                call_arguments(*call);
                e = std::move(call);
            } else if (at_op("[")) {
                const Token& t = advance();
                auto sub = node(ExprKind::Subscript, t);
                sub->children.push_back(std::move(e));
                sub->children.push_back(subscript());
                expect_op("]");
                e = std::move(sub);
            } else if (at_op(".")) {
                const Token& t = advance();
                if (!at_kind(TokenKind::Name)) fail("expected attribute name");
                auto attr = node(ExprKind::Attribute, t);
                attr->name = advance().text;
                attr->children.push_back(std::move(e));
                e = std::move(attr);
            } else {
                return e;
            }
        }
    }

    void call_arguments(Expr& call) {
        bool saw_keyword = false;
        while (!at_op(")")) {
            if (at_op("*") || at_op("**")) fail("argument unpacking is not supported");
            if (at_kind(TokenKind::Name) && peek(1).kind == TokenKind::Op && peek(1).text == "=") {
                std::string key = advance().text;
                advance();
                for (const auto& [k, v] : call.keywords)
                    if (k == key) fail("keyword argument repeated: " + key);
                call.keywords.emplace_back(std::move(key), expression());
                saw_keyword = true;
            } else {
                if (saw_keyword) fail("positional argument follows keyword argument");
                const Token& start = peek();
                auto arg = expression();
                if (at_name("for")) {
                    arg = comprehension(std::move(arg), start);
                    if (!at_op(")") || call.children.size() > 1) fail("generator expression must be parenthesized");
                }
                call.children.push_back(std::move(arg));
            }
            if (!at_op(",")) break;
            advance();
        }
        expect_op(")");
    }

    ExprPtr subscript() {
        const Token& start = peek();
        ExprPtr lower;
        if (!at_op(":")) {
            lower = expression();
            if (!at_op(":")) return lower;
        }
        auto slice = node(ExprKind::Slice, start);
        advance();
        ExprPtr upper, step;
        if (!at_op("]") && !at_op(":")) upper = expression();
        if (at_op(":")) {
            advance();
            if (!at_op("]")) step = expression();
        }
        slice->children.push_back(std::move(lower));
        slice->children.push_back(std::move(upper));
        slice->children.push_back(std::move(step));
        return slice;
    }

    ExprPtr comprehension(ExprPtr element, const Token& at) {
        expect_name("for");
        auto comp = node(ExprKind::ListComp, at);
        ++comprehensions_;
        comp->target = target_list();
        expect_name("in");
        auto iterable = or_test();
        ExprPtr condition;
        if (at_name("if")) {
            advance();
            condition = or_test();
        }
        if (at_name("if") || at_name("for")) fail("only one 'for' clause and one 'if' condition are supported");
        comp->children.push_back(std::move(element));
        comp->children.push_back(std::move(iterable));
        comp->children.push_back(std::move(condition));
        return comp;
    }

    ExprPtr atom() {
        DepthGuard guard(*this);
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Int: {
                auto e = node(ExprKind::Int, t);
                e->int_value = advance().int_value;
                return e;
            }
            case TokenKind::Float: {
                auto e = node(ExprKind::Float, t);
                e->float_value = advance().float_value;
                return e;
            }
            case TokenKind::String: return strings();
            case TokenKind::Name: {
                if (t.text == "True" || t.text == "False") {
                    auto e = node(ExprKind::Bool, t);
                    e->bool_value = advance().text == "True";
                    return e;
                }
                if (t.text == "None") {
                    advance();
                    return node(ExprKind::None, t);
                }
                if (is_unsupported_keyword(t.text)) fail("'" + t.text + "' is not supported");
                if (kReserved.count(t.text)) fail("invalid syntax");
                auto e = node(ExprKind::Name, t);
                e->name = advance().text;
                return e;
            }
            case TokenKind::Op: break;
            case TokenKind::Indent: fail_indent("unexpected indent");
            default: fail("invalid syntax");
        }
        if (t.text == "(") {
            advance();
            if (at_op(")")) {
                advance();
                return node(ExprKind::Tuple, t);
            }
            const Token& start = peek();
            auto first = expression();
            if (at_name("for")) {
                auto comp = comprehension(std::move(first), start);
                expect_op(")");
                return comp;
            }
            if (at_op(")")) {
                advance();
                return first;
            }
            auto tuple = node(ExprKind::Tuple, t);
            tuple->children.push_back(std::move(first));
            while (at_op(",")) {
                advance();
                if (at_op(")")) break;
                tuple->children.push_back(expression());
            }
            expect_op(")");
            return tuple;
        }
        if (t.text == "[") {
            advance();
            auto list = node(ExprKind::List, t);
            if (at_op("]")) {
                advance();
                return list;
            }
            const Token& start = peek();
            auto first = expression();
            if (at_name("for")) {
                auto comp = comprehension(std::move(first), start);
                expect_op("]");
                return comp;
            }
            list->children.push_back(std::move(first));
            while (at_op(",")) {
                advance();
                if (at_op("]")) break;
                list->children.push_back(expression());
            }
            expect_op("]");
            return list;
        }
        if (t.text == "{") {
            advance();
            auto dict = node(ExprKind::Dict, t);
            while (!at_op("}")) {
                dict->children.push_back(expression());
                if (at_name("for")) fail("dict and set comprehensions are not supported");
                if (!at_op(":")) fail("set literals are not supported");
                advance();
                dict->children.push_back(expression());
                if (!at_op(",")) break;
                advance();
            }
            expect_op("}");
            return dict;
        }
        fail("invalid syntax");
    }

    ExprPtr strings() {
        const Token& first = peek();
        std::vector<const Token*> parts;
        bool any_f = false;
        while (at_kind(TokenKind::String)) {
            parts.push_back(&advance());
            any_f = any_f || parts.back()->fstring;
        }
        if (!any_f) {
            auto e = node(ExprKind::Str, first);
            for (const auto* p : parts) e->str_value += p->text;
            return e;
        }
        auto f = node(ExprKind::FString, first);
        f->pieces.emplace_back();
        for (const auto* p : parts) {
            if (p->fstring) {
                fstring_into(*f, *p);
            } else {
                f->pieces.back() += p->text;
            }
        }
        return f;
    }

    void fstring_into(Expr& f, const Token& tok) {
        const std::string& s = tok.text;
        std::size_t i = 0;
        auto bad = [&](const std::string& message) {
            throw ParseError(ParseLabel::SyntaxError, tok.line, tok.column, "f-string: " + message);
        };
        while (i < s.size()) {
            const char c = s[i];
            if (c == '{' && i + 1 < s.size() && s[i + 1] == '{') {
                f.pieces.back() += '{';
                i += 2;
            } else if (c == '}' && i + 1 < s.size() && s[i + 1] == '}') {
                f.pieces.back() += '}';
                i += 2;
            } else if (c == '}') {
                bad("single '}' is not allowed");
            } else if (c == '{') {
                std::size_t j = i + 1;
                int depth = 0;
                char quote = 0;
                std::size_t expr_end = std::string::npos, conv_pos = std::string::npos, spec_pos = std::string::npos;
                for (; j < s.size(); ++j) {
                    const char d = s[j];
                    if (quote) {
                        if (d == quote) quote = 0;
                        continue;
                    }
                    if (d == '\'' || d == '"') quote = d;
                    else if (d == '(' || d == '[' || d == '{') ++depth;
                    else if ((d == ')' || d == ']' || d == '}') && depth > 0) --depth;
                    else if (depth == 0 && d == '}') break;
                    else if (depth == 0 && d == '!' && j + 1 < s.size() && s[j + 1] != '=' && expr_end == std::string::npos) {
                        expr_end = j;
                        conv_pos = j + 1;
                    } else if (depth == 0 && d == ':' && spec_pos == std::string::npos) {
                        if (expr_end == std::string::npos) expr_end = j;
                        spec_pos = j + 1;
                        // the rest up to '}' is the spec
                        while (j + 1 < s.size() && s[j + 1] != '}') ++j;
                    }
                }
                if (j >= s.size()) bad("expecting '}'");
                if (expr_end == std::string::npos) expr_end = j;
                const std::string expr_text = s.substr(i + 1, expr_end - i - 1);
                if (expr_text.find_first_not_of(" \t") == std::string::npos) bad("empty expression not allowed");
                char conversion = 0;
                if (conv_pos != std::string::npos) {
                    const std::size_t conv_end = spec_pos != std::string::npos ? spec_pos - 1 : j;
                    if (conv_end != conv_pos + 1) bad("invalid conversion character");
                    conversion = s[conv_pos];
                    if (conversion != 'r' && conversion != 's') bad("invalid conversion character");
                }
                std::string spec = spec_pos != std::string::npos ? s.substr(spec_pos, j - spec_pos) : std::string{};
                ExprPtr inner;
                try {
                    Parser sub(tokenize("(" + expr_text + ")"));
                    sub.depth_ = depth_;
                    inner = sub.standalone_expression();
                    nodes_ += sub.nodes_;
                } catch (const ParseError& e) {
                    bad(e.detail());
                }
                f.children.push_back(std::move(inner));
                f.format_specs.push_back(std::move(spec));
                f.conversions.push_back(conversion);
                f.pieces.emplace_back();
                i = j + 1;
            } else {
                f.pieces.back() += c;
                ++i;
            }
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    std::size_t nodes_ = 0;
    std::size_t comprehensions_ = 0;
};

}  // namespace

Program parse(const std::string& source) { return Parser(tokenize(source)).program(); }

}  // namespace vqd::program
