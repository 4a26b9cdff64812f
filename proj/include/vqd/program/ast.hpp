#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vqd::program {

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

enum class ExprKind {
    Name,
    Int,
    Float,
    Str,
    FString,
    Bool,
    None,
    List,
    Tuple,
    Dict,
    Unary,      // op in `name`; children[0]
    Binary,     // op in `name`; children[0], children[1]
    BoolOp,     // "and" / "or"; children are operands
    Compare,    // children[0] op[0] children[1] op[1] ...
    Conditional,  // children: body, test, orelse
    Call,       // children[0] callee, children[1..] positional args; keywords
    Attribute,  // children[0].name
    Subscript,  // children[0][children[1]]
    Slice,      // children: lower, upper, step (null when omitted)
    ListComp,   // children: element, iterable, condition (optional); target
};

struct Expr {
    ExprKind kind;
    int line = 0;
    int column = 0;

    std::string name;  // identifier, attribute name, or operator
    std::int64_t int_value = 0;
    double float_value = 0;
    std::string str_value;
    bool bool_value = false;

    std::vector<ExprPtr> children;
    std::vector<std::string> ops;
    std::vector<std::pair<std::string, ExprPtr>> keywords;

    // FString: literal pieces interleaved with children; pieces.size() == children.size() + 1.
    std::vector<std::string> pieces;
    std::vector<std::string> format_specs;
    std::vector<char> conversions;

    // ListComp loop variable(s).
    ExprPtr target;

    Expr(ExprKind k, int l, int c) : kind(k), line(l), column(c) {}
};

enum class StmtKind { Assign, AugAssign, ExprStmt, Return, If, For, While, Pass, Break, Continue };

struct Stmt {
    StmtKind kind;
    int line = 0;

    std::vector<ExprPtr> targets;  // Assign: one or more (chained); AugAssign/For: exactly one
    ExprPtr value;                 // Assign/AugAssign/ExprStmt/Return value; For iterable; While test
    std::string op;                // AugAssign operator without '='

    std::vector<std::pair<ExprPtr, Block>> branches;  // If: (test, body) for if + elifs
    Block body;                                      // For/While body
    Block orelse;                                    // If else-branch

    Stmt(StmtKind k, int l) : kind(k), line(l) {}
};

struct Parameter {
    std::string name;
    ExprPtr default_value;
};

struct FunctionDef {
    std::string name;
    std::vector<Parameter> params;
    std::optional<std::string> return_annotation;
    Block body;
    int line = 0;
};

/// A parsed generated program: exactly one function definition.
struct Program {
    FunctionDef function;

    std::size_t node_count = 0;
    std::size_t comprehension_count = 0;
};

}  // namespace vqd::program
