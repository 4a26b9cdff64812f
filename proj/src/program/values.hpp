#pragma once

// Runtime values for the program interpreter. Containers live in a per-run
// Heap and are referenced by raw pointer, so cyclic and deeply nested
// structures are released without recursion when the run ends.

#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vqd/backend.hpp"
#include "vqd/program/interpreter.hpp"

namespace vqd::program::detail {

struct ListObj;
struct TupleObj;
struct DictObj;
struct RangeObj;
struct PatchObj;
struct FuncObj;

struct None {};

using Value = std::variant<None, bool, std::int64_t, double, std::string, ListObj*, TupleObj*, DictObj*,
                           RangeObj*, PatchObj*, FuncObj*>;

struct ListObj {
    std::vector<Value> items;
};

struct TupleObj {
    std::vector<Value> items;
};

/// Insertion-ordered mapping; lookups are linear.
struct DictObj {
    std::vector<std::pair<Value, Value>> items;
};

struct RangeObj {
    std::int64_t start = 0;
    std::int64_t stop = 0;
    std::int64_t step = 1;

    std::int64_t size() const;
    std::int64_t at(std::int64_t i) const { return start + i * step; }
};

struct PatchObj {
    std::string image_ref;
    Box box;
    const PatchObj* parent = nullptr;
};

/// A builtin function (no receiver) or a method bound to `self`.
struct FuncObj {
    std::string name;
    bool bound = false;
    Value self;
};

struct PyError {
    ErrorLabel label;
    std::string message;
};

[[noreturn]] void raise(ErrorLabel label, std::string message);

class Heap {
public:
    ListObj* list(std::vector<Value> items = {}) { return &lists_.emplace_back(ListObj{std::move(items)}); }
    TupleObj* tuple(std::vector<Value> items = {}) { return &tuples_.emplace_back(TupleObj{std::move(items)}); }
    DictObj* dict() { return &dicts_.emplace_back(); }
    RangeObj* range(std::int64_t start, std::int64_t stop, std::int64_t step) {
        return &ranges_.emplace_back(RangeObj{start, stop, step});
    }
    PatchObj* patch(std::string image_ref, Box box, const PatchObj* parent) {
        return &patches_.emplace_back(PatchObj{std::move(image_ref), box, parent});
    }
    FuncObj* func(std::string name) { return &funcs_.emplace_back(FuncObj{std::move(name), false, None{}}); }
    FuncObj* method(std::string name, Value self) {
        return &funcs_.emplace_back(FuncObj{std::move(name), true, std::move(self)});
    }

private:
    std::deque<ListObj> lists_;
    std::deque<TupleObj> tuples_;
    std::deque<DictObj> dicts_;
    std::deque<RangeObj> ranges_;
    std::deque<PatchObj> patches_;
    std::deque<FuncObj> funcs_;
};

/// Nesting limit for recursive operations (repr, equality, ordering).
inline constexpr int kMaxRecursion = 200;

std::string type_name(const Value& v);
bool truthy(const Value& v);
bool is_number(const Value& v);
double as_double(const Value& v);

std::string float_repr(double d);
/// Shortest round-trip digits, no forced ".0": 2.0 -> "2", 0.1 -> "0.1".
std::string shortest_real(double d);
std::string string_repr(const std::string& s);
std::string py_repr(const Value& v, int depth = 0);
std::string py_str(const Value& v);

bool py_equal(const Value& a, const Value& b, int depth = 0);
/// Three-way ordering for <, <=, >, >=; `op` names the operator in errors.
int py_compare(const Value& a, const Value& b, const std::string& op, int depth = 0);
bool is_hashable(const Value& v);

/// The f-string / format() mini-language.
std::string format_value(const Value& v, const std::string& spec);
/// printf-style `str % args`.
std::string percent_format(const std::string& fmt, const Value& args);

}  // namespace vqd::program::detail
