#include "vqd/program/interpreter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "values.hpp"
#include "vqd/scoring.hpp"

namespace vqd::program {

std::string to_string(ErrorLabel label) {
    switch (label) {
        case ErrorLabel::NameError: return "NameError";
        case ErrorLabel::AttributeError: return "AttributeError";
        case ErrorLabel::IndexError: return "IndexError";
        case ErrorLabel::TypeError: return "TypeError";
        case ErrorLabel::IndentationError: return "IndentationError";
        case ErrorLabel::ValueError: return "ValueError";
        case ErrorLabel::KeyError: return "KeyError";
        case ErrorLabel::ZeroDivisionError: return "ZeroDivisionError";
        case ErrorLabel::Other: return "Other";
    }
    return "Other";
}

ErrorLabel parse_error_label(const std::string& text) {
    for (auto label : kErrorLabels)
        if (to_string(label) == text) return label;
    throw std::invalid_argument("unknown error label '" + text + "'");
}

std::string to_string(ExecutionStatus status) {
    switch (status) {
        case ExecutionStatus::Ok: return "Ok";
        case ExecutionStatus::ParseError: return "ParseError";
        case ExecutionStatus::RuntimeError: return "RuntimeError";
    }
    return "RuntimeError";
}

ExecutionStatus parse_execution_status(const std::string& text) {
    if (text == "Ok") return ExecutionStatus::Ok;
    if (text == "ParseError") return ExecutionStatus::ParseError;
    if (text == "RuntimeError") return ExecutionStatus::RuntimeError;
    throw std::invalid_argument("unknown execution status '" + text + "'");
}

namespace {

using namespace detail;

// Largest string or container a program may build.
constexpr std::size_t kMaxElements = std::size_t{1} << 22;
constexpr std::size_t kModuleCallCost = 10;

enum class Flow { Normal, Break, Continue, Return };

struct Args {
    std::vector<Value> positional;
    std::vector<std::pair<std::string, Value>> keywords;
};

const std::vector<std::string> kPatchData = {"left",  "lower",  "right",           "upper",
                                             "width", "height", "horizontal_center", "vertical_center"};
const std::vector<std::string> kPatchMethods = {"find",         "exists", "verify_property", "best_text_match",
                                                "simple_query", "compute_depth", "crop"};
const std::vector<std::string> kCoreBuiltins = {"len",   "range", "enumerate", "sorted", "min",  "max",
                                                "abs",   "sum",   "str",       "int",    "float", "round",
                                                "list",  "bool",  "any",       "all",    "tuple", "dict",
                                                "zip",   "reversed", "ImagePatch"};
const std::vector<std::string> kExternalFunctions = {"distance", "llm_query", "bool_to_yesno"};

bool contains_name(const std::vector<std::string>& names, const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
}

const std::string& need_str(const Value& v, const std::string& what) {
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    raise(ErrorLabel::TypeError, what + " must be str, not " + type_name(v));
}

std::int64_t need_int(const Value& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    raise(ErrorLabel::TypeError, "'" + type_name(v) + "' object cannot be interpreted as an integer");
}

double need_real(const Value& v, const std::string& what) {
    if (is_number(v)) return as_double(v);
    raise(ErrorLabel::TypeError, what + " must be a real number, not " + type_name(v));
}

bool is_integral(const Value& v) { return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<bool>(v); }

Value number_value(double d) {
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    return d;
}

nlohmann::json box_json(const Box& b) { return nlohmann::json::array({b.left, b.lower, b.right, b.upper}); }

[[noreturn]] void overflow() { raise(ErrorLabel::Other, "OverflowError: integer overflow"); }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    if (a == std::numeric_limits<std::int64_t>::min() && b == -1) overflow();
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t py_mod(std::int64_t a, std::int64_t b) {
    if (b == -1) return 0;
    std::int64_t r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) r += b;
    return r;
}

class Interpreter {
public:
    Interpreter(const std::string& image_ref, const BackendSuite& backends, const ExecutionOptions& options,
                Trace* trace)
        : image_ref_(image_ref), backends_(backends), options_(options), trace_(trace) {}

    std::string run(const Program& program) {
        const FunctionDef& fn = program.function;
        std::vector<std::optional<Value>> defaults;
        for (const auto& p : fn.params) defaults.push_back(p.default_value ? std::optional(eval(*p.default_value)) : std::nullopt);

        const ImageExtent extent = module_call([&] { return backends_.detector->extent(image_ref_); });
        std::vector<Value> args{heap_.patch(image_ref_, extent.full(), nullptr)};
        if (options_.possible_choices) {
            std::vector<Value> choices(options_.possible_choices->begin(), options_.possible_choices->end());
            args.push_back(heap_.list(std::move(choices)));
        }
        if (args.size() > fn.params.size()) {
            raise(ErrorLabel::TypeError, fn.name + "() takes " + std::to_string(fn.params.size()) +
                                             " positional argument" + (fn.params.size() == 1 ? "" : "s") + " but " +
                                             std::to_string(args.size()) + " were given");
        }
        for (std::size_t i = 0; i < fn.params.size(); ++i) {
            if (i < args.size()) {
                vars_[fn.params[i].name] = args[i];
            } else if (defaults[i]) {
                vars_[fn.params[i].name] = *defaults[i];
            } else {
                raise(ErrorLabel::TypeError,
                      fn.name + "() missing 1 required positional argument: '" + fn.params[i].name + "'");
            }
        }
        exec_block(fn.body);
        return render_result(return_value_);
    }

    std::size_t steps() const { return std::min(steps_, options_.step_budget); }

private:
    // ---- accounting -------------------------------------------------------

    void step(std::size_t n = 1) {
        steps_ += n;
        if (steps_ > options_.step_budget)
            raise(ErrorLabel::Other, "step budget of " + std::to_string(options_.step_budget) + " exhausted");
    }

    void charge(std::size_t elements) {
        if (elements > kMaxElements) raise(ErrorLabel::Other, "MemoryError: object too large");
        step(elements / 64);
    }

    // ---- statements -------------------------------------------------------

    Flow exec_block(const Block& block) {
        for (const auto& stmt : block) {
            const Flow f = exec(*stmt);
            if (f != Flow::Normal) return f;
        }
        return Flow::Normal;
    }

    Flow exec(const Stmt& s) {
        step();
        switch (s.kind) {
            case StmtKind::Assign: {
                const Value v = eval(*s.value);
                for (const auto& t : s.targets) assign(*t, v);
                return Flow::Normal;
            }
            case StmtKind::AugAssign: aug_assign(s); return Flow::Normal;
            case StmtKind::ExprStmt: eval(*s.value); return Flow::Normal;
            case StmtKind::Return:
                return_value_ = s.value ? eval(*s.value) : Value{None{}};
                return Flow::Return;
            case StmtKind::If:
                for (const auto& [test, body] : s.branches)
                    if (truthy(eval(*test))) return exec_block(body);
                return exec_block(s.orelse);
            case StmtKind::For: {
                const Value iterable = eval(*s.value);
                Flow result = Flow::Normal;
                for_each(iterable, [&](const Value& item) {
                    step();
                    assign(*s.targets.front(), item);
                    const Flow f = exec_block(s.body);
                    if (f == Flow::Break) return false;
                    if (f == Flow::Return) {
                        result = Flow::Return;
                        return false;
                    }
                    return true;
                });
                return result;
            }
            case StmtKind::While:
                while (truthy(eval(*s.value))) {
                    step();
                    const Flow f = exec_block(s.body);
                    if (f == Flow::Break) break;
                    if (f == Flow::Return) return f;
                }
                return Flow::Normal;
            case StmtKind::Pass: return Flow::Normal;
            case StmtKind::Break: return Flow::Break;
            case StmtKind::Continue: return Flow::Continue;
        }
        return Flow::Normal;
    }

    void assign(const Expr& target, const Value& value) {
        switch (target.kind) {
            case ExprKind::Name: vars_[target.name] = value; return;
            case ExprKind::Tuple:
            case ExprKind::List: {
                const auto items = materialize(value);
                const std::size_t n = target.children.size();
                if (items.size() < n)
                    raise(ErrorLabel::ValueError, "not enough values to unpack (expected " + std::to_string(n) +
                                                      ", got " + std::to_string(items.size()) + ")");
                if (items.size() > n)
                    raise(ErrorLabel::ValueError, "too many values to unpack (expected " + std::to_string(n) + ")");
                for (std::size_t i = 0; i < n; ++i) assign(*target.children[i], items[i]);
                return;
            }
            case ExprKind::Subscript: {
                const Value container = eval(*target.children[0]);
                if (target.children[1]->kind == ExprKind::Slice) {
                    assign_slice(container, *target.children[1], value);
                    return;
                }
                const Value key = eval(*target.children[1]);
                setitem(container, key, value);
                return;
            }
            default: raise(ErrorLabel::Other, "invalid assignment target");
        }
    }

    void aug_assign(const Stmt& s) {
        const Expr& target = *s.targets.front();
        if (target.kind == ExprKind::Name) {
            const Value current = lookup(target.name);
            const Value rhs = eval(*s.value);
            vars_[target.name] = binary(s.op, current, rhs, true);
            return;
        }
        const Value container = eval(*target.children[0]);
        if (target.children[1]->kind == ExprKind::Slice)
            raise(ErrorLabel::TypeError, "augmented assignment to a slice is not supported");
        const Value key = eval(*target.children[1]);
        const Value current = getitem(container, key);
        const Value rhs = eval(*s.value);
        setitem(container, key, binary(s.op, current, rhs, true));
    }

    // ---- expressions ------------------------------------------------------

    Value eval(const Expr& e) {
        step();
        switch (e.kind) {
            case ExprKind::Name: return lookup(e.name);
            case ExprKind::Int: return e.int_value;
            case ExprKind::Float: return e.float_value;
            case ExprKind::Str: return e.str_value;
            case ExprKind::Bool: return e.bool_value;
            case ExprKind::None: return None{};
            case ExprKind::FString: {
                std::string out = e.pieces[0];
                for (std::size_t i = 0; i < e.children.size(); ++i) {
                    Value v = eval(*e.children[i]);
                    if (e.conversions[i] == 'r') v = py_repr(v);
                    else if (e.conversions[i] == 's') v = py_str(v);
                    out += format_value(v, e.format_specs[i]);
                    out += e.pieces[i + 1];
                    charge(out.size());
                }
                return out;
            }
            case ExprKind::List: {
                std::vector<Value> items;
                for (const auto& c : e.children) items.push_back(eval(*c));
                return heap_.list(std::move(items));
            }
            case ExprKind::Tuple: {
                std::vector<Value> items;
                for (const auto& c : e.children) items.push_back(eval(*c));
                return heap_.tuple(std::move(items));
            }
            case ExprKind::Dict: {
                DictObj* d = heap_.dict();
                for (std::size_t i = 0; i + 1 < e.children.size(); i += 2) {
                    Value k = eval(*e.children[i]);
                    Value v = eval(*e.children[i + 1]);
                    dict_set(d, k, v);
                }
                return d;
            }
            case ExprKind::Unary: return unary(e.name, eval(*e.children[0]));
            case ExprKind::Binary: {
                const Value a = eval(*e.children[0]);
                const Value b = eval(*e.children[1]);
                return binary(e.name, a, b, false);
            }
            case ExprKind::BoolOp: {
                Value v = eval(*e.children[0]);
                for (std::size_t i = 1; i < e.children.size(); ++i) {
                    if ((e.name == "and") != truthy(v)) return v;
                    v = eval(*e.children[i]);
                }
                return v;
            }
            case ExprKind::Compare: {
                Value left = eval(*e.children[0]);
                for (std::size_t i = 0; i < e.ops.size(); ++i) {
                    Value right = eval(*e.children[i + 1]);
                    if (!compare(e.ops[i], left, right)) return false;
                    left = std::move(right);
                }
                return true;
            }
            case ExprKind::Conditional:
                return truthy(eval(*e.children[1])) ? eval(*e.children[0]) : eval(*e.children[2]);
            case ExprKind::Call: return call(e);
            case ExprKind::Attribute: {
                const Value obj = eval(*e.children[0]);
                return attribute(obj, e.name);
            }
            case ExprKind::Subscript: {
                const Value obj = eval(*e.children[0]);
                if (e.children[1]->kind == ExprKind::Slice) return slice(obj, *e.children[1]);
                return getitem(obj, eval(*e.children[1]));
            }
            case ExprKind::Slice: raise(ErrorLabel::TypeError, "slice outside of a subscript");
            case ExprKind::ListComp: return comprehension(e);
        }
        raise(ErrorLabel::Other, "unknown expression");
    }

    Value lookup(const std::string& name) {
        if (auto it = vars_.find(name); it != vars_.end()) return it->second;
        if (builtin_available(name)) {
            auto [it, inserted] = builtin_cache_.try_emplace(name, nullptr);
            if (inserted) it->second = heap_.func(name);
            return it->second;
        }
        raise(ErrorLabel::NameError, "name '" + name + "' is not defined");
    }

    bool builtin_available(const std::string& name) const {
        if (contains_name(kCoreBuiltins, name)) return true;
        return options_.surface != ApiSurface::OnlySimpleQuery && contains_name(kExternalFunctions, name);
    }

    Value comprehension(const Expr& e) {
        const Value iterable = eval(*e.children[1]);
        std::vector<std::string> names;
        collect_names(*e.target, names);
        std::vector<std::optional<Value>> saved;
        for (const auto& n : names) {
            auto it = vars_.find(n);
            saved.push_back(it == vars_.end() ? std::nullopt : std::optional(it->second));
        }
        std::vector<Value> out;
        for_each(iterable, [&](const Value& item) {
            step();
            assign(*e.target, item);
            if (e.children[2] && !truthy(eval(*e.children[2]))) return true;
            out.push_back(eval(*e.children[0]));
            charge(out.size());
            return true;
        });
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (saved[i]) vars_[names[i]] = *saved[i];
            else vars_.erase(names[i]);
        }
        return heap_.list(std::move(out));
    }

    static void collect_names(const Expr& target, std::vector<std::string>& out) {
        if (target.kind == ExprKind::Name) out.push_back(target.name);
        for (const auto& c : target.children)
            if (c) collect_names(*c, out);
    }

    // ---- operators --------------------------------------------------------

    Value unary(const std::string& op, const Value& v) {
        if (op == "not") return !truthy(v);
        if (auto* i = std::get_if<std::int64_t>(&v)) {
            if (op == "+") return *i;
            if (*i == std::numeric_limits<std::int64_t>::min()) overflow();
            return -*i;
        }
        if (auto* b = std::get_if<bool>(&v)) return op == "-" ? -static_cast<std::int64_t>(*b) : static_cast<std::int64_t>(*b);
        if (auto* d = std::get_if<double>(&v)) return op == "-" ? -*d : *d;
        raise(ErrorLabel::TypeError, "bad operand type for unary " + op + ": '" + type_name(v) + "'");
    }

    [[noreturn]] void unsupported_operands(const std::string& op, const Value& a, const Value& b) {
        raise(ErrorLabel::TypeError, "unsupported operand type(s) for " + op + ": '" + type_name(a) + "' and '" +
                                         type_name(b) + "'");
    }

    Value binary(const std::string& op, const Value& a, const Value& b, bool inplace) {
        if (is_number(a) && is_number(b)) return arithmetic(op, a, b);
        if (op == "+") {
            if (auto* s = std::get_if<std::string>(&a)) {
                auto* t = std::get_if<std::string>(&b);
                if (!t) raise(ErrorLabel::TypeError, "can only concatenate str (not \"" + type_name(b) + "\") to str");
                charge(s->size() + t->size());
                return *s + *t;
            }
            if (auto* l = std::get_if<ListObj*>(&a)) {
                if (inplace) {
                    auto items = materialize(b);
                    charge((*l)->items.size() + items.size());
                    (*l)->items.insert((*l)->items.end(), items.begin(), items.end());
                    return *l;
                }
                auto* r = std::get_if<ListObj*>(&b);
                if (!r) raise(ErrorLabel::TypeError, "can only concatenate list (not \"" + type_name(b) + "\") to list");
                charge((*l)->items.size() + (*r)->items.size());
                std::vector<Value> items = (*l)->items;
                items.insert(items.end(), (*r)->items.begin(), (*r)->items.end());
                return heap_.list(std::move(items));
            }
            if (auto* t = std::get_if<TupleObj*>(&a)) {
                auto* r = std::get_if<TupleObj*>(&b);
                if (!r) raise(ErrorLabel::TypeError, "can only concatenate tuple (not \"" + type_name(b) + "\") to tuple");
                charge((*t)->items.size() + (*r)->items.size());
                std::vector<Value> items = (*t)->items;
                items.insert(items.end(), (*r)->items.begin(), (*r)->items.end());
                return heap_.tuple(std::move(items));
            }
        }
        if (op == "*") {
            if (is_integral(b) && !is_number(a)) return repeat(a, need_int(b));
            if (is_integral(a) && !is_number(b)) return repeat(b, need_int(a));
        }
        if (op == "%" && std::holds_alternative<std::string>(a)) {
            std::string out = percent_format(std::get<std::string>(a), b);
            charge(out.size());
            return out;
        }
        unsupported_operands(op, a, b);
    }

    Value repeat(const Value& seq, std::int64_t n) {
        const std::size_t count = n > 0 ? static_cast<std::size_t>(n) : 0;
        auto check = [&](std::size_t len) {
            if (len != 0 && count > kMaxElements / len) raise(ErrorLabel::Other, "MemoryError: object too large");
            charge(len * count);
        };
        if (auto* s = std::get_if<std::string>(&seq)) {
            check(s->size());
            std::string out;
            out.reserve(s->size() * count);
            for (std::size_t i = 0; i < count; ++i) out += *s;
            return out;
        }
        const std::vector<Value>* items = nullptr;
        if (auto* l = std::get_if<ListObj*>(&seq)) items = &(*l)->items;
        else if (auto* t = std::get_if<TupleObj*>(&seq)) items = &(*t)->items;
        if (!items) raise(ErrorLabel::TypeError, "can't multiply sequence by non-int of type '" + type_name(seq) + "'");
        check(items->size());
        std::vector<Value> out;
        for (std::size_t i = 0; i < count; ++i) out.insert(out.end(), items->begin(), items->end());
        if (std::holds_alternative<ListObj*>(seq)) return heap_.list(std::move(out));
        return heap_.tuple(std::move(out));
    }

    Value arithmetic(const std::string& op, const Value& a, const Value& b) {
        if (is_integral(a) && is_integral(b)) {
            const std::int64_t x = need_int(a), y = need_int(b);
            std::int64_t r = 0;
            if (op == "+") {
                if (__builtin_add_overflow(x, y, &r)) overflow();
                return r;
            }
            if (op == "-") {
                if (__builtin_sub_overflow(x, y, &r)) overflow();
                return r;
            }
            if (op == "*") {
                if (__builtin_mul_overflow(x, y, &r)) overflow();
                return r;
            }
            if (op == "/") {
                if (y == 0) raise(ErrorLabel::ZeroDivisionError, "division by zero");
                return static_cast<double>(x) / static_cast<double>(y);
            }
            if (op == "//") {
                if (y == 0) raise(ErrorLabel::ZeroDivisionError, "integer division or modulo by zero");
                return floor_div(x, y);
            }
            if (op == "%") {
                if (y == 0) raise(ErrorLabel::ZeroDivisionError, "integer division or modulo by zero");
                return py_mod(x, y);
            }
            if (op == "**") {
                if (y < 0) {
                    if (x == 0) raise(ErrorLabel::ZeroDivisionError, "0.0 cannot be raised to a negative power");
                    return std::pow(static_cast<double>(x), static_cast<double>(y));
                }
                std::int64_t result = 1, base = x, exp = y;
                while (exp > 0) {
                    step();
                    if (exp & 1)
                        if (__builtin_mul_overflow(result, base, &result)) overflow();
                    exp >>= 1;
                    if (exp > 0 && __builtin_mul_overflow(base, base, &base)) {
                        if (result == 0) break;
                        overflow();
                    }
                }
                return result;
            }
            unsupported_operands(op, a, b);
        }
        const double x = as_double(a), y = as_double(b);
        if (op == "+") return x + y;
        if (op == "-") return x - y;
        if (op == "*") return x * y;
        if (op == "/") {
            if (y == 0) raise(ErrorLabel::ZeroDivisionError, "float division by zero");
            return x / y;
        }
        if (op == "//") {
            if (y == 0) raise(ErrorLabel::ZeroDivisionError, "float floor division by zero");
            return std::floor(x / y);
        }
        if (op == "%") {
            if (y == 0) raise(ErrorLabel::ZeroDivisionError, "float modulo");
            double r = std::fmod(x, y);
            if (r != 0 && ((r < 0) != (y < 0))) r += y;
            return r;
        }
        if (op == "**") {
            if (x == 0 && y < 0) raise(ErrorLabel::ZeroDivisionError, "0.0 cannot be raised to a negative power");
            if (x < 0 && y != std::floor(y)) raise(ErrorLabel::Other, "complex results are not supported");
            const double r = std::pow(x, y);
            if (std::isinf(r) && std::isfinite(x) && std::isfinite(y))
                raise(ErrorLabel::Other, "OverflowError: numerical result out of range");
            return r;
        }
        unsupported_operands(op, a, b);
    }

    bool compare(const std::string& op, const Value& a, const Value& b) {
        if (op == "==") return py_equal(a, b);
        if (op == "!=") return !py_equal(a, b);
        if (op == "in") return contains(b, a);
        if (op == "not in") return !contains(b, a);
        if (op == "is") return identical(a, b);
        if (op == "is not") return !identical(a, b);
        const int c = py_compare(a, b, op);
        if (c == 2) return false;
        if (op == "<") return c < 0;
        if (op == "<=") return c <= 0;
        if (op == ">") return c > 0;
        return c >= 0;
    }

    static bool identical(const Value& a, const Value& b) {
        if (a.index() != b.index()) return false;
        return py_equal(a, b);
    }

    bool contains(const Value& container, const Value& item) {
        if (auto* s = std::get_if<std::string>(&container)) {
            auto* needle = std::get_if<std::string>(&item);
            if (!needle)
                raise(ErrorLabel::TypeError, "'in <string>' requires string as left operand, not " + type_name(item));
            step(s->size() / 64);
            return s->find(*needle) != std::string::npos;
        }
        const std::vector<Value>* items = nullptr;
        if (auto* l = std::get_if<ListObj*>(&container)) items = &(*l)->items;
        else if (auto* t = std::get_if<TupleObj*>(&container)) items = &(*t)->items;
        if (items) {
            step(items->size() / 16);
            for (const auto& v : *items)
                if (py_equal(v, item)) return true;
            return false;
        }
        if (auto* d = std::get_if<DictObj*>(&container)) return dict_find(*d, item) != nullptr;
        if (auto* r = std::get_if<RangeObj*>(&container)) {
            if (!is_integral(item)) {
                if (!is_number(item)) return false;
                const double x = as_double(item);
                if (x != std::floor(x)) return false;
                return contains(container, static_cast<std::int64_t>(x));
            }
            const std::int64_t x = need_int(item);
            const RangeObj& rg = **r;
            if (rg.step > 0 ? (x < rg.start || x >= rg.stop) : (x > rg.start || x <= rg.stop)) return false;
            return (x - rg.start) % rg.step == 0;
        }
        raise(ErrorLabel::TypeError, "argument of type '" + type_name(container) + "' is not iterable");
    }

    // ---- containers -------------------------------------------------------

    Value* dict_find(DictObj* d, const Value& key) {
        if (!is_hashable(key)) raise(ErrorLabel::TypeError, "unhashable type: '" + type_name(key) + "'");
        step(d->items.size() / 16);
        for (auto& [k, v] : d->items)
            if (py_equal(k, key)) return &v;
        return nullptr;
    }

    void dict_set(DictObj* d, const Value& key, const Value& value) {
        if (Value* slot = dict_find(d, key)) {
            *slot = value;
            return;
        }
        charge(d->items.size() + 1);
        d->items.emplace_back(key, value);
    }

    static std::size_t normalize_index(std::int64_t i, std::size_t size, const std::string& what) {
        const auto n = static_cast<std::int64_t>(size);
        if (i < 0) i += n;
        if (i < 0 || i >= n) raise(ErrorLabel::IndexError, what + " index out of range");
        return static_cast<std::size_t>(i);
    }

    Value getitem(const Value& obj, const Value& key) {
        auto index_of = [&](const std::string& what) {
            if (!is_integral(key))
                raise(ErrorLabel::TypeError,
                      what == "string" ? "string indices must be integers, not '" + type_name(key) + "'"
                                       : what + " indices must be integers or slices, not " + type_name(key));
            return need_int(key);
        };
        if (auto* l = std::get_if<ListObj*>(&obj)) return (*l)->items[normalize_index(index_of("list"), (*l)->items.size(), "list")];
        if (auto* t = std::get_if<TupleObj*>(&obj))
            return (*t)->items[normalize_index(index_of("tuple"), (*t)->items.size(), "tuple")];
        if (auto* s = std::get_if<std::string>(&obj))
            return std::string(1, (*s)[normalize_index(index_of("string"), s->size(), "string")]);
        if (auto* r = std::get_if<RangeObj*>(&obj)) {
            const auto i = normalize_index(index_of("range"), static_cast<std::size_t>((*r)->size()), "range object");
            return (*r)->at(static_cast<std::int64_t>(i));
        }
        if (auto* d = std::get_if<DictObj*>(&obj)) {
            if (Value* v = dict_find(*d, key)) return *v;
            raise(ErrorLabel::KeyError, py_repr(key));
        }
        raise(ErrorLabel::TypeError, "'" + type_name(obj) + "' object is not subscriptable");
    }

    void setitem(const Value& obj, const Value& key, const Value& value) {
        if (auto* l = std::get_if<ListObj*>(&obj)) {
            if (!is_integral(key))
                raise(ErrorLabel::TypeError, "list indices must be integers or slices, not " + type_name(key));
            const auto n = static_cast<std::int64_t>((*l)->items.size());
            std::int64_t i = need_int(key);
            if (i < 0) i += n;
            if (i < 0 || i >= n) raise(ErrorLabel::IndexError, "list assignment index out of range");
            (*l)->items[static_cast<std::size_t>(i)] = value;
            return;
        }
        if (auto* d = std::get_if<DictObj*>(&obj)) {
            dict_set(*d, key, value);
            return;
        }
        raise(ErrorLabel::TypeError, "'" + type_name(obj) + "' object does not support item assignment");
    }

    struct SliceBounds {
        std::int64_t start, stop, step, length;
    };

    SliceBounds slice_bounds(const Expr& slice_expr, std::int64_t size) {
        auto bound = [&](const ExprPtr& e) -> std::optional<std::int64_t> {
            if (!e) return std::nullopt;
            const Value v = eval(*e);
            if (std::holds_alternative<None>(v)) return std::nullopt;
            if (!is_integral(v))
                raise(ErrorLabel::TypeError, "slice indices must be integers or None or have an __index__ method");
            return need_int(v);
        };
        const auto lo = bound(slice_expr.children[0]);
        const auto hi = bound(slice_expr.children[1]);
        const auto st = bound(slice_expr.children[2]);
        const std::int64_t step = st.value_or(1);
        if (step == 0) raise(ErrorLabel::ValueError, "slice step cannot be zero");
        auto adjust = [&](std::optional<std::int64_t> v, std::int64_t dflt) {
            if (!v) return dflt;
            std::int64_t x = *v;
            if (x < 0) {
                x += size;
                if (x < 0) x = step < 0 ? -1 : 0;
            } else if (x >= size) {
                x = step < 0 ? size - 1 : size;
            }
            return x;
        };
        const std::int64_t start = adjust(lo, step < 0 ? size - 1 : 0);
        const std::int64_t stop = adjust(hi, step < 0 ? -1 : size);
        std::int64_t length = 0;
        if (step > 0 && start < stop) length = (stop - start - 1) / step + 1;
        if (step < 0 && start > stop) length = (start - stop - 1) / (-step) + 1;
        return {start, stop, step, length};
    }

    Value slice(const Value& obj, const Expr& slice_expr) {
        if (auto* s = std::get_if<std::string>(&obj)) {
            const auto b = slice_bounds(slice_expr, static_cast<std::int64_t>(s->size()));
            std::string out;
            for (std::int64_t i = 0; i < b.length; ++i) out += (*s)[static_cast<std::size_t>(b.start + i * b.step)];
            charge(out.size());
            return out;
        }
        const std::vector<Value>* items = nullptr;
        std::vector<Value> range_items;
        if (auto* l = std::get_if<ListObj*>(&obj)) items = &(*l)->items;
        else if (auto* t = std::get_if<TupleObj*>(&obj)) items = &(*t)->items;
        else if (std::holds_alternative<RangeObj*>(obj)) {
            range_items = materialize(obj);
            items = &range_items;
        }
        if (!items) raise(ErrorLabel::TypeError, "'" + type_name(obj) + "' object is not subscriptable");
        const auto b = slice_bounds(slice_expr, static_cast<std::int64_t>(items->size()));
        std::vector<Value> out;
        for (std::int64_t i = 0; i < b.length; ++i) out.push_back((*items)[static_cast<std::size_t>(b.start + i * b.step)]);
        charge(out.size());
        if (std::holds_alternative<TupleObj*>(obj)) return heap_.tuple(std::move(out));
        return heap_.list(std::move(out));
    }

    void assign_slice(const Value& obj, const Expr& slice_expr, const Value& value) {
        auto* l = std::get_if<ListObj*>(&obj);
        if (!l) raise(ErrorLabel::TypeError, "'" + type_name(obj) + "' object does not support item assignment");
        auto& items = (*l)->items;
        const auto b = slice_bounds(slice_expr, static_cast<std::int64_t>(items.size()));
        auto replacement = materialize(value);
        if (b.step != 1) {
            if (static_cast<std::int64_t>(replacement.size()) != b.length)
                raise(ErrorLabel::ValueError, "attempt to assign sequence of size " + std::to_string(replacement.size()) +
                                                  " to extended slice of size " + std::to_string(b.length));
            for (std::int64_t i = 0; i < b.length; ++i)
                items[static_cast<std::size_t>(b.start + i * b.step)] = replacement[static_cast<std::size_t>(i)];
            return;
        }
        const auto first = static_cast<std::size_t>(b.start);
        const auto last = first + static_cast<std::size_t>(b.length);
        charge(items.size() + replacement.size());
        items.erase(items.begin() + static_cast<std::ptrdiff_t>(first), items.begin() + static_cast<std::ptrdiff_t>(last));
        items.insert(items.begin() + static_cast<std::ptrdiff_t>(first), replacement.begin(), replacement.end());
    }

    // Calls `fn` per element until it returns false. Lists are walked by
    // index so appends during the loop are seen, as in the source language.
    void for_each(const Value& iterable, const std::function<bool(const Value&)>& fn) {
        if (auto* l = std::get_if<ListObj*>(&iterable)) {
            for (std::size_t i = 0; i < (*l)->items.size(); ++i) {
                const Value item = (*l)->items[i];
                if (!fn(item)) return;
            }
            return;
        }
        if (auto* r = std::get_if<RangeObj*>(&iterable)) {
            const RangeObj rg = **r;
            for (std::int64_t i = 0; i < rg.size(); ++i)
                if (!fn(rg.at(i))) return;
            return;
        }
        for (const auto& item : materialize(iterable))
            if (!fn(item)) return;
    }

    std::vector<Value> materialize(const Value& iterable) {
        if (auto* l = std::get_if<ListObj*>(&iterable)) return (*l)->items;
        if (auto* t = std::get_if<TupleObj*>(&iterable)) return (*t)->items;
        if (auto* s = std::get_if<std::string>(&iterable)) {
            charge(s->size());
            std::vector<Value> out;
            for (char c : *s) out.emplace_back(std::string(1, c));
            return out;
        }
        if (auto* d = std::get_if<DictObj*>(&iterable)) {
            std::vector<Value> out;
            for (const auto& kv : (*d)->items) out.push_back(kv.first);
            return out;
        }
        if (auto* r = std::get_if<RangeObj*>(&iterable)) {
            const auto n = (*r)->size();
            charge(static_cast<std::size_t>(n));
            std::vector<Value> out;
            out.reserve(static_cast<std::size_t>(n));
            for (std::int64_t i = 0; i < n; ++i) out.emplace_back((*r)->at(i));
            return out;
        }
        raise(ErrorLabel::TypeError, "'" + type_name(iterable) + "' object is not iterable");
    }

    // ---- attributes and calls ---------------------------------------------

    bool patch_method_available(const std::string& name) const {
        if (!contains_name(kPatchMethods, name)) return false;
        switch (options_.surface) {
            case ApiSurface::Full: return true;
            case ApiSurface::WithoutSimpleQuery: return name != "simple_query";
            case ApiSurface::OnlySimpleQuery: return name == "simple_query";
        }
        return false;
    }

    static bool has_method(const Value& obj, const std::string& name) {
        static const std::vector<std::string> kStr = {
            "lower",   "upper",   "strip",   "lstrip",     "rstrip",  "split",   "join",    "replace",
            "startswith", "endswith", "find", "index",     "count",   "title",   "capitalize", "isdigit",
            "isalpha", "isnumeric", "isalnum", "isspace",  "format"};
        static const std::vector<std::string> kList = {"append", "extend", "pop",     "insert", "index", "count",
                                                       "remove", "sort",   "reverse", "copy",   "clear"};
        static const std::vector<std::string> kDict = {"get", "keys",       "values", "items", "pop",
                                                       "update", "setdefault", "copy", "clear"};
        static const std::vector<std::string> kTuple = {"count", "index"};
        if (std::holds_alternative<std::string>(obj)) return contains_name(kStr, name);
        if (std::holds_alternative<ListObj*>(obj)) return contains_name(kList, name);
        if (std::holds_alternative<DictObj*>(obj)) return contains_name(kDict, name);
        if (std::holds_alternative<TupleObj*>(obj)) return contains_name(kTuple, name);
        return false;
    }

    [[noreturn]] void no_attribute(const Value& obj, const std::string& name) {
        raise(ErrorLabel::AttributeError, "'" + type_name(obj) + "' object has no attribute '" + name + "'");
    }

    Value attribute(const Value& obj, const std::string& name) {
        if (auto* p = std::get_if<PatchObj*>(&obj)) {
            if (contains_name(kPatchData, name)) return patch_data(**p, name);
            if (patch_method_available(name)) return heap_.method(name, obj);
            no_attribute(obj, name);
        }
        if (has_method(obj, name)) return heap_.method(name, obj);
        no_attribute(obj, name);
    }

    static Value patch_data(const PatchObj& p, const std::string& name) {
        const Box& b = p.box;
        if (name == "left") return number_value(b.left);
        if (name == "lower") return number_value(b.lower);
        if (name == "right") return number_value(b.right);
        if (name == "upper") return number_value(b.upper);
        if (name == "width") return number_value(b.width());
        if (name == "height") return number_value(b.height());
        if (name == "horizontal_center") return number_value(b.center_x());
        return number_value(b.center_y());
    }

    Value call(const Expr& e) {
        const Expr& callee = *e.children[0];
        if (callee.kind == ExprKind::Attribute) {
            const Value obj = eval(*callee.children[0]);
            const bool is_patch = std::holds_alternative<PatchObj*>(obj);
            if ((is_patch && patch_method_available(callee.name)) || (!is_patch && has_method(obj, callee.name))) {
                Args args = evaluate_args(e);
                return call_method(obj, callee.name, args);
            }
            const Value attr = attribute(obj, callee.name);
            Args args = evaluate_args(e);
            return call_value(attr, args);
        }
        const Value fn = eval(callee);
        Args args = evaluate_args(e);
        return call_value(fn, args);
    }

    Args evaluate_args(const Expr& e) {
        Args args;
        for (std::size_t i = 1; i < e.children.size(); ++i) args.positional.push_back(eval(*e.children[i]));
        for (const auto& [k, v] : e.keywords) args.keywords.emplace_back(k, eval(*v));
        return args;
    }

    Value call_value(const Value& fn, Args& args) {
        auto* f = std::get_if<FuncObj*>(&fn);
        if (!f) raise(ErrorLabel::TypeError, "'" + type_name(fn) + "' object is not callable");
        if ((*f)->bound) return call_method((*f)->self, (*f)->name, args);
        return call_builtin((*f)->name, args);
    }

    /// Binds arguments to named parameters; the first `required` are mandatory.
    std::vector<std::optional<Value>> bind(const std::string& fname, const Args& args,
                                           const std::vector<std::string>& names, std::size_t required) {
        if (args.positional.size() > names.size()) {
            raise(ErrorLabel::TypeError, fname + "() takes " + (required == names.size() ? "" : "at most ") +
                                             std::to_string(names.size()) + " positional argument" +
                                             (names.size() == 1 ? "" : "s") + " but " +
                                             std::to_string(args.positional.size()) + " were given");
        }
        std::vector<std::optional<Value>> slots(names.size());
        for (std::size_t i = 0; i < args.positional.size(); ++i) slots[i] = args.positional[i];
        for (const auto& [k, v] : args.keywords) {
            auto it = std::find(names.begin(), names.end(), k);
            if (it == names.end()) raise(ErrorLabel::TypeError, fname + "() got an unexpected keyword argument '" + k + "'");
            auto& slot = slots[static_cast<std::size_t>(it - names.begin())];
            if (slot) raise(ErrorLabel::TypeError, fname + "() got multiple values for argument '" + k + "'");
            slot = v;
        }
        for (std::size_t i = 0; i < required; ++i)
            if (!slots[i])
                raise(ErrorLabel::TypeError, fname + "() missing 1 required positional argument: '" + names[i] + "'");
        return slots;
    }

    void no_keywords(const std::string& fname, const Args& args) {
        if (!args.keywords.empty())
            raise(ErrorLabel::TypeError, fname + "() takes no keyword arguments");
    }

    // ---- builtins ---------------------------------------------------------

    Value call_builtin(const std::string& name, Args& args) {
        step();
        if (name == "len") {
            auto a = bind(name, args, {"obj"}, 1);
            return static_cast<std::int64_t>(length(*a[0]));
        }
        if (name == "range") {
            no_keywords(name, args);
            const auto& p = args.positional;
            if (p.empty() || p.size() > 3)
                raise(ErrorLabel::TypeError, "range expected 1 to 3 arguments, got " + std::to_string(p.size()));
            std::int64_t start = 0, stop = 0, step_by = 1;
            if (p.size() == 1) {
                stop = need_int(p[0]);
            } else {
                start = need_int(p[0]);
                stop = need_int(p[1]);
                if (p.size() == 3) step_by = need_int(p[2]);
            }
            if (step_by == 0) raise(ErrorLabel::ValueError, "range() arg 3 must not be zero");
            return heap_.range(start, stop, step_by);
        }
        if (name == "enumerate") {
            auto a = bind(name, args, {"iterable", "start"}, 1);
            std::int64_t i = a[1] ? need_int(*a[1]) : 0;
            std::vector<Value> out;
            for (const auto& item : materialize(*a[0])) out.push_back(heap_.tuple({i++, item}));
            charge(out.size());
            return heap_.list(std::move(out));
        }
        if (name == "zip") {
            no_keywords(name, args);
            std::vector<std::vector<Value>> seqs;
            std::size_t n = args.positional.empty() ? 0 : std::numeric_limits<std::size_t>::max();
            for (const auto& p : args.positional) {
                seqs.push_back(materialize(p));
                n = std::min(n, seqs.back().size());
            }
            std::vector<Value> out;
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<Value> row;
                for (const auto& s : seqs) row.push_back(s[i]);
                out.push_back(heap_.tuple(std::move(row)));
            }
            charge(out.size());
            return heap_.list(std::move(out));
        }
        if (name == "reversed") {
            auto a = bind(name, args, {"sequence"}, 1);
            if (std::holds_alternative<DictObj*>(*a[0]))
                raise(ErrorLabel::TypeError, "'dict' object is not reversible");
            auto items = materialize(*a[0]);
            std::reverse(items.begin(), items.end());
            return heap_.list(std::move(items));
        }
        if (name == "sorted") {
            auto a = bind(name, args, {"iterable", "key", "reverse"}, 1);
            if (args.positional.size() > 1) raise(ErrorLabel::TypeError, "sorted expected 1 argument, got " +
                                                                             std::to_string(args.positional.size()));
            auto items = materialize(*a[0]);
            sort_values(items, a[1], a[2] && truthy(*a[2]));
            return heap_.list(std::move(items));
        }
        if (name == "min" || name == "max") return min_max(name, args);
        if (name == "abs") {
            auto a = bind(name, args, {"x"}, 1);
            const Value& v = *a[0];
            if (auto* i = std::get_if<std::int64_t>(&v)) {
                if (*i == std::numeric_limits<std::int64_t>::min()) overflow();
                return *i < 0 ? -*i : *i;
            }
            if (auto* b = std::get_if<bool>(&v)) return static_cast<std::int64_t>(*b);
            if (auto* d = std::get_if<double>(&v)) return std::fabs(*d);
            raise(ErrorLabel::TypeError, "bad operand type for abs(): '" + type_name(v) + "'");
        }
        if (name == "sum") {
            auto a = bind(name, args, {"iterable", "start"}, 1);
            Value total = a[1] ? *a[1] : Value{std::int64_t{0}};
            if (std::holds_alternative<std::string>(total))
                raise(ErrorLabel::TypeError, "sum() can't sum strings [use ''.join(seq) instead]");
            for (const auto& item : materialize(*a[0])) {
                step();
                total = binary("+", total, item, false);
            }
            return total;
        }
        if (name == "str") {
            auto a = bind(name, args, {"object"}, 0);
            return a[0] ? py_str(*a[0]) : std::string();
        }
        if (name == "int") return to_int(args);
        if (name == "float") return to_float(args);
        if (name == "round") {
            auto a = bind(name, args, {"number", "ndigits"}, 1);
            const Value& v = *a[0];
            if (!is_number(v)) raise(ErrorLabel::TypeError, "type " + type_name(v) + " doesn't define __round__ method");
            const bool no_digits = !a[1] || std::holds_alternative<None>(*a[1]);
            if (is_integral(v)) return need_int(v);
            const double d = std::get<double>(v);
            if (no_digits) {
                if (std::isnan(d)) raise(ErrorLabel::ValueError, "cannot convert float NaN to integer");
                const double r = std::nearbyint(d);
                if (!std::isfinite(r) || std::fabs(r) >= 9.2e18) overflow();
                return static_cast<std::int64_t>(r);
            }
            const std::int64_t nd = need_int(*a[1]);
            if (nd > 300 || nd < -300) return nd > 0 ? d : 0.0;
            const double scale = std::pow(10.0, static_cast<double>(nd));
            const double r = std::nearbyint(d * scale) / scale;
            return std::isfinite(r) ? r : d;
        }
        if (name == "list") {
            auto a = bind(name, args, {"iterable"}, 0);
            return heap_.list(a[0] ? materialize(*a[0]) : std::vector<Value>{});
        }
        if (name == "tuple") {
            auto a = bind(name, args, {"iterable"}, 0);
            return heap_.tuple(a[0] ? materialize(*a[0]) : std::vector<Value>{});
        }
        if (name == "dict") {
            if (args.positional.size() > 1) raise(ErrorLabel::TypeError, "dict expected at most 1 argument");
            DictObj* d = heap_.dict();
            if (!args.positional.empty()) {
                const Value& src = args.positional[0];
                if (auto* other = std::get_if<DictObj*>(&src)) {
                    for (const auto& [k, v] : (*other)->items) dict_set(d, k, v);
                } else {
                    for (const auto& item : materialize(src)) {
                        auto pair = materialize(item);
                        if (pair.size() != 2)
                            raise(ErrorLabel::ValueError, "dictionary update sequence element has length " +
                                                              std::to_string(pair.size()) + "; 2 is required");
                        dict_set(d, pair[0], pair[1]);
                    }
                }
            }
            for (const auto& [k, v] : args.keywords) dict_set(d, k, v);
            return d;
        }
        if (name == "bool") {
            auto a = bind(name, args, {"x"}, 0);
            return a[0] ? truthy(*a[0]) : false;
        }
        if (name == "any" || name == "all") {
            auto a = bind(name, args, {"iterable"}, 1);
            const bool want = name == "any";
            bool found = false;
            for_each(*a[0], [&](const Value& v) {
                step();
                if (truthy(v) == want) {
                    found = true;
                    return false;
                }
                return true;
            });
            return want ? found : !found;
        }
        if (name == "ImagePatch") {
            auto a = bind(name, args, {"image", "left", "lower", "right", "upper"}, 1);
            auto* p = std::get_if<PatchObj*>(&*a[0]);
            if (!p) raise(ErrorLabel::TypeError, "ImagePatch() expects an image, not " + type_name(*a[0]));
            const bool any_coord = a[1] || a[2] || a[3] || a[4];
            if (!any_coord) return heap_.patch((*p)->image_ref, (*p)->box, (*p)->parent);
            if (!(a[1] && a[2] && a[3] && a[4]))
                raise(ErrorLabel::TypeError, "ImagePatch() needs all four of left, lower, right, upper");
            return crop(**p, *a[1], *a[2], *a[3], *a[4]);
        }
        if (name == "distance") {
            auto a = bind(name, args, {"patch_a", "patch_b"}, 2);
            auto* p = std::get_if<PatchObj*>(&*a[0]);
            auto* q = std::get_if<PatchObj*>(&*a[1]);
            double result = 0;
            if (p && q) {
                result = std::hypot((*p)->box.center_x() - (*q)->box.center_x(), (*p)->box.center_y() - (*q)->box.center_y());
            } else if (is_number(*a[0]) && is_number(*a[1])) {
                result = std::fabs(as_double(*a[0]) - as_double(*a[1]));
            } else {
                raise(ErrorLabel::TypeError, "distance() expects two patches or two numbers, got " + type_name(*a[0]) +
                                                 " and " + type_name(*a[1]));
            }
            record("distance", nullptr, {py_repr(*a[0]), py_repr(*a[1])}, result);
            return result;
        }
        if (name == "llm_query") {
            auto a = bind(name, args, {"query", "long_answer"}, 1);
            const std::string& q = need_str(*a[0], "query");
            step(kModuleCallCost);
            CompletionRequest req;
            req.prompt = "Question: " + q + "\nAnswer: ";
            req.stop = {"\n"};
            req.max_tokens = 64;
            const std::string answer = trim(module_call([&] { return complete(*backends_.instruct_lm, req); }).text);
            record("llm_query", nullptr, {q}, answer);
            return answer;
        }
        if (name == "bool_to_yesno") {
            auto a = bind(name, args, {"bool_answer"}, 1);
            return std::string(truthy(*a[0]) ? "yes" : "no");
        }
        raise(ErrorLabel::NameError, "name '" + name + "' is not defined");
    }

    std::size_t length(const Value& v) {
        if (auto* s = std::get_if<std::string>(&v)) return s->size();
        if (auto* l = std::get_if<ListObj*>(&v)) return (*l)->items.size();
        if (auto* t = std::get_if<TupleObj*>(&v)) return (*t)->items.size();
        if (auto* d = std::get_if<DictObj*>(&v)) return (*d)->items.size();
        if (auto* r = std::get_if<RangeObj*>(&v)) return static_cast<std::size_t>((*r)->size());
        raise(ErrorLabel::TypeError, "object of type '" + type_name(v) + "' has no len()");
    }

    Value to_int(Args& args) {
        auto a = bind("int", args, {"x"}, 0);
        if (!a[0]) return std::int64_t{0};
        const Value& v = *a[0];
        if (is_integral(v)) return need_int(v);
        if (auto* d = std::get_if<double>(&v)) {
            if (std::isnan(*d)) raise(ErrorLabel::ValueError, "cannot convert float NaN to integer");
            if (!std::isfinite(*d) || std::fabs(*d) >= 9.2e18) overflow();
            return static_cast<std::int64_t>(std::trunc(*d));
        }
        if (auto* s = std::get_if<std::string>(&v)) {
            std::string t = trim(*s);
            std::string digits;
            bool ok = !t.empty();
            std::size_t i = 0;
            if (ok && (t[0] == '+' || t[0] == '-')) digits += t[i++];
            bool prev_digit = false;
            for (; ok && i < t.size(); ++i) {
                if (std::isdigit(static_cast<unsigned char>(t[i]))) {
                    digits += t[i];
                    prev_digit = true;
                } else if (t[i] == '_' && prev_digit && i + 1 < t.size()) {
                    prev_digit = false;
                } else {
                    ok = false;
                }
            }
            ok = ok && prev_digit;
            if (!ok) raise(ErrorLabel::ValueError, "invalid literal for int() with base 10: " + string_repr(*s));
            std::int64_t out = 0;
            const char* begin = digits.data() + (digits[0] == '+' ? 1 : 0);
            auto [ptr, ec] = std::from_chars(begin, digits.data() + digits.size(), out);
            if (ec != std::errc{}) overflow();
            return out;
        }
        raise(ErrorLabel::TypeError, "int() argument must be a string or a real number, not '" + type_name(v) + "'");
    }

    Value to_float(Args& args) {
        auto a = bind("float", args, {"x"}, 0);
        if (!a[0]) return 0.0;
        const Value& v = *a[0];
        if (is_number(v)) return as_double(v);
        if (auto* s = std::get_if<std::string>(&v)) {
            const std::string t = trim(*s);
            std::string lower;
            for (char c : t) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            const std::string body = (!lower.empty() && (lower[0] == '+' || lower[0] == '-')) ? lower.substr(1) : lower;
            const double sign = (!lower.empty() && lower[0] == '-') ? -1.0 : 1.0;
            if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
            if (body == "inf" || body == "infinity") return sign * std::numeric_limits<double>::infinity();
            bool ok = !body.empty();
            for (char c : body)
                if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == '+' || c == '-')) ok = false;
            if (ok) {
                char* end = nullptr;
                const double d = std::strtod(t.c_str(), &end);
                if (end == t.c_str() + t.size()) return d;
            }
            raise(ErrorLabel::ValueError, "could not convert string to float: " + string_repr(*s));
        }
        raise(ErrorLabel::TypeError, "float() argument must be a string or a real number, not '" + type_name(v) + "'");
    }

    Value key_of(const std::optional<Value>& key_fn, const Value& item) {
        if (!key_fn || std::holds_alternative<None>(*key_fn)) return item;
        Args a;
        a.positional.push_back(item);
        return call_value(*key_fn, a);
    }

    void sort_values(std::vector<Value>& items, const std::optional<Value>& key_fn, bool reverse) {
        std::vector<Value> keys;
        keys.reserve(items.size());
        for (const auto& item : items) keys.push_back(key_of(key_fn, item));
        std::vector<std::size_t> order(items.size());
        std::iota(order.begin(), order.end(), 0);
        const std::size_t n = items.size();
        step(n * (1 + static_cast<std::size_t>(std::log2(static_cast<double>(n) + 1))) / 8);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return reverse ? py_compare(keys[y], keys[x], "<") == -1 : py_compare(keys[x], keys[y], "<") == -1;
        });
        std::vector<Value> sorted;
        sorted.reserve(n);
        for (auto i : order) sorted.push_back(items[i]);
        items = std::move(sorted);
    }

    Value min_max(const std::string& name, Args& args) {
        std::optional<Value> key_fn, dflt;
        for (const auto& [k, v] : args.keywords) {
            if (k == "key") key_fn = v;
            else if (k == "default") dflt = v;
            else raise(ErrorLabel::TypeError, name + "() got an unexpected keyword argument '" + k + "'");
        }
        if (args.positional.empty()) raise(ErrorLabel::TypeError, name + " expected at least 1 argument, got 0");
        const std::vector<Value> items =
            args.positional.size() == 1 ? materialize(args.positional[0]) : args.positional;
        if (items.empty()) {
            if (dflt) return *dflt;
            raise(ErrorLabel::ValueError, name + "() arg is an empty sequence");
        }
        const int want = name == "max" ? 1 : -1;
        std::size_t best = 0;
        Value best_key = key_of(key_fn, items[0]);
        for (std::size_t i = 1; i < items.size(); ++i) {
            step();
            Value k = key_of(key_fn, items[i]);
            if (py_compare(k, best_key, name == "max" ? ">" : "<") == want) {
                best = i;
                best_key = std::move(k);
            }
        }
        return items[best];
    }

    // ---- methods ----------------------------------------------------------

    Value call_method(const Value& obj, const std::string& name, Args& args) {
        step();
        if (auto* p = std::get_if<PatchObj*>(&obj)) return patch_method(*p, name, args);
        if (auto* s = std::get_if<std::string>(&obj)) return str_method(*s, name, args);
        if (auto* l = std::get_if<ListObj*>(&obj)) return list_method(*l, name, args);
        if (auto* d = std::get_if<DictObj*>(&obj)) return dict_method(*d, name, args);
        if (auto* t = std::get_if<TupleObj*>(&obj)) return seq_count_index((*t)->items, "tuple", name, args);
        no_attribute(obj, name);
    }

    Value seq_count_index(const std::vector<Value>& items, const std::string& type, const std::string& name, Args& args) {
        auto a = bind(name, args, {"value"}, 1);
        step(items.size() / 16);
        if (name == "count") {
            std::int64_t n = 0;
            for (const auto& v : items)
                if (py_equal(v, *a[0])) ++n;
            return n;
        }
        for (std::size_t i = 0; i < items.size(); ++i)
            if (py_equal(items[i], *a[0])) return static_cast<std::int64_t>(i);
        raise(ErrorLabel::ValueError, type == "tuple" ? "tuple.index(x): x not in tuple" : py_repr(*a[0]) + " is not in list");
    }

    static std::string strip_chars(const std::string& s, const std::string& chars, bool left, bool right) {
        std::size_t b = 0, e = s.size();
        if (left)
            while (b < e && chars.find(s[b]) != std::string::npos) ++b;
        if (right)
            while (e > b && chars.find(s[e - 1]) != std::string::npos) --e;
        return s.substr(b, e - b);
    }

    Value str_method(const std::string& s, const std::string& name, Args& args) {
        step(s.size() / 64);
        auto transform = [&](auto fn) {
            bind(name, args, {}, 0);
            std::string out = s;
            fn(out);
            return Value{out};
        };
        if (name == "lower")
            return transform([](std::string& o) {
                for (auto& c : o) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            });
        if (name == "upper")
            return transform([](std::string& o) {
                for (auto& c : o) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            });
        if (name == "title" || name == "capitalize") {
            bind(name, args, {}, 0);
            std::string out = s;
            bool start = true;
            for (auto& c : out) {
                const auto u = static_cast<unsigned char>(c);
                if (std::isalpha(u)) {
                    c = static_cast<char>(start ? std::toupper(u) : std::tolower(u));
                    start = false;
                } else if (name == "title") {
                    start = true;
                }
            }
            return out;
        }
        if (name == "strip" || name == "lstrip" || name == "rstrip") {
            auto a = bind(name, args, {"chars"}, 0);
            std::string chars = " \t\n\r\f\v";
            if (a[0] && !std::holds_alternative<None>(*a[0])) chars = need_str(*a[0], "chars");
            return strip_chars(s, chars, name != "rstrip", name != "lstrip");
        }
        if (name == "split") {
            auto a = bind(name, args, {"sep", "maxsplit"}, 0);
            std::int64_t maxsplit = a[1] ? need_int(*a[1]) : -1;
            std::vector<Value> parts;
            if (!a[0] || std::holds_alternative<None>(*a[0])) {
                std::size_t i = 0;
                while (i < s.size()) {
                    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
                    if (i >= s.size()) break;
                    if (maxsplit >= 0 && static_cast<std::int64_t>(parts.size()) == maxsplit) {
                        std::string rest = s.substr(i);
                        while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();
                        parts.emplace_back(rest);
                        break;
                    }
                    std::size_t j = i;
                    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
                    parts.emplace_back(s.substr(i, j - i));
                    i = j;
                }
            } else {
                const std::string& sep = need_str(*a[0], "sep");
                if (sep.empty()) raise(ErrorLabel::ValueError, "empty separator");
                std::size_t start = 0;
                while (true) {
                    if (maxsplit >= 0 && static_cast<std::int64_t>(parts.size()) == maxsplit) break;
                    const auto pos = s.find(sep, start);
                    if (pos == std::string::npos) break;
                    parts.emplace_back(s.substr(start, pos - start));
                    start = pos + sep.size();
                }
                parts.emplace_back(s.substr(start));
            }
            charge(parts.size());
            return heap_.list(std::move(parts));
        }
        if (name == "join") {
            auto a = bind(name, args, {"iterable"}, 1);
            std::string out;
            std::size_t i = 0;
            for (const auto& item : materialize(*a[0])) {
                auto* piece = std::get_if<std::string>(&item);
                if (!piece)
                    raise(ErrorLabel::TypeError, "sequence item " + std::to_string(i) + ": expected str instance, " +
                                                     type_name(item) + " found");
                if (i++) out += s;
                out += *piece;
                charge(out.size());
            }
            return out;
        }
        if (name == "replace") {
            auto a = bind(name, args, {"old", "new", "count"}, 2);
            const std::string& from = need_str(*a[0], "replace() argument 1");
            const std::string& to = need_str(*a[1], "replace() argument 2");
            std::int64_t count = a[2] ? need_int(*a[2]) : -1;
            std::string out;
            std::size_t pos = 0;
            while (count != 0) {
                std::size_t hit = from.empty() ? (pos <= s.size() ? pos : std::string::npos) : s.find(from, pos);
                if (hit == std::string::npos) break;
                out += s.substr(pos, hit - pos) + to;
                charge(out.size());
                if (from.empty()) {
                    if (hit < s.size()) out += s[hit];
                    pos = hit + 1;
                } else {
                    pos = hit + from.size();
                }
                if (count > 0) --count;
                if (pos > s.size()) break;
            }
            if (pos <= s.size()) out += s.substr(pos);
            charge(out.size());
            return out;
        }
        if (name == "startswith" || name == "endswith") {
            auto a = bind(name, args, {"prefix"}, 1);
            std::vector<std::string> options;
            if (auto* t = std::get_if<TupleObj*>(&*a[0])) {
                for (const auto& v : (*t)->items) options.push_back(need_str(v, name + " first arg"));
            } else {
                options.push_back(need_str(*a[0], name + " first arg"));
            }
            for (const auto& o : options) {
                if (o.size() > s.size()) continue;
                if (name == "startswith" ? s.compare(0, o.size(), o) == 0 : s.compare(s.size() - o.size(), o.size(), o) == 0)
                    return true;
            }
            return false;
        }
        if (name == "find" || name == "index" || name == "count") {
            auto a = bind(name, args, {"sub"}, 1);
            const std::string& sub = need_str(*a[0], "must be str");
            if (name == "count") {
                if (sub.empty()) return static_cast<std::int64_t>(s.size() + 1);
                std::int64_t n = 0;
                for (std::size_t pos = s.find(sub); pos != std::string::npos; pos = s.find(sub, pos + sub.size())) ++n;
                return n;
            }
            const auto pos = s.find(sub);
            if (pos == std::string::npos) {
                if (name == "index") raise(ErrorLabel::ValueError, "substring not found");
                return std::int64_t{-1};
            }
            return static_cast<std::int64_t>(pos);
        }
        if (name == "isdigit" || name == "isnumeric" || name == "isalpha" || name == "isalnum" || name == "isspace") {
            bind(name, args, {}, 0);
            if (s.empty()) return false;
            for (char c : s) {
                const auto u = static_cast<unsigned char>(c);
                bool ok = false;
                if (name == "isdigit" || name == "isnumeric") ok = std::isdigit(u);
                else if (name == "isalpha") ok = std::isalpha(u);
                else if (name == "isalnum") ok = std::isalnum(u);
                else ok = std::isspace(u);
                if (!ok) return false;
            }
            return true;
        }
        if (name == "format") return str_format(s, args);
        no_attribute(s, name);
    }

    Value str_format(const std::string& fmt, const Args& args) {
        std::string out;
        std::size_t auto_index = 0;
        for (std::size_t i = 0; i < fmt.size(); ++i) {
            const char c = fmt[i];
            if (c == '{' && i + 1 < fmt.size() && fmt[i + 1] == '{') {
                out += '{';
                ++i;
            } else if (c == '}' && i + 1 < fmt.size() && fmt[i + 1] == '}') {
                out += '}';
                ++i;
            } else if (c == '{') {
                const auto close = fmt.find('}', i);
                if (close == std::string::npos) raise(ErrorLabel::ValueError, "Single '{' encountered in format string");
                std::string field = fmt.substr(i + 1, close - i - 1);
                std::string spec;
                if (auto colon = field.find(':'); colon != std::string::npos) {
                    spec = field.substr(colon + 1);
                    field.resize(colon);
                }
                const Value* v = nullptr;
                if (field.empty()) {
                    if (auto_index >= args.positional.size())
                        raise(ErrorLabel::IndexError, "Replacement index " + std::to_string(auto_index) +
                                                          " out of range for positional args tuple");
                    v = &args.positional[auto_index++];
                } else if (std::all_of(field.begin(), field.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
                    const auto idx = std::stoul(field.substr(0, 9));
                    if (idx >= args.positional.size())
                        raise(ErrorLabel::IndexError, "Replacement index " + field + " out of range for positional args tuple");
                    v = &args.positional[idx];
                } else {
                    for (const auto& [k, val] : args.keywords)
                        if (k == field) v = &val;
                    if (!v) raise(ErrorLabel::KeyError, string_repr(field));
                }
                out += format_value(*v, spec);
                charge(out.size());
                i = close;
            } else if (c == '}') {
                raise(ErrorLabel::ValueError, "Single '}' encountered in format string");
            } else {
                out += c;
            }
        }
        return out;
    }

    Value list_method(ListObj* l, const std::string& name, Args& args) {
        auto& items = l->items;
        if (name == "append") {
            auto a = bind(name, args, {"object"}, 1);
            charge(items.size() + 1);
            items.push_back(*a[0]);
            return None{};
        }
        if (name == "extend") {
            auto a = bind(name, args, {"iterable"}, 1);
            auto more = materialize(*a[0]);
            charge(items.size() + more.size());
            items.insert(items.end(), more.begin(), more.end());
            return None{};
        }
        if (name == "pop") {
            auto a = bind(name, args, {"index"}, 0);
            if (items.empty()) raise(ErrorLabel::IndexError, "pop from empty list");
            std::int64_t i = a[0] ? need_int(*a[0]) : -1;
            const auto n = static_cast<std::int64_t>(items.size());
            if (i < 0) i += n;
            if (i < 0 || i >= n) raise(ErrorLabel::IndexError, "pop index out of range");
            Value v = items[static_cast<std::size_t>(i)];
            items.erase(items.begin() + i);
            return v;
        }
        if (name == "insert") {
            auto a = bind(name, args, {"index", "object"}, 2);
            const auto n = static_cast<std::int64_t>(items.size());
            std::int64_t i = need_int(*a[0]);
            if (i < 0) i = std::max<std::int64_t>(0, i + n);
            i = std::min(i, n);
            charge(items.size() + 1);
            items.insert(items.begin() + i, *a[1]);
            return None{};
        }
        if (name == "index" || name == "count") return seq_count_index(items, "list", name, args);
        if (name == "remove") {
            auto a = bind(name, args, {"value"}, 1);
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (py_equal(items[i], *a[0])) {
                    items.erase(items.begin() + static_cast<std::ptrdiff_t>(i));
                    return None{};
                }
            }
            raise(ErrorLabel::ValueError, "list.remove(x): x not in list");
        }
        if (name == "sort") {
            auto a = bind(name, args, {"key", "reverse"}, 0);
            if (!args.positional.empty()) raise(ErrorLabel::TypeError, "sort() takes no positional arguments");
            std::vector<Value> copy = items;
            sort_values(copy, a[0], a[1] && truthy(*a[1]));
            items = std::move(copy);
            return None{};
        }
        if (name == "reverse") {
            bind(name, args, {}, 0);
            std::reverse(items.begin(), items.end());
            return None{};
        }
        if (name == "copy") {
            bind(name, args, {}, 0);
            return heap_.list(items);
        }
        if (name == "clear") {
            bind(name, args, {}, 0);
            items.clear();
            return None{};
        }
        no_attribute(l, name);
    }

    Value dict_method(DictObj* d, const std::string& name, Args& args) {
        if (name == "get") {
            auto a = bind(name, args, {"key", "default"}, 1);
            if (Value* v = dict_find(d, *a[0])) return *v;
            return a[1] ? *a[1] : Value{None{}};
        }
        if (name == "keys" || name == "values" || name == "items") {
            bind(name, args, {}, 0);
            std::vector<Value> out;
            for (const auto& [k, v] : d->items) {
                if (name == "keys") out.push_back(k);
                else if (name == "values") out.push_back(v);
                else out.push_back(heap_.tuple({k, v}));
            }
            charge(out.size());
            return heap_.list(std::move(out));
        }
        if (name == "pop") {
            auto a = bind(name, args, {"key", "default"}, 1);
            if (!is_hashable(*a[0])) raise(ErrorLabel::TypeError, "unhashable type: '" + type_name(*a[0]) + "'");
            for (auto it = d->items.begin(); it != d->items.end(); ++it) {
                if (py_equal(it->first, *a[0])) {
                    Value v = it->second;
                    d->items.erase(it);
                    return v;
                }
            }
            if (a[1]) return *a[1];
            raise(ErrorLabel::KeyError, py_repr(*a[0]));
        }
        if (name == "setdefault") {
            auto a = bind(name, args, {"key", "default"}, 1);
            if (Value* v = dict_find(d, *a[0])) return *v;
            const Value dflt = a[1] ? *a[1] : Value{None{}};
            dict_set(d, *a[0], dflt);
            return dflt;
        }
        if (name == "update") {
            auto a = bind(name, args, {"other"}, 0);
            if (a[0]) {
                auto* other = std::get_if<DictObj*>(&*a[0]);
                if (!other) raise(ErrorLabel::TypeError, "update() expects a dict, not " + type_name(*a[0]));
                const auto src = (*other)->items;
                for (const auto& [k, v] : src) dict_set(d, k, v);
            }
            return None{};
        }
        if (name == "copy") {
            bind(name, args, {}, 0);
            DictObj* out = heap_.dict();
            out->items = d->items;
            return out;
        }
        if (name == "clear") {
            bind(name, args, {}, 0);
            d->items.clear();
            return None{};
        }
        no_attribute(d, name);
    }

    // ---- image API --------------------------------------------------------

    template <typename Fn>
    auto module_call(Fn&& fn) -> decltype(fn()) {
        try {
            return fn();
        } catch (const FixtureError&) {
            throw;
        } catch (const TransportError&) {
            throw;
        } catch (const BackendError& e) {
            raise(ErrorLabel::Other, std::string("module failure: ") + e.what());
        } catch (const std::invalid_argument& e) {
            raise(ErrorLabel::ValueError, e.what());
        }
    }

    void record(const std::string& module, const PatchObj* patch, const nlohmann::json& arguments,
                const nlohmann::json& result) {
        if (!trace_) return;
        nlohmann::json payload{{"module", module}, {"args", arguments}, {"result", result}, {"ts", now_micros()}};
        if (patch) payload["box"] = box_json(patch->box);
        trace_->append(TraceKind::InterpreterStep, std::move(payload));
    }

    Value crop(const PatchObj& parent, const Value& l, const Value& b, const Value& r, const Value& u) {
        const Box requested{need_real(l, "left"), need_real(b, "lower"), need_real(r, "right"), need_real(u, "upper")};
        const Box clipped = intersect(requested, parent.box);
        if (!clipped.valid()) raise(ErrorLabel::ValueError, "crop box does not overlap the patch");
        return heap_.patch(parent.image_ref, clipped, &parent);
    }

    std::vector<PatchObj*> find(PatchObj* p, const std::string& category) {
        if (category.empty()) raise(ErrorLabel::ValueError, "find() needs a non-empty object name");
        const auto boxes = module_call([&] { return detect(*backends_.detector, p->image_ref, category); });
        std::vector<PatchObj*> out;
        for (const auto& box : boxes) {
            const double cx = box.center_x(), cy = box.center_y();
            if (cx < p->box.left || cx > p->box.right || cy < p->box.lower || cy > p->box.upper) continue;
            const Box clipped = intersect(box, p->box);
            if (!clipped.valid()) continue;
            out.push_back(heap_.patch(p->image_ref, clipped, p));
        }
        return out;
    }

    Value patch_method(PatchObj* p, const std::string& name, Args& args) {
        step(kModuleCallCost);
        if (name == "find" || name == "exists") {
            auto a = bind(name, args, {"object_name"}, 1);
            const std::string& category = need_str(*a[0], "object_name");
            const auto found = find(p, category);
            nlohmann::json boxes = nlohmann::json::array();
            for (const auto* f : found) boxes.push_back(box_json(f->box));
            if (name == "exists") {
                record("exists", p, {category}, !found.empty());
                return !found.empty();
            }
            record("find", p, {category}, boxes);
            std::vector<Value> items(found.begin(), found.end());
            return heap_.list(std::move(items));
        }
        if (name == "verify_property") {
            auto a = bind(name, args, {"object_name", "property"}, 2);
            const std::string& object = need_str(*a[0], "object_name");
            const std::string& property = need_str(*a[1], "property");
            const auto scores =
                module_call([&] { return similarity(*backends_.similarity, p->image_ref, p->box, {property}); });
            const bool verdict = scores.at(0) > options_.verify_threshold;
            record("verify_property", p, {object, property}, {{"score", scores.at(0)}, {"verdict", verdict}});
            return verdict;
        }
        if (name == "best_text_match") {
            auto a = bind(name, args, {"option_list"}, 1);
            std::vector<std::string> options;
            for (const auto& v : materialize(*a[0])) options.push_back(need_str(v, "option"));
            if (options.empty()) raise(ErrorLabel::ValueError, "best_text_match() arg is an empty sequence");
            const auto scores =
                module_call([&] { return similarity(*backends_.similarity, p->image_ref, p->box, options); });
            std::size_t best = 0;
            for (std::size_t i = 1; i < scores.size() && i < options.size(); ++i)
                if (scores[i] > scores[best]) best = i;
            record("best_text_match", p, options, options[best]);
            return options[best];
        }
        if (name == "simple_query") {
            auto a = bind(name, args, {"question"}, 0);
            std::string question = "What is this?";
            if (a[0] && !std::holds_alternative<None>(*a[0])) question = need_str(*a[0], "question");
            std::optional<Box> region;
            if (p->parent) region = p->box;
            const std::string answer = module_call(
                [&] { return vqa(*backends_.vlm, p->image_ref, vqa_prompt(question), region); });
            record("simple_query", p, {question}, answer);
            return answer;
        }
        if (name == "compute_depth") {
            bind(name, args, {}, 0);
            const double d = module_call([&] { return depth_at(*backends_.depth, p->image_ref, p->box); });
            record("compute_depth", p, nlohmann::json::array(), d);
            return d;
        }
        if (name == "crop") {
            auto a = bind(name, args, {"left", "lower", "right", "upper"}, 4);
            Value child = crop(*p, *a[0], *a[1], *a[2], *a[3]);
            record("crop", p, {py_repr(*a[0]), py_repr(*a[1]), py_repr(*a[2]), py_repr(*a[3])},
                   box_json(std::get<PatchObj*>(child)->box));
            return child;
        }
        no_attribute(p, name);
    }

    static std::string render_result(const Value& v) {
        if (auto* s = std::get_if<std::string>(&v)) return *s;
        if (auto* b = std::get_if<bool>(&v)) return *b ? "yes" : "no";
        if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
        if (auto* d = std::get_if<double>(&v)) return shortest_real(*d);
        return py_str(v);
    }

    const std::string& image_ref_;
    const BackendSuite& backends_;
    const ExecutionOptions& options_;
    Trace* trace_;
    Heap heap_;
    std::unordered_map<std::string, Value> vars_;
    std::unordered_map<std::string, FuncObj*> builtin_cache_;
    Value return_value_ = None{};
    std::size_t steps_ = 0;
};

}  // namespace

ExecutionOutcome execute(const Program& program, const std::string& image_ref, const BackendSuite& backends,
                         const ExecutionOptions& options, Trace* trace) {
    if (options.step_budget == 0) throw std::invalid_argument("execute: step budget must be positive");
    Interpreter interpreter(image_ref, backends, options, trace);
    ExecutionOutcome out;
    try {
        out.result = interpreter.run(program);
        out.status = ExecutionStatus::Ok;
    } catch (const PyError& e) {
        out.status = ExecutionStatus::RuntimeError;
        out.error_label = e.label;
        out.message = to_string(e.label) + ": " + e.message;
    } catch (const std::bad_alloc&) {
        out.status = ExecutionStatus::RuntimeError;
        out.error_label = ErrorLabel::Other;
        out.message = "Other: MemoryError";
    } catch (const std::length_error&) {
        out.status = ExecutionStatus::RuntimeError;
        out.error_label = ErrorLabel::Other;
        out.message = "Other: MemoryError";
    }
    out.steps_used = interpreter.steps();
    return out;
}

ExecutionOutcome run_source(const std::string& source, const std::string& image_ref, const BackendSuite& backends,
                            const ExecutionOptions& options, Trace* trace) {
    Program program;
    try {
        program = parse(source);
    } catch (const ParseError& e) {
        if (trace)
            trace->append(TraceKind::ParserEvent, {{"ok", false},
                                                   {"label", to_string(e.label())},
                                                   {"line", e.line()},
                                                   {"column", e.column()},
                                                   {"message", e.detail()}});
        ExecutionOutcome out;
        out.status = ExecutionStatus::ParseError;
        out.parse_label = e.label();
        out.message = e.what();
        return out;
    }
    if (trace)
        trace->append(TraceKind::ParserEvent, {{"ok", true},
                                               {"nodes", program.node_count},
                                               {"comprehensions", program.comprehension_count}});
    return execute(program, image_ref, backends, options, trace);
}

}  // namespace vqd::program
