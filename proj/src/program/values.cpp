#include "values.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string_view>

namespace vqd::program::detail {

void raise(ErrorLabel label, std::string message) { throw PyError{label, std::move(message)}; }

std::int64_t RangeObj::size() const {
    if (step > 0 && start < stop) return (stop - start - 1) / step + 1;
    if (step < 0 && start > stop) return (start - stop - 1) / (-step) + 1;
    return 0;
}

namespace {

struct TypeNameVisitor {
    std::string operator()(const None&) const { return "NoneType"; }
    std::string operator()(bool) const { return "bool"; }
    std::string operator()(std::int64_t) const { return "int"; }
    std::string operator()(double) const { return "float"; }
    std::string operator()(const std::string&) const { return "str"; }
    std::string operator()(ListObj*) const { return "list"; }
    std::string operator()(TupleObj*) const { return "tuple"; }
    std::string operator()(DictObj*) const { return "dict"; }
    std::string operator()(RangeObj*) const { return "range"; }
    std::string operator()(PatchObj*) const { return "ImagePatch"; }
    std::string operator()(FuncObj* f) const { return f->bound ? "method" : "builtin_function_or_method"; }
};

void check_depth(int depth) {
    if (depth > kMaxRecursion) raise(ErrorLabel::Other, "maximum recursion depth exceeded");
}

std::string seq_repr(const std::vector<Value>& items, char open, char close, bool tuple, int depth) {
    std::string out(1, open);
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += py_repr(items[i], depth + 1);
    }
    if (tuple && items.size() == 1) out += ',';
    return out + close;
}

}  // namespace

std::string type_name(const Value& v) { return std::visit(TypeNameVisitor{}, v); }

bool truthy(const Value& v) {
    if (std::holds_alternative<None>(v)) return false;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i != 0;
    if (auto* d = std::get_if<double>(&v)) return *d != 0.0;
    if (auto* s = std::get_if<std::string>(&v)) return !s->empty();
    if (auto* l = std::get_if<ListObj*>(&v)) return !(*l)->items.empty();
    if (auto* t = std::get_if<TupleObj*>(&v)) return !(*t)->items.empty();
    if (auto* d = std::get_if<DictObj*>(&v)) return !(*d)->items.empty();
    if (auto* r = std::get_if<RangeObj*>(&v)) return (*r)->size() > 0;
    return true;
}

bool is_number(const Value& v) {
    return std::holds_alternative<bool>(v) || std::holds_alternative<std::int64_t>(v) ||
           std::holds_alternative<double>(v);
}

double as_double(const Value& v) {
    if (auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

std::string float_repr(double d) {
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::scientific);
    std::string sci(buf, res.ptr);
    std::string sign;
    if (sci[0] == '-') {
        sign = "-";
        sci.erase(0, 1);
    }
    const auto e_pos = sci.find('e');
    std::string digits;
    for (std::size_t i = 0; i < e_pos; ++i)
        if (sci[i] != '.') digits += sci[i];
    const int exp = std::stoi(sci.substr(e_pos + 1));
    if (exp >= -4 && exp < 16) {
        std::string out;
        if (exp >= 0) {
            const std::size_t int_len = static_cast<std::size_t>(exp) + 1;
            if (digits.size() <= int_len) {
                out = digits + std::string(int_len - digits.size(), '0') + ".0";
            } else {
                out = digits.substr(0, int_len) + "." + digits.substr(int_len);
            }
        } else {
            out = "0." + std::string(static_cast<std::size_t>(-exp - 1), '0') + digits;
        }
        return sign + out;
    }
    std::string mantissa = digits.substr(0, 1);
    if (digits.size() > 1) mantissa += "." + digits.substr(1);
    std::string e = std::to_string(std::abs(exp));
    if (e.size() < 2) e = "0" + e;
    return sign + mantissa + "e" + (exp < 0 ? "-" : "+") + e;
}

std::string shortest_real(double d) {
    std::string s = float_repr(d);
    if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
    return s;
}

std::string string_repr(const std::string& s) {
    const char quote = (s.find('\'') != std::string::npos && s.find('"') == std::string::npos) ? '"' : '\'';
    std::string out(1, quote);
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (c == quote || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\r') {
            out += "\\r";
        } else if (c == '\t') {
            out += "\\t";
        } else if (u < 0x20 || u == 0x7f) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02x", u);
            out += buf;
        } else {
            out += c;
        }
    }
    return out + quote;
}

std::string py_repr(const Value& v, int depth) {
    check_depth(depth);
    if (std::holds_alternative<None>(v)) return "None";
    if (auto* b = std::get_if<bool>(&v)) return *b ? "True" : "False";
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&v)) return float_repr(*d);
    if (auto* s = std::get_if<std::string>(&v)) return string_repr(*s);
    if (auto* l = std::get_if<ListObj*>(&v)) return seq_repr((*l)->items, '[', ']', false, depth);
    if (auto* t = std::get_if<TupleObj*>(&v)) return seq_repr((*t)->items, '(', ')', true, depth);
    if (auto* dp = std::get_if<DictObj*>(&v)) {
        std::string out = "{";
        bool first = true;
        for (const auto& [k, val] : (*dp)->items) {
            if (!first) out += ", ";
            first = false;
            out += py_repr(k, depth + 1) + ": " + py_repr(val, depth + 1);
        }
        return out + "}";
    }
    if (auto* r = std::get_if<RangeObj*>(&v)) {
        std::string out = "range(" + std::to_string((*r)->start) + ", " + std::to_string((*r)->stop);
        if ((*r)->step != 1) out += ", " + std::to_string((*r)->step);
        return out + ")";
    }
    if (auto* p = std::get_if<PatchObj*>(&v)) {
        const Box& b = (*p)->box;
        return "ImagePatch(" + shortest_real(b.left) + ", " + shortest_real(b.lower) + ", " +
               shortest_real(b.right) + ", " + shortest_real(b.upper) + ")";
    }
    const FuncObj* f = std::get<FuncObj*>(v);
    if (f->bound) return "<bound method " + type_name(f->self) + "." + f->name + ">";
    return "<built-in function " + f->name + ">";
}

std::string py_str(const Value& v) {
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    return py_repr(v);
}

bool py_equal(const Value& a, const Value& b, int depth) {
    check_depth(depth);
    if (is_number(a) && is_number(b)) {
        if (!std::holds_alternative<double>(a) && !std::holds_alternative<double>(b))
            return py_compare(a, b, "==", depth) == 0;
        return as_double(a) == as_double(b);
    }
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<None>(a)) return true;
    if (auto* s = std::get_if<std::string>(&a)) return *s == std::get<std::string>(b);
    auto seq_equal = [depth](const std::vector<Value>& x, const std::vector<Value>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!py_equal(x[i], y[i], depth + 1)) return false;
        return true;
    };
    if (auto* l = std::get_if<ListObj*>(&a)) return *l == std::get<ListObj*>(b) || seq_equal((*l)->items, std::get<ListObj*>(b)->items);
    if (auto* t = std::get_if<TupleObj*>(&a)) return seq_equal((*t)->items, std::get<TupleObj*>(b)->items);
    if (auto* d = std::get_if<DictObj*>(&a)) {
        const DictObj* other = std::get<DictObj*>(b);
        if (*d == other) return true;
        if ((*d)->items.size() != other->items.size()) return false;
        for (const auto& [k, v] : (*d)->items) {
            bool found = false;
            for (const auto& [k2, v2] : other->items) {
                if (py_equal(k, k2, depth + 1)) {
                    if (!py_equal(v, v2, depth + 1)) return false;
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        return true;
    }
    if (auto* r = std::get_if<RangeObj*>(&a)) {
        const RangeObj* o = std::get<RangeObj*>(b);
        const auto n = (*r)->size();
        if (n != o->size()) return false;
        if (n == 0) return true;
        if ((*r)->start != o->start) return false;
        return n == 1 || (*r)->step == o->step;
    }
    if (auto* p = std::get_if<PatchObj*>(&a)) return *p == std::get<PatchObj*>(b);
    return std::get<FuncObj*>(a) == std::get<FuncObj*>(b);
}

int py_compare(const Value& a, const Value& b, const std::string& op, int depth) {
    check_depth(depth);
    if (is_number(a) && is_number(b)) {
        if (!std::holds_alternative<double>(a) && !std::holds_alternative<double>(b)) {
            auto as_int = [](const Value& v) {
                return std::holds_alternative<std::int64_t>(v) ? std::get<std::int64_t>(v)
                                                                : static_cast<std::int64_t>(std::get<bool>(v));
            };
            const auto x = as_int(a), y = as_int(b);
            return x < y ? -1 : (x > y ? 1 : 0);
        }
        const double x = as_double(a), y = as_double(b);
        if (std::isnan(x) || std::isnan(y)) return 2;
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
        const int c = std::get<std::string>(a).compare(std::get<std::string>(b));
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    auto seq_compare = [&](const std::vector<Value>& x, const std::vector<Value>& y) {
        const std::size_t n = std::min(x.size(), y.size());
        for (std::size_t i = 0; i < n; ++i)
            if (!py_equal(x[i], y[i], depth + 1)) return py_compare(x[i], y[i], op, depth + 1);
        return x.size() < y.size() ? -1 : (x.size() > y.size() ? 1 : 0);
    };
    if (std::holds_alternative<ListObj*>(a) && std::holds_alternative<ListObj*>(b))
        return seq_compare(std::get<ListObj*>(a)->items, std::get<ListObj*>(b)->items);
    if (std::holds_alternative<TupleObj*>(a) && std::holds_alternative<TupleObj*>(b))
        return seq_compare(std::get<TupleObj*>(a)->items, std::get<TupleObj*>(b)->items);
    raise(ErrorLabel::TypeError, "'" + op + "' not supported between instances of '" + type_name(a) + "' and '" +
                                     type_name(b) + "'");
}

bool is_hashable(const Value& v) {
    if (std::holds_alternative<ListObj*>(v) || std::holds_alternative<DictObj*>(v)) return false;
    if (auto* t = std::get_if<TupleObj*>(&v)) {
        for (const auto& item : (*t)->items)
            if (!is_hashable(item)) return false;
    }
    return true;
}

namespace {

struct FormatSpec {
    char fill = ' ';
    char align = 0;
    char sign = '-';
    bool grouping = false;
    std::size_t width = 0;
    std::optional<int> precision;
    char type = 0;
};

FormatSpec parse_spec(const std::string& spec) {
    FormatSpec fs;
    std::size_t i = 0;
    auto is_align = [](char c) { return c == '<' || c == '>' || c == '^' || c == '='; };
    if (spec.size() >= 2 && is_align(spec[1])) {
        fs.fill = spec[0];
        fs.align = spec[1];
        i = 2;
    } else if (!spec.empty() && is_align(spec[0])) {
        fs.align = spec[0];
        i = 1;
    }
    if (i < spec.size() && (spec[i] == '+' || spec[i] == '-' || spec[i] == ' ')) fs.sign = spec[i++];
    if (i < spec.size() && spec[i] == '0') {
        if (!fs.align) {
            fs.fill = '0';
            fs.align = '=';
        }
        ++i;
    }
    std::size_t width = 0;
    while (i < spec.size() && std::isdigit(static_cast<unsigned char>(spec[i]))) {
        width = width * 10 + static_cast<std::size_t>(spec[i++] - '0');
        if (width > 10000) raise(ErrorLabel::ValueError, "Too many decimal digits in format string");
    }
    fs.width = width;
    if (i < spec.size() && spec[i] == ',') {
        fs.grouping = true;
        ++i;
    }
    if (i < spec.size() && spec[i] == '.') {
        ++i;
        int p = 0;
        bool any = false;
        while (i < spec.size() && std::isdigit(static_cast<unsigned char>(spec[i]))) {
            p = p * 10 + (spec[i++] - '0');
            any = true;
            if (p > 1000) raise(ErrorLabel::ValueError, "Too many decimal digits in format string");
        }
        if (!any) raise(ErrorLabel::ValueError, "Format specifier missing precision");
        fs.precision = p;
    }
    if (i < spec.size()) fs.type = spec[i++];
    if (i != spec.size()) raise(ErrorLabel::ValueError, "Invalid format specifier");
    return fs;
}

std::string group_thousands(const std::string& digits) {
    const auto dot = digits.find_first_of(".eE");
    std::string int_part = digits.substr(0, dot);
    const std::string rest = dot == std::string::npos ? "" : digits.substr(dot);
    std::string out;
    int count = 0;
    for (auto it = int_part.rbegin(); it != int_part.rend(); ++it) {
        if (count && count % 3 == 0) out.insert(out.begin(), ',');
        out.insert(out.begin(), *it);
        ++count;
    }
    return out + rest;
}

std::string printf_double(const char* fmt, int precision, double d) {
    char buf[1600];
    std::snprintf(buf, sizeof buf, fmt, precision, d);
    return buf;
}

std::string pad(const std::string& body, const std::string& sign, const FormatSpec& fs, char default_align) {
    const std::size_t len = body.size() + sign.size();
    if (fs.width <= len) return sign + body;
    const std::size_t n = fs.width - len;
    const char align = fs.align ? fs.align : default_align;
    switch (align) {
        case '<': return sign + body + std::string(n, fs.fill);
        case '^': return std::string(n / 2, fs.fill) + sign + body + std::string(n - n / 2, fs.fill);
        case '=': return sign + std::string(n, fs.fill) + body;
        default: return std::string(n, fs.fill) + sign + body;
    }
}

}  // namespace

std::string format_value(const Value& v, const std::string& spec) {
    if (spec.empty()) return py_str(v);
    const FormatSpec fs = parse_spec(spec);
    if (auto* s = std::get_if<std::string>(&v)) {
        if (fs.type && fs.type != 's')
            raise(ErrorLabel::ValueError, std::string("Unknown format code '") + fs.type + "' for object of type 'str'");
        if (fs.sign != '-') raise(ErrorLabel::ValueError, "Sign not allowed in string format specifier");
        std::string body = *s;
        if (fs.precision && body.size() > static_cast<std::size_t>(*fs.precision)) body.resize(*fs.precision);
        return pad(body, "", fs, '<');
    }
    if (!is_number(v)) raise(ErrorLabel::TypeError, "unsupported format string passed to " + type_name(v) + ".__format__");

    const bool integral = !std::holds_alternative<double>(v);
    std::string body;
    bool negative = false;
    char type = fs.type;
    if (type == 0 && integral && !fs.precision) type = 'd';
    if (type == 'd') {
        if (!integral)
            raise(ErrorLabel::ValueError, "Unknown format code 'd' for object of type 'float'");
        const std::int64_t i = std::holds_alternative<bool>(v) ? std::get<bool>(v) : std::get<std::int64_t>(v);
        negative = i < 0;
        body = std::to_string(i);
        if (negative) body.erase(0, 1);
    } else {
        double d = as_double(v);
        negative = std::signbit(d) && !std::isnan(d);
        d = std::fabs(d);
        const int p = fs.precision.value_or(6);
        switch (type) {
            case 'f':
            case 'F': body = printf_double("%.*f", p, d); break;
            case 'e': body = printf_double("%.*e", p, d); break;
            case 'E': body = printf_double("%.*E", p, d); break;
            case 'g': body = printf_double("%.*g", p, d); break;
            case 'G': body = printf_double("%.*G", p, d); break;
            case '%': body = printf_double("%.*f", p, d * 100) + "%"; break;
            case 0:
                body = fs.precision ? printf_double("%.*g", std::max(1, p), d) : float_repr(d);
                break;
            default:
                raise(ErrorLabel::ValueError, std::string("Unknown format code '") + type + "' for object of type '" +
                                                  type_name(v) + "'");
        }
    }
    if (fs.grouping) body = group_thousands(body);
    std::string sign;
    if (negative) sign = "-";
    else if (fs.sign == '+') sign = "+";
    else if (fs.sign == ' ') sign = " ";
    return pad(body, sign, fs, '>');
}

std::string percent_format(const std::string& fmt, const Value& args) {
    std::vector<Value> items;
    if (auto* t = std::get_if<TupleObj*>(&args)) items = (*t)->items;
    else items.push_back(args);
    std::size_t next = 0;
    std::string out;
    for (std::size_t i = 0; i < fmt.size(); ++i) {
        if (fmt[i] != '%') {
            out += fmt[i];
            continue;
        }
        if (++i >= fmt.size()) raise(ErrorLabel::ValueError, "incomplete format");
        std::string spec;
        while (i < fmt.size() && (std::isdigit(static_cast<unsigned char>(fmt[i])) || fmt[i] == '.' || fmt[i] == '-' ||
                                  fmt[i] == '+' || fmt[i] == ' '))
            spec += fmt[i++];
        if (i >= fmt.size()) raise(ErrorLabel::ValueError, "incomplete format");
        const char conv = fmt[i];
        if (conv == '%') {
            out += '%';
            continue;
        }
        if (next >= items.size()) raise(ErrorLabel::TypeError, "not enough arguments for format string");
        const Value& arg = items[next++];
        std::string align;
        if (!spec.empty() && spec[0] == '-') {
            align = "<";
            spec.erase(0, 1);
        }
        switch (conv) {
            case 's': out += format_value(py_str(arg), align + spec); break;
            case 'r': out += format_value(py_repr(arg), align + spec); break;
            case 'd':
            case 'i':
                if (!is_number(arg)) raise(ErrorLabel::TypeError, "%d format: a real number is required, not " + type_name(arg));
                out += format_value(static_cast<std::int64_t>(std::trunc(as_double(arg))), align + spec + "d");
                break;
            case 'f':
            case 'F':
            case 'e':
            case 'g':
                if (!is_number(arg)) raise(ErrorLabel::TypeError, "must be real number, not " + type_name(arg));
                out += format_value(as_double(arg), align + (spec.find('.') == std::string::npos && conv != 'g'
                                                                 ? spec + ".6"
                                                                 : spec) +
                                                        conv);
                break;
            default:
                raise(ErrorLabel::ValueError, std::string("unsupported format character '") + conv + "'");
        }
    }
    if (next < items.size()) raise(ErrorLabel::TypeError, "not all arguments converted during string formatting");
    return out;
}

}  // namespace vqd::program::detail
