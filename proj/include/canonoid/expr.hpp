#pragma once

// Scalar expressions on a phase-space chart.
//
// Grammar (precedence high to low, ^ right-associative):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | func '(' expr ')' | '(' expr ')'
//
// Variables are resolved against the chart's coordinate names at parse time,
// so evaluation works on a plain array of coordinate values.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canonoid/dual.hpp"
#include "canonoid/errors.hpp"
#include "canonoid/matrix.hpp"

namespace canonoid {

enum class NodeKind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh };

inline const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
        case Func::Sinh: return "sinh";
        case Func::Cosh: return "cosh";
    }
    return "?";
}

struct Node {
    NodeKind kind = NodeKind::Number;
    double number = 0.0;    // Number
    std::size_t var = 0;    // Variable: chart index
    std::string name;       // Variable: chart name
    Func func = Func::Sin;  // Call
    std::shared_ptr<const Node> lhs;  // unary operand / call argument / left operand
    std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

namespace detail {

inline int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Neg: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;
    }
}

inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write(const Node& n, std::string& out);

inline void write_wrapped(const Node& n, bool parens, std::string& out) {
    if (parens) out += '(';
    write(n, out);
    if (parens) out += ')';
}

inline void write(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Number: out += format_number(n.number); return;
        case NodeKind::Variable: out += n.name; return;
        case NodeKind::Neg:
            out += '-';
            write_wrapped(*n.lhs, precedence(*n.lhs) < 3, out);
            return;
        case NodeKind::Call:
            out += func_name(n.func);
            out += '(';
            write(*n.lhs, out);
            out += ')';
            return;
        case NodeKind::Pow:
            write_wrapped(*n.lhs, precedence(*n.lhs) <= 4, out);
            out += '^';
            write_wrapped(*n.rhs, precedence(*n.rhs) < 3, out);
            return;
        default: break;
    }
    const int p = precedence(n);
    write_wrapped(*n.lhs, precedence(*n.lhs) < p, out);
    switch (n.kind) {
        case NodeKind::Add: out += " + "; break;
        case NodeKind::Sub: out += " - "; break;
        case NodeKind::Mul: out += '*'; break;
        case NodeKind::Div: out += '/'; break;
        default: break;
    }
    write_wrapped(*n.rhs, precedence(*n.rhs) <= p, out);
}

}  // namespace detail

/// Canonical text of a tree: minimal parentheses, spaces around + and - only.
inline std::string serialize(const Node& n) {
    std::string out;
    detail::write(n, out);
    return out;
}

inline bool structurally_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Number: return a.number == b.number;
        case NodeKind::Variable: return a.name == b.name && a.var == b.var;
        case NodeKind::Neg: return structurally_equal(*a.lhs, *b.lhs);
        case NodeKind::Call: return a.func == b.func && structurally_equal(*a.lhs, *b.lhs);
        default: return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
}

/// Immutable parsed expression bound to a chart's coordinate names.
class Expression {
public:
    Expression() = default;
    Expression(NodePtr root, std::vector<std::string> chart_vars)
        : root_(std::move(root)), chart_vars_(std::move(chart_vars)) {
        std::vector<bool> used(chart_vars_.size(), false);
        mark(*root_, used);
        for (std::size_t i = 0; i < used.size(); ++i)
            if (used[i]) free_vars_.push_back(chart_vars_[i]);
    }

    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const { return root_; }
    const std::vector<std::string>& chart_vars() const { return chart_vars_; }
    /// Chart variables the expression actually uses, in chart order.
    const std::vector<std::string>& free_vars() const { return free_vars_; }
    std::size_t dimension() const { return chart_vars_.size(); }
    std::string to_string() const { return serialize(*root_); }

private:
    static void mark(const Node& n, std::vector<bool>& used) {
        if (n.kind == NodeKind::Variable) used[n.var] = true;
        if (n.lhs) mark(*n.lhs, used);
        if (n.rhs) mark(*n.rhs, used);
    }

    NodePtr root_;
    std::vector<std::string> chart_vars_;
    std::vector<std::string> free_vars_;
};

inline bool structurally_equal(const Expression& a, const Expression& b) {
    return structurally_equal(a.root(), b.root());
}

namespace detail {

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

    NodePtr parse() {
        skip_space();
        if (pos_ >= src_.size()) throw SyntaxError(pos_, "expected expression, found end of input");
        auto e = expr();
        skip_space();
        if (pos_ < src_.size())
            throw SyntaxError(pos_, std::string("expected operator or end of input, found '") +
                                        src_[pos_] + "'");
        return e;
    }

private:
    static NodePtr make(NodeKind k, NodePtr a, NodePtr b = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::move(a);
        n->rhs = std::move(b);
        return n;
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(NodeKind::Add, lhs, term());
            else if (accept('-')) lhs = make(NodeKind::Sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(NodeKind::Mul, lhs, unary());
            else if (accept('/')) lhs = make(NodeKind::Div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(NodeKind::Neg, unary());
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (accept('^')) return make(NodeKind::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= src_.size()) throw SyntaxError(pos_, "expected operand, found end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = expr();
            if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw SyntaxError(pos_, std::string("expected operand, found '") + c + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                digits();
            else
                pos_ = save;
        }
        double v = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            throw SyntaxError(start, "malformed number");
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Number;
        n->number = v;
        return n;
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name(src_.substr(start, pos_ - start));
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            static const std::map<std::string, Func> funcs = {
                {"sin", Func::Sin},   {"cos", Func::Cos},   {"tan", Func::Tan},
                {"exp", Func::Exp},   {"log", Func::Log},   {"sqrt", Func::Sqrt},
                {"sinh", Func::Sinh}, {"cosh", Func::Cosh}};
            auto it = funcs.find(name);
            if (it == funcs.end()) throw UnknownFunction(name);
            ++pos_;
            auto arg = expr();
            if (!accept(')')) throw SyntaxError(pos_, "expected ')' after argument of " + name);
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Call;
            n->func = it->second;
            n->lhs = std::move(arg);
            return n;
        }
        auto it = std::find(vars_.begin(), vars_.end(), name);
        if (it == vars_.end()) throw UnknownVariable(name);
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Variable;
        n->name = name;
        n->var = static_cast<std::size_t>(it - vars_.begin());
        return n;
    }

    std::string_view src_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

inline bool has_variables(const Node& n) {
    if (n.kind == NodeKind::Variable) return true;
    return (n.lhs && has_variables(*n.lhs)) || (n.rhs && has_variables(*n.rhs));
}

template <class T>
T eval_node(const Node& n, std::span<const T> x);

inline double eval_constant(const Node& n) { return eval_node<double>(n, {}); }

template <class T>
T eval_pow(const Node& n, std::span<const T> x) {
    using std::pow;
    T base = eval_node<T>(*n.lhs, x);
    const double b = value_of(base);
    if (!has_variables(*n.rhs)) {
        const double c = eval_constant(*n.rhs);
        const bool integral = std::isfinite(c) && c == std::floor(c);
        if (b == 0.0 && c < 0.0) throw DomainError("division by zero", serialize(n));
        if (b < 0.0 && !integral)
            throw DomainError("negative base with non-integer exponent", serialize(n));
        return pow(base, c);
    }
    if (b <= 0.0)
        throw DomainError("non-positive base with variable exponent", serialize(n));
    return pow(base, eval_node<T>(*n.rhs, x));
}

template <class T>
T eval_call(const Node& n, std::span<const T> x) {
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sinh;
    using std::sqrt;
    using std::tan;
    T a = eval_node<T>(*n.lhs, x);
    switch (n.func) {
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Tan: return tan(a);
        case Func::Exp: return exp(a);
        case Func::Log:
            if (value_of(a) <= 0.0) throw DomainError("log of non-positive value", serialize(n));
            return log(a);
        case Func::Sqrt:
            if (value_of(a) < 0.0) throw DomainError("sqrt of negative value", serialize(n));
            return sqrt(a);
        case Func::Sinh: return sinh(a);
        case Func::Cosh: return cosh(a);
    }
    return a;
}

template <class T>
T eval_node(const Node& n, std::span<const T> x) {
    switch (n.kind) {
        case NodeKind::Number: return T(n.number);
        case NodeKind::Variable: return x[n.var];
        case NodeKind::Neg: return -eval_node<T>(*n.lhs, x);
        case NodeKind::Add: return eval_node<T>(*n.lhs, x) + eval_node<T>(*n.rhs, x);
        case NodeKind::Sub: return eval_node<T>(*n.lhs, x) - eval_node<T>(*n.rhs, x);
        case NodeKind::Mul: return eval_node<T>(*n.lhs, x) * eval_node<T>(*n.rhs, x);
        case NodeKind::Div: {
            T den = eval_node<T>(*n.rhs, x);
            if (value_of(den) == 0.0) throw DomainError("division by zero", serialize(n));
            return eval_node<T>(*n.lhs, x) / den;
        }
        case NodeKind::Pow: return eval_pow<T>(n, x);
        case NodeKind::Call: return eval_call<T>(n, x);
    }
    return T(0.0);
}

}  // namespace detail

/// Parses `source`; identifiers must name functions or entries of `chart_vars`.
inline Expression parse(std::string_view source, const std::vector<std::string>& chart_vars) {
    for (std::size_t i = 0; i < chart_vars.size(); ++i)
        for (std::size_t j = i + 1; j < chart_vars.size(); ++j)
            if (chart_vars[i] == chart_vars[j])
                throw Error("duplicate chart variable '" + chart_vars[i] + "'");
    detail::Parser p(source, chart_vars);
    return Expression(p.parse(), chart_vars);
}

namespace detail {

inline NodePtr substitute(const NodePtr& n, const std::vector<NodePtr>& replacement) {
    if (n->kind == NodeKind::Variable) return replacement[n->var];
    if (!n->lhs) return n;
    auto out = std::make_shared<Node>(*n);
    out->lhs = substitute(n->lhs, replacement);
    if (n->rhs) out->rhs = substitute(n->rhs, replacement);
    return out;
}

}  // namespace detail

/// Replaces chart variable i of `e` by `replacement[i]` (all over the same chart).
inline Expression substitute(const Expression& e, const std::vector<Expression>& replacement) {
    if (replacement.size() != e.dimension())
        throw DimensionMismatch("substitute: one replacement per chart variable required");
    std::vector<NodePtr> roots;
    roots.reserve(replacement.size());
    for (const auto& r : replacement) roots.push_back(r.root_ptr());
    return Expression(detail::substitute(e.root_ptr(), roots), replacement.front().chart_vars());
}

/// Evaluates at chart coordinates `x` (one entry per chart variable).
template <class T>
T eval(const Expression& e, std::span<const T> x) {
    if (x.size() != e.dimension())
        throw DimensionMismatch("expression over " + std::to_string(e.dimension()) +
                                " chart variables evaluated at a point of size " +
                                std::to_string(x.size()));
    return detail::eval_node<T>(e.root(), x);
}

template <class T>
T eval(const Expression& e, const std::vector<T>& x) {
    return eval<T>(e, std::span<const T>(x));
}

/// Evaluates with named bindings; every free variable must be bound.
template <class T>
T eval(const Expression& e, const std::map<std::string, T>& env) {
    std::vector<T> x(e.dimension(), T(0.0));
    for (std::size_t i = 0; i < e.dimension(); ++i) {
        auto it = env.find(e.chart_vars()[i]);
        if (it != env.end()) {
            x[i] = it->second;
        } else if (std::find(e.free_vars().begin(), e.free_vars().end(), e.chart_vars()[i]) !=
                   e.free_vars().end()) {
            throw UnknownVariable(e.chart_vars()[i]);
        }
    }
    return eval<T>(e, std::span<const T>(x));
}

/// Seeds every coordinate of `point` as an independent AD variable.
template <class T>
std::vector<T> seed(std::span<const double> point) {
    std::vector<T> x;
    x.reserve(point.size());
    for (std::size_t i = 0; i < point.size(); ++i)
        x.push_back(T::variable(point[i], i, point.size()));
    return x;
}

inline Dual eval_dual(const Expression& e, std::span<const double> point) {
    const auto x = seed<Dual>(point);
    return eval<Dual>(e, std::span<const Dual>(x));
}

inline Dual2 eval_dual2(const Expression& e, std::span<const double> point) {
    const auto x = seed<Dual2>(point);
    return eval<Dual2>(e, std::span<const Dual2>(x));
}

/// Partial derivatives with respect to every chart variable (zero for absent ones).
inline std::vector<double> gradient(const Expression& e, std::span<const double> point) {
    if (point.size() != e.dimension())
        throw DimensionMismatch("gradient: point has wrong dimension");
    const Dual r = eval_dual(e, point);
    std::vector<double> g(point.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = r.partial(i);
    return g;
}

inline Matrix<double> hessian(const Expression& e, std::span<const double> point) {
    if (point.size() != e.dimension())
        throw DimensionMismatch("hessian: point has wrong dimension");
    const Dual2 r = eval_dual2(e, point);
    const std::size_t n = point.size();
    Matrix<double> h(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h(i, j) = r.second(i, j);
    return h;
}

}  // namespace canonoid
