#pragma once

// Forward-mode automatic differentiation over a runtime number of active
// variables.
//
//   Dual   carries a value and the gradient.
//   Dual2  carries a value, the gradient and the dense symmetric Hessian.
//
// An empty derivative vector stands for "identically zero", so constants
// never allocate.  Operands with and without derivative storage mix freely.

#include <cmath>
#include <cstddef>
#include <vector>

namespace canonoid {

namespace detail {

// out += a * x, growing `out` from empty when needed.
inline void axpy(std::vector<double>& out, double a, const std::vector<double>& x) {
    if (x.empty() || a == 0.0) return;
    if (out.empty()) out.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += a * x[i];
}

inline std::vector<double> scaled(double a, const std::vector<double>& x) {
    std::vector<double> out;
    axpy(out, a, x);
    return out;
}

// out += a * (x y^T + y x^T), with out an n*n row-major matrix.
inline void add_sym_outer(std::vector<double>& out, double a, const std::vector<double>& x,
                          const std::vector<double>& y) {
    if (x.empty() || y.empty() || a == 0.0) return;
    const std::size_t n = x.size();
    if (out.empty()) out.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += a * (x[i] * y[j] + y[i] * x[j]);
}

}  // namespace detail

struct Dual {
    double v = 0.0;
    std::vector<double> d;

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: constants promote implicitly
    Dual(double value, std::vector<double> grad) : v(value), d(std::move(grad)) {}

    /// Independent variable `index` out of `count`, seeded with a unit tangent.
    static Dual variable(double value, std::size_t index, std::size_t count) {
        std::vector<double> g(count, 0.0);
        g[index] = 1.0;
        return {value, std::move(g)};
    }

    double partial(std::size_t i) const { return d.empty() ? 0.0 : d[i]; }
};

struct Dual2 {
    double v = 0.0;
    std::vector<double> g;  // gradient
    std::vector<double> h;  // Hessian, row-major n*n

    Dual2() = default;
    Dual2(double value) : v(value) {}  // NOLINT
    Dual2(double value, std::vector<double> grad, std::vector<double> hess)
        : v(value), g(std::move(grad)), h(std::move(hess)) {}

    static Dual2 variable(double value, std::size_t index, std::size_t count) {
        std::vector<double> grad(count, 0.0);
        grad[index] = 1.0;
        return {value, std::move(grad), {}};
    }

    double partial(std::size_t i) const { return g.empty() ? 0.0 : g[i]; }
    double second(std::size_t i, std::size_t j) const {
        return h.empty() ? 0.0 : h[i * g.size() + j];
    }
};

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }
inline double value_of(const Dual2& x) { return x.v; }

// ---------------------------------------------------------------- Dual

inline Dual operator-(const Dual& a) { return {-a.v, detail::scaled(-1.0, a.d)}; }

inline Dual operator+(const Dual& a, const Dual& b) {
    Dual r{a.v + b.v, a.d};
    detail::axpy(r.d, 1.0, b.d);
    return r;
}

inline Dual operator-(const Dual& a, const Dual& b) {
    Dual r{a.v - b.v, a.d};
    detail::axpy(r.d, -1.0, b.d);
    return r;
}

inline Dual operator*(const Dual& a, const Dual& b) {
    Dual r{a.v * b.v, {}};
    detail::axpy(r.d, b.v, a.d);
    detail::axpy(r.d, a.v, b.d);
    return r;
}

/// Chain rule for a scalar function with value f and derivative f1 at u.
inline Dual chain(const Dual& u, double f, double f1) { return {f, detail::scaled(f1, u.d)}; }

inline Dual operator/(const Dual& a, const Dual& b) {
    const double inv = 1.0 / b.v;
    return a * chain(b, inv, -inv * inv);
}

inline Dual& operator+=(Dual& a, const Dual& b) {
    a.v += b.v;
    detail::axpy(a.d, 1.0, b.d);
    return a;
}
inline Dual& operator-=(Dual& a, const Dual& b) {
    a.v -= b.v;
    detail::axpy(a.d, -1.0, b.d);
    return a;
}
inline Dual& operator*=(Dual& a, const Dual& b) { return a = a * b; }

inline Dual sin(const Dual& u) { return chain(u, std::sin(u.v), std::cos(u.v)); }
inline Dual cos(const Dual& u) { return chain(u, std::cos(u.v), -std::sin(u.v)); }
inline Dual tan(const Dual& u) {
    const double t = std::tan(u.v);
    return chain(u, t, 1.0 + t * t);
}
inline Dual exp(const Dual& u) {
    const double e = std::exp(u.v);
    return chain(u, e, e);
}
inline Dual log(const Dual& u) { return chain(u, std::log(u.v), 1.0 / u.v); }
inline Dual sqrt(const Dual& u) {
    const double s = std::sqrt(u.v);
    return chain(u, s, 0.5 / s);
}
inline Dual sinh(const Dual& u) { return chain(u, std::sinh(u.v), std::cosh(u.v)); }
inline Dual cosh(const Dual& u) { return chain(u, std::cosh(u.v), std::sinh(u.v)); }

/// u^c for a constant exponent c.
inline Dual pow(const Dual& u, double c) {
    if (c == 0.0) return Dual(1.0);
    return chain(u, std::pow(u.v, c), c * std::pow(u.v, c - 1.0));
}

/// u^w = exp(w log u); requires u > 0.
inline Dual pow(const Dual& u, const Dual& w) {
    if (w.d.empty()) return pow(u, w.v);
    return exp(w * log(u));
}

// ---------------------------------------------------------------- Dual2

inline Dual2 operator-(const Dual2& a) {
    return {-a.v, detail::scaled(-1.0, a.g), detail::scaled(-1.0, a.h)};
}

inline Dual2 operator+(const Dual2& a, const Dual2& b) {
    Dual2 r{a.v + b.v, a.g, a.h};
    detail::axpy(r.g, 1.0, b.g);
    detail::axpy(r.h, 1.0, b.h);
    return r;
}

inline Dual2 operator-(const Dual2& a, const Dual2& b) {
    Dual2 r{a.v - b.v, a.g, a.h};
    detail::axpy(r.g, -1.0, b.g);
    detail::axpy(r.h, -1.0, b.h);
    return r;
}

inline Dual2 operator*(const Dual2& a, const Dual2& b) {
    Dual2 r{a.v * b.v, {}, {}};
    detail::axpy(r.g, b.v, a.g);
    detail::axpy(r.g, a.v, b.g);
    detail::axpy(r.h, b.v, a.h);
    detail::axpy(r.h, a.v, b.h);
    detail::add_sym_outer(r.h, 1.0, a.g, b.g);
    return r;
}

/// Second-order chain rule: f(u) with f, f', f'' evaluated at u.
inline Dual2 chain(const Dual2& u, double f, double f1, double f2) {
    Dual2 r{f, detail::scaled(f1, u.g), detail::scaled(f1, u.h)};
    detail::add_sym_outer(r.h, 0.5 * f2, u.g, u.g);
    return r;
}

inline Dual2 operator/(const Dual2& a, const Dual2& b) {
    const double inv = 1.0 / b.v;
    return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Dual2& operator+=(Dual2& a, const Dual2& b) { return a = a + b; }
inline Dual2& operator-=(Dual2& a, const Dual2& b) { return a = a - b; }
inline Dual2& operator*=(Dual2& a, const Dual2& b) { return a = a * b; }

inline Dual2 sin(const Dual2& u) {
    const double s = std::sin(u.v), c = std::cos(u.v);
    return chain(u, s, c, -s);
}
inline Dual2 cos(const Dual2& u) {
    const double s = std::sin(u.v), c = std::cos(u.v);
    return chain(u, c, -s, -c);
}
inline Dual2 tan(const Dual2& u) {
    const double t = std::tan(u.v);
    const double sec2 = 1.0 + t * t;
    return chain(u, t, sec2, 2.0 * t * sec2);
}
inline Dual2 exp(const Dual2& u) {
    const double e = std::exp(u.v);
    return chain(u, e, e, e);
}
inline Dual2 log(const Dual2& u) {
    const double inv = 1.0 / u.v;
    return chain(u, std::log(u.v), inv, -inv * inv);
}
inline Dual2 sqrt(const Dual2& u) {
    const double s = std::sqrt(u.v);
    return chain(u, s, 0.5 / s, -0.25 / (s * u.v));
}
inline Dual2 sinh(const Dual2& u) {
    const double s = std::sinh(u.v), c = std::cosh(u.v);
    return chain(u, s, c, s);
}
inline Dual2 cosh(const Dual2& u) {
    const double s = std::sinh(u.v), c = std::cosh(u.v);
    return chain(u, c, s, c);
}

inline Dual2 pow(const Dual2& u, double c) {
    if (c == 0.0) return Dual2(1.0);
    if (c == 1.0) return u;
    return chain(u, std::pow(u.v, c), c * std::pow(u.v, c - 1.0),
                 c * (c - 1.0) * std::pow(u.v, c - 2.0));
}

inline Dual2 pow(const Dual2& u, const Dual2& w) {
    if (w.g.empty()) return pow(u, w.v);
    return exp(w * log(u));
}

}  // namespace canonoid
