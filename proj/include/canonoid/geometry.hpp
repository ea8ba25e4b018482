#pragma once

// The four Darboux-coordinate phase spaces and their Hamiltonian machinery.
//
// Coordinate ordering (fixed everywhere in the library):
//
//   Symplectic    (q1..qn, p1..pn)              omega = dq^i ^ dp_i
//   Cosymplectic  (q1..qn, p1..pn, t)           Omega = dq^i ^ dp_i, eta = dt
//   Contact       (q1..qn, p1..pn, z)           theta = dz - p_i dq^i
//   Cocontact     (t, q1..qn, p1..pn, z)        theta = dz - p_i dq^i, eta = dt
//
// Two-forms are stored as matrices with w(e_a, e_b) = W(a, b), using
// (dq ^ dp)(X, Y) = dq(X) dp(Y) - dq(Y) dp(X).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canonoid/dual.hpp"
#include "canonoid/errors.hpp"
#include "canonoid/expr.hpp"
#include "canonoid/matrix.hpp"

namespace canonoid {

enum class Kind { Symplectic, Cosymplectic, Contact, Cocontact };

inline const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Symplectic: return "symplectic";
        case Kind::Cosymplectic: return "cosymplectic";
        case Kind::Contact: return "contact";
        case Kind::Cocontact: return "cocontact";
    }
    return "?";
}

inline std::optional<Kind> kind_from_name(const std::string& s) {
    if (s == "symplectic") return Kind::Symplectic;
    if (s == "cosymplectic") return Kind::Cosymplectic;
    if (s == "contact") return Kind::Contact;
    if (s == "cocontact") return Kind::Cocontact;
    return std::nullopt;
}

/// Which phase space, with n degrees of freedom, and its coordinate layout.
struct GeometryKind {
    Kind kind = Kind::Symplectic;
    std::size_t n = 1;

    bool has_time() const { return kind == Kind::Cosymplectic || kind == Kind::Cocontact; }
    bool has_z() const { return kind == Kind::Contact || kind == Kind::Cocontact; }
    bool is_poisson() const { return kind == Kind::Symplectic || kind == Kind::Cosymplectic; }

    std::size_t dimension() const { return 2 * n + (has_time() ? 1 : 0) + (has_z() ? 1 : 0); }

    std::size_t q(std::size_t i) const { return (kind == Kind::Cocontact ? 1 : 0) + i; }
    std::size_t p(std::size_t i) const { return q(0) + n + i; }
    std::size_t t() const {
        if (kind == Kind::Cosymplectic) return 2 * n;
        if (kind == Kind::Cocontact) return 0;
        throw WrongGeometry(std::string(kind_name(kind)) + " chart has no t coordinate");
    }
    std::size_t z() const {
        if (has_z()) return dimension() - 1;
        throw WrongGeometry(std::string(kind_name(kind)) + " chart has no z coordinate");
    }

    /// Chart index of the a-th x-block coordinate, x = (q1..qn, p1..pn).
    std::size_t x(std::size_t a) const { return a < n ? q(a) : p(a - n); }
    std::vector<std::size_t> x_block() const {
        std::vector<std::size_t> idx(2 * n);
        for (std::size_t a = 0; a < 2 * n; ++a) idx[a] = x(a);
        return idx;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out(dimension());
        for (std::size_t i = 0; i < n; ++i) {
            out[q(i)] = "q" + std::to_string(i + 1);
            out[p(i)] = "p" + std::to_string(i + 1);
        }
        if (has_time()) out[t()] = "t";
        if (has_z()) out[z()] = "z";
        return out;
    }

    friend bool operator==(const GeometryKind&, const GeometryKind&) = default;
};

/// Canonical symplectic matrix eps = [[0, I], [-I, 0]] on the x-block.
inline Matrix<double> epsilon(std::size_t n) {
    Matrix<double> e(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        e(i, n + i) = 1.0;
        e(n + i, i) = -1.0;
    }
    return e;
}

/// Its inverse [[0, -I], [I, 0]] (components of the Poisson tensor).
inline Matrix<double> epsilon_inverse(std::size_t n) {
    Matrix<double> e(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        e(i, n + i) = -1.0;
        e(n + i, i) = 1.0;
    }
    return e;
}

/// The structure tensors at a point, in Darboux form.
struct StructureAtPoint {
    Matrix<double> two_form;            // omega, Omega or d theta
    std::optional<std::vector<double>> theta;
    std::optional<std::vector<double>> eta;
    std::optional<std::vector<double>> reeb;    // R (cosymplectic, contact) or R_z (cocontact)
    std::optional<std::vector<double>> reeb_t;  // R_t (cocontact)
};

inline StructureAtPoint structure_at(const GeometryKind& g, std::span<const double> x) {
    const std::size_t d = g.dimension();
    if (x.size() != d) throw DimensionMismatch("structure_at: point has wrong dimension");
    StructureAtPoint s;
    s.two_form = Matrix<double>(d, d);
    for (std::size_t i = 0; i < g.n; ++i) {
        s.two_form(g.q(i), g.p(i)) = 1.0;
        s.two_form(g.p(i), g.q(i)) = -1.0;
    }
    auto unit = [d](std::size_t k) {
        std::vector<double> v(d, 0.0);
        v[k] = 1.0;
        return v;
    };
    if (g.has_z()) {
        std::vector<double> theta(d, 0.0);
        theta[g.z()] = 1.0;
        for (std::size_t i = 0; i < g.n; ++i) theta[g.q(i)] = -x[g.p(i)];
        s.theta = std::move(theta);
        s.reeb = unit(g.z());
    }
    if (g.has_time()) {
        s.eta = unit(g.t());
        if (g.kind == Kind::Cosymplectic) s.reeb = unit(g.t());
        else s.reeb_t = unit(g.t());
    }
    return s;
}

/// Contraction of a vector into a two-form: (V -| W)_b = V^a W(a, b).
inline std::vector<double> contract(std::span<const double> v, const Matrix<double>& w) {
    std::vector<double> out(w.cols(), 0.0);
    for (std::size_t a = 0; a < w.rows(); ++a)
        for (std::size_t b = 0; b < w.cols(); ++b) out[b] += v[a] * w(a, b);
    return out;
}

inline double pair(std::span<const double> form, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < form.size(); ++i) s += form[i] * v[i];
    return s;
}

// ------------------------------------------------------------------ fields

/// X_H in Darboux components from H, dH and the point, over any scalar type.
template <class T>
std::vector<T> hamiltonian_field(const GeometryKind& g, const T& h, const std::vector<T>& dh,
                                 std::span<const T> x) {
    std::vector<T> v(g.dimension(), T(0.0));
    for (std::size_t i = 0; i < g.n; ++i) {
        v[g.q(i)] = dh[g.p(i)];
        v[g.p(i)] = -dh[g.q(i)];
    }
    if (g.has_z()) {
        const std::size_t z = g.z();
        T zdot = -h;
        for (std::size_t i = 0; i < g.n; ++i) {
            v[g.p(i)] -= x[g.p(i)] * dh[z];
            zdot += x[g.p(i)] * dh[g.p(i)];
        }
        v[z] = zdot;
    }
    return v;
}

/// E_H = X_H + R_t for time-dependent kinds, X_H otherwise.
template <class T>
std::vector<T> dynamical_field(const GeometryKind& g, const T& h, const std::vector<T>& dh,
                               std::span<const T> x) {
    auto v = hamiltonian_field<T>(g, h, dh, x);
    if (g.has_time()) v[g.t()] = T(1.0);
    return v;
}

namespace detail {

inline void check_dims(const GeometryKind& g, const Expression& e, std::span<const double> x,
                       const char* op) {
    if (e.dimension() != g.dimension() || x.size() != g.dimension())
        throw DimensionMismatch(std::string(op) + ": expected chart dimension " +
                                std::to_string(g.dimension()));
}

}  // namespace detail

/// Value and gradient of `e` at `x`, as doubles.
struct ValueGradient {
    double value = 0.0;
    std::vector<double> grad;
};

inline ValueGradient value_gradient(const Expression& e, std::span<const double> x) {
    const Dual r = eval_dual(e, x);
    ValueGradient out{r.v, std::vector<double>(x.size(), 0.0)};
    for (std::size_t i = 0; i < x.size(); ++i) out.grad[i] = r.partial(i);
    return out;
}

/// Value and gradient of `e` as first-order duals, from one second-order pass.
struct DualValueGradient {
    Dual value;
    std::vector<Dual> grad;
};

inline DualValueGradient dual_value_gradient(const Expression& e, std::span<const double> x) {
    const Dual2 r = eval_dual2(e, x);
    const std::size_t d = x.size();
    DualValueGradient out;
    out.value = Dual(r.v, r.g.empty() ? std::vector<double>(d, 0.0) : r.g);
    out.grad.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> row(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) row[j] = r.second(i, j);
        out.grad.emplace_back(r.partial(i), std::move(row));
    }
    return out;
}

inline std::vector<double> hamiltonian_vf(const GeometryKind& g, const Expression& h,
                                          std::span<const double> x) {
    detail::check_dims(g, h, x, "hamiltonian_vf");
    const auto vg = value_gradient(h, x);
    return hamiltonian_field<double>(g, vg.value, vg.grad, x);
}

inline std::vector<double> evolution_vf(const GeometryKind& g, const Expression& h,
                                        std::span<const double> x) {
    detail::check_dims(g, h, x, "evolution_vf");
    const auto vg = value_gradient(h, x);
    return dynamical_field<double>(g, vg.value, vg.grad, x);
}

/// The dynamical field (X_H or E_H) with its first derivatives carried as duals.
inline std::vector<Dual> dynamical_field_dual(const GeometryKind& g, const Expression& h,
                                              std::span<const double> x) {
    detail::check_dims(g, h, x, "dynamical_field_dual");
    const auto vg = dual_value_gradient(h, x);
    const auto xs = seed<Dual>(x);
    return dynamical_field<Dual>(g, vg.value, vg.grad, std::span<const Dual>(xs));
}

// ---------------------------------------------------------------- brackets

/// {f, h} = df/dq dh/dp - df/dp dh/dq summed over the n pairs.
template <class T>
T poisson_from_gradients(const GeometryKind& g, const std::vector<T>& df, const std::vector<T>& dh) {
    T s(0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        s += df[g.q(i)] * dh[g.p(i)];
        s -= df[g.p(i)] * dh[g.q(i)];
    }
    return s;
}

/// Jacobi bracket of a contact chart from values, gradients and the point.
template <class T>
T jacobi_from_gradients(const GeometryKind& g, const T& f, const std::vector<T>& df, const T& h,
                        const std::vector<T>& dh, std::span<const T> x) {
    T s = poisson_from_gradients<T>(g, df, dh);
    const std::size_t z = g.z();
    T ph = -h;
    T pf = -f;
    for (std::size_t i = 0; i < g.n; ++i) {
        ph += x[g.p(i)] * dh[g.p(i)];
        pf += x[g.p(i)] * df[g.p(i)];
    }
    s += df[z] * ph;
    s -= dh[z] * pf;
    return s;
}

inline double poisson_bracket(const GeometryKind& g, const Expression& f, const Expression& h,
                              std::span<const double> x) {
    if (!g.is_poisson())
        throw WrongGeometry(std::string("poisson_bracket on a ") + kind_name(g.kind) + " chart");
    detail::check_dims(g, f, x, "poisson_bracket");
    detail::check_dims(g, h, x, "poisson_bracket");
    return poisson_from_gradients<double>(g, gradient(f, x), gradient(h, x));
}

inline double jacobi_bracket(const GeometryKind& g, const Expression& f, const Expression& h,
                             std::span<const double> x) {
    if (g.is_poisson())
        throw WrongGeometry(std::string("jacobi_bracket on a ") + kind_name(g.kind) + " chart");
    detail::check_dims(g, f, x, "jacobi_bracket");
    detail::check_dims(g, h, x, "jacobi_bracket");
    const auto vf = value_gradient(f, x);
    const auto vh = value_gradient(h, x);
    return jacobi_from_gradients<double>(g, vf.value, vf.grad, vh.value, vh.grad, x);
}

}  // namespace canonoid
