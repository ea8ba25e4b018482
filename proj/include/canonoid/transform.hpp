#pragma once

// Candidate transformations F: M -> M, Lagrange brackets, pullbacks of the
// structure forms, and the canonical / canonoid decisions.
//
// Lagrange bracket over the full coordinate list:
//
//   [x^a, x^b] = sum_i dQ^i/dx^a dP_i/dx^b - dQ^i/dx^b dP_i/dx^a
//
// which are the components of the pulled-back two-form dQ^i ^ dP_i.  T and Z
// components never enter the brackets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canonoid/dual.hpp"
#include "canonoid/errors.hpp"
#include "canonoid/expr.hpp"
#include "canonoid/geometry.hpp"
#include "canonoid/matrix.hpp"
#include "canonoid/quadrature.hpp"

namespace canonoid {

inline constexpr double kDefaultTolerance = 1e-8;

class TransformMap {
public:
    /// One component per target coordinate, in chart order.
    TransformMap(GeometryKind g, std::vector<Expression> components)
        : geometry_(g), components_(std::move(components)) {
        if (components_.size() != g.dimension())
            throw InvalidTransform("transform needs " + std::to_string(g.dimension()) +
                                   " components, got " + std::to_string(components_.size()));
        const auto names = g.names();
        for (const auto& c : components_)
            if (c.chart_vars() != names)
                throw InvalidTransform("transform component not expressed over the " +
                                       std::string(kind_name(g.kind)) + " chart");
        if (g.has_time()) {
            const Node& tn = components_[g.t()].root();
            if (tn.kind != NodeKind::Variable || tn.name != "t")
                throw InvalidTransform("time component must be exactly 't' (T = t), got '" +
                                       components_[g.t()].to_string() + "'");
        }
    }

    /// Parses components given in chart order.
    static TransformMap parse(GeometryKind g, const std::vector<std::string>& sources) {
        const auto names = g.names();
        std::vector<Expression> comps;
        comps.reserve(sources.size());
        for (const auto& s : sources) comps.push_back(canonoid::parse(s, names));
        return TransformMap(g, std::move(comps));
    }

    /// Parses components keyed by coordinate name; every name must be present.
    static TransformMap parse(GeometryKind g, const std::map<std::string, std::string>& by_name) {
        const auto names = g.names();
        std::vector<std::string> sources;
        for (const auto& nm : names) {
            auto it = by_name.find(nm);
            if (it == by_name.end()) throw InvalidTransform("transform is missing component '" + nm + "'");
            sources.push_back(it->second);
        }
        if (by_name.size() != names.size())
            throw InvalidTransform("transform has components outside the chart layout");
        return parse(g, sources);
    }

    static TransformMap identity(GeometryKind g) {
        const auto names = g.names();
        return parse(g, names);
    }

    const GeometryKind& geometry() const { return geometry_; }
    const std::vector<Expression>& components() const { return components_; }
    const Expression& component(std::size_t i) const { return components_[i]; }

private:
    GeometryKind geometry_;
    std::vector<Expression> components_;
};

/// F o G.
inline TransformMap compose(const TransformMap& f, const TransformMap& g) {
    if (!(f.geometry() == g.geometry())) throw WrongGeometry("compose: geometries differ");
    std::vector<Expression> comps;
    for (const auto& c : f.components()) comps.push_back(substitute(c, g.components()));
    return TransformMap(f.geometry(), std::move(comps));
}

/// Component values and Jacobian at a point.  With T = Dual the entries also
/// carry their first derivatives (second derivatives of F).
template <class T>
struct MapJet {
    std::vector<T> values;
    Matrix<T> jac;  // row = target coordinate, column = source coordinate
};

namespace detail {

inline void check_point(const TransformMap& f, std::span<const double> x) {
    if (x.size() != f.geometry().dimension())
        throw DimensionMismatch("point has dimension " + std::to_string(x.size()) + ", chart has " +
                                std::to_string(f.geometry().dimension()));
}

inline void check_jacobian(const Matrix<double>& j, std::span<const double> x) {
    const double det = determinant(j);
    if (det == 0.0 || !std::isfinite(det)) {
        std::string at;
        for (double v : x) at += (at.empty() ? "" : ", ") + detail::format_number(v);
        throw SingularJacobian("transform Jacobian is singular at (" + at + ")");
    }
}

}  // namespace detail

inline MapJet<double> evaluate_first(const TransformMap& f, std::span<const double> x) {
    detail::check_point(f, x);
    const std::size_t d = x.size();
    MapJet<double> out{std::vector<double>(d), Matrix<double>(d, d)};
    const auto xs = seed<Dual>(x);
    for (std::size_t r = 0; r < d; ++r) {
        const Dual c = eval<Dual>(f.component(r), std::span<const Dual>(xs));
        out.values[r] = c.v;
        for (std::size_t k = 0; k < d; ++k) out.jac(r, k) = c.partial(k);
    }
    detail::check_jacobian(out.jac, x);
    return out;
}

inline MapJet<Dual> evaluate_second(const TransformMap& f, std::span<const double> x) {
    detail::check_point(f, x);
    const std::size_t d = x.size();
    MapJet<Dual> out{std::vector<Dual>(d), Matrix<Dual>(d, d)};
    const auto xs = seed<Dual2>(x);
    Matrix<double> jv(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        const Dual2 c = eval<Dual2>(f.component(r), std::span<const Dual2>(xs));
        std::vector<double> g(d, 0.0);
        for (std::size_t k = 0; k < d; ++k) g[k] = c.partial(k);
        out.values[r] = Dual(c.v, g);
        for (std::size_t k = 0; k < d; ++k) {
            std::vector<double> row(d, 0.0);
            for (std::size_t m = 0; m < d; ++m) row[m] = c.second(k, m);
            out.jac(r, k) = Dual(g[k], std::move(row));
            jv(r, k) = g[k];
        }
    }
    detail::check_jacobian(jv, x);
    return out;
}

inline Matrix<double> jacobian(const TransformMap& f, std::span<const double> x) {
    return evaluate_first(f, x).jac;
}

/// Lagrange bracket matrix from a Jacobian; antisymmetric by construction.
template <class T>
Matrix<T> lagrange_from_jacobian(const GeometryKind& g, const Matrix<T>& jac) {
    const std::size_t d = g.dimension();
    Matrix<T> l(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a + 1; b < d; ++b) {
            T s(0.0);
            for (std::size_t i = 0; i < g.n; ++i) {
                s += jac(g.q(i), a) * jac(g.p(i), b);
                s -= jac(g.q(i), b) * jac(g.p(i), a);
            }
            l(b, a) = -s;
            l(a, b) = std::move(s);
        }
    return l;
}

/// Components of the pulled-back contact form: dZ - P_i dQ^i.
template <class T>
std::vector<T> theta_from_jet(const GeometryKind& g, const MapJet<T>& jet) {
    const std::size_t d = g.dimension();
    std::vector<T> th(d);
    for (std::size_t b = 0; b < d; ++b) {
        T s = jet.jac(g.z(), b);
        for (std::size_t i = 0; i < g.n; ++i) s -= jet.values[g.p(i)] * jet.jac(g.q(i), b);
        th[b] = std::move(s);
    }
    return th;
}

/// Pulled-back time form dT.
template <class T>
std::vector<T> eta_from_jet(const GeometryKind& g, const MapJet<T>& jet) {
    std::vector<T> e(g.dimension());
    for (std::size_t b = 0; b < g.dimension(); ++b) e[b] = jet.jac(g.t(), b);
    return e;
}

inline Matrix<double> lagrange_brackets(const TransformMap& f, std::span<const double> x) {
    return lagrange_from_jacobian<double>(f.geometry(), evaluate_first(f, x).jac);
}

// --------------------------------------------------------------- canonical

struct CanonicalVerdict {
    bool canonical = false;
    double max_residual = 0.0;
};

/// Residual of F*omega = omega (and F*eta = eta, F*theta = theta where present).
inline double canonical_residual(const TransformMap& f, std::span<const double> x) {
    const auto& g = f.geometry();
    const auto jet = evaluate_first(f, x);
    const auto s = structure_at(g, x);
    double r = 0.0;
    if (g.has_z()) {
        const auto th = theta_from_jet<double>(g, jet);
        for (std::size_t b = 0; b < th.size(); ++b) r = std::max(r, std::abs(th[b] - (*s.theta)[b]));
    } else {
        r = max_abs_diff(lagrange_from_jacobian<double>(g, jet.jac), s.two_form);
    }
    if (g.has_time()) {
        const auto eta = eta_from_jet<double>(g, jet);
        for (std::size_t b = 0; b < eta.size(); ++b) r = std::max(r, std::abs(eta[b] - (*s.eta)[b]));
    }
    return r;
}

inline CanonicalVerdict check_canonical(const TransformMap& f,
                                        const std::vector<std::vector<double>>& samples,
                                        double tol = kDefaultTolerance) {
    if (samples.empty()) throw Error("check_canonical: no sample points");
    CanonicalVerdict v;
    for (const auto& x : samples) v.max_residual = std::max(v.max_residual, canonical_residual(f, x));
    v.canonical = v.max_residual <= tol;
    return v;
}

// ------------------------------------------------------------ K gradient

/// dK on the x-block, from Lagrange brackets and dH:
///
///   dK/dp_l = [p_l, p_j] dH/dq^j - [p_l, q^j] dH/dp_j
///   dK/dq^l = [q^l, p_j] dH/dq^j - [q^l, q^j] dH/dp_j
///
/// Result is ordered (q1..qn, p1..pn).
template <class T>
std::vector<T> k_gradient_from(const GeometryKind& g, const Matrix<T>& lag, const std::vector<T>& dh) {
    std::vector<T> out(2 * g.n, T(0.0));
    for (std::size_t l = 0; l < g.n; ++l) {
        T dq(0.0), dp(0.0);
        for (std::size_t j = 0; j < g.n; ++j) {
            dq += lag(g.q(l), g.p(j)) * dh[g.q(j)];
            dq -= lag(g.q(l), g.q(j)) * dh[g.p(j)];
            dp += lag(g.p(l), g.p(j)) * dh[g.q(j)];
            dp -= lag(g.p(l), g.q(j)) * dh[g.p(j)];
        }
        out[l] = std::move(dq);
        out[g.n + l] = std::move(dp);
    }
    return out;
}

namespace detail {

inline void require_poisson(const GeometryKind& g, const char* op) {
    if (!g.is_poisson())
        throw WrongGeometry(std::string(op) + ": K is algebraic on " + kind_name(g.kind) +
                            " charts, use recover_K");
}

inline void check_hamiltonian(const TransformMap& f, const Expression& h) {
    if (h.dimension() != f.geometry().dimension())
        throw DimensionMismatch("hamiltonian is not over the transform's chart");
}

}  // namespace detail

/// x-block K covector whose entries carry their derivatives along the chart.
inline std::vector<Dual> k_gradient_dual(const TransformMap& f, const Expression& h,
                                         std::span<const double> x) {
    detail::require_poisson(f.geometry(), "k_gradient_dual");
    detail::check_hamiltonian(f, h);
    const auto jet = evaluate_second(f, x);
    const auto lag = lagrange_from_jacobian<Dual>(f.geometry(), jet.jac);
    const auto dh = dual_value_gradient(h, x).grad;
    return k_gradient_from<Dual>(f.geometry(), lag, dh);
}

inline std::vector<double> k_gradient_values(const TransformMap& f, const Expression& h,
                                             std::span<const double> x) {
    detail::require_poisson(f.geometry(), "k_gradient_values");
    detail::check_hamiltonian(f, h);
    const auto lag = lagrange_from_jacobian<double>(f.geometry(), evaluate_first(f, x).jac);
    return k_gradient_from<double>(f.geometry(), lag, gradient(h, x));
}

/// Largest |d_a k_b - d_b k_a| over the x-block: closedness of X_H -| omega-bar on a slice.
inline double closedness_residual(const GeometryKind& g, const std::vector<Dual>& k) {
    double r = 0.0;
    for (std::size_t a = 0; a < k.size(); ++a)
        for (std::size_t b = a + 1; b < k.size(); ++b)
            r = std::max(r, std::abs(k[a].partial(g.x(b)) - k[b].partial(g.x(a))));
    return r;
}

struct KGradient {
    std::vector<double> x_block;  // (dK/dq1..dK/dqn, dK/dp1..dK/dpn)
    std::optional<double> dt;     // cosymplectic: dK/dt from the closedness completion
};

/// Default base point for the time completion: origin of the x-block, same t.
inline std::vector<double> default_base(const GeometryKind& g, std::span<const double> x) {
    std::vector<double> b(x.begin(), x.end());
    for (std::size_t a = 0; a < 2 * g.n; ++a) b[g.x(a)] = 0.0;
    return b;
}

namespace detail {

/// Straight x-block segment from base to x at the t (and z) of x.
inline std::vector<double> segment_start(const GeometryKind& g, std::span<const double> base,
                                         std::span<const double> x) {
    std::vector<double> s(x.begin(), x.end());
    for (std::size_t a = 0; a < 2 * g.n; ++a) s[g.x(a)] = base[g.x(a)];
    return s;
}

inline std::size_t panel_count(const GeometryKind& g, std::span<const double> a,
                               std::span<const double> b) {
    double len2 = 0.0;
    for (std::size_t k = 0; k < 2 * g.n; ++k) len2 += (b[g.x(k)] - a[g.x(k)]) * (b[g.x(k)] - a[g.x(k)]);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(len2))));
}

inline std::vector<double> lerp(std::span<const double> a, std::span<const double> b, double s) {
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] + s * (b[i] - a[i]);
    return p;
}

}  // namespace detail

/// dK/dt at x with the gauge K = 0 on the base slice: the t-derivative of the
/// x-block covector integrated along the segment from the base to x.
inline double k_time_derivative(const TransformMap& f, const Expression& h, std::span<const double> x,
                                std::span<const double> base) {
    const auto& g = f.geometry();
    if (g.kind != Kind::Cosymplectic) throw WrongGeometry("k_time_derivative needs a cosymplectic chart");
    const auto a = detail::segment_start(g, base, x);
    const std::size_t panels = detail::panel_count(g, a, x);
    const std::size_t t = g.t();
    return integrate_unit(
        [&](double s) {
            const auto p = detail::lerp(a, x, s);
            const auto k = k_gradient_dual(f, h, p);
            double v = 0.0;
            for (std::size_t m = 0; m < k.size(); ++m) v += k[m].partial(t) * (x[g.x(m)] - a[g.x(m)]);
            return v;
        },
        panels);
}

inline KGradient candidate_K_gradient(const TransformMap& f, const Expression& h,
                                      std::span<const double> x,
                                      std::optional<std::vector<double>> base = std::nullopt) {
    KGradient out;
    out.x_block = k_gradient_values(f, h, x);
    if (f.geometry().kind == Kind::Cosymplectic) {
        const auto b = base ? *base : default_base(f.geometry(), x);
        out.dt = k_time_derivative(f, h, x, b);
    }
    return out;
}

// --------------------------------------------------------------- contact

/// Reeb fields of a pulled-back (co)contact structure.  Solves
///   (d theta + theta^T theta + eta^T eta) R = theta^T  (and = eta^T for R_t),
/// which is nonsingular exactly when the pullback is a (co)contact structure.
struct ReebPair {
    std::vector<double> reeb_z;
    std::optional<std::vector<double>> reeb_t;
    double condition = 0.0;
};

inline constexpr double kReebConditionLimit = 1e12;

inline ReebPair solve_reeb(const Matrix<double>& dtheta, std::span<const double> theta,
                           std::optional<std::span<const double>> eta) {
    const std::size_t d = theta.size();
    Matrix<double> a = dtheta;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            a(i, j) += theta[i] * theta[j];
            if (eta) a(i, j) += (*eta)[i] * (*eta)[j];
        }
    const auto lu = lu_decompose(a);
    if (lu.singular) throw SingularReeb("pulled-back form is not a contact form here (singular Reeb system)");
    ReebPair out;
    out.condition = norm_1(a) * norm_1(lu.inverse());
    if (!std::isfinite(out.condition) || out.condition > kReebConditionLimit)
        throw SingularReeb("Reeb system is numerically singular (condition " +
                           detail::format_number(out.condition) + ")");
    out.reeb_z = lu.solve(std::vector<double>(theta.begin(), theta.end()));
    if (eta) out.reeb_t = lu.solve(std::vector<double>(eta->begin(), eta->end()));
    return out;
}

/// Residuals of both contact canonoid conditions at a point, with K = -theta-bar(X_H).
struct ContactCanonoidSample {
    double k = 0.0;
    double two_form_residual = 0.0;  // |X_H -| d theta-bar - dK + R_z(K) theta-bar + R_t(K) eta-bar|
    double one_form_residual = 0.0;  // |X_H -| theta-bar + K|, zero by construction of K
    double eta_residual = 0.0;       // |X_H -| eta-bar| (cocontact)
    double reeb_condition = 0.0;
};

inline ContactCanonoidSample contact_canonoid_sample(const TransformMap& f, const Expression& h,
                                                     std::span<const double> x) {
    const auto& g = f.geometry();
    const std::size_t d = g.dimension();
    const auto jet = evaluate_second(f, x);
    const auto lag = lagrange_from_jacobian<Dual>(g, jet.jac);
    const auto theta = theta_from_jet<Dual>(g, jet);
    const auto hv = dual_value_gradient(h, x);
    const auto xs = seed<Dual>(x);
    const auto v = hamiltonian_field<Dual>(g, hv.value, hv.grad, std::span<const Dual>(xs));

    Dual k(0.0);
    for (std::size_t b = 0; b < d; ++b) k -= theta[b] * v[b];

    std::vector<double> th(d), dk(d), vv(d);
    for (std::size_t b = 0; b < d; ++b) {
        th[b] = theta[b].v;
        dk[b] = k.partial(b);
        vv[b] = v[b].v;
    }
    std::optional<std::vector<double>> eta;
    if (g.has_time()) {
        eta.emplace(d);
        for (std::size_t b = 0; b < d; ++b) (*eta)[b] = jet.jac(g.t(), b).v;
    }
    const auto reeb = solve_reeb(values(lag), th,
                                 eta ? std::optional<std::span<const double>>(*eta) : std::nullopt);

    const double rz_k = pair(dk, reeb.reeb_z);
    const double rt_k = reeb.reeb_t ? pair(dk, *reeb.reeb_t) : 0.0;
    const auto lhs = contract(vv, values(lag));

    ContactCanonoidSample s;
    s.k = k.v;
    s.reeb_condition = reeb.condition;
    for (std::size_t b = 0; b < d; ++b) {
        double r = lhs[b] - dk[b] + rz_k * th[b];
        if (eta) r += rt_k * (*eta)[b];
        s.two_form_residual = std::max(s.two_form_residual, std::abs(r));
    }
    s.one_form_residual = std::abs(pair(th, vv) + k.v);
    if (eta) s.eta_residual = std::abs(pair(*eta, vv));
    return s;
}

// --------------------------------------------------------------- canonoid

struct CanonoidVerdict {
    bool canonoid = false;
    double max_residual = 0.0;      // the defining condition that can fail (closedness or two-form)
    double max_eta_residual = 0.0;  // X_H -| eta-bar (time-dependent kinds)
    double max_reeb_condition = 0.0;
    std::vector<double> k_probe;    // K at the samples (empty when K cannot be recovered)
};

double recover_K(const TransformMap& f, const Expression& h, std::span<const double> x,
                 std::span<const double> base, double tol = kDefaultTolerance);

/// Canonoid on the sampled region.  For (co)symplectic kinds `base` anchors
/// the recovered K probe (default: the first sample).
inline CanonoidVerdict check_canonoid(const TransformMap& f, const Expression& h,
                                      const std::vector<std::vector<double>>& samples,
                                      double tol = kDefaultTolerance,
                                      std::optional<std::vector<double>> base = std::nullopt) {
    if (samples.empty()) throw Error("check_canonoid: no sample points");
    detail::check_hamiltonian(f, h);
    const auto& g = f.geometry();
    CanonoidVerdict v;
    if (g.is_poisson()) {
        for (const auto& x : samples) {
            const auto k = k_gradient_dual(f, h, x);
            v.max_residual = std::max(v.max_residual, closedness_residual(g, k));
            if (g.has_time()) {
                // X_H has no t-component and eta-bar = dT = dt.
                const auto xh = hamiltonian_vf(g, h, x);
                const auto eta = eta_from_jet<double>(g, evaluate_first(f, x));
                v.max_eta_residual = std::max(v.max_eta_residual, std::abs(pair(eta, xh)));
            }
        }
        v.canonoid = v.max_residual <= tol && v.max_eta_residual <= tol;
        if (v.canonoid) {
            const auto b = base ? *base : samples.front();
            try {
                for (const auto& x : samples) v.k_probe.push_back(recover_K(f, h, x, b, tol));
            } catch (const NonCanonoid&) {
                v.k_probe.clear();
            }
        }
        return v;
    }
    for (const auto& x : samples) {
        const auto s = contact_canonoid_sample(f, h, x);
        v.max_residual = std::max({v.max_residual, s.two_form_residual, s.one_form_residual});
        v.max_eta_residual = std::max(v.max_eta_residual, s.eta_residual);
        v.max_reeb_condition = std::max(v.max_reeb_condition, s.reeb_condition);
        v.k_probe.push_back(s.k);
    }
    v.canonoid = v.max_residual <= tol && v.max_eta_residual <= tol;
    return v;
}

/// K at x.  Contact kinds: -theta-bar(X_H)(x).  (Co)symplectic kinds: line
/// integral of the K covector along the straight x-block segment from `base`
/// to x (at the t of x), so K(base) = 0; 32 Gauss-Legendre nodes per unit
/// length.  Throws NonCanonoid when the covector is not closed at a panel
/// midpoint.
inline double recover_K(const TransformMap& f, const Expression& h, std::span<const double> x,
                        std::span<const double> base, double tol) {
    detail::check_hamiltonian(f, h);
    detail::check_point(f, x);
    const auto& g = f.geometry();
    if (!g.is_poisson()) return contact_canonoid_sample(f, h, x).k;
    if (base.size() != x.size()) throw DimensionMismatch("recover_K: base point has wrong dimension");

    const auto a = detail::segment_start(g, base, x);
    const std::size_t panels = detail::panel_count(g, a, x);
    for (std::size_t k = 0; k < panels; ++k) {
        const auto mid = detail::lerp(a, x, (static_cast<double>(k) + 0.5) / static_cast<double>(panels));
        const double r = closedness_residual(g, k_gradient_dual(f, h, mid));
        if (r > tol)
            throw NonCanonoid("K covector is not closed along the path (residual " +
                              detail::format_number(r) + "); K would be path-dependent");
    }
    return integrate_unit(
        [&](double s) {
            const auto p = detail::lerp(a, x, s);
            const auto kg = k_gradient_values(f, h, p);
            double v = 0.0;
            for (std::size_t m = 0; m < kg.size(); ++m) v += kg[m] * (x[g.x(m)] - a[g.x(m)]);
            return v;
        },
        panels);
}

}  // namespace canonoid
