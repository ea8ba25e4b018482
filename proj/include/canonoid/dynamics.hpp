#pragma once

// Trajectories of X_H (symplectic, contact) or E_H (cosymplectic, cocontact),
// drift statistics of observables along them, and the Lie derivative of S
// along the dynamical field.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "canonoid/dual.hpp"
#include "canonoid/errors.hpp"
#include "canonoid/expr.hpp"
#include "canonoid/geometry.hpp"
#include "canonoid/matrix.hpp"
#include "canonoid/stensor.hpp"
#include "canonoid/transform.hpp"

namespace canonoid {

enum class Method { Rk4, Rk45 };

inline const char* method_name(Method m) { return m == Method::Rk4 ? "rk4" : "rk45"; }

struct Trajectory {
    GeometryKind geometry;
    Expression hamiltonian;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
};

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    std::size_t max_substeps = 10'000'000;
};

namespace detail {

using State = std::vector<double>;

inline State axpy_state(const State& x, double h, const State& k) {
    State out(x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += h * k[i];
    return out;
}

inline State rk4_step(const std::function<State(const State&)>& f, const State& x, double h) {
    const State k1 = f(x);
    const State k2 = f(axpy_state(x, 0.5 * h, k1));
    const State k3 = f(axpy_state(x, 0.5 * h, k2));
    const State k4 = f(axpy_state(x, h, k3));
    State out(x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr std::array<double, 7> b5 = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0};
constexpr std::array<double, 7> b4 = {5179.0 / 57600.0, 0.0,  7571.0 / 16695.0, 393.0 / 640.0,
                                      -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};

inline State combo(const State& x, double h, const std::vector<std::pair<double, const State*>>& terms) {
    State out(x);
    for (const auto& [c, k] : terms)
        if (c != 0.0)
            for (std::size_t i = 0; i < x.size(); ++i) out[i] += h * c * (*k)[i];
    return out;
}

/// Advances x from t0 to t1 adaptively; h carries the step size between calls.
inline State dopri_advance(const std::function<State(const State&)>& f, State x, double t0, double t1, double& h,
                           const IntegratorOptions& opt) {
    double t = t0;
    std::size_t count = 0;
    State k1 = f(x);
    while (t < t1) {
        if (++count > opt.max_substeps) throw StepFailure("rk45: too many substeps");
        // absorb a rounding-sized remainder into this step
        const bool last = t + h >= t1 - 1e-12 * std::max(1.0, std::abs(t1));
        const double step = last ? t1 - t : h;
        if (step <= 1e-14 * std::max(1.0, std::abs(t)))
            throw StepFailure("rk45: step size underflow at t = " + detail::format_number(t));
        const State k2 = f(combo(x, step, {{a21, &k1}}));
        const State k3 = f(combo(x, step, {{a31, &k1}, {a32, &k2}}));
        const State k4 = f(combo(x, step, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State k5 = f(combo(x, step, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State k6 = f(combo(x, step, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const State y = combo(x, step, {{b5[0], &k1}, {b5[2], &k3}, {b5[3], &k4}, {b5[4], &k5}, {b5[5], &k6}});
        const State k7 = f(y);
        const std::array<const State*, 7> ks = {&k1, &k2, &k3, &k4, &k5, &k6, &k7};
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = 0.0;
            for (std::size_t s = 0; s < 7; ++s) e += (b5[s] - b4[s]) * (*ks[s])[i];
            const double sc = opt.atol + opt.rtol * std::max(std::abs(x[i]), std::abs(y[i]));
            err = std::max(err, std::abs(step * e) / sc);
        }
        if (!std::isfinite(err)) throw StepFailure("rk45: non-finite state at t = " + detail::format_number(t));
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (err <= 1.0) {
            t = last ? t1 : t + step;
            x = y;
            k1 = k7;
            if (!last) h = step * factor;
        } else {
            h = step * factor;
        }
    }
    return x;
}

}  // namespace detail

/// Integrates the dynamical field of g from t_span.first to t_span.second,
/// storing steps + 1 uniformly spaced states.  For time-dependent kinds the
/// t coordinate of x0 must equal t_span.first, and stored t values are the
/// exact output times.
inline Trajectory integrate(const GeometryKind& g, const Expression& h, std::vector<double> x0,
                            std::pair<double, double> t_span, std::size_t steps, Method method,
                            const IntegratorOptions& opt = {}) {
    if (steps < 1) throw Error("integrate: steps must be at least 1");
    if (x0.size() != g.dimension() || h.dimension() != g.dimension())
        throw DimensionMismatch("integrate: initial state or hamiltonian does not match the chart");
    const auto [t0, t1] = t_span;
    if (!(t1 > t0)) throw Error("integrate: t_span must be increasing");
    if (g.has_time() && std::abs(x0[g.t()] - t0) > 1e-12)
        throw Error("integrate: t coordinate of the initial state must equal the start time");

    auto field = [&](const detail::State& x) { return evolution_vf(g, h, x); };
    const double dt = (t1 - t0) / static_cast<double>(steps);

    Trajectory tr{g, h, {}, {}};
    tr.times.reserve(steps + 1);
    tr.states.reserve(steps + 1);
    tr.times.push_back(t0);
    tr.states.push_back(x0);
    detail::State x = std::move(x0);
    double hstep = dt;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double ta = t0 + static_cast<double>(k - 1) * dt;
        const double tb = k == steps ? t1 : t0 + static_cast<double>(k) * dt;
        x = method == Method::Rk4 ? detail::rk4_step(field, x, tb - ta) : detail::dopri_advance(field, x, ta, tb, hstep, opt);
        if (g.has_time()) x[g.t()] = tb;
        for (double v : x)
            if (!std::isfinite(v)) throw StepFailure("integration produced a non-finite state at t = " + detail::format_number(tb));
        tr.times.push_back(tb);
        tr.states.push_back(x);
    }
    return tr;
}

// ------------------------------------------------------------------- drift

using Observable = std::function<double(std::span<const double>)>;

struct ObservableDrift {
    std::string name;
    double initial = 0.0;
    double max_abs_drift = 0.0;
    double max_rel_drift = 0.0;  // max_abs_drift / max(|initial|, 1)
    double slope = 0.0;          // least-squares slope of f(t) - f(0) against t
    std::vector<double> values;
};

struct DriftReport {
    std::vector<ObservableDrift> observables;

    const ObservableDrift& at(const std::string& name) const {
        for (const auto& o : observables)
            if (o.name == name) return o;
        throw Error("no observable named '" + name + "' in drift report");
    }
};

inline DriftReport drift_report(const Trajectory& tr, const std::vector<std::pair<std::string, Observable>>& obs) {
    if (tr.states.empty()) throw Error("drift_report: empty trajectory");
    DriftReport rep;
    const std::size_t m = tr.states.size();
    double tm = 0.0;
    for (double t : tr.times) tm += t;
    tm /= static_cast<double>(m);
    for (const auto& [name, fn] : obs) {
        ObservableDrift d;
        d.name = name;
        d.values.reserve(m);
        for (const auto& x : tr.states) d.values.push_back(fn(x));
        d.initial = d.values.front();
        double ym = 0.0;
        for (double v : d.values) {
            d.max_abs_drift = std::max(d.max_abs_drift, std::abs(v - d.initial));
            ym += v - d.initial;
        }
        ym /= static_cast<double>(m);
        d.max_rel_drift = d.max_abs_drift / std::max(std::abs(d.initial), 1.0);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            sxy += (tr.times[i] - tm) * (d.values[i] - d.initial - ym);
            sxx += (tr.times[i] - tm) * (tr.times[i] - tm);
        }
        d.slope = sxx > 0.0 ? sxy / sxx : 0.0;
        rep.observables.push_back(std::move(d));
    }
    return rep;
}

/// tr(S^k) as an observable.
inline Observable trace_observable(const TransformMap& f, std::size_t k) {
    return [f, k](std::span<const double> x) { return trace_powers(f, x, k).back(); };
}

inline Observable expression_observable(const Expression& e) {
    return [e](std::span<const double> x) { return eval<double>(e, x); };
}

// ------------------------------------------------------------ Lie derivative

/// (L_V S)^A_B = V^v d_v S^A_B - S^v_B d_v V^A + S^A_v d_B V^v over the full
/// chart, with V = X_H or E_H.
inline Matrix<double> lie_derivative_S(const TransformMap& f, const Expression& h, std::span<const double> x) {
    const auto& g = f.geometry();
    const std::size_t d = g.dimension();
    const auto s = s_matrix_dual(f, x);
    const auto v = dynamical_field_dual(g, h, x);
    Matrix<double> out(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t n = 0; n < d; ++n) {
                acc += v[n].v * s(a, b).partial(n);
                acc -= s(n, b).v * v[a].partial(n);
                acc += s(a, n).v * v[n].partial(b);
            }
            out(a, b) = acc;
        }
    return out;
}

/// For a cosymplectic canonoid map: the dt-column A^a_t = eps^{va} d/dt (dK/dx^v)
/// expected of L_{E_H} S, built from the K covector alone.  Indexed by chart row.
inline std::vector<double> cosymplectic_lie_column(const TransformMap& f, const Expression& h,
                                                   std::span<const double> x) {
    const auto& g = f.geometry();
    if (g.kind != Kind::Cosymplectic) throw WrongGeometry("cosymplectic_lie_column needs a cosymplectic chart");
    const auto k = k_gradient_dual(f, h, x);
    const auto einv = epsilon_inverse(g.n);
    std::vector<double> col(g.dimension(), 0.0);
    for (std::size_t a = 0; a < 2 * g.n; ++a) {
        double acc = 0.0;
        for (std::size_t v = 0; v < 2 * g.n; ++v) acc += einv(v, a) * k[v].partial(g.t());
        col[g.x(a)] = acc;
    }
    return col;
}

}  // namespace canonoid
