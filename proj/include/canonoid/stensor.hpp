#pragma once

// The mixed tensor S defined by  omega-bar = S -| omega  (plus S -| eta = 0 and
// S -| theta = 0 where those forms exist), its trace invariants, Nijenhuis
// torsion and the trace identity that links the two.
//
// In Darboux coordinates, with x = (q, p) and eps^{la} the Poisson matrix:
//
//   S^a_B = eps^{la} [B, x^l]       for every chart index B
//   S^t_B = 0
//   S^z_B = p_i S^{q_i}_B

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "canonoid/dual.hpp"
#include "canonoid/errors.hpp"
#include "canonoid/geometry.hpp"
#include "canonoid/matrix.hpp"
#include "canonoid/transform.hpp"

namespace canonoid {

inline constexpr std::size_t kMaxPower = 10;

/// S from the Lagrange matrix and the point.  With eps^{-1} = [[0,-I],[I,0]]
/// the contraction collapses to S^{q_i}_B = [B, p_i], S^{p_i}_B = -[B, q_i].
template <class T>
Matrix<T> s_matrix(const GeometryKind& g, const Matrix<T>& lag, std::span<const T> x) {
    const std::size_t d = g.dimension();
    Matrix<T> s(d, d);
    for (std::size_t b = 0; b < d; ++b)
        for (std::size_t i = 0; i < g.n; ++i) {
            s(g.q(i), b) = lag(b, g.p(i));
            s(g.p(i), b) = -lag(b, g.q(i));
        }
    if (g.has_z())
        for (std::size_t b = 0; b < d; ++b) {
            T acc(0.0);
            for (std::size_t i = 0; i < g.n; ++i) acc += x[g.p(i)] * s(g.q(i), b);
            s(g.z(), b) = std::move(acc);
        }
    return s;
}

struct STensorSample {
    Matrix<double> matrix;
    // 1 where the entry is fixed by the geometry (t-row zero, z-row p-weighted).
    std::vector<unsigned char> structural;

    bool is_structural(std::size_t a, std::size_t b) const { return structural[a * matrix.cols() + b] != 0; }
};

inline STensorSample s_tensor(const TransformMap& f, std::span<const double> x) {
    const auto& g = f.geometry();
    const auto lag = lagrange_brackets(f, x);
    const std::size_t d = g.dimension();
    STensorSample out{s_matrix<double>(g, lag, x), std::vector<unsigned char>(d * d, 0)};
    for (std::size_t b = 0; b < d; ++b) {
        if (g.has_time()) out.structural[g.t() * d + b] = 1;
        if (g.has_z()) out.structural[g.z() * d + b] = 1;
    }
    return out;
}

/// S with each entry carrying its first derivatives along the chart.
inline Matrix<Dual> s_matrix_dual(const TransformMap& f, std::span<const double> x) {
    const auto& g = f.geometry();
    const auto jet = evaluate_second(f, x);
    const auto lag = lagrange_from_jacobian<Dual>(g, jet.jac);
    const auto xs = seed<Dual>(x);
    return s_matrix<Dual>(g, lag, std::span<const Dual>(xs));
}

template <class T>
Matrix<T> x_block_of(const GeometryKind& g, const Matrix<T>& m) {
    const std::size_t k = 2 * g.n;
    Matrix<T> out(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) out(a, b) = m(g.x(a), g.x(b));
    return out;
}

/// tr(M^k) for k = 1..kmax by repeated multiplication.
template <class T>
std::vector<T> power_traces(const Matrix<T>& m, std::size_t kmax) {
    if (kmax < 1 || kmax > kMaxPower)
        throw Error("kmax must be between 1 and " + std::to_string(kMaxPower) + ", got " + std::to_string(kmax));
    std::vector<T> out;
    out.reserve(kmax);
    Matrix<T> p = m;
    out.push_back(trace(p));
    for (std::size_t k = 2; k <= kmax; ++k) {
        p = p * m;
        out.push_back(trace(p));
    }
    return out;
}

/// tr(S^k), k = 1..kmax, of the full S.
inline std::vector<double> trace_powers(const TransformMap& f, std::span<const double> x, std::size_t kmax) {
    return power_traces(s_tensor(f, x).matrix, kmax);
}

// ----------------------------------------------------------------- torsion

/// N^l_{bc} over the x-block, stored as c[(l*m + b)*m + c] with m = 2n.
struct TorsionSample {
    std::size_t m = 0;
    std::vector<double> c;

    double operator()(std::size_t l, std::size_t b, std::size_t k) const { return c[(l * m + b) * m + k]; }
    double max_abs() const { return canonoid::max_abs(c); }
};

namespace detail {

// dS^a_b / dx^v with all indices x-block positions.
inline double ds(const GeometryKind& g, const Matrix<Dual>& s, std::size_t a, std::size_t b, std::size_t v) {
    return s(g.x(a), g.x(b)).partial(g.x(v));
}

}  // namespace detail

inline TorsionSample torsion_from(const GeometryKind& g, const Matrix<Dual>& s) {
    const std::size_t m = 2 * g.n;
    TorsionSample out{m, std::vector<double>(m * m * m, 0.0)};
    auto sv = [&](std::size_t a, std::size_t b) { return s(g.x(a), g.x(b)).v; };
    for (std::size_t l = 0; l < m; ++l)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = b + 1; c < m; ++c) {
                double acc = 0.0;
                for (std::size_t v = 0; v < m; ++v) {
                    acc += detail::ds(g, s, l, c, v) * sv(v, b);
                    acc -= detail::ds(g, s, l, b, v) * sv(v, c);
                    acc += (detail::ds(g, s, v, b, c) - detail::ds(g, s, v, c, b)) * sv(l, v);
                }
                out.c[(l * m + b) * m + c] = acc;
                out.c[(l * m + c) * m + b] = -acc;
            }
    return out;
}

inline TorsionSample nijenhuis_torsion(const TransformMap& f, std::span<const double> x) {
    return torsion_from(f.geometry(), s_matrix_dual(f, x));
}

/// Max-norm residual of the trace identity on the x-block,
///
///   N^l_{bc} (S^{k-1})^c_l = (1/k) S^a_b d_a tr(S^k) - 1/(k+1) d_b tr(S^{k+1}).
///
/// The left side comes from the torsion components, the right from
/// differentiating traces of dual-valued matrix powers.
inline double lenard_identity_residual(const TransformMap& f, std::span<const double> x, std::size_t k) {
    if (k < 1 || k + 1 > kMaxPower) throw Error("lenard_identity_residual: k out of range");
    const auto& g = f.geometry();
    const std::size_t m = 2 * g.n;
    const auto s = s_matrix_dual(f, x);
    const auto tor = torsion_from(g, s);
    const auto a = x_block_of(g, s);
    const auto av = values(a);

    Matrix<double> pk1 = Matrix<double>::identity(m);
    for (std::size_t j = 1; j < k; ++j) pk1 = pk1 * av;

    const auto traces = power_traces(a, k + 1);
    const Dual& tk = traces[k - 1];
    const Dual& tk1 = traces[k];

    double worst = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
        double lhs = 0.0;
        for (std::size_t l = 0; l < m; ++l)
            for (std::size_t c = 0; c < m; ++c) lhs += tor(l, b, c) * pk1(c, l);
        double rhs = -tk1.partial(g.x(b)) / static_cast<double>(k + 1);
        for (std::size_t al = 0; al < m; ++al)
            rhs += av(al, b) * tk.partial(g.x(al)) / static_cast<double>(k);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

// --------------------------------------------------------------- involution

struct InvolutionResult {
    Matrix<double> unbarred;  // max |{tr S^i, tr S^j}| over samples
    Matrix<double> barred;    // same with the pulled-back Poisson matrix, usable samples only
    std::size_t skipped = 0;  // samples where the Lagrange x-block is (numerically) singular
    double max_condition = 0.0;
    std::size_t max_trace_rank = 0;  // numerical rank of the trace gradients, max over samples
};

inline constexpr double kPullbackConditionLimit = 1e12;

/// Numerical rank by Gaussian elimination with a relative pivot threshold.
inline std::size_t numerical_rank(Matrix<double> a, double rel_tol = 1e-8) {
    const double scale = max_abs(a);
    if (scale == 0.0) return 0;
    std::size_t rank = 0;
    std::vector<bool> used(a.rows(), false);
    for (std::size_t c = 0; c < a.cols(); ++c) {
        std::size_t piv = a.rows();
        double best = rel_tol * scale;
        for (std::size_t r = 0; r < a.rows(); ++r)
            if (!used[r] && std::abs(a(r, c)) > best) {
                best = std::abs(a(r, c));
                piv = r;
            }
        if (piv == a.rows()) continue;
        used[piv] = true;
        ++rank;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            if (r == piv) continue;
            const double factor = a(r, c) / a(piv, c);
            for (std::size_t j = c; j < a.cols(); ++j) a(r, j) -= factor * a(piv, j);
        }
    }
    return rank;
}

struct BarredPoisson {
    Matrix<double> matrix;  // inverse of the Lagrange x-block
    double condition = 0.0;
};

/// Poisson matrix of the pulled-back two-form on the x-block.
inline BarredPoisson barred_poisson(const TransformMap& f, std::span<const double> x) {
    const auto lx = x_block_of(f.geometry(), lagrange_brackets(f, x));
    const auto lu = lu_decompose(lx);
    if (lu.singular) throw SingularPullback("Lagrange x-block is singular");
    BarredPoisson out{lu.inverse(), 0.0};
    out.condition = norm_1(lx) * norm_1(out.matrix);
    if (!std::isfinite(out.condition) || out.condition > kPullbackConditionLimit)
        throw SingularPullback("Lagrange x-block is numerically singular (condition " +
                               detail::format_number(out.condition) + ")");
    return out;
}

/// Pairwise brackets of tr(S^k), k = 1..kmax, on the x-block.  Unbarred:
/// df^T eps dg.  Barred: -df^T L^{-1} dg with L the Lagrange x-block, which
/// reduces to the unbarred bracket when F is the identity.
inline InvolutionResult involution_matrix(const TransformMap& f, const std::vector<std::vector<double>>& samples,
                                          std::size_t kmax) {
    const auto& g = f.geometry();
    if (!g.is_poisson())
        throw WrongGeometry(std::string("involution is defined for Poisson kinds, not ") + kind_name(g.kind));
    const std::size_t m = 2 * g.n;
    const auto eps = epsilon(g.n);
    InvolutionResult out{Matrix<double>(kmax, kmax), Matrix<double>(kmax, kmax)};
    for (const auto& x : samples) {
        const auto s = s_matrix_dual(f, x);
        const auto traces = power_traces(x_block_of(g, s), kmax);
        Matrix<double> grads(kmax, m);
        for (std::size_t i = 0; i < kmax; ++i)
            for (std::size_t a = 0; a < m; ++a) grads(i, a) = traces[i].partial(g.x(a));
        out.max_trace_rank = std::max(out.max_trace_rank, numerical_rank(grads));

        const auto eg = grads * transpose(eps);  // row i: eps dg_i as a row
        for (std::size_t i = 0; i < kmax; ++i)
            for (std::size_t j = 0; j < kmax; ++j) {
                double v = 0.0;
                for (std::size_t a = 0; a < m; ++a) v += grads(i, a) * eg(j, a);
                out.unbarred(i, j) = std::max(out.unbarred(i, j), std::abs(v));
            }

        BarredPoisson bp;
        try {
            bp = barred_poisson(f, x);
        } catch (const SingularPullback&) {
            ++out.skipped;
            continue;
        }
        const auto& inv = bp.matrix;
        const double cond = bp.condition;
        out.max_condition = std::max(out.max_condition, cond);
        for (std::size_t i = 0; i < kmax; ++i)
            for (std::size_t j = 0; j < kmax; ++j) {
                double v = 0.0;
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = 0; b < m; ++b) v -= grads(i, a) * inv(a, b) * grads(j, b);
                out.barred(i, j) = std::max(out.barred(i, j), std::abs(v));
            }
    }
    return out;
}

}  // namespace canonoid
