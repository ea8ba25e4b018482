#include <cmath>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "canonoid/geometry.hpp"
#include "canonoid/sampling.hpp"
#include "corpus.hpp"

using namespace canonoid;

TEST(Layout, CoordinateNamesPerKind) {
    EXPECT_EQ((GeometryKind{Kind::Symplectic, 2}.names()), (std::vector<std::string>{"q1", "q2", "p1", "p2"}));
    EXPECT_EQ((GeometryKind{Kind::Cosymplectic, 1}.names()), (std::vector<std::string>{"q1", "p1", "t"}));
    EXPECT_EQ((GeometryKind{Kind::Contact, 1}.names()), (std::vector<std::string>{"q1", "p1", "z"}));
    EXPECT_EQ((GeometryKind{Kind::Cocontact, 2}.names()),
              (std::vector<std::string>{"t", "q1", "q2", "p1", "p2", "z"}));
    EXPECT_THROW((GeometryKind{Kind::Symplectic, 1}.t()), WrongGeometry);
    EXPECT_THROW((GeometryKind{Kind::Cosymplectic, 1}.z()), WrongGeometry);
    EXPECT_EQ(kind_from_name("cocontact"), Kind::Cocontact);
    EXPECT_FALSE(kind_from_name("kaehler"));
}

TEST(Structure, EpsilonAndItsInverse) {
    const auto e = epsilon(2);
    const auto prod = e * epsilon_inverse(2);
    EXPECT_EQ(max_abs_diff(prod, Matrix<double>::identity(4)), 0.0);
    EXPECT_EQ(e(0, 2), 1.0);
    EXPECT_EQ(e(2, 0), -1.0);
}

TEST(Structure, ReebFieldsAnnihilateTheTwoForm) {
    const GeometryKind g{Kind::Cocontact, 1};
    const std::vector<double> x = {0.5, 1.0, -2.0, 0.3};
    const auto s = structure_at(g, x);
    for (const auto* r : {&*s.reeb, &*s.reeb_t}) {
        const auto c = contract(*r, s.two_form);
        EXPECT_EQ(max_abs(c), 0.0);
    }
    EXPECT_EQ(pair(*s.theta, *s.reeb), 1.0);
    EXPECT_EQ(pair(*s.eta, *s.reeb_t), 1.0);
    EXPECT_EQ(pair(*s.theta, *s.reeb_t), 0.0);
    EXPECT_EQ((*s.theta)[g.q(0)], 2.0);  // theta = dz - p dq
}

TEST(Fields, HamiltonianFieldPerKind) {
    {
        const GeometryKind g{Kind::Symplectic, 1};
        const auto v = hamiltonian_vf(g, parse("p1^2/2 + q1^4", g.names()), std::vector<double>{1.0, 2.0});
        EXPECT_EQ(v, (std::vector<double>{2.0, -4.0}));
    }
    {
        const GeometryKind g{Kind::Contact, 1};
        const auto v = hamiltonian_vf(g, parse("p1^2/2 + q1^2/2 + 0.2*z", g.names()), std::vector<double>{1.0, 0.5, 0.0});
        EXPECT_DOUBLE_EQ(v[0], 0.5);
        EXPECT_DOUBLE_EQ(v[1], -1.1);
        EXPECT_DOUBLE_EQ(v[2], -0.375);
    }
    {
        const GeometryKind g{Kind::Cosymplectic, 1};
        const auto h = parse("p1^2/2 + t*q1", g.names());
        const std::vector<double> x = {1.0, 2.0, 3.0};
        EXPECT_EQ(evolution_vf(g, h, x), (std::vector<double>{2.0, -3.0, 1.0}));
        EXPECT_EQ(hamiltonian_vf(g, h, x), (std::vector<double>{2.0, -3.0, 0.0}));
    }
    {
        const GeometryKind g{Kind::Cocontact, 1};
        const auto v = evolution_vf(g, parse("p1^2/2 + t*z", g.names()), std::vector<double>{2.0, 1.0, 3.0, 0.5});
        EXPECT_EQ(v, (std::vector<double>{1.0, 3.0, -6.0, 3.5}));
    }
}

// X_H satisfies its defining contractions in each geometry.
TEST(Fields, DefiningContractions) {
    Xoshiro256 rng(11);
    for (auto kind : {Kind::Symplectic, Kind::Cosymplectic, Kind::Contact, Kind::Cocontact}) {
        const GeometryKind g{kind, 2};
        for (int trial = 0; trial < 10; ++trial) {
            const auto h = parse(corpus::random_polynomial(rng, g.names(), 4), g.names());
            std::vector<double> x(g.dimension());
            for (auto& v : x) v = rng.uniform(-1, 1);
            const auto s = structure_at(g, x);
            const auto vg = value_gradient(h, x);
            const auto xh = hamiltonian_vf(g, h, x);
            auto lhs = contract(xh, s.two_form);
            std::vector<double> rhs = vg.grad;
            // dH - R(H) eta  /  dH - R(H) theta  (and - R_t(H) eta)
            if (g.has_z()) {
                const double rz = vg.grad[g.z()];
                for (std::size_t b = 0; b < x.size(); ++b) rhs[b] -= rz * (*s.theta)[b];
                EXPECT_NEAR(pair(*s.theta, xh), -vg.value, 1e-12);
            }
            if (g.has_time()) {
                const double rt = vg.grad[g.t()];
                for (std::size_t b = 0; b < x.size(); ++b) rhs[b] -= rt * (*s.eta)[b];
                EXPECT_EQ(pair(*s.eta, xh), 0.0);
            }
            for (std::size_t b = 0; b < x.size(); ++b) EXPECT_NEAR(lhs[b], rhs[b], 1e-12) << kind_name(kind);
        }
    }
}

namespace {

// {f, {g, h}} with the inner bracket carried as a dual.
double nested_poisson(const GeometryKind& g, const Expression& f, const Expression& a, const Expression& b,
                      std::span<const double> x) {
    const auto da = dual_value_gradient(a, x);
    const auto db = dual_value_gradient(b, x);
    const Dual inner = poisson_from_gradients<Dual>(g, da.grad, db.grad);
    std::vector<double> gi(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gi[i] = inner.partial(i);
    return poisson_from_gradients<double>(g, gradient(f, x), gi);
}

double nested_jacobi(const GeometryKind& g, const Expression& f, const Expression& a, const Expression& b,
                     std::span<const double> x) {
    const auto da = dual_value_gradient(a, x);
    const auto db = dual_value_gradient(b, x);
    const auto xs = seed<Dual>(x);
    const Dual inner = jacobi_from_gradients<Dual>(g, da.value, da.grad, db.value, db.grad, std::span<const Dual>(xs));
    std::vector<double> gi(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gi[i] = inner.partial(i);
    const auto vf = value_gradient(f, x);
    return jacobi_from_gradients<double>(g, vf.value, vf.grad, inner.v, gi, x);
}

}  // namespace

TEST(Brackets, PoissonValue) {
    const GeometryKind g{Kind::Symplectic, 1};
    EXPECT_DOUBLE_EQ(poisson_bracket(g, parse("q1^2", g.names()), parse("p1^2", g.names()), std::vector<double>{2, 3}),
                     24.0);
    EXPECT_THROW(poisson_bracket(GeometryKind{Kind::Contact, 1}, parse("q1", {"q1", "p1", "z"}),
                                 parse("q1", {"q1", "p1", "z"}), std::vector<double>{0, 0, 0}),
                 WrongGeometry);
}

TEST(Brackets, PoissonAxiomsOnRandomPolynomials) {
    const GeometryKind g{Kind::Symplectic, 2};
    const auto names = g.names();
    Xoshiro256 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const auto fs = corpus::random_polynomial(rng, names), gs = corpus::random_polynomial(rng, names),
                   hs = corpus::random_polynomial(rng, names);
        const auto f = parse(fs, names), a = parse(gs, names), h = parse(hs, names);
        const auto fa = parse("(" + fs + ")*(" + gs + ")", names);
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-1, 1);
        EXPECT_NEAR(poisson_bracket(g, f, a, x), -poisson_bracket(g, a, f, x), 1e-12);
        const double leib = poisson_bracket(g, fa, h, x) - eval<double>(f, x) * poisson_bracket(g, a, h, x) -
                            eval<double>(a, x) * poisson_bracket(g, f, h, x);
        EXPECT_NEAR(leib, 0.0, 1e-9);
        const double jac = nested_poisson(g, f, a, h, x) + nested_poisson(g, a, h, f, x) + nested_poisson(g, h, f, a, x);
        EXPECT_NEAR(jac, 0.0, 1e-9);
    }
}

TEST(Brackets, JacobiAxiomsAndLeibnizViolation) {
    const GeometryKind g{Kind::Contact, 1};
    const auto names = g.names();
    Xoshiro256 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const auto f = parse(corpus::random_polynomial(rng, names), names);
        const auto a = parse(corpus::random_polynomial(rng, names), names);
        const auto h = parse(corpus::random_polynomial(rng, names), names);
        std::vector<double> x(3);
        for (auto& v : x) v = rng.uniform(-1, 1);
        EXPECT_NEAR(jacobi_bracket(g, f, a, x), -jacobi_bracket(g, a, f, x), 1e-12);
        const double jac = nested_jacobi(g, f, a, h, x) + nested_jacobi(g, a, h, f, x) + nested_jacobi(g, h, f, a, x);
        EXPECT_NEAR(jac, 0.0, 1e-9);
    }
    // {1*1, z} - 1*{1, z} - 1*{1, z} = 1 - 2: constants are not Casimirs of a Jacobi bracket.
    const auto one = parse("1", names), z = parse("z", names);
    const std::vector<double> x = {0.3, -0.4, 0.2};
    const double leib = jacobi_bracket(g, parse("1*1", names), z, x) - 2.0 * jacobi_bracket(g, one, z, x);
    EXPECT_DOUBLE_EQ(leib, -1.0);
}
