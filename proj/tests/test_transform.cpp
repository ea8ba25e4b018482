#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "canonoid/transform.hpp"
#include "corpus.hpp"

using namespace canonoid;
using corpus::sym1;

namespace {

TransformMap map1(const GeometryKind& g, std::vector<std::string> comps) {
    return TransformMap::parse(g, comps);
}

}  // namespace

TEST(TransformMap, Validation) {
    EXPECT_THROW(map1(sym1, {"q1"}), InvalidTransform);
    EXPECT_THROW(map1(corpus::cosym1, {"q1", "p1", "2*t"}), InvalidTransform);
    EXPECT_THROW(map1(corpus::cocontact1, {"t + 1", "q1", "p1", "z"}), InvalidTransform);
    EXPECT_NO_THROW(map1(corpus::cosym1, {"q1", "p1", "t"}));
    EXPECT_THROW(map1(sym1, {"q1", "t"}), UnknownVariable);
    EXPECT_THROW(TransformMap::parse(sym1, std::map<std::string, std::string>{{"q1", "q1"}}), InvalidTransform);
}

TEST(Jacobian, Examples) {
    EXPECT_EQ(max_abs_diff(jacobian(TransformMap::identity(corpus::cocontact1), std::vector<double>{1, 2, 3, 4}),
                           Matrix<double>::identity(4)),
              0.0);
    const auto j = jacobian(map1(sym1, {"q1", "p1^3/3"}), std::vector<double>{1, 2});
    EXPECT_EQ(j(0, 0), 1.0);
    EXPECT_EQ(j(0, 1), 0.0);
    EXPECT_EQ(j(1, 0), 0.0);
    EXPECT_EQ(j(1, 1), 4.0);
    const auto r = jacobian(corpus::get("rotation").transform(), std::vector<double>{0.4, -0.9});
    EXPECT_DOUBLE_EQ(r(0, 0), std::cos(0.3));
    EXPECT_DOUBLE_EQ(r(0, 1), std::sin(0.3));
    EXPECT_DOUBLE_EQ(r(1, 0), -std::sin(0.3));
}

TEST(Jacobian, SingularIsAnError) {
    EXPECT_THROW(jacobian(map1(sym1, {"q1", "p1^3/3"}), std::vector<double>{1, 0}), SingularJacobian);
    EXPECT_THROW(jacobian(map1(sym1, {"q1", "p1"}), std::vector<double>{1, 0, 0}), DimensionMismatch);
}

TEST(Lagrange, Examples) {
    const auto e = lagrange_brackets(TransformMap::identity(sym1), std::vector<double>{0.2, 0.3});
    EXPECT_EQ(max_abs_diff(e, epsilon(1)), 0.0);
    const auto l = lagrange_brackets(map1(sym1, {"q1", "p1^3/3"}), std::vector<double>{0.5, 1.5});
    EXPECT_DOUBLE_EQ(l(0, 1), 2.25);
    EXPECT_DOUBLE_EQ(l(1, 0), -2.25);
    const auto c = lagrange_brackets(corpus::get("contact_scale_2").transform(), std::vector<double>{0.1, 0.2, 0.3});
    EXPECT_DOUBLE_EQ(c(0, 1), 2.0);
    for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(c(2, b), 0.0);
}

TEST(Lagrange, ExactlyAntisymmetric) {
    for (const auto& cs : corpus::all()) {
        const auto f = cs.transform();
        for (const auto& x : cs.samples(20)) {
            const auto l = lagrange_brackets(f, x);
            for (std::size_t a = 0; a < l.rows(); ++a)
                for (std::size_t b = 0; b < l.cols(); ++b) ASSERT_EQ(l(a, b), -l(b, a)) << cs.name;
        }
    }
}

TEST(Canonical, Verdicts) {
    const auto rot = corpus::get("rotation");
    const auto v = check_canonical(rot.transform(), rot.samples(50));
    EXPECT_TRUE(v.canonical);
    EXPECT_LT(v.max_residual, 1e-14);

    // |p^2 - 1| at the sampled points
    const auto cube = corpus::get("cube");
    const auto samples = cube.samples(50);
    double want = 0.0;
    for (const auto& x : samples) want = std::max(want, std::abs(x[1] * x[1] - 1.0));
    const auto vc = check_canonical(cube.transform(), samples);
    EXPECT_FALSE(vc.canonical);
    EXPECT_NEAR(vc.max_residual, want, 1e-15);

    // theta-bar - theta = theta: components (-p, 1), so the residual is max(1, |p|)
    const auto sc = corpus::get("contact_scale_2");
    const auto cs = sc.samples(50);
    double wc = 0.0;
    for (const auto& x : cs) wc = std::max({wc, 1.0, std::abs(x[1])});
    const auto vs = check_canonical(sc.transform(), cs);
    EXPECT_FALSE(vs.canonical);
    EXPECT_NEAR(vs.max_residual, wc, 1e-15);

    EXPECT_THROW(check_canonical(rot.transform(), {}), Error);
}

TEST(Canonical, CompositionOfCanonicalMapsIsCanonical) {
    const auto rot = corpus::get("rotation").transform();
    const auto shear = map1(sym1, {"q1", "p1 + q1^2"});
    const auto samples = corpus::get("rotation").samples(40);
    ASSERT_TRUE(check_canonical(shear, samples).canonical);
    const auto v = check_canonical(compose(rot, shear), samples);
    EXPECT_TRUE(v.canonical);
    EXPECT_LE(v.max_residual, 2e-8);
}

TEST(KGradient, Examples) {
    const auto h = parse("p1^2/2", sym1.names());
    const std::vector<double> x = {0.4, 1.3};
    const auto id = k_gradient_values(TransformMap::identity(sym1), h, x);
    EXPECT_EQ(id, gradient(h, x));
    const auto k = k_gradient_values(map1(sym1, {"q1", "p1^3/3"}), h, x);
    EXPECT_EQ(k[0], 0.0);
    EXPECT_DOUBLE_EQ(k[1], 1.3 * 1.3 * 1.3);
    EXPECT_THROW(k_gradient_values(corpus::get("contact_scale_2").transform(),
                                   parse("p1", corpus::contact1.names()), std::vector<double>{0, 1, 0}),
                 WrongGeometry);
}

TEST(KGradient, ShearControlHasCurl) {
    // dK/dq = 0, dK/dp = [q,p] H_p = q p, not closed
    const auto h = parse("p1^2/2", sym1.names());
    const auto f = map1(sym1, {"q1", "q1*p1"});
    const std::vector<double> x = {1.0, 1.0};
    const auto k = k_gradient_values(f, h, x);
    EXPECT_DOUBLE_EQ(k[0], 0.0);
    EXPECT_DOUBLE_EQ(k[1], 1.0);
    EXPECT_DOUBLE_EQ(closedness_residual(sym1, k_gradient_dual(f, h, x)), 1.0);  // d(q p)/dq = p
}

TEST(Canonoid, SymplecticVerdicts) {
    for (const auto& name : {"cube", "cubic_plus", "exp", "identity", "rotation", "diagonal2"}) {
        const auto cs = corpus::get(name);
        const auto v = check_canonoid(cs.transform(), cs.h(), cs.samples(40));
        EXPECT_TRUE(v.canonoid) << name;
        EXPECT_LT(v.max_residual, 1e-10) << name;
        EXPECT_EQ(v.k_probe.size(), 40u);
    }
    const auto bad = corpus::get("shear_control");
    const auto v = check_canonoid(bad.transform(), bad.h(), bad.samples(40));
    EXPECT_FALSE(v.canonoid);
    EXPECT_GT(v.max_residual, 1e-2);
    EXPECT_TRUE(v.k_probe.empty());
}

TEST(Canonoid, CanonicalImpliesCanonoidWithKEqualH) {
    for (const auto& cs : corpus::all()) {
        if (!cs.canonical) continue;
        const auto samples = cs.samples(30);
        ASSERT_TRUE(check_canonical(cs.transform(), samples).canonical);
        const auto v = check_canonoid(cs.transform(), cs.h(), samples, 1e-8, samples.front());
        EXPECT_TRUE(v.canonoid) << cs.name;
        const double h0 = eval<double>(cs.h(), samples.front());
        for (std::size_t i = 0; i < samples.size(); ++i)
            EXPECT_NEAR(v.k_probe[i], eval<double>(cs.h(), samples[i]) - h0, 1e-10) << cs.name;
    }
    // contact kinds: the identity gives K = H exactly
    for (const auto* g : {&corpus::contact1, &corpus::cocontact1}) {
        const auto h = parse("p1^2/2 + q1^2/2 + z", g->names());
        std::vector<std::vector<double>> xs = {std::vector<double>(g->dimension(), 0.3),
                                               std::vector<double>(g->dimension(), -0.7)};
        const auto v = check_canonoid(TransformMap::identity(*g), h, xs);
        EXPECT_TRUE(v.canonoid);
        EXPECT_NEAR(v.k_probe[1], eval<double>(h, xs[1]), 1e-14);
    }
}

TEST(Canonoid, InvariantUnderConstantShiftOfH) {
    for (const auto& name : {"cube", "shear_control", "coupled2"}) {
        const auto cs = corpus::get(name);
        const auto samples = cs.samples(20);
        const auto h2 = parse(cs.hamiltonian + " + 7.5", cs.g.names());
        const auto a = check_canonoid(cs.transform(), cs.h(), samples);
        const auto b = check_canonoid(cs.transform(), h2, samples);
        EXPECT_EQ(a.canonoid, b.canonoid) << name;
        EXPECT_EQ(a.max_residual, b.max_residual) << name;
    }
}

TEST(Canonoid, CosymplecticExamples) {
    const auto dec = corpus::get("cosym_decoupled");
    const auto v = check_canonoid(dec.transform(), dec.h(), dec.samples(40));
    EXPECT_TRUE(v.canonoid);
    EXPECT_LT(v.max_residual, 1e-8);
    const auto sh = corpus::get("cosym_shift");
    EXPECT_TRUE(check_canonoid(sh.transform(), sh.h(), sh.samples(40)).canonoid);
    // the n = 1 version of the decoupled example is not canonoid: d/dp (p^2 t) != 0
    const auto f1 = map1(corpus::cosym1, {"q1", "p1^3/3", "t"});
    const auto h1 = parse("p1^2/2 + t*q1", corpus::cosym1.names());
    EXPECT_FALSE(check_canonoid(f1, h1, {{0.2, 0.8, 1.0}}).canonoid);
}

TEST(Canonoid, ContactScalingGivesKEqualsCH) {
    for (double c : {0.5, 2.0, 3.0}) {
        for (const auto& prefix : {"contact_scale_", "cocontact_scale_"}) {
            const auto cs = corpus::get(prefix + detail::format_number(c));
            const auto samples = cs.samples(40);
            const auto v = check_canonoid(cs.transform(), cs.h(), samples);
            EXPECT_TRUE(v.canonoid) << cs.name;
            EXPECT_LT(v.max_residual, 1e-10) << cs.name;
            for (std::size_t i = 0; i < samples.size(); ++i)
                EXPECT_NEAR(v.k_probe[i], c * eval<double>(cs.h(), samples[i]), 1e-12) << cs.name;
        }
    }
}

TEST(Canonoid, ContactNegativeControlMatchesSymbolicResidual) {
    // sympy: residual vector (0.5, -0.3, 0) and K = 0.26 at (0.5, 0.3, 0.2)
    const auto cs = corpus::get("contact_control");
    const auto s = contact_canonoid_sample(cs.transform(), cs.h(), std::vector<double>{0.5, 0.3, 0.2});
    EXPECT_NEAR(s.two_form_residual, 0.5, 1e-14);
    EXPECT_NEAR(s.k, 0.26, 1e-15);
    EXPECT_FALSE(check_canonoid(cs.transform(), cs.h(), cs.samples(20)).canonoid);
}

TEST(Canonoid, SingularReebIsReported) {
    // dtheta = 0 and theta = dz on a 3-chart: L + theta theta^T has rank 1
    Matrix<double> zero(3, 3);
    const std::vector<double> th = {0.0, 0.0, 1.0};
    EXPECT_THROW(solve_reeb(zero, th, std::nullopt), SingularReeb);
    Matrix<double> w(3, 3);
    w(0, 1) = 1.0;
    w(1, 0) = -1.0;
    const auto r = solve_reeb(w, th, std::nullopt);
    EXPECT_EQ(r.reeb_z, (std::vector<double>{0.0, 0.0, 1.0}));
    EXPECT_FALSE(r.reeb_t.has_value());
}

TEST(RecoverK, Examples) {
    const auto h = parse("p1^2/2", sym1.names());
    const std::vector<double> base = {0.0, 0.0};
    const auto cube = map1(sym1, {"q1", "p1^3/3"});
    for (const auto& x : std::vector<std::vector<double>>{{0.3, 1.2}, {-2.0, 2.5}, {1.0, -0.7}})
        EXPECT_NEAR(recover_K(cube, h, x, base), std::pow(x[1], 4) / 4, 1e-10);
    const auto id = TransformMap::identity(sym1);
    const std::vector<double> b2 = {0.5, 0.5}, x2 = {-1.0, 2.0};
    EXPECT_NEAR(recover_K(id, h, x2, b2), eval<double>(h, x2) - eval<double>(h, b2), 1e-12);
    const auto sc = corpus::get("contact_scale_2");
    EXPECT_NEAR(recover_K(sc.transform(), sc.h(), std::vector<double>{1, 1, 0}, std::vector<double>{0, 0, 0}), 2.0,
                1e-15);
    EXPECT_THROW(recover_K(map1(sym1, {"q1", "q1*p1"}), h, std::vector<double>{1.0, 1.0}, std::vector<double>{0.5, 0.5}),
                 NonCanonoid);
}

TEST(RecoverK, CosymplecticTimeCompletion) {
    // K = t q1 + p1^2/2 + p2^4/4 up to a function of t; with K = 0 on the base
    // slice the completion gives dK/dt = q1 - q1(base) = q1.
    const auto dec = corpus::get("cosym_decoupled");
    const std::vector<double> x = {0.7, -0.3, 0.4, 1.1, 2.5};
    const auto kg = candidate_K_gradient(dec.transform(), dec.h(), x);
    ASSERT_TRUE(kg.dt.has_value());
    EXPECT_NEAR(*kg.dt, 0.7, 1e-12);
    EXPECT_NEAR(kg.x_block[0], 2.5, 1e-14);
    EXPECT_NEAR(kg.x_block[3], std::pow(1.1, 3), 1e-14);
    const std::vector<double> base = {0.0, 0.0, 0.0, 0.0, 99.0};
    EXPECT_NEAR(recover_K(dec.transform(), dec.h(), x, base), 2.5 * 0.7 + 0.08 + std::pow(1.1, 4) / 4, 1e-10);
    EXPECT_FALSE(candidate_K_gradient(corpus::get("cube").transform(), corpus::get("cube").h(),
                                      std::vector<double>{0.1, 1.0})
                     .dt.has_value());
}
