#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "canonoid/dynamics.hpp"
#include "corpus.hpp"

using namespace canonoid;

namespace {

Expression h_of(const GeometryKind& g, const std::string& text) { return parse(text, g.names()); }

}  // namespace

TEST(Integrate, HarmonicOscillatorPeriod) {
    const auto& g = corpus::sym1;
    const auto tr = integrate(g, h_of(g, "p1^2/2 + q1^2/2"), {1.0, 0.0}, {0.0, 2 * std::numbers::pi}, 1000, Method::Rk4);
    ASSERT_EQ(tr.states.size(), 1001u);
    EXPECT_LT(std::abs(tr.states.back()[0] - 1.0), 1e-8);
    EXPECT_LT(std::abs(tr.states.back()[1]), 1e-8);
    EXPECT_EQ(tr.times.back(), 2 * std::numbers::pi);
}

TEST(Integrate, EnergyDriftIsSmall) {
    const auto& g = corpus::sym1;
    const auto h = h_of(g, "p1^2/2 + q1^2/2 + q1^4/4");
    const auto tr = integrate(g, h, {0.8, -0.3}, {0.0, 10.0}, 10000, Method::Rk4);
    const auto rep = drift_report(tr, {{"H", expression_observable(h)}});
    EXPECT_LT(rep.at("H").max_abs_drift, 1e-6);
}

TEST(Integrate, Rk45AgreesWithClosedForm) {
    const auto& g = corpus::sym1;
    const auto tr = integrate(g, h_of(g, "p1^2/2 + q1^2/2"), {0.3, 0.4}, {0.0, 5.0}, 50, Method::Rk45);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        EXPECT_NEAR(tr.states[i][0], 0.3 * std::cos(t) + 0.4 * std::sin(t), 1e-8);
        EXPECT_NEAR(tr.states[i][1], -0.3 * std::sin(t) + 0.4 * std::cos(t), 1e-8);
    }
}

TEST(Integrate, DampedContactOscillator) {
    // q'' + 0.2 q' + q = 0 with p = q'
    const auto& g = corpus::contact1;
    const double q0 = 1.0, p0 = 0.5, w = std::sqrt(0.99);
    for (auto method : {Method::Rk4, Method::Rk45}) {
        const auto tr = integrate(g, h_of(g, "p1^2/2 + q1^2/2 + 0.2*z"), {q0, p0, 0.0}, {0.0, 10.0}, 2000, method);
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const double t = tr.times[i];
            const double a = q0, b = (p0 + 0.1 * q0) / w;
            const double e = std::exp(-0.1 * t);
            const double q = e * (a * std::cos(w * t) + b * std::sin(w * t));
            const double p = -0.1 * q + e * w * (-a * std::sin(w * t) + b * std::cos(w * t));
            worst = std::max({worst, std::abs(tr.states[i][0] - q), std::abs(tr.states[i][1] - p)});
        }
        EXPECT_LT(worst, 1e-6) << method_name(method);
    }
}

TEST(Integrate, TimeDependentKinds) {
    const auto& c = corpus::cosym1;
    const auto tr = integrate(c, h_of(c, "p1^2/2 + t*q1"), {0.0, 1.0, 0.5}, {0.5, 2.5}, 40, Method::Rk4);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        EXPECT_EQ(tr.states[i][2], t);
        EXPECT_NEAR(tr.states[i][1], 1.0 - (t * t - 0.25) / 2, 1e-12);
    }
    EXPECT_THROW(integrate(c, h_of(c, "p1"), {0.0, 1.0, 0.0}, {0.5, 1.0}, 4, Method::Rk4), Error);

    // Reeb-type flow: z decreases at unit rate
    const auto& k = corpus::contact1;
    const auto tz = integrate(k, h_of(k, "1 + 0*p1"), {0.1, 0.2, 0.3}, {0.0, 2.0}, 10, Method::Rk4);
    for (std::size_t i = 0; i < tz.times.size(); ++i) EXPECT_NEAR(tz.states[i][2], 0.3 - tz.times[i], 1e-14);

    const auto& cc = corpus::cocontact1;
    const auto tc = integrate(cc, h_of(cc, "1 + 0*p1"), {1.0, 0.1, 0.2, 0.3}, {1.0, 3.0}, 10, Method::Rk45);
    for (std::size_t i = 0; i < tc.times.size(); ++i) {
        EXPECT_EQ(tc.states[i][0], tc.times[i]);
        EXPECT_NEAR(tc.states[i][3], 0.3 - (tc.times[i] - 1.0), 1e-10);
    }
}

TEST(Integrate, ArgumentErrors) {
    const auto& g = corpus::sym1;
    const auto h = h_of(g, "p1^2/2");
    EXPECT_THROW(integrate(g, h, {0.0, 1.0}, {0.0, 1.0}, 0, Method::Rk4), Error);
    EXPECT_THROW(integrate(g, h, {0.0, 1.0}, {1.0, 1.0}, 5, Method::Rk4), Error);
    EXPECT_THROW(integrate(g, h, {0.0}, {0.0, 1.0}, 5, Method::Rk4), DimensionMismatch);
    // blow-up in finite time: q' = q^2 from 1 explodes at t = 1
    EXPECT_THROW(integrate(g, h_of(g, "p1*q1^2"), {1.0, 0.0}, {0.0, 2.0}, 20, Method::Rk45), StepFailure);
}

TEST(Drift, Statistics) {
    Trajectory tr{corpus::sym1, h_of(corpus::sym1, "p1"), {0.0, 1.0, 2.0, 3.0}, {{2, 0}, {2.5, 0}, {3, 0}, {3.5, 0}}};
    const auto rep = drift_report(tr, {{"q", [](std::span<const double> x) { return x[0]; }},
                                       {"c", [](std::span<const double>) { return 7.0; }}});
    const auto& q = rep.at("q");
    EXPECT_EQ(q.initial, 2.0);
    EXPECT_EQ(q.max_abs_drift, 1.5);
    EXPECT_EQ(q.max_rel_drift, 0.75);
    EXPECT_DOUBLE_EQ(q.slope, 0.5);
    EXPECT_EQ(rep.at("c").max_abs_drift, 0.0);
    EXPECT_EQ(rep.at("c").slope, 0.0);
    EXPECT_THROW(rep.at("missing"), Error);
}

TEST(Drift, TracesConservedForCanonoidMaps) {
    for (const auto& name : {"cube", "exp", "diagonal2", "cosym_decoupled"}) {
        const auto cs = corpus::get(name);
        auto x0 = cs.samples(1, 3).front();
        std::pair<double, double> span{0.0, 1.0};
        if (cs.g.has_time()) span.first = x0[cs.g.t()], span.second = span.first + 1.0;
        const auto tr = integrate(cs.g, cs.h(), x0, span, 200, Method::Rk4);
        std::vector<std::pair<std::string, Observable>> obs;
        for (std::size_t k = 1; k <= 4; ++k) obs.push_back({"trS" + std::to_string(k), trace_observable(cs.transform(), k)});
        const auto rep = drift_report(tr, obs);
        for (const auto& o : rep.observables) EXPECT_LT(o.max_rel_drift, 1e-9) << name << " " << o.name;
    }
}

TEST(Drift, NegativeControlDriftIsReported) {
    // F = (q, q p): S = q I, and q moves under the free flow
    const auto cs = corpus::get("shear_control");
    const auto tr = integrate(cs.g, cs.h(), {0.5, 1.0}, {0.0, 1.0}, 100, Method::Rk4);
    const auto rep = drift_report(tr, {{"trS1", trace_observable(cs.transform(), 1)}});
    EXPECT_NEAR(rep.at("trS1").max_abs_drift, 2.0, 1e-12);
    EXPECT_NEAR(rep.at("trS1").slope, 2.0, 1e-9);
}

TEST(LieDerivative, VanishesForSymplecticCanonoid) {
    for (const auto& name : {"cube", "exp", "diagonal2", "identity"}) {
        const auto cs = corpus::get(name);
        for (const auto& x : cs.samples(20)) EXPECT_LT(max_abs(lie_derivative_S(cs.transform(), cs.h(), x)), 1e-10) << name;
    }
    const auto bad = corpus::get("shear_control");
    EXPECT_GT(max_abs(lie_derivative_S(bad.transform(), bad.h(), std::vector<double>{0.2, 1.0})), 0.5);
}

TEST(LieDerivative, VanishesForContactScaling) {
    for (const auto& name : {"contact_scale_2", "contact_scale_0.5", "cocontact_scale_3"}) {
        const auto cs = corpus::get(name);
        for (const auto& x : cs.samples(20)) EXPECT_LT(max_abs(lie_derivative_S(cs.transform(), cs.h(), x)), 1e-10) << name;
    }
}

TEST(LieDerivative, CosymplecticTimeColumn) {
    const auto cs = corpus::get("cosym_decoupled");
    const auto& g = cs.g;
    for (const auto& x : cs.samples(20)) {
        const auto l = lie_derivative_S(cs.transform(), cs.h(), x);
        const auto col = cosymplectic_lie_column(cs.transform(), cs.h(), x);
        for (std::size_t a = 0; a < g.dimension(); ++a) {
            EXPECT_NEAR(l(a, g.t()), col[a], 1e-8);
            for (std::size_t b = 0; b < g.dimension(); ++b)
                if (b != g.t()) {
                    EXPECT_LT(std::abs(l(a, b)), 1e-10);
                }
        }
        EXPECT_NEAR(col[g.p(0)], -1.0, 1e-12);
    }
}

TEST(LieDerivative, TimeDependentMapBreaksTheColumnFormula) {
    // F = (q, p + t, t), H = p^2/2: the true entry is -1, the K-only formula gives 0
    const auto cs = corpus::get("cosym_shift");
    const std::vector<double> x = {0.3, 0.2, 1.0};
    const auto l = lie_derivative_S(cs.transform(), cs.h(), x);
    EXPECT_NEAR(l(0, 2), -1.0, 1e-12);
    EXPECT_NEAR(cosymplectic_lie_column(cs.transform(), cs.h(), x)[0], 0.0, 1e-12);
    EXPECT_THROW(cosymplectic_lie_column(corpus::get("cube").transform(), corpus::get("cube").h(),
                                         std::vector<double>{0.0, 1.0}),
                 WrongGeometry);
}
