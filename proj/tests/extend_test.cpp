#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "merimm/extend.hpp"
#include "test_support.hpp"

using namespace merimm;
using merimm::testing::separated_points;

namespace {

const Disc kD0(0.0, 1.0), kD1(0.0, 2.0);

RationalMap simple_pole(cplx a) {
    return RationalMap(ComplexPolynomial::constant(1.0), ComplexPolynomial::linear_factor(a));
}

RationalMap quintic() { return RationalMap(ComplexPolynomial{0.0, 1.0, 0.0, 0.0, 0.0, 0.1}); }

RationalMap pole_plus_linear() { return simple_pole(0.3) + RationalMap(ComplexPolynomial{0.0, 0.5}); }

double max_deviation(const IntegralImmersion& F, const RationalMap& f, const std::vector<cplx>& pts) {
    double m = 0.0;
    for (cplx z : pts) m = std::max(m, std::abs(evaluate(F, z).value() - f.value(z)));
    return m;
}

}  // namespace

TEST(ParamGrid, HatWeightsSumToOne) {
    const ParamGrid g = ParamGrid({9, 5}).with_stride(2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double s = 0.0;
        for (auto [node, w] : g.weights(i)) {
            EXPECT_GE(w, 0.0);
            EXPECT_TRUE(g.is_node(node));
            s += w;
        }
        EXPECT_NEAR(s, 1.0, 1e-15);
    }
    EXPECT_EQ(g.nodes().size(), 5u * 3u);
    // support of a node stays within one stride of it
    for (std::size_t node : g.nodes())
        for (std::size_t i : g.support(node)) {
            const auto a = g.multi_index(i), b = g.multi_index(node);
            for (std::size_t d = 0; d < 2; ++d) EXPECT_LT(std::abs(a[d] - b[d]), 2);
        }
    EXPECT_THROW(ParamGrid({4}).with_stride(2), Error);
    EXPECT_THROW(ParamGrid({2, 2, 2}), Error);
}

TEST(ResidueTargets, Examples) {
    EXPECT_EQ(residue_targets(std::vector<cplx>{cplx(0.4, 0.1)}), std::vector<cplx>{0.0});
    const auto c2 = residue_targets(std::vector<cplx>{0.0, 1.0});
    EXPECT_NEAR(std::abs(c2[0] + 2.0), 0.0, 1e-15);
    const auto c3 = residue_targets(std::vector<cplx>{0.0, 1.0, -1.0});
    EXPECT_NEAR(std::abs(c3[0]), 0.0, 1e-15);
    EXPECT_THROW(residue_targets(std::vector<cplx>{0.5, 0.5}), Error);
    PoleSet dbl;
    dbl.entries = {{0.1, 2}};
    EXPECT_THROW(residue_targets(dbl), Error);
}

TEST(ResidueTargets, MatchLogDerivativeOfG) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto a = separated_points(rng, 4, 1.5, 0.2);
        const auto c = residue_targets(a);
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::vector<cplx> others;
            for (std::size_t j = 0; j < a.size(); ++j)
                if (j != i) others.insert(others.end(), {a[j], a[j]});
            const ComplexPolynomial g = ComplexPolynomial::from_roots(others);
            EXPECT_LT(std::abs(c[i] - g.derivative()(a[i]) / g(a[i])), 1e-12 * std::max(1.0, std::abs(c[i])));
        }
    }
}

TEST(ConstrainedEta, ZeroDataGivesZero) {
    const EtaConstraint con({cplx(0.3)}, {0.0});
    const auto fit = constrained_eta([](cplx) { return cplx{}; }, kD0, con, 1e-10);
    EXPECT_TRUE(fit.eta.is_zero());
}

TEST(ConstrainedEta, NoPolesIsTaylorTruncation) {
    const auto eta = [](cplx z) { return std::exp(z); };
    const auto fit = constrained_eta(eta, kD0, EtaConstraint(), 1e-10);
    for (int k = 0; k <= 10; ++k) {
        double fact = 1.0;
        for (int j = 2; j <= k; ++j) fact *= j;
        EXPECT_NEAR(std::abs(fit.eta.coeff(k) - 1.0 / fact), 0.0, 1e-13) << k;
    }
    EXPECT_LT(fit.error, 1e-10);
}

TEST(ConstrainedEta, InterpolatesTargetsExactly) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 40; ++t) {
        const int m = 1 + t % 4;
        const auto a = separated_points(rng, m, 1.8, 0.2);
        std::vector<cplx> c;
        for (int i = 0; i < m; ++i) c.push_back(cplx(u(rng), u(rng)));
        const EtaConstraint con(a, c);
        // eta with the right values at the nodes that lie in the small disc
        const ComplexPolynomial base = con.lagrange;
        const ComplexFunction eta = [&](cplx z) { return base(z) + 0.2 * std::sin(z) * con.vanishing(z); };
        const auto fit = constrained_eta(eta, kD0, con, 1e-9);
        for (int i = 0; i < m; ++i)
            EXPECT_LT(std::abs(fit.eta(a[i]) - c[i]), 64.0 * 2.2e-16 * std::max(1.0, fit.eta.abs_eval(std::abs(a[i]))))
                << t << " " << i;
    }
}

TEST(ConstrainedEta, SingularSigmaRejected) {
    // eta has a pole inside the disc
    const auto eta = [](cplx z) { return 1.0 / (z - 0.2); };
    EXPECT_THROW(constrained_eta(eta, kD0, EtaConstraint(), 1e-6), Error);
}

TEST(Extend, IdentityIsExact) {
    const RationalMap f(ComplexPolynomial::monomial(1));
    const IntegralImmersion F = extend_immersion(f, kD0, kD1, 1e-3);
    EXPECT_TRUE(F.xi.is_zero());
    EXPECT_LT(max_deviation(F, f, disc_samples(kD1, 64)), 1e-12);
}

TEST(Extend, SimplePoleIsExact) {
    const RationalMap f = simple_pole(0.3);
    const IntegralImmersion F = extend_immersion(f, kD0, kD1, 1e-3);
    EXPECT_TRUE(F.xi.is_zero());
    EXPECT_NEAR(std::abs(F.h0 + 1.0), 0.0, 1e-14);
    ASSERT_EQ(F.poles.size(), 1u);
    EXPECT_NEAR(std::abs(evaluate(F, 0.9).value() - 1.0 / 0.6), 0.0, 1e-6);
    EXPECT_TRUE(evaluate(F, F.poles.entries[0].location).is_infinite());
    std::vector<cplx> pts;
    for (cplx z : disc_samples(kD1, 64))
        if (std::abs(z - 0.3) > 0.05) pts.push_back(z);
    EXPECT_LT(max_deviation(F, f, pts), 1e-8);
}

TEST(Extend, EvaluateAtBasePoint) {
    const IntegralImmersion F = extend_immersion(pole_plus_linear(), kD0, kD1, 1e-3);
    EXPECT_EQ(evaluate(F, F.z0), F.f0);
}

TEST(Extend, BasePointMovesAwayFromCentralPole) {
    const IntegralImmersion F = extend_immersion(simple_pole(cplx(0.01, 0.0)), kD0, kD1, 1e-3);
    EXPECT_NEAR(std::abs(F.z0 - cplx(-0.1, 0.0)), 0.0, 1e-15);
}

TEST(Extend, QuinticExtendsToImmersion) {
    const RationalMap f = quintic();
    // the naive extension is not an immersion on the large disc
    EXPECT_FALSE(verify_immersion(f, CircularDomain(kD1), Target::CP1).valid);
    const IntegralImmersion F = extend_immersion(f, kD0, kD1, 1e-3);
    EXPECT_LT(F.achieved_error, 1e-3);
    EXPECT_LT(chordal_error_on_circle(F, f, kD0), 1e-3);
    const auto cert = verify_integral_immersion(F);
    EXPECT_TRUE(cert.certificate.valid);
    EXPECT_EQ(cert.certificate.derivative_zero_count, 0);
    EXPECT_TRUE(cert.residues_closed.empty());
}

TEST(Extend, PoleCase) {
    const RationalMap f = pole_plus_linear();
    const IntegralImmersion F = extend_immersion(f, kD0, kD1, 1e-3);
    const auto cert = verify_integral_immersion(F);
    EXPECT_TRUE(cert.certificate.valid);
    ASSERT_EQ(F.poles.size(), 1u);
    EXPECT_NEAR(std::abs(F.poles.entries[0].location - 0.3), 0.0, 1e-12);
    EXPECT_LT(cert.max_residue, 1e-9);
    for (cplx z : {cplx(0.3, 0.01), cplx(0.31, 0.0), cplx(0.6, -0.02), cplx(0.3, -0.5)}) {
        const SpherePoint a = evaluate(F, z, 1), b = evaluate(F, z, -1);
        EXPECT_LT(std::abs(a.value() - b.value()), 1e-8) << z;
    }
    EXPECT_LT(chordal_error_on_circle(F, f, kD0), 1e-3);
}

TEST(Extend, DetourPathGeometry) {
    IntegralImmersion F;
    F.z0 = 0.0;
    F.f0 = cplx(0.0);
    F.poles.entries = {{cplx(0.5, 0.0), 1}};
    F.detour_radius = 0.1;
    F.domain = Disc(0.0, 2.0);
    for (int o : {1, -1}) {
        const auto path = integration_path(F, 1.0, o);
        ASSERT_EQ(path.size(), 3u);
        EXPECT_EQ(path[1].kind, PathPiece::Kind::arc);
        EXPECT_NEAR(std::abs(path[1].sweep), std::numbers::pi, 1e-12);
        for (const auto& p : path)
            for (double t = 0.0; t <= 1.0; t += 0.125) EXPECT_GE(std::abs(p.point(t) - 0.5), 0.1 - 1e-12);
        EXPECT_NEAR(std::abs(path.back().point(1.0) - 1.0), 0.0, 1e-15);
    }
    // end point inside the detour circle
    const auto path = integration_path(F, cplx(0.55, 0.02), 1);
    EXPECT_NEAR(std::abs(path.back().point(1.0) - cplx(0.55, 0.02)), 0.0, 1e-15);
}

TEST(Extend, RejectsHigherOrderPoles) {
    const RationalMap f = RationalMap::from_poles(ComplexPolynomial::constant(1.0), {{1.5, 2}});
    EXPECT_THROW(extend_immersion(f, kD0, kD1, 1e-3), Error);
}

TEST(Extend, RejectsNonImmersionOnSmallDisc) {
    EXPECT_THROW(extend_immersion(RationalMap(ComplexPolynomial::monomial(2)), kD0, kD1, 1e-3), Error);
}

TEST(Extend, RejectsNestingViolation) {
    EXPECT_THROW(extend_immersion(quintic(), Disc(0.0, 1.0), Disc(0.5, 1.2), 1e-3), Error);
}

TEST(Extend, BudgetExhaustionReportsAchieved) {
    Tolerances tol = default_tolerances();
    tol.degree_budget = 4;
    try {
        extend_immersion(pole_plus_linear(), kD0, kD1, 1e-9, tol);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numerical);
        EXPECT_NE(std::string(e.what()).find("achieved"), std::string::npos);
    }
}

// f = M(g) with M a random Moebius map and g = z + 0.1 z^3: g' has no zero
// on the small disc, so f is an immersion there with simple poles at the
// preimages of M's pole; g' vanishes at +-1.83i inside the large disc.
TEST(ExtendProperty, RandomMoebiusImmersions) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0), rad(0.2, 1.2), ang(0.0, 2.0 * std::numbers::pi);
    const ComplexPolynomial g{0.0, 1.0, 0.0, 0.1};
    for (int t = 0; t < 12; ++t) {
        const cplx w = std::polar(rad(rng), ang(rng));
        const cplx alpha(u(rng), u(rng)), beta(u(rng), u(rng));
        const RationalMap f(alpha * g + ComplexPolynomial::constant(beta), g - ComplexPolynomial::constant(w));
        ASSERT_TRUE(verify_immersion(f, CircularDomain(kD0), Target::CP1).valid) << t;
        const IntegralImmersion F = extend_immersion(f, kD0, kD1, 1e-3);
        const auto cert = verify_integral_immersion(F);
        EXPECT_TRUE(cert.certificate.valid) << t;
        EXPECT_LT(cert.max_residue, 1e-9) << t;
        EXPECT_LT(F.achieved_error, 1e-3);
        for (const Pole& p : F.poles.entries) {
            if (std::abs(p.location) > 1.0) continue;
            const cplx z = p.location + cplx(0.6 * F.detour_radius, 0.1 * F.detour_radius);
            const cplx a = evaluate(F, z, 1).value(), b = evaluate(F, z, -1).value();
            EXPECT_LT(std::abs(a - b), 1e-8 * std::max(1.0, std::abs(a))) << t;
        }
    }
}

TEST(ExtendFamily, ConstantFamily) {
    std::vector<RationalMap> fam(11, RationalMap(ComplexPolynomial::monomial(1)));
    std::vector<bool> q(11, false);
    q[0] = q[10] = true;
    const auto r = extend_family(fam, ParamGrid::line(11, q), kD0, kD1, 1e-3);
    for (const auto& F : r.maps) EXPECT_LT(max_deviation(F, fam[0], disc_samples(kD1, 16)), 1e-12);
}

TEST(ExtendFamily, QuinticFamily) {
    std::vector<RationalMap> fam;
    for (int k = 0; k <= 20; ++k) fam.push_back(RationalMap(ComplexPolynomial{0.0, 1.0, 0.0, 0.0, 0.0, 0.1 * k / 20.0}));
    const auto r = extend_family(fam, ParamGrid::line(21), kD0, kD1, 1e-3);
    for (std::size_t i = 0; i < fam.size(); ++i) {
        EXPECT_LT(r.errors[i], 1e-3) << i;
        EXPECT_TRUE(verify_integral_immersion(r.maps[i]).certificate.valid) << i;
    }
}

TEST(ExtendFamily, MovingPoleWithFixedEnds) {
    std::vector<RationalMap> fam;
    for (int k = 0; k <= 10; ++k) fam.push_back(simple_pole(0.3 + 0.2 * k / 10.0));
    std::vector<bool> q(11, false);
    q[0] = q[10] = true;
    const auto r = extend_family(fam, ParamGrid::line(11, q), kD0, kD1, 1e-3);
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const auto cert = verify_integral_immersion(r.maps[i]);
        EXPECT_TRUE(cert.certificate.valid) << i;
        EXPECT_LT(cert.max_residue, 1e-9) << i;
    }
    for (std::size_t i : {0u, 10u}) {
        std::vector<cplx> pts;
        for (cplx z : disc_samples(kD1, 64))
            if (std::abs(z - fam[i].denominator().coeff(0) * -1.0) > 0.05) pts.push_back(z);
        EXPECT_LT(max_deviation(r.maps[i], fam[i], pts), 1e-6) << i;
    }
}

// Q node contributions fit eta on the whole large disc, so a Q point of a
// family with nonzero eta is still reproduced there.
TEST(ExtendFamily, RelativeExactnessWithNontrivialEta) {
    std::vector<RationalMap> fam;
    for (int k = 0; k <= 4; ++k) fam.push_back(simple_pole(0.3) + RationalMap(ComplexPolynomial{0.0, 0.05 + 0.01 * k}));
    std::vector<bool> q(5, false);
    q[0] = true;
    const auto r = extend_family(fam, ParamGrid::line(5, q), kD0, kD1, 1e-3);
    std::vector<cplx> pts;
    for (cplx z : disc_samples(kD1, 64))
        if (std::abs(z - 0.3) > 0.05) pts.push_back(z);
    EXPECT_LT(max_deviation(r.maps[0], fam[0], pts), 1e-6);
    for (std::size_t i = 0; i < fam.size(); ++i) EXPECT_LT(r.errors[i], 1e-3);
}

TEST(ExtendFamily, PoleCountChangeNamesCell) {
    std::vector<RationalMap> fam;
    for (int k = 0; k <= 4; ++k) fam.push_back(simple_pole(1.65 + 0.2 * k));
    try {
        extend_family(fam, ParamGrid::line(5), kD0, kD1, 1e-3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
        EXPECT_NE(std::string(e.what()).find("[1]"), std::string::npos) << e.what();
    }
}

TEST(ExtendFamily, TwoParameterGrid) {
    const ParamGrid g({3, 3});
    std::vector<RationalMap> fam;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = g.point(i);
        fam.push_back(simple_pole(cplx(0.3 + 0.1 * p[0], 0.1 * p[1])) + RationalMap(ComplexPolynomial{0.0, 0.2}));
    }
    const auto r = extend_family(fam, g, kD0, kD1, 1e-3);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_LT(r.errors[i], 1e-3);
        EXPECT_TRUE(verify_integral_immersion(r.maps[i]).certificate.valid);
    }
}
