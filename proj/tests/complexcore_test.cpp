#include <gtest/gtest.h>

#include <random>

#include "merimm/rational.hpp"
#include "merimm/sphere.hpp"
#include "test_support.hpp"

using namespace merimm;
using merimm::testing::separated_points;

namespace {

const cplx I(0.0, 1.0);

RationalMap xi_example() {
    // (z+2) / (z^2 (z-1)^2)
    const std::vector<cplx> den_roots{0.0, 0.0, 1.0, 1.0};
    return RationalMap(ComplexPolynomial({2.0, 1.0}), ComplexPolynomial::from_roots(den_roots));
}

}  // namespace

TEST(Eval, PolynomialRoot) {
    ComplexPolynomial p({1.0, 0.0, 1.0});
    auto v = RationalMap(p)(I);
    ASSERT_TRUE(v.is_finite());
    EXPECT_LT(std::abs(v.value()), 1e-15);
}

TEST(Eval, SimplePoleGivesInfinity) {
    const cplx a(0.3, -0.2);
    RationalMap f(ComplexPolynomial({1.0}), ComplexPolynomial::linear_factor(a));
    EXPECT_TRUE(f(a).is_infinite());
}

TEST(Eval, HandEvaluatedRational) {
    auto v = xi_example()(2.0);
    ASSERT_TRUE(v.is_finite());
    EXPECT_NEAR(std::abs(v.value() - 1.0), 0.0, 1e-14);
}

TEST(Eval, UnreducedFractionIsAnError) {
    auto f = RationalMap::unreduced(ComplexPolynomial::linear_factor(0.5), ComplexPolynomial::linear_factor(0.5));
    try {
        (void)f(0.5);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
}

TEST(Derivative, Monomial) {
    auto d = derivative(ComplexPolynomial::monomial(3));
    EXPECT_EQ(d, ComplexPolynomial({0.0, 0.0, 3.0}));
}

TEST(Derivative, QuinticPerturbation) {
    auto d = derivative(ComplexPolynomial({0.0, 1.0, 0.0, 0.0, 0.0, 0.1}));
    ASSERT_EQ(d.degree(), 4);
    EXPECT_NEAR(std::abs(d.coeff(0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d.coeff(4) - 0.5), 0.0, 1e-15);
}

TEST(Derivative, SimplePoleBecomesDoublePole) {
    const cplx a(0.3, 0.0);
    RationalMap f(ComplexPolynomial({1.0}), ComplexPolynomial::linear_factor(a));
    RationalMap d = derivative(f);
    auto poles = pole_set(d);
    ASSERT_EQ(poles.size(), 1u);
    EXPECT_EQ(poles.entries[0].order, 2);
    EXPECT_NEAR(std::abs(poles.entries[0].location - a), 0.0, 1e-7);
    for (cplx z : {cplx(1.0, 1.0), cplx(-0.4, 0.2), cplx(2.0, 0.0)}) {
        cplx expect = -1.0 / ((z - a) * (z - a));
        EXPECT_NEAR(std::abs(d.value(z) - expect), 0.0, 1e-13);
    }
    EXPECT_NEAR(std::abs(residue(d, a)), 0.0, 1e-12);
}

TEST(Derivative, MatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto rr = merimm::testing::random_rational(rng, 5);
        RationalMap d = derivative(rr.f);
        cplx z(2.7, -2.9);  // outside the generating disc
        const double h = 1e-5;
        cplx fd = (rr.f.value(z + h) - rr.f.value(z - h)) / (2.0 * h);
        EXPECT_NEAR(std::abs(d.value(z) - fd), 0.0, 1e-6 * (1.0 + std::abs(fd)));
    }
}

TEST(Roots, Quadratic) {
    auto r = roots(ComplexPolynomial({-1.0, 0.0, 1.0}));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(std::abs(r[0].value + 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(r[1].value - 1.0), 0.0, 1e-14);
    EXPECT_EQ(r[0].multiplicity, 1);
}

TEST(Roots, DoubleRootMerged) {
    auto r = roots(ComplexPolynomial({0.09, -0.6, 1.0}));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].multiplicity, 2);
    EXPECT_NEAR(std::abs(r[0].value - 0.3), 0.0, 1e-10);
}

TEST(Roots, TripleAndDoubleRoots) {
    const std::vector<cplx> rs{0.5, 0.5, 0.5, cplx(-1.0, 1.0), cplx(-1.0, 1.0), 2.0};
    auto r = roots(ComplexPolynomial::from_roots(rs));
    ASSERT_EQ(r.size(), 3u);
    int total = 0;
    for (auto& x : r) total += x.multiplicity;
    EXPECT_EQ(total, 6);
}

TEST(Roots, QuarticOfModulusFourthRootTwo) {
    // 1 + 0.5 z^4 = 0  <=>  z^4 = -2
    auto r = roots(ComplexPolynomial({1.0, 0.0, 0.0, 0.0, 0.5}));
    ASSERT_EQ(r.size(), 4u);
    for (auto& x : r) {
        EXPECT_EQ(x.multiplicity, 1);
        EXPECT_NEAR(std::abs(x.value), std::pow(2.0, 0.25), 1e-12);
        EXPECT_NEAR(std::abs(std::pow(x.value, 4) + 2.0), 0.0, 1e-12);
    }
}

TEST(Roots, DegreeZeroIsAnInputError) {
    EXPECT_THROW(roots(ComplexPolynomial({3.0})), Error);
}

TEST(Roots, ExpandRoundTripProperty) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> deg(1, 12);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = deg(rng);
        auto rs = separated_points(rng, n, 10.0, 1.0);
        auto found = roots(ComplexPolynomial::from_roots(rs, merimm::testing::random_unit(rng)));
        ASSERT_EQ(found.size(), rs.size());
        for (cplx r : rs) {
            double best = 1e300;
            for (auto& f : found) best = std::min(best, std::abs(f.value - r));
            EXPECT_LT(best, 1e-8) << "trial " << trial << " root " << r;
        }
    }
}

TEST(Residue, SimplePole) {
    const cplx a(0.2, 0.7);
    RationalMap f(ComplexPolynomial({1.0}), ComplexPolynomial::linear_factor(a));
    EXPECT_NEAR(std::abs(residue(f, a) - 1.0), 0.0, 1e-14);
}

TEST(Residue, DerivativeOfSimplePoleVanishes) {
    const cplx a(0.3, 0.0);
    RationalMap f(ComplexPolynomial({-1.0}), ComplexPolynomial::from_roots(std::vector<cplx>{a, a}));
    EXPECT_NEAR(std::abs(residue(f, a)), 0.0, 1e-14);
}

TEST(Residue, LaurentOracle) {
    // (z+2)(1-z)^{-2} = 2 + 5z + 8z^2 + ...  so c_{-1} of (z+2)/(z^2 (z-1)^2) at 0 is 5
    EXPECT_NEAR(std::abs(residue(xi_example(), 0.0) - 5.0), 0.0, 1e-12);
    // at z = 1: d/dz (z+2)/z^2 = 1/z^2 - 2(z+2)/z^3 = 1 - 6 = -5
    EXPECT_NEAR(std::abs(residue(xi_example(), 1.0) + 5.0), 0.0, 1e-10);
}

TEST(Residue, NonPoleIsZero) { EXPECT_EQ(residue(xi_example(), 3.0), cplx(0.0)); }

TEST(Residue, ClosedFormForDoublePoleAgreesWithLaurent) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto pts = separated_points(rng, 4, 1.5, 0.3);
        cplx a = pts[0];
        std::vector<cplx> theta_roots{a, a};
        for (int k = 1; k < 4; ++k) {
            theta_roots.push_back(pts[k]);
            theta_roots.push_back(pts[k]);
        }
        auto hroots = separated_points(rng, 3, 1.5, 0.3, pts);
        ComplexPolynomial h = ComplexPolynomial::from_roots(hroots, merimm::testing::random_unit(rng));
        ComplexPolynomial theta = ComplexPolynomial::from_roots(theta_roots);
        ComplexPolynomial g = ComplexPolynomial::from_roots(std::vector<cplx>(theta_roots.begin() + 2, theta_roots.end()));
        cplx ga = g(a), gpa = g.derivative()(a);
        cplx closed = (ga * h.derivative()(a) - gpa * h(a)) / (ga * ga);
        cplx laurent = residue(RationalMap::unreduced(h, theta), a);
        EXPECT_NEAR(std::abs(closed - laurent), 0.0, 1e-10 * std::max(1.0, std::abs(closed)));
    }
}

TEST(Residue, DerivativesHaveVanishingResiduesProperty) {
    std::mt19937_64 rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        auto rr = merimm::testing::random_rational(rng, 6);
        RationalMap d = derivative(rr.f);
        for (cplx a : rr.poles) {
            EXPECT_LT(std::abs(residue(d, a)), 1e-10) << "trial " << trial;
            ++checked;
        }
    }
    EXPECT_GT(checked, 500);
}

TEST(PoleSet, Examples) {
    RationalMap f1(ComplexPolynomial({1.0}), ComplexPolynomial::linear_factor(0.3));
    auto p1 = pole_set(f1);
    ASSERT_EQ(p1.size(), 1u);
    EXPECT_NEAR(std::abs(p1.entries[0].location - 0.3), 0.0, 1e-15);
    EXPECT_EQ(p1.entries[0].order, 1);

    EXPECT_TRUE(pole_set(RationalMap(ComplexPolynomial({1.0, 2.0, 3.0}))).empty());

    RationalMap f3(ComplexPolynomial({1.0}), ComplexPolynomial::from_roots(std::vector<cplx>{1.0, 1.0, -2.0}));
    auto p3 = pole_set(f3);
    ASSERT_EQ(p3.size(), 2u);
    EXPECT_NEAR(std::abs(p3.entries[0].location + 2.0), 0.0, 1e-12);
    EXPECT_EQ(p3.entries[0].order, 1);
    EXPECT_NEAR(std::abs(p3.entries[1].location - 1.0), 0.0, 1e-8);
    EXPECT_EQ(p3.entries[1].order, 2);
}

TEST(RationalMap, CommonFactorsAreCancelled) {
    // (z-1)(z+3) / ((z-1)^2 (z-2))  ->  (z+3) / ((z-1)(z-2))
    RationalMap f(ComplexPolynomial::from_roots(std::vector<cplx>{1.0, -3.0}),
                  ComplexPolynomial::from_roots(std::vector<cplx>{1.0, 1.0, 2.0}));
    EXPECT_EQ(f.numerator().degree(), 1);
    EXPECT_EQ(f.denominator().degree(), 2);
    EXPECT_NEAR(std::abs(f.value(0.0) - 1.5), 0.0, 1e-12);
}

TEST(Chordal, Examples) {
    EXPECT_EQ(chordal_distance(cplx(0.0), cplx(0.0)), 0.0);
    EXPECT_DOUBLE_EQ(chordal_distance(cplx(0.0), SpherePoint::infinity()), 2.0);
    // 2 |1 - (-1)| / sqrt(2 * 2) = 2: the two points are antipodal
    EXPECT_DOUBLE_EQ(chordal_distance(cplx(1.0), cplx(-1.0)), 2.0);
    EXPECT_DOUBLE_EQ(chordal_distance(SpherePoint::infinity(), SpherePoint::infinity()), 0.0);
}

TEST(Chordal, SymmetricAndTriangleProperty) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> coin(0, 9);
    auto pick = [&]() -> SpherePoint {
        if (coin(rng) == 0) return SpherePoint::infinity();
        return cplx(u(rng), u(rng));
    };
    for (int trial = 0; trial < 2000; ++trial) {
        SpherePoint a = pick(), b = pick(), c = pick();
        double ab = chordal_distance(a, b), bc = chordal_distance(b, c), ac = chordal_distance(a, c);
        EXPECT_DOUBLE_EQ(ab, chordal_distance(b, a));
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 2.0);
        EXPECT_LE(ac, ab + bc + 1e-12);
    }
}
