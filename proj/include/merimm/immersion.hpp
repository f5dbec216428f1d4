#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "merimm/contour.hpp"
#include "merimm/error.hpp"
#include "merimm/rational.hpp"
#include "merimm/sphere.hpp"
#include "merimm/tolerances.hpp"

namespace merimm {

enum class Target { C, CP1 };

inline const char* target_name(Target t) { return t == Target::C ? "C" : "CP1"; }

/// A disc with finitely many disjoint closed sub-discs removed.
struct CircularDomain {
    Disc outer;
    std::vector<Disc> holes;

    CircularDomain() = default;
    CircularDomain(Disc o) : outer(o) {}  // NOLINT: a disc is a domain without holes
    CircularDomain(Disc o, std::vector<Disc> h) : outer(o), holes(std::move(h)) {
        for (std::size_t i = 0; i < holes.size(); ++i) {
            if (!outer.contains_disc(holes[i])) throw input_error("domain: hole not inside the outer disc");
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs(holes[i].center - holes[j].center) <= holes[i].radius + holes[j].radius)
                    throw input_error("domain: holes intersect");
        }
    }

    bool contains(cplx z) const {
        if (!outer.contains_open(z)) return false;
        for (const Disc& h : holes)
            if (h.contains_closed(z)) return false;
        return true;
    }

    /// Boundary circles: the outer circle first, then the holes in order.
    std::vector<Contour> boundary(int samples = 256) const {
        std::vector<Contour> out{Contour::circle(outer.center, outer.radius, samples)};
        for (const Disc& h : holes) out.push_back(Contour::circle(h.center, h.radius, samples));
        return out;
    }

    double boundary_distance(cplx z) const {
        double d = std::abs(std::abs(z - outer.center) - outer.radius);
        for (const Disc& h : holes) d = std::min(d, std::abs(std::abs(z - h.center) - h.radius));
        return d;
    }

    friend bool operator==(const CircularDomain&, const CircularDomain&) = default;
};

struct ImmersionCertificate {
    bool valid = false;
    PoleSet poles_inside;
    long derivative_zero_count = 0;
    double boundary_clearance = std::numeric_limits<double>::infinity();
    Target target = Target::CP1;
};

struct HomotopyClass {
    std::vector<long> z_class;
    std::vector<int> mod2_class;
    Target target = Target::CP1;
    friend bool operator==(const HomotopyClass&, const HomotopyClass&) = default;
};

/// Fiber component of the lift in the frame d/dz: f'.
inline RationalMap lift_derivative(const RationalMap& f, const Tolerances& tol = default_tolerances()) {
    return derivative(f, tol);
}

namespace detail {

inline long domain_count(const RationalMap& h, const CircularDomain& d, const Tolerances& tol) {
    const std::vector<Contour> b = d.boundary();
    long n = argument_principle_count(h, b[0], tol);
    for (std::size_t i = 1; i < b.size(); ++i) n -= argument_principle_count(h, b[i], tol);
    return n;
}

}  // namespace detail

/// Immersion verdict for f on D. Zeros of f' in D are counted twice, by
/// root filtering and by the argument principle for h = f' * Theta with
/// Theta = prod over poles inside of (z - a)^{order + 1}.
inline ImmersionCertificate verify_immersion(const RationalMap& f, const CircularDomain& d, Target target,
                                             const Tolerances& tol = default_tolerances()) {
    const RationalMap fp = derivative(f, tol);
    if (fp.numerator().is_zero()) throw precondition_error("verify: derivative vanishes identically");

    ImmersionCertificate cert;
    cert.target = target;
    const double clearance = tol.clearance * 2.0 * d.outer.radius;
    const PoleSet poles = pole_set(f, tol);
    const std::vector<Root> fzeros = zeros(fp, tol);
    auto check_boundary = [&](cplx z) {
        const double dist = d.boundary_distance(z);
        if (dist < clearance) throw precondition_error("verify: singularity on boundary");
        cert.boundary_clearance = std::min(cert.boundary_clearance, dist);
    };
    for (const Pole& p : poles.entries) {
        check_boundary(p.location);
        if (d.contains(p.location)) cert.poles_inside.entries.push_back(p);
    }
    long by_roots = 0;
    for (const Root& r : fzeros) {
        check_boundary(r.value);
        if (d.contains(r.value)) by_roots += r.multiplicity;
    }

    std::vector<cplx> theta_roots;
    for (const Pole& p : cert.poles_inside.entries)
        for (int k = 0; k <= p.order; ++k) theta_roots.push_back(p.location);
    const RationalMap h = RationalMap::unreduced(fp.numerator() * ComplexPolynomial::from_roots(theta_roots),
                                                 fp.denominator());
    const long by_contour = detail::domain_count(h, d, tol);
    if (by_contour != by_roots)
        throw internal_error("verify: zero counts disagree (roots " + std::to_string(by_roots) + ", contour " +
                             std::to_string(by_contour) + ")");
    cert.derivative_zero_count = by_roots;

    bool poles_ok = target == Target::C ? cert.poles_inside.empty() : cert.poles_inside.all_simple();
    cert.valid = poles_ok && cert.derivative_zero_count == 0;
    return cert;
}

/// Winding of the chart-transition factor -z^{-2} along gamma.
inline long chart_transition_winding(const Contour& gamma, const Tolerances& tol = default_tolerances()) {
    if (gamma.distance_to(0.0) < contour_clearance(gamma, tol))
        throw precondition_error("chart_transition_winding: contour passes through 0");
    return winding_number([](cplx z) { return -1.0 / (z * z); }, gamma, tol);
}

/// One circle per hole, concentric with it, halfway between the hole and
/// the nearest other boundary circle.
inline std::vector<Contour> basis_loops(const CircularDomain& d, int samples = 256) {
    std::vector<Contour> out;
    for (std::size_t i = 0; i < d.holes.size(); ++i) {
        const Disc& h = d.holes[i];
        double gap = d.outer.radius - std::abs(h.center - d.outer.center) - h.radius;
        for (std::size_t j = 0; j < d.holes.size(); ++j)
            if (j != i) gap = std::min(gap, std::abs(h.center - d.holes[j].center) - d.holes[j].radius - h.radius);
        out.push_back(Contour::circle(h.center, h.radius + 0.5 * gap, samples));
    }
    return out;
}

inline HomotopyClass classify(const RationalMap& f, const CircularDomain& d, Target target,
                              const Tolerances& tol = default_tolerances()) {
    const ImmersionCertificate cert = verify_immersion(f, d, target, tol);
    if (!cert.valid) throw precondition_error("classify: not an immersion");
    const RationalMap fp = lift_derivative(f, tol);
    HomotopyClass c;
    c.target = target;
    for (const Contour& loop : basis_loops(d)) {
        for (const Pole& p : cert.poles_inside.entries)
            if (loop.distance_to(p.location) < contour_clearance(loop, tol))
                throw precondition_error("classify: basis loop passes through a pole");
        const long w = winding_number([&](cplx z) { return fp.value(z); }, loop, tol);
        c.z_class.push_back(w);
        c.mod2_class.push_back(static_cast<int>(((w % 2) + 2) % 2));
    }
    return c;
}

inline bool same_component(const RationalMap& f, const RationalMap& g, const CircularDomain& d, Target target,
                           const Tolerances& tol = default_tolerances()) {
    const HomotopyClass a = classify(f, d, target, tol), b = classify(g, d, target, tol);
    return target == Target::C ? a.z_class == b.z_class : a.mod2_class == b.mod2_class;
}

/// 1-jet data at x1: value a, fiber v of the lift in the frame V = c d/dz.
struct FormalSeed {
    cplx x1{};
    SpherePoint a{};
    cplx v{1.0};
    cplx c{1.0};

    void validate() const {
        if (v == cplx{} || c == cplx{}) throw input_error("seed: v and c must be nonzero");
    }
};

/// Affine disc through the seed: a + v/c (z - x1) in the chart containing a.
inline RationalMap seed_disc(const FormalSeed& s) {
    s.validate();
    const ComplexPolynomial lin{-s.x1 * s.v / s.c, s.v / s.c};
    if (s.a.is_finite()) return RationalMap(lin + ComplexPolynomial::constant(s.a.value()));
    // 1/f = v/c (z - x1)
    return RationalMap::from_poles(ComplexPolynomial::constant(s.c / s.v), {{s.x1, 1}});
}

namespace detail {

/// Seed in the chart zeta = 1/w around a finite nonzero a: the fiber
/// transforms by d/dzeta = -w^2 d/dw, so v_zeta = -v / a^2.
inline RationalMap infinity_chart_seed(const FormalSeed& s) {
    if (s.a.is_infinite()) return seed_disc(s);
    const cplx a = s.a.value();
    const cplx vz = -s.v / (a * a);
    const ComplexPolynomial zeta{1.0 / a - s.x1 * vz / s.c, vz / s.c};
    return RationalMap(ComplexPolynomial::constant(1.0), zeta);
}

}  // namespace detail

inline constexpr double kSeedBandLow = 0.01;
inline constexpr double kSeedBandHigh = 100.0;

/// f_p = chi(p) g_p + (1 - chi(p)) h_p with g_p the finite-chart seed and
/// h_p the seed built in the chart around infinity.
inline std::vector<RationalMap> seed_disc_family(const std::vector<FormalSeed>& seeds, const std::vector<double>& chi) {
    if (seeds.size() != chi.size()) throw input_error("seed family: seeds and blend values differ in length");
    std::vector<RationalMap> out;
    out.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const FormalSeed& s = seeds[i];
        const double x = chi[i];
        if (!(x >= 0.0 && x <= 1.0)) throw input_error("seed family: blend value outside [0, 1]");
        s.validate();
        const bool finite_ok = s.a.is_finite();
        const bool inf_ok = s.a.is_infinite() || s.a.value() != cplx{};
        if (x == 1.0) {
            if (!finite_ok) throw precondition_error("seed family: chi = 1 at a point with a = infinity");
            out.push_back(seed_disc(s));
            continue;
        }
        if (x == 0.0) {
            if (!inf_ok) throw precondition_error("seed family: chi = 0 at a point with a = 0");
            out.push_back(detail::infinity_chart_seed(s));
            continue;
        }
        const double m = s.a.is_finite() ? std::abs(s.a.value()) : std::numeric_limits<double>::infinity();
        if (!(m >= kSeedBandLow && m <= kSeedBandHigh))
            throw precondition_error("seed family: chi strictly between 0 and 1 where only one chart seed exists");
        out.push_back(x * seed_disc(s) + (1.0 - x) * detail::infinity_chart_seed(s));
    }
    return out;
}

}  // namespace merimm
