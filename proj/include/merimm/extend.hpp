#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "merimm/contour.hpp"
#include "merimm/error.hpp"
#include "merimm/immersion.hpp"
#include "merimm/param_grid.hpp"
#include "merimm/polynomial.hpp"
#include "merimm/rational.hpp"
#include "merimm/sphere.hpp"
#include "merimm/tolerances.hpp"

namespace merimm {

/// c_a = g'(a)/g(a) with g = prod_{b != a} (z - b)^2, i.e. sum_{b != a} 2/(a - b).
inline std::vector<cplx> residue_targets(std::span<const cplx> poles, const Tolerances& tol = default_tolerances()) {
    std::vector<cplx> out;
    for (std::size_t i = 0; i < poles.size(); ++i) {
        cplx c{};
        for (std::size_t j = 0; j < poles.size(); ++j) {
            if (j == i) continue;
            if (std::abs(poles[i] - poles[j]) < tol.root_separation * std::max(1.0, std::abs(poles[i])))
                throw precondition_error("residue_targets: coincident poles");
            c += 2.0 / (poles[i] - poles[j]);
        }
        out.push_back(c);
    }
    return out;
}

inline std::vector<cplx> residue_targets(const PoleSet& a, const Tolerances& tol = default_tolerances()) {
    std::vector<cplx> locs;
    for (const Pole& p : a.entries) {
        if (p.order != 1) throw precondition_error("residue_targets: poles must be simple");
        locs.push_back(p.location);
    }
    return residue_targets(locs, tol);
}

/// Degrees 8, 16, ..., up to the budget (the budget itself closes the list).
inline std::vector<int> degree_schedule(int budget) {
    if (budget < 1) throw input_error("degree budget must be >= 1");
    std::vector<int> out;
    for (int d = 8; d < budget; d *= 2) out.push_back(d);
    out.push_back(budget);
    return out;
}

namespace detail {

inline constexpr int kTaylorSamples = 2048;
inline constexpr int kLaurentProbe = 32;

/// Scaled Taylor coefficients b_k = s_k r^k of fn on the circle |z - c| = r,
/// by a discrete Fourier transform of M samples.
struct TaylorSamples {
    cplx center{};
    double radius = 1.0;
    std::vector<cplx> scaled;  // k = 0 .. max_degree
    double negative_peak = 0.0;
    double peak = 0.0;

    ComplexPolynomial truncation(int degree) const {
        const std::size_t n = std::min(scaled.size(), static_cast<std::size_t>(degree) + 1);
        return from_scaled_taylor(std::span<const cplx>(scaled.data(), n), center, radius);
    }
    bool singular() const { return negative_peak > 1e-6 * std::max(1.0, peak); }
};

inline TaylorSamples sample_taylor(const ComplexFunction& fn, cplx center, double radius, int max_degree,
                                   int samples = kTaylorSamples) {
    while (samples < 4 * (max_degree + 1)) samples *= 2;
    std::vector<cplx> twiddle(static_cast<std::size_t>(samples));
    for (int j = 0; j < samples; ++j) twiddle[j] = std::polar(1.0, -2.0 * std::numbers::pi * j / samples);
    std::vector<cplx> v(static_cast<std::size_t>(samples));
    for (int j = 0; j < samples; ++j) {
        v[j] = fn(center + radius * std::conj(twiddle[j]));
        if (!finite(v[j])) throw precondition_error("constrained_eta: sigma is singular on the disc boundary");
    }
    TaylorSamples t;
    t.center = center;
    t.radius = radius;
    auto coeff = [&](int k) {
        cplx s{};
        const int m = ((k % samples) + samples) % samples;
        for (int j = 0; j < samples; ++j) s += v[j] * twiddle[(static_cast<long>(j) * m) % samples];
        return s / static_cast<double>(samples);
    };
    for (int k = 0; k <= max_degree; ++k) {
        t.scaled.push_back(coeff(k));
        t.peak = std::max(t.peak, std::abs(t.scaled.back()));
    }
    for (int k = 1; k <= kLaurentProbe; ++k) t.negative_peak = std::max(t.negative_peak, std::abs(coeff(-k)));
    return t;
}

/// sum_i c_i phi_i with phi_i the Lagrange basis on the nodes.
inline ComplexPolynomial lagrange_part(std::span<const cplx> nodes, std::span<const cplx> values) {
    ComplexPolynomial l;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (values[i] == cplx{}) continue;
        std::vector<cplx> others;
        cplx denom = 1.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (j == i) continue;
            others.push_back(nodes[j]);
            denom *= nodes[i] - nodes[j];
        }
        l += ComplexPolynomial::from_roots(others, values[i] / denom);
    }
    return l;
}

inline double sup_on_circle(const ComplexFunction& g, const Disc& d, int n = 256) {
    double m = 0.0;
    for (int k = 0; k < n; ++k) m = std::max(m, std::abs(g(d.center + std::polar(d.radius, 2.0 * std::numbers::pi * k / n))));
    return m;
}

}  // namespace detail

/// Interpolation data for the constrained problem: eta~(a_i) = c_i exactly.
struct EtaConstraint {
    std::vector<cplx> nodes;
    std::vector<cplx> targets;
    ComplexPolynomial lagrange;  // sum c_i phi_i
    ComplexPolynomial vanishing; // prod (z - a_i)

    EtaConstraint() : vanishing(ComplexPolynomial::constant(1.0)) {}
    EtaConstraint(std::vector<cplx> a, std::vector<cplx> c) : nodes(std::move(a)), targets(std::move(c)) {
        if (nodes.size() != targets.size()) throw input_error("constrained_eta: nodes and targets differ in length");
        lagrange = detail::lagrange_part(nodes, targets);
        vanishing = ComplexPolynomial::from_roots(nodes);
    }

    /// sigma = (eta - sum c phi)/prod (z - a), holomorphic where eta is.
    ComplexFunction sigma(const ComplexFunction& eta) const {
        return [l = lagrange, v = vanishing, eta](cplx z) { return (eta(z) - l(z)) / v(z); };
    }
    ComplexPolynomial assemble(const ComplexPolynomial& sigma_tilde) const { return lagrange + sigma_tilde * vanishing; }
};

struct EtaFit {
    ComplexPolynomial eta;
    int degree = 0;
    double error = 0.0;
};

/// eta~ = sum c_i phi_i + sigma~ prod (z - a_i), sigma~ the Taylor truncation
/// of sigma at the centre of disc, degree raised until sup |eta~ - eta| on
/// the boundary is below eps_eta.
inline EtaFit constrained_eta(const ComplexFunction& eta, const Disc& disc, const EtaConstraint& con, double eps_eta,
                              int degree_budget = default_tolerances().degree_budget) {
    if (!(eps_eta > 0.0)) throw input_error("constrained_eta: tolerance must be positive");
    const detail::TaylorSamples ts = detail::sample_taylor(con.sigma(eta), disc.center, disc.radius, degree_budget);
    if (ts.singular()) throw precondition_error("constrained_eta: sigma is singular on the disc (input is not an immersion)");
    EtaFit fit;
    for (int d : degree_schedule(degree_budget)) {
        fit.eta = con.assemble(ts.truncation(d));
        fit.degree = d;
        fit.error = detail::sup_on_circle([&](cplx z) { return fit.eta(z) - eta(z); }, disc);
        if (fit.error < eps_eta) return fit;
    }
    std::ostringstream os;
    os << "constrained_eta: tolerance " << eps_eta << " not reached within degree " << degree_budget
       << "; achieved " << fit.error;
    throw numerical_error(os.str());
}

/// f~(z) = f0 + int_{z0}^{z} h0 exp(xi(s)) / Theta(s) ds.
struct IntegralImmersion {
    cplx z0{};
    SpherePoint f0{};
    cplx h0{1.0};
    ComplexPolynomial xi;
    ComplexPolynomial theta = ComplexPolynomial::constant(1.0);
    PoleSet poles;
    Disc domain;
    double detour_radius = 0.0;
    int degree = 0;
    double achieved_error = 0.0;

    ComplexPolynomial eta() const { return xi.derivative(); }
    std::vector<cplx> pole_locations() const {
        std::vector<cplx> out;
        for (const Pole& p : poles.entries) out.push_back(p.location);
        return out;
    }
    cplx derivative(cplx z) const { return h0 * std::exp(xi(z)) / theta(z); }
    /// log |f~'(z)|, finite wherever f~' is finite and nonzero even when the
    /// exponential itself over- or underflows.
    double log_abs_derivative(cplx z) const { return std::log(std::abs(h0)) + xi(z).real() - std::log(std::abs(theta(z))); }
};

inline double detour_radius(std::span<const cplx> poles, const Disc& outer) {
    double r = 0.02 * outer.radius;
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = i + 1; j < poles.size(); ++j) r = std::min(r, 0.5 * std::abs(poles[i] - poles[j]));
    return r;
}

/// Straight segment from z0 to z with a circular detour of the detour
/// radius around every pole it passes; orientation +1 goes around
/// counter-clockwise, -1 clockwise.
inline std::vector<PathPiece> integration_path(const IntegralImmersion& F, cplx z, int orientation = 1) {
    if (orientation != 1 && orientation != -1) throw input_error("evaluate: orientation must be +1 or -1");
    const cplx z0 = F.z0;
    const cplx d = z - z0;
    const double delta = F.detour_radius;
    struct Hit {
        double t_in, t_out;
        bool start_inside, end_inside;
        cplx a;
    };
    std::vector<Hit> hits;
    const double dd = std::norm(d);
    for (const Pole& p : F.poles.entries) {
        const cplx a = p.location;
        const cplx w = z0 - a;
        if (dd == 0.0) continue;
        const double b = (w * std::conj(d)).real();
        const double c = std::norm(w) - delta * delta;
        const double disc = b * b - dd * c;
        if (disc <= 0.0) continue;
        const double s = std::sqrt(disc);
        const double t1 = (-b - s) / dd, t2 = (-b + s) / dd;
        if (t2 <= 0.0 || t1 >= 1.0) continue;
        hits.push_back({std::max(t1, 0.0), std::min(t2, 1.0), t1 < 0.0, t2 > 1.0, a});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.t_in < y.t_in; });

    std::vector<PathPiece> pieces;
    auto seg = [&](cplx from, cplx to) {
        if (from != to) pieces.push_back(PathPiece::segment(from, to));
    };
    cplx cur = z0;
    for (const Hit& h : hits) {
        cplx p_in, p_out;
        if (h.start_inside) {
            p_in = h.a + delta * (z0 - h.a) / std::abs(z0 - h.a);
        } else {
            p_in = z0 + h.t_in * d;
        }
        seg(cur, p_in);
        p_out = h.end_inside ? h.a + delta * (z - h.a) / std::abs(z - h.a) : z0 + h.t_out * d;
        const double th_in = std::arg(p_in - h.a), th_out = std::arg(p_out - h.a);
        double sweep = th_out - th_in;
        const double two_pi = 2.0 * std::numbers::pi;
        if (orientation > 0) {
            while (sweep <= 0.0) sweep += two_pi;
            while (sweep > two_pi) sweep -= two_pi;
        } else {
            while (sweep >= 0.0) sweep -= two_pi;
            while (sweep < -two_pi) sweep += two_pi;
        }
        if (std::abs(p_in - p_out) > 1e-15 * std::max(1.0, std::abs(h.a)))
            pieces.push_back(PathPiece::arc(h.a, delta, th_in, sweep));
        cur = p_out;
    }
    seg(cur, z);
    return pieces;
}

inline constexpr double kEvaluateRelTol = 1e-13;
inline constexpr double kLogOverflow = 700.0;

inline SpherePoint evaluate(const IntegralImmersion& F, cplx z, int orientation = 1,
                            const Tolerances& tol = default_tolerances()) {
    if (std::abs(z - F.domain.center) > F.domain.radius * (1.0 + 1e-12))
        throw precondition_error("evaluate: point outside the extension disc");
    for (const Pole& p : F.poles.entries)
        if (std::abs(z - p.location) <= 1e-12 * std::max(1.0, std::abs(p.location))) return SpherePoint::infinity();
    if (z == F.z0) return F.f0;
    const std::vector<PathPiece> path = integration_path(F, z, orientation);
    for (const PathPiece& piece : path)
        for (int k = 0; k <= 32; ++k) {
            const double l = F.log_abs_derivative(piece.point(k / 32.0));
            if (l > kLogOverflow) {
                std::ostringstream os;
                os << "evaluate: |f~'| leaves the double range on the path (log modulus " << l << ")";
                throw numerical_error(os.str());
            }
        }
    const cplx integral =
        integrate_pieces([&](cplx s) { return F.derivative(s); }, path, tol.quadrature, 1L << 16, kEvaluateRelTol);
    return F.f0.value() + integral;
}

inline double chordal_error_on_circle(const IntegralImmersion& F, const RationalMap& f, const Disc& circle,
                                      int samples = 256, const Tolerances& tol = default_tolerances()) {
    double m = 0.0;
    for (int k = 0; k < samples; ++k) {
        const cplx z = circle.center + std::polar(circle.radius, 2.0 * std::numbers::pi * k / samples);
        m = std::max(m, chordal_distance(evaluate(F, z, 1, tol), f(z)));
    }
    return m;
}

struct IntegralCertificate {
    ImmersionCertificate certificate;
    std::vector<cplx> residues_closed;   // h~(a)/g(a) (eta~(a) - c_a)
    std::vector<cplx> residues_contour;  // (1/2 pi i) \oint over the detour circle
    double max_residue = 0.0;
    bool log_modulus_finite = true;
    std::size_t samples_checked = 0;
};

/// Deterministic, roughly uniform points of a disc (Vogel spiral).
inline std::vector<cplx> disc_samples(const Disc& d, int n) {
    std::vector<cplx> out;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) out.push_back(d.center + std::polar(d.radius * std::sqrt((k + 0.5) / n), golden * k));
    return out;
}

/// Sampled immersion certificate for f~ on its extension disc.
inline IntegralCertificate verify_integral_immersion(const IntegralImmersion& F, int samples = 1000,
                                                     const Tolerances& tol = default_tolerances()) {
    IntegralCertificate out;
    ImmersionCertificate& cert = out.certificate;
    cert.target = Target::CP1;
    cert.poles_inside = F.poles;
    const std::vector<cplx> a = F.pole_locations();
    for (cplx p : a) cert.boundary_clearance = std::min(cert.boundary_clearance, F.domain.depth(p));

    std::vector<cplx> sq;
    for (cplx p : a) sq.insert(sq.end(), {p, p});
    const bool theta_ok = F.theta == ComplexPolynomial::from_roots(sq);

    for (cplx z : disc_samples(F.domain, samples)) {
        bool at_pole = false;
        for (cplx p : a) at_pole = at_pole || z == p;
        if (at_pole) continue;
        ++out.samples_checked;
        if (!std::isfinite(F.log_abs_derivative(z))) out.log_modulus_finite = false;
    }

    // zeros of f~' inside = (change of Im xi)/2pi - winding(Theta) + 2|A|;
    // the first term vanishes because xi is a polynomial (single-valued).
    const Contour rim = Contour::circle(F.domain.center, F.domain.radius);
    long wind_theta = 0;
    if (!a.empty()) wind_theta = winding_number([&](cplx z) { return F.theta(z); }, rim, tol);
    cert.derivative_zero_count = -wind_theta + 2 * static_cast<long>(a.size());

    const std::vector<cplx> c = residue_targets(a, tol);
    const ComplexPolynomial eta = F.eta();
    for (std::size_t i = 0; i < a.size(); ++i) {
        cplx g = 1.0;
        for (std::size_t j = 0; j < a.size(); ++j)
            if (j != i) g *= (a[i] - a[j]) * (a[i] - a[j]);
        const cplx closed = F.h0 * std::exp(F.xi(a[i])) / g * (eta(a[i]) - c[i]);
        const Contour small = Contour::circle(a[i], F.detour_radius, 64);
        const cplx contour =
            integrate([&](cplx z) { return F.derivative(z); }, small, tol.quadrature, {}, tol) /
            cplx(0.0, 2.0 * std::numbers::pi);
        out.residues_closed.push_back(closed);
        out.residues_contour.push_back(contour);
        if (!detail::finite(closed) || !detail::finite(contour))
            out.max_residue = std::numeric_limits<double>::infinity();
        else
            out.max_residue = std::max({out.max_residue, std::abs(closed), std::abs(contour)});
    }
    cert.valid = theta_ok && out.log_modulus_finite && cert.derivative_zero_count == 0 &&
                 out.max_residue < tol.residue && F.poles.all_simple();
    return out;
}

namespace detail {

/// Everything of the pipeline that does not depend on the truncation degree.
struct ExtensionSetup {
    std::vector<cplx> poles;     // A = poles of f in the extension disc
    EtaConstraint constraint;
    ComplexPolynomial theta;
    RationalMap h;               // f' Theta, holomorphic on the extension disc
    std::vector<Pole> h_poles;   // poles of h (outside the extension disc)
    cplx z0{};
    SpherePoint f0;
    cplx h0{};

    cplx eta(cplx z) const {
        const ComplexPolynomial& n = h.numerator();
        cplx e = n.derivative()(z) / n(z);
        for (const Pole& p : h_poles) e -= static_cast<double>(p.order) / (z - p.location);
        return e;
    }
    ComplexFunction eta_fn() const {
        return [this](cplx z) { return eta(z); };
    }

    IntegralImmersion assemble(const ComplexPolynomial& eta_tilde, const Disc& outer) const {
        IntegralImmersion F;
        F.z0 = z0;
        F.f0 = f0;
        F.h0 = h0;
        F.xi = eta_tilde.antiderivative(z0);
        F.theta = theta;
        for (cplx a : poles) F.poles.entries.push_back({a, 1});
        F.domain = outer;
        F.detour_radius = detour_radius(poles, outer);
        return F;
    }
};

inline ExtensionSetup setup_extension(const RationalMap& f, const Disc& d0, const Disc& d1, const Tolerances& tol) {
    if (!d1.contains_disc(d0)) throw precondition_error("extend: the small disc must lie in the interior of the large one");
    const ImmersionCertificate c0 = verify_immersion(f, CircularDomain(d0), Target::CP1, tol);
    if (!c0.valid) throw precondition_error("extend: f is not an immersion on the small disc");

    ExtensionSetup s;
    const PoleSet all = pole_set(f, tol);
    for (const Pole& p : all.entries) {
        if (std::abs(d1.depth(p.location)) < tol.clearance * 2.0 * d1.radius)
            throw precondition_error("extend: pole on the boundary of the extension disc");
        if (!d1.contains_open(p.location)) continue;
        if (p.order != 1) throw precondition_error("extend: poles in the extension disc must be simple");
        s.poles.push_back(p.location);
    }
    s.constraint = EtaConstraint(s.poles, residue_targets(s.poles, tol));
    std::vector<cplx> sq;
    for (cplx a : s.poles) sq.insert(sq.end(), {a, a});
    s.theta = ComplexPolynomial::from_roots(sq);

    const RationalMap fp = derivative(f, tol);
    for (const Pole& p : pole_set(fp, tol).entries) {
        bool in_a = false;
        for (cplx a : s.poles) in_a = in_a || std::abs(a - p.location) < tol.root_separation * std::max(1.0, std::abs(a));
        if (in_a) {
            if (p.order != 2) throw internal_error("extend: derivative pole order mismatch");
            continue;
        }
        s.h_poles.push_back(p);
    }
    s.h = RationalMap::from_poles(fp.numerator(), s.h_poles, tol);

    s.z0 = d0.center;
    double nearest = std::numeric_limits<double>::infinity();
    cplx nearest_pole{};
    for (const Pole& p : all.entries)
        if (std::abs(p.location - d0.center) < nearest) {
            nearest = std::abs(p.location - d0.center);
            nearest_pole = p.location;
        }
    if (nearest < 0.05 * d0.radius) {
        const cplx away = nearest > 0.0 ? (d0.center - nearest_pole) / nearest : cplx(1.0);
        s.z0 = d0.center + 0.1 * d0.radius * away;
    }
    s.f0 = f(s.z0);
    s.h0 = s.h.value(s.z0);
    if (s.f0.is_infinite() || s.h0 == cplx{}) throw internal_error("extend: base point is singular");
    return s;
}

}  // namespace detail

/// Immersion f~ of the large disc with chordal distance < eps to f on the
/// boundary of the small disc; the truncation degree follows the schedule
/// until the sampled error drops below eps.
inline IntegralImmersion extend_immersion(const RationalMap& f, const Disc& d0, const Disc& d1, double eps,
                                          const Tolerances& tol = default_tolerances()) {
    if (!(eps > 0.0)) throw input_error("extend: eps must be positive");
    const detail::ExtensionSetup s = detail::setup_extension(f, d0, d1, tol);
    const detail::TaylorSamples ts =
        detail::sample_taylor(s.constraint.sigma(s.eta_fn()), d0.center, d0.radius, tol.degree_budget);
    if (ts.singular()) throw precondition_error("constrained_eta: sigma is singular on the disc (input is not an immersion)");
    IntegralImmersion best;
    for (int d : degree_schedule(tol.degree_budget)) {
        IntegralImmersion F = s.assemble(s.constraint.assemble(ts.truncation(d)), d1);
        F.degree = d;
        F.achieved_error = chordal_error_on_circle(F, f, d0, 256, tol);
        if (F.achieved_error < eps) return F;
        best = F;
    }
    std::ostringstream os;
    os << "extend: eps = " << eps << " not reached within degree budget " << tol.degree_budget
       << "; achieved chordal error " << best.achieved_error;
    throw numerical_error(os.str());
}

struct FamilyExtension {
    ParamGrid grid;  // carries the net stride used for blending
    std::vector<IntegralImmersion> maps;
    std::vector<double> errors;         // chordal error on the small circle
    std::vector<int> node_degrees;      // final truncation degree per grid point (0 off the net)
};

namespace detail {

inline Error at_cell(const Error& e, const ParamGrid& g, std::size_t i) {
    return Error(e.kind(), "extend_family: grid point " + g.describe(i) + ": " + e.what());
}

}  // namespace detail

/// Parametric extension over a grid. Each net node contributes a solution of
/// the constrained problem for every f_p in its support; the contributions
/// are blended with the partition-of-unity weights at the eta~ level. Q nodes
/// contribute a Taylor fit of eta on the whole large disc, so at Q points
/// the output reproduces f_p there.
inline FamilyExtension extend_family(const std::vector<RationalMap>& family, const ParamGrid& grid, const Disc& d0,
                                     const Disc& d1, double eps, const Tolerances& tol = default_tolerances(),
                                     int stride = 0) {
    if (family.size() != grid.size()) throw input_error("extend_family: family size does not match the grid");
    if (!(eps > 0.0)) throw input_error("extend_family: eps must be positive");
    if (stride == 0) {
        stride = 1;
        if (grid.stride_allowed(2)) {
            const ParamGrid g2 = grid.with_stride(2);
            bool q_on_net = true;
            for (std::size_t i = 0; i < grid.size(); ++i) q_on_net = q_on_net && (!grid.in_q(i) || g2.is_node(i));
            if (q_on_net) stride = 2;
        }
    }
    const ParamGrid g = grid.with_stride(stride);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.in_q(i) && !g.is_node(i)) throw input_error("extend_family: Q point " + g.describe(i) + " is not a net node");

    const std::size_t n = g.size();
    std::vector<detail::ExtensionSetup> setups;
    setups.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            setups.push_back(detail::setup_extension(family[i], d0, d1, tol));
        } catch (const Error& e) {
            throw detail::at_cell(e, g, i);
        }
    }
    for (auto [i, j] : g.adjacent_pairs()) {
        if (setups[i].poles.size() != setups[j].poles.size())
            throw precondition_error("extend_family: pole count in the extension disc changes between grid points " +
                                     g.describe(i) + " and " + g.describe(j));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!g.in_q(i)) continue;
        bool ok = false;
        try {
            ok = verify_immersion(family[i], CircularDomain(d1), Target::CP1, tol).valid;
        } catch (const Error& e) {
            throw detail::at_cell(e, g, i);
        }
        if (!ok) throw precondition_error("extend_family: grid point " + g.describe(i) + " is in Q but not an immersion on the large disc");
    }

    // sigma samples: on the small circle for every point, on the large circle
    // for points covered by a Q node where f_p is an immersion on the large disc
    std::vector<detail::TaylorSamples> small(n);
    std::vector<std::optional<ComplexPolynomial>> tight(n);
    std::vector<bool> near_q(n, false);
    for (std::size_t i = 0; i < n; ++i)
        for (auto [node, w] : g.weights(i))
            if (g.in_q(node) && w > 0.0) near_q[i] = true;
    for (std::size_t i = 0; i < n; ++i) {
        const detail::ExtensionSetup& s = setups[i];
        try {
            small[i] = detail::sample_taylor(s.constraint.sigma(s.eta_fn()), d0.center, d0.radius, tol.degree_budget);
            if (small[i].singular()) throw precondition_error("sigma is singular on the small disc");
            if (!near_q[i]) continue;
            if (!verify_immersion(family[i], CircularDomain(d1), Target::CP1, tol).valid) continue;
            const detail::TaylorSamples big =
                detail::sample_taylor(s.constraint.sigma(s.eta_fn()), d1.center, d1.radius, tol.degree_budget);
            if (big.singular()) continue;
            const ComplexFunction eta = s.eta_fn();
            double scale = 1.0;
            for (int k = 0; k < 64; ++k)
                scale = std::max(scale, std::abs(eta(d1.center + std::polar(d1.radius, 2.0 * std::numbers::pi * k / 64))));
            for (int d : degree_schedule(tol.degree_budget)) {
                ComplexPolynomial e = s.constraint.assemble(big.truncation(d));
                const double err = detail::sup_on_circle([&](cplx z) { return e(z) - eta(z); }, d1);
                tight[i] = std::move(e);
                if (err < 1e-12 * scale) break;
            }
        } catch (const Error& e) {
            throw detail::at_cell(e, g, i);
        }
    }

    const std::vector<int> schedule = degree_schedule(tol.degree_budget);
    std::vector<std::size_t> level(n, 0);  // schedule index per node
    FamilyExtension out;
    out.grid = g;
    out.maps.resize(n);
    out.errors.assign(n, 0.0);
    std::vector<bool> done(n, false);
    for (;;) {
        std::vector<std::size_t> failing;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            ComplexPolynomial eta;
            for (auto [node, w] : g.weights(i)) {
                if (w == 0.0) continue;
                const ComplexPolynomial part = g.in_q(node) && tight[i]
                                                   ? *tight[i]
                                                   : setups[i].constraint.assemble(small[i].truncation(schedule[level[node]]));
                eta += w * part;
            }
            IntegralImmersion F = setups[i].assemble(eta, d1);
            try {
                F.achieved_error = chordal_error_on_circle(F, family[i], d0, 256, tol);
            } catch (const Error& e) {
                throw detail::at_cell(e, g, i);
            }
            F.degree = eta.degree();
            out.errors[i] = F.achieved_error;
            out.maps[i] = std::move(F);
            if (out.errors[i] < eps) {
                done[i] = true;
            } else {
                failing.push_back(i);
            }
        }
        if (failing.empty()) break;
        for (std::size_t i : failing) {
            bool raised = false;
            for (auto [node, w] : g.weights(i)) {
                if (w == 0.0 || level[node] + 1 >= schedule.size()) continue;
                ++level[node];
                raised = true;
            }
            if (!raised) {
                std::ostringstream os;
                os << "extend_family: grid point " << g.describe(i) << ": eps = " << eps
                   << " not reached within degree budget; achieved " << out.errors[i];
                throw numerical_error(os.str());
            }
            // neighbours sharing a raised node must be recomputed
            for (std::size_t k = 0; k < n; ++k)
                for (auto [node, w] : g.weights(k))
                    for (auto [node_i, wi] : g.weights(i))
                        if (node == node_i && w > 0.0 && wi > 0.0) done[k] = false;
        }
    }
    out.node_degrees.assign(n, 0);
    for (std::size_t node : g.nodes()) out.node_degrees[node] = schedule[level[node]];
    return out;
}

}  // namespace merimm
