#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include "merimm/error.hpp"
#include "merimm/polynomial.hpp"
#include "merimm/rational.hpp"
#include "merimm/tolerances.hpp"

namespace merimm {

using ComplexFunction = std::function<cplx(cplx)>;

struct Disc {
    cplx center{};
    double radius = 1.0;

    Disc() = default;
    Disc(cplx c, double r) : center(c), radius(r) {
        if (!(r > 0.0) || !std::isfinite(r)) throw input_error("disc: radius must be positive");
    }

    bool contains_closed(cplx z) const { return std::abs(z - center) <= radius; }
    bool contains_open(cplx z) const { return std::abs(z - center) < radius; }
    /// Signed distance to the boundary circle, positive inside.
    double depth(cplx z) const { return radius - std::abs(z - center); }
    /// Closed disc `inner` lies in the open disc.
    bool contains_disc(const Disc& inner) const {
        return std::abs(inner.center - center) + inner.radius < radius;
    }
    friend bool operator==(const Disc&, const Disc&) = default;
};

/// One smooth piece of a path: a straight segment or a circular arc,
/// parametrised over t in [0, 1].
struct PathPiece {
    enum class Kind { segment, arc } kind = Kind::segment;
    cplx a{}, b{};           // segment end points
    cplx center{};           // arc data
    double radius = 0.0;
    double theta0 = 0.0;
    double sweep = 0.0;      // signed total angle

    static PathPiece segment(cplx from, cplx to) {
        PathPiece p;
        p.kind = Kind::segment;
        p.a = from;
        p.b = to;
        return p;
    }
    static PathPiece arc(cplx c, double r, double theta_from, double sweep_angle) {
        PathPiece p;
        p.kind = Kind::arc;
        p.center = c;
        p.radius = r;
        p.theta0 = theta_from;
        p.sweep = sweep_angle;
        return p;
    }

    cplx point(double t) const {
        if (kind == Kind::segment) return a + t * (b - a);
        return center + std::polar(radius, theta0 + t * sweep);
    }
    cplx tangent(double t) const {
        if (kind == Kind::segment) return b - a;
        return cplx(0.0, sweep) * std::polar(radius, theta0 + t * sweep);
    }
    double length() const { return kind == Kind::segment ? std::abs(b - a) : std::abs(sweep) * radius; }

    double distance_to(cplx z) const {
        if (kind == Kind::segment) {
            const cplx d = b - a;
            const double len2 = std::norm(d);
            double t = len2 > 0.0 ? ((z - a) * std::conj(d)).real() / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            return std::abs(z - point(t));
        }
        // closest point on the arc: the radial projection if it lies within the
        // swept range, else the nearer end point
        const double ang = std::arg(z - center);
        double rel = ang - theta0;
        const double two_pi = 2.0 * std::numbers::pi;
        if (std::abs(sweep) >= two_pi) return std::abs(std::abs(z - center) - radius);
        if (sweep >= 0.0) {
            rel = std::fmod(std::fmod(rel, two_pi) + two_pi, two_pi);
            if (rel <= sweep) return std::abs(std::abs(z - center) - radius);
        } else {
            rel = std::fmod(std::fmod(-rel, two_pi) + two_pi, two_pi);
            if (rel <= -sweep) return std::abs(std::abs(z - center) - radius);
        }
        return std::min(std::abs(z - point(0.0)), std::abs(z - point(1.0)));
    }
};

/// Sampled piecewise-smooth path. Circles are built analytically: their
/// pieces are exact arcs between the samples, so refinement never cuts
/// across the disc.
class Contour {
public:
    static Contour circle(cplx center, double radius, int samples = 256, int turns = 1) {
        if (!(radius > 0.0)) throw input_error("circle contour: radius must be positive");
        if (samples < 3) throw input_error("circle contour: need at least 3 samples");
        if (turns == 0) throw input_error("circle contour: turns must be nonzero");
        Contour c;
        c.kind_ = Kind::circle;
        c.center_ = center;
        c.radius_ = radius;
        c.turns_ = turns;
        c.closed_ = true;
        const int n = samples * std::abs(turns);
        c.samples_.resize(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k < n; ++k)
            c.samples_[k] = center + std::polar(radius, 2.0 * std::numbers::pi * turns * k / n);
        c.samples_[n] = c.samples_[0];
        return c;
    }

    static Contour polyline(std::vector<cplx> points, bool closed) {
        if (points.size() < 2) throw input_error("polyline contour: need at least 2 points");
        if (closed && points.front() != points.back()) points.push_back(points.front());
        for (std::size_t i = 1; i < points.size(); ++i)
            if (points[i] == points[i - 1]) throw input_error("polyline contour: repeated consecutive sample");
        Contour c;
        c.kind_ = Kind::polyline;
        c.samples_ = std::move(points);
        c.closed_ = closed;
        return c;
    }

    static Contour segment(cplx a, cplx b) { return polyline({a, b}, false); }

    static Contour from_pieces(std::vector<PathPiece> pieces) {
        Contour c;
        c.kind_ = Kind::pieces;
        for (const PathPiece& p : pieces) c.samples_.push_back(p.point(0.0));
        if (!pieces.empty()) c.samples_.push_back(pieces.back().point(1.0));
        c.closed_ = false;
        c.pieces_ = std::move(pieces);
        return c;
    }

    bool is_circle() const { return kind_ == Kind::circle; }
    bool closed() const { return closed_; }
    const std::vector<cplx>& samples() const { return samples_; }
    std::size_t piece_count() const { return kind_ == Kind::pieces ? pieces_.size() : samples_.size() - 1; }
    cplx center() const { return center_; }
    double radius() const { return radius_; }
    int turns() const { return turns_; }
    long refinement_budget() const { return budget_; }
    Contour& set_refinement_budget(long b) {
        if (b < 1) throw input_error("contour: refinement budget must be positive");
        budget_ = b;
        return *this;
    }

    PathPiece piece(std::size_t i) const {
        switch (kind_) {
            case Kind::circle: {
                const double n = static_cast<double>(samples_.size() - 1);
                const double step = 2.0 * std::numbers::pi * turns_ / n;
                return PathPiece::arc(center_, radius_, step * static_cast<double>(i), step);
            }
            case Kind::pieces:
                return pieces_[i];
            case Kind::polyline:
            default:
                return PathPiece::segment(samples_[i], samples_[i + 1]);
        }
    }

    double diameter() const {
        if (kind_ == Kind::circle) return 2.0 * radius_;
        double d = 0.0;
        for (std::size_t i = 0; i < samples_.size(); ++i)
            for (std::size_t j = i + 1; j < samples_.size(); ++j) d = std::max(d, std::abs(samples_[i] - samples_[j]));
        return d;
    }

    double distance_to(cplx z) const {
        if (kind_ == Kind::circle) return std::abs(std::abs(z - center_) - radius_);
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < piece_count(); ++i) d = std::min(d, piece(i).distance_to(z));
        return d;
    }

    double length() const {
        double s = 0.0;
        for (std::size_t i = 0; i < piece_count(); ++i) s += piece(i).length();
        return s;
    }

private:
    enum class Kind { circle, polyline, pieces };
    Kind kind_ = Kind::polyline;
    std::vector<cplx> samples_;
    std::vector<PathPiece> pieces_;
    bool closed_ = false;
    cplx center_{};
    double radius_ = 0.0;
    int turns_ = 1;
    long budget_ = 1L << 20;
};

/// Absolute clearance under which a point counts as lying on the contour.
inline double contour_clearance(const Contour& c, const Tolerances& tol = default_tolerances()) {
    return tol.clearance * c.diameter();
}

namespace detail {

struct GaussKronrod15 {
    static constexpr std::array<double, 8> xk{0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                                              0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                                              0.207784955007898468, 0.000000000000000000};
    static constexpr std::array<double, 8> wk{0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                                              0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                                              0.204432940075298892, 0.209482141084727828};
    static constexpr std::array<double, 4> wg{0.129484966168869693, 0.279705391489276668, 0.381830050505118945,
                                              0.417959183673469388};
};

struct Interval {
    std::size_t piece;
    double lo, hi;
    cplx value;
    double error;
    double magnitude;  // integral of |g|
    bool operator<(const Interval& o) const { return error < o.error; }
};

template <class G>
Interval gk15(const G& g, std::size_t piece, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    using GK = GaussKronrod15;
    const cplx fc = g(c);
    cplx k = GK::wk[7] * fc;
    cplx gs = GK::wg[3] * fc;
    double m = GK::wk[7] * std::abs(fc);
    for (int j = 0; j < 7; ++j) {
        const cplx a = g(c - h * GK::xk[j]), b = g(c + h * GK::xk[j]);
        k += GK::wk[j] * (a + b);
        m += GK::wk[j] * (std::abs(a) + std::abs(b));
        if (j % 2 == 1) gs += GK::wg[j / 2] * (a + b);
    }
    return {piece, lo, hi, k * h, std::abs((k - gs) * h), m * std::abs(h)};
}

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace detail

/// Integral of f dz along the pieces, by globally adaptive Gauss-Kronrod
/// (7/15) subdivision until the summed error estimate drops below
/// max(tol, rel_tol * integral of |f| |dz|).
inline cplx integrate_pieces(const ComplexFunction& f, std::span<const PathPiece> pieces, double tol,
                             long max_intervals = 1L << 16, double rel_tol = 0.0) {
    if (!(tol > 0.0)) throw input_error("integrate: tolerance must be positive");
    std::priority_queue<detail::Interval> heap;
    cplx total{};
    double err = 0.0, mag = 0.0;
    auto integrand = [&](std::size_t i) {
        return [&, i](double t) {
            const cplx v = f(pieces[i].point(t)) * pieces[i].tangent(t);
            if (!detail::finite(v)) throw precondition_error("integrate: path too close to singularity");
            return v;
        };
    };
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        auto iv = detail::gk15(integrand(i), i, 0.0, 1.0);
        total += iv.value;
        err += iv.error;
        mag += iv.magnitude;
        heap.push(iv);
    }
    long count = static_cast<long>(pieces.size());
    while (err > std::max(tol, rel_tol * mag) && !heap.empty()) {
        if (count >= max_intervals) {
            std::ostringstream os;
            os << "integrate: subdivision budget exhausted; best estimate " << total << " with error " << err;
            throw numerical_error(os.str());
        }
        detail::Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            std::ostringstream os;
            os << "integrate: interval underflow; best estimate " << total;
            throw numerical_error(os.str());
        }
        auto left = detail::gk15(integrand(worst.piece), worst.piece, worst.lo, mid);
        auto right = detail::gk15(integrand(worst.piece), worst.piece, mid, worst.hi);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        mag += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    return total;
}

/// Integral of f dz along the contour. Known singular points of f closer to
/// the path than the clearance are rejected up front.
inline cplx integrate(const ComplexFunction& f, const Contour& gamma, double tol,
                      std::span<const cplx> singularities = {}, const Tolerances& tols = default_tolerances()) {
    const double clearance = contour_clearance(gamma, tols);
    for (cplx s : singularities)
        if (gamma.distance_to(s) < clearance) throw precondition_error("integrate: path too close to singularity");
    std::vector<PathPiece> pieces;
    pieces.reserve(gamma.piece_count());
    for (std::size_t i = 0; i < gamma.piece_count(); ++i) pieces.push_back(gamma.piece(i));
    return integrate_pieces(f, pieces, tol);
}

/// Winding number of a nonvanishing f along a closed contour by continuous
/// argument tracking: each piece is bisected until consecutive argument
/// increments are below pi/2, then the increments are summed.
inline long winding_number(const ComplexFunction& f, const Contour& gamma,
                           const Tolerances& tol = default_tolerances()) {
    if (!gamma.closed()) throw input_error("winding_number: contour must be closed");
    const double clearance = contour_clearance(gamma, tol);
    const long budget = std::min(gamma.refinement_budget(), tol.sample_budget);
    long used = 0;
    auto sample = [&](cplx z) {
        const cplx v = f(z);
        if (!detail::finite(v) || std::abs(v) <= clearance)
            throw precondition_error("winding_number: zero on contour");
        if (++used > budget) throw numerical_error("winding_number: refinement budget exhausted");
        return v;
    };
    const double quarter = 0.5 * std::numbers::pi;
    double total = 0.0;
    struct Span {
        double t0, t1;
        cplx f0, f1;
    };
    for (std::size_t i = 0; i < gamma.piece_count(); ++i) {
        const PathPiece piece = gamma.piece(i);
        std::vector<Span> stack{{0.0, 1.0, sample(piece.point(0.0)), sample(piece.point(1.0))}};
        while (!stack.empty()) {
            Span s = stack.back();
            stack.pop_back();
            const double tm = 0.5 * (s.t0 + s.t1);
            if (!(tm > s.t0 && tm < s.t1)) throw numerical_error("winding_number: cannot resolve argument step");
            const cplx fm = sample(piece.point(tm));
            // accept only when the midpoint confirms the step, which catches
            // whole turns hidden between two samples
            const double step = std::arg(s.f1 / s.f0);
            const double left = std::arg(fm / s.f0), right = std::arg(s.f1 / fm);
            if (std::abs(left) < quarter && std::abs(right) < quarter && std::abs(left + right - step) < 1e-9) {
                total += left + right;
                continue;
            }
            // push right half first so the left half is processed first
            stack.push_back({tm, s.t1, fm, s.f1});
            stack.push_back({s.t0, tm, s.f0, fm});
        }
    }
    return std::lround(total / (2.0 * std::numbers::pi));
}

/// Zeros minus poles of f inside gamma, via (1/2 pi i) \oint f'/f dz with
/// f'/f = N'/N - D'/D.
inline long argument_principle_count(const RationalMap& f, const Contour& gamma,
                                     const Tolerances& tol = default_tolerances()) {
    if (!gamma.closed()) throw input_error("argument_principle_count: contour must be closed");
    if (f.numerator().is_zero()) throw precondition_error("argument_principle_count: zero map");
    std::vector<cplx> singular;
    for (const Root& r : zeros(f, tol)) singular.push_back(r.value);
    for (const Pole& p : pole_set(f, tol).entries) singular.push_back(p.location);
    const ComplexPolynomial& n = f.numerator();
    const ComplexPolynomial& d = f.denominator();
    const ComplexPolynomial dn = n.derivative(), dd = d.derivative();
    const ComplexFunction logderiv = [&](cplx z) { return dn(z) / n(z) - dd(z) / d(z); };
    // only the nearest integer is needed
    const cplx integral = integrate(logderiv, gamma, std::max(tol.quadrature, 1e-7), singular, tol) / cplx(0.0, 2.0 * std::numbers::pi);
    const double rounded = std::round(integral.real());
    if (std::abs(integral - rounded) > 1e-3)
        throw numerical_error("argument_principle_count: integral is not close to an integer");
    return static_cast<long>(rounded);
}

}  // namespace merimm
