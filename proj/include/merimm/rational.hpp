#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "merimm/error.hpp"
#include "merimm/polynomial.hpp"
#include "merimm/roots.hpp"
#include "merimm/sphere.hpp"

namespace merimm {

struct Pole {
    cplx location;
    int order = 1;
    friend bool operator==(const Pole&, const Pole&) = default;
};

/// Poles with orders; locations pairwise distinct beyond the separation tolerance.
struct PoleSet {
    std::vector<Pole> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
    bool all_simple() const {
        for (const Pole& p : entries)
            if (p.order != 1) return false;
        return true;
    }
    int total_order() const {
        int s = 0;
        for (const Pole& p : entries) s += p.order;
        return s;
    }
    friend bool operator==(const PoleSet&, const PoleSet&) = default;
};

namespace detail {

/// True when r is (within tolerance) a root of p: either the backward-error
/// residual test passes at r, or Newton started at r lands on a root closer
/// than the separation tolerance.
inline bool shares_root(const ComplexPolynomial& p, cplx r, const Tolerances& tol) {
    if (p.degree() < 1) return false;
    if (std::abs(p(r)) <= 16.0 * residual_bound(p, r)) return true;
    cplx z = r;
    for (int it = 0; it < 40; ++it) {
        cplx v, dv;
        horner_with_derivative(p, z, v, dv);
        if (std::abs(dv) == 0.0) break;
        z -= v / dv;
        if (std::abs(z - r) > 100.0 * tol.root_separation * std::max(1.0, std::abs(r))) return false;
    }
    return std::abs(z - r) < 10.0 * tol.root_separation * std::max(1.0, std::abs(r)) &&
           std::abs(p(z)) <= 16.0 * residual_bound(p, z);
}

inline void merge_pole(std::vector<Pole>& poles, Pole p, const Tolerances& tol) {
    for (Pole& q : poles)
        if (std::abs(q.location - p.location) < tol.root_separation * std::max(1.0, std::abs(p.location))) {
            q.order += p.order;
            return;
        }
    poles.push_back(p);
}

inline ComplexPolynomial expand_poles(const std::vector<Pole>& poles) {
    std::vector<cplx> rs;
    for (const Pole& p : poles)
        for (int k = 0; k < p.order; ++k) rs.push_back(p.location);
    return ComplexPolynomial::from_roots(rs);
}

}  // namespace detail

/// numerator / denominator with the denominator monic and no common root
/// within the separation tolerance.
///
/// Reduced maps keep the factored form of their denominator (the pole list)
/// next to its dense coefficients; pole_set, derivative and residue read the
/// factored form, which stays accurate where dense coefficients of a
/// denominator with multiple roots would not.
class RationalMap {
public:
    RationalMap() : num_(), den_(ComplexPolynomial::constant(1.0)), poles_(std::vector<Pole>{}) {}
    RationalMap(ComplexPolynomial p)  // NOLINT: a polynomial is a rational map
        : num_(std::move(p)), den_(ComplexPolynomial::constant(1.0)), poles_(std::vector<Pole>{}) {}

    RationalMap(ComplexPolynomial num, const ComplexPolynomial& den, const Tolerances& tol = default_tolerances()) {
        if (den.is_zero()) throw input_error("rational map: zero denominator");
        std::vector<Pole> poles;
        if (den.degree() >= 1)
            for (const Root& r : roots(den, tol)) poles.push_back({r.value, r.multiplicity});
        *this = from_poles(std::move(num) * (1.0 / den.leading()), std::move(poles), tol);
    }

    /// num / prod (z - p)^{order}, reduced against common roots.
    static RationalMap from_poles(ComplexPolynomial num, std::vector<Pole> poles,
                                  const Tolerances& tol = default_tolerances()) {
        RationalMap r;
        if (num.is_zero()) return r;
        for (Pole& p : poles) {
            while (p.order > 0 && detail::shares_root(num, p.location, tol)) {
                num = num.deflate(p.location);
                --p.order;
            }
        }
        std::erase_if(poles, [](const Pole& p) { return p.order <= 0; });
        r.num_ = std::move(num);
        r.den_ = detail::expand_poles(poles);
        r.poles_ = std::move(poles);
        return r;
    }

    /// Builds without reduction; the caller guarantees coprimality.
    static RationalMap unreduced(ComplexPolynomial num, ComplexPolynomial den) {
        if (den.is_zero()) throw input_error("rational map: zero denominator");
        RationalMap r;
        r.num_ = std::move(num);
        r.den_ = std::move(den);
        r.poles_.reset();
        r.normalize();
        if (r.den_.degree() == 0) r.poles_ = std::vector<Pole>{};
        return r;
    }

    /// Stored as given, for deserialization; den must be monic with the given poles.
    static RationalMap from_parts(ComplexPolynomial num, ComplexPolynomial den, std::vector<Pole> poles) {
        if (den.is_zero() || den.leading() != cplx(1.0)) throw input_error("rational map: denominator must be monic");
        int total = 0;
        for (const Pole& p : poles) total += p.order;
        if (total != den.degree()) throw input_error("rational map: pole orders do not match the denominator degree");
        RationalMap r;
        r.num_ = std::move(num);
        r.den_ = std::move(den);
        r.poles_ = std::move(poles);
        return r;
    }

    const ComplexPolynomial& numerator() const { return num_; }
    const ComplexPolynomial& denominator() const { return den_; }
    bool is_polynomial() const { return den_.degree() == 0; }
    /// Factored denominator, when known.
    const std::optional<std::vector<Pole>>& known_poles() const { return poles_; }

    /// Finite-chart value; callers must stay off the poles.
    cplx value(cplx z) const { return num_(z) / den_(z); }

    SpherePoint operator()(cplx z) const {
        const cplx d = den_(z);
        const cplx n = num_(z);
        const bool den_zero = std::abs(d) <= detail::residual_bound(den_, z);
        if (den_zero) {
            if (num_.is_zero() || std::abs(n) <= detail::residual_bound(num_, z))
                throw precondition_error("eval: unreduced fraction (0/0)");
            return SpherePoint::infinity();
        }
        return n / d;
    }

    RationalMap reciprocal(const Tolerances& tol = default_tolerances()) const {
        if (num_.is_zero()) throw precondition_error("reciprocal of the zero map");
        return RationalMap(den_, num_, tol);
    }

    friend RationalMap operator*(const RationalMap& a, const RationalMap& b) {
        if (a.poles_ && b.poles_) {
            std::vector<Pole> poles = *a.poles_;
            for (const Pole& p : *b.poles_) detail::merge_pole(poles, p, default_tolerances());
            return from_poles(a.num_ * b.num_, std::move(poles));
        }
        return RationalMap(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RationalMap operator+(const RationalMap& a, const RationalMap& b) { return combine(a, b, 1.0); }
    friend RationalMap operator-(const RationalMap& a, const RationalMap& b) { return combine(a, b, -1.0); }
    friend RationalMap operator*(cplx s, const RationalMap& a) {
        RationalMap r = a;
        r.num_ *= s;
        if (r.num_.is_zero()) return RationalMap();
        return r;
    }

    friend bool operator==(const RationalMap& a, const RationalMap& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

private:
    static RationalMap combine(const RationalMap& a, const RationalMap& b, double sign) {
        ComplexPolynomial num = a.num_ * b.den_ + sign * (b.num_ * a.den_);
        if (a.poles_ && b.poles_) {
            std::vector<Pole> poles = *a.poles_;
            for (const Pole& p : *b.poles_) detail::merge_pole(poles, p, default_tolerances());
            return from_poles(std::move(num), std::move(poles));
        }
        return RationalMap(std::move(num), a.den_ * b.den_);
    }

    void normalize() {
        const cplx lead = den_.leading();
        if (lead != cplx(1.0)) {
            num_ *= 1.0 / lead;
            den_ *= 1.0 / lead;
        }
    }

    ComplexPolynomial num_;
    ComplexPolynomial den_;
    std::optional<std::vector<Pole>> poles_;
};

/// Poles of f: roots of the (reduced) denominator with multiplicities.
inline PoleSet pole_set(const RationalMap& f, const Tolerances& tol = default_tolerances()) {
    PoleSet s;
    if (f.known_poles()) {
        s.entries = *f.known_poles();
        return s;
    }
    if (f.denominator().degree() < 1) return s;
    for (const Root& r : roots(f.denominator(), tol)) s.entries.push_back({r.value, r.multiplicity});
    return s;
}

inline std::vector<Root> zeros(const RationalMap& f, const Tolerances& tol = default_tolerances()) {
    if (f.numerator().degree() < 1) return {};
    return roots(f.numerator(), tol);
}

/// Formal derivative of a polynomial.
inline ComplexPolynomial derivative(const ComplexPolynomial& p) { return p.derivative(); }

/// Quotient-rule derivative, reduced using the pole factorisation:
/// with D = prod (z-r_i)^{m_i} and S = prod (z-r_i),
/// f' = (N' S - N sum_i m_i prod_{j!=i}(z-r_j)) / (D S).
inline RationalMap derivative(const RationalMap& f, const Tolerances& tol = default_tolerances()) {
    const ComplexPolynomial& n = f.numerator();
    const ComplexPolynomial& d = f.denominator();
    if (d.degree() < 1) return RationalMap(n.derivative() * (1.0 / d.leading()));
    const PoleSet poles = pole_set(f, tol);
    std::vector<cplx> locs;
    for (const Pole& p : poles.entries) locs.push_back(p.location);
    const ComplexPolynomial s = ComplexPolynomial::from_roots(locs);
    ComplexPolynomial t;
    for (std::size_t i = 0; i < locs.size(); ++i) {
        std::vector<cplx> others;
        for (std::size_t j = 0; j < locs.size(); ++j)
            if (j != i) others.push_back(locs[j]);
        t += ComplexPolynomial::from_roots(others, static_cast<double>(poles.entries[i].order));
    }
    std::vector<Pole> dpoles = poles.entries;
    for (Pole& p : dpoles) ++p.order;
    ComplexPolynomial num = (n.derivative() * s - n * t).trimmed(tol.coefficient * std::max(1.0, n.max_abs_coeff()));
    return RationalMap::from_poles(std::move(num) * (1.0 / d.leading()), std::move(dpoles), tol);
}

namespace detail {

/// First `terms` coefficients of the power series a(w)/b(w), b(0) != 0.
inline std::vector<cplx> series_divide(const std::vector<cplx>& a, const std::vector<cplx>& b, std::size_t terms) {
    std::vector<cplx> q(terms, 0.0);
    for (std::size_t k = 0; k < terms; ++k) {
        cplx acc = k < a.size() ? a[k] : cplx{};
        for (std::size_t j = 1; j <= k && j < b.size(); ++j) acc -= b[j] * q[k - j];
        q[k] = acc / b[0];
    }
    return q;
}

}  // namespace detail

/// Laurent coefficient c_{-1} of f at a, by power-series division of the
/// numerator's Taylor expansion by the pole cofactor's. Returns 0 when a is not a pole.
inline cplx residue(const RationalMap& f, cplx a, const Tolerances& tol = default_tolerances()) {
    const PoleSet poles = pole_set(f, tol);
    const Pole* hit = nullptr;
    for (const Pole& p : poles.entries)
        if (std::abs(p.location - a) < 1e-6 * std::max(1.0, std::abs(a))) hit = &p;
    if (!hit) return 0.0;
    const cplx loc = hit->location;
    const int m = hit->order;
    const std::vector<cplx> nt = f.numerator().taylor_at(loc);
    if (f.numerator().is_zero()) return 0.0;
    if (std::abs(nt[0]) <= detail::residual_bound(f.numerator(), loc))
        throw precondition_error("residue: unreduced fraction (0/0) at the pole");
    // Cofactor den / (z - loc)^m expanded at loc from the remaining poles;
    // shifting the dense denominator instead loses digits near a multiple root.
    std::vector<cplx> e{f.denominator().leading()};
    for (const Pole& p : poles.entries) {
        if (&p == hit) continue;
        for (int k = 0; k < p.order; ++k) {
            std::vector<cplx> next(e.size() + 1, 0.0);
            for (std::size_t j = 0; j < e.size(); ++j) {
                next[j + 1] += e[j];
                next[j] += (loc - p.location) * e[j];
            }
            e = std::move(next);
        }
    }
    const std::vector<cplx> q = detail::series_divide(nt, e, static_cast<std::size_t>(m));
    return q[static_cast<std::size_t>(m) - 1];
}

}  // namespace merimm
