#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "merimm/tolerances.hpp"

namespace merimm {

using cplx = std::complex<double>;

/// Dense complex polynomial, coefficients in ascending degree order.
///
/// The zero polynomial has no coefficients. Any other polynomial keeps its
/// leading coefficient above the coefficient tolerance; trailing entries at
/// or below it are trimmed on construction.
class ComplexPolynomial {
public:
    ComplexPolynomial() = default;

    explicit ComplexPolynomial(std::vector<cplx> coeffs,
                               double coeff_tol = default_tolerances().coefficient)
        : c_(std::move(coeffs)) {
        trim(coeff_tol);
    }

    ComplexPolynomial(std::initializer_list<cplx> coeffs) : ComplexPolynomial(std::vector<cplx>(coeffs)) {}

    static ComplexPolynomial constant(cplx a) { return ComplexPolynomial({a}); }
    static ComplexPolynomial monomial(int degree, cplx a = 1.0) {
        std::vector<cplx> c(static_cast<std::size_t>(degree) + 1, 0.0);
        c.back() = a;
        return ComplexPolynomial(std::move(c));
    }
    /// (z - r)
    static ComplexPolynomial linear_factor(cplx r) { return ComplexPolynomial({-r, 1.0}); }

    /// lead * prod (z - r_i)
    static ComplexPolynomial from_roots(std::span<const cplx> roots, cplx lead = 1.0) {
        std::vector<cplx> c{lead};
        for (cplx r : roots) {
            std::vector<cplx> next(c.size() + 1, 0.0);
            for (std::size_t k = 0; k < c.size(); ++k) {
                next[k + 1] += c[k];
                next[k] -= r * c[k];
            }
            c = std::move(next);
        }
        return ComplexPolynomial(std::move(c), 0.0);
    }

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
    const std::vector<cplx>& coeffs() const { return c_; }
    cplx coeff(int k) const { return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx{}; }
    cplx leading() const { return c_.empty() ? cplx{} : c_.back(); }

    cplx operator()(cplx z) const {
        cplx acc{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    /// sum |a_k| |z|^k, the scale used by backward-error bounds.
    double abs_eval(double r) const {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
        return acc;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (cplx a : c_) m = std::max(m, std::abs(a));
        return m;
    }

    ComplexPolynomial derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<cplx> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
        return ComplexPolynomial(std::move(d), 0.0);
    }

    /// Antiderivative vanishing at z0.
    ComplexPolynomial antiderivative(cplx z0 = 0.0) const {
        if (c_.empty()) return {};
        std::vector<cplx> a(c_.size() + 1, 0.0);
        for (std::size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / static_cast<double>(k + 1);
        ComplexPolynomial out(std::move(a), 0.0);
        out.c_[0] = -out(z0);
        return out;
    }

    /// Coefficients of p(center + w) in powers of w (repeated synthetic division).
    std::vector<cplx> taylor_at(cplx center) const {
        std::vector<cplx> t = c_;
        const std::size_t n = t.size();
        for (std::size_t k = 0; k + 1 < n; ++k)
            for (std::size_t j = n - 1; j > k; --j) t[j - 1] += center * t[j];
        return t;
    }

    /// p(z) = q(z) (z - r) + rem; returns q and stores rem.
    ComplexPolynomial deflate(cplx r, cplx* remainder = nullptr) const {
        if (c_.empty()) {
            if (remainder) *remainder = 0.0;
            return {};
        }
        std::vector<cplx> q(c_.size() - 1);
        cplx acc = 0.0;
        for (std::size_t k = c_.size(); k-- > 0;) {
            cplx next = acc * r + c_[k];
            if (k > 0) q[k - 1] = next;
            acc = next;
        }
        if (remainder) *remainder = acc;
        return ComplexPolynomial(std::move(q), 0.0);
    }

    ComplexPolynomial trimmed(double coeff_tol) const { return ComplexPolynomial(c_, coeff_tol); }

    ComplexPolynomial& operator+=(const ComplexPolynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
        trim(0.0);
        return *this;
    }
    ComplexPolynomial& operator-=(const ComplexPolynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
        trim(0.0);
        return *this;
    }
    ComplexPolynomial& operator*=(cplx s) {
        for (cplx& a : c_) a *= s;
        trim(0.0);
        return *this;
    }

    friend ComplexPolynomial operator+(ComplexPolynomial a, const ComplexPolynomial& b) { return a += b; }
    friend ComplexPolynomial operator-(ComplexPolynomial a, const ComplexPolynomial& b) { return a -= b; }
    friend ComplexPolynomial operator*(ComplexPolynomial a, cplx s) { return a *= s; }
    friend ComplexPolynomial operator*(cplx s, ComplexPolynomial a) { return a *= s; }
    friend ComplexPolynomial operator*(const ComplexPolynomial& a, const ComplexPolynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<cplx> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return ComplexPolynomial(std::move(c), 0.0);
    }

    friend bool operator==(const ComplexPolynomial&, const ComplexPolynomial&) = default;

private:
    void trim(double tol) {
        while (!c_.empty() && std::abs(c_.back()) <= tol) c_.pop_back();
    }

    std::vector<cplx> c_;
};

/// Polynomial in w = (z - center)/scale rewritten in powers of z.
inline ComplexPolynomial from_scaled_taylor(std::span<const cplx> b, cplx center, double scale) {
    // Horner in the polynomial ring: acc = acc * (z - center)/scale + b_k
    ComplexPolynomial step({-center / scale, 1.0 / scale});
    ComplexPolynomial acc;
    for (std::size_t k = b.size(); k-- > 0;) acc = acc * step + ComplexPolynomial::constant(b[k]);
    return acc;
}

}  // namespace merimm
