#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "merimm/error.hpp"
#include "merimm/polynomial.hpp"

namespace merimm {

struct Root {
    cplx value;
    int multiplicity = 1;
};

/// Thrown when neither simultaneous iteration nor the companion fallback
/// meets the backward-error bound; carries whatever was computed.
class RootFindingError : public Error {
public:
    RootFindingError(const std::string& what, std::vector<Root> partial)
        : Error(ErrorKind::numerical, what), partial_(std::move(partial)) {}
    const std::vector<Root>& partial() const { return partial_; }

private:
    std::vector<Root> partial_;
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// sum_k |z|^k over the coefficient range of p.
inline double power_sum(const ComplexPolynomial& p, double r) {
    double s = 0.0;
    for (std::size_t k = p.coeffs().size(); k-- > 0;) s = s * r + 1.0;
    return s;
}

/// Normwise backward-error bound for |p(z)|: z is accepted as a root when it
/// is an exact root of a polynomial whose coefficients differ from p's by at
/// most 64 n eps max_k |a_k|.
inline double residual_bound(const ComplexPolynomial& p, cplx z) {
    return 64.0 * std::max(1, p.degree()) * kEps * p.max_abs_coeff() * power_sum(p, std::abs(z));
}

inline void horner_with_derivative(const ComplexPolynomial& p, cplx z, cplx& val, cplx& dval) {
    const auto& c = p.coeffs();
    val = 0.0;
    dval = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        dval = dval * z + val;
        val = val * z + c[k];
    }
}

/// Aberth-Ehrlich iteration, Gauss-Seidel style. Returns false when the sweep
/// budget runs out before every root has converged.
inline bool aberth(const ComplexPolynomial& p, std::vector<cplx>& z, int sweeps) {
    const int n = p.degree();
    const auto& c = p.coeffs();
    double radius = std::pow(std::abs(c.front() / c.back()), 1.0 / n);
    if (!(radius > 0.0) || !std::isfinite(radius)) radius = 1.0;
    z.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        z[k] = std::polar(radius, 2.0 * std::numbers::pi * k / n + 0.4);

    std::vector<bool> done(static_cast<std::size_t>(n), false);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        bool all = true;
        for (int i = 0; i < n; ++i) {
            if (done[i]) continue;
            cplx v, dv;
            horner_with_derivative(p, z[i], v, dv);
            if (std::abs(v) <= 0.25 * residual_bound(p, z[i])) {
                done[i] = true;
                continue;
            }
            all = false;
            cplx ratio = v / dv;
            cplx s{};
            for (int j = 0; j < n; ++j)
                if (j != i) s += 1.0 / (z[i] - z[j]);
            cplx w = ratio / (1.0 - ratio * s);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = ratio;
            z[i] -= w;
            if (std::abs(w) <= 4.0 * kEps * std::abs(z[i])) done[i] = true;
        }
        if (all) return true;
    }
    return std::all_of(done.begin(), done.end(), [](bool b) { return b; });
}

inline std::vector<cplx> companion_roots(const ComplexPolynomial& p) {
    const int n = p.degree();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const auto& c = p.coeffs();
    for (int i = 1; i < n; ++i) m(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) m(i, n - 1) = -c[i] / c[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    std::vector<cplx> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()[i];
    return out;
}

inline void newton_polish(const ComplexPolynomial& p, cplx& z, int steps = 3) {
    for (int s = 0; s < steps; ++s) {
        cplx v, dv;
        horner_with_derivative(p, z, v, dv);
        if (std::abs(dv) == 0.0) return;
        cplx next = z - v / dv;
        cplx nv = p(next);
        if (std::abs(nv) >= std::abs(v)) return;
        z = next;
    }
}

/// True when `c` is an m-fold root of a nearby polynomial: every Taylor
/// coefficient of order < m at c is below its normwise backward-error scale.
inline bool is_multiple_root(const ComplexPolynomial& p, cplx c, int m) {
    const std::vector<cplx> t = p.taylor_at(c);
    const std::vector<cplx> flat(p.coeffs().size(), cplx(p.max_abs_coeff()));
    const std::vector<cplx> scale = ComplexPolynomial(flat, 0.0).taylor_at(std::abs(c));
    const double slack = 1024.0 * std::max(1, p.degree()) * kEps;
    for (int j = 0; j < m; ++j)
        if (std::abs(t[j]) > slack * std::abs(scale[j])) return false;
    return true;
}

/// An m-fold root is a simple root of the (m-1)-th derivative; Newton on
/// that derivative recovers the location to full precision.
inline cplx refine_multiple(const ComplexPolynomial& p, cplx c, int m) {
    ComplexPolynomial d = p;
    for (int k = 1; k < m; ++k) d = d.derivative();
    cplx z = c;
    for (int it = 0; it < 30; ++it) {
        cplx v, dv;
        horner_with_derivative(d, z, v, dv);
        if (std::abs(dv) == 0.0) break;
        const cplx step = v / dv;
        z -= step;
        if (std::abs(step) <= 2.0 * kEps * std::max(1.0, std::abs(z))) break;
    }
    return std::abs(z - c) < 1e-3 * std::max(1.0, std::abs(c)) ? z : c;
}

}  // namespace detail

/// All roots of p (degree >= 1) with multiplicities.
///
/// Simultaneous iteration with a companion-matrix fallback, then clustering:
/// roots within the separation tolerance always merge, and looser clusters
/// merge when their centroid passes the multiple-root backward-error test.
/// Every returned root satisfies |p(r)| <= 64 n eps max|a_k| sum |r|^k.
inline std::vector<Root> roots(const ComplexPolynomial& p, const Tolerances& tol = default_tolerances()) {
    if (p.degree() < 1) throw input_error("roots: polynomial must have degree >= 1");
    const auto& c = p.coeffs();
    int zero_mult = 0;
    while (zero_mult < p.degree() && c[zero_mult] == cplx{}) ++zero_mult;
    ComplexPolynomial q(std::vector<cplx>(c.begin() + zero_mult, c.end()), 0.0);

    std::vector<cplx> z;
    if (q.degree() >= 1) {
        if (!detail::aberth(q, z, tol.root_sweeps)) z = detail::companion_roots(q);
        for (cplx& r : z) detail::newton_polish(q, r);
    }

    // Single-linkage grouping at a loose radius, then accept or split.
    const std::size_t n = z.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    auto close = [&](cplx a, cplx b, double rel) {
        return std::abs(a - b) < rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (close(z[i], z[j], 1e-3)) parent[find(i)] = find(j);

    std::vector<Root> out;
    if (zero_mult > 0) out.push_back({0.0, zero_mult});
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> members;
        for (std::size_t j = i; j < n; ++j)
            if (!used[j] && find(j) == find(i)) members.push_back(j);
        for (std::size_t j : members) used[j] = true;

        cplx centroid{};
        for (std::size_t j : members) centroid += z[j];
        centroid /= static_cast<double>(members.size());
        const int m = static_cast<int>(members.size());
        if (m > 1) centroid = detail::refine_multiple(q, centroid, m);
        if (m == 1 || detail::is_multiple_root(q, centroid, m)) {
            out.push_back({centroid, m});
            continue;
        }
        // Not a genuine multiple root: keep members separate except those
        // inside the hard separation tolerance.
        std::vector<bool> taken(members.size(), false);
        for (std::size_t a = 0; a < members.size(); ++a) {
            if (taken[a]) continue;
            cplx sum = z[members[a]];
            int cnt = 1;
            taken[a] = true;
            for (std::size_t b = a + 1; b < members.size(); ++b)
                if (!taken[b] && std::abs(z[members[a]] - z[members[b]]) < tol.root_separation) {
                    sum += z[members[b]];
                    ++cnt;
                    taken[b] = true;
                }
            out.push_back({sum / static_cast<double>(cnt), cnt});
        }
    }

    for (const Root& r : out) {
        if (r.value == cplx{} && zero_mult > 0) continue;
        if (!(std::abs(p(r.value)) <= detail::residual_bound(p, r.value) * std::pow(8.0, r.multiplicity - 1)) &&
            !detail::is_multiple_root(p, r.value, r.multiplicity))
            throw RootFindingError("roots: residual above backward-error bound", out);
    }
    std::sort(out.begin(), out.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return out;
}

}  // namespace merimm
