#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "merimm/contour.hpp"
#include "merimm/error.hpp"
#include "merimm/extend.hpp"
#include "merimm/param_grid.hpp"
#include "merimm/polynomial.hpp"
#include "merimm/tolerances.hpp"

namespace merimm {

/// One finite-valued map per grid point on a common disc.
struct SampledFamily {
    ParamGrid grid;
    std::vector<ComplexFunction> maps;
    Disc domain;
    std::vector<std::optional<ComplexPolynomial>> polys;  // set where the map is a known polynomial

    static SampledFamily from_functions(ParamGrid g, std::vector<ComplexFunction> fs, Disc d) {
        if (fs.size() != g.size()) throw input_error("family: one map per grid point required");
        SampledFamily f;
        f.grid = std::move(g);
        f.maps = std::move(fs);
        f.domain = d;
        f.polys.assign(f.maps.size(), std::nullopt);
        return f;
    }

    static SampledFamily from_polys(ParamGrid g, const std::vector<ComplexPolynomial>& ps, Disc d) {
        if (ps.size() != g.size()) throw input_error("family: one map per grid point required");
        SampledFamily f;
        f.grid = std::move(g);
        f.domain = d;
        for (const ComplexPolynomial& p : ps) {
            f.maps.push_back([p](cplx z) { return p(z); });
            f.polys.emplace_back(p);
        }
        return f;
    }

    std::size_t size() const { return maps.size(); }
};

namespace detail {

inline std::vector<cplx> circle_points(const Disc& d, int n = 256) {
    std::vector<cplx> pts;
    for (int k = 0; k < n; ++k) pts.push_back(d.center + std::polar(d.radius, 2.0 * std::numbers::pi * k / n));
    return pts;
}

/// Sampled sup of |f - g| on the boundary circle; by the maximum principle
/// this bounds the difference on the closed disc for holomorphic f, g.
inline double boundary_sup(const ComplexFunction& f, const ComplexFunction& g, const Disc& d, int n = 256) {
    double m = 0.0;
    for (cplx z : circle_points(d, n)) m = std::max(m, std::abs(f(z) - g(z)));
    return m;
}

}  // namespace detail

/// Smallest-degree Taylor truncation at the disc centre with sampled
/// boundary error below eps.
inline ComplexPolynomial poly_approx_on_disc(const ComplexFunction& f, const Disc& s, double eps,
                                             int degree_budget = default_tolerances().degree_budget) {
    if (!(eps > 0.0)) throw input_error("poly_approx_on_disc: eps must be positive");
    const detail::TaylorSamples ts = detail::sample_taylor(f, s.center, s.radius, degree_budget);
    const std::vector<cplx> pts = detail::circle_points(s);
    std::vector<cplx> target(pts.size()), partial(pts.size(), 0.0), unit(pts.size(), 1.0);
    for (std::size_t j = 0; j < pts.size(); ++j) target[j] = f(pts[j]);
    double err = 0.0;
    for (int d = 0; d <= degree_budget; ++d) {
        err = 0.0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            partial[j] += ts.scaled[d] * unit[j];
            unit[j] *= (pts[j] - s.center) / s.radius;
            err = std::max(err, std::abs(partial[j] - target[j]));
        }
        if (err < eps) return ts.truncation(d);
    }
    std::ostringstream os;
    os << "poly_approx_on_disc: degree budget " << degree_budget << " exceeded; achieved " << err;
    throw numerical_error(os.str());
}

inline ComplexPolynomial poly_approx_on_disc(const ComplexPolynomial& p, const Disc& s, double eps,
                                             int degree_budget = default_tolerances().degree_budget) {
    if (!(eps > 0.0)) throw input_error("poly_approx_on_disc: eps must be positive");
    if (p.degree() <= degree_budget) return p;
    return poly_approx_on_disc([p](cplx z) { return p(z); }, s, eps, degree_budget);
}

struct BlendOptions {
    bool strict_net = false;  // demand the adjacent-point net condition up front
    int degree_budget = default_tolerances().degree_budget;
};

struct BlendResult {
    SampledFamily family;
    std::vector<std::size_t> net;  // grid indices of the net points
    int stride = 1;                // 0 for the single-point net
    std::vector<double> errors;    // sampled sup |f~_p - f_p| per grid point
};

/// f~_p = sum_j chi_j(p) g_j with g_j polynomial eps/4-approximations of
/// f at the net points; the net is the coarsest one for which every grid
/// point is within eps/4 of each net point whose weight is positive there.
inline BlendResult blend_parametric(const SampledFamily& fam, double eps, const BlendOptions& opt = {}) {
    if (!(eps > 0.0)) throw input_error("blend: eps must be positive");
    const ParamGrid& grid = fam.grid;
    const std::size_t n = fam.size();
    if (n != grid.size()) throw input_error("blend: family size does not match the grid");
    const double quarter = 0.25 * eps;
    auto dist = [&](std::size_t i, std::size_t j) { return detail::boundary_sup(fam.maps[i], fam.maps[j], fam.domain); };

    if (opt.strict_net)
        for (auto [i, j] : grid.adjacent_pairs())
            if (!(dist(i, j) < quarter))
                throw precondition_error("blend: grid too coarse, adjacent maps " + grid.describe(i) + " and " +
                                         grid.describe(j) + " differ by more than eps/4; refine the grid");

    auto approx = [&](std::size_t j) {
        if (fam.polys[j]) return poly_approx_on_disc(*fam.polys[j], fam.domain, quarter, opt.degree_budget);
        return poly_approx_on_disc(fam.maps[j], fam.domain, quarter, opt.degree_budget);
    };

    BlendResult out;
    std::vector<ComplexPolynomial> blended(n);
    const std::size_t mid = n / 2;
    bool single = true;
    for (std::size_t i = 0; i < n && single; ++i) single = dist(i, mid) < quarter;
    if (single) {
        out.stride = 0;
        out.net = {mid};
        const ComplexPolynomial g = approx(mid);
        blended.assign(n, g);
    } else {
        int chosen = 1;
        for (int s : grid.allowed_strides()) {
            const ParamGrid g = grid.with_stride(s);
            bool ok = true;
            for (std::size_t i = 0; i < n && ok; ++i)
                for (auto [node, w] : g.weights(i))
                    if (w > 0.0 && node != i && !(dist(i, node) < quarter)) {
                        ok = false;
                        break;
                    }
            if (ok) {
                chosen = s;
                break;
            }
        }
        out.stride = chosen;
        const ParamGrid g = grid.with_stride(chosen);
        out.net = g.nodes();
        std::vector<std::optional<ComplexPolynomial>> node_poly(n);
        for (std::size_t j : out.net) node_poly[j] = approx(j);
        for (std::size_t i = 0; i < n; ++i) {
            ComplexPolynomial acc;
            for (auto [node, w] : g.weights(i))
                if (w > 0.0) acc += w * *node_poly[node];
            blended[i] = std::move(acc);
        }
    }

    out.family = SampledFamily::from_polys(grid, blended, fam.domain);
    out.errors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.errors[i] = detail::boundary_sup(out.family.maps[i], fam.maps[i], fam.domain);
        if (!(out.errors[i] < 0.5 * eps)) {
            std::ostringstream os;
            os << "blend: error " << out.errors[i] << " at grid point " << grid.describe(i) << " exceeds eps/2";
            throw numerical_error(os.str());
        }
    }
    return out;
}

/// Cutoff equal to 1 on Q, falling linearly to 0 at `reach` + 1 grid steps
/// (Chebyshev index distance); reach = 0 gives the indicator of Q.
inline std::vector<double> q_cutoff(const ParamGrid& grid, int reach = 0) {
    std::vector<double> chi(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::vector<int> ki = grid.multi_index(i);
        int best = -1;
        for (std::size_t q = 0; q < grid.size(); ++q) {
            if (!grid.in_q(q)) continue;
            const std::vector<int> kq = grid.multi_index(q);
            int d = 0;
            for (std::size_t a = 0; a < ki.size(); ++a) d = std::max(d, std::abs(ki[a] - kq[a]));
            if (best < 0 || d < best) best = d;
        }
        if (best >= 0) chi[i] = std::max(0.0, 1.0 - static_cast<double>(best) / (reach + 1));
    }
    return chi;
}

/// Nearest-cell extension of maps given on Q to the grid points within
/// `reach` steps; ties go to the lower grid index.
inline std::vector<std::optional<ComplexFunction>> extend_from_q(const ParamGrid& grid,
                                                                 const std::vector<std::optional<ComplexFunction>>& on_q,
                                                                 int reach = 0) {
    if (on_q.size() != grid.size()) throw input_error("extend_from_q: one entry per grid point required");
    std::vector<std::optional<ComplexFunction>> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::vector<int> ki = grid.multi_index(i);
        int best = -1;
        std::size_t arg = 0;
        for (std::size_t q = 0; q < grid.size(); ++q) {
            if (!grid.in_q(q)) continue;
            if (!on_q[q]) throw input_error("extend_from_q: missing map at Q point " + grid.describe(q));
            const std::vector<int> kq = grid.multi_index(q);
            int d = 0;
            for (std::size_t a = 0; a < ki.size(); ++a) d = std::max(d, std::abs(ki[a] - kq[a]));
            if (best < 0 || d < best) {
                best = d;
                arg = q;
            }
        }
        if (best >= 0 && best <= reach) out[i] = on_q[arg];
    }
    return out;
}

/// chi(p) xi_p + (1 - chi(p)) f~_p; at chi = 1 the output is xi_p itself.
inline SampledFamily fix_on_Q(const SampledFamily& blended, const std::vector<std::optional<ComplexFunction>>& xi,
                              const std::vector<double>& chi) {
    const std::size_t n = blended.size();
    if (xi.size() != n || chi.size() != n) throw input_error("fix_on_Q: one entry per grid point required");
    SampledFamily out = blended;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = chi[i];
        if (!(c >= 0.0 && c <= 1.0)) throw input_error("fix_on_Q: cutoff outside [0, 1]");
        if (blended.grid.in_q(i) && c != 1.0)
            throw precondition_error("fix_on_Q: cutoff is not 1 at Q point " + blended.grid.describe(i));
        if (c == 0.0) continue;
        if (!xi[i]) throw precondition_error("fix_on_Q: cutoff support leaves the domain of the Q data at " +
                                             blended.grid.describe(i));
        out.polys[i].reset();
        if (c == 1.0) {
            out.maps[i] = *xi[i];
            continue;
        }
        out.maps[i] = [c, x = *xi[i], f = blended.maps[i]](cplx z) { return c * x(z) + (1.0 - c) * f(z); };
    }
    return out;
}

}  // namespace merimm
