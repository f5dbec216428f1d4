#pragma once

#include <random>
#include <vector>

#include "merimm/rational.hpp"

namespace merimm::testing {

/// Random points in the disc |z| < radius, pairwise at least `sep` apart and
/// at least `sep` away from every entry of `avoid`.
inline std::vector<cplx> separated_points(std::mt19937_64& rng, int count, double radius, double sep,
                                          const std::vector<cplx>& avoid = {}) {
    std::uniform_real_distribution<double> u(-radius, radius);
    std::vector<cplx> out;
    while (static_cast<int>(out.size()) < count) {
        cplx z(u(rng), u(rng));
        if (std::abs(z) >= radius) continue;
        bool ok = true;
        for (cplx w : out) ok = ok && std::abs(z - w) >= sep;
        for (cplx w : avoid) ok = ok && std::abs(z - w) >= sep;
        if (ok) out.push_back(z);
    }
    return out;
}

inline cplx random_unit(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> a(0.0, 6.283185307179586);
    std::uniform_real_distribution<double> m(0.5, 2.0);
    return std::polar(m(rng), a(rng));
}

struct RandomRational {
    RationalMap f;
    std::vector<cplx> zeros;
    std::vector<cplx> poles;
};

/// Random rational map with total degree <= max_degree built from separated
/// linear factors, so the true zeros and poles are known.
inline RandomRational random_rational(std::mt19937_64& rng, int max_degree, double radius = 2.0,
                                      double sep = 0.3) {
    std::uniform_int_distribution<int> deg(0, max_degree);
    int nz = deg(rng);
    int np = deg(rng);
    if (np == 0) np = 1;
    auto pts = separated_points(rng, nz + np, radius, sep);
    RandomRational r;
    r.zeros.assign(pts.begin(), pts.begin() + nz);
    r.poles.assign(pts.begin() + nz, pts.end());
    r.f = RationalMap::unreduced(ComplexPolynomial::from_roots(r.zeros, random_unit(rng)),
                                 ComplexPolynomial::from_roots(r.poles));
    return r;
}

/// z^d for any nonzero integer d.
inline RationalMap power_map(int d) {
    if (d >= 0) return RationalMap(ComplexPolynomial::monomial(d));
    return RationalMap::from_poles(ComplexPolynomial::constant(1.0), {{0.0, -d}});
}

/// (z^2 - z^-2)/(2i) + (z - z^-1)/2 written over z^2.
inline RationalMap figure_eight() {
    const cplx i(0.0, 1.0);
    return RationalMap::from_poles(ComplexPolynomial{i / 2.0, -0.5, 0.0, 0.5, -i / 2.0}, {{0.0, 2}});
}

}  // namespace merimm::testing
