#pragma once

#include <cmath>
#include <complex>

namespace merimm {

/// A point of the Riemann sphere: a finite complex number or infinity.
class SpherePoint {
public:
    SpherePoint() = default;
    SpherePoint(std::complex<double> z) : z_(z) {}  // NOLINT: implicit by design of use sites

    static SpherePoint infinity() {
        SpherePoint p;
        p.inf_ = true;
        return p;
    }

    bool is_infinite() const { return inf_; }
    bool is_finite() const { return !inf_; }
    /// Only meaningful for finite points.
    std::complex<double> value() const { return z_; }

    friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
        if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
        return a.z_ == b.z_;
    }

private:
    std::complex<double> z_{};
    bool inf_ = false;
};

/// Chordal distance on the sphere of diameter 2:
/// 2|p-q| / sqrt((1+|p|^2)(1+|q|^2)), with the limits at infinity.
inline double chordal_distance(const SpherePoint& p, const SpherePoint& q) {
    if (p.is_infinite() && q.is_infinite()) return 0.0;
    if (p.is_infinite()) return 2.0 / std::sqrt(1.0 + std::norm(q.value()));
    if (q.is_infinite()) return 2.0 / std::sqrt(1.0 + std::norm(p.value()));
    const double d = 2.0 * std::abs(p.value() - q.value()) /
                     std::sqrt((1.0 + std::norm(p.value())) * (1.0 + std::norm(q.value())));
    return std::min(d, 2.0);
}

}  // namespace merimm
