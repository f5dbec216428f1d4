#pragma once

namespace merimm {

/// Numerical knobs shared by every module. Defaults are tuned for desk-scale
/// inputs (polynomial degree <= 64, coordinates of modulus <= 10).
struct Tolerances {
    double coefficient = 1e-12;      // trailing coefficients at or below this are dropped
    double root_separation = 1e-8;   // roots closer than this are one root
    double residue = 1e-9;           // acceptance bound for vanishing residues
    double quadrature = 1e-10;       // absolute tolerance of adaptive quadrature
    double clearance = 1e-6;         // relative to contour diameter
    int root_sweeps = 200;           // simultaneous-iteration budget
    int degree_budget = 256;         // largest Taylor truncation degree
    long sample_budget = 1L << 20;   // winding refinement budget per contour
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

}  // namespace merimm
