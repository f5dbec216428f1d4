#pragma once

// JSON encodings for the CLI and for artifact round-trips; needs nlohmann/json.

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "merimm/contour.hpp"
#include "merimm/error.hpp"
#include "merimm/extend.hpp"
#include "merimm/immersion.hpp"
#include "merimm/param_grid.hpp"
#include "merimm/polynomial.hpp"
#include "merimm/rational.hpp"
#include "merimm/sphere.hpp"
#include "merimm/tolerances.hpp"

namespace merimm::json_io {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw input_error(std::string("json: missing field \"") + key + "\"");
    return j.at(key);
}

inline double real(const json& j, const char* what) {
    if (!j.is_number()) throw input_error(std::string("json: ") + what + " must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw input_error(std::string("json: ") + what + " must be finite");
    return x;
}

inline int integer(const json& j, const char* what) {
    if (!j.is_number_integer()) throw input_error(std::string("json: ") + what + " must be an integer");
    return j.get<int>();
}

}  // namespace detail

// complex numbers: [re, im]; a bare number is read as real
inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
    if (j.is_number()) return {detail::real(j, "complex number"), 0.0};
    if (!j.is_array() || j.size() != 2) throw input_error("json: complex number must be [re, im]");
    return {detail::real(j[0], "real part"), detail::real(j[1], "imaginary part")};
}

// sphere points: a complex number or the string "inf"
inline json to_json(const SpherePoint& p) { return p.is_infinite() ? json("inf") : to_json(p.value()); }

inline SpherePoint sphere_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return SpherePoint::infinity();
        throw input_error("json: sphere point must be a complex number or \"inf\"");
    }
    return complex_from_json(j);
}

inline json to_json(const ComplexPolynomial& p) {
    json a = json::array();
    for (cplx c : p.coeffs()) a.push_back(to_json(c));
    return a;
}

/// Coefficients are kept as given, apart from exact trailing zeros.
inline ComplexPolynomial polynomial_from_json(const json& j) {
    if (!j.is_array()) throw input_error("json: polynomial must be an array of coefficients");
    std::vector<cplx> c;
    for (const json& e : j) c.push_back(complex_from_json(e));
    return ComplexPolynomial(std::move(c), 0.0);
}

inline json to_json(const Pole& p) { return {{"at", to_json(p.location)}, {"order", p.order}}; }

inline json to_json(const PoleSet& s) {
    json a = json::array();
    for (const Pole& p : s.entries) a.push_back(to_json(p));
    return a;
}

inline PoleSet poles_from_json(const json& j) {
    if (!j.is_array()) throw input_error("json: poles must be an array");
    PoleSet s;
    for (const json& e : j) {
        const int m = e.contains("order") ? detail::integer(e.at("order"), "pole order") : 1;
        if (m < 1) throw input_error("json: pole order must be at least 1");
        s.entries.push_back({complex_from_json(detail::field(e, "at")), m});
    }
    return s;
}

inline json to_json(const RationalMap& f) {
    json j{{"num", to_json(f.numerator())}, {"den", to_json(f.denominator())}};
    const PoleSet poles = f.known_poles() ? PoleSet{*f.known_poles()} : pole_set(f);
    if (!poles.empty()) j["poles"] = to_json(poles);
    return j;
}

/// {"num": p} | {"num": p, "den": q} | {"num": p, "poles": [...]}; with both
/// "den" and "poles" the map is taken as stored, otherwise it is reduced.
inline RationalMap rational_from_json(const json& j) {
    if (j.is_array()) return RationalMap(polynomial_from_json(j));
    const ComplexPolynomial num = polynomial_from_json(detail::field(j, "num"));
    const bool has_den = j.contains("den"), has_poles = j.contains("poles");
    if (has_den && has_poles)
        return RationalMap::from_parts(num, polynomial_from_json(j.at("den")), poles_from_json(j.at("poles")).entries);
    if (has_poles) return RationalMap::from_poles(num, poles_from_json(j.at("poles")).entries);
    if (has_den) {
        const ComplexPolynomial den = polynomial_from_json(j.at("den"));
        if (den.is_zero()) throw input_error("json: zero denominator");
        return RationalMap(num, den);
    }
    return RationalMap(num);
}

inline json to_json(const Disc& d) { return {{"center", to_json(d.center)}, {"radius", d.radius}}; }

inline Disc disc_from_json(const json& j) {
    return Disc(complex_from_json(detail::field(j, "center")), detail::real(detail::field(j, "radius"), "radius"));
}

inline json to_json(const CircularDomain& d) {
    json holes = json::array();
    for (const Disc& h : d.holes) holes.push_back(to_json(h));
    return {{"outer", to_json(d.outer)}, {"holes", holes}};
}

inline CircularDomain domain_from_json(const json& j) {
    std::vector<Disc> holes;
    if (j.contains("holes"))
        for (const json& h : j.at("holes")) holes.push_back(disc_from_json(h));
    return CircularDomain(disc_from_json(detail::field(j, "outer")), std::move(holes));
}

inline Target target_from_json(const json& j) {
    const std::string s = j.is_string() ? j.get<std::string>() : "";
    if (s == "C") return Target::C;
    if (s == "CP1") return Target::CP1;
    throw input_error("json: target must be \"C\" or \"CP1\"");
}

// {"circle": {"center", "radius", "samples"?, "turns"?}} | {"polyline": [z...], "closed"?}
inline Contour contour_from_json(const json& j) {
    if (j.contains("circle")) {
        const json& c = j.at("circle");
        const int samples = c.contains("samples") ? detail::integer(c.at("samples"), "samples") : 256;
        const int turns = c.contains("turns") ? detail::integer(c.at("turns"), "turns") : 1;
        return Contour::circle(complex_from_json(detail::field(c, "center")),
                               detail::real(detail::field(c, "radius"), "radius"), samples, turns);
    }
    if (j.contains("polyline")) {
        std::vector<cplx> pts;
        for (const json& z : j.at("polyline")) pts.push_back(complex_from_json(z));
        const bool closed = j.contains("closed") ? j.at("closed").get<bool>() : true;
        return Contour::polyline(std::move(pts), closed);
    }
    throw input_error("json: contour must have \"circle\" or \"polyline\"");
}

inline json to_json(const HomotopyClass& c) {
    return {{"z_class", c.z_class}, {"mod2_class", c.mod2_class}, {"target", target_name(c.target)}};
}

inline HomotopyClass homotopy_class_from_json(const json& j) {
    HomotopyClass c;
    c.z_class = detail::field(j, "z_class").get<std::vector<long>>();
    c.mod2_class = detail::field(j, "mod2_class").get<std::vector<int>>();
    c.target = target_from_json(detail::field(j, "target"));
    return c;
}

inline json to_json(const ImmersionCertificate& c) {
    json j{{"valid", c.valid},
           {"target", target_name(c.target)},
           {"poles_inside", to_json(c.poles_inside)},
           {"derivative_zero_count", c.derivative_zero_count}};
    j["boundary_clearance"] = std::isfinite(c.boundary_clearance) ? json(c.boundary_clearance) : json("inf");
    return j;
}

inline json to_json(const IntegralImmersion& F) {
    return {{"z0", to_json(F.z0)},
            {"f0", to_json(F.f0)},
            {"h0", to_json(F.h0)},
            {"xi", to_json(F.xi)},
            {"theta", to_json(F.theta)},
            {"poles", to_json(F.poles)},
            {"domain", to_json(F.domain)},
            {"detour_radius", F.detour_radius},
            {"degree", F.degree},
            {"achieved_error", F.achieved_error}};
}

inline IntegralImmersion integral_immersion_from_json(const json& j) {
    IntegralImmersion F;
    F.z0 = complex_from_json(detail::field(j, "z0"));
    F.f0 = sphere_from_json(detail::field(j, "f0"));
    F.h0 = complex_from_json(detail::field(j, "h0"));
    F.xi = polynomial_from_json(detail::field(j, "xi"));
    F.theta = polynomial_from_json(detail::field(j, "theta"));
    F.poles = poles_from_json(detail::field(j, "poles"));
    F.domain = disc_from_json(detail::field(j, "domain"));
    F.detour_radius = detail::real(detail::field(j, "detour_radius"), "detour_radius");
    F.degree = detail::integer(detail::field(j, "degree"), "degree");
    F.achieved_error = detail::real(detail::field(j, "achieved_error"), "achieved_error");
    return F;
}

inline bool same(const IntegralImmersion& a, const IntegralImmersion& b) {
    return a.z0 == b.z0 && a.f0 == b.f0 && a.h0 == b.h0 && a.xi.coeffs() == b.xi.coeffs() &&
           a.theta.coeffs() == b.theta.coeffs() && a.poles == b.poles && a.domain.center == b.domain.center &&
           a.domain.radius == b.domain.radius && a.detour_radius == b.detour_radius && a.degree == b.degree &&
           a.achieved_error == b.achieved_error;
}

inline bool same(const RationalMap& a, const RationalMap& b) {
    return a.numerator().coeffs() == b.numerator().coeffs() && a.denominator().coeffs() == b.denominator().coeffs();
}

// {"shape": [n] | [n0, n1], "q": [[k...], ...]}; q entries are index tuples
inline ParamGrid grid_from_json(const json& j, std::vector<int> shape_override = {}) {
    std::vector<int> shape = shape_override;
    if (shape.empty()) shape = detail::field(j, "shape").get<std::vector<int>>();
    ParamGrid g(shape);
    std::vector<bool> q(g.size(), false);
    if (j.is_object() && j.contains("q")) {
        for (const json& e : j.at("q")) {
            std::vector<int> k = e.is_array() ? e.get<std::vector<int>>() : std::vector<int>{detail::integer(e, "Q index")};
            if (k.size() != g.dims()) throw input_error("json: Q index has the wrong dimension");
            for (std::size_t d = 0; d < k.size(); ++d) {
                if (k[d] < 0) k[d] += shape[d];  // -1 is the last point
                if (k[d] < 0 || k[d] >= shape[d]) throw input_error("json: Q index outside the grid");
            }
            q[g.flat_index(k)] = true;
        }
    }
    return ParamGrid(shape, q);
}

inline json to_json(const ParamGrid& g) {
    json q = json::array();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.in_q(i)) q.push_back(g.multi_index(i));
    return {{"shape", g.shape()}, {"q", q}, {"stride", g.stride()}};
}

inline json to_json(const Tolerances& t) {
    return {{"coefficient", t.coefficient},       {"root_separation", t.root_separation},
            {"residue", t.residue},               {"quadrature", t.quadrature},
            {"clearance", t.clearance},           {"root_sweeps", t.root_sweeps},
            {"degree_budget", t.degree_budget},   {"sample_budget", t.sample_budget}};
}

}  // namespace merimm::json_io
