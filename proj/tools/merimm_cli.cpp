#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "merimm.hpp"
#include "merimm/json_io.hpp"

using namespace merimm;
using json_io::json;

namespace {

struct RunConfig {
    Tolerances tol;
    double eps = 1e-3;
    std::string grid;  // "101" or "3x3"; overrides the input grid shape
    std::string out;
    bool json_out = false;
    std::string input;

    std::vector<int> grid_shape() const {
        std::vector<int> shape;
        if (grid.empty()) return shape;
        std::stringstream ss(grid);
        std::string part;
        while (std::getline(ss, part, 'x')) {
            try {
                std::size_t used = 0;
                const int n = std::stoi(part, &used);
                if (used != part.size() || n < 1) throw std::invalid_argument(part);
                shape.push_back(n);
            } catch (const std::exception&) {
                throw input_error("--grid: expected N or NxM with positive integers, got \"" + grid + "\"");
            }
        }
        return shape;
    }

    void validate() const {
        const double t[] = {tol.residue, tol.root_separation, tol.quadrature, tol.clearance, eps};
        for (double x : t)
            if (!(x > 0.0) || !std::isfinite(x)) throw input_error("tolerances and eps must be positive");
        if (tol.degree_budget < 1) throw input_error("--degree-budget must be at least 1");
        grid_shape();
    }

    json to_json() const {
        json j{{"tolerances", json_io::to_json(tol)}, {"eps", eps}};
        if (!grid.empty()) j["grid"] = grid_shape();
        return j;
    }
};

std::string number(double x) {
    if (!std::isfinite(x)) return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

class Artifacts {
public:
    explicit Artifacts(std::string dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& body) {
        if (dir_.empty()) return;
        std::filesystem::create_directories(dir_);
        std::ofstream f(std::filesystem::path(dir_) / name, std::ios::binary);
        if (!f) throw input_error("cannot write " + name + " in " + dir_);
        f << body;
        names_.push_back(name);
    }

    json listing() const { return names_; }

private:
    std::string dir_;
    std::vector<std::string> names_;
};

json read_input(const std::string& path) {
    std::string text;
    if (path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), {});
    } else {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw input_error("cannot open input " + path);
        text.assign(std::istreambuf_iterator<char>(f), {});
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(std::string("input is not valid JSON: ") + e.what());
    }
}

Target target_of(const json& in) {
    return in.contains("target") ? json_io::target_from_json(in.at("target")) : Target::CP1;
}

std::vector<Contour> contours_of(const json& in) {
    std::vector<Contour> out;
    if (in.contains("contour")) out.push_back(json_io::contour_from_json(in.at("contour")));
    if (in.contains("contours"))
        for (const json& c : in.at("contours")) out.push_back(json_io::contour_from_json(c));
    if (out.empty()) throw input_error("input needs \"contour\" or \"contours\"");
    return out;
}

std::string curve_csv(const std::vector<cplx>& values) {
    std::string s = "t,re,im\n";
    const std::size_t n = values.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double t = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
        s += number(t) + "," + number(values[k].real()) + "," + number(values[k].imag()) + "\n";
    }
    return s;
}

std::string map_csv(const std::vector<cplx>& z, const std::vector<SpherePoint>& w) {
    std::string s = "z_re,z_im,f_re,f_im\n";
    for (std::size_t k = 0; k < z.size(); ++k) {
        s += number(z[k].real()) + "," + number(z[k].imag()) + ",";
        s += w[k].is_infinite() ? std::string("inf,inf") : number(w[k].value().real()) + "," + number(w[k].value().imag());
        s += "\n";
    }
    return s;
}

// "family": [rational...]  or  "affine": {"base": rational, "directions": [rational...]}
// with f_p = (N0 + sum p_d N_d) / (D0 + sum p_d D_d)
std::vector<RationalMap> family_of(const json& in, const ParamGrid& grid, const Tolerances& tol) {
    std::vector<RationalMap> fam;
    if (in.contains("family")) {
        for (const json& f : in.at("family")) fam.push_back(json_io::rational_from_json(f));
        if (fam.size() != grid.size()) throw input_error("family length does not match the grid");
        return fam;
    }
    if (!in.contains("affine")) throw input_error("input needs \"family\" or \"affine\"");
    const json& a = in.at("affine");
    auto part = [](const json& r, const char* key) {
        if (r.is_array()) return std::string(key) == "num" ? json_io::polynomial_from_json(r) : ComplexPolynomial{};
        return r.contains(key) ? json_io::polynomial_from_json(r.at(key)) : ComplexPolynomial{};
    };
    const json& base = json_io::detail::field(a, "base");
    const ComplexPolynomial n0 = part(base, "num");
    const ComplexPolynomial d0 = base.is_object() && base.contains("den") ? part(base, "den") : ComplexPolynomial::constant(1.0);
    std::vector<ComplexPolynomial> dn, dd;
    if (a.contains("directions"))
        for (const json& d : a.at("directions")) {
            dn.push_back(part(d, "num"));
            dd.push_back(part(d, "den"));
        }
    if (dn.size() != grid.dims()) throw input_error("affine family needs one direction per grid axis");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::vector<double> p = grid.point(i);
        ComplexPolynomial num = n0, den = d0;
        for (std::size_t d = 0; d < p.size(); ++d) {
            num += p[d] * dn[d];
            den += p[d] * dd[d];
        }
        if (den.is_zero()) throw input_error("affine family: zero denominator at grid point " + grid.describe(i));
        fam.emplace_back(num, den, tol);
    }
    return fam;
}

ParamGrid grid_of(const json& in, const RunConfig& cfg) {
    if (!in.contains("grid") && cfg.grid.empty()) throw input_error("input needs \"grid\" or --grid");
    return json_io::grid_from_json(in.contains("grid") ? in.at("grid") : json::object(), cfg.grid_shape());
}

json cmd_verify(const json& in, const RunConfig& cfg, Artifacts&) {
    const RationalMap f = json_io::rational_from_json(json_io::detail::field(in, "f"));
    const CircularDomain d = json_io::domain_from_json(json_io::detail::field(in, "domain"));
    return json_io::to_json(verify_immersion(f, d, target_of(in), cfg.tol));
}

json cmd_wind(const json& in, const RunConfig& cfg, Artifacts& art) {
    const RationalMap f = json_io::rational_from_json(json_io::detail::field(in, "f"));
    json rows = json::array();
    std::size_t idx = 0;
    for (const Contour& c : contours_of(in)) {
        const long w = winding_number([&](cplx z) { return f.value(z); }, c, cfg.tol);
        json row{{"winding", w}};
        if (c.closed()) row["argument_principle"] = argument_principle_count(f, c, cfg.tol);
        rows.push_back(row);
        std::vector<cplx> img;
        for (cplx z : c.samples()) img.push_back(f.value(z));
        art.write("curve_" + std::to_string(idx++) + ".csv", curve_csv(img));
    }
    return {{"contours", rows}};
}

json cmd_classify(const json& in, const RunConfig& cfg, Artifacts&) {
    const RationalMap f = json_io::rational_from_json(json_io::detail::field(in, "f"));
    const CircularDomain d = json_io::domain_from_json(json_io::detail::field(in, "domain"));
    return json_io::to_json(classify(f, d, target_of(in), cfg.tol));
}

json cmd_same_component(const json& in, const RunConfig& cfg, Artifacts&) {
    const RationalMap f = json_io::rational_from_json(json_io::detail::field(in, "f"));
    const RationalMap g = json_io::rational_from_json(json_io::detail::field(in, "g"));
    const CircularDomain d = json_io::domain_from_json(json_io::detail::field(in, "domain"));
    const Target t = target_of(in);
    return {{"same_component", same_component(f, g, d, t, cfg.tol)},
            {"f", json_io::to_json(classify(f, d, t, cfg.tol))},
            {"g", json_io::to_json(classify(g, d, t, cfg.tol))}};
}

json certificate_json(const IntegralCertificate& c) {
    json j = json_io::to_json(c.certificate);
    j["max_residue"] = number(c.max_residue) == "inf" ? json("inf") : json(c.max_residue);
    j["log_modulus_finite"] = c.log_modulus_finite;
    j["samples_checked"] = c.samples_checked;
    json rc = json::array(), rq = json::array();
    for (cplx r : c.residues_closed) rc.push_back(json_io::to_json(r));
    for (cplx r : c.residues_contour) rq.push_back(json_io::to_json(r));
    j["residues_closed"] = rc;
    j["residues_contour"] = rq;
    return j;
}

json cmd_extend(const json& in, const RunConfig& cfg, Artifacts& art) {
    const RationalMap f = json_io::rational_from_json(json_io::detail::field(in, "f"));
    const Disc d0 = json_io::disc_from_json(json_io::detail::field(in, "small"));
    const Disc d1 = json_io::disc_from_json(json_io::detail::field(in, "large"));
    const IntegralImmersion F = extend_immersion(f, d0, d1, cfg.eps, cfg.tol);
    const IntegralCertificate cert = verify_integral_immersion(F, 1000, cfg.tol);
    art.write("immersion.json", json_io::to_json(F).dump(2) + "\n");
    std::vector<cplx> zs;
    std::vector<SpherePoint> ws;
    long overflow = 0;
    for (cplx z : disc_samples(d1, 400)) {
        try {
            ws.push_back(evaluate(F, z, 1, cfg.tol));
            zs.push_back(z);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::numerical) throw;
            ++overflow;  // |f~| beyond the double range
        }
    }
    art.write("samples.csv", map_csv(zs, ws));
    return {{"achieved_error", F.achieved_error},
            {"samples_written", zs.size()},
            {"samples_unrepresentable", overflow},
            {"degree", F.degree},
            {"poles", json_io::to_json(F.poles)},
            {"certificate", certificate_json(cert)},
            {"immersion", json_io::to_json(F)}};
}

json cmd_extend_family(const json& in, const RunConfig& cfg, Artifacts& art) {
    const ParamGrid grid = grid_of(in, cfg);
    const std::vector<RationalMap> fam = family_of(in, grid, cfg.tol);
    const Disc d0 = json_io::disc_from_json(json_io::detail::field(in, "small"));
    const Disc d1 = json_io::disc_from_json(json_io::detail::field(in, "large"));
    const int stride = in.contains("stride") ? json_io::detail::integer(in.at("stride"), "stride") : 0;
    const FamilyExtension r = extend_family(fam, grid, d0, d1, cfg.eps, cfg.tol, stride);
    json maps = json::array(), valid = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < r.maps.size(); ++i) {
        maps.push_back(json_io::to_json(r.maps[i]));
        valid.push_back(verify_integral_immersion(r.maps[i], 1000, cfg.tol).certificate.valid);
        worst = std::max(worst, r.errors[i]);
    }
    art.write("family.json", maps.dump(2) + "\n");
    return {{"grid", json_io::to_json(r.grid)},
            {"errors", r.errors},
            {"max_error", worst},
            {"node_degrees", r.node_degrees},
            {"valid", valid},
            {"maps", maps}};
}

json cmd_blend(const json& in, const RunConfig& cfg, Artifacts& art) {
    const ParamGrid grid = grid_of(in, cfg);
    const std::vector<RationalMap> fam = family_of(in, grid, cfg.tol);
    const Disc s = json_io::disc_from_json(json_io::detail::field(in, "disc"));
    std::vector<ComplexFunction> fns;
    std::vector<ComplexPolynomial> polys;
    bool all_poly = true;
    for (const RationalMap& f : fam) {
        for (const Pole& p : pole_set(f, cfg.tol).entries)
            if (s.contains_closed(p.location))
                throw precondition_error("blend: a map has a pole on the compact disc");
        fns.push_back([f](cplx z) { return f.value(z); });
        all_poly = all_poly && f.is_polynomial();
        if (f.is_polynomial()) polys.push_back(f.numerator() * (1.0 / f.denominator().leading()));
    }
    const SampledFamily sf = all_poly ? SampledFamily::from_polys(grid, polys, s) : SampledFamily::from_functions(grid, fns, s);
    BlendOptions opt;
    opt.degree_budget = cfg.tol.degree_budget;
    opt.strict_net = in.contains("strict_net") && in.at("strict_net").get<bool>();
    const BlendResult b = blend_parametric(sf, cfg.eps, opt);

    json out_family = json::array();
    std::vector<double> errors = b.errors;
    std::vector<std::optional<ComplexFunction>> xi(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid.in_q(i)) xi[i] = fns[i];
    const SampledFamily fixed = grid.q_empty() ? b.family : fix_on_Q(b.family, xi, q_cutoff(grid));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.in_q(i)) {
            out_family.push_back(json_io::to_json(fam[i]));
            errors[i] = detail::boundary_sup(fixed.maps[i], sf.maps[i], s);
        } else {
            out_family.push_back(json_io::to_json(RationalMap(*fixed.polys[i])));
        }
    }
    art.write("blend.json", out_family.dump(2) + "\n");
    double worst = 0.0;
    for (double e : errors) worst = std::max(worst, e);
    return {{"net", b.net}, {"stride", b.stride}, {"errors", errors}, {"max_error", worst}, {"family", out_family}};
}

json cmd_seed(const json& in, const RunConfig& cfg, Artifacts&) {
    std::vector<FormalSeed> seeds;
    for (const json& s : json_io::detail::field(in, "seeds")) {
        FormalSeed f;
        f.x1 = json_io::complex_from_json(json_io::detail::field(s, "x1"));
        f.a = json_io::sphere_from_json(json_io::detail::field(s, "a"));
        if (s.contains("v")) f.v = json_io::complex_from_json(s.at("v"));
        if (s.contains("c")) f.c = json_io::complex_from_json(s.at("c"));
        seeds.push_back(f);
    }
    std::vector<double> chi(seeds.size(), 1.0);
    if (in.contains("chi")) chi = in.at("chi").get<std::vector<double>>();
    if (!in.contains("chi"))
        for (std::size_t i = 0; i < seeds.size(); ++i)
            if (seeds[i].a.is_infinite()) chi[i] = 0.0;
    const double r = in.contains("radius") ? json_io::detail::real(in.at("radius"), "radius") : 0.1;
    const std::vector<RationalMap> maps = seed_disc_family(seeds, chi);
    json rows = json::array();
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const ImmersionCertificate c = verify_immersion(maps[i], CircularDomain(Disc(seeds[i].x1, r)), Target::CP1, cfg.tol);
        rows.push_back({{"map", json_io::to_json(maps[i])}, {"valid", c.valid}});
    }
    return {{"radius", r}, {"seeds", rows}};
}

json cmd_chart_check(const json& in, const RunConfig& cfg, Artifacts&) {
    json rows = json::array();
    for (const Contour& c : contours_of(in)) {
        json row{{"transition_winding", chart_transition_winding(c, cfg.tol)}};
        if (in.contains("f")) {
            const RationalMap f = json_io::rational_from_json(in.at("f"));
            const RationalMap fp = derivative(f, cfg.tol);
            const RationalMap gp = derivative(RationalMap(f.denominator(), f.numerator(), cfg.tol), cfg.tol);
            const long wf = winding_number([&](cplx z) { return fp.value(z); }, c, cfg.tol);
            const long wg = winding_number([&](cplx z) { return gp.value(z); }, c, cfg.tol);
            row["winding_derivative"] = wf;
            row["winding_inverse_derivative"] = wg;
            row["difference"] = wf - wg;
        }
        rows.push_back(row);
    }
    return {{"contours", rows}};
}

std::string summary(const std::string& cmd, const json& r) {
    if (cmd == "verify") return std::string("valid=") + (r.at("valid").get<bool>() ? "true" : "false");
    if (cmd == "classify") return "z_class=" + r.at("z_class").dump() + " mod2_class=" + r.at("mod2_class").dump();
    if (cmd == "same-component") return std::string("same_component=") + (r.at("same_component").get<bool>() ? "true" : "false");
    if (cmd == "extend") return "achieved_error=" + number(r.at("achieved_error").get<double>()) +
                                " valid=" + (r.at("certificate").at("valid").get<bool>() ? "true" : "false");
    if (r.contains("max_error")) return "max_error=" + number(r.at("max_error").get<double>());
    return "ok";
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::input: return 1;
        case ErrorKind::precondition: return 2;
        default: return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meromorphic immersion toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    app.add_option("--eps", cfg.eps, "target approximation error")->envname("MERIMM_EPS");
    app.add_option("--tol-residue", cfg.tol.residue, "residue acceptance bound")->envname("MERIMM_TOL_RESIDUE");
    app.add_option("--tol-root", cfg.tol.root_separation, "root separation")->envname("MERIMM_TOL_ROOT");
    app.add_option("--tol-quad", cfg.tol.quadrature, "quadrature tolerance")->envname("MERIMM_TOL_QUAD");
    app.add_option("--tol-clearance", cfg.tol.clearance, "relative contour clearance")->envname("MERIMM_TOL_CLEARANCE");
    app.add_option("--degree-budget", cfg.tol.degree_budget, "largest polynomial degree")->envname("MERIMM_DEGREE_BUDGET");
    app.add_option("--grid", cfg.grid, "parameter grid shape, N or NxM")->envname("MERIMM_GRID");
    app.add_option("--out", cfg.out, "directory for report.json and artifacts")->envname("MERIMM_OUT");
    app.add_flag("--json", cfg.json_out, "print the JSON report on stdout");

    using Handler = json (*)(const json&, const RunConfig&, Artifacts&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands{
        {"verify", "immersion certificate on a circular domain", cmd_verify},
        {"wind", "winding numbers of f along contours", cmd_wind},
        {"classify", "homotopy class of an immersion", cmd_classify},
        {"same-component", "compare the classes of two immersions", cmd_same_component},
        {"extend", "extend an immersion from a small disc to a large one", cmd_extend},
        {"extend-family", "extend a parametric family over a grid", cmd_extend_family},
        {"blend", "parametric polynomial approximation on a disc", cmd_blend},
        {"seed", "holomorphic discs through formal seeds", cmd_seed},
        {"chart-check", "chart-transition windings", cmd_chart_check},
    };
    std::string chosen;
    Handler handler = nullptr;
    for (const auto& [name, help, h] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("input", cfg.input, "input JSON file, - for stdin")->required();
        sub->callback([&chosen, &handler, name = name, h = h] {
            chosen = name;
            handler = h;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        cfg.validate();
        const json in = read_input(cfg.input);
        Artifacts art(cfg.out);
        json result = handler(in, cfg, art);
        json report{{"command", chosen}, {"config", cfg.to_json()}, {"result", result}};
        report["artifacts"] = art.listing();
        const std::string text = report.dump(2) + "\n";
        if (!cfg.out.empty()) {
            std::filesystem::create_directories(cfg.out);
            std::ofstream f(std::filesystem::path(cfg.out) / "report.json", std::ios::binary);
            if (!f) throw input_error("cannot write report.json in " + cfg.out);
            f << text;
        }
        if (cfg.json_out || cfg.out.empty())
            std::cout << text;
        else
            std::cout << chosen << ": " << summary(chosen, result) << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "merimm " << chosen << ": " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        std::cerr << "merimm " << chosen << ": malformed input: " << e.what() << "\n";
        return 1;
    }
}
