#pragma once

// Batch runner: executes named verification suites on a scene, writes
// report.json plus per-suite CSV tables, and maps the outcome onto an exit
// code (0 ok, 1 input error, 2..9 first failing suite).

#include "wulffkit/core.hpp"
#include "wulffkit/curvature.hpp"
#include "wulffkit/distance.hpp"
#include "wulffkit/duality.hpp"
#include "wulffkit/hk.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/integrand.hpp"
#include "wulffkit/scene.hpp"
#include "wulffkit/steiner.hpp"
#include "wulffkit/variation.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace wulffkit {

inline constexpr int kReportSchemaVersion = 1;

struct RunOptions {
    std::string command = "all";
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> resolution;
    std::optional<int> grid;
    bool quiet = false;
};

struct Invariant {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    std::string relation;  // "<=" or ">"
    bool passed = false;
};

struct SuiteReport {
    std::string name;
    std::string anchor;
    std::vector<Invariant> invariants;
    json data = json::object();
    double seconds = 0.0;  // wall time; kept out of report.json

    bool passed() const {
        return std::all_of(invariants.begin(), invariants.end(), [](const Invariant& i) { return i.passed; });
    }
    void at_most(const std::string& name, double value, double bound) {
        invariants.push_back({name, value, bound, "<=", std::isfinite(value) && value <= bound});
    }
    void above(const std::string& name, double value, double bound) {
        invariants.push_back({name, value, bound, ">", std::isfinite(value) && value > bound});
    }
    void holds(const std::string& name, bool ok) { invariants.push_back({name, ok ? 1.0 : 0.0, 1.0, "==", ok}); }
};

inline int suite_exit_code(const std::string& suite) {
    const auto& names = suite_names();
    return 2 + static_cast<int>(std::find(names.begin(), names.end(), suite) - names.begin());
}

inline std::string suite_anchor(const std::string& suite) {
    static const std::map<std::string, std::string> anchors = {
        {"dual", "conjugate-norm duality identities"},
        {"wulff", "Wulff shape as the unit conjugate ball; oriented boundary quadrature"},
        {"curv", "F-principal curvatures of a Wulff boundary all equal 1/r; umbilicity implies Wulff"},
        {"hk", "anisotropic Heintze-Karcher inequality and its equality case"},
        {"mr", "Montiel-Ros tube integral chain vol <= mr <= n/(n+1) int F/H"},
        {"steiner", "Steiner polynomial characterization of positive reach; tube coefficient formula"},
        {"reach", "anisotropic reach; comparison reach >= rho reach^F"},
        {"var", "first variation of anisotropic perimeter; criticality of Wulff shapes"},
    };
    return anchors.at(suite);
}

namespace detail {

class Csv {
public:
    Csv(const std::filesystem::path& path, const std::string& header) : out_(path) {
        if (!out_) throw InputError("cannot write '" + path.string() + "'");
        out_ << header << '\n' << std::setprecision(17);
    }
    template <class... T>
    void row(const T&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cells, first = false), ...);
        out_ << '\n';
    }
    std::ostream& stream() { return out_; }

private:
    std::ofstream out_;
};

inline std::string axis_header(const std::string& stem, int dim) {
    std::string s;
    for (int i = 1; i <= dim; ++i) s += (i > 1 ? "," : "") + stem + std::to_string(i);
    return s;
}

inline std::string join(const Vec& v) {
    std::ostringstream ss;
    ss << std::setprecision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) ss << (i ? "," : "") << v(i);
    return ss.str();
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

/// JSON has no NaN or infinity; non-finite values become null.
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace detail

class Runner {
public:
    Runner(Scene scene, RunOptions opts) : scene_(std::move(scene)), opts_(std::move(opts)) {
        if (opts_.seed) scene_.seed = *opts_.seed;
        if (opts_.resolution) {
            require(*opts_.resolution >= min_surface_resolution(scene_.dim), "--resolution is below the minimum node count");
            scene_.resolution = *opts_.resolution;
        }
        if (opts_.grid) {
            require(*opts_.grid >= 8 && *opts_.grid <= 4096, "--grid must lie in [8, 4096]");
            scene_.grid = *opts_.grid;
        }
        const auto& names = suite_names();
        if (opts_.command == "all") {
            const auto& chosen = scene_.suites;
            const bool every = chosen.empty() || std::find(chosen.begin(), chosen.end(), "all") != chosen.end();
            for (const auto& n : names)
                if (every || std::find(chosen.begin(), chosen.end(), n) != chosen.end()) suites_.push_back(n);
        } else {
            require(std::find(names.begin(), names.end(), opts_.command) != names.end(),
                    "unknown command '" + opts_.command + "'");
            suites_.push_back(opts_.command);
        }
    }

    /// Runs the selected suites and writes the outputs. Throws InputError.
    int run() {
        std::filesystem::create_directories(opts_.out_dir);
        json suites = json::object();
        json failing = json::array();
        int code = 0;
        for (const auto& name : suites_) {
            const auto start = std::chrono::steady_clock::now();
            SuiteReport r = run_suite(name);
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (!r.passed()) {
                failing.push_back(name);
                if (code == 0) code = suite_exit_code(name);
            }
            if (!opts_.quiet)
                std::cerr << std::left << std::setw(8) << name << (r.passed() ? " ok    " : " FAIL  ") << std::fixed
                          << std::setprecision(2) << r.seconds << " s" << std::defaultfloat << '\n';
            suites[name] = serialize(r);
            reports_.push_back(std::move(r));
        }
        report_ = header();
        report_["suites"] = suites;
        report_["failing_suites"] = failing;
        report_["exit_code"] = code;
        if (classification_) report_["classification"] = *classification_;
        std::ofstream out(std::filesystem::path(opts_.out_dir) / "report.json");
        if (!out) throw InputError("cannot write report.json in '" + opts_.out_dir + "'");
        out << report_.dump(2) << '\n';
        return code;
    }

    const json& report() const { return report_; }
    const std::vector<SuiteReport>& suite_reports() const { return reports_; }
    const Scene& scene() const { return scene_; }

private:
    using Path = std::filesystem::path;

    Path file(const std::string& name) const { return Path(opts_.out_dir) / name; }

    json header() const {
        json h;
        h["schema"] = "wulffkit-report";
        h["schema_version"] = kReportSchemaVersion;
        h["scene"] = scene_.name;
        h["command"] = opts_.command;
        h["dimension"] = scene_.dim;
        h["integrand"] = {{"family", to_string(scene_.integrand().family())},
                          {"terms", scene_.integrand().terms().size()}};
        json bodies = json::array();
        for (const auto& b : scene_.bodies) bodies.push_back({{"id", b.id}, {"kind", b.kind}});
        h["bodies"] = bodies;
        h["seed"] = scene_.seed;
        h["rng"] = "mt19937_64";
        h["rng_seeding"] = "seed_seq{seed low 32 bits, seed high 32 bits, suite index}";
        h["resolution"] = scene_.resolution;
        h["grid"] = scene_.grid;
        return h;
    }

    static json serialize(const SuiteReport& r) {
        json s;
        s["anchor"] = r.anchor;
        s["passed"] = r.passed();
        json inv = json::array();
        for (const auto& i : r.invariants)
            inv.push_back({{"name", i.name}, {"value", detail::number(i.value)}, {"bound", detail::number(i.bound)},
                           {"relation", i.relation}, {"passed", i.passed}});
        s["invariants"] = inv;
        s["data"] = r.data;
        return s;
    }

    std::mt19937_64 suite_rng(const std::string& suite) const {
        const auto index = static_cast<std::uint32_t>(suite_exit_code(suite) - 2);
        std::seed_seq seq{static_cast<std::uint32_t>(scene_.seed & 0xffffffffu),
                          static_cast<std::uint32_t>(scene_.seed >> 32), index};
        return std::mt19937_64(seq);
    }

    SuiteReport run_suite(const std::string& name) {
        SuiteReport r;
        r.name = name;
        r.anchor = suite_anchor(name);
        try {
            if (name == "dual") suite_dual(r);
            else if (name == "wulff") suite_wulff(r);
            else if (name == "curv") suite_curv(r);
            else if (name == "hk") suite_hk(r);
            else if (name == "mr") suite_mr(r);
            else if (name == "steiner") suite_steiner(r);
            else if (name == "reach") suite_reach(r);
            else suite_var(r);
        } catch (const InputError&) {
            throw;
        } catch (const Error& e) {
            // numerical failure inside the suite: report it as a failed invariant
            r.data["error"] = e.what();
            r.holds("completed-without-error", false);
        }
        return r;
    }

    // ---- shared state ------------------------------------------------------

    const DualNorm& dual() const { return *scene_.dual; }
    const Integrand& integrand() const { return scene_.integrand(); }
    int n() const { return scene_.dim - 1; }

    /// Radius r when the body is the F*-ball of radius r about its center.
    std::optional<double> wulff_radius_for(const BodySpec& b) const {
        if (b.body.kind() == StarBody::Kind::wulff) return b.body.wulff_radius();
        if (b.body.kind() == StarBody::Kind::ellipsoid && dual().has_closed_form()) {
            const Mat& minv = integrand().terms().front().inverse;
            const Mat& q = b.body.matrix();
            const double r2 = minv(0, 0) / q(0, 0);
            if ((q * r2 - minv).cwiseAbs().maxCoeff() <= 1e-12 * minv.cwiseAbs().maxCoeff()) return std::sqrt(r2);
        }
        return std::nullopt;
    }

    bool all_wulff() const {
        return std::all_of(scene_.bodies.begin(), scene_.bodies.end(),
                           [&](const BodySpec& b) { return wulff_radius_for(b).has_value(); });
    }

    const SurfaceQuadrature& quadrature() {
        if (!quadrature_) {
            std::vector<SurfaceQuadrature> parts;
            for (const auto& b : scene_.bodies) parts.push_back(sample_surface(b.body, scene_.resolution));
            quadrature_ = concatenate(parts);
        }
        return *quadrature_;
    }

    const std::vector<CurvatureSample>& samples() {
        if (!samples_) samples_ = curvature_samples(scene_.star_bodies(), integrand(), quadrature());
        return *samples_;
    }

    struct HKState {
        std::optional<HKReport> report;
        std::string violation;
        std::size_t violation_node = 0;
    };

    const HKState& hk_state() {
        if (!hk_) {
            HKState s;
            HKOptions o;
            o.tol_eq = scene_.tol.classifier.tol_eq;
            o.umbilicity = scene_.tol.umbilicity;
            try {
                s.report = hk_evaluate(scene_.star_bodies(), integrand(), scene_.resolution, o);
            } catch (const HypothesisViolation& e) {
                s.violation = e.what();
                s.violation_node = e.node;
            }
            hk_ = std::move(s);
        }
        return *hk_;
    }

    SetKind distance_set() const {
        if (scene_.steiner_set == "solid") return SetKind::solid;
        if (scene_.steiner_set == "boundary") return SetKind::boundary;
        return SetKind::complement;
    }

    /// d = 3 fields are brute force over O(grid^3) cells; keep them coarse.
    int field_cells() const { return scene_.dim == 2 ? scene_.grid : std::min(scene_.grid, 48); }

    /// Cube around the bodies, padded by the outer tube radius for solid and
    /// boundary sets.
    Grid field_grid() const {
        const int d = scene_.dim;
        Vec lo = Vec::Constant(d, std::numeric_limits<double>::infinity());
        Vec hi = -lo;
        for (const auto& b : scene_.bodies) {
            lo = lo.cwiseMin(b.body.center() - Vec::Constant(d, b.body.bounding_radius()));
            hi = hi.cwiseMax(b.body.center() + Vec::Constant(d, b.body.bounding_radius()));
        }
        double side = (hi - lo).maxCoeff();
        double pad = 0.02 * side;
        if (distance_set() != SetKind::complement)
            pad += 1.05 * scene_.steiner_radius.value_or(1.0) * integrand().sphere_sup_bound();
        const Vec mid = 0.5 * (lo + hi);
        side += 2 * pad;
        return Grid::cube(mid - Vec::Constant(d, 0.5 * side), side, field_cells());
    }

    const DistanceField& field(bool euclidean) {
        auto& slot = euclidean ? euclid_field_ : field_;
        if (!slot) {
            const Grid g = field_grid();
            const auto source = boundary_source(scene_.star_bodies(), distance_set(), g.h);
            const DualNorm& norm = euclidean ? euclid_dual() : dual();
            slot = std::make_unique<DistanceField>(DistanceField::build(source, norm, g, scene_.tol.distance));
        }
        return *slot;
    }

    const DualNorm& euclid_dual() {
        if (!euclid_dual_) euclid_dual_ = std::make_unique<DualNorm>(Integrand::euclidean(scene_.dim));
        return *euclid_dual_;
    }

    bool integrand_is_euclidean() const {
        return integrand().terms().size() == 1 && integrand().terms().front().identity;
    }

    // ---- suites ------------------------------------------------------------

    void suite_dual(SuiteReport& r) {
        const int d = scene_.dim;
        auto rng = suite_rng("dual");
        const SphereGrid dirs = SphereGrid::with_node_count(d, d == 2 ? 360 : 2 * 14 * 14);
        detail::Csv csv(file("dual.csv"), detail::axis_header("w", d) + ",fstar,fstar_solver");
        double solver_err = 0.0;
        double bidual_err = 0.0;
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            const Vec& w = dirs.direction(i);
            const double fs = dual().conjugate(w);
            const double solved = dual().solve(w).value;
            solver_err = std::max(solver_err, std::abs(solved - fs));
            bidual_err = std::max(bidual_err, std::abs(maximize_ratio(dual(), w).value - integrand().evaluate(w)));
            csv.stream() << detail::join(w) << ',' << fs << ',' << solved << '\n';
        }
        if (dual().has_closed_form()) r.at_most("solver-vs-closed-form", solver_err, scene_.tol.dual);
        r.at_most("double-conjugation", bidual_err, scene_.tol.dual);

        std::normal_distribution<double> normal;
        double unit_err = 0.0;
        double inverse_err = 0.0;
        for (int k = 0; k < 1000; ++k) {
            Vec x(d);
            for (int i = 0; i < d; ++i) x(i) = normal(rng);
            const Vec g = integrand().gradient(x);
            unit_err = std::max(unit_err, std::abs(dual().conjugate(g) - 1.0));
            inverse_err = std::max(inverse_err, (dual().grad_conjugate(g) - x / integrand().evaluate(x)).norm());
        }
        r.at_most("fstar-of-gradient-is-one", unit_err, scene_.tol.dual_identity);
        r.at_most("inverse-gradient-maps", inverse_err, scene_.tol.dual_identity);

        const auto ell = estimate_ellipticity(integrand(), 2000, scene_.seed);
        r.above("ellipticity-gamma", ell.gamma_estimate, 0.0);
        r.data = {{"directions", dirs.size()},
                  {"random_points", 1000},
                  {"closed_form", dual().has_closed_form()},
                  {"gamma", ell.gamma_estimate},
                  {"cf", ell.cf_estimate},
                  {"sphere_bounds", {dual().sphere_inf_bound(), dual().sphere_sup_bound()}}};
    }

    void suite_wulff(SuiteReport& r) {
        const int d = scene_.dim;
        std::vector<std::pair<Vec, double>> shapes;
        for (const auto& b : scene_.bodies)
            if (b.body.kind() == StarBody::Kind::wulff) shapes.emplace_back(b.body.center(), b.body.wulff_radius());
        if (shapes.empty()) shapes.emplace_back(Vec::Zero(d), 1.0);

        detail::Csv wcsv(file("wulff.csv"), detail::axis_header("x", d) + "," + detail::axis_header("nu", d));
        double level_err = 0.0;
        double normal_err = 0.0;
        std::size_t count = 0;
        for (const auto& [c, rad] : shapes) {
            const WulffSample s = wulff_sample(dual(), c, rad, scene_.resolution);
            for (const auto& node : s.nodes) {
                level_err = std::max(level_err, std::abs(dual().conjugate(node.x - c) - rad) / rad);
                const Vec g = dual().grad_conjugate(node.x - c);
                normal_err = std::max(normal_err, (g.normalized() - node.normal).norm());
                wcsv.stream() << detail::join(node.x) << ',' << detail::join(node.normal) << '\n';
            }
            count += s.nodes.size();
        }
        r.at_most("boundary-on-level-set", level_err, scene_.tol.dual_identity);
        r.at_most("normal-is-gradient-direction", normal_err, scene_.tol.dual_identity);

        const SurfaceQuadrature& q = quadrature();
        detail::Csv qcsv(file("quadrature.csv"), detail::axis_header("x", d) + "," + detail::axis_header("nu", d) + ",w");
        for (const auto& node : q.nodes)
            qcsv.stream() << detail::join(node.x) << ',' << detail::join(node.normal) << ',' << node.weight << '\n';

        json bodies = json::array();
        double consistency = 0.0;
        double wulff_identity = 0.0;
        std::vector<SurfaceQuadrature> parts;
        for (std::size_t b = 0; b < scene_.bodies.size(); ++b) {
            const SurfaceQuadrature one = sample_surface(scene_.bodies[b].body, scene_.resolution);
            const VolumeEstimate v = volume_estimates(one);
            const double rel = std::abs(v.radial - v.divergence) / std::abs(v.radial);
            consistency = std::max(consistency, rel);
            const double p = perimeter_F(one, integrand());
            json entry = {{"id", scene_.bodies[b].id}, {"volume", v.radial}, {"volume_divergence", v.divergence},
                          {"area", area(one)}, {"perimeter_F", p}};
            if (const auto rad = wulff_radius_for(scene_.bodies[b])) {
                // Vol = r P_F / (n + 1)
                wulff_identity = std::max(wulff_identity, std::abs(v.radial - *rad * p / (n() + 1)) / v.radial);
                entry["wulff_radius"] = *rad;
            }
            bodies.push_back(entry);
        }
        r.at_most("radial-vs-divergence-volume", consistency, scene_.tol.volume);
        if (all_wulff() || wulff_identity > 0.0) r.at_most("wulff-volume-perimeter-identity", wulff_identity, scene_.tol.volume);
        r.data = {{"wulff_nodes", count}, {"quadrature_nodes", q.nodes.size()}, {"bodies", bodies}};
    }

    void suite_curv(SuiteReport& r) {
        const int d = scene_.dim;
        const SurfaceQuadrature& q = quadrature();
        const auto& s = samples();
        detail::Csv csv(file("curvature.csv"),
                        detail::axis_header("x", d) + "," + detail::axis_header("kappaF", n()) + ",H");
        for (std::size_t k = 0; k < q.nodes.size(); ++k)
            csv.stream() << detail::join(q.nodes[k].x) << ',' << detail::join(s[k].kappa) << ',' << s[k].h << '\n';

        // symmetrized eigenproblem against a general eigen-solver of A B
        double sym_err = 0.0;
        for (std::size_t k = 0; k < q.nodes.size(); ++k) {
            Eigen::EigenSolver<Mat> eig(Mat(s[k].a * s[k].b), false);
            Vec ev = eig.eigenvalues().real();
            std::sort(ev.data(), ev.data() + ev.size());
            sym_err = std::max(sym_err, (ev - s[k].kappa).cwiseAbs().maxCoeff() / std::max(1.0, s[k].kappa.cwiseAbs().maxCoeff()));
        }
        r.at_most("symmetrized-vs-general-eigenvalues", sym_err, 1e-9);

        const double tol = scene_.tol.curvature > 0 ? scene_.tol.curvature : (d == 2 ? 1e-4 : 1e-3);
        json bodies = json::array();
        for (std::size_t b = 0; b < scene_.bodies.size(); ++b) {
            const auto& spec = scene_.bodies[b];
            const UmbilicityReport u = umbilicity_classify(q, s, b, scene_.tol.umbilicity);
            double kmin = std::numeric_limits<double>::infinity();
            double kmax = -kmin;
            for (std::size_t k = 0; k < q.nodes.size(); ++k) {
                if (q.nodes[k].body != b) continue;
                kmin = std::min(kmin, s[k].kappa.minCoeff());
                kmax = std::max(kmax, s[k].kappa.maxCoeff());
            }
            json entry = {{"id", spec.id}, {"kappa_min", kmin}, {"kappa_max", kmax}, {"verdict", u.verdict},
                          {"lambda", u.lambda}, {"dispersion", u.dispersion}, {"max_residual", u.max_residual}};
            if (u.verdict == "wulff") {
                entry["center"] = detail::to_json(u.center);
                entry["radius"] = u.radius;
            }
            if (const auto rad = wulff_radius_for(spec)) {
                const double err = std::max(std::abs(kmin - 1.0 / *rad), std::abs(kmax - 1.0 / *rad));
                r.at_most("kappa-equals-inverse-radius:" + spec.id, err, tol);
                r.holds("umbilicity-fit-recovers-wulff:" + spec.id, u.verdict == "wulff");
                entry["expected_kappa"] = 1.0 / *rad;
            }
            bodies.push_back(entry);
        }
        r.data = {{"nodes", q.nodes.size()}, {"bodies", bodies}};
    }

    void suite_hk(SuiteReport& r) {
        const int d = scene_.dim;
        require_disjoint(scene_.star_bodies());
        const HKState& st = hk_state();
        json cls;
        json bodies = json::array();
        if (!st.report) {
            // H <= 0 somewhere: the inequality's hypothesis fails, so the
            // scene cannot be an equality case.
            const SurfaceQuadrature& q = quadrature();
            const auto& s = samples();
            for (std::size_t b = 0; b < scene_.bodies.size(); ++b) {
                const UmbilicityReport u = umbilicity_classify(q, s, b, scene_.tol.umbilicity);
                bodies.push_back({{"id", scene_.bodies[b].id}, {"verdict", u.verdict}, {"dispersion", u.dispersion}});
            }
            cls = {{"verdict", "strict"}, {"failing", {"hypothesis-H-positive"}}, {"bodies", bodies}};
            r.data = {{"hypothesis_violation", st.violation}, {"violation_node", st.violation_node}, {"verdict", "strict"}};
            r.holds("classified-strict", !all_wulff());
        } else {
            const HKReport& h = *st.report;
            const Classification c = equality_classifier(h, d, h.h_max, scene_.tol.classifier);
            detail::Csv csv(file("hk_bodies.csv"), "body,verdict,lambda,radius," + detail::axis_header("c", d) + ",dispersion");
            for (std::size_t b = 0; b < h.bodies.size(); ++b) {
                const auto& u = h.bodies[b];
                json entry = {{"id", scene_.bodies[b].id}, {"verdict", u.verdict}, {"lambda", u.lambda},
                              {"dispersion", u.dispersion}, {"max_residual", u.max_residual}};
                Vec center = u.center;
                if (u.verdict == "wulff") {
                    entry["center"] = detail::to_json(u.center);
                    entry["radius"] = u.radius;
                } else {
                    center = Vec::Constant(d, std::numeric_limits<double>::quiet_NaN());
                }
                csv.stream() << scene_.bodies[b].id << ',' << u.verdict << ',' << u.lambda << ','
                             << (u.verdict == "wulff" ? u.radius : std::numeric_limits<double>::quiet_NaN()) << ','
                             << detail::join(center) << ',' << u.dispersion << '\n';
                bodies.push_back(entry);
            }
            cls = {{"verdict", c.verdict}, {"failing", c.failing}, {"equal_radii", c.equal_radii}, {"bodies", bodies}};
            r.data = {{"vol", h.vol},
                      {"integral", h.integral},
                      {"ratio", h.ratio},
                      {"h_min", h.h_min},
                      {"h_max", h.h_max},
                      {"mr_integral", h.mr_integral},
                      {"amgm_gap", h.amgm_gap},
                      {"umbilic_spread", h.umbilic_spread},
                      {"dispersion", h.dispersion},
                      {"nodes", h.nodes},
                      {"verdict", h.verdict},
                      {"classifier_bound_c", h.h_max}};
            r.at_most("inequality-ratio-at-most-one", h.ratio - 1.0, scene_.tol.classifier.tol_eq);
            if (scene_.expect.hk_ratio)
                r.at_most("ratio-matches-reference", std::abs(h.ratio - *scene_.expect.hk_ratio), 1e-3);
            if (all_wulff()) {
                r.at_most("equality-ratio", std::abs(h.ratio - 1.0), scene_.tol.classifier.tol_eq);
                r.holds("classified-wulff-union", c.verdict == "wulff-union");
                double center_err = 0.0;
                double radius_err = 0.0;
                for (std::size_t b = 0; b < h.bodies.size(); ++b) {
                    const double rad = *wulff_radius_for(scene_.bodies[b]);
                    if (h.bodies[b].verdict != "wulff") { center_err = radius_err = std::numeric_limits<double>::infinity(); break; }
                    center_err = std::max(center_err, (h.bodies[b].center - scene_.bodies[b].body.center()).norm() / rad);
                    radius_err = std::max(radius_err, std::abs(h.bodies[b].radius - rad) / rad);
                }
                r.at_most("recovered-centers", center_err, scene_.tol.center);
                r.at_most("recovered-radii", radius_err, scene_.tol.center);
            } else {
                r.holds("classified-strict", c.verdict == "strict");
            }
        }
        classification_ = cls;
    }

    void suite_mr(SuiteReport& r) {
        const int d = scene_.dim;
        require_disjoint(scene_.star_bodies());
        const HKState& st = hk_state();
        if (!st.report) {
            r.data = {{"skipped", "mean curvature is not positive: " + st.violation}};
            return;
        }
        const HKReport& h = *st.report;
        const double upper = static_cast<double>(n()) / (n() + 1) * h.integral;
        r.at_most("vol-at-most-mr", (h.vol - h.mr_integral) / h.vol, scene_.tol.mr);
        r.at_most("mr-at-most-hk-integral", (h.mr_integral - upper) / upper, scene_.tol.mr);
        r.at_most("excluded-nodes", static_cast<double>(h.mr_excluded), 0.0);
        const SurfaceQuadrature& q = quadrature();
        const auto& s = samples();
        detail::Csv csv(file("mr.csv"), detail::axis_header("x", d) + ",H,mr_inner");
        for (std::size_t k = 0; k < q.nodes.size(); ++k)
            csv.stream() << detail::join(q.nodes[k].x) << ',' << s[k].h << ',' << montiel_ros_inner(s[k].kappa) << '\n';
        r.data = {{"vol", h.vol}, {"mr_integral", h.mr_integral}, {"hk_bound", upper}, {"amgm_gap", h.amgm_gap}};
    }

    void suite_steiner(SuiteReport& r) {
        const DistanceField& f = field(false);
        const ReachEstimate reach = estimate_reach_F(f);
        double radius = 0.0;
        std::string radius_source;
        if (scene_.steiner_radius) {
            radius = *scene_.steiner_radius;
            radius_source = "scene";
        } else if (all_wulff()) {
            radius = std::numeric_limits<double>::infinity();
            for (const auto& b : scene_.bodies) radius = std::min(radius, *wulff_radius_for(b));
            radius_source = "smallest Wulff radius";
        } else {
            radius = reach.reach;
            radius_source = "measured reach";
        }
        const int degree = scene_.dim;
        const TubeCurve curve = tube_volumes(f, steiner_t_grid(radius));
        const SteinerFit fit = fit_polynomial(curve, degree);

        std::vector<double> reference;
        if (distance_set() == SetKind::complement) {
            bool disjoint = true;
            try {
                require_disjoint(scene_.star_bodies());
            } catch (const InputError&) {
                disjoint = false;
            }
            if (disjoint) reference = claim5_coefficients(quadrature(), samples(), integrand());
        }
        const ReachVerdict v = positive_reach_test(fit, scene_.tol.steiner, reference);

        detail::Csv csv(file("steiner.csv"), "t,volume,fit");
        for (std::size_t i = 0; i < curve.t.size(); ++i) csv.row(curve.t[i], curve.volume[i], fit.evaluate(curve.t[i]));
        json summary = {{"coefficients", fit.coefficients}, {"residual", fit.residual}, {"verdict", v.verdict}};
        std::ofstream(file("steiner_fit.json")) << summary.dump(2) << '\n';

        r.data = {{"set", to_string(distance_set())},
                  {"radius", radius},
                  {"radius_source", radius_source},
                  {"grid", field_cells()},
                  {"h", f.grid().h},
                  {"coefficients", fit.coefficients},
                  {"residual", fit.residual},
                  {"verdict", v.verdict},
                  {"measured_reach", reach.reach}};
        if (!reference.empty()) {
            r.data["curvature_formula_coefficients"] = reference;
            r.data["max_coefficient_deviation"] = v.max_coefficient_deviation;
        }
        if (reach.reach < radius && !reach.saturated) {
            // the same fit restricted to radii below the measured reach
            const SteinerFit inside = fit_polynomial(tube_volumes(f, steiner_t_grid(reach.reach)), degree);
            r.data["residual_within_measured_reach"] = inside.residual;
        }
        if (scene_.dim == 3) {
            r.data["report_only"] = "coarse d = 3 grid";
            return;
        }
        if (scene_.expect.steiner == std::string("consistent")) {
            r.at_most("polynomial-residual", fit.residual, scene_.tol.steiner);
            if (!reference.empty()) r.at_most("coefficients-vs-curvature-formula", v.max_coefficient_deviation, scene_.tol.coefficients);
        } else if (scene_.expect.steiner == std::string("inconsistent")) {
            r.above("polynomial-residual", fit.residual, scene_.tol.steiner);
        }
    }

    void suite_reach(SuiteReport& r) {
        const int d = scene_.dim;
        const DistanceField& f = field(false);
        const ReachEstimate e = estimate_reach_F(f);
        const DistanceField& eu = integrand_is_euclidean() ? f : field(true);
        const ReachComparison cmp = reach_comparison(eu, f);

        // Discrete delta is a minimum of L-Lipschitz functions.
        double lip = 0.0;
        const Grid& g = f.grid();
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (f.delta()[c] <= 0.0) continue;
            auto idx = g.index(c);
            for (int a = 0; a < d; ++a) {
                if (idx[static_cast<std::size_t>(a)] + 1 >= g.cells[static_cast<std::size_t>(a)]) continue;
                auto nb = idx;
                ++nb[static_cast<std::size_t>(a)];
                const double other = f.delta()[g.flat(nb)];
                if (other <= 0.0) continue;
                lip = std::max(lip, std::abs(other - f.delta()[c]) / g.h);
            }
        }

        detail::Csv csv(file("field.csv"), std::string(d == 2 ? "i,j" : "i,j,k") + ",delta,gap");
        for (std::size_t c = 0; c < g.size(); ++c) {
            const auto idx = g.index(c);
            csv.stream() << idx[0] << ',' << idx[1];
            if (d == 3) csv.stream() << ',' << idx[2];
            csv.stream() << ',' << f.delta()[c] << ',' << f.gap()[c] << '\n';
        }

        r.data = {{"set", to_string(distance_set())},
                  {"reach_F", e.reach},
                  {"saturated", e.saturated},
                  {"flagged_cells", e.flagged_cells},
                  {"reach_euclidean", cmp.reach_euclid},
                  {"rho", cmp.rho},
                  {"comparison_slack", cmp.slack},
                  {"h", g.h},
                  {"grid", field_cells()},
                  {"tol_unique", f.tol_unique()},
                  {"lipschitz_ratio", lip / f.lipschitz_bound()}};
        if (d == 3) {
            r.data["report_only"] = "coarse d = 3 grid";
            return;
        }
        r.at_most("lipschitz-bound", lip / f.lipschitz_bound(), 1.0 + 1e-9);
        r.holds("reach-comparison", cmp.holds);
        if (scene_.expect.reach) r.at_most("reach-matches-reference", std::abs(e.reach - *scene_.expect.reach), 2 * g.h);
    }

    void suite_var(SuiteReport& r) {
        const int d = scene_.dim;
        auto rng = suite_rng("var");
        detail::Csv csv(file("residuals.csv"), "field_id,residual");
        json bodies = json::array();
        Mat shear = Mat::Zero(d, d);
        shear(0, 0) = 1;
        shear(1, 1) = -1;
        for (std::size_t b = 0; b < scene_.bodies.size(); ++b) {
            const auto& spec = scene_.bodies[b];
            const SurfaceQuadrature q = sample_surface(spec.body, scene_.resolution);
            const double h = 1e-4 * node_diameter(q);
            double flow_err = 0.0;
            double worst = 0.0;
            double perimeter = 0.0;
            for (int k = 0; k < 10; ++k) {
                const VectorField g = VectorField::random(d, rng);
                const double fv = first_variation(q, integrand(), g);
                const double flow = flow_energy_derivative(q, integrand(), g, h);
                flow_err = std::max(flow_err, std::abs(fv - flow) / (1 + std::abs(fv)));
                const CriticalityResidual c = criticality_residual(q, integrand(), g);
                perimeter = c.perimeter;
                worst = std::max({worst, std::abs(c.residual), std::abs(c.rescaled_residual)});
                csv.stream() << spec.id << "/random-" << k << ',' << c.residual << '\n';
            }
            const CriticalityResidual sh = criticality_residual(q, integrand(), VectorField::linear(shear));
            csv.stream() << spec.id << "/shear," << sh.residual << '\n';
            r.at_most("flow-derivative-matches-first-variation:" + spec.id, flow_err, scene_.tol.flow);
            if (wulff_radius_for(spec)) {
                r.at_most("wulff-is-critical:" + spec.id,
                          std::max({worst, std::abs(sh.residual), std::abs(sh.rescaled_residual)}) / perimeter,
                          scene_.tol.criticality);
            } else {
                r.above("not-critical:" + spec.id, std::max(worst, std::abs(sh.residual)), scene_.tol.shear);
            }
            bodies.push_back({{"id", spec.id},
                              {"perimeter_F", perimeter},
                              {"max_flow_mismatch", flow_err},
                              {"max_random_residual", worst},
                              {"shear_first_variation", sh.first_variation},
                              {"shear_residual", sh.residual},
                              {"shear_rescaled_residual", sh.rescaled_residual},
                              {"step", h}});
        }
        r.data = {{"fields_per_body", 10}, {"bodies", bodies}};
    }

    Scene scene_;
    RunOptions opts_;
    std::vector<std::string> suites_;
    std::vector<SuiteReport> reports_;
    json report_;
    std::optional<json> classification_;
    std::optional<SurfaceQuadrature> quadrature_;
    std::optional<std::vector<CurvatureSample>> samples_;
    std::optional<HKState> hk_;
    std::unique_ptr<DistanceField> field_;
    std::unique_ptr<DistanceField> euclid_field_;
    std::unique_ptr<DualNorm> euclid_dual_;
};

/// Loads the scene and runs; input errors go to stderr with exit code 1.
inline int run(const std::string& command, const std::string& scene_path, const std::string& out_dir,
               RunOptions opts = {}) {
    opts.command = command;
    opts.out_dir = out_dir;
    try {
        Runner runner(load_scene(scene_path), opts);
        return runner.run();
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace wulffkit
