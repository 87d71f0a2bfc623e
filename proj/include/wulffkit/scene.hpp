#pragma once

// JSON scene files: integrand, bodies with ids, resolutions, tolerances and
// optional expectations. Syntax errors report the line, field errors the
// JSON path of the offending value.

#include "wulffkit/core.hpp"
#include "wulffkit/curvature.hpp"
#include "wulffkit/distance.hpp"
#include "wulffkit/duality.hpp"
#include "wulffkit/hk.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/integrand.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace wulffkit {

using json = nlohmann::json;

struct BodySpec {
    std::string id;
    std::string kind;  // wulff | ball | ellipsoid | superellipse
    StarBody body;
};

struct SceneTolerances {
    double dual = 1e-6;           // solver vs closed form
    double dual_identity = 1e-8;  // F*(G(x)) = 1, G*(G(x)) = x / F(x)
    double curvature = -1;        // < 0: 1e-4 in d = 2, 1e-3 in d = 3
    double volume = 1e-6;
    UmbilicityOptions umbilicity;
    ClassifierOptions classifier;
    double center = 1e-3;         // recovered centers and radii, relative to the radius
    double mr = 1e-3;
    double steiner = 1e-2;
    double coefficients = 0.02;  // fitted vs curvature-formula tube coefficients
    double flow = 1e-4;
    double criticality = 1e-3;    // relative to P_F
    double shear = 0.1;
    DistanceOptions distance;
};

/// Values the scene author knows from outside the run.
struct SceneExpectations {
    std::optional<double> hk_ratio;
    std::optional<double> reach;
    std::optional<std::string> steiner;  // consistent | inconsistent
};

struct Scene {
    std::string name;
    int dim = 2;
    std::shared_ptr<const DualNorm> dual;
    std::vector<BodySpec> bodies;
    std::size_t resolution = 0;  // nodes per body
    int grid = 512;              // cells per side
    std::uint64_t seed = 0;
    std::string steiner_set = "complement";
    std::optional<double> steiner_radius;
    SceneTolerances tol;
    SceneExpectations expect;
    std::vector<std::string> suites;

    const Integrand& integrand() const { return dual->integrand(); }
    std::vector<StarBody> star_bodies() const {
        std::vector<StarBody> out;
        for (const auto& b : bodies) out.push_back(b.body);
        return out;
    }
};

inline std::size_t default_resolution(int dim) { return dim == 2 ? 4096 : 64 * 128; }

namespace detail {

class Field {
public:
    Field(const json& v, std::string path) : v_(&v), path_(std::move(path)) {}

    const json& value() const { return *v_; }
    const std::string& path() const { return path_; }
    bool has(const std::string& key) const { return v_->is_object() && v_->contains(key); }

    [[noreturn]] void fail(const std::string& what) const {
        throw InputError("scene field " + (path_.empty() ? std::string("/") : path_) + ": " + what);
    }

    Field at(const std::string& key) const {
        if (!v_->is_object()) fail("expected an object");
        if (!v_->contains(key)) Field(*v_, path_ + "/" + key).fail("missing");
        return Field((*v_)[key], path_ + "/" + key);
    }
    Field at(std::size_t i) const { return Field((*v_)[i], path_ + "/" + std::to_string(i)); }

    std::size_t size() const {
        if (!v_->is_array()) fail("expected an array");
        return v_->size();
    }
    double number() const {
        if (!v_->is_number()) fail("expected a number");
        const double x = v_->get<double>();
        if (!std::isfinite(x)) fail("expected a finite number");
        return x;
    }
    double positive() const {
        const double x = number();
        if (!(x > 0.0)) fail("expected a positive number");
        return x;
    }
    std::int64_t integer() const {
        if (!v_->is_number_integer()) fail("expected an integer");
        return v_->get<std::int64_t>();
    }
    std::string string() const {
        if (!v_->is_string()) fail("expected a string");
        return v_->get<std::string>();
    }
    Vec vec(int dim) const {
        if (size() != static_cast<std::size_t>(dim)) fail("expected " + std::to_string(dim) + " numbers");
        Vec out(dim);
        for (int i = 0; i < dim; ++i) out(i) = at(static_cast<std::size_t>(i)).number();
        return out;
    }
    Mat mat(int dim) const {
        if (size() != static_cast<std::size_t>(dim)) fail("expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
        Mat out(dim, dim);
        for (int i = 0; i < dim; ++i) {
            const Vec row = at(static_cast<std::size_t>(i)).vec(dim);
            out.row(i) = row.transpose();
        }
        return out;
    }

    /// Runs a library constructor and re-labels its InputError with this path.
    template <class Fn>
    auto build(Fn&& fn) const {
        try {
            return fn();
        } catch (const InputError& e) {
            fail(e.what());
        }
    }

private:
    const json* v_;
    std::string path_;
};

inline Integrand parse_integrand(const Field& f, int dim) {
    const std::string family = f.at("family").string();
    if (family == "euclidean") return Integrand::euclidean(dim);
    if (family == "quadratic") {
        const Mat m = f.at("matrix").mat(dim);
        return f.at("matrix").build([&] { return Integrand::quadratic(m); });
    }
    if (family == "weighted_sum" || family == "weighted-sum") {
        const Field terms = f.at("terms");
        if (terms.size() == 0) terms.fail("expected at least one term");
        std::vector<std::pair<double, Integrand>> parts;
        for (std::size_t i = 0; i < terms.size(); ++i)
            parts.emplace_back(terms.at(i).at("weight").positive(), parse_integrand(terms.at(i).at("integrand"), dim));
        return terms.build([&] { return Integrand::weighted_sum(parts); });
    }
    f.at("family").fail("unknown family '" + family + "'");
}

inline BodySpec parse_body(const Field& f, const DualNorm& dual, int dim) {
    BodySpec b{f.at("id").string(), f.at("kind").string(), StarBody::ball(Vec::Zero(dim), 1.0)};
    const Vec c = f.at("center").vec(dim);
    if (b.kind == "wulff") {
        const double r = f.at("radius").positive();
        b.body = f.build([&] { return StarBody::wulff(dual, c, r); });
    } else if (b.kind == "ball") {
        const double r = f.at("radius").positive();
        b.body = f.build([&] { return StarBody::ball(c, r); });
    } else if (b.kind == "ellipsoid") {
        Mat q;
        if (f.has("semi_axes")) {
            const Vec a = f.at("semi_axes").vec(dim);
            if (a.minCoeff() <= 0.0) f.at("semi_axes").fail("semi-axes must be > 0");
            q = Mat(a.array().square().inverse().matrix().asDiagonal());
        } else {
            q = f.at("matrix").mat(dim);
        }
        b.body = f.build([&] { return StarBody::ellipsoid(c, q); });
    } else if (b.kind == "superellipse") {
        const double p = f.at("exponent").number();
        const Vec a = f.at("semi_axes").vec(dim);
        b.body = f.build([&] { return StarBody::superellipse(c, p, a); });
    } else {
        f.at("kind").fail("unknown body kind '" + b.kind + "'");
    }
    return b;
}

inline void read_number(const Field& parent, const std::string& key, double& out) {
    if (parent.has(key)) out = parent.at(key).positive();
}

}  // namespace detail

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"dual", "wulff", "curv", "hk", "mr", "steiner", "reach", "var"};
    return names;
}

/// Throws InputError; syntax errors name the line, field errors the path.
inline Scene parse_scene(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t end = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end ? end - 1 : 0), '\n');
        throw InputError("scene parse error at line " + std::to_string(line) + ": " + e.what());
    }
    const detail::Field root(doc, "");
    if (!doc.is_object()) root.fail("expected an object");
    Scene s;
    s.name = root.has("name") ? root.at("name").string() : "scene";
    const auto dim = root.at("dimension").integer();
    if (dim != 2 && dim != 3) root.at("dimension").fail("dimension must be 2 or 3");
    s.dim = static_cast<int>(dim);
    s.dual = std::make_shared<const DualNorm>(detail::parse_integrand(root.at("integrand"), s.dim));

    const detail::Field bodies = root.at("bodies");
    if (bodies.size() == 0) bodies.fail("expected at least one body");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        s.bodies.push_back(detail::parse_body(bodies.at(i), *s.dual, s.dim));
        if (!ids.insert(s.bodies.back().id).second) bodies.at(i).at("id").fail("duplicate id '" + s.bodies.back().id + "'");
    }

    s.resolution = default_resolution(s.dim);
    if (root.has("resolution")) {
        const auto r = root.at("resolution").integer();
        if (r < static_cast<std::int64_t>(min_surface_resolution(s.dim))) root.at("resolution").fail("resolution too small");
        s.resolution = static_cast<std::size_t>(r);
    }
    if (root.has("grid")) {
        const auto g = root.at("grid").integer();
        if (g < 8 || g > 4096) root.at("grid").fail("grid must lie in [8, 4096]");
        s.grid = static_cast<int>(g);
    }
    if (root.has("seed")) {
        const auto seed = root.at("seed").integer();
        if (seed < 0) root.at("seed").fail("seed must be >= 0");
        s.seed = static_cast<std::uint64_t>(seed);
    }
    if (root.has("steiner")) {
        const detail::Field st = root.at("steiner");
        if (st.has("set")) {
            s.steiner_set = st.at("set").string();
            if (s.steiner_set != "complement" && s.steiner_set != "solid" && s.steiner_set != "boundary")
                st.at("set").fail("set must be complement, solid or boundary");
        }
        if (st.has("radius")) s.steiner_radius = st.at("radius").positive();
    }
    if (root.has("tolerances")) {
        const detail::Field t = root.at("tolerances");
        detail::read_number(t, "dual", s.tol.dual);
        detail::read_number(t, "dual_identity", s.tol.dual_identity);
        detail::read_number(t, "curvature", s.tol.curvature);
        detail::read_number(t, "volume", s.tol.volume);
        detail::read_number(t, "tol_umb", s.tol.umbilicity.tol_umb_rel);
        detail::read_number(t, "tol_fit", s.tol.umbilicity.tol_fit);
        detail::read_number(t, "tol_eq", s.tol.classifier.tol_eq);
        detail::read_number(t, "tol_r", s.tol.classifier.tol_r);
        detail::read_number(t, "center", s.tol.center);
        detail::read_number(t, "mr", s.tol.mr);
        detail::read_number(t, "steiner", s.tol.steiner);
        detail::read_number(t, "coefficients", s.tol.coefficients);
        detail::read_number(t, "flow", s.tol.flow);
        detail::read_number(t, "criticality", s.tol.criticality);
        detail::read_number(t, "shear", s.tol.shear);
        detail::read_number(t, "eps_cluster", s.tol.distance.eps_cluster);
        detail::read_number(t, "tol_unique", s.tol.distance.tol_unique_factor);
    }
    s.tol.classifier.tol_umb_rel = s.tol.umbilicity.tol_umb_rel;
    if (root.has("expect")) {
        const detail::Field e = root.at("expect");
        if (e.has("hk_ratio")) s.expect.hk_ratio = e.at("hk_ratio").positive();
        if (e.has("reach")) s.expect.reach = e.at("reach").positive();
        if (e.has("steiner")) {
            s.expect.steiner = e.at("steiner").string();
            if (*s.expect.steiner != "consistent" && *s.expect.steiner != "inconsistent")
                e.at("steiner").fail("expected 'consistent' or 'inconsistent'");
        }
    }
    if (root.has("suites")) {
        const detail::Field list = root.at("suites");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string name = list.at(i).string();
            if (name != "all" && std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
                list.at(i).fail("unknown suite '" + name + "'");
            s.suites.push_back(name);
        }
    }
    return s;
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scene file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

}  // namespace wulffkit
