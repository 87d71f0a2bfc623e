#include "wulffkit/runner.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wulffkit;

namespace {

const std::string kScenes = WULFFKIT_SCENES_DIR;
const std::string kData = WULFFKIT_TEST_DATA_DIR;

std::string out_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("wulffkit-test-" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json report(const std::string& dir) { return json::parse(slurp(dir + "/report.json")); }

std::string parse_message(const std::string& text) {
    try {
        parse_scene(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

const std::string kMinimal = R"({"dimension": 2, "integrand": {"family": "euclidean"},
  "bodies": [{"id": "a", "kind": "ball", "center": [0, 0], "radius": 1}]})";

}  // namespace

TEST(Scene, SyntaxErrorNamesTheLine) {
    const std::string msg = parse_message(slurp(kData + "/syntax_error.json"));
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Scene, FieldErrorsNameThePath) {
    EXPECT_NE(parse_message(R"({"dimension": 2, "integrand": {"family": "euclidean"},
        "bodies": [{"id": "a", "kind": "ball", "center": [0, 0]}]})").find("/bodies/0/radius"), std::string::npos);
    EXPECT_NE(parse_message(R"({"dimension": 2, "integrand": {"family": "euclidean"},
        "bodies": [{"id": "a", "kind": "ball", "center": [0], "radius": 1}]})").find("/bodies/0/center"), std::string::npos);
    EXPECT_NE(parse_message(R"({"dimension": 4, "integrand": {"family": "euclidean"}, "bodies": []})").find("/dimension"),
              std::string::npos);
    EXPECT_NE(parse_message(R"({"dimension": 2, "integrand": {"family": "cubic"}, "bodies": []})").find("/integrand/family"),
              std::string::npos);
    EXPECT_NE(parse_message(R"({"dimension": 2, "integrand": {"family": "quadratic", "matrix": [[1, 2], [2, 1]]},
        "bodies": [{"id": "a", "kind": "ball", "center": [0, 0], "radius": 1}]})").find("/integrand/matrix"), std::string::npos);
    EXPECT_NE(parse_message(R"({"dimension": 2, "integrand": {"family": "euclidean"},
        "bodies": [{"id": "a", "kind": "ball", "center": [0, 0], "radius": 1},
                   {"id": "a", "kind": "ball", "center": [5, 0], "radius": 1}]})").find("duplicate id"), std::string::npos);
    EXPECT_NE(parse_message(R"({"dimension": 2, "integrand": {"family": "euclidean"},
        "bodies": [{"id": "a", "kind": "ball", "center": [0, 0], "radius": -1}]})").find("/bodies/0/radius"), std::string::npos);
    EXPECT_NE(parse_message(R"({"dimension": 2, "integrand": {"family": "euclidean"},
        "bodies": [{"id": "a", "kind": "superellipse", "center": [0, 0], "exponent": 1.5, "semi_axes": [1, 1]}]})")
                  .find("/bodies/0"), std::string::npos);
}

TEST(Scene, DefaultsAndWeightedSums) {
    const Scene s = parse_scene(kMinimal);
    EXPECT_EQ(s.resolution, 4096u);
    EXPECT_EQ(s.grid, 512);
    EXPECT_EQ(s.seed, 0u);
    const Scene w = load_scene(kScenes + "/mixed_wulff.json");
    EXPECT_EQ(w.integrand().family(), Family::weighted_sum);
    EXPECT_EQ(w.integrand().terms().size(), 2u);
    EXPECT_FALSE(w.dual->has_closed_form());
}

TEST(Run, HkOnWulffSceneIsEquality) {
    const auto dir = out_dir("hk-wulff");
    EXPECT_EQ(run("hk", kScenes + "/wulff.json", dir), 0);
    const json r = report(dir);
    EXPECT_NEAR(r["suites"]["hk"]["data"]["ratio"].get<double>(), 1.0, 1e-3);
    EXPECT_EQ(r["classification"]["verdict"], "wulff-union");
}

TEST(Run, HkOnEllipseIsStrictAndSucceeds) {
    const auto dir = out_dir("hk-ellipse");
    EXPECT_EQ(run("hk", kScenes + "/ellipse.json", dir), 0);
    const json r = report(dir);
    EXPECT_EQ(r["suites"]["hk"]["data"]["verdict"], "strict");
    EXPECT_EQ(r["classification"]["verdict"], "strict");
    EXPECT_TRUE(std::filesystem::exists(dir + "/hk_bodies.csv"));
}

TEST(Run, BrokenMatrixIsInputError) {
    EXPECT_EQ(run("dual", kScenes + "/broken.json", out_dir("broken")), 1);
    EXPECT_EQ(run("dual", kScenes + "/does-not-exist.json", out_dir("missing")), 1);
}

TEST(Run, OverlappingBodiesAreRejectedByHk) {
    EXPECT_EQ(run("hk", kScenes + "/kidney.json", out_dir("kidney-hk")), 1);
}

TEST(Run, ExitCodeNamesFirstFailingSuite) {
    const auto scene_path = std::filesystem::temp_directory_path() / "wulffkit-strict-dual.json";
    std::ofstream(scene_path) << R"({"dimension": 2, "integrand": {"family": "quadratic", "matrix": [[4, 0], [0, 1]]},
        "bodies": [{"id": "w", "kind": "wulff", "center": [0, 0], "radius": 1}],
        "resolution": 256, "tolerances": {"dual_identity": 1e-300, "dual": 1e-300}})";
    EXPECT_EQ(run("all", scene_path.string(), out_dir("strict-dual")), 2);
    EXPECT_EQ(run("wulff", scene_path.string(), out_dir("strict-wulff")), 3);
    EXPECT_EQ(suite_exit_code("steiner"), 7);
    EXPECT_EQ(suite_exit_code("var"), 9);
}

TEST(Run, ReportIsDeterministicAndVersioned) {
    RunOptions opts;
    opts.resolution = 512;
    const auto a = out_dir("det-a");
    const auto b = out_dir("det-b");
    const auto c = out_dir("det-c");
    EXPECT_EQ(run("var", kScenes + "/ellipse.json", a, opts), 0);
    EXPECT_EQ(run("var", kScenes + "/ellipse.json", b, opts), 0);
    EXPECT_EQ(slurp(a + "/report.json"), slurp(b + "/report.json"));
    EXPECT_EQ(slurp(a + "/residuals.csv"), slurp(b + "/residuals.csv"));
    opts.seed = 99;
    EXPECT_EQ(run("var", kScenes + "/ellipse.json", c, opts), 0);
    EXPECT_NE(slurp(a + "/residuals.csv"), slurp(c + "/residuals.csv"));

    const json r = report(c);
    EXPECT_EQ(r["schema_version"], kReportSchemaVersion);
    EXPECT_EQ(r["seed"], 99u);
    EXPECT_EQ(r["rng"], "mt19937_64");
    EXPECT_EQ(r["resolution"], 512u);
    EXPECT_FALSE(r["suites"]["var"]["anchor"].get<std::string>().empty());
}

TEST(Run, CsvHeaders) {
    const auto dir = out_dir("csv");
    EXPECT_EQ(run("all", kScenes + "/ball.json", dir), 0);
    const auto first_line = [&](const std::string& name) {
        std::ifstream in(dir + "/" + name);
        std::string line;
        std::getline(in, line);
        return line;
    };
    EXPECT_EQ(first_line("wulff.csv"), "x1,x2,nu1,nu2");
    EXPECT_EQ(first_line("quadrature.csv"), "x1,x2,nu1,nu2,w");
    EXPECT_EQ(first_line("curvature.csv"), "x1,x2,kappaF1,H");
    EXPECT_EQ(first_line("field.csv"), "i,j,delta,gap");
    EXPECT_EQ(first_line("residuals.csv"), "field_id,residual");
    EXPECT_EQ(first_line("steiner.csv"), "t,volume,fit");
    const json fit = json::parse(slurp(dir + "/steiner_fit.json"));
    EXPECT_TRUE(fit.contains("coefficients") && fit.contains("residual") && fit.contains("verdict"));
}

TEST(Run, SuperellipseViolatesPositiveMeanCurvature) {
    const auto dir = out_dir("superellipse");
    RunOptions opts;
    opts.resolution = 1024;
    EXPECT_EQ(run("hk", kScenes + "/superellipse.json", dir, opts), 0);
    const json r = report(dir);
    EXPECT_EQ(r["classification"]["verdict"], "strict");
    EXPECT_EQ(r["classification"]["bodies"][0]["verdict"], "not-umbilical");
    EXPECT_TRUE(r["suites"]["hk"]["data"].contains("hypothesis_violation"));
}
