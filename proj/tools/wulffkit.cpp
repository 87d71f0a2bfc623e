// wulffkit: run verification suites on a scene file.
//
//   wulffkit all --scene scenes/wulff.json --out out/
//   wulffkit hk --scene scenes/ellipse.json --out out/ --resolution 8192

#include "wulffkit/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks for anisotropic perimeters, Wulff shapes and the Heintze-Karcher inequality"};
    std::string command = "all";
    std::string suite;
    std::string scene;
    std::string out = "wulffkit-out";
    std::uint64_t seed = 0;
    std::size_t resolution = 0;
    int grid = 0;
    bool quiet = false;

    app.add_option("command", command, "dual, wulff, curv, hk, mr, steiner, reach, var or all")
        ->check(CLI::IsMember({"dual", "wulff", "curv", "hk", "mr", "steiner", "reach", "var", "all"}));
    app.add_option("--suite", suite, "same as the positional command")
        ->check(CLI::IsMember({"dual", "wulff", "curv", "hk", "mr", "steiner", "reach", "var", "all"}));
    app.add_option("--scene", scene, "scene file (JSON)")->required();
    app.add_option("--out", out, "output directory for report.json and CSV tables");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the scene)");
    auto* res_opt = app.add_option("--resolution", resolution, "surface nodes per body (overrides the scene)");
    auto* grid_opt = app.add_option("--grid", grid, "distance grid cells per side (overrides the scene)");
    app.add_flag("-q,--quiet", quiet, "no per-suite progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    wulffkit::RunOptions opts;
    if (*seed_opt) opts.seed = seed;
    if (*res_opt) opts.resolution = resolution;
    if (*grid_opt) opts.grid = grid;
    opts.quiet = quiet;
    const int code = wulffkit::run(suite.empty() ? command : suite, scene, out, opts);
    if (!quiet && code >= 0) std::cerr << "exit " << code << '\n';
    return code;
}
