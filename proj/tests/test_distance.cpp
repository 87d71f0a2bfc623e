#include "wulffkit/distance.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wulffkit;

namespace {

const DualNorm& euclid() {
    static const DualNorm d(Integrand::euclidean(2));
    return d;
}

const DualNorm& quad41() {
    static const DualNorm d(Integrand::quadratic(diag({4, 1})));
    return d;
}

Grid box(double half, int n) { return Grid::cube(make_vec({-half, -half}), 2 * half, n); }

}  // namespace

TEST(Grid, IndexRoundTrip) {
    const Grid g = Grid::cube(make_vec({0, 0, 0}), 1.0, 4);
    EXPECT_EQ(g.size(), 64u);
    for (std::size_t c = 0; c < g.size(); ++c) EXPECT_EQ(g.flat(g.index(c)), c);
    EXPECT_NEAR((g.center(1) - make_vec({0.375, 0.125, 0.125})).norm(), 0.0, 1e-15);
}

TEST(Source, DensityAndOverlapRemoval) {
    const auto s = boundary_source({StarBody::ball(make_vec({-0.6, 0}), 1), StarBody::ball(make_vec({0.6, 0}), 1)},
                                   SetKind::complement, 0.01);
    EXPECT_LE(s.spacing, 0.01);
    for (const auto& p : s.points) EXPECT_GE(std::min((p - make_vec({-0.6, 0})).norm(), (p - make_vec({0.6, 0})).norm()), 1 - 1e-9);
    for (const auto& p : s.points) EXPECT_FALSE(std::abs(p(0)) < 0.55 && std::abs(p(1)) < 0.7);
    EXPECT_TRUE(s.contains(make_vec({3, 0})));
    EXPECT_FALSE(s.contains(make_vec({0, 0})));
    EXPECT_THROW(boundary_source({}, SetKind::solid, 0.1), InputError);
}

TEST(Query, CircleComplementAndWulff) {
    const auto circle = boundary_source({StarBody::ball(make_vec({0, 0}), 1)}, SetKind::boundary, 0.01);
    const auto f = DistanceField::build(circle, euclid(), box(2.5, 16));
    EXPECT_NEAR(f.query(make_vec({2, 0})).delta, 1.0, 1e-12);

    const auto comp = boundary_source({StarBody::ball(make_vec({0, 0}), 1)}, SetKind::complement, 0.01);
    const auto fc = DistanceField::build(comp, euclid(), box(1.2, 16));
    EXPECT_NEAR(fc.query(make_vec({0, 0})).delta, 1.0, 1e-12);
    EXPECT_TRUE(fc.query(make_vec({1.1, 1.1})).in_set);
    EXPECT_EQ(fc.query(make_vec({1.1, 1.1})).delta, 0.0);

    const auto w = boundary_source({StarBody::wulff(quad41(), make_vec({0, 0}), 1)}, SetKind::boundary, 0.01);
    const auto fw = DistanceField::build(w, quad41(), box(2.5, 16));
    EXPECT_NEAR(fw.query(make_vec({0, 0})).delta, 1.0, 1e-10);
}

TEST(Query, MatchesBruteForce) {
    const auto src = boundary_source({StarBody::ellipsoid(make_vec({0.1, 0}), diag({0.25, 1}))}, SetKind::boundary, 0.02);
    const auto f = DistanceField::build(src, quad41(), box(2.5, 24));
    for (std::size_t c = 0; c < f.grid().size(); ++c) {
        const Vec x = f.grid().center(c);
        double best = 1e300;
        for (const auto& a : src.points) best = std::min(best, quad41().conjugate(a - x));
        EXPECT_DOUBLE_EQ(f.delta()[c], best);
    }
    EXPECT_THROW(DistanceField::build(SourceSet{}, quad41(), box(1, 4)), InputError);
}

TEST(Project, CircleAndEllipse) {
    const auto circle = boundary_source({StarBody::ball(make_vec({0, 0}), 1)}, SetKind::boundary, 0.01);
    const auto f = DistanceField::build(circle, euclid(), box(2.5, 250));
    const auto p = f.project(make_vec({2, 0}));
    EXPECT_FALSE(p.ambiguous);
    EXPECT_LE((p.a - make_vec({1, 0})).norm(), 1e-12);
    EXPECT_TRUE(p.gradient_consistent);
    EXPECT_TRUE(f.project(make_vec({0, 0})).ambiguous);
    EXPECT_THROW(f.project(make_vec({3, 0})), InputError);

    // Frozen brute-force argmin: (0, 1).
    const auto ell = boundary_source({StarBody::ellipsoid(make_vec({0, 0}), diag({0.25, 1}))}, SetKind::boundary, 0.01);
    const auto fe = DistanceField::build(ell, euclid(), box(2.5, 250));
    const auto pe = fe.project(make_vec({0, 0.5}));
    EXPECT_FALSE(pe.ambiguous);
    EXPECT_LE((pe.a - make_vec({0, 1})).norm(), 1e-12);
    EXPECT_TRUE(pe.gradient_consistent);
}

TEST(DirectionCheck, DiskWulffEllipse) {
    // The sampled foot is within half a spacing of the exact one, so the
    // direction error is about spacing / (2 delta): sources are 4x denser
    // than the grid and pairs keep delta >= 0.1.
    const int n = 200;
    const auto disk = boundary_source({StarBody::ball(make_vec({0, 0}), 1)}, SetKind::complement, 0.6 / n);
    const auto fd = DistanceField::build(disk, euclid(), box(1.2, n));
    std::vector<std::pair<Vec, int>> pairs;
    for (std::size_t c = 0; c < fd.grid().size(); c += 37)
        if (fd.delta()[c] >= 0.1 && !fd.ambiguous(c)) pairs.emplace_back(fd.grid().center(c), fd.argmin()[c]);
    ASSERT_GT(pairs.size(), 100u);
    EXPECT_LE(direction_check(fd, pairs), 2 * fd.grid().h);

    // Wulff complement seen from the center: a + r nu^F = x with nu^F = G(inward normal).
    const auto w = boundary_source({StarBody::wulff(quad41(), make_vec({0, 0}), 1)}, SetKind::complement, 0.01);
    const auto fw = DistanceField::build(w, quad41(), box(2.2, 8));
    std::vector<std::pair<Vec, int>> centre;
    for (int i = 0; i < static_cast<int>(w.points.size()); i += 50) centre.emplace_back(make_vec({0, 0}), i);
    EXPECT_LE(direction_check(fw, centre), 1e-8);

    const auto e = boundary_source({StarBody::ellipsoid(make_vec({0, 0}), diag({0.25, 1}))}, SetKind::complement, 1.1 / n);
    const auto fe = DistanceField::build(e, euclid(), box(2.2, n));
    std::vector<std::pair<Vec, int>> near;
    for (std::size_t c = 0; c < fe.grid().size(); ++c)
        if (fe.delta()[c] >= 0.1 && fe.delta()[c] < 0.3 && !fe.ambiguous(c)) near.emplace_back(fe.grid().center(c), fe.argmin()[c]);
    ASSERT_GT(near.size(), 100u);
    EXPECT_LE(direction_check(fe, near), 5 * fe.grid().h);
}

TEST(Reach, DiskWulffSegments) {
    const int n = 256;
    const auto disk = boundary_source({StarBody::ball(make_vec({0, 0}), 1)}, SetKind::complement, 2.4 / n);
    const auto fd = DistanceField::build(disk, euclid(), box(1.2, n));
    EXPECT_NEAR(estimate_reach_F(fd).reach, 1.0, 2 * fd.grid().h);

    const auto w = boundary_source({StarBody::wulff(quad41(), make_vec({0, 0}), 1)}, SetKind::complement, 4.4 / n);
    const auto fw = DistanceField::build(w, quad41(), box(2.2, n));
    EXPECT_NEAR(estimate_reach_F(fw).reach, 1.0, 2 * fw.grid().h);

    const double s = 0.4;
    const auto seg = segment_source({{make_vec({-1, -s}), make_vec({1, -s})}, {make_vec({-1, s}), make_vec({1, s})}}, 0.005);
    const auto fs = DistanceField::build(seg, euclid(), box(0.8, 160));
    const auto rs = estimate_reach_F(fs);
    EXPECT_FALSE(rs.saturated);
    EXPECT_NEAR(rs.reach, s, 2 * fs.grid().h);
}

TEST(Reach, KidneyReachIsCornerDistance) {
    const int n = 256;
    const auto k = boundary_source({StarBody::ball(make_vec({-0.6, 0}), 1), StarBody::ball(make_vec({0.6, 0}), 1)},
                                   SetKind::complement, 3.4 / n);
    const auto f = DistanceField::build(k, euclid(), Grid::cube(make_vec({-1.7, -1.7}), 3.4, n));
    EXPECT_NEAR(estimate_reach_F(f).reach, 0.8, 2 * f.grid().h);
}

TEST(Reach, ComparisonRollingRadius) {
    EXPECT_NEAR(wulff_rolling_radius(euclid(), 1024), 1.0, 1e-10);
    EXPECT_NEAR(wulff_rolling_radius(quad41(), 1024), 0.5, 1e-10);
    const int n = 256;
    const auto w = boundary_source({StarBody::wulff(quad41(), make_vec({0, 0}), 1)}, SetKind::complement, 4.4 / n);
    const Grid g = box(2.2, n);
    const auto cmp = reach_comparison(DistanceField::build(w, euclid(), g), DistanceField::build(w, quad41(), g));
    EXPECT_TRUE(cmp.holds);
    EXPECT_NEAR(cmp.rho, 0.5, 1e-8);
    EXPECT_NEAR(cmp.reach_euclid, 0.5, 4 * g.h);
}

TEST(Invariants, LipschitzFiberSegment) {
    const int n = 160;
    const auto w = boundary_source({StarBody::wulff(quad41(), make_vec({0, 0}), 1)}, SetKind::complement, 4.4 / n);
    const auto f = DistanceField::build(w, quad41(), box(2.2, n));
    const Grid& g = f.grid();
    const double slack = 2 * g.h * f.lipschitz_bound();
    for (std::size_t c = 0; c < g.size(); ++c) {
        auto idx = g.index(c);
        for (int a = 0; a < 2; ++a) {
            auto nb = idx;
            if (++nb[static_cast<std::size_t>(a)] >= n) continue;
            const std::size_t o = g.flat(nb);
            EXPECT_LE(std::abs(f.delta()[c] - f.delta()[o]), quad41().conjugate(g.center(c) - g.center(o)) + slack);
        }
    }
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    int checked = 0;
    while (checked < 50) {
        const std::size_t c = pick(rng);
        if (f.delta()[c] <= 0.05 || f.ambiguous(c)) continue;
        ++checked;
        const Vec x = g.center(c);
        const Vec& a = w.points[static_cast<std::size_t>(f.argmin()[c])];
        for (double t : {0.25, 0.5, 0.75}) {
            EXPECT_NEAR(f.query(a + t * (x - a)).delta, t * f.delta()[c], 3 * g.h);
            const auto p = f.project(a + t * (x - a));
            EXPECT_LE((p.a - a).norm(), 3 * w.spacing);
        }
    }
}
