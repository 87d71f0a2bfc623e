#pragma once

// Anisotropic distance fields delta(x) = min_a F*(a - x) over a dense sample
// of a closed set A, nearest-point projection with ambiguity detection, and
// reach estimation from the ambiguity set.

#include "wulffkit/core.hpp"
#include "wulffkit/curvature.hpp"
#include "wulffkit/duality.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wulffkit {

/// What the closed set A is, relative to the sampled boundary.
enum class SetKind {
    boundary,    // A = the boundary itself (curves, surfaces, segments)
    solid,       // A = union of the bodies
    complement,  // A = complement of the union of the bodies
};

inline std::string to_string(SetKind k) {
    switch (k) {
        case SetKind::boundary: return "boundary";
        case SetKind::solid: return "solid";
        case SetKind::complement: return "complement";
    }
    return "unknown";
}

struct SourceSet {
    int dim = 0;
    SetKind kind = SetKind::boundary;
    std::vector<Vec> points;
    std::vector<Vec> normals;                   // outward normals of the generating body
    std::vector<std::array<int, 4>> neighbors;  // sample adjacency, -1 when absent
    double spacing = 0.0;                       // max distance between adjacent samples
    std::vector<StarBody> bodies;

    bool contains(const Vec& x) const {
        if (kind == SetKind::boundary) return false;
        bool inside = false;
        for (const auto& b : bodies) {
            if (b.contains(x)) { inside = true; break; }
        }
        return kind == SetKind::solid ? inside : !inside;
    }
};

namespace detail {

inline double max_neighbor_distance(const std::vector<Vec>& pts, const std::vector<std::array<int, 4>>& nb) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int k : nb[i])
            if (k >= 0) s = std::max(s, (pts[i] - pts[static_cast<std::size_t>(k)]).norm());
    return s;
}

}  // namespace detail

/// Boundary samples of a scene of bodies, refined until adjacent samples are
/// at most `max_spacing` apart. Samples lying inside another body are dropped
/// (they are not on the boundary of the union) and their adjacency is cut.
inline SourceSet boundary_source(const std::vector<StarBody>& bodies, SetKind kind, double max_spacing,
                                 std::size_t max_nodes = std::size_t(1) << 22) {
    require(!bodies.empty(), "source set needs at least one body");
    require(max_spacing > 0.0, "source spacing must be > 0");
    const int d = bodies.front().dimension();
    SourceSet s;
    s.dim = d;
    s.kind = kind;
    s.bodies = bodies;
    std::vector<std::size_t> point_body;
    for (std::size_t b = 0; b < bodies.size(); ++b) {
        require(bodies[b].dimension() == d, "bodies of different dimensions");
        std::size_t res = min_surface_resolution(d);
        SurfaceQuadrature q;
        for (;;) {
            q = sample_surface(bodies[b], res);
            std::vector<Vec> pts;
            for (const auto& n : q.nodes) pts.push_back(n.x);
            if (detail::max_neighbor_distance(pts, q.neighbors) <= max_spacing) break;
            res *= d == 2 ? 2 : 4;
            require(res <= max_nodes, "source sample would exceed the node budget; coarsen the grid");
        }
        std::vector<int> remap(q.nodes.size(), -1);
        const int offset = static_cast<int>(s.points.size());
        int kept = 0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            bool covered = false;
            for (std::size_t o = 0; o < bodies.size(); ++o)
                if (o != b && bodies[o].contains(q.nodes[i].x)) { covered = true; break; }
            if (!covered) remap[i] = offset + kept++;
        }
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            if (remap[i] < 0) continue;
            s.points.push_back(q.nodes[i].x);
            s.normals.push_back(q.nodes[i].normal);
            point_body.push_back(b);
            std::array<int, 4> nb{-1, -1, -1, -1};
            for (int k = 0; k < 4; ++k)
                if (q.neighbors[i][k] >= 0) {
                    nb[k] = remap[static_cast<std::size_t>(q.neighbors[i][k])];
                    if (nb[k] < 0) nb[k] = -2;  // cut by another body
                }
            s.neighbors.push_back(nb);
        }
    }
    require(!s.points.empty(), "source set is empty");
    s.spacing = detail::max_neighbor_distance(s.points, s.neighbors);
    // Where a body's sample was cut by another body, join the loose end to the
    // nearest loose end of another body, so that the corner is a path in the
    // adjacency rather than two chain ends (which would look like two basins).
    std::vector<std::size_t> loose;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            if (s.neighbors[i][k] == -2) { loose.push_back(i); break; }
        }
    }
    for (std::size_t i : loose) owner.push_back(point_body[i]);
    for (std::size_t li = 0; li < loose.size(); ++li) {
        const std::size_t i = loose[li];
        double best = 2.0 * max_spacing;
        int target = -1;
        for (std::size_t lj = 0; lj < loose.size(); ++lj) {
            if (owner[lj] == owner[li]) continue;
            const double dist = (s.points[i] - s.points[loose[lj]]).norm();
            if (dist <= best) { best = dist; target = static_cast<int>(loose[lj]); }
        }
        for (int k = 0; k < 4; ++k) {
            if (s.neighbors[i][k] == -2) {
                s.neighbors[i][k] = target;
                break;
            }
        }
    }
    for (auto& nb : s.neighbors)
        for (int& k : nb) if (k == -2) k = -1;
    return s;
}

/// A = union of straight segments in d = 2, sampled as chains.
inline SourceSet segment_source(const std::vector<std::pair<Vec, Vec>>& segments, double max_spacing) {
    require(!segments.empty(), "segment source needs at least one segment");
    require(max_spacing > 0.0, "source spacing must be > 0");
    SourceSet s;
    s.dim = 2;
    s.kind = SetKind::boundary;
    for (const auto& [p, q] : segments) {
        require(p.size() == 2 && q.size() == 2, "segments are supported in d = 2 only");
        const double len = (q - p).norm();
        require(len > 0.0, "degenerate segment");
        const int n = static_cast<int>(std::ceil(len / max_spacing)) + 1;
        const Vec dir = (q - p) / len;
        const Vec normal = make_vec({-dir(1), dir(0)});
        const int offset = static_cast<int>(s.points.size());
        for (int i = 0; i < n; ++i) {
            s.points.push_back(p + (q - p) * (static_cast<double>(i) / (n - 1)));
            s.normals.push_back(normal);
            s.neighbors.push_back({i > 0 ? offset + i - 1 : -1, i + 1 < n ? offset + i + 1 : -1, -1, -1});
        }
    }
    s.spacing = detail::max_neighbor_distance(s.points, s.neighbors);
    return s;
}

/// Axis-aligned grid of cubic cells; values live at cell centers.
struct Grid {
    int dim = 2;
    Vec lower;
    double h = 0.0;
    std::array<int, 3> cells{1, 1, 1};

    static Grid cube(const Vec& lower, double side, int n) {
        require_dimension(static_cast<int>(lower.size()));
        require(side > 0.0 && n >= 2, "grid needs side > 0 and at least 2 cells per axis");
        Grid g;
        g.dim = static_cast<int>(lower.size());
        g.lower = lower;
        g.h = side / n;
        for (int i = 0; i < g.dim; ++i) g.cells[static_cast<std::size_t>(i)] = n;
        return g;
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(cells[static_cast<std::size_t>(i)]);
        return s;
    }
    double cell_volume() const { return std::pow(h, dim); }

    /// Flat index = i + n0 (j + n1 k).
    std::array<int, 3> index(std::size_t flat) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            const auto n = static_cast<std::size_t>(cells[static_cast<std::size_t>(a)]);
            idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % n);
            flat /= n;
        }
        return idx;
    }
    std::size_t flat(const std::array<int, 3>& idx) const {
        std::size_t f = 0;
        for (int a = dim - 1; a >= 0; --a)
            f = f * static_cast<std::size_t>(cells[static_cast<std::size_t>(a)]) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
        return f;
    }
    Vec center(std::size_t flat_index) const {
        const auto idx = index(flat_index);
        Vec c(dim);
        for (int a = 0; a < dim; ++a) c(a) = lower(a) + (idx[static_cast<std::size_t>(a)] + 0.5) * h;
        return c;
    }
    bool inside(const Vec& x) const {
        for (int a = 0; a < dim; ++a)
            if (x(a) < lower(a) || x(a) > lower(a) + cells[static_cast<std::size_t>(a)] * h) return false;
        return true;
    }
};

/// F*(v) on raw coordinates; the closed form skips all Eigen overhead.
class ConjugateKernel {
public:
    explicit ConjugateKernel(const DualNorm& dual) : dual_(&dual), d_(dual.dimension()) {
        if (dual.has_closed_form()) {
            closed_ = true;
            const Mat& inv = dual.integrand().terms().front().inverse;
            for (int i = 0; i < d_; ++i)
                for (int j = 0; j < d_; ++j) m_[i * 3 + j] = inv(i, j);
        }
    }

    double operator()(const double* v) const {
        if (closed_) {
            double s;
            if (d_ == 2) {
                s = v[0] * (m_[0] * v[0] + 2 * m_[1] * v[1]) + m_[4] * v[1] * v[1];
            } else {
                s = v[0] * (m_[0] * v[0] + 2 * m_[1] * v[1] + 2 * m_[2] * v[2]) +
                    v[1] * (m_[4] * v[1] + 2 * m_[5] * v[2]) + m_[8] * v[2] * v[2];
            }
            return std::sqrt(std::max(0.0, s));
        }
        Vec w(d_);
        for (int i = 0; i < d_; ++i) w(i) = v[i];
        return dual_->conjugate(w);
    }

private:
    const DualNorm* dual_;
    int d_;
    bool closed_ = false;
    double m_[9] = {};
};

struct DistanceOptions {
    double eps_cluster = 1e-3;
    double tol_unique_factor = 3.0;  // tol_unique = factor x source spacing
};

struct FieldQuery {
    double delta = 0.0;
    int argmin = -1;      // nearest source index; -1 inside A
    double gap = 0.0;     // Euclidean diameter of the near-minimizer cluster
    bool in_set = false;
};

struct ProjectionResult {
    bool ambiguous = false;
    Vec a;                        // nearest source point (when unique)
    double delta = 0.0;
    double gap = 0.0;
    Vec gradient_foot;            // x - delta G(grad delta), grad by central differences
    double gradient_mismatch = 0.0;
    bool gradient_consistent = false;  // |gradient_foot - a| <= 5h
};

/// delta^F_A on a grid. Candidate sources are pruned per bucket with the
/// Lipschitz bound |F*(p - x) - F*(c - x)| <= L |p - c|, L >= sup F* on the
/// unit sphere. The near-minimizer cluster is the set of discrete local
/// minima of a -> F*(a - x) along the sample adjacency whose value lies in
/// [delta, delta + tau], tau = eps delta + sqrt(d) L h; its diameter is the
/// gap. A point with a unique nearest point has a single basin, so the gap is
/// zero; a point near the ambiguity set has competing basins.
class DistanceField {
public:
    static DistanceField build(const SourceSet& source, const DualNorm& dual, const Grid& grid,
                               const DistanceOptions& opts = {}) {
        require(!source.points.empty(), "distance field needs a nonempty source");
        require(source.dim == dual.dimension() && grid.dim == dual.dimension(), "dimension mismatch in distance field");
        require(opts.eps_cluster >= 0.0 && opts.tol_unique_factor > 0.0, "invalid distance options");
        DistanceField f;
        f.source_ = std::make_shared<const SourceSet>(source);
        f.dual_ = std::make_shared<const DualNorm>(dual);
        f.grid_ = grid;
        f.opts_ = opts;
        f.lipschitz_ = dual.sphere_sup_bound();
        f.tol_unique_ = opts.tol_unique_factor * source.spacing;
        f.check_even();
        f.build_buckets();
        const std::size_t n = grid.size();
        f.delta_.assign(n, 0.0);
        f.argmin_.assign(n, -1);
        f.gap_.assign(n, 0.0);
        parallel_for(n, [&](std::size_t c) {
            const FieldQuery r = f.query(grid.center(c));
            f.delta_[c] = r.delta;
            f.argmin_[c] = r.argmin;
            f.gap_[c] = r.gap;
        });
        return f;
    }

    const Grid& grid() const { return grid_; }
    const SourceSet& source() const { return *source_; }
    const DualNorm& dual() const { return *dual_; }
    const std::vector<double>& delta() const { return delta_; }
    const std::vector<int>& argmin() const { return argmin_; }
    const std::vector<double>& gap() const { return gap_; }
    double tol_unique() const { return tol_unique_; }
    double lipschitz_bound() const { return lipschitz_; }
    bool ambiguous(std::size_t cell) const { return gap_[cell] > tol_unique_; }

    FieldQuery query(const Vec& x) const {
        require(x.size() == grid_.dim, "query point has wrong dimension");
        FieldQuery r;
        if (source_->contains(x)) {
            r.in_set = true;
            return r;
        }
        const int d = grid_.dim;
        const ConjugateKernel kernel(*dual_);
        const double slack = std::sqrt(static_cast<double>(d)) * lipschitz_ * grid_.h;
        const auto window = [&](double v) { return v + opts_.eps_cluster * v + slack; };

        thread_local std::vector<double> lower;
        thread_local std::vector<std::pair<int, double>> recorded;
        lower.resize(buckets_.size());
        recorded.clear();

        double v[3];
        double upper = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < buckets_.size(); ++b) {
            const Bucket& bk = buckets_[b];
            for (int i = 0; i < d; ++i) v[i] = bk.center[static_cast<std::size_t>(i)] - x(i);
            const double c = kernel(v);
            lower[b] = c - lipschitz_ * bk.radius;
            upper = std::min(upper, c + lipschitz_ * bk.radius);
        }
        double best = std::numeric_limits<double>::infinity();
        int best_index = -1;
        for (std::size_t b = 0; b < buckets_.size(); ++b) {
            if (lower[b] > window(std::min(best, upper))) continue;
            const Bucket& bk = buckets_[b];
            for (int p = bk.begin; p < bk.end; ++p) {
                const double* a = &coords_[static_cast<std::size_t>(p) * 3];
                for (int i = 0; i < d; ++i) v[i] = a[i] - x(i);
                const double value = kernel(v);
                if (value < best) { best = value; best_index = order_[static_cast<std::size_t>(p)]; }
                if (value <= window(std::min(best, upper))) recorded.emplace_back(order_[static_cast<std::size_t>(p)], value);
            }
        }
        r.delta = best;
        r.argmin = best_index;
        r.gap = cluster_gap(recorded, window(best));
        return r;
    }

    /// Nearest point of A with ambiguity report and the gradient-formula cross-check.
    ProjectionResult project(const Vec& x) const {
        require(grid_.inside(x), "projection point outside the grid");
        const FieldQuery q = query(x);
        ProjectionResult p;
        p.delta = q.delta;
        p.gap = q.gap;
        if (q.in_set) {
            p.a = x;
            p.gradient_foot = x;
            p.gradient_consistent = true;
            return p;
        }
        p.ambiguous = q.gap > tol_unique_;
        p.a = source_->points[static_cast<std::size_t>(q.argmin)];
        const int d = grid_.dim;
        Vec grad(d);
        for (int i = 0; i < d; ++i) {
            Vec e = Vec::Zero(d);
            e(i) = grid_.h;
            grad(i) = (query(x + e).delta - query(x - e).delta) / (2 * grid_.h);
        }
        if (grad.norm() > 0.0) {
            p.gradient_foot = x - q.delta * dual_->integrand().gradient(grad);
            p.gradient_mismatch = (p.gradient_foot - p.a).norm();
            p.gradient_consistent = p.gradient_mismatch <= 5 * grid_.h;
        } else {
            p.gradient_foot = x;
            p.gradient_mismatch = std::numeric_limits<double>::infinity();
        }
        return p;
    }

private:
    struct Bucket {
        std::array<double, 3> center{};
        double radius = 0.0;
        int begin = 0;
        int end = 0;
    };

    void check_even() const {
        const int d = grid_.dim;
        for (int k = 0; k < 16; ++k) {
            Vec w(d);
            for (int i = 0; i < d; ++i) w(i) = std::cos(0.7 * k + 1.3 * i) + 0.1 * i;
            const double a = dual_->conjugate(w);
            const double b = dual_->conjugate(-w);
            if (std::abs(a - b) > 1e-12 * std::max(a, b)) throw InputError("conjugate norm is not even");
        }
    }

    /// Sources grouped into cubic buckets of side ~8 sample spacings.
    void build_buckets() {
        const SourceSet& s = *source_;
        const int d = s.dim;
        const double side = std::max(8.0 * s.spacing, 1e-12);
        std::map<std::array<long, 3>, std::vector<int>> groups;
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            std::array<long, 3> key{0, 0, 0};
            for (int a = 0; a < d; ++a) key[static_cast<std::size_t>(a)] = static_cast<long>(std::floor(s.points[i](a) / side));
            groups[key].push_back(static_cast<int>(i));
        }
        coords_.clear();
        order_.clear();
        buckets_.clear();
        for (const auto& [key, members] : groups) {
            Bucket b;
            b.begin = static_cast<int>(order_.size());
            for (int i : members) {
                order_.push_back(i);
                for (int a = 0; a < 3; ++a) coords_.push_back(a < d ? s.points[static_cast<std::size_t>(i)](a) : 0.0);
                for (int a = 0; a < d; ++a) b.center[static_cast<std::size_t>(a)] += s.points[static_cast<std::size_t>(i)](a) / members.size();
            }
            b.end = static_cast<int>(order_.size());
            for (int i : members) {
                double r2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    const double dx = s.points[static_cast<std::size_t>(i)](a) - b.center[static_cast<std::size_t>(a)];
                    r2 += dx * dx;
                }
                b.radius = std::max(b.radius, std::sqrt(r2));
            }
            buckets_.push_back(b);
        }
    }

    double cluster_gap(std::vector<std::pair<int, double>>& recorded, double limit) const {
        std::sort(recorded.begin(), recorded.end());
        const auto value_of = [&](int idx) {
            const auto it = std::lower_bound(recorded.begin(), recorded.end(), std::make_pair(idx, -1.0));
            return it != recorded.end() && it->first == idx ? it->second : std::numeric_limits<double>::infinity();
        };
        thread_local std::vector<int> minima;
        minima.clear();
        for (const auto& [idx, value] : recorded) {
            if (value > limit) continue;
            bool is_min = true;
            for (int nb : source_->neighbors[static_cast<std::size_t>(idx)])
                if (nb >= 0 && value_of(nb) < value) { is_min = false; break; }
            if (is_min) minima.push_back(idx);
        }
        const auto& pts = source_->points;
        double diameter = 0.0;
        if (minima.size() <= 512) {
            for (std::size_t i = 0; i < minima.size(); ++i)
                for (std::size_t j = i + 1; j < minima.size(); ++j)
                    diameter = std::max(diameter, (pts[static_cast<std::size_t>(minima[i])] - pts[static_cast<std::size_t>(minima[j])]).norm());
            return diameter;
        }
        // Large plateaus (e.g. the center of a sphere): double sweep, within 2x of the diameter.
        std::size_t far = 0;
        for (int pass = 0; pass < 2; ++pass) {
            const Vec from = pts[static_cast<std::size_t>(minima[far])];
            double dmax = 0.0;
            for (std::size_t i = 0; i < minima.size(); ++i) {
                const double dist = (pts[static_cast<std::size_t>(minima[i])] - from).norm();
                if (dist > dmax) { dmax = dist; far = i; }
            }
            diameter = std::max(diameter, dmax);
        }
        return diameter;
    }

    std::shared_ptr<const SourceSet> source_;
    std::shared_ptr<const DualNorm> dual_;
    Grid grid_;
    DistanceOptions opts_;
    double lipschitz_ = 1.0;
    double tol_unique_ = 0.0;
    std::vector<double> delta_;
    std::vector<int> argmin_;
    std::vector<double> gap_;
    std::vector<Bucket> buckets_;
    std::vector<double> coords_;  // bucket-ordered xyz triples
    std::vector<int> order_;      // bucket order -> source index
};

/// max over pairs (x, a) of |(x - a)/F*(x - a) - G(n)|, n the unit normal at a
/// oriented toward x.
inline double direction_check(const DistanceField& field, const std::vector<std::pair<Vec, int>>& pairs) {
    const auto& src = field.source();
    const auto& dual = field.dual();
    double worst = 0.0;
    for (const auto& [x, idx] : pairs) {
        require(idx >= 0 && static_cast<std::size_t>(idx) < src.points.size(), "direction pair refers to an unknown source");
        const Vec& a = src.points[static_cast<std::size_t>(idx)];
        Vec n = src.normals[static_cast<std::size_t>(idx)];
        if (n.dot(x - a) < 0.0) n = -n;
        const double s = dual.conjugate(x - a);
        if (s == 0.0) continue;
        worst = std::max(worst, ((x - a) / s - dual.integrand().gradient(n)).norm());
    }
    return worst;
}

struct ReachEstimate {
    double reach = 0.0;
    bool saturated = false;       // no ambiguous cell: reach is the largest delta seen
    std::size_t flagged_cells = 0;
};

/// Largest r with every cell 0 < delta < r unambiguous, i.e. the smallest
/// delta over ambiguous cells.
inline ReachEstimate estimate_reach_F(const DistanceField& field) {
    ReachEstimate e;
    double min_flagged = std::numeric_limits<double>::infinity();
    double max_delta = 0.0;
    for (std::size_t c = 0; c < field.delta().size(); ++c) {
        const double v = field.delta()[c];
        if (v <= 0.0) continue;
        max_delta = std::max(max_delta, v);
        if (field.ambiguous(c)) {
            ++e.flagged_cells;
            min_flagged = std::min(min_flagged, v);
        }
    }
    e.saturated = e.flagged_cells == 0;
    e.reach = e.saturated ? max_delta : min_flagged;
    return e;
}

/// Interior rolling-ball radius of the unit Wulff shape: 1 / max Euclidean
/// principal curvature over a sample of its boundary.
inline double wulff_rolling_radius(const DualNorm& dual, std::size_t resolution) {
    const int d = dual.dimension();
    const auto body = StarBody::wulff(dual, Vec::Zero(d), 1.0);
    const auto q = sample_surface(body, std::max(resolution, min_surface_resolution(d)));
    double kmax = 0.0;
    for (const auto& node : q.nodes) {
        const ShapeOperator s = shape_operator(body, node.x);
        kmax = std::max(kmax, symmetric_eigenvalues(s.b).maxCoeff());
    }
    return 1.0 / kmax;
}

struct ReachComparison {
    double reach_euclid = 0.0;
    double reach_F = 0.0;
    double rho = 0.0;
    double slack = 0.0;
    bool holds = false;  // reach_euclid >= rho reach_F - slack
};

inline ReachComparison reach_comparison(const DistanceField& euclid, const DistanceField& anisotropic,
                                        std::size_t resolution = 4096) {
    require(euclid.grid().dim == anisotropic.grid().dim && euclid.grid().h == anisotropic.grid().h,
            "reach comparison needs fields over one grid");
    ReachComparison r;
    r.reach_euclid = estimate_reach_F(euclid).reach;
    r.reach_F = estimate_reach_F(anisotropic).reach;
    r.rho = wulff_rolling_radius(anisotropic.dual(), resolution);
    r.slack = 4 * euclid.grid().h;
    r.holds = r.reach_euclid >= r.rho * r.reach_F - r.slack;
    return r;
}

}  // namespace wulffkit
