#pragma once

#include "wulffkit/core.hpp"

#include <array>
#include <cmath>
#include <utility>
#include <vector>

namespace wulffkit {

/// Partition of the Euclidean unit sphere into cells with exact areas.
///
/// d = 2: N equal arcs, node at angle 2 pi k / N (so the axes are nodes when
/// 4 | N). d = 3: latitude-longitude cells with Gauss-Legendre latitudes
/// (z = cos theta at the Legendre roots) and longitudes 2 pi j / n_phi, weight
/// dphi * w_i. Exact for polynomials of degree < 2 n_theta in z and trig degree
/// < n_phi in phi, so smooth surface integrals converge spectrally. No node
/// sits on a pole and nothing is duplicated.
class SphereGrid {
public:
    static constexpr int kNoNeighbor = -1;

    static SphereGrid circle(std::size_t count) {
        require(count >= 3, "circle grid needs at least 3 nodes");
        SphereGrid g;
        g.dim_ = 2;
        g.rows_ = 1;
        g.cols_ = count;
        const double step = 2.0 * kPi / static_cast<double>(count);
        for (std::size_t k = 0; k < count; ++k) {
            const double theta = step * static_cast<double>(k);
            g.directions_.push_back(make_vec({std::cos(theta), std::sin(theta)}));
            g.weights_.push_back(step);
            const int prev = static_cast<int>((k + count - 1) % count);
            const int next = static_cast<int>((k + 1) % count);
            g.neighbors_.push_back({prev, next, kNoNeighbor, kNoNeighbor});
        }
        return g;
    }

    static SphereGrid lat_long(std::size_t n_theta, std::size_t n_phi) {
        require(n_theta >= 2 && n_phi >= 4 && n_phi % 2 == 0,
                "lat-long grid needs n_theta >= 2 and an even n_phi >= 4");
        SphereGrid g;
        g.dim_ = 3;
        g.rows_ = n_theta;
        g.cols_ = n_phi;
        const double dphi = 2.0 * kPi / static_cast<double>(n_phi);
        const auto [z, w] = gauss_legendre(n_theta);
        for (std::size_t i = 0; i < n_theta; ++i) {
            // north to south
            const double cz = z[n_theta - 1 - i];
            const double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
            const double area = dphi * w[n_theta - 1 - i];
            for (std::size_t j = 0; j < n_phi; ++j) {
                const double phi = dphi * static_cast<double>(j);
                g.directions_.push_back(make_vec({sz * std::cos(phi), sz * std::sin(phi), cz}));
                g.weights_.push_back(area);
                const auto at = [&](std::size_t r, std::size_t c) {
                    return static_cast<int>(r * n_phi + c % n_phi);
                };
                const int west = at(i, j + n_phi - 1);
                const int east = at(i, j + 1);
                // Across the pole the neighbouring cell is half a turn away.
                const int north = i == 0 ? at(0, j + n_phi / 2) : at(i - 1, j);
                const int south = i + 1 == n_theta ? at(i, j + n_phi / 2) : at(i + 1, j);
                g.neighbors_.push_back({west, east, north, south});
            }
        }
        return g;
    }

    /// Grid with about `count` nodes: a circle in d=2; n_theta x 2 n_theta
    /// cells in d=3 with n_theta = round(sqrt(count / 2)) (8192 -> 64 x 128).
    static SphereGrid with_node_count(int dim, std::size_t count) {
        require_dimension(dim);
        if (dim == 2) return circle(count);
        const auto n_theta = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(count) / 2.0)));
        return lat_long(std::max<std::size_t>(n_theta, 2), 2 * std::max<std::size_t>(n_theta, 2));
    }

    int dimension() const { return dim_; }
    std::size_t size() const { return directions_.size(); }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const Vec& direction(std::size_t i) const { return directions_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::array<int, 4>& neighbors(std::size_t i) const { return neighbors_[i]; }

    /// Nodes (ascending) and weights of the n-point Gauss-Legendre rule on [-1, 1].
    static std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
        std::vector<double> x(n), w(n);
        for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
            double t = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (std::size_t k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(n) * (t * p1 - p0) / (t * t - 1.0);
                const double step = p1 / dp;
                t -= step;
                if (std::abs(step) < 1e-16) break;
            }
            x[i] = -t;
            x[n - 1 - i] = t;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        return {x, w};
    }

private:
    SphereGrid() = default;

    int dim_ = 0;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Vec> directions_;
    std::vector<double> weights_;
    std::vector<std::array<int, 4>> neighbors_;
};

}  // namespace wulffkit
