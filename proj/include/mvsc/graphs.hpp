#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mvsc/dataset.hpp"

namespace mvsc {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Symmetric k-NN heat-kernel similarity, zero diagonal, entries in [0, 1].
struct SimilarityMatrix {
    Eigen::MatrixXd s;
    double kernel_width = 0.0;
    int k = 0;
};

enum class LaplacianSource { PerView, Averaged, Latent };

struct LaplacianMatrix {
    Eigen::MatrixXd l;
    LaplacianSource source = LaplacianSource::PerView;
};

/// sigma = nullopt selects AUTO: the median of all retained k-NN distances.
inline SimilarityMatrix knn_heat_similarity(const Eigen::MatrixXd& points, int k,
                                            std::optional<double> sigma = std::nullopt) {
    const Eigen::Index n = points.cols();
    if (k < 1 || k >= n) throw GraphError("k must satisfy 1 <= k < n");
    if (!points.allFinite()) throw GraphError("points contain non-finite entries");
    if (sigma && *sigma <= 0) throw GraphError("sigma must be positive");

    Eigen::MatrixXd dist2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist2(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (points.col(i) - points.col(j)).squaredNorm();
            dist2(i, j) = d2;
            dist2(j, i) = d2;
        }
    }

    // Directed k-NN edges, then union symmetrization.
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> retained;
    retained.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (dist2(i, a) != dist2(i, b)) return dist2(i, a) < dist2(i, b);
            return a < b;  // deterministic tie break
        });
        int taken = 0;
        for (Eigen::Index j : order) {
            if (j == i) continue;
            mask(i, j) = 1.0;
            retained.push_back(std::sqrt(dist2(i, j)));
            if (++taken == k) break;
        }
    }

    double sig;
    if (sigma) {
        sig = *sigma;
    } else {
        std::nth_element(retained.begin(), retained.begin() + static_cast<std::ptrdiff_t>(retained.size() / 2),
                         retained.end());
        sig = retained[retained.size() / 2];
        if (sig <= 0) sig = 1.0;  // all retained neighbors coincident
    }

    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && (mask(i, j) > 0 || mask(j, i) > 0))
                s(i, j) = std::exp(-dist2(i, j) / (2.0 * sig * sig));
    return {std::move(s), sig, k};
}

/// L = D - S with D the diagonal of row sums.
inline LaplacianMatrix laplacian(const SimilarityMatrix& sim,
                                 LaplacianSource source = LaplacianSource::PerView) {
    Eigen::MatrixXd l = -sim.s;
    l.diagonal() += sim.s.rowwise().sum();
    return {std::move(l), source};
}

/// Mean of the per-view Laplacians built with shared (k, sigma).
inline LaplacianMatrix averaged_laplacian(const std::vector<ViewMatrix>& views, int k,
                                          std::optional<double> sigma = std::nullopt) {
    if (views.empty()) throw GraphError("no views");
    const Eigen::Index n = views.front().data.cols();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (const auto& v : views) {
        if (v.data.cols() != n) throw GraphError("views disagree on sample count");
        acc += laplacian(knn_heat_similarity(v.data, k, sigma)).l;
    }
    acc /= static_cast<double>(views.size());
    return {std::move(acc), LaplacianSource::Averaged};
}

/// Laplacian of the latent representation's column k-NN graph.
inline LaplacianMatrix latent_laplacian(const Eigen::MatrixXd& y, int k,
                                        std::optional<double> sigma = std::nullopt) {
    return laplacian(knn_heat_similarity(y, k, sigma), LaplacianSource::Latent);
}

}  // namespace mvsc
