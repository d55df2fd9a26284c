#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace mvsc {

class SpectralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AffinityMatrix {
    Eigen::MatrixXd a;  // symmetric, nonnegative
};

struct ClusteringResult {
    std::vector<int> labels;
    Eigen::MatrixXd embedding;  // n x c, row-normalized spectral embedding
    double kmeans_inertia = 0.0;
    std::uint64_t seed = 0;
};

/// A = |Z| + |Z^T|.
inline AffinityMatrix affinity_from_z(const Eigen::MatrixXd& z) {
    if (z.rows() != z.cols()) throw SpectralError("Z must be square");
    if (!z.allFinite()) throw SpectralError("Z contains non-finite entries");
    return {z.cwiseAbs() + z.transpose().cwiseAbs()};
}

namespace detail {

struct KmeansRun {
    std::vector<int> labels;
    double inertia;
};

/// Lloyd iterations from a k-means++ seeding. Points are rows of `pts`.
inline KmeansRun kmeans_once(const Eigen::MatrixXd& pts, int c, std::mt19937_64& rng,
                             int max_iter) {
    const Eigen::Index n = pts.rows();
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // k-means++ seeding.
    Eigen::MatrixXd centers(c, pts.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = pts.row(pick(rng));
    Eigen::VectorXd d2 = (pts.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int j = 1; j < c; ++j) {
        const double total = d2.sum();
        Eigen::Index chosen = 0;
        if (total > 0) {
            double target = unif(rng) * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc >= target) { chosen = i; break; }
            }
        } else {
            chosen = pick(rng);
        }
        centers.row(j) = pts.row(chosen);
        d2 = d2.cwiseMin((pts.rowwise() - centers.row(j)).rowwise().squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    double inertia = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int j = 0; j < c; ++j) {
                const double dd = (pts.row(i) - centers.row(j)).squaredNorm();
                if (dd < best_d) { best_d = dd; best = j; }
            }
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
            inertia += best_d;
        }
        if (!changed && it > 0) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(c, pts.cols());
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(c);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += pts.row(i);
            counts(labels[static_cast<std::size_t>(i)]) += 1.0;
        }
        for (int j = 0; j < c; ++j)
            if (counts(j) > 0) centers.row(j) = sums.row(j) / counts(j);
        // Empty clusters grab the point farthest from its center.
        for (int j = 0; j < c; ++j) {
            if (counts(j) > 0) continue;
            Eigen::Index worst = 0;
            double worst_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double dd = (pts.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
                if (dd > worst_d) { worst_d = dd; worst = i; }
            }
            centers.row(j) = pts.row(worst);
        }
    }
    return {std::move(labels), inertia};
}

}  // namespace detail

/// Spectral clustering in the symmetric-normalization form: embed by the
/// bottom-c eigenvectors of I - D^{-1/2} A D^{-1/2}, row-normalize, then
/// k-means (k-means++ init, 10 restarts, best inertia kept).
inline ClusteringResult spectral_cluster(const AffinityMatrix& aff, int c, std::uint64_t seed,
                                         int restarts = 10, int kmeans_max_iter = 300) {
    const Eigen::Index n = aff.a.rows();
    if (c < 2) throw SpectralError("cluster count must be >= 2");
    if (c > n) throw SpectralError("cluster count exceeds sample count");
    if (aff.a.cwiseAbs().maxCoeff() == 0.0) throw SpectralError("all-zero affinity matrix");

    Eigen::VectorXd deg = aff.a.rowwise().sum().cwiseMax(1e-12);
    Eigen::VectorXd dinv_sqrt = deg.array().rsqrt();
    Eigen::MatrixXd lsym = dinv_sqrt.asDiagonal() * aff.a * dinv_sqrt.asDiagonal();
    lsym = -lsym;
    lsym.diagonal().array() += 1.0;
    // Symmetrize against round-off before the eigensolve.
    lsym = 0.5 * (lsym + lsym.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lsym);
    if (eig.info() != Eigen::Success) throw SpectralError("eigendecomposition failed");
    Eigen::MatrixXd emb = eig.eigenvectors().leftCols(c);  // ascending eigenvalues
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = emb.row(i).norm();
        if (norm > 0) emb.row(i) /= norm;
    }

    std::mt19937_64 seeder(seed);
    ClusteringResult best;
    best.kmeans_inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(seeder());
        auto run = detail::kmeans_once(emb, c, rng, kmeans_max_iter);
        if (run.inertia < best.kmeans_inertia) {
            best.labels = std::move(run.labels);
            best.kmeans_inertia = run.inertia;
        }
    }
    best.embedding = std::move(emb);
    best.seed = seed;
    return best;
}

}  // namespace mvsc
