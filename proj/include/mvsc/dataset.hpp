#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <algorithm>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvsc/matrix_io.hpp"

#include <json.hpp>

namespace mvsc {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One view of a multi-view dataset, features x samples.
struct ViewMatrix {
    Eigen::MatrixXd data;  // d_v x n
    int view_index = 1;    // 1-based
};

struct MultiViewDataset {
    std::vector<ViewMatrix> views;
    std::optional<std::vector<int>> labels;

    Eigen::Index sample_count() const { return views.empty() ? 0 : views.front().data.cols(); }
    int view_count() const { return static_cast<int>(views.size()); }
    Eigen::Index total_dim() const {
        Eigen::Index d = 0;
        for (const auto& v : views) d += v.data.rows();
        return d;
    }

    /// Vertically stacked feature matrix, d x n.
    Eigen::MatrixXd stacked() const {
        Eigen::MatrixXd x(total_dim(), sample_count());
        Eigen::Index r = 0;
        for (const auto& v : views) {
            x.middleRows(r, v.data.rows()) = v.data;
            r += v.data.rows();
        }
        return x;
    }

    int cluster_count() const {
        if (!labels) return 0;
        return 1 + *std::max_element(labels->begin(), labels->end());
    }

    void validate() const {
        if (views.empty()) throw DatasetError("dataset has no views");
        const Eigen::Index n = views.front().data.cols();
        if (n < 2) throw DatasetError("dataset needs at least 2 samples");
        for (const auto& v : views) {
            if (v.data.rows() < 1) throw DatasetError("view " + std::to_string(v.view_index) + " has no features");
            if (v.data.cols() != n)
                throw DatasetError("view " + std::to_string(v.view_index) + " has " +
                                   std::to_string(v.data.cols()) + " samples, expected " + std::to_string(n));
            if (!v.data.allFinite())
                throw DatasetError("view " + std::to_string(v.view_index) + " contains non-finite entries");
        }
        if (labels) {
            if (static_cast<Eigen::Index>(labels->size()) != n)
                throw DatasetError("label count " + std::to_string(labels->size()) +
                                   " does not match sample count " + std::to_string(n));
            const int c = 1 + *std::max_element(labels->begin(), labels->end());
            if (c < 2) throw DatasetError("labels must cover at least 2 classes");
            std::vector<int> seen(static_cast<std::size_t>(c), 0);
            for (int l : *labels) {
                if (l < 0 || l >= c) throw DatasetError("label out of range: " + std::to_string(l));
                seen[static_cast<std::size_t>(l)] = 1;
            }
            for (int s : seen)
                if (!s) throw DatasetError("labels have an empty class");
        }
    }
};

struct SyntheticSpec {
    int n_per_cluster = 20;
    int c = 3;
    int v = 3;
    int latent_dim = 6;
    std::vector<int> view_dims = {12, 10, 8};
    double noise_sigma = 0.01;
    double cluster_separation = 10.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_per_cluster < 1) throw DatasetError("n_per_cluster must be >= 1");
        if (c < 2) throw DatasetError("c must be >= 2");
        if (v < 1) throw DatasetError("V must be >= 1");
        if (latent_dim < c) throw DatasetError("latent_dim must be >= c");
        if (static_cast<int>(view_dims.size()) != v) throw DatasetError("view_dims size must equal V");
        for (int d : view_dims)
            if (d < latent_dim) throw DatasetError("every view_dim must be >= latent_dim");
        if (noise_sigma < 0) throw DatasetError("noise_sigma must be >= 0");
        if (cluster_separation <= 0) throw DatasetError("cluster_separation must be > 0");
    }
};

namespace detail {

/// Column-orthonormal rows x cols matrix from the QR of a seeded Gaussian draw.
inline Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    return q;
}

}  // namespace detail

/// Samples a dataset from the shared-latent-point model: per cluster a latent
/// center, per sample a scaled copy of its center, per view an orthonormal map
/// into view space plus Gaussian noise. Deterministic given spec.seed.
inline MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.8, 1.2);

    const int n = spec.n_per_cluster * spec.c;

    // Orthonormal center directions: pairwise distance separation * sqrt(2).
    Eigen::MatrixXd centers =
        detail::random_orthonormal(spec.latent_dim, spec.c, rng) * spec.cluster_separation;

    Eigen::MatrixXd latent(spec.latent_dim, n);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int j = 0; j < spec.c; ++j)
        for (int i = 0; i < spec.n_per_cluster; ++i) {
            const int col = j * spec.n_per_cluster + i;
            latent.col(col) = centers.col(j) * scale(rng);
            labels[static_cast<std::size_t>(col)] = j;
        }

    MultiViewDataset ds;
    for (int vi = 0; vi < spec.v; ++vi) {
        Eigen::MatrixXd map = detail::random_orthonormal(spec.view_dims[static_cast<std::size_t>(vi)],
                                                         spec.latent_dim, rng);
        Eigen::MatrixXd x = map * latent;
        if (spec.noise_sigma > 0)
            for (Eigen::Index jj = 0; jj < x.cols(); ++jj)
                for (Eigen::Index ii = 0; ii < x.rows(); ++ii)
                    x(ii, jj) += spec.noise_sigma * gauss(rng);
        ds.views.push_back({std::move(x), vi + 1});
    }
    ds.labels = std::move(labels);
    ds.validate();
    return ds;
}

/// Rescales every feature (row) to [0, 1]; constant rows are left unchanged.
inline void minmax_scale(MultiViewDataset& ds) {
    for (auto& v : ds.views)
        for (Eigen::Index i = 0; i < v.data.rows(); ++i) {
            const double lo = v.data.row(i).minCoeff();
            const double hi = v.data.row(i).maxCoeff();
            if (hi > lo) v.data.row(i) = (v.data.row(i).array() - lo) / (hi - lo);
        }
}

/// Loads `view_<i>.csv` (i = 1..V) plus optional `labels.csv` from a directory.
/// `transpose` reads files stored samples-as-rows.
inline MultiViewDataset load_dataset(const std::filesystem::path& dir, bool transpose = false,
                                     bool scale = false) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DatasetError("not a dataset directory: " + dir.string());
    MultiViewDataset ds;
    for (int i = 1;; ++i) {
        fs::path p = dir / ("view_" + std::to_string(i) + ".csv");
        if (!fs::exists(p)) break;
        Eigen::MatrixXd m = load_matrix(p);
        if (transpose) m.transposeInPlace();
        ds.views.push_back({std::move(m), i});
    }
    if (ds.views.empty()) throw DatasetError("no view_<i>.csv files in " + dir.string());
    fs::path lp = dir / "labels.csv";
    if (fs::exists(lp)) {
        std::vector<int> raw = load_labels(lp);
        // Accept arbitrary integer codes; remap to a dense [0, c) range.
        std::set<int> uniq(raw.begin(), raw.end());
        std::vector<int> labels;
        labels.reserve(raw.size());
        for (int l : raw)
            labels.push_back(static_cast<int>(std::distance(uniq.begin(), uniq.find(l))));
        ds.labels = std::move(labels);
    }
    ds.validate();

    // Advisory manifest: when present, declared shapes must match the files.
    fs::path mp = dir / "meta.json";
    if (fs::exists(mp)) {
        std::ifstream in(mp);
        nlohmann::json meta;
        try {
            in >> meta;
        } catch (const std::exception& e) {
            throw DatasetError("malformed meta.json: " + std::string(e.what()));
        }
        if (meta.contains("n") && meta["n"].get<Eigen::Index>() != ds.sample_count())
            throw DatasetError("meta.json declares n=" + meta["n"].dump() + " but files have n=" +
                               std::to_string(ds.sample_count()));
        if (meta.contains("views") && meta["views"].get<int>() != ds.view_count())
            throw DatasetError("meta.json declares views=" + meta["views"].dump() +
                               " but directory has " + std::to_string(ds.view_count()));
        if (meta.contains("view_dims")) {
            const auto dims = meta["view_dims"].get<std::vector<Eigen::Index>>();
            if (static_cast<int>(dims.size()) != ds.view_count())
                throw DatasetError("meta.json view_dims length mismatch");
            for (int i = 0; i < ds.view_count(); ++i)
                if (dims[static_cast<std::size_t>(i)] != ds.views[static_cast<std::size_t>(i)].data.rows())
                    throw DatasetError("meta.json view_dims mismatch at view " + std::to_string(i + 1));
        }
    }

    if (scale) minmax_scale(ds);
    return ds;
}

/// Writes the dataset in the directory layout load_dataset reads.
inline void save_dataset(const std::filesystem::path& dir, const MultiViewDataset& ds) {
    std::filesystem::create_directories(dir);
    for (const auto& v : ds.views)
        save_matrix(dir / ("view_" + std::to_string(v.view_index) + ".csv"), v.data);
    if (ds.labels) save_labels(dir / "labels.csv", *ds.labels);
}

}  // namespace mvsc
