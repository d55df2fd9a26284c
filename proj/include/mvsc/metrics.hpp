#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvsc {

class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Joint class/cluster counts; substrate for all agreement metrics.
struct ContingencyTable {
    std::vector<std::vector<std::int64_t>> counts;  // c_true x c_pred
    std::int64_t n = 0;

    static ContingencyTable build(const std::vector<int>& truth, const std::vector<int>& pred) {
        if (truth.size() != pred.size()) throw MetricError("label vectors differ in length");
        if (truth.empty()) throw MetricError("empty label vectors");
        int ct = 0, cp = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (truth[i] < 0 || pred[i] < 0) throw MetricError("negative label");
            ct = std::max(ct, truth[i] + 1);
            cp = std::max(cp, pred[i] + 1);
        }
        ContingencyTable t;
        t.n = static_cast<std::int64_t>(truth.size());
        t.counts.assign(static_cast<std::size_t>(ct),
                        std::vector<std::int64_t>(static_cast<std::size_t>(cp), 0));
        for (std::size_t i = 0; i < truth.size(); ++i)
            ++t.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
        return t;
    }

    std::vector<std::int64_t> row_sums() const {
        std::vector<std::int64_t> a(counts.size(), 0);
        for (std::size_t i = 0; i < counts.size(); ++i)
            for (std::int64_t v : counts[i]) a[i] += v;
        return a;
    }

    std::vector<std::int64_t> col_sums() const {
        std::vector<std::int64_t> b(counts.front().size(), 0);
        for (const auto& row : counts)
            for (std::size_t j = 0; j < row.size(); ++j) b[j] += row[j];
        return b;
    }

    /// Same partition, i.e. the table is a (padded) permutation matrix.
    bool partitions_identical() const {
        for (const auto& row : counts) {
            int nz = 0;
            for (std::int64_t v : row) nz += (v != 0);
            if (nz != 1) return false;
        }
        auto cols = col_sums();
        for (const auto& row : counts)
            for (std::size_t j = 0; j < row.size(); ++j)
                if (row[j] != 0 && row[j] != cols[j]) return false;
        return true;
    }
};

namespace detail {

/// Hungarian algorithm (potentials formulation) on a square cost matrix;
/// returns the minimum assignment cost.
inline double hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        total += cost[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)]
                     [static_cast<std::size_t>(j - 1)];
    return total;
}

inline double choose2(std::int64_t k) { return 0.5 * static_cast<double>(k) * static_cast<double>(k - 1); }

}  // namespace detail

/// NMI with geometric-mean normalization, natural log. Both-degenerate
/// partitions score 1.0; a single zero entropy scores 0.0.
inline double nmi(const std::vector<int>& truth, const std::vector<int>& pred) {
    const auto t = ContingencyTable::build(truth, pred);
    const auto a = t.row_sums();
    const auto b = t.col_sums();
    const double n = static_cast<double>(t.n);
    double hu = 0.0, hv = 0.0, mi = 0.0;
    for (std::int64_t ai : a)
        if (ai > 0) hu -= (ai / n) * std::log(ai / n);
    for (std::int64_t bj : b)
        if (bj > 0) hv -= (bj / n) * std::log(bj / n);
    for (std::size_t i = 0; i < t.counts.size(); ++i)
        for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
            const std::int64_t nij = t.counts[i][j];
            if (nij > 0)
                mi += (nij / n) * std::log(n * nij / (static_cast<double>(a[i]) * static_cast<double>(b[j])));
        }
    if (hu <= 0.0 && hv <= 0.0) return 1.0;  // both single-cluster, identical partitions
    if (hu <= 0.0 || hv <= 0.0) return 0.0;
    return mi / std::sqrt(hu * hv);
}

/// Clustering accuracy: best injective mapping of predicted clusters onto
/// true classes via Hungarian matching on the contingency table.
inline double acc(const std::vector<int>& truth, const std::vector<int>& pred) {
    const auto t = ContingencyTable::build(truth, pred);
    const std::size_t dim = std::max(t.counts.size(), t.counts.front().size());
    std::vector<std::vector<double>> cost(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < t.counts.size(); ++i)
        for (std::size_t j = 0; j < t.counts[i].size(); ++j)
            cost[i][j] = -static_cast<double>(t.counts[i][j]);
    const double matched = -detail::hungarian_min_cost(cost);
    return matched / static_cast<double>(t.n);
}

struct PairMetrics {
    double f_measure = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Pairwise F/P/R over unordered sample pairs; 0/0 conventions give 0.
inline PairMetrics pair_metrics(const std::vector<int>& truth, const std::vector<int>& pred) {
    const auto t = ContingencyTable::build(truth, pred);
    if (t.n < 2) throw MetricError("pair metrics need at least 2 samples");
    double tp = 0.0;
    for (const auto& row : t.counts)
        for (std::int64_t nij : row) tp += detail::choose2(nij);
    double same_true = 0.0, same_pred = 0.0;
    for (std::int64_t ai : t.row_sums()) same_true += detail::choose2(ai);
    for (std::int64_t bj : t.col_sums()) same_pred += detail::choose2(bj);
    const double fp = same_pred - tp;
    const double fn = same_true - tp;
    PairMetrics pm;
    pm.precision = (tp + fp > 0) ? tp / (tp + fp) : 0.0;
    pm.recall = (tp + fn > 0) ? tp / (tp + fn) : 0.0;
    pm.f_measure = (pm.precision + pm.recall > 0)
                       ? 2.0 * pm.precision * pm.recall / (pm.precision + pm.recall)
                       : 0.0;
    return pm;
}

/// Adjusted Rand index; a degenerate denominator scores 1.0 for identical
/// partitions and 0.0 otherwise.
inline double adjusted_rand(const std::vector<int>& truth, const std::vector<int>& pred) {
    const auto t = ContingencyTable::build(truth, pred);
    if (t.n < 2) throw MetricError("adjusted rand needs at least 2 samples");
    double sum_ij = 0.0;
    for (const auto& row : t.counts)
        for (std::int64_t nij : row) sum_ij += detail::choose2(nij);
    double sum_a = 0.0, sum_b = 0.0;
    for (std::int64_t ai : t.row_sums()) sum_a += detail::choose2(ai);
    for (std::int64_t bj : t.col_sums()) sum_b += detail::choose2(bj);
    const double expected = sum_a * sum_b / detail::choose2(t.n);
    const double denom = 0.5 * (sum_a + sum_b) - expected;
    if (std::abs(denom) < 1e-15) return t.partitions_identical() ? 1.0 : 0.0;
    return (sum_ij - expected) / denom;
}

struct RunMetrics {
    double nmi = 0.0, acc = 0.0, f_measure = 0.0, ar = 0.0, recall = 0.0, precision = 0.0;

    static RunMetrics compute(const std::vector<int>& truth, const std::vector<int>& pred) {
        RunMetrics r;
        r.nmi = mvsc::nmi(truth, pred);
        r.acc = mvsc::acc(truth, pred);
        const auto pm = pair_metrics(truth, pred);
        r.f_measure = pm.f_measure;
        r.precision = pm.precision;
        r.recall = pm.recall;
        r.ar = adjusted_rand(truth, pred);
        return r;
    }
};

struct MetricReport {
    std::vector<RunMetrics> runs;
    RunMetrics mean;
    RunMetrics stddev;  // sample std (ddof = 1); 0 for a single run
};

/// Mean and sample standard deviation per metric over the recorded runs.
inline MetricReport aggregate(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) throw MetricError("aggregate needs at least one run");
    const double n = static_cast<double>(runs.size());
    auto fields = [](RunMetrics& r) {
        return std::array<double*, 6>{&r.nmi, &r.acc, &r.f_measure, &r.ar, &r.recall, &r.precision};
    };
    MetricReport rep;
    rep.runs = runs;
    auto mf = fields(rep.mean);
    for (const auto& run : runs) {
        RunMetrics copy = run;
        auto cf = fields(copy);
        for (std::size_t i = 0; i < 6; ++i) *mf[i] += *cf[i] / n;
    }
    if (runs.size() > 1) {
        auto sf = fields(rep.stddev);
        for (const auto& run : runs) {
            RunMetrics copy = run;
            auto cf = fields(copy);
            for (std::size_t i = 0; i < 6; ++i) {
                const double d = *cf[i] - *mf[i];
                *sf[i] += d * d / (n - 1.0);
            }
        }
        for (std::size_t i = 0; i < 6; ++i) *sf[i] = std::sqrt(*sf[i]);
    }
    return rep;
}

}  // namespace mvsc
