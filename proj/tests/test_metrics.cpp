#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mvsc/metrics.hpp"

using mvsc::acc;
using mvsc::adjusted_rand;
using mvsc::aggregate;
using mvsc::nmi;
using mvsc::pair_metrics;
using mvsc::RunMetrics;

namespace {

// Exhaustive pair enumeration of TP/FP/FN, independent of the contingency path.
struct PairCounts {
    double tp = 0, fp = 0, fn = 0, tn = 0;
};

PairCounts count_pairs(const std::vector<int>& t, const std::vector<int>& p) {
    PairCounts c;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            const bool st = t[i] == t[j], sp = p[i] == p[j];
            if (st && sp) c.tp += 1;
            else if (!st && sp) c.fp += 1;
            else if (st && !sp) c.fn += 1;
            else c.tn += 1;
        }
    return c;
}

double nmi_oracle(const std::vector<int>& t, const std::vector<int>& p) {
    const int ct = 1 + *std::max_element(t.begin(), t.end());
    const int cp = 1 + *std::max_element(p.begin(), p.end());
    const double n = static_cast<double>(t.size());
    std::vector<std::vector<double>> tab(static_cast<std::size_t>(ct),
                                         std::vector<double>(static_cast<std::size_t>(cp), 0));
    for (std::size_t i = 0; i < t.size(); ++i)
        tab[static_cast<std::size_t>(t[i])][static_cast<std::size_t>(p[i])] += 1;
    double hu = 0, hv = 0, mi = 0;
    std::vector<double> a(static_cast<std::size_t>(ct), 0), b(static_cast<std::size_t>(cp), 0);
    for (int i = 0; i < ct; ++i)
        for (int j = 0; j < cp; ++j) {
            a[static_cast<std::size_t>(i)] += tab[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            b[static_cast<std::size_t>(j)] += tab[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    for (double ai : a)
        if (ai > 0) hu -= ai / n * std::log(ai / n);
    for (double bj : b)
        if (bj > 0) hv -= bj / n * std::log(bj / n);
    for (int i = 0; i < ct; ++i)
        for (int j = 0; j < cp; ++j) {
            const double nij = tab[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (nij > 0)
                mi += nij / n * std::log(n * nij / (a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)]));
        }
    if (hu <= 0 && hv <= 0) return 1.0;
    if (hu <= 0 || hv <= 0) return 0.0;
    return mi / std::sqrt(hu * hv);
}

// Brute-force ACC: maximize matched fraction over all injective mappings of
// predicted clusters onto true classes (permutations of the padded square).
double acc_oracle(const std::vector<int>& t, const std::vector<int>& p) {
    const int ct = 1 + *std::max_element(t.begin(), t.end());
    const int cp = 1 + *std::max_element(p.begin(), p.end());
    const int dim = std::max(ct, cp);
    std::vector<std::vector<double>> tab(static_cast<std::size_t>(dim),
                                         std::vector<double>(static_cast<std::size_t>(dim), 0));
    for (std::size_t i = 0; i < t.size(); ++i)
        tab[static_cast<std::size_t>(t[i])][static_cast<std::size_t>(p[i])] += 1;
    std::vector<int> perm(static_cast<std::size_t>(dim));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0;
    do {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += tab[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(t.size());
}

std::vector<int> random_labels(std::size_t n, int c, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(0, c - 1);
    std::vector<int> l(n);
    for (auto& v : l) v = d(rng);
    return l;
}

// Labels in a vector may skip values; compact to a dense range so the
// oracles' max-label bookkeeping stays small.
std::vector<int> compact(std::vector<int> l) {
    std::vector<int> seen;
    for (int& v : l) {
        auto it = std::find(seen.begin(), seen.end(), v);
        if (it == seen.end()) {
            seen.push_back(v);
            v = static_cast<int>(seen.size()) - 1;
        } else {
            v = static_cast<int>(it - seen.begin());
        }
    }
    return l;
}

}  // namespace

TEST_CASE("nmi: trivial cases") {
    REQUIRE(nmi({0, 0, 1, 1}, {0, 0, 1, 1}) == Catch::Approx(1.0));
    REQUIRE(nmi({0, 0, 1, 1}, {1, 1, 0, 0}) == Catch::Approx(1.0));
    REQUIRE(nmi({0, 0, 1, 1}, {0, 0, 0, 0}) == 0.0);
    REQUIRE(nmi({0, 0, 0, 0}, {0, 0, 0, 0}) == 1.0);
}

TEST_CASE("nmi: matches contingency oracle on the spec example") {
    const std::vector<int> t = {0, 0, 1, 1}, p = {0, 1, 1, 1};
    REQUIRE(nmi(t, p) == Catch::Approx(nmi_oracle(t, p)).margin(1e-12));
}

TEST_CASE("acc: renaming absorbed by matching") {
    REQUIRE(acc({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
    REQUIRE(acc({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
    REQUIRE(acc({0, 0, 1, 1, 2, 2}, {1, 1, 0, 2, 2, 2}) ==
            Catch::Approx(acc_oracle({0, 0, 1, 1, 2, 2}, {1, 1, 0, 2, 2, 2})).margin(1e-12));
}

TEST_CASE("pair metrics: trivial and degenerate conventions") {
    auto pm = pair_metrics({0, 0, 1, 1}, {0, 0, 1, 1});
    REQUIRE(pm.precision == 1.0);
    REQUIRE(pm.recall == 1.0);
    REQUIRE(pm.f_measure == 1.0);

    // Prediction with all-distinct labels has no co-clustered pairs.
    auto pm2 = pair_metrics({0, 0, 1, 1}, {0, 1, 2, 3});
    REQUIRE(pm2.precision == 0.0);
    REQUIRE(pm2.recall == 0.0);
    REQUIRE(pm2.f_measure == 0.0);
}

TEST_CASE("pair metrics and ARI: spec example vs all-pairs enumeration") {
    const std::vector<int> t = {0, 0, 1, 1}, p = {0, 1, 1, 1};
    const auto c = count_pairs(t, p);
    const auto pm = pair_metrics(t, p);
    REQUIRE(pm.precision == Catch::Approx(c.tp / (c.tp + c.fp)).margin(1e-12));
    REQUIRE(pm.recall == Catch::Approx(c.tp / (c.tp + c.fn)).margin(1e-12));

    const double n2 = c.tp + c.fp + c.fn + c.tn;
    const double expected_idx = (c.tp + c.fp) * (c.tp + c.fn) / n2;
    const double max_idx = 0.5 * ((c.tp + c.fp) + (c.tp + c.fn));
    REQUIRE(adjusted_rand(t, p) ==
            Catch::Approx((c.tp - expected_idx) / (max_idx - expected_idx)).margin(1e-12));
}

TEST_CASE("adjusted_rand: trivial cases") {
    REQUIRE(adjusted_rand({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
    REQUIRE(adjusted_rand({0, 0, 1, 1}, {0, 0, 0, 0}) == 0.0);
    // Degenerate denominator with identical partitions.
    REQUIRE(adjusted_rand({0, 1, 2, 3}, {3, 2, 1, 0}) == 1.0);
    REQUIRE(adjusted_rand({0, 0, 0, 0}, {0, 0, 0, 0}) == 1.0);
}

TEST_CASE("all metrics match oracles on random instances") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> nd(4, 40);
    std::uniform_int_distribution<int> cd(2, 5);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = nd(rng);
        auto t = compact(random_labels(n, cd(rng), rng));
        auto p = compact(random_labels(n, cd(rng), rng));
        REQUIRE(nmi(t, p) == Catch::Approx(nmi_oracle(t, p)).margin(1e-12));
        REQUIRE(acc(t, p) == Catch::Approx(acc_oracle(t, p)).margin(1e-12));
        const auto c = count_pairs(t, p);
        const auto pm = pair_metrics(t, p);
        const double prec = (c.tp + c.fp > 0) ? c.tp / (c.tp + c.fp) : 0.0;
        const double rec = (c.tp + c.fn > 0) ? c.tp / (c.tp + c.fn) : 0.0;
        REQUIRE(pm.precision == Catch::Approx(prec).margin(1e-12));
        REQUIRE(pm.recall == Catch::Approx(rec).margin(1e-12));
        const double n2 = c.tp + c.fp + c.fn + c.tn;
        const double exp_idx = (c.tp + c.fp) * (c.tp + c.fn) / n2;
        const double max_idx = 0.5 * (2 * c.tp + c.fp + c.fn);
        if (std::abs(max_idx - exp_idx) > 1e-12)
            REQUIRE(adjusted_rand(t, p) ==
                    Catch::Approx((c.tp - exp_idx) / (max_idx - exp_idx)).margin(1e-12));
    }
}

TEST_CASE("metrics invariant under predicted-label permutation") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 50; ++trial) {
        auto t = compact(random_labels(20, 3, rng));
        auto p = compact(random_labels(20, 4, rng));
        std::vector<int> perm = {2, 0, 3, 1};
        std::vector<int> p2(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) p2[i] = perm[static_cast<std::size_t>(p[i])];
        REQUIRE(nmi(t, p) == Catch::Approx(nmi(t, p2)).margin(1e-12));
        REQUIRE(acc(t, p) == Catch::Approx(acc(t, p2)).margin(1e-12));
        REQUIRE(adjusted_rand(t, p) == Catch::Approx(adjusted_rand(t, p2)).margin(1e-12));
        const auto a = pair_metrics(t, p), b = pair_metrics(t, p2);
        REQUIRE(a.f_measure == Catch::Approx(b.f_measure).margin(1e-12));
    }
}

TEST_CASE("metric bounds and constant-prediction lower bound on ACC") {
    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 50; ++trial) {
        auto t = compact(random_labels(15, 4, rng));
        auto p = compact(random_labels(15, 3, rng));
        REQUIRE(nmi(t, p) >= 0.0);
        REQUIRE(nmi(t, p) <= 1.0 + 1e-12);
        REQUIRE(acc(t, p) >= 0.0);
        REQUIRE(acc(t, p) <= 1.0);
        REQUIRE(adjusted_rand(t, p) >= -1.0);
        REQUIRE(adjusted_rand(t, p) <= 1.0 + 1e-12);

        std::vector<int> counts(5, 0);
        for (int v : t) ++counts[static_cast<std::size_t>(v)];
        const double majority = *std::max_element(counts.begin(), counts.end()) / 15.0;
        REQUIRE(acc(t, std::vector<int>(15, 0)) >= majority - 1e-12);
    }
}

TEST_CASE("aggregate: closed forms and single-run convention") {
    RunMetrics a, b;
    a.acc = 0.8;
    b.acc = 1.0;
    auto rep = aggregate({a, b});
    REQUIRE(rep.mean.acc == Catch::Approx(0.9));
    REQUIRE(rep.stddev.acc == Catch::Approx(std::sqrt(0.02)).epsilon(1e-6));

    auto single = aggregate({a});
    REQUIRE(single.mean.acc == 0.8);
    REQUIRE(single.stddev.acc == 0.0);

    REQUIRE_THROWS_AS(aggregate({}), mvsc::MetricError);
}

TEST_CASE("length mismatch rejected") {
    REQUIRE_THROWS_AS(nmi({0, 1}, {0, 1, 1}), mvsc::MetricError);
    REQUIRE_THROWS_AS(acc({0, 1}, {0}), mvsc::MetricError);
    REQUIRE_THROWS_AS(pair_metrics({0}, {0, 1}), mvsc::MetricError);
    REQUIRE_THROWS_AS(adjusted_rand({}, {}), mvsc::MetricError);
}
