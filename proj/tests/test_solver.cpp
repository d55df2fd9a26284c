#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "mvsc/solver.hpp"

using mvsc::fit;
using mvsc::grmsc_fit;
using mvsc::MultiViewDataset;
using mvsc::SolverConfig;
using mvsc::SyntheticSpec;

namespace {

Eigen::MatrixXd randn(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
    return m;
}

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.n_per_cluster = 8;
    spec.c = 3;
    spec.v = 3;
    spec.latent_dim = 5;
    spec.view_dims = {9, 8, 7};
    spec.noise_sigma = 0.01;
    spec.cluster_separation = 10.0;
    spec.seed = 5;
    return spec;
}

SolverConfig small_cfg() {
    SolverConfig cfg;
    cfg.lambda = 0.1;
    cfg.beta = 0.1;
    cfg.gamma = 0.1;
    cfg.m = 6;
    cfg.k = 3;
    cfg.max_iter = 300;
    return cfg;
}

}  // namespace

TEST_CASE("fit: converges on a small synthetic dataset, residuals re-verified") {
    auto ds = mvsc::generate_synthetic(small_spec());
    auto [st, trace] = fit(ds, small_cfg());
    REQUIRE(trace.converged);
    REQUIRE(static_cast<int>(trace.records.size()) == st.iter);

    // Recompute the three feasibility residuals from the returned state.
    const Eigen::MatrixXd x = ds.stacked();
    const double r1 = (x - st.w * st.y - st.e_l).cwiseAbs().maxCoeff();
    const double r2 = (st.y - st.y * st.z - st.e_s).cwiseAbs().maxCoeff();
    const double r3 = (st.q - st.z).cwiseAbs().maxCoeff();
    REQUIRE(r1 < 1e-6);
    REQUIRE(r2 < 1e-6);
    REQUIRE(r3 < 1e-6);

    // W stays column-orthonormal; objective stays finite along the trace.
    REQUIRE((st.w.transpose() * st.w - Eigen::MatrixXd::Identity(st.w.cols(), st.w.cols()))
                .cwiseAbs()
                .maxCoeff() < 1e-8);
    for (const auto& rec : trace.records) REQUIRE(std::isfinite(rec.objective));
}

TEST_CASE("fit: mu schedule is nondecreasing and capped") {
    auto ds = mvsc::generate_synthetic(small_spec());
    auto cfg = small_cfg();
    cfg.mu_max = 1e-2;
    cfg.max_iter = 40;
    auto [st, trace] = fit(ds, cfg);
    double prev = 0.0;
    for (const auto& rec : trace.records) {
        REQUIRE(rec.mu >= prev);
        REQUIRE(rec.mu <= cfg.mu_max + 1e-15);
        prev = rec.mu;
    }
}

TEST_CASE("fit: deterministic given the seed") {
    auto ds = mvsc::generate_synthetic(small_spec());
    auto cfg = small_cfg();
    cfg.max_iter = 25;
    auto [st1, tr1] = fit(ds, cfg);
    auto [st2, tr2] = fit(ds, cfg);
    REQUIRE((st1.y - st2.y).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((st1.z - st2.z).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(tr1.records.size() == tr2.records.size());
    for (std::size_t i = 0; i < tr1.records.size(); ++i) {
        REQUIRE(tr1.records[i].r1 == tr2.records[i].r1);
        REQUIRE(tr1.records[i].objective == tr2.records[i].objective);
    }
}

TEST_CASE("fit: exact generative single-view model reaches feasibility") {
    // X = W* Y* with column-orthonormal W*: a feasible point exists, so the
    // latent constraint residual must vanish.
    std::mt19937_64 rng(31);
    const int d = 10, m = 4, n = 16;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(randn(d, m, rng));
    Eigen::MatrixXd w_star = qr.householderQ() * Eigen::MatrixXd::Identity(d, m);
    Eigen::MatrixXd y_star = randn(m, n, rng);

    MultiViewDataset ds;
    ds.views.push_back({w_star * y_star, 1});

    SolverConfig cfg;
    cfg.lambda = 0.01;
    cfg.beta = 0.0;
    cfg.gamma = 0.0;
    cfg.m = m;
    cfg.k = 3;
    auto [st, trace] = fit(ds, cfg);
    REQUIRE(trace.converged);
    REQUIRE((ds.stacked() - st.w * st.y - st.e_l).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fit: noiseless reconstruction through WY") {
    SyntheticSpec spec = small_spec();
    spec.noise_sigma = 0.0;
    auto ds = mvsc::generate_synthetic(spec);
    SolverConfig cfg = small_cfg();
    cfg.lambda = 1e-3;
    cfg.beta = 0.0;
    cfg.gamma = 0.0;
    auto [st, trace] = fit(ds, cfg);
    REQUIRE(trace.converged);
    const Eigen::MatrixXd x = ds.stacked();
    // Residual feasibility at eps=1e-6 plus a tiny E on clean data means WY
    // reconstructs X nearly exactly.
    REQUIRE((x - st.w * st.y).norm() / x.norm() <= 1e-6);
}

TEST_CASE("objective: term isolation and independent re-evaluation") {
    std::mt19937_64 rng(37);
    mvsc::SolverState st;
    const int d = 5, m = 3, n = 7;
    st.w = Eigen::MatrixXd::Zero(d, m);
    st.y = randn(m, n, rng);
    st.z = randn(n, n, rng);
    st.e_l = randn(d, n, rng);
    st.e_s = randn(m, n, rng);
    Eigen::MatrixXd lap = randn(n, n, rng);
    lap = (lap + lap.transpose()).eval();
    Eigen::MatrixXd l_y = randn(n, n, rng);
    l_y = (l_y + l_y.transpose()).eval();

    SolverConfig cfg;
    cfg.lambda = 0.3;
    cfg.beta = 0.7;
    cfg.gamma = 0.2;

    double expected = 0.0;
    Eigen::MatrixXd e(d + m, n);
    e << st.e_l, st.e_s;
    for (int j = 0; j < n; ++j) expected += e.col(j).norm();
    expected += cfg.lambda * Eigen::JacobiSVD<Eigen::MatrixXd>(st.z).singularValues().sum();
    expected += cfg.beta * (st.y * lap * st.y.transpose()).trace();
    expected += cfg.gamma * (st.z * l_y * st.z.transpose()).trace();
    REQUIRE(mvsc::objective(st, lap, l_y, cfg) == Catch::Approx(expected).epsilon(1e-10));

    SolverConfig bare;
    bare.lambda = bare.beta = bare.gamma = 0.0;
    double e21 = 0.0;
    for (int j = 0; j < n; ++j) e21 += e.col(j).norm();
    REQUIRE(mvsc::objective(st, lap, l_y, bare) == Catch::Approx(e21).epsilon(1e-12));

    mvsc::SolverState zero = st;
    zero.y.setZero();
    zero.z.setZero();
    zero.e_l.setZero();
    zero.e_s.setZero();
    REQUIRE(mvsc::objective(zero, lap, l_y, cfg) == 0.0);
}

TEST_CASE("grmsc_fit: identical to fit with gamma forced to zero") {
    auto ds = mvsc::generate_synthetic(small_spec());
    auto cfg = small_cfg();
    cfg.max_iter = 20;
    cfg.gamma = 5.0;  // must be ignored by the ablation
    auto [sg, tg] = grmsc_fit(ds, cfg);
    auto cfg0 = cfg;
    cfg0.gamma = 0.0;
    auto [s0, t0] = fit(ds, cfg0);
    REQUIRE(tg.effective_gamma == 0.0);
    REQUIRE((sg.z - s0.z).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((sg.y - s0.y).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(tg.records.size() == t0.records.size());
}

TEST_CASE("R1 identity: mu (Z-I)(Z-I)^T + beta (L+L^T) is symmetric PSD") {
    std::mt19937_64 rng(43);
    for (int t = 0; t < 50; ++t) {
        const int n = 8;
        Eigen::MatrixXd z = randn(n, n, rng);
        Eigen::MatrixXd s = randn(n, n, rng).cwiseAbs();
        s = (s + s.transpose()).eval();
        s.diagonal().setZero();
        Eigen::MatrixXd lap = -s;
        lap.diagonal() += s.rowwise().sum();
        const double mu = 0.5, beta = 0.3;
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd r1 = mu * (z * z.transpose() - z - z.transpose() + id) +
                             beta * (lap + lap.transpose());
        Eigen::MatrixXd factored = mu * (z - id) * (z - id).transpose() + beta * (lap + lap.transpose());
        REQUIRE((r1 - factored).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((r1 - r1.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::VectorXd x = randn(n, 1, rng);
        REQUIRE(x.dot(r1 * x) >= -1e-10);
    }
}

TEST_CASE("fit: rejects m > d and k >= n") {
    auto ds = mvsc::generate_synthetic(small_spec());
    auto cfg = small_cfg();
    cfg.m = 1000;
    REQUIRE_THROWS_AS(fit(ds, cfg), mvsc::SolverError);
    cfg = small_cfg();
    cfg.k = 1000;
    REQUIRE_THROWS_AS(fit(ds, cfg), mvsc::SolverError);
}

TEST_CASE("fit: max_iter=1 leaves a single trace record, not converged") {
    auto ds = mvsc::generate_synthetic(small_spec());
    auto cfg = small_cfg();
    cfg.max_iter = 1;
    auto [st, trace] = fit(ds, cfg);
    REQUIRE_FALSE(trace.converged);
    REQUIRE(trace.records.size() == 1);
}

TEST_CASE("SolverConfig validation") {
    SolverConfig cfg;
    cfg.rho = 1.0;
    REQUIRE_THROWS_AS(cfg.validate(), mvsc::SolverError);
    cfg = {};
    cfg.mu0 = 0;
    REQUIRE_THROWS_AS(cfg.validate(), mvsc::SolverError);
    cfg = {};
    cfg.epsilon = 0;
    REQUIRE_THROWS_AS(cfg.validate(), mvsc::SolverError);
}
