#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvsc/dataset.hpp"
#include "mvsc/graphs.hpp"
#include "mvsc/kernels.hpp"
#include "mvsc/matrix_io.hpp"

namespace mvsc {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

/// When the latent-graph Laplacian L_Y is rebuilt from the evolving Y.
enum class LyRefresh { EveryIter, EveryT, FrozenAfter };

struct SolverConfig {
    double lambda = 0.1;  // nuclear-norm weight
    double beta = 0.1;    // latent-graph weight
    double gamma = 0.1;   // self-representation-graph weight
    int m = 0;            // latent dimension; 0 picks min(100, d-1, n-1)
    int k = 5;            // graph neighbor count
    std::optional<double> sigma;  // nullopt = AUTO (median k-NN distance)
    double mu0 = 1e-4;
    double rho = 1.2;
    double mu_max = 1e6;
    double epsilon = 1e-6;
    int max_iter = 300;
    std::uint64_t seed = 0;
    LyRefresh ly_refresh = LyRefresh::EveryIter;
    int ly_period = 1;  // EveryT period / FrozenAfter cutoff

    void validate() const {
        if (rho <= 1) throw SolverError("rho must be > 1");
        if (mu0 <= 0) throw SolverError("mu0 must be > 0");
        if (mu_max < mu0) throw SolverError("mu_max must be >= mu0");
        if (epsilon <= 0) throw SolverError("epsilon must be > 0");
        if (m < 0) throw SolverError("m must be >= 1 (or 0 for auto)");
        if (max_iter < 1) throw SolverError("max_iter must be >= 1");
        if (k < 1) throw SolverError("k must be >= 1");
        if (ly_period < 1) throw SolverError("ly_period must be >= 1");
    }

    int effective_m(Eigen::Index d, Eigen::Index n) const {
        if (m > 0) return m;
        return static_cast<int>(std::min<Eigen::Index>({100, d - 1, n - 1}));
    }
};

struct SolverState {
    Eigen::MatrixXd w;        // d x m, column-orthonormal
    Eigen::MatrixXd y;        // m x n
    Eigen::MatrixXd z;        // n x n
    Eigen::MatrixXd q;        // n x n
    Eigen::MatrixXd e_l;      // d x n
    Eigen::MatrixXd e_s;      // m x n
    Eigen::MatrixXd lambda1;  // d x n
    Eigen::MatrixXd lambda2;  // m x n
    Eigen::MatrixXd lambda3;  // n x n
    double mu = 0.0;
    int iter = 0;

    Eigen::MatrixXd stacked_error() const {
        Eigen::MatrixXd e(e_l.rows() + e_s.rows(), e_l.cols());
        e << e_l, e_s;
        return e;
    }
};

struct TraceRecord {
    int iter;
    double r1, r2, r3;
    double mu;
    double objective;
};

struct ConvergenceTrace {
    std::vector<TraceRecord> records;
    bool converged = false;
    double effective_gamma = 0.0;

    void save_csv(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot open for writing: " + path.string());
        out << std::setprecision(17);
        out << "iter,r1,r2,r3,mu,objective\n";
        for (const auto& r : records)
            out << r.iter << ',' << r.r1 << ',' << r.r2 << ',' << r.r3 << ',' << r.mu << ','
                << r.objective << '\n';
    }
};

inline double l21_norm(const Eigen::MatrixXd& e) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < e.cols(); ++j) s += e.col(j).norm();
    return s;
}

inline double nuclear_norm(const Eigen::MatrixXd& m) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues().sum();
}

/// Value of the unconstrained objective at the current iterates:
/// ||E||_{2,1} + lambda ||Z||_* + beta Tr(Y L Y^T) + gamma Tr(Z L_Y Z^T).
inline double objective(const SolverState& state, const Eigen::MatrixXd& l,
                        const Eigen::MatrixXd& l_y, const SolverConfig& cfg) {
    double val = l21_norm(state.stacked_error());
    if (cfg.lambda != 0) val += cfg.lambda * nuclear_norm(state.z);
    if (cfg.beta != 0) val += cfg.beta * (state.y * l * state.y.transpose()).trace();
    if (cfg.gamma != 0 && l_y.size() > 0)
        val += cfg.gamma * (state.z * l_y * state.z.transpose()).trace();
    return val;
}

namespace detail {

inline void check_finite(const Eigen::MatrixXd& m, const char* block, int iter) {
    if (!m.allFinite())
        throw DivergenceError(std::string("diverged: non-finite ") + block + " at iteration " +
                              std::to_string(iter));
}

}  // namespace detail

/// ALM/ADM fit: alternates the five block updates (orthogonal Procrustes for
/// W, Sylvester solves for Y and Z, column shrinkage for E, singular value
/// thresholding for Q) with dual ascent on the three multipliers and a
/// geometric penalty schedule, until the three infinity-norm feasibility
/// residuals drop below epsilon.
inline std::pair<SolverState, ConvergenceTrace> fit(const MultiViewDataset& dataset,
                                                    const SolverConfig& cfg) {
    dataset.validate();
    cfg.validate();
    const Eigen::MatrixXd x = dataset.stacked();
    const Eigen::Index d = x.rows();
    const Eigen::Index n = x.cols();
    const int m = cfg.effective_m(d, n);
    if (m > d) throw SolverError("latent dimension m exceeds total feature dimension d");
    if (cfg.k >= n) throw SolverError("k must be < n");

    const Eigen::MatrixXd lap = averaged_laplacian(dataset.views, cfg.k, cfg.sigma).l;

    SolverState st;
    st.w = Eigen::MatrixXd::Zero(d, m);
    st.z = Eigen::MatrixXd::Zero(n, n);
    st.q = Eigen::MatrixXd::Zero(n, n);
    st.e_l = Eigen::MatrixXd::Zero(d, n);
    st.e_s = Eigen::MatrixXd::Zero(m, n);
    st.lambda1 = Eigen::MatrixXd::Zero(d, n);
    st.lambda2 = Eigen::MatrixXd::Zero(m, n);
    st.lambda3 = Eigen::MatrixXd::Zero(n, n);
    st.mu = cfg.mu0;

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    st.y.resize(m, n);
    const double y_scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) st.y(i, j) = y_scale * gauss(rng);

    const Eigen::MatrixXd id_n = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd l_y;  // built lazily when gamma != 0

    ConvergenceTrace trace;
    trace.effective_gamma = cfg.gamma;

    for (int it = 1; it <= cfg.max_iter; ++it) {
        st.iter = it;
        const double mu = st.mu;

        // W step: Procrustes on Y (Lambda1/mu + X - E_L)^T.
        st.w = procrustes(st.y * (st.lambda1 / mu + x - st.e_l).transpose()).w;
        detail::check_finite(st.w, "W", it);

        // Y step: with W^T W = I the Sylvester system collapses to a single
        // right-sided SPD solve Y (mu I + R1) = C1.
        {
            Eigen::MatrixXd r1 = mu * (st.z * st.z.transpose() - st.z - st.z.transpose() + id_n) +
                                 cfg.beta * (lap + lap.transpose());
            Eigen::MatrixXd c1 = st.w.transpose() * st.lambda1 + st.lambda2 * (st.z.transpose() - id_n) +
                                 mu * (st.w.transpose() * x + st.e_s - st.w.transpose() * st.e_l -
                                       st.e_s * st.z.transpose());
            r1.diagonal().array() += mu;
            st.y = r1.transpose().ldlt().solve(c1.transpose()).transpose();
            detail::check_finite(st.y, "Y", it);
        }

        // Z step: Sylvester L2 Z + Z R2 = C2.
        {
            const bool refresh = cfg.gamma != 0 &&
                                 (cfg.ly_refresh == LyRefresh::EveryIter ||
                                  (cfg.ly_refresh == LyRefresh::EveryT && (it - 1) % cfg.ly_period == 0) ||
                                  (cfg.ly_refresh == LyRefresh::FrozenAfter &&
                                   (it <= cfg.ly_period || l_y.size() == 0)));
            if (refresh) l_y = latent_laplacian(st.y, cfg.k, cfg.sigma).l;

            Eigen::MatrixXd l2 = mu * (st.y.transpose() * st.y + id_n);
            Eigen::MatrixXd c2 = mu * (st.y.transpose() * st.y + st.q - st.y.transpose() * st.e_s) +
                                 st.lambda3 + st.y.transpose() * st.lambda2;
            if (cfg.gamma != 0) {
                Eigen::MatrixXd r2 = cfg.gamma * (l_y + l_y.transpose());
                st.z = solve_sylvester(l2, r2, c2);
            } else {
                st.z = l2.ldlt().solve(c2);
            }
            detail::check_finite(st.z, "Z", it);
        }

        // E step: stacked column shrinkage, then split back into E_L / E_S.
        {
            Eigen::MatrixXd g(d + m, n);
            g.topRows(d) = x - st.w * st.y + st.lambda1 / mu;
            g.bottomRows(m) = st.y - st.y * st.z + st.lambda2 / mu;
            Eigen::MatrixXd e = prox_l21(g, 1.0 / mu);
            st.e_l = e.topRows(d);
            st.e_s = e.bottomRows(m);
            detail::check_finite(e, "E", it);
        }

        // Q step.
        st.q = svt(st.z - st.lambda3 / mu, cfg.lambda / mu);
        detail::check_finite(st.q, "Q", it);

        // Multipliers and penalty.
        const Eigen::MatrixXd res1 = x - st.w * st.y - st.e_l;
        const Eigen::MatrixXd res2 = st.y - st.y * st.z - st.e_s;
        const Eigen::MatrixXd res3 = st.q - st.z;
        st.lambda1 += mu * res1;
        st.lambda2 += mu * res2;
        st.lambda3 += mu * res3;
        detail::check_finite(st.lambda1, "Lambda1", it);
        detail::check_finite(st.lambda2, "Lambda2", it);
        detail::check_finite(st.lambda3, "Lambda3", it);
        st.mu = std::min(cfg.rho * mu, cfg.mu_max);

        TraceRecord rec;
        rec.iter = it;
        rec.r1 = res1.cwiseAbs().maxCoeff();
        rec.r2 = res2.cwiseAbs().maxCoeff();
        rec.r3 = res3.cwiseAbs().maxCoeff();
        rec.mu = mu;
        rec.objective = objective(st, lap, l_y, cfg);
        if (!std::isfinite(rec.objective))
            throw DivergenceError("diverged: non-finite objective at iteration " + std::to_string(it));
        trace.records.push_back(rec);

        if (rec.r1 < cfg.epsilon && rec.r2 < cfg.epsilon && rec.r3 < cfg.epsilon) {
            trace.converged = true;
            break;
        }
    }
    return {std::move(st), std::move(trace)};
}

/// Ablation with the self-representation graph disabled (gamma forced to 0).
inline std::pair<SolverState, ConvergenceTrace> grmsc_fit(const MultiViewDataset& dataset,
                                                          SolverConfig cfg) {
    cfg.gamma = 0.0;
    return fit(dataset, cfg);
}

inline void save_state(const std::filesystem::path& dir, const SolverState& st) {
    std::filesystem::create_directories(dir);
    save_matrix(dir / "W.csv", st.w);
    save_matrix(dir / "Y.csv", st.y);
    save_matrix(dir / "Z.csv", st.z);
    save_matrix(dir / "E_L.csv", st.e_l);
    save_matrix(dir / "E_S.csv", st.e_s);
}

}  // namespace mvsc
