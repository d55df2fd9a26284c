#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mvsc/dataset.hpp"
#include "mvsc/metrics.hpp"
#include "mvsc/solver.hpp"
#include "mvsc/spectral.hpp"

namespace mvsc {

enum class Ablation { DGRMSC, GRMSC };

struct ExperimentConfig {
    std::optional<std::filesystem::path> dataset_path;
    std::optional<SyntheticSpec> synthetic;
    bool transpose_views = false;
    bool minmax = false;
    SolverConfig solver;
    int clusters = 0;  // 0 = take from labels
    int runs = 30;
    std::uint64_t base_seed = 0;
    std::filesystem::path output_dir = "out";
    Ablation ablation = Ablation::DGRMSC;
    bool refit_per_run = false;

    void validate() const {
        if (runs < 1) throw SolverError("runs must be >= 1");
        if (dataset_path.has_value() == synthetic.has_value())
            throw DatasetError("exactly one of dataset path / synthetic spec must be set");
    }

    MultiViewDataset load() const {
        validate();
        if (dataset_path) return load_dataset(*dataset_path, transpose_views, minmax);
        return generate_synthetic(*synthetic);
    }
};

inline int worker_threads() {
    if (const char* env = std::getenv("MVSC_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

/// Single fit; writes W, Y, Z, E_L, E_S, the trace CSV and the affinity
/// matrix to the output directory. Returns the trace.
inline ConvergenceTrace run_fit(const ExperimentConfig& cfg) {
    const MultiViewDataset ds = cfg.load();
    SolverConfig sc = cfg.solver;
    if (cfg.ablation == Ablation::GRMSC) sc.gamma = 0.0;
    auto [state, trace] = fit(ds, sc);
    std::filesystem::create_directories(cfg.output_dir);
    save_state(cfg.output_dir, state);
    trace.save_csv(cfg.output_dir / "trace.csv");
    save_matrix(cfg.output_dir / "affinity.csv", affinity_from_z(state.z).a);
    return trace;
}

struct EvalResult {
    MetricReport report;
    ConvergenceTrace trace;
    int clusters = 0;
};

namespace detail {

inline void write_metrics_csv(const std::filesystem::path& path, const MetricReport& rep,
                              std::uint64_t base_seed) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(17);
    out << "run,seed,nmi,acc,f,ar,recall,precision\n";
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        const auto& r = rep.runs[i];
        out << i << ',' << base_seed + i << ',' << r.nmi << ',' << r.acc << ',' << r.f_measure
            << ',' << r.ar << ',' << r.recall << ',' << r.precision << '\n';
    }
    out << "mean," << base_seed << ',' << rep.mean.nmi << ',' << rep.mean.acc << ','
        << rep.mean.f_measure << ',' << rep.mean.ar << ',' << rep.mean.recall << ','
        << rep.mean.precision << '\n';
    out << "std(ddof=1)," << base_seed << ',' << rep.stddev.nmi << ',' << rep.stddev.acc << ','
        << rep.stddev.f_measure << ',' << rep.stddev.ar << ',' << rep.stddev.recall << ','
        << rep.stddev.precision << '\n';
}

inline std::string format_table(const MetricReport& rep) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "metric      mean     std\n";
    const char* names[6] = {"NMI", "ACC", "F", "AR", "Recall", "Precision"};
    const double means[6] = {rep.mean.nmi, rep.mean.acc, rep.mean.f_measure,
                             rep.mean.ar, rep.mean.recall, rep.mean.precision};
    const double stds[6] = {rep.stddev.nmi, rep.stddev.acc, rep.stddev.f_measure,
                            rep.stddev.ar, rep.stddev.recall, rep.stddev.precision};
    for (int i = 0; i < 6; ++i)
        os << std::left << std::setw(10) << names[i] << std::right << std::setw(8) << means[i]
           << std::setw(8) << stds[i] << '\n';
    return os.str();
}

}  // namespace detail

/// Fits (once, or per run with refit_per_run), repeats spectral clustering
/// with seeds base_seed .. base_seed+runs-1, and aggregates the six metrics.
/// Spectral runs execute on up to MVSC_THREADS workers; output order is
/// fixed by run index, so results are reproducible regardless of threads.
inline EvalResult run_eval(const ExperimentConfig& cfg, bool write_artifacts = true) {
    const MultiViewDataset ds = cfg.load();
    if (!ds.labels) throw DatasetError("evaluation requires ground-truth labels");
    const int c = cfg.clusters > 0 ? cfg.clusters : ds.cluster_count();
    if (c < 2) throw DatasetError("cluster count must be >= 2");

    SolverConfig sc = cfg.solver;
    if (cfg.ablation == Ablation::GRMSC) sc.gamma = 0.0;

    EvalResult res;
    res.clusters = c;
    std::vector<RunMetrics> runs(static_cast<std::size_t>(cfg.runs));

    if (!cfg.refit_per_run) {
        auto [state, trace] = fit(ds, sc);
        res.trace = std::move(trace);
        const AffinityMatrix aff = affinity_from_z(state.z);
        const int workers = std::min(worker_threads(), cfg.runs);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int r = w; r < cfg.runs; r += workers) {
                    const auto cr = spectral_cluster(aff, c, cfg.base_seed + static_cast<std::uint64_t>(r));
                    runs[static_cast<std::size_t>(r)] = RunMetrics::compute(*ds.labels, cr.labels);
                }
            });
        for (auto& t : pool) t.join();
        if (write_artifacts) {
            std::filesystem::create_directories(cfg.output_dir);
            save_state(cfg.output_dir, state);
            res.trace.save_csv(cfg.output_dir / "trace.csv");
            save_matrix(cfg.output_dir / "affinity.csv", aff.a);
        }
    } else {
        for (int r = 0; r < cfg.runs; ++r) {
            SolverConfig rc = sc;
            rc.seed = cfg.base_seed + static_cast<std::uint64_t>(r);
            auto [state, trace] = fit(ds, rc);
            const auto cr = spectral_cluster(affinity_from_z(state.z), c,
                                             cfg.base_seed + static_cast<std::uint64_t>(r));
            runs[static_cast<std::size_t>(r)] = RunMetrics::compute(*ds.labels, cr.labels);
            if (r == 0) res.trace = std::move(trace);
        }
    }

    res.report = aggregate(runs);
    if (write_artifacts) {
        std::filesystem::create_directories(cfg.output_dir);
        detail::write_metrics_csv(cfg.output_dir / "metrics.csv", res.report, cfg.base_seed);
        std::ofstream table(cfg.output_dir / "metrics.txt");
        table << detail::format_table(res.report);
    }
    return res;
}

struct SweepPoint {
    double lambda, beta, gamma;
    bool ok = false;
    RunMetrics mean, stddev;
    std::string error;
};

/// One eval per (lambda, beta, gamma) grid point; failures are recorded and
/// the sweep continues.
inline std::vector<SweepPoint> run_sweep(const ExperimentConfig& base,
                                         const std::vector<double>& lambdas,
                                         const std::vector<double>& betas,
                                         const std::vector<double>& gammas) {
    if (lambdas.empty() || betas.empty() || gammas.empty())
        throw SolverError("sweep grid must be non-empty");
    std::vector<SweepPoint> points;
    for (double l : lambdas)
        for (double b : betas)
            for (double g : gammas) {
                SweepPoint pt{l, b, g};
                ExperimentConfig cfg = base;
                cfg.solver.lambda = l;
                cfg.solver.beta = b;
                cfg.solver.gamma = g;
                try {
                    const EvalResult res = run_eval(cfg, /*write_artifacts=*/false);
                    pt.ok = true;
                    pt.mean = res.report.mean;
                    pt.stddev = res.report.stddev;
                } catch (const std::exception& e) {
                    pt.error = e.what();
                }
                points.push_back(pt);
            }
    return points;
}

/// Long-format CSV: one row per (grid point, metric).
inline void save_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& pts) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(17);
    out << "lambda,beta,gamma,metric,mean,std\n";
    for (const auto& pt : pts) {
        if (!pt.ok) {
            out << pt.lambda << ',' << pt.beta << ',' << pt.gamma << ",error,nan,nan\n";
            continue;
        }
        const char* names[6] = {"nmi", "acc", "f", "ar", "recall", "precision"};
        const double means[6] = {pt.mean.nmi, pt.mean.acc, pt.mean.f_measure,
                                 pt.mean.ar, pt.mean.recall, pt.mean.precision};
        const double stds[6] = {pt.stddev.nmi, pt.stddev.acc, pt.stddev.f_measure,
                                pt.stddev.ar, pt.stddev.recall, pt.stddev.precision};
        for (int i = 0; i < 6; ++i)
            out << pt.lambda << ',' << pt.beta << ',' << pt.gamma << ',' << names[i] << ','
                << means[i] << ',' << stds[i] << '\n';
    }
}

}  // namespace mvsc
