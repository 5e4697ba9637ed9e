#ifndef AAROC_HARNESS_HPP
#define AAROC_HARNESS_HPP

// Experiment driver: parameter sampling, the offline/online benchmark
// loop and its CSV / artifact outputs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "aaroc/config.hpp"
#include "aaroc/io.hpp"
#include "aaroc/parallel.hpp"

namespace aaroc {

inline std::vector<Parameter> generate_parameter_set(double lo, double hi, long count,
                                                     const std::string& spacing) {
    if (count < 1) throw ValidationError("parameter set count >= 1 required");
    if (!(lo <= hi)) throw InvalidDomain("parameter domain needs lo <= hi");
    if (spacing == "log-uniform" && !(lo > 0.0))
        throw InvalidDomain("log-uniform spacing needs a positive domain");
    std::vector<Parameter> out(static_cast<size_t>(count));
    for (long k = 0; k < count; ++k) {
        const double s = count == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(count - 1);
        double v;
        if (spacing == "log-uniform")
            v = std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo)));
        else
            v = lo + s * (hi - lo);
        Parameter p(1);
        p[0] = v;
        out[static_cast<size_t>(k)] = p;
    }
    // pin the endpoints exactly
    if (count >= 2) {
        out.front()[0] = lo;
        out.back()[0] = hi;
    }
    return out;
}

struct ExperimentResult {
    OfflineArtifact artifact;
    std::vector<long> checkpoints;
    std::vector<double> errors;   // E_n per checkpoint
    std::vector<double> deltas;   // final-epoch Delta_n per checkpoint (NaN if absent)
    double offline_seconds = 0.0;
    double online_seconds = 0.0;
};

namespace detail {

inline std::vector<long> default_checkpoints(long n_max) {
    std::set<long> cs;
    for (long n = 5; n < n_max; n += 5) cs.insert(n);
    cs.insert(n_max);
    return {cs.begin(), cs.end()};
}

inline double guarded_relative_error(const std::vector<SnapshotMatrix>& fom,
                                     const std::vector<SnapshotMatrix>& rom) {
    for (const auto& m : rom)
        if (!m.allFinite()) return 1e300;
    return relative_error_En(fom, rom);
}

inline long cumulative_enrich(const GreedyHistory& h, long n) {
    long acc = 0;
    for (const auto& rec : h.records) {
        if (rec.restarts != h.restarts || rec.n > n) continue;
        for (long a : rec.enrich_added) acc += a;
    }
    return acc;
}

inline double delta_at(const GreedyHistory& h, long n) {
    double d = std::numeric_limits<double>::quiet_NaN();
    for (const auto& rec : h.records)
        if (rec.restarts == h.restarts && rec.n == n) d = rec.delta;
    return d;
}

} // namespace detail

inline void write_report_csv(std::ostream& os, const ExperimentResult& r,
                             const std::string& config_hash) {
    os << "# format_version: " << kFormatVersion << "\n";
    os << "# config_sha256: " << config_hash << "\n";
    os << "n,delta,E_n,n_adap_cum,n_tpar\n";
    for (size_t i = 0; i < r.checkpoints.size(); ++i) {
        const long n = r.checkpoints[i];
        os << n << ',';
        if (std::isfinite(r.deltas[i])) os << fmt_double(r.deltas[i]);
        os << ',' << fmt_double(r.errors[i]) << ','
           << detail::cumulative_enrich(r.artifact.history, n) << ',' << r.artifact.n_tpar
           << '\n';
    }
}

// Per-DoF absolute error at one (mu, t), with grid coordinates.
inline void write_probe_csv(std::ostream& os, const ExperimentConfig& config, const Vec& fom,
                            const Vec& rom_state) {
    if (config.problem == "burgers") {
        const double h = 2.0 / static_cast<double>(config.n_cells);
        os << "x,u_fom,u_rom,abs_error\n";
        for (Index i = 0; i < fom.size(); ++i) {
            const double x = -1.0 + h * static_cast<double>(i);
            os << fmt_double(x) << ',' << fmt_double(fom[i]) << ',' << fmt_double(rom_state[i])
               << ',' << fmt_double(std::abs(fom[i] - rom_state[i])) << '\n';
        }
        return;
    }
    CavityProblem geom(config.nx, config.ny, TimeGrid(config.dt, 1), config.lid_velocity);
    os << "field,i,j,x,y,fom,rom,abs_error\n";
    const double hx = 1.0 / static_cast<double>(config.nx);
    const double hy = 1.0 / static_cast<double>(config.ny);
    auto emit = [&](const char* field, long i, long j, double x, double y, Index r) {
        os << field << ',' << i << ',' << j << ',' << fmt_double(x) << ',' << fmt_double(y) << ','
           << fmt_double(fom[r]) << ',' << fmt_double(rom_state[r]) << ','
           << fmt_double(std::abs(fom[r] - rom_state[r])) << '\n';
    };
    for (long j = 0; j < config.ny; ++j)
        for (long i = 0; i <= config.nx; ++i)
            emit("u", i, j, hx * i, hy * (j + 0.5), geom.iu(i, j));
    for (long j = 0; j <= config.ny; ++j)
        for (long i = 0; i < config.nx; ++i)
            emit("v", i, j, hx * (i + 0.5), hy * j, geom.iv(i, j));
    for (long j = 0; j < config.ny; ++j)
        for (long i = 0; i < config.nx; ++i)
            emit("p", i, j, hx * (i + 0.5), hy * (j + 0.5), geom.ip(i, j));
}

inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       const std::filesystem::path& out_dir,
                                       const IterationObserver& observer = {}) {
    namespace fs = std::filesystem;
    using clock = std::chrono::steady_clock;
    config.greedy.validate();

    const auto training =
        generate_parameter_set(config.training.lo, config.training.hi, config.training.count,
                               config.training.spacing);
    const auto testing = generate_parameter_set(config.testing.lo, config.testing.hi,
                                                config.testing.count, config.testing.spacing);
    for (const auto& te : testing)
        for (const auto& tr : training)
            if (te[0] == tr[0])
                throw ValidationError("testing parameter " + fmt_double(te[0]) +
                                      " collides with the training set");

    auto problem = make_problem(config);
    const std::string config_str = canonical_config_string(config);
    const std::string config_hash = sha256_hex(config_str);

    ExperimentResult result;
    const auto t0 = clock::now();
    result.artifact = run_offline(problem, config.greedy, training, config.mode, observer);
    result.offline_seconds = std::chrono::duration<double>(clock::now() - t0).count();

    std::vector<SnapshotMatrix> fom_test(testing.size());
    parallel_for_indexed(testing.size(),
                         [&](size_t i) { fom_test[i] = problem->solve_trajectory(testing[i]); });

    const long n_reached = static_cast<long>(result.artifact.model.dim());
    result.checkpoints = config.checkpoints.empty() ? detail::default_checkpoints(n_reached)
                                                    : config.checkpoints;
    std::erase_if(result.checkpoints, [&](long n) { return n < 1 || n > n_reached; });

    const auto t1 = clock::now();
    std::vector<Mat> final_rom_trajs(testing.size()); // lifted, at the largest checkpoint
    for (long n : result.checkpoints) {
        ReducedModel sub = reconstruct_at(result.artifact, n);
        std::vector<SnapshotMatrix> rom_test(testing.size());
        parallel_for_indexed(testing.size(), [&](size_t i) {
            const auto sol = rom_solve_trajectory(sub, testing[i], /*saturate=*/true);
            rom_test[i] = lift_trajectory(sub.basis, sol.coefficients);
        });
        result.errors.push_back(detail::guarded_relative_error(fom_test, rom_test));
        result.deltas.push_back(detail::delta_at(result.artifact.history, n));
        if (n == result.checkpoints.back()) final_rom_trajs = rom_test;
    }
    result.online_seconds = std::chrono::duration<double>(clock::now() - t1).count();

    fs::create_directories(out_dir);
    atomic_write(out_dir / "report.csv",
                 [&](std::ostream& os) { write_report_csv(os, result, config_hash); });
    atomic_write(out_dir / "history.csv", [&](std::ostream& os) {
        write_history_csv(os, result.artifact.history, config_hash);
    });
    atomic_write(out_dir / "model.arom",
                 [&](std::ostream& os) { write_artifact(os, result.artifact, config_str); });
    // wall-clock data stays out of report.csv so reruns compare byte-for-byte
    atomic_write(out_dir / "timings.csv", [&](std::ostream& os) {
        os << "phase,seconds\noffline," << fmt_double(result.offline_seconds) << "\nonline,"
           << fmt_double(result.online_seconds) << "\n";
    });

    for (size_t pi = 0; pi < config.probes.size(); ++pi) {
        const auto& probe = config.probes[pi];
        const long t_idx = std::lround(probe.t / config.dt);
        if (t_idx < 0 || t_idx > problem->time_grid().n_steps)
            throw ValidationError("probe time outside the simulated interval");
        Parameter mu(1);
        mu[0] = probe.mu;
        const SnapshotMatrix fom = problem->solve_trajectory(mu);
        const auto sol = rom_solve_trajectory(result.artifact.model, mu, /*saturate=*/true);
        const Vec rom_state = result.artifact.model.basis.V * sol.coefficients.col(t_idx);
        atomic_write(out_dir / ("probe_" + std::to_string(pi) + ".csv"), [&](std::ostream& os) {
            write_probe_csv(os, config, fom.col(t_idx), rom_state);
        });
    }
    return result;
}

struct OnlineEvalResult {
    SnapshotMatrix trajectory;
    OnlineSolution solution;
};

inline OnlineEvalResult online_eval(const std::filesystem::path& artifact_path,
                                    const Parameter& mu) {
    LoadedArtifact loaded = load_artifact(artifact_path);
    const ExperimentConfig config = parse_config(loaded.config_json);
    if (mu.size() != 1) throw ValidationError("expected a scalar parameter");
    if (mu[0] < config.mu_lo || mu[0] > config.mu_hi)
        std::cerr << "warning: mu = " << fmt_double(mu[0]) << " lies outside the trained domain ["
                  << fmt_double(config.mu_lo) << ", " << fmt_double(config.mu_hi) << "]\n";
    loaded.artifact.model.problem = make_problem(config);
    OnlineEvalResult out;
    out.solution = rom_solve_trajectory(loaded.artifact.model, mu);
    out.trajectory = lift_trajectory(loaded.artifact.model.basis, out.solution.coefficients);
    return out;
}

} // namespace aaroc

#endif
