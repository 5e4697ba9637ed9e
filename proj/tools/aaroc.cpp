// Command-line front end: fom / offline / online / bench subcommands.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "aaroc/harness.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

aaroc::Parameter scalar_param(double mu) {
    aaroc::Parameter p(1);
    p[0] = mu;
    return p;
}

int cmd_fom(const std::string& config_path, double mu, const std::string& out) {
    const auto config = aaroc::load_config(config_path);
    auto problem = aaroc::make_problem(config);
    const aaroc::SnapshotMatrix traj = problem->solve_trajectory(scalar_param(mu));
    aaroc::save_snapshot(out, traj);
    std::cout << "fom: " << traj.rows() << " dofs x " << traj.cols() << " states -> " << out
              << "\n";
    return 0;
}

int cmd_offline(const std::string& config_path, const std::string& out, bool verbose) {
    const auto config = aaroc::load_config(config_path);
    config.greedy.validate();
    const auto training = aaroc::generate_parameter_set(
        config.training.lo, config.training.hi, config.training.count, config.training.spacing);
    auto problem = aaroc::make_problem(config);
    aaroc::IterationObserver observer;
    if (verbose)
        observer = [](const aaroc::ReducedModel&, const aaroc::IterationRecord& rec) {
            std::cerr << "n=" << rec.n << " n_tpar=" << rec.n_tpar << " mu=" << rec.mu[0]
                      << " delta=" << rec.delta << " rho=" << rec.rho << "\n";
        };
    const auto artifact =
        aaroc::run_offline(problem, config.greedy, training, config.mode, observer);
    const std::string config_str = aaroc::canonical_config_string(config);
    aaroc::atomic_write(out, [&](std::ostream& os) {
        aaroc::write_artifact(os, artifact, config_str);
    });
    aaroc::atomic_write(out + ".history.csv", [&](std::ostream& os) {
        aaroc::write_history_csv(os, artifact.history, aaroc::sha256_hex(config_str));
    });
    std::cout << "offline: basis size " << artifact.model.dim() << ", " << artifact.n_tpar
              << " segment(s), " << artifact.n_adap_total << " enrichment point(s) -> " << out
              << "\n";
    return 0;
}

int cmd_online(const std::string& artifact_path, double mu, const std::string& out) {
    const auto result = aaroc::online_eval(artifact_path, scalar_param(mu));
    aaroc::save_snapshot(out, result.trajectory);
    aaroc::atomic_write(out + ".eps.csv", [&](std::ostream& os) {
        os << "t_index,eps_rr\n";
        for (size_t i = 0; i < result.solution.eps_rr.size(); ++i)
            os << i << ',' << aaroc::fmt_double(result.solution.eps_rr[i]) << '\n';
    });
    std::cout << "online: " << result.trajectory.rows() << " dofs x " << result.trajectory.cols()
              << " states -> " << out << "\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir) {
    const auto config = aaroc::load_config(config_path);
    const auto result = aaroc::run_experiment(config, out_dir);
    std::cout << "bench: basis size " << result.artifact.model.dim() << ", E("
              << result.checkpoints.back() << ") = "
              << aaroc::fmt_double(result.errors.back()) << " -> " << out_dir << "/report.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive reduced-over-collocation for parametric time-dependent PDEs"};
    app.require_subcommand(1);

    std::string config_path, artifact_path, out_path, out_dir;
    double mu = 0.0;
    bool verbose = false;

    auto* fom = app.add_subcommand("fom", "solve the full-order model for one parameter");
    fom->add_option("--config", config_path, "experiment config JSON")->required();
    fom->add_option("--mu", mu, "parameter value")->required();
    fom->add_option("--out", out_path, "output snapshot file")->required();

    auto* offline = app.add_subcommand("offline", "train a reduced model");
    offline->add_option("--config", config_path, "experiment config JSON")->required();
    offline->add_option("--out", out_path, "output artifact file")->required();
    offline->add_flag("--verbose", verbose, "log greedy iterations to stderr");

    auto* online = app.add_subcommand("online", "evaluate a trained reduced model");
    online->add_option("--artifact", artifact_path, "offline artifact file")->required();
    online->add_option("--mu", mu, "parameter value")->required();
    online->add_option("--out", out_path, "output snapshot file")->required();

    auto* bench = app.add_subcommand("bench", "full offline + online benchmark");
    bench->add_option("--config", config_path, "experiment config JSON")->required();
    bench->add_option("--out-dir", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (fom->parsed()) return cmd_fom(config_path, mu, out_path);
        if (offline->parsed()) return cmd_offline(config_path, out_path, verbose);
        if (online->parsed()) return cmd_online(artifact_path, mu, out_path);
        return cmd_bench(config_path, out_dir);
    } catch (const aaroc::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const aaroc::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
