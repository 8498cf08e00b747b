// Command-line driver: runs simulations and the scripted stability
// experiments from a config file and writes CSV/JSON outputs.
//
// Exit codes: 0 pass, 1 assertion failure, 2 configuration error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "epflow/config.hpp"
#include "epflow/energy.hpp"
#include "epflow/experiments.hpp"
#include "epflow/io.hpp"
#include "epflow/relative.hpp"
#include "epflow/sampling.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct CliOptions {
    std::string config_path;
    std::string config2_path;
    std::string out_dir;
    bool has_seed = false;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Returns the parsed config or prints every validation error and exits.
epflow::RunConfig load_config(const CliOptions& options, const std::string& path,
                              const std::string& subcommand, std::string* echo) {
    const std::string text = read_file(path);
    if (echo) *echo = text;
    epflow::ParseResult result = epflow::parse_config_with_env(text);
    if (!result.ok()) {
        std::cerr << "config error(s) in " << path << ":\n";
        for (const auto& error : result.errors) std::cerr << "  " << error << "\n";
        std::exit(kExitConfig);
    }
    epflow::RunConfig config = *result.config;
    if (!config.experiment.name.empty() && config.experiment.name != subcommand) {
        std::cerr << "config error: experiment.name = '" << config.experiment.name
                  << "' does not match subcommand '" << subcommand << "'\n";
        std::exit(kExitConfig);
    }
    if (!options.out_dir.empty()) config.out_dir = options.out_dir;
    if (options.has_seed) config.seed = options.seed;
    if (options.threads > 0) config.threads = options.threads;
    return config;
}

double tolerance_or(const epflow::RunConfig& config, const std::string& key, double fallback) {
    const auto it = config.tolerances.find(key);
    return it == config.tolerances.end() ? fallback : it->second;
}

void write_outputs(const epflow::RunConfig& config, const epflow::ExperimentReport& report,
                   const std::string& echo, bool with_relative, const std::string& csv_name) {
    namespace fs = std::filesystem;
    const fs::path dir(config.out_dir);
    if (!report.series.empty())
        epflow::write_file_atomic((dir / csv_name).string(),
                                  epflow::series_csv(report.series, with_relative));
    epflow::write_file_atomic((dir / "summary.json").string(),
                              epflow::summary_json(report, echo));
}

int run_simulate(const CliOptions& options) {
    std::string echo;
    const epflow::RunConfig config = load_config(options, options.config_path, "simulate", &echo);
    const epflow::ReferenceMeasure ref = epflow::make_reference(config.discretization);
    config.model.validate(ref);
    const epflow::LagrangianState initial = epflow::make_initial_state(config, ref);
    const epflow::Trajectory traj = epflow::run(initial, ref, config.model, config.integrator);

    epflow::ExperimentReport report;
    report.name = "simulate";
    report.pass = true;
    report.series = epflow::trajectory_series(traj, ref, config.model);
    report.metrics = {
        {"H_initial", traj.snapshots.front().energy.total},
        {"H_final", traj.snapshots.back().energy.total},
        {"merge_events", static_cast<double>(traj.merges.size())},
        {"n_clusters_final", static_cast<double>(traj.snapshots.back().n_clusters)},
    };
    write_outputs(config, report, echo, false, "trajectory.csv");
    return kExitPass;
}

int run_compare(const CliOptions& options) {
    std::string echo, echo2;
    const epflow::RunConfig config = load_config(options, options.config_path, "compare", &echo);
    epflow::RunConfig config2 = config;
    if (!options.config2_path.empty()) {
        CliOptions second = options;
        second.config_path = options.config2_path;
        config2 = load_config(second, options.config2_path, "compare", &echo2);
    }
    if (config.discretization.n != config2.discretization.n ||
        config.model.formulation != config2.model.formulation) {
        std::cerr << "config error: compare requires matching discretization and formulation\n";
        return kExitConfig;
    }

    const epflow::ReferenceMeasure ref = epflow::make_reference(config.discretization);
    config.model.validate(ref);
    const epflow::LagrangianState weak0 = epflow::make_initial_state(config, ref);
    const epflow::LagrangianState strong0 = epflow::make_initial_state(config2, ref);
    const epflow::Trajectory weak = epflow::run(weak0, ref, config.model, config.integrator);
    const epflow::Trajectory strong = epflow::run(strong0, ref, config2.model, config2.integrator);

    epflow::MonitorSeries monitor;
    try {
        std::optional<double> tol;
        if (config.tolerances.count("residual")) tol = config.tolerances.at("residual");
        monitor = epflow::relative_hamiltonian_monitor(weak, strong, ref, config.model, tol);
    } catch (const std::invalid_argument& error) {
        std::cerr << "config error: " << error.what() << "\n";
        return kExitConfig;
    }

    epflow::ExperimentReport report;
    report.name = "compare";
    report.pass = monitor.inequality_ok;
    report.series = epflow::comparison_series(weak, strong, ref, config.model, monitor);
    report.metrics = {
        {"Hrel_initial", monitor.points.front().report.total_rel},
        {"Hrel_final", monitor.points.back().report.total_rel},
        {"max_residual", monitor.max_residual},
        {"residual_tolerance", monitor.tolerance},
        {"gronwall_C0", monitor.gronwall_c0},
        {"gronwall_ok", monitor.gronwall_ok ? 1.0 : 0.0},
    };
    write_outputs(config, report, echo, true, "comparison.csv");
    return report.pass ? kExitPass : kExitFail;
}

int run_sweep_friction(const CliOptions& options) {
    std::string echo;
    const epflow::RunConfig config =
        load_config(options, options.config_path, "sweep-friction", &echo);
    if (config.model.formulation != epflow::Formulation::Pressureless) {
        std::cerr << "config error: sweep-friction requires the pressureless model\n";
        return kExitConfig;
    }
    epflow::ExperimentReport report =
        epflow::exp_friction_limit(config.experiment.epsilon_list, config.discretization.n,
                                   config.experiment.s_end, config.seed, config.threads);
    write_outputs(config, report, echo, false, "sweep.csv");
    std::cout << (report.pass ? "PASS" : "FAIL") << " friction-limit sweep: slope="
              << report.metrics[0].second << "\n";
    return report.pass ? kExitPass : kExitFail;
}

int run_rarefaction(const CliOptions& options) {
    std::string echo;
    const epflow::RunConfig config =
        load_config(options, options.config_path, "rarefaction", &echo);
    if (config.model.formulation != epflow::Formulation::WithPressure) {
        std::cerr << "config error: rarefaction requires the with-pressure model\n";
        return kExitConfig;
    }
    epflow::ExperimentReport report = epflow::exp_rarefaction(
        config.model, config.discretization.n, config.experiment.horizon, config.integrator.dt,
        tolerance_or(config, "relative_increase", 1e-6), config.seed);
    write_outputs(config, report, echo, false, "rarefaction.csv");
    return report.pass ? kExitPass : kExitFail;
}

int run_check_bounds(const CliOptions& options) {
    std::string echo;
    const epflow::RunConfig config =
        load_config(options, options.config_path, "check-bounds", &echo);
    const epflow::ReferenceMeasure ref = epflow::make_reference(config.discretization);
    config.model.validate(ref);

    epflow::Rng rng(config.seed);
    const std::size_t trials = 1000;
    std::size_t violations = 0;
    double worst_margin = HUGE_VAL;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const epflow::LagrangianState a = epflow::random_monotone_state(rng, ref);
        const epflow::LagrangianState b = epflow::random_monotone_state(rng, ref);
        const auto certs = epflow::lower_bound_certificates(a, b, ref, config.model);
        for (const auto& cert : certs) {
            if (!cert.satisfied) ++violations;
            worst_margin = std::min(worst_margin, cert.lhs - cert.rhs);
        }
    }

    epflow::ExperimentReport report;
    report.name = "check-bounds";
    report.pass = violations == 0;
    report.metrics = {
        {"trials", static_cast<double>(trials)},
        {"violations", static_cast<double>(violations)},
        {"worst_margin", worst_margin},
    };
    write_outputs(config, report, echo, false, "bounds.csv");
    std::cout << (report.pass ? "PASS" : "FAIL") << " lower-bound certificates: " << violations
              << " violations in " << trials << " random pairs\n";
    return report.pass ? kExitPass : kExitFail;
}

int run_oracle_check(const CliOptions& options) {
    std::string echo;
    const epflow::RunConfig config =
        load_config(options, options.config_path, "oracle-check", &echo);
    const epflow::ReferenceMeasure ref = epflow::make_reference(config.discretization);
    config.model.validate(ref);

    epflow::Rng rng(config.seed);
    const std::size_t trials = 100;
    const double h = 1e-5;
    double max_error = 0.0, max_error_half = 0.0, max_force = 0.0;
    std::string table = "state,max_abs_error,max_abs_error_half_h\n";
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const epflow::LagrangianState state = epflow::random_monotone_state(rng, ref);
        const auto f = epflow::force(state, ref, config.model);
        const auto fd = epflow::fd_oracle_force(state, ref, config.model, h);
        const auto fd_half = epflow::fd_oracle_force(state, ref, config.model, h / 2.0);
        double err = 0.0, err_half = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            err = std::max(err, std::abs(f[i] - fd[i]));
            err_half = std::max(err_half, std::abs(f[i] - fd_half[i]));
            max_force = std::max(max_force, std::abs(f[i]));
        }
        max_error = std::max(max_error, err);
        max_error_half = std::max(max_error_half, err_half);
        table += std::to_string(trial) + "," + epflow::format_double(err) + "," +
                 epflow::format_double(err_half) + "\n";
    }
    const double bound = tolerance_or(config, "force_error", 1e-6) * (1.0 + max_force);

    epflow::ExperimentReport report;
    report.name = "oracle-check";
    report.pass = max_error <= bound;
    report.metrics = {
        {"max_error", max_error},
        {"max_error_half_h", max_error_half},
        {"bound", bound},
        {"max_force", max_force},
    };
    namespace fs = std::filesystem;
    epflow::write_file_atomic((fs::path(config.out_dir) / "oracle.csv").string(), table);
    write_outputs(config, report, echo, false, "oracle_series.csv");
    std::cout << (report.pass ? "PASS" : "FAIL") << " force oracle: max error "
              << epflow::format_double(max_error) << " (bound " << epflow::format_double(bound)
              << ")\n";
    return report.pass ? kExitPass : kExitFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lagrangian particle flows for 1-D interacting gas models, with relative "
                 "Hamiltonian stability diagnostics"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CliOptions options;
    const auto add_common = [&](CLI::App* cmd, bool with_config2 = false) {
        cmd->add_option("--config", options.config_path, "config file path")->required();
        if (with_config2)
            cmd->add_option("--config2", options.config2_path,
                            "second config (defaults to --config)");
        cmd->add_option("--out", options.out_dir, "output directory override");
        cmd->add_option("--seed", options.seed, "seed override")
            ->each([&](const std::string&) { options.has_seed = true; });
        cmd->add_option("--threads", options.threads, "worker cap for sweeps");
    };

    add_common(app.add_subcommand("simulate", "run one trajectory, write the time series"));
    add_common(app.add_subcommand("compare", "run a weak/strong pair, monitor the relative "
                                             "Hamiltonian"),
               true);
    add_common(app.add_subcommand("sweep-friction", "large-friction convergence sweep"));
    add_common(app.add_subcommand("rarefaction", "rarefaction decay check"));
    add_common(app.add_subcommand("check-bounds", "random lower-bound certificates"));
    add_common(app.add_subcommand("oracle-check", "force vs finite-difference oracle"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        app.exit(error); // prints usage or error text
        return kExitConfig;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "simulate") return run_simulate(options);
        if (name == "compare") return run_compare(options);
        if (name == "sweep-friction") return run_sweep_friction(options);
        if (name == "rarefaction") return run_rarefaction(options);
        if (name == "check-bounds") return run_check_bounds(options);
        if (name == "oracle-check") return run_oracle_check(options);
    } catch (const std::invalid_argument& error) {
        std::cerr << "config error: " << error.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return kExitFail;
    }
    return kExitConfig;
}
