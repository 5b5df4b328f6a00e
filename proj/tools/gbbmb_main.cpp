#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbbmb/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitInstability = 2;
constexpr int kExitInconclusive = 3;

gbbmb::ExperimentConfig load_config(const std::string& path,
                                    const std::vector<std::string>& overrides,
                                    const std::string& out_dir, long stride,
                                    bool fields) {
    gbbmb::ExperimentConfig cfg = gbbmb::parse_config_file(path);
    for (const std::string& o : overrides) gbbmb::apply_override(cfg, o);
    if (!out_dir.empty()) cfg.output.out_dir = out_dir;
    if (stride > 0) cfg.output.stride = static_cast<std::size_t>(stride);
    if (fields) cfg.output.fields = true;
    cfg.network(); // validate eagerly so config errors surface before running
    return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gBBMB solver on star networks: mass-conserving junction "
                 "coupling, solitary-wave scattering experiments, and a "
                 "fixed-point verification oracle"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    long stride = 0;
    bool fields = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")
            ->required();
        cmd->add_option("--set", overrides,
                        "override a config value, e.g. --set edge2.mu=1.5");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--stride", stride, "snapshot stride in steps");
        cmd->add_flag("--fields", fields, "also write space-time field snapshots");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
    add_common(run_cmd);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run the experiment once per parameter value");
    add_common(sweep_cmd);
    std::string sweep_param;
    std::string sweep_values;
    sweep_cmd->add_option("--param", sweep_param, "parameter path, e.g. edge2.mu")
        ->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
        ->required();

    CLI::App* verify_cmd = app.add_subcommand(
        "verify", "cross-check the scheme against the fixed-point oracle");
    add_common(verify_cmd);
    double t_final = 0.25;
    double y_step = 0.05;
    double t_step = 0.0125;
    double y_max = 0.0; // 0 = default 10 max(mu) + data support
    verify_cmd->add_option("--t-final", t_final, "comparison time");
    verify_cmd->add_option("--y-step", y_step, "oracle spatial quadrature step");
    verify_cmd->add_option("--t-step", t_step, "oracle temporal quadrature step");
    verify_cmd->add_option("--y-max", y_max, "oracle spatial truncation");

    CLI11_PARSE(app, argc, argv);

    try {
        gbbmb::ExperimentConfig cfg =
            load_config(config_path, overrides, out_dir, stride, fields);

        if (run_cmd->parsed()) {
            gbbmb::RunResult res = gbbmb::run_experiment(cfg);
            gbbmb::write_run_artifacts(res, cfg, cfg.output.out_dir);
            std::cout << "status: "
                      << (res.status == gbbmb::RunStatus::Completed ? "completed"
                                                                    : "unstable")
                      << "\nmax delta-mass: "
                      << res.delta_mass.max_delta_mass_percent << " % at t = "
                      << res.delta_mass.time_of_max << '\n';
            if (res.reflection)
                std::cout << "reflection: "
                          << (res.reflection->reflected ? "yes" : "no")
                          << " (min excursion "
                          << res.reflection->min_excursion << ")\n";
            std::cout << "artifacts in " << cfg.output.out_dir << '\n';
            return res.status == gbbmb::RunStatus::Completed ? kExitOk
                                                             : kExitInstability;
        }

        if (sweep_cmd->parsed()) {
            const std::vector<double> values = parse_values(sweep_values);
            const std::vector<gbbmb::SweepEntry> entries =
                gbbmb::run_sweep(cfg, sweep_param, values, cfg.output.out_dir);
            gbbmb::write_sweep_csv(entries, sweep_param,
                                   cfg.output.out_dir + "/sweep.csv");
            bool any_unstable = false;
            for (const gbbmb::SweepEntry& e : entries) {
                std::cout << sweep_param << " = " << e.value << ": ";
                if (!e.ok) {
                    std::cout << "error (" << e.error << ")\n";
                    any_unstable = true;
                    continue;
                }
                std::cout << "max dM " << e.max_delta_mass_percent
                          << " %, reflected " << (e.reflected ? "yes" : "no")
                          << '\n';
                any_unstable |= e.status != gbbmb::RunStatus::Completed;
            }
            std::cout << "aggregate in " << cfg.output.out_dir << "/sweep.csv\n";
            return any_unstable ? kExitInstability : kExitOk;
        }

        // verify
        double mu_max = 0.0;
        for (const gbbmb::EdgeSpec& e : cfg.edges)
            mu_max = std::max(mu_max, e.mu);
        gbbmb::QuadratureGrid q{y_max > 0.0 ? y_max : 10.0 * mu_max, y_step,
                                t_step};
        gbbmb::VerifyReport rep = gbbmb::run_verify(cfg, q, t_final);
        gbbmb::write_verify_report(rep, cfg.output.out_dir);
        std::cout << "picard iterations: " << rep.picard_iterations << '\n';
        if (!rep.conclusive) {
            std::cout << "verification inconclusive: fixed-point iteration did "
                         "not converge (last residual "
                      << (rep.residual_history.empty()
                              ? 0.0
                              : rep.residual_history.back())
                      << ")\n";
            return kExitInconclusive;
        }
        std::cout << "sup-norm difference at t = " << t_final << ": "
                  << rep.sup_norm_diff << "\njunction value: fd " << rep.h_fd
                  << ", oracle " << rep.h_picard << '\n';
        return kExitOk;
    } catch (const gbbmb::InstabilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInstability;
    } catch (const gbbmb::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInstability;
    }
}
