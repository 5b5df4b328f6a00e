#ifndef GBBMB_EXPERIMENT_HPP
#define GBBMB_EXPERIMENT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbbmb/config.hpp"
#include "gbbmb/diagnostics.hpp"
#include "gbbmb/fd.hpp"
#include "gbbmb/network.hpp"
#include "gbbmb/picard.hpp"
#include "gbbmb/waves.hpp"

namespace gbbmb {

/// Analytic traveling-wave value at (edge i, local x, time t) for
/// solitary-wave initial data launched on the incoming edge. The global
/// coordinate runs along the incoming edge (junction at x = L1) and
/// continues into every outgoing edge, so on identical edges this is the
/// exact solution.
class SolitaryWaveSampler {
public:
    SolitaryWaveSampler(const StarNetwork& net, const InitialCondition& ic)
        : junction_offset_(0.0) {
        const std::size_t host = ic.host_edge - 1;
        if (host >= net.num_edges())
            throw ConfigError("host_edge addresses a nonexistent edge");
        const EdgeSpec& e = net.edge(host);
        params_ = SolitaryWaveParams::from_speed(ic.c, ic.x0, e, net.p());
        p_ = net.p();
        host_ = host;
        junction_offset_ = e.truncation_length;
    }

    const SolitaryWaveParams& params() const { return params_; }

    double operator()(std::size_t edge, double x_local, double t) const {
        // physical coordinate: host edge runs 0..L with the junction at L;
        // other edges continue past the junction.
        const double x_phys = edge == host_ ? junction_offset_ - x_local
                                            : junction_offset_ + x_local;
        return solitary_profile(params_, p_, x_phys, t);
    }

private:
    SolitaryWaveParams params_{};
    int p_ = 1;
    std::size_t host_ = 0;
    double junction_offset_;
};

inline NetworkState load_state_csv(const std::string& path,
                                   const StarNetwork& net, const GridSpec& g);

/// Builds u(., 0) from the config's initial-condition block.
inline NetworkState make_initial_state(const ExperimentConfig& cfg,
                                       const StarNetwork& net) {
    switch (cfg.initial.kind) {
    case InitialKind::Zero:
        return NetworkState(net, cfg.grid);
    case InitialKind::SolitaryWave: {
        SolitaryWaveSampler wave(net, cfg.initial);
        return sample_state(net, cfg.grid,
                            [&](std::size_t i, double x) { return wave(i, x, 0.0); });
    }
    case InitialKind::SampledFromFile:
        return load_state_csv(cfg.initial.path, net, cfg.grid);
    }
    throw std::logic_error("unreachable");
}

/// Reads "edge,x,u" CSV rows (1-based edge, local coordinate on the dx
/// grid). Unlisted nodes stay 0; outer boundaries are pinned to 0.
inline NetworkState load_state_csv(const std::string& path,
                                   const StarNetwork& net, const GridSpec& g) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open initial-state file '" + path + "'");
    NetworkState s(net, g);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t == "edge,x,u" || t[0] == '#') continue;
        std::istringstream row(t);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
            !std::getline(row, c))
            throw ConfigError(line_no, "expected edge,x,u in '" + path + "'");
        const long edge = detail::parse_int(detail::trim(a), line_no);
        const double x = detail::parse_real(detail::trim(b), line_no);
        const double u = detail::parse_real(detail::trim(c), line_no);
        if (edge < 1 || static_cast<std::size_t>(edge) > net.num_edges())
            throw ConfigError(line_no, "edge index out of range");
        const std::size_t i = static_cast<std::size_t>(edge - 1);
        const double kf = x / g.dx;
        const auto k = static_cast<std::size_t>(std::llround(kf));
        if (std::abs(kf - static_cast<double>(k)) > 1e-6)
            throw ConfigError(line_no, "x is not on the dx grid");
        if (k >= s.num_nodes(i) - 1) continue; // outer boundary stays 0
        s.set_value(i, k, u);
    }
    return s;
}

enum class RunStatus { Completed, Unstable };

struct RunResult {
    RunStatus status = RunStatus::Completed;
    std::vector<DiagnosticsRecord> records;
    std::vector<NetworkState> snapshots;
    NetworkState final_state;
    DeltaMassSeries delta_mass;
    std::optional<ReflectionVerdict> reflection;
    double mass0 = 0.0;
    double last_stable_time = 0.0;
    std::size_t failed_step = 0;
};

/// Runs one configured experiment in memory: integrates, records
/// diagnostics at the snapshot stride, and evaluates the reflection
/// detector when the run started from a solitary wave.
inline RunResult run_experiment(const ExperimentConfig& cfg,
                                bool keep_snapshots = true) {
    const StarNetwork net = cfg.network();
    RunResult res;

    RunOptions opts;
    opts.bootstrap = cfg.bootstrap;
    opts.observer_stride = cfg.output.stride;
    std::optional<SolitaryWaveSampler> wave;
    if (cfg.initial.kind == InitialKind::SolitaryWave) {
        wave.emplace(net, cfg.initial);
        opts.exact_solution = [&w = *wave](std::size_t i, double x, double t) {
            return w(i, x, t);
        };
    } else if (cfg.bootstrap == BootstrapMode::ExactTranslate) {
        throw ConfigError("exact_translate bootstrap needs solitary-wave data");
    }

    const NetworkState initial = make_initial_state(cfg, net);
    res.mass0 = mass(initial, cfg.grid);

    StateObserver record_obs = [&](double t, const NetworkState& s) {
        res.records.push_back(make_record(t, s, net, cfg.grid, res.mass0));
        if (keep_snapshots) res.snapshots.push_back(s);
        res.last_stable_time = t;
    };

    try {
        res.final_state = run(net, cfg.grid, initial, {record_obs}, opts);
    } catch (const InstabilityError& err) {
        res.status = RunStatus::Unstable;
        res.failed_step = err.step_index;
    }

    res.delta_mass = delta_mass_series(res.records);
    if (cfg.initial.kind == InitialKind::SolitaryWave && keep_snapshots &&
        !res.snapshots.empty())
        res.reflection = detect_reflection(res.snapshots, 0);
    return res;
}

// ---------------------------------------------------------------------------
// artifact emission

inline void write_diagnostics_csv(const RunResult& res, const std::string& path) {
    std::ofstream out(path);
    out.precision(15);
    out << "time,mass,delta_mass_percent,energy,energy_rate_formula,junction_value\n";
    for (const DiagnosticsRecord& r : res.records)
        out << r.time << ',' << r.mass << ',' << r.delta_mass_percent << ','
            << r.energy << ',' << r.energy_rate_formula << ','
            << r.junction_value << '\n';
}

/// Space-time field table: one row per snapshot over the global grid. Edge 1
/// is written outer-end first so the junction sits between the edge blocks;
/// remaining edges follow with cumulative offsets.
inline void write_fields_csv(const RunResult& res, const ExperimentConfig& cfg,
                             const std::string& path) {
    std::ofstream out(path);
    out.precision(10);
    if (res.snapshots.empty()) return;
    const NetworkState& first = res.snapshots.front();
    out << "time";
    double offset = 0.0;
    {
        const std::size_t m = first.num_nodes(0) - 1;
        for (std::size_t k = 0; k <= m; ++k)
            out << ",x=" << static_cast<double>(k) * cfg.grid.dx;
        offset = static_cast<double>(m) * cfg.grid.dx;
    }
    for (std::size_t i = 1; i < first.num_edges(); ++i) {
        const std::size_t m = first.num_nodes(i) - 1;
        for (std::size_t k = 1; k <= m; ++k)
            out << ",x=" << offset + static_cast<double>(k) * cfg.grid.dx;
        offset += static_cast<double>(m) * cfg.grid.dx;
    }
    out << '\n';
    for (std::size_t s = 0; s < res.snapshots.size(); ++s) {
        const NetworkState& st = res.snapshots[s];
        out << res.records[s].time;
        const std::size_t m0 = st.num_nodes(0) - 1;
        for (std::size_t k = 0; k <= m0; ++k)
            out << ',' << st.value(0, m0 - k); // outer end -> junction
        for (std::size_t i = 1; i < st.num_edges(); ++i)
            for (std::size_t k = 1; k < st.num_nodes(i); ++k)
                out << ',' << st.value(i, k);
        out << '\n';
    }
}

inline void write_summary(const RunResult& res, const std::string& path) {
    std::ofstream out(path);
    out.precision(15);
    out << "key,value\n";
    out << "status," << (res.status == RunStatus::Completed ? "completed" : "unstable")
        << '\n';
    out << "max_delta_mass_percent," << res.delta_mass.max_delta_mass_percent << '\n';
    out << "time_of_max_delta_mass," << res.delta_mass.time_of_max << '\n';
    out << "mass_initial," << res.mass0 << '\n';
    if (!res.records.empty()) {
        out << "mass_final," << res.records.back().mass << '\n';
        out << "final_energy," << res.records.back().energy << '\n';
    }
    out << "delta_mass_flagged_absolute,"
        << (res.delta_mass.absolute_drift ? "true" : "false") << '\n';
    if (res.reflection) {
        out << "reflected," << (res.reflection->reflected ? "true" : "false") << '\n';
        out << "min_excursion," << res.reflection->min_excursion << '\n';
    }
    out << "last_stable_time," << res.last_stable_time << '\n';
    if (res.status == RunStatus::Unstable)
        out << "failed_step," << res.failed_step << '\n';
}

inline void write_schema(const std::string& path) {
    std::ofstream out(path);
    out << "diagnostics.csv: time, mass, delta_mass_percent, energy, "
           "energy_rate_formula, junction_value\n"
        << "  time                series time in model units\n"
        << "  mass                M(t), trapezoid of u over all edges\n"
        << "  delta_mass_percent  100 |M(t) - M(0)| / M(0)\n"
        << "  energy              E(t) = 1/2 sum_i int (u^2 + mu_i^2 u_x^2)\n"
        << "  energy_rate_formula analytic dE/dt from the junction identity\n"
        << "  junction_value      shared value h(t) at the junction\n"
        << "fields.csv: time, then u at each global grid column; edge 1 is\n"
        << "  written outer-end first so the junction lies between the edge\n"
        << "  blocks, remaining edges follow with cumulative x offsets.\n"
        << "summary.csv: key,value rows (status, max_delta_mass_percent,\n"
        << "  time_of_max_delta_mass, mass_initial, mass_final, final_energy,\n"
        << "  reflected, min_excursion, last_stable_time, failed_step).\n";
}

inline void write_run_artifacts(const RunResult& res, const ExperimentConfig& cfg,
                                const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_diagnostics_csv(res, dir + "/diagnostics.csv");
    if (cfg.output.fields) write_fields_csv(res, cfg, dir + "/fields.csv");
    write_summary(res, dir + "/summary.csv");
    write_schema(dir + "/columns.schema.txt");
    std::ofstream cfg_out(dir + "/config.resolved.ini");
    cfg_out << serialize_config(cfg);
}

// ---------------------------------------------------------------------------
// sweep

struct SweepEntry {
    double value = 0.0;
    bool ok = false;
    std::string error;
    RunStatus status = RunStatus::Completed;
    double max_delta_mass_percent = 0.0;
    bool reflected = false;
    double min_excursion = 0.0;
};

/// Runs the base config once per parameter value, fanning the jobs out over
/// the hardware threads. One failing job does not abort its siblings.
inline std::vector<SweepEntry> run_sweep(const ExperimentConfig& base,
                                         const std::string& parameter,
                                         const std::vector<double>& values,
                                         const std::string& out_dir = {}) {
    std::vector<std::future<SweepEntry>> jobs;
    jobs.reserve(values.size());
    for (double v : values) {
        jobs.push_back(std::async(std::launch::async, [&, v]() {
            SweepEntry entry;
            entry.value = v;
            try {
                ExperimentConfig cfg = base;
                std::ostringstream spec;
                spec.precision(17);
                spec << parameter << '=' << v;
                apply_override(cfg, spec.str());
                RunResult res = run_experiment(cfg);
                entry.ok = true;
                entry.status = res.status;
                entry.max_delta_mass_percent = res.delta_mass.max_delta_mass_percent;
                if (res.reflection) {
                    entry.reflected = res.reflection->reflected;
                    entry.min_excursion = res.reflection->min_excursion;
                }
                if (!out_dir.empty()) {
                    std::ostringstream sub;
                    sub << out_dir << '/' << parameter << '_' << v;
                    write_run_artifacts(res, cfg, sub.str());
                }
            } catch (const std::exception& e) {
                entry.error = e.what();
            }
            return entry;
        }));
    }
    std::vector<SweepEntry> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

inline void write_sweep_csv(const std::vector<SweepEntry>& entries,
                            const std::string& parameter, const std::string& path) {
    std::ofstream out(path);
    out.precision(15);
    out << parameter << ",max_delta_mass_percent,reflected,min_excursion,status\n";
    for (const SweepEntry& e : entries) {
        out << e.value << ',';
        if (e.ok)
            out << e.max_delta_mass_percent << ','
                << (e.reflected ? "true" : "false") << ',' << e.min_excursion
                << ','
                << (e.status == RunStatus::Completed ? "completed" : "unstable");
        else
            out << ",,,error: " << e.error;
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// verify: fd vs the fixed-point oracle

struct VerifyReport {
    bool conclusive = false;     // Picard converged
    double sup_norm_diff = 0.0;  // over shared grid points at t_final
    double h_fd = 0.0;
    double h_picard = 0.0;
    std::size_t picard_iterations = 0;
    std::vector<double> residual_history;
    double kernel_tail_bound = 0.0;
};

/// Runs the finite-difference scheme and the fixed-point iteration from the
/// same initial data and compares them at t_final on the oracle's spatial
/// nodes (fd values linearly interpolated).
inline VerifyReport run_verify(const ExperimentConfig& cfg, QuadratureGrid q,
                               double t_final, double tol = 1e-8,
                               std::size_t max_iters = 50) {
    const StarNetwork net = cfg.network();

    // oracle initial data on the y grid, per edge
    std::function<double(std::size_t, double)> phi_fn;
    std::optional<SolitaryWaveSampler> wave;
    NetworkState file_state;
    if (cfg.initial.kind == InitialKind::SolitaryWave) {
        wave.emplace(net, cfg.initial);
        phi_fn = [&](std::size_t i, double x) { return (*wave)(i, x, 0.0); };
        const EdgeSpec& host = net.edge(cfg.initial.host_edge - 1);
        // distance at which the sech^{2/p} tail falls below 1e-9 absolute
        const double amp = wave->params().amplitude(net.p());
        const double tail = net.p() / (2.0 * wave->params().W) *
                            std::log(std::pow(2.0, 2.0 / net.p()) * amp / 1e-9);
        const double support = host.truncation_length - cfg.initial.x0 + tail;
        double mu_max = 0.0;
        for (const EdgeSpec& e : net.edges()) mu_max = std::max(mu_max, e.mu);
        q.y_max = std::max(q.y_max, 10.0 * mu_max + support);
    } else if (cfg.initial.kind == InitialKind::Zero) {
        phi_fn = [](std::size_t, double) { return 0.0; };
    } else {
        file_state = load_state_csv(cfg.initial.path, net, cfg.grid);
        phi_fn = [&](std::size_t i, double x) {
            const auto k = static_cast<std::size_t>(std::llround(x / cfg.grid.dx));
            return k < file_state.num_nodes(i) ? file_state.value(i, k) : 0.0;
        };
    }
    // snap y_max to the quadrature grid
    q.y_max = std::ceil(q.y_max / q.y_step) * q.y_step;

    const std::size_t ny = q.num_y();
    std::vector<std::vector<double>> phi(net.num_edges(),
                                         std::vector<double>(ny, 0.0));
    for (std::size_t i = 0; i < net.num_edges(); ++i)
        for (std::size_t iy = 0; iy < ny; ++iy)
            phi[i][iy] = phi_fn(i, static_cast<double>(iy) * q.y_step);

    VerifyReport rep;
    const PicardResult oracle = picard_solve(net, phi, t_final, q, tol, max_iters);
    rep.picard_iterations = oracle.iterations;
    rep.residual_history = oracle.residual_history;
    rep.kernel_tail_bound = oracle.kernel_tail_bound;
    rep.h_picard = oracle.h.back();
    if (!oracle.converged) return rep; // verification-inconclusive

    ExperimentConfig fd_cfg = cfg;
    fd_cfg.grid.horizon = t_final;
    fd_cfg.output.stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(t_final / fd_cfg.grid.dt)));
    RunResult fd_run = run_experiment(fd_cfg, /*keep_snapshots=*/true);
    if (fd_run.status != RunStatus::Completed)
        throw InstabilityError(fd_run.failed_step, fd_run.last_stable_time, 0.0);
    const NetworkState& fd_final = fd_run.final_state;
    rep.h_fd = fd_final.junction_value();

    double diff = 0.0;
    for (std::size_t i = 0; i < net.num_edges(); ++i) {
        const double L = net.edge(i).truncation_length;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const double x = static_cast<double>(iy) * q.y_step;
            if (x > L) break;
            // linear interpolation of the fd solution at x
            const double kf = x / cfg.grid.dx;
            const auto k0 = static_cast<std::size_t>(kf);
            const std::size_t k1 = std::min(k0 + 1, fd_final.num_nodes(i) - 1);
            const double frac = kf - static_cast<double>(k0);
            const double fd_val = (1.0 - frac) * fd_final.value(i, k0) +
                                  frac * fd_final.value(i, k1);
            diff = std::max(diff,
                            std::abs(fd_val - oracle.u[i].back()[iy]));
        }
    }
    rep.sup_norm_diff = diff;
    rep.conclusive = true;
    return rep;
}

inline void write_verify_report(const VerifyReport& rep, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/verify.csv");
    out.precision(15);
    out << "key,value\n";
    out << "conclusive," << (rep.conclusive ? "true" : "false") << '\n';
    out << "sup_norm_diff," << rep.sup_norm_diff << '\n';
    out << "h_fd," << rep.h_fd << '\n';
    out << "h_picard," << rep.h_picard << '\n';
    out << "picard_iterations," << rep.picard_iterations << '\n';
    out << "kernel_tail_bound," << rep.kernel_tail_bound << '\n';
    std::ofstream hist(dir + "/verify_residuals.csv");
    hist.precision(15);
    hist << "iteration,residual\n";
    for (std::size_t k = 0; k < rep.residual_history.size(); ++k)
        hist << k + 1 << ',' << rep.residual_history[k] << '\n';
}

} // namespace gbbmb

#endif
