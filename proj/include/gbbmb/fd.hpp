#ifndef GBBMB_FD_HPP
#define GBBMB_FD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gbbmb/network.hpp"
#include "gbbmb/tridiag.hpp"

namespace gbbmb {

struct GridSpec {
    double dx;
    double dt;
    double horizon;
};

inline std::size_t edge_node_count(const EdgeSpec& e, const GridSpec& g) {
    const double m = e.truncation_length / g.dx;
    const auto rounded = static_cast<std::size_t>(std::llround(m));
    if (std::abs(m - static_cast<double>(rounded)) > 1e-9 * m || rounded < 2)
        throw std::invalid_argument(
            "edge truncation length must be an integer multiple of dx");
    return rounded; // samples run 0..M with 0 at the junction
}

inline void validate_grid(const StarNetwork& net, const GridSpec& g) {
    if (!(g.dx > 0.0) || !(g.dt > 0.0))
        throw std::invalid_argument("dx and dt must be positive");
    if (g.horizon < 0.0)
        throw std::invalid_argument("horizon must be nonnegative");
    for (const EdgeSpec& e : net.edges()) edge_node_count(e, g);
}

/// Per-edge sample arrays at one time level, in junction-at-index-0 local
/// ordering. The junction value is stored once and shared by every edge, so
/// continuity holds exactly by construction. The outer boundary sample of
/// each edge is pinned to 0 (homogeneous Dirichlet).
class NetworkState {
public:
    NetworkState() = default;

    NetworkState(const StarNetwork& net, const GridSpec& g, double time = 0.0)
        : time_(time), junction_(0.0) {
        interior_.reserve(net.num_edges());
        for (const EdgeSpec& e : net.edges())
            interior_.emplace_back(edge_node_count(e, g), 0.0);
    }

    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    double junction_value() const { return junction_; }
    void set_junction_value(double h) { junction_ = h; }

    std::size_t num_edges() const { return interior_.size(); }

    /// Number of samples on edge i, including junction and outer boundary.
    std::size_t num_nodes(std::size_t i) const { return interior_[i].size() + 1; }

    /// Sample k of edge i; k = 0 is the junction.
    double value(std::size_t i, std::size_t k) const {
        return k == 0 ? junction_ : interior_[i][k - 1];
    }

    void set_value(std::size_t i, std::size_t k, double v) {
        if (k == 0)
            junction_ = v;
        else
            interior_[i][k - 1] = v;
    }

    const std::vector<double>& interior(std::size_t i) const { return interior_[i]; }
    std::vector<double>& interior(std::size_t i) { return interior_[i]; }

    double max_abs() const {
        double m = std::abs(junction_);
        for (const auto& edge : interior_)
            for (double v : edge) m = std::max(m, std::abs(v));
        return m;
    }

private:
    double time_ = 0.0;
    double junction_ = 0.0;
    std::vector<std::vector<double>> interior_; // local nodes 1..M_i per edge
};

/// Samples f(edge_index, x_local) onto a state. The junction value is taken
/// from edge 1 at x = 0; f is expected to be continuous there. Outer
/// boundary samples are forced to 0.
inline NetworkState
sample_state(const StarNetwork& net, const GridSpec& g,
             const std::function<double(std::size_t, double)>& f, double time = 0.0) {
    NetworkState s(net, g, time);
    s.set_junction_value(f(0, 0.0));
    for (std::size_t i = 0; i < net.num_edges(); ++i) {
        const std::size_t m = s.num_nodes(i) - 1;
        for (std::size_t k = 1; k < m; ++k)
            s.set_value(i, k, f(i, static_cast<double>(k) * g.dx));
        s.set_value(i, m, 0.0);
    }
    return s;
}

struct InstabilityError : std::runtime_error {
    InstabilityError(std::size_t step, double time, double max_abs)
        : std::runtime_error("numerical instability at step " + std::to_string(step) +
                             " (t = " + std::to_string(time) +
                             ", max |u| = " + std::to_string(max_abs) + ")"),
          step_index(step), last_stable_time(time), max_abs_value(max_abs) {}

    std::size_t step_index;
    double last_stable_time;
    double max_abs_value;
};

/// Junction-row right-hand side of the mass-conservation closure, with the
/// leapfrog history folded in:
///   2 dt dx * sum_i [sigma_i f_i(u^n_J) - nu_i (u^n_{i,1} - u^n_J) / dx]
///   + sum_i mu_i^2 (u^{n-1}_{i,1} - u^{n-1}_J).
/// At N = 2 this is the discrete interface equation rearranged for the
/// unknowns at level n+1.
inline double interface_rhs(const StarNetwork& net, const NetworkState& state_n,
                            const NetworkState& state_nm1, const GridSpec& g) {
    double flux = 0.0;
    double history = 0.0;
    const double h_n = state_n.junction_value();
    for (std::size_t i = 0; i < net.num_edges(); ++i) {
        const EdgeSpec& e = net.edge(i);
        flux += edge_sign(e) * net.advective_flux(i, h_n) -
                e.nu * (state_n.value(i, 1) - h_n) / g.dx;
        history += e.mu * e.mu *
                   (state_nm1.value(i, 1) - state_nm1.junction_value());
    }
    return 2.0 * g.dt * g.dx * flux + history;
}

/// Holds the prefactorized implicit system for one (network, grid) pair and
/// the two leapfrog history levels. The matrix is constant in time: the
/// Crank-Nicolson share of the dissipation at level n+1 is folded into the
/// per-edge tridiagonal blocks, and the junction unknown is eliminated by a
/// Schur complement against the single coupling row.
class SteppingWorkspace {
public:
    SteppingWorkspace(StarNetwork network, GridSpec grid)
        : net_(std::move(network)), grid_(grid) {
        validate_grid(net_, grid_);
        const std::size_t n = net_.num_edges();
        a_.resize(n);
        b_.resize(n);
        r_.resize(n);
        factor_.resize(n);
        w_.resize(n);
        double gj = 0.0;
        double coupling = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const EdgeSpec& e = net_.edge(i);
            const double mu2 = e.mu * e.mu;
            a_[i] = 1.0 + e.nu * grid_.dt / mu2;
            b_[i] = 1.0 - e.nu * grid_.dt / mu2;
            r_[i] = grid_.dx * grid_.dx / mu2;
            const std::size_t m = edge_node_count(e, grid_) - 1;
            factor_[i] = ToeplitzTridiag(m, a_[i], -(2.0 * a_[i] + r_[i]));
            w_[i].assign(m, 0.0);
            w_[i][0] = 1.0;
            factor_[i].solve(w_[i]); // column of the inverse hit by the junction
            gj -= mu2;
            coupling += mu2 * a_[i] * w_[i][0];
        }
        junction_diag_ = gj - coupling;
        if (junction_diag_ == 0.0 || !std::isfinite(junction_diag_))
            throw std::runtime_error("singular junction coupling (dx = " +
                                     std::to_string(grid_.dx) + ")");
        prev_ = NetworkState(net_, grid_);
        curr_ = NetworkState(net_, grid_);
    }

    const StarNetwork& network() const { return net_; }
    const GridSpec& grid() const { return grid_; }
    const NetworkState& previous_state() const { return prev_; }
    const NetworkState& current_state() const { return curr_; }
    std::size_t step_index() const { return step_index_; }

    /// Interior-row matrix entries, for inspection: off-diagonal a_i and
    /// main diagonal -(2 a_i + (dx/mu_i)^2).
    double edge_matrix_off(std::size_t i) const { return a_[i]; }
    double edge_matrix_diag(std::size_t i) const { return -(2.0 * a_[i] + r_[i]); }

    void set_history(NetworkState level0, NetworkState level1) {
        prev_ = std::move(level0);
        curr_ = std::move(level1);
        step_index_ = 0;
    }

    /// Advances one dt with the leapfrog scheme and rotates the history.
    const NetworkState& step() {
        NetworkState next(net_, grid_, curr_.time() + grid_.dt);
        const std::size_t n = net_.num_edges();

        std::vector<std::vector<double>> sol(n);
        double junction_rhs;
        if (net_.junction_condition() == JunctionCondition::MassConservation)
            junction_rhs = interface_rhs(net_, curr_, prev_, grid_);
        else
            junction_rhs = 0.0; // Kirchhoff flux matching at level n+1

        double num = junction_rhs;
        for (std::size_t i = 0; i < n; ++i) {
            const EdgeSpec& e = net_.edge(i);
            const double mu2 = e.mu * e.mu;
            const double adv = grid_.dt * grid_.dx / mu2 * edge_sign(e);
            const std::size_t m = factor_[i].size();
            std::vector<double>& rho = sol[i];
            rho.resize(m);
            for (std::size_t k = 1; k <= m; ++k) {
                const double un_m = curr_.value(i, k - 1);
                const double un_c = curr_.value(i, k);
                const double un_p = curr_.value(i, k + 1);
                const double um_m = prev_.value(i, k - 1);
                const double um_c = prev_.value(i, k);
                const double um_p = prev_.value(i, k + 1);
                rho[k - 1] =
                    adv * (e.alpha + e.gamma * std::pow(un_c, net_.p())) *
                        (un_p - un_m) +
                    b_[i] * (um_m + um_p) - (2.0 * b_[i] + r_[i]) * um_c;
            }
            factor_[i].solve(rho);
            num -= mu2 * rho[0];
        }
        const double h_next = num / junction_diag_;
        next.set_junction_value(h_next);
        for (std::size_t i = 0; i < n; ++i) {
            const double shift = a_[i] * h_next;
            std::vector<double>& edge = next.interior(i);
            for (std::size_t k = 0; k < sol[i].size(); ++k)
                edge[k] = sol[i][k] - shift * w_[i][k];
            // outer boundary entry stays 0
        }

        ++step_index_;
        const double m = next.max_abs();
        if (!std::isfinite(m))
            throw InstabilityError(step_index_, curr_.time(), m);
        prev_ = std::move(curr_);
        curr_ = std::move(next);
        return curr_;
    }

    /// One semi-implicit first-order step used to seed the leapfrog history:
    /// backward Euler on dispersion and dissipation, explicit advection. The
    /// implicit matrix coincides with the leapfrog one, so the stored
    /// factorization is reused.
    NetworkState bootstrap_semi_implicit(const NetworkState& state0) const {
        NetworkState next(net_, grid_, state0.time() + grid_.dt);
        const std::size_t n = net_.num_edges();

        double num = 0.0;
        const double h0 = state0.junction_value();
        for (std::size_t i = 0; i < n; ++i) {
            const EdgeSpec& e = net_.edge(i);
            num += edge_sign(e) * net_.advective_flux(i, h0) -
                   e.nu * (state0.value(i, 1) - h0) / grid_.dx;
        }
        num *= grid_.dt * grid_.dx;
        for (std::size_t i = 0; i < n; ++i) {
            const EdgeSpec& e = net_.edge(i);
            num += e.mu * e.mu * (state0.value(i, 1) - h0);
        }

        std::vector<std::vector<double>> sol(n);
        for (std::size_t i = 0; i < n; ++i) {
            const EdgeSpec& e = net_.edge(i);
            const double mu2 = e.mu * e.mu;
            const double adv = 0.5 * grid_.dt * grid_.dx / mu2 * edge_sign(e);
            const std::size_t m = factor_[i].size();
            std::vector<double>& rho = sol[i];
            rho.resize(m);
            for (std::size_t k = 1; k <= m; ++k) {
                const double u_m = state0.value(i, k - 1);
                const double u_c = state0.value(i, k);
                const double u_p = state0.value(i, k + 1);
                rho[k - 1] =
                    adv * (e.alpha + e.gamma * std::pow(u_c, net_.p())) *
                        (u_p - u_m) +
                    (u_m + u_p) - (2.0 + r_[i]) * u_c;
            }
            factor_[i].solve(rho);
            num -= mu2 * rho[0];
        }
        const double h1 = num / junction_diag_;
        next.set_junction_value(h1);
        for (std::size_t i = 0; i < n; ++i) {
            const double shift = a_[i] * h1;
            std::vector<double>& edge = next.interior(i);
            for (std::size_t k = 0; k < sol[i].size(); ++k)
                edge[k] = sol[i][k] - shift * w_[i][k];
        }
        return next;
    }

private:
    StarNetwork net_;
    GridSpec grid_;
    std::vector<double> a_; // off-diagonal / n+1 dissipation weight
    std::vector<double> b_; // n-1 dissipation weight
    std::vector<double> r_; // (dx/mu)^2
    std::vector<ToeplitzTridiag> factor_;
    std::vector<std::vector<double>> w_; // T^{-1} e_1 per edge
    double junction_diag_ = 0.0;
    NetworkState prev_, curr_;
    std::size_t step_index_ = 0;
};

inline SteppingWorkspace assemble_system(const StarNetwork& net, const GridSpec& g) {
    return SteppingWorkspace(net, g);
}

enum class BootstrapMode { ExactTranslate, SemiImplicit };

/// Builds the u(dt) leapfrog seed. ExactTranslate requires a sampler for the
/// known traveling solution; SemiImplicit works for arbitrary data.
inline NetworkState bootstrap_first_level(
    const NetworkState& state0, SteppingWorkspace& ws, BootstrapMode mode,
    const std::function<double(std::size_t, double, double)>& exact = {}) {
    if (mode == BootstrapMode::ExactTranslate) {
        if (!exact)
            throw std::invalid_argument("exact-translate bootstrap needs a sampler");
        const double t1 = state0.time() + ws.grid().dt;
        NetworkState s = sample_state(
            ws.network(), ws.grid(),
            [&](std::size_t i, double x) { return exact(i, x, t1); }, t1);
        return s;
    }
    return ws.bootstrap_semi_implicit(state0);
}

using StateObserver = std::function<void(double, const NetworkState&)>;

struct RunOptions {
    BootstrapMode bootstrap = BootstrapMode::SemiImplicit;
    std::function<double(std::size_t, double, double)> exact_solution; // (i, x, t)
    std::size_t observer_stride = 1;
};

/// Iterates the scheme from `initial` until the horizon, invoking each
/// observer at t = 0 and then every `observer_stride` steps (always
/// including the final level). Instability aborts propagate to the caller.
inline NetworkState run(const StarNetwork& net, const GridSpec& g,
                        const NetworkState& initial,
                        const std::vector<StateObserver>& observers,
                        const RunOptions& opts = {}) {
    validate_grid(net, g);
    const auto total_steps = static_cast<std::size_t>(std::llround(g.horizon / g.dt));
    for (const StateObserver& obs : observers) obs(initial.time(), initial);
    if (total_steps == 0) return initial;

    SteppingWorkspace ws(net, g);
    NetworkState level1 =
        bootstrap_first_level(initial, ws, opts.bootstrap, opts.exact_solution);
    ws.set_history(initial, level1);
    const std::size_t stride = std::max<std::size_t>(1, opts.observer_stride);
    if (1 % stride == 0 || total_steps == 1)
        for (const StateObserver& obs : observers) obs(level1.time(), level1);
    for (std::size_t s = 2; s <= total_steps; ++s) {
        const NetworkState& state = ws.step();
        if (s % stride == 0 || s == total_steps)
            for (const StateObserver& obs : observers) obs(state.time(), state);
    }
    return ws.current_state();
}

} // namespace gbbmb

#endif
