#ifndef GBBMB_PICARD_HPP
#define GBBMB_PICARD_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gbbmb/network.hpp"
#include "gbbmb/waves.hpp"

namespace gbbmb {

/// Uniform trapezoid grid for the integral-operator oracle: space truncated
/// to [0, y_max], time to [0, t_final] with the step sizes below. The x
/// samples of the candidate solution live on the same grid as the y
/// quadrature nodes, so the kernel kink at y = x always falls on a node
/// where the sgn(0) = 0 convention splits the jump evenly.
struct QuadratureGrid {
    double y_max;
    double y_step;
    double t_step;

    std::size_t num_y() const {
        return static_cast<std::size_t>(std::llround(y_max / y_step)) + 1;
    }
};

inline void validate_quadrature(const StarNetwork& net, const QuadratureGrid& q) {
    if (!(q.y_step > 0.0) || !(q.t_step > 0.0) || !(q.y_max > 0.0))
        throw std::invalid_argument("quadrature steps must be positive");
    double mu_max = 0.0;
    for (const EdgeSpec& e : net.edges()) mu_max = std::max(mu_max, e.mu);
    if (q.y_max < 10.0 * mu_max)
        throw std::invalid_argument("y_max must be at least 10 * max(mu_i)");
}

/// One edge's samples over the oracle grid: field[it][iy].
using OracleField = std::vector<std::vector<double>>;

namespace detail {

inline double trapz(const std::vector<double>& v, double h) {
    if (v.size() < 2) return 0.0;
    double acc = 0.5 * (v.front() + v.back());
    for (std::size_t k = 1; k + 1 < v.size(); ++k) acc += v[k];
    return acc * h;
}

// Inner spatial integrals int_0^inf ker(x, y) g(y) dy for every x node.
template <typename Kernel>
std::vector<double> kernel_apply(const Kernel& ker, const std::vector<double>& g,
                                 const QuadratureGrid& q) {
    const std::size_t ny = g.size();
    std::vector<double> out(ny);
    std::vector<double> integrand(ny);
    for (std::size_t ix = 0; ix < ny; ++ix) {
        const double x = static_cast<double>(ix) * q.y_step;
        for (std::size_t iy = 0; iy < ny; ++iy)
            integrand[iy] = ker(x, static_cast<double>(iy) * q.y_step) * g[iy];
        out[ix] = trapz(integrand, q.y_step);
    }
    return out;
}

// Time convolution int_0^t e^{-rate (t - s)} J(s) ds on the t grid,
// trapezoid in s. The t = 0 row is identically zero.
inline void exp_convolve(const std::vector<std::vector<double>>& J, double rate,
                         const QuadratureGrid& q, OracleField& out) {
    const std::size_t nt = J.size();
    for (std::size_t it = 1; it < nt; ++it) {
        const double t = static_cast<double>(it) * q.t_step;
        for (std::size_t ix = 0; ix < out[it].size(); ++ix) {
            double acc = 0.0;
            for (std::size_t is = 0; is <= it; ++is) {
                const double s = static_cast<double>(is) * q.t_step;
                const double wt = (is == 0 || is == it) ? 0.5 : 1.0;
                acc += wt * std::exp(-rate * (t - s)) * J[is][ix];
            }
            out[it][ix] = acc * q.t_step;
        }
    }
}

} // namespace detail

/// B_adv over the whole grid: the double integral of
/// e^{-(nu/mu^2)(t-s)} K(x,y) f(u(y,s)) by iterated composite trapezoid.
inline OracleField field_B_adv(const EdgeSpec& edge, int p, const OracleField& u,
                               const QuadratureGrid& q) {
    const std::size_t nt = u.size();
    const std::size_t ny = u.empty() ? 0 : u.front().size();
    const GreensSpec gs{edge.mu};
    std::vector<std::vector<double>> inner(nt);
    for (std::size_t it = 0; it < nt; ++it) {
        std::vector<double> flux(ny);
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const double v = u[it][iy];
            flux[iy] = edge.alpha * v + edge.gamma * std::pow(v, p + 1) / (p + 1);
        }
        inner[it] = detail::kernel_apply(
            [&](double x, double y) { return kernel_K(gs, x, y); }, flux, q);
    }
    OracleField out(nt, std::vector<double>(ny, 0.0));
    detail::exp_convolve(inner, edge.nu / (edge.mu * edge.mu), q, out);
    return out;
}

/// B_visc over the whole grid: prefactor nu/mu^2, kernel G. Identically zero
/// when nu = 0.
inline OracleField field_B_visc(const EdgeSpec& edge, const OracleField& u,
                                const QuadratureGrid& q) {
    const std::size_t nt = u.size();
    const std::size_t ny = u.empty() ? 0 : u.front().size();
    OracleField out(nt, std::vector<double>(ny, 0.0));
    if (edge.nu == 0.0) return out;
    const GreensSpec gs{edge.mu};
    std::vector<std::vector<double>> inner(nt);
    for (std::size_t it = 0; it < nt; ++it)
        inner[it] = detail::kernel_apply(
            [&](double x, double y) { return greens_G(gs, x, y); }, u[it], q);
    detail::exp_convolve(inner, edge.nu / (edge.mu * edge.mu), q, out);
    const double pref = edge.nu / (edge.mu * edge.mu);
    for (auto& row : out)
        for (double& v : row) v *= pref;
    return out;
}

/// Pointwise accessors matching the operator definitions. They evaluate the
/// full-grid routines and index, so tests and library share one quadrature
/// path.
inline double op_B_adv(const EdgeSpec& edge, int p, const OracleField& u,
                       std::size_t ix, std::size_t it, const QuadratureGrid& q) {
    return field_B_adv(edge, p, u, q)[it][ix];
}

inline double op_B_visc(const EdgeSpec& edge, const OracleField& u, std::size_t ix,
                        std::size_t it, const QuadratureGrid& q) {
    return field_B_visc(edge, u, q)[it][ix];
}

/// The explicit junction value h on the whole time grid:
/// h(t) = phi0 e^{-nu* t / mu*}
///      + sum_i 1/(mu_i mu*) int_0^t int_0^inf
///          e^{-(nu*/mu* (t-s) + y/mu_i)} [sigma_i f_i(u_i) - (nu_i/mu_i) u_i].
inline std::vector<double> junction_value_series(const StarNetwork& net,
                                                 const std::vector<OracleField>& u,
                                                 double phi0,
                                                 const QuadratureGrid& q) {
    const std::size_t nt = u.empty() ? 0 : u.front().size();
    double mu_star = 0.0;
    double nu_star = 0.0;
    for (const EdgeSpec& e : net.edges()) {
        mu_star += e.mu;
        nu_star += e.nu / e.mu;
    }
    const double rate = nu_star / mu_star;

    std::vector<double> h(nt);
    for (std::size_t it = 0; it < nt; ++it)
        h[it] = phi0 * std::exp(-rate * static_cast<double>(it) * q.t_step);

    for (std::size_t i = 0; i < net.num_edges(); ++i) {
        const EdgeSpec& e = net.edge(i);
        const double sigma = edge_sign(e);
        const std::size_t ny = u[i].front().size();
        // inner integral per time node
        std::vector<double> inner(nt);
        std::vector<double> integrand(ny);
        for (std::size_t is = 0; is < nt; ++is) {
            for (std::size_t iy = 0; iy < ny; ++iy) {
                const double y = static_cast<double>(iy) * q.y_step;
                const double v = u[i][is][iy];
                const double flux =
                    e.alpha * v + e.gamma * std::pow(v, net.p() + 1) / (net.p() + 1);
                integrand[iy] =
                    std::exp(-y / e.mu) * (sigma * flux - e.nu / e.mu * v);
            }
            inner[is] = detail::trapz(integrand, q.y_step);
        }
        const double pref = 1.0 / (e.mu * mu_star);
        for (std::size_t it = 1; it < nt; ++it) {
            const double t = static_cast<double>(it) * q.t_step;
            double acc = 0.0;
            for (std::size_t is = 0; is <= it; ++is) {
                const double s = static_cast<double>(is) * q.t_step;
                const double wt = (is == 0 || is == it) ? 0.5 : 1.0;
                acc += wt * std::exp(-rate * (t - s)) * inner[is];
            }
            h[it] += pref * acc * q.t_step;
        }
    }
    return h;
}

/// Scalar form of the junction value at time node it.
inline double junction_value_h(const StarNetwork& net,
                               const std::vector<OracleField>& u, double phi0,
                               std::size_t it, const QuadratureGrid& q) {
    return junction_value_series(net, u, phi0, q)[it];
}

struct PicardResult {
    std::vector<OracleField> u;    // fixed-point samples per edge
    std::vector<double> h;         // junction value series
    std::size_t iterations = 0;
    std::vector<double> residual_history; // successive sup-norm differences
    bool converged = false;
    double kernel_tail_bound = 0.0; // e^{-y_max/mu} truncation indicator
};

/// Contraction iteration of the fixed-point map: starting from the
/// time-constant extension of phi, repeatedly applies
///   u_i <- e^{-nu_i t/mu_i^2} phi_i
///         + (h(t) - phi(0) e^{-nu_i t/mu_i^2}) e^{-x/mu_i}
///         + sigma_i B_adv,i[u_i] + B_visc,i[u_i]
/// until the successive sup-norm difference drops below tol. Non-convergence
/// within max_iters leaves converged = false with the residual history
/// intact (the usual cause is a t_final outside the contraction regime).
inline PicardResult picard_solve(const StarNetwork& net,
                                 const std::vector<std::vector<double>>& phi,
                                 double t_final, const QuadratureGrid& q,
                                 double tol = 1e-8, std::size_t max_iters = 50) {
    validate_quadrature(net, q);
    if (phi.size() != net.num_edges())
        throw std::invalid_argument("phi must supply one sample array per edge");
    const std::size_t ny = q.num_y();
    for (const auto& ph : phi)
        if (ph.size() != ny)
            throw std::invalid_argument("phi arrays must match the y grid");
    const double phi0 = phi[0][0];
    for (const auto& ph : phi)
        if (std::abs(ph[0] - phi0) > 1e-12 * (1.0 + std::abs(phi0)))
            throw std::invalid_argument("phi must be continuous at the junction");
    const std::size_t nt =
        static_cast<std::size_t>(std::llround(t_final / q.t_step)) + 1;

    PicardResult res;
    for (const EdgeSpec& e : net.edges())
        res.kernel_tail_bound =
            std::max(res.kernel_tail_bound, std::exp(-q.y_max / e.mu));

    // time-constant initial iterate
    res.u.resize(net.num_edges());
    for (std::size_t i = 0; i < net.num_edges(); ++i)
        res.u[i].assign(nt, phi[i]);

    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        res.h = junction_value_series(net, res.u, phi0, q);
        double diff = 0.0;
        std::vector<OracleField> next(net.num_edges());
        for (std::size_t i = 0; i < net.num_edges(); ++i) {
            const EdgeSpec& e = net.edge(i);
            const double sigma = edge_sign(e);
            const double decay_rate = e.nu / (e.mu * e.mu);
            const OracleField badv = field_B_adv(e, net.p(), res.u[i], q);
            const OracleField bvisc = field_B_visc(e, res.u[i], q);
            OracleField& ui = next[i];
            ui.assign(nt, std::vector<double>(ny, 0.0));
            for (std::size_t it = 0; it < nt; ++it) {
                const double t = static_cast<double>(it) * q.t_step;
                const double decay = std::exp(-decay_rate * t);
                const double boundary = res.h[it] - phi0 * decay;
                for (std::size_t iy = 0; iy < ny; ++iy) {
                    const double x = static_cast<double>(iy) * q.y_step;
                    ui[it][iy] = decay * phi[i][iy] +
                                 boundary * std::exp(-x / e.mu) +
                                 sigma * badv[it][iy] + bvisc[it][iy];
                    diff = std::max(diff,
                                    std::abs(ui[it][iy] - res.u[i][it][iy]));
                }
            }
        }
        res.u = std::move(next);
        res.iterations = iter;
        res.residual_history.push_back(diff);
        if (diff < tol) {
            res.converged = true;
            break;
        }
    }
    res.h = junction_value_series(net, res.u, phi0, q);
    return res;
}

} // namespace gbbmb

#endif
