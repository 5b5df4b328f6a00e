#ifndef GBBMB_DIAGNOSTICS_HPP
#define GBBMB_DIAGNOSTICS_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gbbmb/fd.hpp"
#include "gbbmb/network.hpp"

namespace gbbmb {

struct DiagnosticsRecord {
    double time = 0.0;
    double mass = 0.0;
    double delta_mass_percent = 0.0;
    double energy = 0.0;
    double energy_rate_formula = 0.0;
    double junction_value = 0.0;
};

/// M(t): composite trapezoid of u over each edge, summed. The junction
/// sample is an endpoint of every edge, so each edge integral carries it
/// with weight dx/2.
inline double mass(const NetworkState& state, const GridSpec& g) {
    double total = 0.0;
    for (std::size_t i = 0; i < state.num_edges(); ++i) {
        const std::size_t m = state.num_nodes(i) - 1;
        double acc = 0.5 * (state.value(i, 0) + state.value(i, m));
        for (std::size_t k = 1; k < m; ++k) acc += state.value(i, k);
        total += acc * g.dx;
    }
    return total;
}

/// Centered-difference derivative samples on one edge, one-sided at the
/// junction and outer boundary (consistent with the scheme's first-order
/// junction treatment).
inline std::vector<double> edge_derivative(const NetworkState& state,
                                           std::size_t i, const GridSpec& g) {
    const std::size_t m = state.num_nodes(i) - 1;
    std::vector<double> d(m + 1);
    d[0] = (state.value(i, 1) - state.value(i, 0)) / g.dx;
    for (std::size_t k = 1; k < m; ++k)
        d[k] = (state.value(i, k + 1) - state.value(i, k - 1)) / (2.0 * g.dx);
    d[m] = (state.value(i, m) - state.value(i, m - 1)) / g.dx;
    return d;
}

inline double edge_gradient_square_integral(const NetworkState& state,
                                            std::size_t i, const GridSpec& g) {
    const std::vector<double> d = edge_derivative(state, i, g);
    double acc = 0.5 * (d.front() * d.front() + d.back() * d.back());
    for (std::size_t k = 1; k + 1 < d.size(); ++k) acc += d[k] * d[k];
    return acc * g.dx;
}

/// E(t) = 1/2 sum_i int (u_i^2 + mu_i^2 u_{i,x}^2) dx.
inline double energy(const NetworkState& state, const StarNetwork& net,
                     const GridSpec& g) {
    double total = 0.0;
    for (std::size_t i = 0; i < state.num_edges(); ++i) {
        const std::size_t m = state.num_nodes(i) - 1;
        double uu = 0.5 * (state.value(i, 0) * state.value(i, 0) +
                           state.value(i, m) * state.value(i, m));
        for (std::size_t k = 1; k < m; ++k)
            uu += state.value(i, k) * state.value(i, k);
        const double mu2 = net.edge(i).mu * net.edge(i).mu;
        total += uu * g.dx + mu2 * edge_gradient_square_integral(state, i, g);
    }
    return 0.5 * total;
}

/// Analytic energy rate:
/// dE/dt = -h^2 sum_i sigma_i (alpha_i/2 + gamma_i h^p / ((p+1)(p+2)))
///         - sum_i nu_i int u_{i,x}^2 dx.
inline double energy_rate_rhs(const NetworkState& state, const StarNetwork& net,
                              const GridSpec& g) {
    const double h = state.junction_value();
    const int p = net.p();
    double bracket = 0.0;
    double dissipation = 0.0;
    for (std::size_t i = 0; i < net.num_edges(); ++i) {
        const EdgeSpec& e = net.edge(i);
        bracket += edge_sign(e) *
                   (0.5 * e.alpha +
                    e.gamma * std::pow(h, p) / ((p + 1.0) * (p + 2.0)));
        if (e.nu > 0.0)
            dissipation += e.nu * edge_gradient_square_integral(state, i, g);
    }
    return -h * h * bracket - dissipation;
}

struct ReflectionVerdict {
    bool reflected = false;
    double min_excursion = 0.0; // most negative incoming-edge value seen
    double location = 0.0;      // node index of that minimum on the edge
};

/// Scans the incoming edge after the incident peak has passed the junction.
/// Reflected means the field dips below -threshold_fraction * incident
/// amplitude for at least min_consecutive consecutive snapshots while the
/// dip's location moves monotonically away from the junction. The outward
/// motion requirement tells a propagating anti-solitary wave apart from the
/// standing oscillatory wake that hugs the junction after a strong
/// interaction; the wake can dip just as deep but does not travel. The 2% /
/// 5 snapshot defaults are frozen; raising the threshold can only flip
/// verdicts true -> false.
inline ReflectionVerdict detect_reflection(const std::vector<NetworkState>& history,
                                           std::size_t incoming_edge_index,
                                           double threshold_fraction = 0.02,
                                           std::size_t min_consecutive = 5) {
    if (history.empty())
        throw std::invalid_argument("reflection detection needs a nonempty history");

    const std::size_t e = incoming_edge_index;
    double incident_amplitude = 0.0;
    for (std::size_t k = 0; k < history.front().num_nodes(e); ++k)
        incident_amplitude =
            std::max(incident_amplitude, history.front().value(e, k));

    // Crossing = first snapshot whose global maximum no longer sits on the
    // incoming edge.
    std::size_t crossing = history.size();
    for (std::size_t s = 0; s < history.size(); ++s) {
        const NetworkState& st = history[s];
        double best = st.junction_value();
        std::size_t best_edge = st.num_edges(); // junction marker
        for (std::size_t i = 0; i < st.num_edges(); ++i)
            for (std::size_t k = 1; k < st.num_nodes(i); ++k)
                if (st.value(i, k) > best) {
                    best = st.value(i, k);
                    best_edge = i;
                }
        if (best_edge != e) {
            crossing = s;
            break;
        }
    }

    ReflectionVerdict v;
    const double threshold = -threshold_fraction * incident_amplitude;
    std::size_t streak = 0;
    std::size_t prev_k = 0;
    for (std::size_t s = crossing; s < history.size(); ++s) {
        const NetworkState& st = history[s];
        double lo = 0.0;
        std::size_t lo_k = 0;
        for (std::size_t k = 1; k < st.num_nodes(e); ++k)
            if (st.value(e, k) < lo) {
                lo = st.value(e, k);
                lo_k = k;
            }
        if (lo < v.min_excursion) {
            v.min_excursion = lo;
            v.location = static_cast<double>(lo_k);
        }
        if (lo <= threshold)
            streak = (streak > 0 && lo_k > prev_k) ? streak + 1 : 1;
        else
            streak = 0;
        prev_k = lo_k;
        if (streak >= min_consecutive) v.reflected = true;
    }
    return v;
}

struct DeltaMassPoint {
    double time;
    double delta_mass_percent;
};

struct DeltaMassSeries {
    std::vector<DeltaMassPoint> points;
    double max_delta_mass_percent = 0.0;
    double time_of_max = 0.0;
    bool absolute_drift = false; // M(0) = 0: values are |M(t) - M(0)| instead
};

/// delta M = 100 |M(t) - M(0)| / M(0) per record; falls back to absolute
/// drift, flagged, when M(0) = 0.
inline DeltaMassSeries delta_mass_series(const std::vector<DiagnosticsRecord>& recs) {
    DeltaMassSeries out;
    if (recs.empty()) return out;
    const double m0 = recs.front().mass;
    out.absolute_drift = (m0 == 0.0);
    for (const DiagnosticsRecord& r : recs) {
        const double drift = std::abs(r.mass - m0);
        const double dm = out.absolute_drift ? drift : 100.0 * drift / m0;
        out.points.push_back({r.time, dm});
        if (dm > out.max_delta_mass_percent) {
            out.max_delta_mass_percent = dm;
            out.time_of_max = r.time;
        }
    }
    return out;
}

inline DiagnosticsRecord make_record(double time, const NetworkState& state,
                                     const StarNetwork& net, const GridSpec& g,
                                     double mass0) {
    DiagnosticsRecord r;
    r.time = time;
    r.mass = mass(state, g);
    r.delta_mass_percent =
        mass0 != 0.0 ? 100.0 * std::abs(r.mass - mass0) / mass0 : 0.0;
    r.energy = energy(state, net, g);
    r.energy_rate_formula = energy_rate_rhs(state, net, g);
    r.junction_value = state.junction_value();
    return r;
}

} // namespace gbbmb

#endif
