#ifndef GBBMB_NETWORK_HPP
#define GBBMB_NETWORK_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gbbmb {

enum class Orientation { Incoming, Outgoing };

enum class JunctionCondition { MassConservation, Kirchhoff };

/// One semi-infinite edge of a star network, truncated to [0, L] for
/// computation. Local coordinates run from the junction (x = 0) outward.
struct EdgeSpec {
    Orientation orientation = Orientation::Outgoing;
    double mu = 1.0;                  // dispersion coefficient, > 0
    double alpha = 0.0;               // linear advection, >= 0
    double gamma = 0.0;               // nonlinear advection, in [0, 1]
    double nu = 0.0;                  // viscoelastic dissipation, >= 0
    double truncation_length = 100.0; // computational edge length, > 0
};

/// Sign convention: -1 on the incoming edge, +1 on outgoing edges.
inline double edge_sign(const EdgeSpec& e) {
    return e.orientation == Orientation::Incoming ? -1.0 : 1.0;
}

/// A star network: N >= 2 edges glued at one junction, a shared nonlinearity
/// power p, and the junction closure used to couple the edges. Immutable
/// after construction, so instances can be shared freely across threads.
class StarNetwork {
public:
    StarNetwork(std::vector<EdgeSpec> edges, int p, JunctionCondition jc)
        : edges_(std::move(edges)), p_(p), junction_(jc) {
        validate();
    }

    const std::vector<EdgeSpec>& edges() const { return edges_; }
    const EdgeSpec& edge(std::size_t i) const { return edges_.at(i); }
    std::size_t num_edges() const { return edges_.size(); }
    int p() const { return p_; }
    JunctionCondition junction_condition() const { return junction_; }

    /// Advective flux f_i(u) = alpha_i u + gamma_i u^{p+1} / (p+1).
    double advective_flux(std::size_t edge_index, double u) const {
        const EdgeSpec& e = edges_.at(edge_index);
        return e.alpha * u + e.gamma * std::pow(u, p_ + 1) / (p_ + 1);
    }

private:
    void validate() const {
        if (edges_.size() < 2)
            throw std::invalid_argument("star network needs at least 2 edges");
        if (p_ < 1)
            throw std::invalid_argument("nonlinearity power p must be >= 1");
        std::size_t incoming = 0;
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const EdgeSpec& e = edges_[i];
            if (!(e.mu > 0.0))
                throw std::invalid_argument("edge " + std::to_string(i + 1) +
                                            ": mu must be positive");
            if (e.alpha < 0.0)
                throw std::invalid_argument("edge " + std::to_string(i + 1) +
                                            ": alpha must be nonnegative");
            if (e.nu < 0.0)
                throw std::invalid_argument("edge " + std::to_string(i + 1) +
                                            ": nu must be nonnegative");
            if (e.gamma < 0.0 || e.gamma > 1.0)
                throw std::invalid_argument("edge " + std::to_string(i + 1) +
                                            ": gamma must lie in [0, 1]");
            if (!(e.truncation_length > 0.0))
                throw std::invalid_argument("edge " + std::to_string(i + 1) +
                                            ": truncation length must be positive");
            if (e.orientation == Orientation::Incoming) ++incoming;
        }
        if (incoming != 1)
            throw std::invalid_argument("network must have exactly one incoming edge");
        if (edges_[0].orientation != Orientation::Incoming)
            throw std::invalid_argument("the incoming edge must be edge 1");
    }

    std::vector<EdgeSpec> edges_;
    int p_;
    JunctionCondition junction_;
};

inline StarNetwork build_network(std::vector<EdgeSpec> edges, int p,
                                 JunctionCondition jc) {
    return StarNetwork(std::move(edges), p, jc);
}

enum class GwpClass {
    EnergyNonIncreasingEvenP,
    EnergyNonIncreasingAnyP,
    Inconclusive,
};

/// Classifies when the junction cannot inject energy: the signed coefficient
/// sums decide it for any p when both vanish, and for even p when both are
/// nonnegative. The signed sums use a 1e-12 tolerance since coefficients are
/// user-supplied reals.
inline GwpClass gwp_classification(const StarNetwork& net) {
    double sum_alpha = 0.0;
    double sum_gamma = 0.0;
    for (const EdgeSpec& e : net.edges()) {
        sum_alpha += edge_sign(e) * e.alpha;
        sum_gamma += edge_sign(e) * e.gamma;
    }
    constexpr double tol = 1e-12;
    if (std::abs(sum_alpha) <= tol && std::abs(sum_gamma) <= tol)
        return GwpClass::EnergyNonIncreasingAnyP;
    if (net.p() % 2 == 0 && sum_alpha >= -tol && sum_gamma >= -tol)
        return GwpClass::EnergyNonIncreasingEvenP;
    return GwpClass::Inconclusive;
}

} // namespace gbbmb

#endif
