#ifndef GBBMB_WAVES_HPP
#define GBBMB_WAVES_HPP

#include <cmath>
#include <stdexcept>

#include "gbbmb/network.hpp"

namespace gbbmb {

/// Solitary-wave family of the dissipation-free equation, parameterized by
/// speed c > alpha and initial peak location x0. Width W and amplitude
/// parameter A are derived from the hosting edge's coefficients; the peak
/// value is A^{-2/p}.
struct SolitaryWaveParams {
    double c;
    double x0;
    double W;
    double A;

    static SolitaryWaveParams from_speed(double c, double x0, const EdgeSpec& edge,
                                         int p) {
        if (!(c > edge.alpha))
            throw std::invalid_argument("solitary wave needs speed c > alpha");
        if (!(edge.gamma > 0.0))
            throw std::invalid_argument("solitary wave needs gamma > 0");
        SolitaryWaveParams s;
        s.c = c;
        s.x0 = x0;
        s.W = p / (2.0 * edge.mu) * std::sqrt(1.0 - edge.alpha / c);
        s.A = p / (2.0 * edge.mu * s.W) *
              std::sqrt(2.0 * edge.gamma / (c * (p + 1.0) * (p + 2.0)));
        return s;
    }

    double amplitude(int p) const { return std::pow(A, -2.0 / p); }
};

/// Profile value [A cosh(W (x - x0 - c t))]^{-2/p}; W acts as a wavenumber,
/// which is what direct substitution into the equation requires. Arguments
/// beyond the representable cosh range return 0; the true value underflows
/// anyway.
inline double solitary_profile(const SolitaryWaveParams& s, int p, double x,
                               double t) {
    const double z = s.W * (x - s.x0 - s.c * t);
    if (std::abs(z) > 350.0) return 0.0;
    return std::pow(s.A * std::cosh(z), -2.0 / p);
}

/// Green's function data for 1 - mu^2 d_xx on the half line.
struct GreensSpec {
    double mu;
};

/// G(x,y) = -(1/2mu)(e^{-(x+y)/mu} - e^{-|x-y|/mu}), vanishing at x = 0 and
/// as x -> infinity.
inline double greens_G(const GreensSpec& g, double x, double y) {
    return -0.5 / g.mu *
           (std::exp(-(x + y) / g.mu) - std::exp(-std::abs(x - y) / g.mu));
}

/// K(x,y) = (1/2mu^2)(e^{-(x+y)/mu} + sgn(x-y) e^{-|x-y|/mu}) with the
/// principal-value convention sgn(0) = 0 on the diagonal. The corner value
/// K(0,0) is 0 by continuity along the x = 0 line; the raw convention would
/// give 1/(2mu^2) there and spoil exact junction continuity of the
/// integral-operator iterates.
inline double kernel_K(const GreensSpec& g, double x, double y) {
    if (x == 0.0) return 0.0;
    const double d = x - y;
    const double sgn = (d > 0.0) - (d < 0.0);
    return 0.5 / (g.mu * g.mu) *
           (std::exp(-(x + y) / g.mu) + sgn * std::exp(-std::abs(d) / g.mu));
}

/// Closed-form mass of the p = 1 profile: 2 A^{-2} / W. Other p fall back to
/// quadrature at the call site.
inline double solitary_mass(const SolitaryWaveParams& s, int p) {
    if (p != 1)
        throw std::invalid_argument("closed-form solitary mass only for p = 1");
    return 2.0 / (s.W * s.A * s.A);
}

} // namespace gbbmb

#endif
