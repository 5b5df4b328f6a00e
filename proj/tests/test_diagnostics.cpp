#include <doctest.h>

#include <cmath>
#include <vector>

#include "gbbmb/diagnostics.hpp"
#include "gbbmb/waves.hpp"
#include "test_helpers.hpp"

using namespace gbbmb;
using gbbmb::testing::make_edge;
using gbbmb::testing::two_edge_network;

namespace {

NetworkState scaled(const NetworkState& s, double lambda) {
    NetworkState out = s;
    out.set_junction_value(lambda * s.junction_value());
    for (std::size_t i = 0; i < s.num_edges(); ++i)
        for (std::size_t k = 1; k + 1 < s.num_nodes(i); ++k)
            out.set_value(i, k, lambda * s.value(i, k));
    return out;
}

} // namespace

TEST_CASE("mass of a sampled solitary wave matches the closed form") {
    StarNetwork net = two_edge_network(1.0, 0.0, 0.0, 40.0);
    GridSpec g{0.01, 0.01, 1.0};
    const auto slow = SolitaryWaveParams::from_speed(2.0, 20.0, net.edge(0), 1);
    NetworkState s = sample_state(net, g, [&](std::size_t i, double x) {
        return i == 0 ? solitary_profile(slow, 1, 40.0 - x, 0.0) : 0.0;
    });
    CHECK(mass(s, g) == doctest::Approx(12.0 * std::sqrt(2.0)).epsilon(1e-5));

    const auto fast = SolitaryWaveParams::from_speed(5.0, 20.0, net.edge(0), 1);
    NetworkState sf = sample_state(net, g, [&](std::size_t i, double x) {
        return i == 0 ? solitary_profile(fast, 1, 40.0 - x, 0.0) : 0.0;
    });
    CHECK(mass(sf, g) == doctest::Approx(24.0 * std::sqrt(5.0)).epsilon(1e-5));
}

TEST_CASE("mass is linear and energy is quadratic under scaling") {
    StarNetwork net = two_edge_network(1.3, 0.0, 0.0, 20.0);
    GridSpec g{0.05, 0.05, 1.0};
    NetworkState s = sample_state(net, g, [&](std::size_t i, double x) {
        return std::exp(-0.5 * (x - 6.0) * (x - 6.0)) * (i == 0 ? 1.0 : 0.7);
    });
    const double m1 = mass(s, g);
    const double e1 = energy(s, net, g);
    for (double lam : {2.0, -0.5, 3.7}) {
        NetworkState sl = scaled(s, lam);
        CHECK(mass(sl, g) == doctest::Approx(lam * m1).epsilon(1e-12));
        CHECK(energy(sl, net, g) == doctest::Approx(lam * lam * e1).epsilon(1e-12));
    }
}

TEST_CASE("energy agrees with the analytic value for a Gaussian bump") {
    // u = exp(-(x-10)^2) on the incoming edge only, away from both ends:
    // int u^2 = int u_x^2 = sqrt(pi/2), so E = (1 + mu^2)/2 * sqrt(pi/2).
    const double mu = 0.8;
    StarNetwork net({make_edge(Orientation::Incoming, mu, 1.0, 1.0, 0.0, 20.0),
                     make_edge(Orientation::Outgoing, 1.0, 1.0, 1.0, 0.0, 20.0)},
                    1, JunctionCondition::MassConservation);
    GridSpec g{0.01, 0.01, 1.0};
    NetworkState s = sample_state(net, g, [&](std::size_t i, double x) {
        const double z = x - 10.0;
        return i == 0 ? std::exp(-z * z) : 0.0;
    });
    const double expect = 0.5 * (1.0 + mu * mu) * std::sqrt(M_PI / 2.0);
    CHECK(energy(s, net, g) == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("energy rate formula: balanced two-edge case has no junction term") {
    StarNetwork net = two_edge_network(1.0, 0.0, 0.0, 10.0);
    GridSpec g{0.1, 0.1, 1.0};
    NetworkState s(net, g);
    s.set_junction_value(1.7);
    CHECK(energy_rate_rhs(s, net, g) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("energy rate formula: Y-network junction term") {
    // signed bracket = -(1/2 + h/6) + 2 (1/2 + h/6); at h = 1 this is 2/3,
    // so dE/dt = -2/3 with no dissipation.
    StarNetwork net({make_edge(Orientation::Incoming, 1.0, 1.0, 1.0, 0.0, 10.0),
                     make_edge(Orientation::Outgoing, 1.0, 1.0, 1.0, 0.0, 10.0),
                     make_edge(Orientation::Outgoing, 1.0, 1.0, 1.0, 0.0, 10.0)},
                    1, JunctionCondition::MassConservation);
    GridSpec g{0.1, 0.1, 1.0};
    NetworkState s(net, g);
    s.set_junction_value(1.0);
    CHECK(energy_rate_rhs(s, net, g) == doctest::Approx(-2.0 / 3.0));
}

TEST_CASE("energy rate formula: dissipation integral") {
    // h = 0 kills the junction term; u = sin(pi x / 10) on edge 0 vanishes at
    // both ends and has int u_x^2 = pi^2 / 20, so the rate is -nu pi^2 / 20.
    StarNetwork net({make_edge(Orientation::Incoming, 1.0, 1.0, 1.0, 0.5, 10.0),
                     make_edge(Orientation::Outgoing, 1.0, 1.0, 1.0, 0.0, 10.0)},
                    1, JunctionCondition::MassConservation);
    GridSpec g{0.01, 0.01, 1.0};
    NetworkState s(net, g);
    for (std::size_t k = 1; k + 1 < s.num_nodes(0); ++k)
        s.set_value(0, k, std::sin(M_PI * static_cast<double>(k) * g.dx / 10.0));
    const double rate = energy_rate_rhs(s, net, g);
    CHECK(rate < 0.0);
    CHECK(rate == doctest::Approx(-0.5 * M_PI * M_PI / 20.0).epsilon(1e-3));
}

TEST_CASE("reflection detector on synthetic histories") {
    StarNetwork net = two_edge_network(1.0, 0.0, 0.0, 2.5);
    GridSpec g{0.25, 0.25, 1.0};
    // interior nodes 1..9; dip_node = 0 means no dip
    auto snapshot = [&](double incoming_peak, double outgoing_peak,
                        std::size_t dip_node, double dip = -0.1) {
        NetworkState s(net, g);
        if (incoming_peak != 0.0) s.set_value(0, 5, incoming_peak);
        if (outgoing_peak != 0.0) s.set_value(1, 5, outgoing_peak);
        if (dip_node != 0) s.set_value(0, dip_node, dip);
        return s;
    };

    // a dip that travels away from the junction is a reflected wave
    std::vector<NetworkState> hist;
    hist.push_back(snapshot(1.0, 0.0, 0));
    hist.push_back(snapshot(0.9, 0.4, 0));
    for (std::size_t s = 0; s < 6; ++s)
        hist.push_back(snapshot(0.0, 0.8, 1 + s));

    ReflectionVerdict v = detect_reflection(hist, 0);
    CHECK(v.reflected);
    CHECK(v.min_excursion == doctest::Approx(-0.1));
    // raising the threshold can only turn the verdict off
    CHECK_FALSE(detect_reflection(hist, 0, 0.2).reflected);

    // an equally deep dip parked next to the junction is a standing wake
    std::vector<NetworkState> wake;
    wake.push_back(snapshot(1.0, 0.0, 0));
    for (int s = 0; s < 7; ++s) wake.push_back(snapshot(0.0, 0.8, 1, -0.3));
    CHECK_FALSE(detect_reflection(wake, 0).reflected);

    // a dip sustained for fewer snapshots than required is not a reflection
    std::vector<NetworkState> brief;
    brief.push_back(snapshot(1.0, 0.0, 0));
    for (std::size_t s = 0; s < 3; ++s) brief.push_back(snapshot(0.0, 0.8, 1 + s));
    for (int s = 0; s < 4; ++s) brief.push_back(snapshot(0.0, 0.8, 0));
    CHECK_FALSE(detect_reflection(brief, 0).reflected);

    CHECK_THROWS_AS(detect_reflection({}, 0), std::invalid_argument);
}

TEST_CASE("delta mass series tracks the worst relative drift") {
    std::vector<DiagnosticsRecord> recs(3);
    recs[0].time = 0.0;
    recs[0].mass = 2.0;
    recs[1].time = 1.0;
    recs[1].mass = 2.1;
    recs[2].time = 2.0;
    recs[2].mass = 1.96;
    DeltaMassSeries s = delta_mass_series(recs);
    CHECK_FALSE(s.absolute_drift);
    CHECK(s.max_delta_mass_percent == doctest::Approx(5.0));
    CHECK(s.time_of_max == 1.0);
    CHECK(s.points.size() == 3);
    CHECK(s.points[2].delta_mass_percent == doctest::Approx(2.0));
}

TEST_CASE("delta mass series falls back to absolute drift when M(0) = 0") {
    std::vector<DiagnosticsRecord> recs(2);
    recs[0].time = 0.0;
    recs[0].mass = 0.0;
    recs[1].time = 1.0;
    recs[1].mass = 0.25;
    DeltaMassSeries s = delta_mass_series(recs);
    CHECK(s.absolute_drift);
    CHECK(s.max_delta_mass_percent == doctest::Approx(0.25));
}
