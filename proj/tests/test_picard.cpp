#include <doctest.h>

#include <cmath>
#include <vector>

#include "gbbmb/picard.hpp"
#include "test_helpers.hpp"

using namespace gbbmb;
using gbbmb::testing::make_edge;

TEST_CASE("quadrature validation enforces the kernel tail rule") {
    StarNetwork net = gbbmb::testing::two_edge_network(2.0);
    CHECK_THROWS_AS(validate_quadrature(net, QuadratureGrid{10.0, 0.05, 0.05}),
                    std::invalid_argument); // y_max < 10 * mu_max = 20
    CHECK_THROWS_AS(validate_quadrature(net, QuadratureGrid{25.0, 0.0, 0.05}),
                    std::invalid_argument);
    validate_quadrature(net, QuadratureGrid{25.0, 0.05, 0.05});
}

TEST_CASE("advective operator on a linear flux with an exponential profile") {
    // alpha = 1, gamma = 0, nu = 0, mu = 1, u(y, s) = e^{-y}:
    // the inner integral is e^{-x}/2 independent of s, so
    // B_adv(x, t) = t e^{-x} / 2.
    const EdgeSpec e = make_edge(Orientation::Incoming, 1.0, 1.0, 0.0, 0.0);
    const QuadratureGrid q{15.0, 0.01, 0.05};
    const std::size_t ny = q.num_y();
    std::vector<double> profile(ny);
    for (std::size_t iy = 0; iy < ny; ++iy)
        profile[iy] = std::exp(-static_cast<double>(iy) * q.y_step);
    const std::size_t nt = 5; // t up to 0.2
    OracleField u(nt, profile);

    const std::size_t ix = 100; // x = 1
    for (std::size_t it = 0; it < nt; ++it) {
        const double t = static_cast<double>(it) * q.t_step;
        CHECK(op_B_adv(e, 1, u, ix, it, q) ==
              doctest::Approx(0.5 * t * std::exp(-1.0)).epsilon(1e-3));
    }
}

TEST_CASE("viscous operator on the constant field") {
    // nu = mu = 1, u = 1: B_visc(x, t) = (1 - e^{-t})(1 - e^{-x}).
    const EdgeSpec e = make_edge(Orientation::Incoming, 1.0, 1.0, 0.0, 1.0);
    const QuadratureGrid q{15.0, 0.01, 0.01};
    const std::size_t ny = q.num_y();
    const std::size_t nt = 101; // t up to 1
    OracleField u(nt, std::vector<double>(ny, 1.0));
    const OracleField b = field_B_visc(e, u, q);
    const std::size_t ix = 100; // x = 1
    const double expect = (1.0 - std::exp(-1.0)) * (1.0 - std::exp(-1.0));
    CHECK(b[100][ix] == doctest::Approx(expect).epsilon(2e-3));
    CHECK(b[0][ix] == 0.0);
    // zero shortcut
    const EdgeSpec inviscid = make_edge(Orientation::Incoming, 1.0, 1.0, 0.0, 0.0);
    CHECK(field_B_visc(inviscid, u, q)[100][ix] == 0.0);
}

TEST_CASE("junction value decays at rate nu*/mu* when the field vanishes") {
    // mu = (0.5, 0.5), nu = (0.25, 0.25): nu*/mu* = 1, so h(t) = e^{-t}.
    StarNetwork net({make_edge(Orientation::Incoming, 0.5, 1.0, 1.0, 0.25),
                     make_edge(Orientation::Outgoing, 0.5, 1.0, 1.0, 0.25)},
                    1, JunctionCondition::MassConservation);
    const QuadratureGrid q{6.0, 0.05, 0.1};
    const std::size_t ny = q.num_y();
    const std::size_t nt = 11;
    std::vector<OracleField> u(2, OracleField(nt, std::vector<double>(ny, 0.0)));
    const std::vector<double> h = junction_value_series(net, u, 1.0, q);
    for (std::size_t it = 0; it < nt; ++it) {
        const double t = static_cast<double>(it) * q.t_step;
        CHECK(h[it] == doctest::Approx(std::exp(-t)).epsilon(1e-12));
    }
    CHECK(junction_value_h(net, u, 1.0, 5, q) == doctest::Approx(h[5]));
}

TEST_CASE("zero data is a fixed point reached in one sweep") {
    StarNetwork net = gbbmb::testing::two_edge_network(1.3, 0.2, 0.1);
    const QuadratureGrid q{15.0, 0.1, 0.05};
    std::vector<std::vector<double>> phi(2, std::vector<double>(q.num_y(), 0.0));
    PicardResult res = picard_solve(net, phi, 0.2, q);
    CHECK(res.converged);
    CHECK(res.iterations == 1);
    for (const OracleField& f : res.u)
        for (const auto& row : f)
            for (double v : row) CHECK(v == 0.0);
    for (double hv : res.h) CHECK(hv == 0.0);
}

TEST_CASE("picard iteration contracts and its fixed point is continuous") {
    StarNetwork net = gbbmb::testing::two_edge_network(1.2, 0.0, 0.0, 100.0);
    const QuadratureGrid q{14.0, 0.05, 0.025};
    const std::size_t ny = q.num_y();
    std::vector<std::vector<double>> phi(2, std::vector<double>(ny));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const double y = static_cast<double>(iy) * q.y_step;
            phi[i][iy] = 0.3 * std::exp(-y * y);
        }
    PicardResult res = picard_solve(net, phi, 0.2, q, 1e-9, 40);
    CHECK(res.converged);
    CHECK(res.residual_history.size() >= 2);
    for (std::size_t k = 1; k + 1 < res.residual_history.size(); ++k)
        CHECK(res.residual_history[k + 1] < res.residual_history[k]);
    // shared junction trace
    const std::size_t nt = res.u[0].size();
    for (std::size_t it = 0; it < nt; ++it) {
        CHECK(res.u[0][it][0] ==
              doctest::Approx(res.u[1][it][0]).epsilon(1e-7));
        CHECK(res.u[0][it][0] == doctest::Approx(res.h[it]).epsilon(1e-7));
    }
    CHECK(res.kernel_tail_bound < 1e-5);
}

TEST_CASE("discontinuous junction data is rejected") {
    StarNetwork net = gbbmb::testing::two_edge_network();
    const QuadratureGrid q{12.0, 0.1, 0.05};
    std::vector<std::vector<double>> phi(2, std::vector<double>(q.num_y(), 0.0));
    phi[1][0] = 0.5;
    CHECK_THROWS_AS(picard_solve(net, phi, 0.1, q), std::invalid_argument);
}
