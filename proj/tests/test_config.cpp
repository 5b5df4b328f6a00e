#include <doctest.h>

#include <string>

#include "gbbmb/config.hpp"

using namespace gbbmb;

namespace {

const char* kBaseline = R"(# two-edge baseline
[network]
p = 1
junction = mass_conservation

[edge]
orientation = incoming
mu = 1.0
alpha = 1.0
gamma = 1.0
nu = 0.0
length = 100

[edge]
orientation = outgoing
mu = 1.1   # mismatched dispersion
alpha = 1.0
gamma = 1.0
nu = 0.0
length = 100

[grid]
dx = 0.025
dt = 0.025
horizon = 40

[initial]
type = solitary_wave
c = 2
x0 = 60

[output]
stride = 40
fields = true
)";

} // namespace

TEST_CASE("parse_config_text reads the two-edge baseline") {
    ExperimentConfig cfg = parse_config_text(kBaseline);
    CHECK(cfg.edges.size() == 2);
    CHECK(cfg.p == 1);
    CHECK(cfg.junction == JunctionCondition::MassConservation);
    CHECK(cfg.edges[0].orientation == Orientation::Incoming);
    CHECK(cfg.edges[1].mu == doctest::Approx(1.1));
    CHECK(cfg.grid.dx == 0.025);
    CHECK(cfg.grid.horizon == 40.0);
    CHECK(cfg.initial.kind == InitialKind::SolitaryWave);
    CHECK(cfg.initial.c == 2.0);
    CHECK(cfg.initial.x0 == 60.0);
    CHECK(cfg.output.stride == 40);
    CHECK(cfg.output.fields);
    CHECK(cfg.bootstrap == BootstrapMode::SemiImplicit);
    // and the parsed edges build a valid network
    StarNetwork net = cfg.network();
    CHECK(net.num_edges() == 2);
}

TEST_CASE("parse errors carry line numbers") {
    auto expect_error = [](const std::string& text, const char* fragment) {
        try {
            parse_config_text(text);
            FAIL("expected ConfigError for: " << fragment);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    expect_error("[grid]\ndx == 0.1\n", "line 2");
    expect_error("[grid]\ndx = fast\n", "expected a number");
    expect_error("dx = 0.1\n", "outside any section");
    expect_error("[grid\ndx = 0.1\n", "malformed section header");
    expect_error("[warp]\nfactor = 9\n", "unknown section");
    expect_error("[grid]\ndz = 0.1\n", "unknown grid field");
    expect_error("[network]\njunction = psychic\n", "junction must be");
    expect_error("[network]\np = 1\n", "no [edge] sections");
}

TEST_CASE("overrides rewrite nested fields") {
    ExperimentConfig cfg = parse_config_text(kBaseline);
    apply_override(cfg, "edge2.mu=1.5");
    apply_override(cfg, "edge1.nu=1.0");
    apply_override(cfg, "grid.dt=0.0125");
    apply_override(cfg, "initial.c=5");
    apply_override(cfg, "network.junction=kirchhoff");
    CHECK(cfg.edges[1].mu == 1.5);
    CHECK(cfg.edges[0].nu == 1.0);
    CHECK(cfg.grid.dt == 0.0125);
    CHECK(cfg.initial.c == 5.0);
    CHECK(cfg.junction == JunctionCondition::Kirchhoff);

    CHECK_THROWS_AS(apply_override(cfg, "edge3.mu=2"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "grid.dt"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "dt=0.1"), ConfigError);
}

TEST_CASE("serialize / parse round trip preserves every field") {
    ExperimentConfig cfg = parse_config_text(kBaseline);
    apply_override(cfg, "edge2.mu=1.1000000000000001");
    apply_override(cfg, "output.dir=results/run7");
    cfg.bootstrap = BootstrapMode::ExactTranslate;
    ExperimentConfig back = parse_config_text(serialize_config(cfg));
    CHECK(back.edges.size() == cfg.edges.size());
    for (std::size_t i = 0; i < cfg.edges.size(); ++i) {
        CHECK(back.edges[i].orientation == cfg.edges[i].orientation);
        CHECK(back.edges[i].mu == cfg.edges[i].mu);
        CHECK(back.edges[i].alpha == cfg.edges[i].alpha);
        CHECK(back.edges[i].gamma == cfg.edges[i].gamma);
        CHECK(back.edges[i].nu == cfg.edges[i].nu);
        CHECK(back.edges[i].truncation_length == cfg.edges[i].truncation_length);
    }
    CHECK(back.p == cfg.p);
    CHECK(back.junction == cfg.junction);
    CHECK(back.grid.dx == cfg.grid.dx);
    CHECK(back.grid.dt == cfg.grid.dt);
    CHECK(back.grid.horizon == cfg.grid.horizon);
    CHECK(back.initial.kind == cfg.initial.kind);
    CHECK(back.initial.c == cfg.initial.c);
    CHECK(back.initial.x0 == cfg.initial.x0);
    CHECK(back.initial.host_edge == cfg.initial.host_edge);
    CHECK(back.output.stride == cfg.output.stride);
    CHECK(back.output.fields == cfg.output.fields);
    CHECK(back.output.out_dir == cfg.output.out_dir);
    CHECK(back.bootstrap == cfg.bootstrap);
}
