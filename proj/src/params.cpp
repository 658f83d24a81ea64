#include "amkt/params.hpp"

#include <cmath>

namespace amkt {

namespace {

void require(bool ok, const char* field, const char* constraint) {
    if (!ok) {
        throw ConfigError(field, constraint);
    }
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void validate(const ModelParams& p) {
    require(p.n_agents > 0, "n_agents", "must be a positive integer");
    require(finite(p.c1_max) && p.c1_max >= 0.0, "c1_max", "must be a finite nonnegative real");
    require(finite(p.c2_max) && p.c2_max >= 0.0, "c2_max", "must be a finite nonnegative real");
    require(finite(p.c3_max) && p.c3_max >= 0.0, "c3_max", "must be a finite nonnegative real");
    require(finite(p.omega_max) && p.omega_max > 0.0, "omega_max", "must be a finite positive real");
    require(p.alpha > 0.0 && p.alpha < 1.0, "alpha", "must lie in the open interval (0, 1)");
    require(finite(p.lambda) && p.lambda > 0.0, "lambda", "must be a finite positive real");
    require(p.g > 0.0 && p.g < 1.0, "g", "must lie in the open interval (0, 1)");
    require(finite(p.initial_cash) && p.initial_cash > 0.0, "initial_cash", "must be a finite positive real");
    require(finite(p.initial_stocks) && p.initial_stocks > 0.0, "initial_stocks",
            "must be a finite positive real");
    require(finite(p.initial_price) && p.initial_price > 0.0, "initial_price",
            "must be a finite positive real");
    require(p.n_steps > 0, "n_steps", "must be a positive integer");
    require(finite(p.sigma_floor) && p.sigma_floor > 0.0, "sigma_floor", "must be a finite positive real");
    require(finite(p.sigma_init) && p.sigma_init >= p.sigma_floor, "sigma_init",
            "must be finite and at least sigma_floor");
    require(p.burn_in >= 0, "burn_in", "must be a nonnegative integer");

    switch (p.topology.kind) {
    case TopologyKind::lattice4: {
        const auto side = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(p.n_agents))));
        require(side * side == p.n_agents, "n_agents", "must be a perfect square for the lattice4 topology");
        // a side below 3 would make the four torus neighbours coincide
        require(side >= 3, "n_agents", "lattice4 needs at least a 3x3 torus (n_agents >= 9)");
        break;
    }
    case TopologyKind::random:
        require(finite(p.topology.mean_degree) && p.topology.mean_degree > 0.0 &&
                    p.topology.mean_degree <= static_cast<double>(p.n_agents - 1),
                "topology.mean_degree", "must lie in (0, n_agents - 1]");
        break;
    case TopologyKind::complete:
        require(p.n_agents >= 2, "n_agents", "complete graph needs at least two agents");
        require(p.n_agents <= max_complete_graph_agents, "n_agents",
                "complete topology is limited to 1024 agents");
        break;
    }
}

std::string to_string(ClearingVariant v) {
    return v == ClearingVariant::price_before_trade ? "price-before-trade" : "price-after-trade";
}

ClearingVariant clearing_variant_from_string(const std::string& s) {
    if (s == "price-before-trade") return ClearingVariant::price_before_trade;
    if (s == "price-after-trade") return ClearingVariant::price_after_trade;
    throw ConfigError("clearing_variant", "expected \"price-before-trade\" or \"price-after-trade\", got \"" + s + "\"");
}

std::string to_string(TopologyKind k) {
    switch (k) {
    case TopologyKind::lattice4: return "lattice4";
    case TopologyKind::random: return "random";
    case TopologyKind::complete: return "complete";
    }
    return "lattice4";
}

TopologyKind topology_kind_from_string(const std::string& s) {
    if (s == "lattice4") return TopologyKind::lattice4;
    if (s == "random") return TopologyKind::random;
    if (s == "complete") return TopologyKind::complete;
    throw ConfigError("topology.kind", "expected lattice4, random or complete, got \"" + s + "\"");
}

}  // namespace amkt
