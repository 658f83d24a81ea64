#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace amkt {

/// Raised when a parameter set or config file violates a constraint.
/// `field()` names the offending entry (dotted path for nested config keys).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class ClearingVariant {
    price_before_trade,  // orders settle at the freshly cleared price p(t)
    price_after_trade,   // orders settle at the pre-clearing price p(t-1)
};

enum class TopologyKind { lattice4, random, complete };

struct Topology {
    TopologyKind kind = TopologyKind::lattice4;
    double mean_degree = 4.0;  // random graphs only

    friend bool operator==(const Topology&, const Topology&) = default;
};

inline constexpr std::int64_t max_complete_graph_agents = 1024;

/// Scalar parameters of one market simulation. Defaults are the baseline
/// efficient-regime configuration (N=2500 on a 50x50 torus).
struct ModelParams {
    std::int64_t n_agents = 2500;
    double c1_max = 1.0;  // upper bound of the imitation trait
    double c2_max = 1.0;  // upper bound of the news trait
    double c3_max = 1.0;  // upper bound of the private-information trait
    double omega_max = 2.0;
    double alpha = 0.95;
    double lambda = 0.25;
    double g = 0.02;
    double initial_cash = 1.0;
    double initial_stocks = 1.0;
    double initial_price = 1.0;
    ClearingVariant clearing_variant = ClearingVariant::price_before_trade;
    Topology topology{};
    std::uint64_t seed = 1;
    std::int64_t n_steps = 10000;
    double sigma_init = 0.1;
    double sigma_floor = 1e-8;
    std::int64_t burn_in = 200;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Throws ConfigError naming the first field that violates its constraint.
void validate(const ModelParams& params);

[[nodiscard]] std::string to_string(ClearingVariant v);
[[nodiscard]] ClearingVariant clearing_variant_from_string(const std::string& s);
[[nodiscard]] std::string to_string(TopologyKind k);
[[nodiscard]] TopologyKind topology_kind_from_string(const std::string& s);

}  // namespace amkt
