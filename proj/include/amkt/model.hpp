#pragma once

#include "amkt/network.hpp"
#include "amkt/news.hpp"
#include "amkt/params.hpp"
#include "amkt/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace amkt {

/// One trader. Traits are fixed for the whole run; portfolio and trust
/// weights evolve. `trust`, `perceived` and `perceived_prev` are aligned with
/// the agent's row in the SocialNetwork.
struct Agent {
    double c1 = 0.0;  // weight on neighbours
    double c2 = 0.0;  // weight on news
    double c3 = 0.0;  // weight on private information
    double threshold = 0.0;
    double cash = 0.0;
    double stocks = 0.0;
    std::vector<double> trust;                // k_ij
    int last_decision = 0;                    // -1 sell, 0 passive, +1 buy
    std::vector<std::int8_t> perceived;       // neighbour actions seen at the latest opinion
    std::vector<std::int8_t> perceived_prev;  // neighbour actions seen one step earlier

    friend bool operator==(const Agent&, const Agent&) = default;
};

struct MarketState {
    std::int64_t t = 0;
    double log_price = 0.0;
    double price = 1.0;
    double last_return = 0.0;  // r(t)
    double news = 0.0;         // n(t)
    double prev_news = 0.0;    // n(t-1)
    double u = 0.0;            // trust in the news
    double sigma_r = 0.1;
    double mean_r = 0.0;

    friend bool operator==(const MarketState&, const MarketState&) = default;
};

struct TradeOrder {
    std::int64_t agent_index = 0;
    int direction = 0;  // +1 buy, -1 sell
    double volume = 0.0;

    friend bool operator==(const TradeOrder&, const TradeOrder&) = default;
};

struct StepRecord {
    std::int64_t t = 0;
    double price = 0.0;
    double log_price = 0.0;
    double ret = 0.0;
    double news = 0.0;
    double u = 0.0;
    double mean_k = 0.0;
    double activity = 0.0;
    double total_cash = 0.0;
    double total_stocks = 0.0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// Everything random that enters one step, drawn up front so the
/// deterministic part of the step can be replayed against a reference.
struct StepDraws {
    double news = 0.0;
    std::vector<double> private_noise;    // indexed by agent
    std::vector<std::int64_t> visit_order;  // a permutation of agent indices
};

struct StepDiagnostics {
    std::int64_t solvency_caps = 0;  // buys trimmed to the available cash
};

struct InitialState {
    std::vector<Agent> agents;
    SocialNetwork network;
    MarketState state;
};

/// Validates `params`, then draws traits and thresholds from their own
/// streams. Trust weights, u and decisions start at zero.
[[nodiscard]] InitialState init_simulation(const ModelParams& params);

/// Opinion from neighbours, news and private information. Copies
/// `perceived_actions` into `agent.perceived` unless it already aliases it.
double form_opinion(Agent& agent, std::span<const std::int8_t> perceived_actions, double u_prev, double news,
                    double eps);

/// Threshold rule. Updates `agent.last_decision`; zero-volume candidates are
/// treated as passive.
std::optional<TradeOrder> decide_trade(Agent& agent, std::int64_t agent_index, double omega, double prev_price,
                                       double g);

struct ClearingResult {
    double ret = 0.0;
    double price = 0.0;
};

/// Linear log-price impact of the aggregate signed volume. Updates
/// `state.log_price`, `state.price` and `state.last_return`.
ClearingResult clear_price(std::span<const TradeOrder> orders, MarketState& state, double lambda,
                           std::int64_t n_agents);

/// Exchanges cash and stock at the variant's settlement price. Buys whose cost
/// would exceed the agent's cash are trimmed so the cash lands at zero.
StepDiagnostics settle_trades(std::span<const TradeOrder> orders, std::span<Agent> agents, double new_price,
                              double prev_price, ClearingVariant variant);

/// Advances the exponential estimates of the mean return and its volatility
/// with r(t-1). The mean moves first; sigma_r is floored afterwards.
void update_volatility_estimate(MarketState& state, double r_prev, double alpha, double sigma_floor);

[[nodiscard]] double update_news_weight(double u_prev, double news_prev, double r_now, double sigma_r,
                                        double alpha);

/// Rewards each neighbour whose action one step earlier (perceived_prev)
/// matched the sign of the realized return.
void update_imitation_weights(Agent& agent, double r_now, double sigma_r, double alpha);

/// Deterministic part of one step given its draws: opinions and orders in
/// visit order, clearing, settlement, adaptation. Advances `state.t`.
StepRecord advance_step(std::span<Agent> agents, const SocialNetwork& network, MarketState& state,
                        const ModelParams& params, const StepDraws& draws, StepDiagnostics* diagnostics = nullptr);

/// Source of the per-step private noise and visit permutation.
class StepRandomness {
public:
    explicit StepRandomness(std::uint64_t root_seed);

    /// Fills private noise (agent order) then a fresh uniform permutation.
    void draw(StepDraws& out, std::size_t n_agents);

private:
    Engine noise_rng_;
    Engine perm_rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Full step: draws n(t), private noise and the visit order, then advances.
StepRecord step(std::span<Agent> agents, const SocialNetwork& network, MarketState& state,
                const ModelParams& params, NewsSource& news, StepRandomness& randomness, StepDraws& scratch,
                StepDiagnostics* diagnostics = nullptr);

/// Owns one simulation run.
class Simulation {
public:
    explicit Simulation(const ModelParams& params);
    Simulation(const ModelParams& params, NewsSource news);

    StepRecord step();
    std::vector<StepRecord> run(std::int64_t n_steps);

    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] const std::vector<Agent>& agents() const noexcept { return agents_; }
    [[nodiscard]] const SocialNetwork& network() const noexcept { return network_; }
    [[nodiscard]] const MarketState& state() const noexcept { return state_; }
    [[nodiscard]] const StepDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    ModelParams params_;
    std::vector<Agent> agents_;
    SocialNetwork network_;
    MarketState state_;
    NewsSource news_;
    StepRandomness randomness_;
    StepDraws draws_;
    StepDiagnostics diagnostics_;
};

/// Spatial mean of all trust weights.
[[nodiscard]] double mean_trust(std::span<const Agent> agents);

}  // namespace amkt
