#include "amkt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace amkt {

InitialState init_simulation(const ModelParams& params) {
    validate(params);

    InitialState init;
    init.network = build_network(params);

    const auto n = static_cast<std::size_t>(params.n_agents);
    auto trait_rng = make_engine(params.seed, Stream::traits);
    auto threshold_rng = make_engine(params.seed, Stream::thresholds);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    init.agents.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& a = init.agents[i];
        // scaled unit draws keep the same underlying numbers when C1..C3 change
        a.c1 = unit(trait_rng) * params.c1_max;
        a.c2 = unit(trait_rng) * params.c2_max;
        a.c3 = unit(trait_rng) * params.c3_max;
        a.threshold = unit(threshold_rng) * params.omega_max;
        a.cash = params.initial_cash;
        a.stocks = params.initial_stocks;
        const auto degree = init.network.degree(i);
        a.trust.assign(degree, 0.0);
        a.perceived.assign(degree, 0);
        a.perceived_prev.assign(degree, 0);
        a.last_decision = 0;
    }

    init.state.t = 0;
    init.state.log_price = std::log(params.initial_price);
    init.state.price = params.initial_price;
    init.state.sigma_r = params.sigma_init;
    return init;
}

double form_opinion(Agent& agent, std::span<const std::int8_t> perceived_actions, double u_prev, double news,
                    double eps) {
    if (perceived_actions.data() != agent.perceived.data()) {
        agent.perceived.assign(perceived_actions.begin(), perceived_actions.end());
    }
    double social = 0.0;
    for (std::size_t j = 0; j < agent.trust.size(); ++j) {
        social += agent.trust[j] * static_cast<double>(agent.perceived[j]);
    }
    return agent.c1 * social + agent.c2 * u_prev * news + agent.c3 * eps;
}

std::optional<TradeOrder> decide_trade(Agent& agent, std::int64_t agent_index, double omega, double prev_price,
                                       double g) {
    agent.last_decision = 0;
    if (omega > agent.threshold) {
        const double volume = g * agent.cash / prev_price;
        if (volume > 0.0) {
            agent.last_decision = 1;
            return TradeOrder{agent_index, 1, volume};
        }
    } else if (omega < -agent.threshold) {
        const double volume = g * agent.stocks;
        if (volume > 0.0) {
            agent.last_decision = -1;
            return TradeOrder{agent_index, -1, volume};
        }
    }
    return std::nullopt;
}

ClearingResult clear_price(std::span<const TradeOrder> orders, MarketState& state, double lambda,
                           std::int64_t n_agents) {
    double excess = 0.0;
    for (const auto& o : orders) {
        excess += static_cast<double>(o.direction) * o.volume;
    }
    const double r = excess / (lambda * static_cast<double>(n_agents));
    state.log_price += r;
    state.price = std::exp(state.log_price);
    state.last_return = r;
    return {r, state.price};
}

StepDiagnostics settle_trades(std::span<const TradeOrder> orders, std::span<Agent> agents, double new_price,
                              double prev_price, ClearingVariant variant) {
    StepDiagnostics diag;
    const double price = variant == ClearingVariant::price_before_trade ? new_price : prev_price;
    for (const auto& o : orders) {
        auto& a = agents[static_cast<std::size_t>(o.agent_index)];
        if (o.direction > 0) {
            double volume = o.volume;
            if (volume * price > a.cash) {
                volume = a.cash / price;
                ++diag.solvency_caps;
                a.stocks += volume;
                a.cash = 0.0;
            } else {
                a.cash -= volume * price;
                a.stocks += volume;
            }
        } else {
            const double volume = std::min(o.volume, a.stocks);
            a.cash += volume * price;
            a.stocks -= volume;
        }
    }
    return diag;
}

void update_volatility_estimate(MarketState& state, double r_prev, double alpha, double sigma_floor) {
    state.mean_r = alpha * state.mean_r + (1.0 - alpha) * r_prev;
    const double dev = r_prev - state.mean_r;
    const double var = alpha * state.sigma_r * state.sigma_r + (1.0 - alpha) * dev * dev;
    state.sigma_r = std::max(std::sqrt(var), sigma_floor);
}

double update_news_weight(double u_prev, double news_prev, double r_now, double sigma_r, double alpha) {
    return alpha * u_prev + (1.0 - alpha) * news_prev * (r_now / sigma_r);
}

void update_imitation_weights(Agent& agent, double r_now, double sigma_r, double alpha) {
    const double signal = (1.0 - alpha) * (r_now / sigma_r);
    for (std::size_t j = 0; j < agent.trust.size(); ++j) {
        agent.trust[j] = alpha * agent.trust[j] + static_cast<double>(agent.perceived_prev[j]) * signal;
    }
}

StepRecord advance_step(std::span<Agent> agents, const SocialNetwork& network, MarketState& state,
                        const ModelParams& params, const StepDraws& draws, StepDiagnostics* diagnostics) {
    const double r_prev = state.last_return;
    const double prev_price = state.price;
    state.t += 1;
    state.news = draws.news;

    std::vector<TradeOrder> orders;
    orders.reserve(agents.size());
    for (const auto idx : draws.visit_order) {
        const auto i = static_cast<std::size_t>(idx);
        auto& agent = agents[i];
        const auto nbrs = network.neighbors(i);
        // neighbours visited earlier this step already show their new decision
        for (std::size_t j = 0; j < nbrs.size(); ++j) {
            agent.perceived[j] = static_cast<std::int8_t>(agents[static_cast<std::size_t>(nbrs[j])].last_decision);
        }
        const double omega = form_opinion(agent, agent.perceived, state.u, draws.news, draws.private_noise[i]);
        if (auto order = decide_trade(agent, idx, omega, prev_price, params.g)) {
            orders.push_back(*order);
        }
    }
    // excess demand is summed in agent order, independent of the visit permutation
    std::sort(orders.begin(), orders.end(),
              [](const TradeOrder& a, const TradeOrder& b) { return a.agent_index < b.agent_index; });

    const auto cleared = clear_price(orders, state, params.lambda, params.n_agents);
    const auto settled = settle_trades(orders, agents, cleared.price, prev_price, params.clearing_variant);
    if (diagnostics != nullptr) {
        diagnostics->solvency_caps += settled.solvency_caps;
    }

    update_volatility_estimate(state, r_prev, params.alpha, params.sigma_floor);
    state.u = update_news_weight(state.u, state.prev_news, cleared.ret, state.sigma_r, params.alpha);

    StepRecord rec;
    double trust_sum = 0.0;
    std::size_t links = 0;
    for (auto& agent : agents) {
        update_imitation_weights(agent, cleared.ret, state.sigma_r, params.alpha);
        std::swap(agent.perceived, agent.perceived_prev);
        for (const double k : agent.trust) trust_sum += k;
        links += agent.trust.size();
        rec.total_cash += agent.cash;
        rec.total_stocks += agent.stocks;
    }
    state.prev_news = state.news;

    rec.t = state.t;
    rec.price = state.price;
    rec.log_price = state.log_price;
    rec.ret = cleared.ret;
    rec.news = state.news;
    rec.u = state.u;
    rec.mean_k = links > 0 ? trust_sum / static_cast<double>(links) : 0.0;
    rec.activity = static_cast<double>(orders.size()) / static_cast<double>(agents.size());
    return rec;
}

StepRandomness::StepRandomness(std::uint64_t root_seed)
    : noise_rng_(make_engine(root_seed, Stream::private_noise)),
      perm_rng_(make_engine(root_seed, Stream::permutation)) {}

void StepRandomness::draw(StepDraws& out, std::size_t n_agents) {
    out.private_noise.resize(n_agents);
    for (auto& e : out.private_noise) {
        e = normal_(noise_rng_);
    }
    out.visit_order.resize(n_agents);
    std::iota(out.visit_order.begin(), out.visit_order.end(), std::int64_t{0});
    std::shuffle(out.visit_order.begin(), out.visit_order.end(), perm_rng_);
}

StepRecord step(std::span<Agent> agents, const SocialNetwork& network, MarketState& state,
                const ModelParams& params, NewsSource& news, StepRandomness& randomness, StepDraws& scratch,
                StepDiagnostics* diagnostics) {
    scratch.news = news.next(state.t + 1);
    randomness.draw(scratch, agents.size());
    return advance_step(agents, network, state, params, scratch, diagnostics);
}

Simulation::Simulation(const ModelParams& params)
    : Simulation(params, NewsSource::gaussian(derive_seed(params.seed, Stream::news))) {}

Simulation::Simulation(const ModelParams& params, NewsSource news)
    : params_(params), news_(std::move(news)), randomness_(params.seed) {
    auto init = init_simulation(params_);
    agents_ = std::move(init.agents);
    network_ = std::move(init.network);
    state_ = init.state;
}

StepRecord Simulation::step() {
    return amkt::step(agents_, network_, state_, params_, news_, randomness_, draws_, &diagnostics_);
}

std::vector<StepRecord> Simulation::run(std::int64_t n_steps) {
    std::vector<StepRecord> records;
    records.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n_steps, 0)));
    for (std::int64_t s = 0; s < n_steps; ++s) {
        records.push_back(step());
    }
    return records;
}

double mean_trust(std::span<const Agent> agents) {
    double sum = 0.0;
    std::size_t links = 0;
    for (const auto& a : agents) {
        for (const double k : a.trust) sum += k;
        links += a.trust.size();
    }
    return links > 0 ? sum / static_cast<double>(links) : 0.0;
}

}  // namespace amkt
