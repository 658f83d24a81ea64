#pragma once

// Straight transcription of the market update used as a test oracle. State is
// held in dense arrays indexed by agent, with an adjacency matrix instead of
// neighbour rows, and every sum runs over j = 0..N-1.

#include "amkt/model.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace amkt::reference {

struct DenseState {
    std::size_t n = 0;
    std::vector<std::vector<int>> adj;       // adj[i][j] = 1 if j is a neighbour of i
    std::vector<std::vector<double>> k;      // trust, zero off the graph
    std::vector<std::vector<int>> e_prev;    // E_i[s_j] seen one step earlier
    std::vector<std::vector<int>> e_now;     // E_i[s_j] seen this step
    std::vector<double> c1, c2, c3, thr, cash, stocks;
    std::vector<int> s;                      // last decision
    double log_p = 0.0, p = 1.0, r = 0.0, n_prev = 0.0, u = 0.0, sigma = 0.1, mean_r = 0.0;
    std::int64_t t = 0;

    // outputs of the latest step
    double n_now = 0.0;
    double mean_k = 0.0;
    double activity = 0.0;
};

inline DenseState from_model(const std::vector<Agent>& agents, const SocialNetwork& net, const MarketState& st) {
    DenseState d;
    d.n = agents.size();
    d.adj.assign(d.n, std::vector<int>(d.n, 0));
    d.k.assign(d.n, std::vector<double>(d.n, 0.0));
    d.e_prev.assign(d.n, std::vector<int>(d.n, 0));
    d.e_now.assign(d.n, std::vector<int>(d.n, 0));
    for (std::size_t i = 0; i < d.n; ++i) {
        const auto nb = net.neighbors(i);
        for (std::size_t m = 0; m < nb.size(); ++m) {
            const auto j = static_cast<std::size_t>(nb[m]);
            d.adj[i][j] = 1;
            d.k[i][j] = agents[i].trust[m];
            d.e_prev[i][j] = agents[i].perceived_prev[m];
        }
        d.c1.push_back(agents[i].c1);
        d.c2.push_back(agents[i].c2);
        d.c3.push_back(agents[i].c3);
        d.thr.push_back(agents[i].threshold);
        d.cash.push_back(agents[i].cash);
        d.stocks.push_back(agents[i].stocks);
        d.s.push_back(agents[i].last_decision);
    }
    d.log_p = st.log_price;
    d.p = st.price;
    d.r = st.last_return;
    d.n_prev = st.prev_news;
    d.u = st.u;
    d.sigma = st.sigma_r;
    d.mean_r = st.mean_r;
    d.t = st.t;
    return d;
}

inline void step(DenseState& d, const ModelParams& prm, const StepDraws& draws) {
    const std::size_t n = d.n;
    const double a = prm.alpha;
    const double p_old = d.p;
    const double r_old = d.r;
    d.n_now = draws.news;

    std::vector<double> vol(n, 0.0);
    std::vector<int> dir(n, 0);
    for (const auto idx : draws.visit_order) {
        const auto i = static_cast<std::size_t>(idx);
        double social = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (d.adj[i][j] == 0) continue;
            d.e_now[i][j] = d.s[j];
            social += d.k[i][j] * d.e_now[i][j];
        }
        const double omega = d.c1[i] * social + d.c2[i] * d.u * d.n_now + d.c3[i] * draws.private_noise[i];
        d.s[i] = 0;
        if (omega > d.thr[i] && d.cash[i] > 0.0) {
            d.s[i] = 1;
            vol[i] = prm.g * d.cash[i] / p_old;
        } else if (omega < -d.thr[i] && d.stocks[i] > 0.0) {
            d.s[i] = -1;
            vol[i] = prm.g * d.stocks[i];
        }
        dir[i] = d.s[i];
    }

    double demand = 0.0;
    int traders = 0;
    for (std::size_t i = 0; i < n; ++i) {
        demand += dir[i] * vol[i];
        traders += dir[i] != 0 ? 1 : 0;
    }
    const double r = demand / (prm.lambda * static_cast<double>(n));
    d.log_p += r;
    d.p = std::exp(d.log_p);
    d.r = r;

    const double q = prm.clearing_variant == ClearingVariant::price_before_trade ? d.p : p_old;
    for (std::size_t i = 0; i < n; ++i) {
        if (dir[i] > 0) {
            // a buy costing more than the cash spends exactly all of it
            if (vol[i] * q > d.cash[i]) {
                d.stocks[i] += d.cash[i] / q;
                d.cash[i] = 0.0;
            } else {
                d.stocks[i] += vol[i];
                d.cash[i] -= vol[i] * q;
            }
        } else if (dir[i] < 0) {
            d.stocks[i] -= vol[i];
            d.cash[i] += vol[i] * q;
        }
    }

    d.mean_r = a * d.mean_r + (1.0 - a) * r_old;
    d.sigma = std::max(std::sqrt(a * d.sigma * d.sigma + (1.0 - a) * (r_old - d.mean_r) * (r_old - d.mean_r)),
                       prm.sigma_floor);
    d.u = a * d.u + (1.0 - a) * d.n_prev * (r / d.sigma);

    double k_sum = 0.0;
    double links = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (d.adj[i][j] == 0) continue;
            d.k[i][j] = a * d.k[i][j] + (1.0 - a) * (r / d.sigma) * d.e_prev[i][j];
            k_sum += d.k[i][j];
            links += 1.0;
        }
    }
    d.e_prev = d.e_now;
    d.n_prev = d.n_now;
    d.mean_k = k_sum / links;
    d.activity = traders / static_cast<double>(n);
    d.t += 1;
}

}  // namespace amkt::reference
