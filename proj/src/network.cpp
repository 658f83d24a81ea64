#include "amkt/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace amkt {

SocialNetwork SocialNetwork::from_lists(const std::vector<std::vector<std::int64_t>>& lists) {
    SocialNetwork net;
    net.offsets_.reserve(lists.size() + 1);
    net.offsets_.push_back(0);
    for (const auto& row : lists) {
        net.neighbors_.insert(net.neighbors_.end(), row.begin(), row.end());
        net.offsets_.push_back(net.neighbors_.size());
    }
    return net;
}

SocialNetwork SocialNetwork::lattice4(std::int64_t n_agents) {
    const auto side = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(n_agents))));
    std::vector<std::vector<std::int64_t>> lists(static_cast<std::size_t>(n_agents));
    for (std::int64_t row = 0; row < side; ++row) {
        for (std::int64_t col = 0; col < side; ++col) {
            auto idx = [side](std::int64_t r, std::int64_t c) {
                return ((r + side) % side) * side + (c + side) % side;
            };
            lists[static_cast<std::size_t>(idx(row, col))] = {
                idx(row, col + 1), idx(row, col - 1), idx(row + 1, col), idx(row - 1, col)};
        }
    }
    return from_lists(lists);
}

SocialNetwork SocialNetwork::random(std::int64_t n_agents, double mean_degree, Engine& rng) {
    const auto n = static_cast<std::size_t>(n_agents);
    const auto max_edges = n * (n - 1) / 2;
    const auto target = std::min<std::size_t>(
        max_edges, static_cast<std::size_t>(std::llround(static_cast<double>(n) * mean_degree / 2.0)));

    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::set<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::vector<std::int64_t>> lists(n);
    while (edges.size() < target) {
        auto a = pick(rng);
        auto b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (edges.emplace(a, b).second) {
            lists[a].push_back(static_cast<std::int64_t>(b));
            lists[b].push_back(static_cast<std::int64_t>(a));
        }
    }
    return from_lists(lists);
}

SocialNetwork SocialNetwork::complete(std::int64_t n_agents) {
    const auto n = static_cast<std::size_t>(n_agents);
    std::vector<std::vector<std::int64_t>> lists(n);
    for (std::size_t i = 0; i < n; ++i) {
        lists[i].reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) lists[i].push_back(static_cast<std::int64_t>(j));
        }
    }
    return from_lists(lists);
}

bool SocialNetwork::is_symmetric() const {
    for (std::size_t i = 0; i < size(); ++i) {
        for (auto j : neighbors(i)) {
            auto back = neighbors(static_cast<std::size_t>(j));
            if (std::find(back.begin(), back.end(), static_cast<std::int64_t>(i)) == back.end()) {
                return false;
            }
        }
    }
    return true;
}

bool SocialNetwork::has_self_loops() const {
    for (std::size_t i = 0; i < size(); ++i) {
        for (auto j : neighbors(i)) {
            if (static_cast<std::size_t>(j) == i) return true;
        }
    }
    return false;
}

SocialNetwork build_network(const ModelParams& params) {
    switch (params.topology.kind) {
    case TopologyKind::lattice4:
        return SocialNetwork::lattice4(params.n_agents);
    case TopologyKind::random: {
        auto rng = make_engine(params.seed, Stream::network);
        return SocialNetwork::random(params.n_agents, params.topology.mean_degree, rng);
    }
    case TopologyKind::complete:
        return SocialNetwork::complete(params.n_agents);
    }
    return SocialNetwork::lattice4(params.n_agents);
}

}  // namespace amkt
