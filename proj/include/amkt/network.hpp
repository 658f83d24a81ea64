#pragma once

#include "amkt/params.hpp"
#include "amkt/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace amkt {

/// Undirected social graph stored as compressed adjacency rows. Neighbour
/// order within a row is fixed at construction and is the order in which an
/// agent's trust weights are laid out.
class SocialNetwork {
public:
    SocialNetwork() = default;

    /// Periodic side x side square lattice, row-major indices. Neighbours are
    /// listed as (right, left, down, up).
    static SocialNetwork lattice4(std::int64_t n_agents);
    /// Uniform random graph with round(n * mean_degree / 2) distinct edges.
    static SocialNetwork random(std::int64_t n_agents, double mean_degree, Engine& rng);
    static SocialNetwork complete(std::int64_t n_agents);
    /// Builds from explicit adjacency lists; no symmetry check.
    static SocialNetwork from_lists(const std::vector<std::vector<std::int64_t>>& lists);

    [[nodiscard]] std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    [[nodiscard]] std::span<const std::int64_t> neighbors(std::size_t agent) const noexcept {
        return {neighbors_.data() + offsets_[agent], offsets_[agent + 1] - offsets_[agent]};
    }
    [[nodiscard]] std::size_t degree(std::size_t agent) const noexcept {
        return offsets_[agent + 1] - offsets_[agent];
    }
    /// Total number of directed links, i.e. the number of trust weights.
    [[nodiscard]] std::size_t link_count() const noexcept { return neighbors_.size(); }

    [[nodiscard]] bool is_symmetric() const;
    [[nodiscard]] bool has_self_loops() const;

    friend bool operator==(const SocialNetwork&, const SocialNetwork&) = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::int64_t> neighbors_;
};

/// Builds the topology requested by `params`, drawing from the network stream.
[[nodiscard]] SocialNetwork build_network(const ModelParams& params);

}  // namespace amkt
