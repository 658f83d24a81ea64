#pragma once

#include "amkt/rng.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace amkt {

/// A block of scripted news values: values[k] is emitted at step start_step + k.
struct ScriptedNews {
    std::int64_t start_step = 0;
    std::vector<double> values;

    friend bool operator==(const ScriptedNews&, const ScriptedNews&) = default;
};

/// Thrown when news is requested out of order.
class SequenceError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Public-information stream n(t). The gaussian draw for step t is consumed
/// whether or not a scripted value overrides it, so unscripted steps match the
/// pure gaussian stream with the same seed exactly.
class NewsSource {
public:
    static constexpr std::int64_t first_step = 1;

    static NewsSource gaussian(std::uint64_t seed);
    /// Throws std::invalid_argument if two entries cover the same step.
    static NewsSource scripted(const std::vector<ScriptedNews>& entries, std::uint64_t fallback_seed);

    /// Returns n(t). `t` must equal cursor().
    double next(std::int64_t t);

    [[nodiscard]] std::int64_t cursor() const noexcept { return cursor_; }
    [[nodiscard]] bool is_scripted(std::int64_t t) const { return overrides_.contains(t); }

private:
    explicit NewsSource(std::uint64_t seed) : rng_(make_engine(seed)) {}

    Engine rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::map<std::int64_t, double> overrides_;
    std::int64_t cursor_ = first_step;
};

}  // namespace amkt
