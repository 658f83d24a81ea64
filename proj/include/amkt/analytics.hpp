#pragma once

#include "amkt/model.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace amkt {

/// Raised when a statistic is undefined for its input (empty series,
/// zero variance).
class AnalyticsError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ExtremalRuns {
    double max_drawdown = 0.0;  // <= 0
    double max_drawup = 0.0;    // >= 0

    friend bool operator==(const ExtremalRuns&, const ExtremalRuns&) = default;
};

/// Largest sums over maximal runs of strictly positive (drawup) and strictly
/// negative (drawdown) returns. A zero return ends the current run.
[[nodiscard]] ExtremalRuns extremal_runs(std::span<const double> returns);

/// Sample autocorrelation for lags 0..max_lag. Mean-removed, biased (1/n)
/// covariance estimator normalised by the lag-0 variance. Requires
/// series.size() > 4 * max_lag.
[[nodiscard]] std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);

/// Fourth standardised moment minus 3 (population moments).
[[nodiscard]] double excess_kurtosis(std::span<const double> values);

[[nodiscard]] std::vector<double> mean_k_trace(std::span<const StepRecord> records);
[[nodiscard]] double max_mean_k(std::span<const StepRecord> records);

/// Uniform bins on [lo, hi).
struct BinSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 10;

    friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

/// Bin masses normalised by the total count, so in-range masses plus the two
/// out-of-range masses sum to one. A value equal to `hi` lands in the last bin.
struct Histogram {
    BinSpec spec;
    std::vector<double> mass;
    double underflow = 0.0;
    double overflow = 0.0;

    [[nodiscard]] double bin_lo(std::size_t b) const;
    [[nodiscard]] double bin_hi(std::size_t b) const;

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

[[nodiscard]] Histogram histogram(std::span<const double> values, const BinSpec& spec);

struct StatsConfig {
    std::size_t acf_max_lag = 100;
    BinSpec return_bins{-0.05, 0.05, 100};
    BinSpec mean_k_bins{-0.5, 4.5, 100};

    friend bool operator==(const StatsConfig&, const StatsConfig&) = default;
};

struct RunStatistics {
    std::size_t n_records = 0;
    double max_mean_k = 0.0;
    double max_drawdown = 0.0;
    double max_drawup = 0.0;
    double kurtosis = 0.0;
    std::vector<double> return_acf;  // empty when the returns are constant
    std::vector<double> vol_acf;     // autocorrelation of |r|; empty when undefined
    Histogram return_histogram;
    Histogram mean_k_histogram;

    friend bool operator==(const RunStatistics&, const RunStatistics&) = default;
};

/// Drops records with t <= burn_in.
[[nodiscard]] std::span<const StepRecord> after_burn_in(std::span<const StepRecord> records, std::int64_t burn_in);

/// All run statistics over post-burn-in records. Statistics that are
/// undefined for the input (constant returns, series too short for the
/// requested lag) are left at zero / empty rather than raising.
[[nodiscard]] RunStatistics compute_statistics(std::span<const StepRecord> records, const StatsConfig& config);

}  // namespace amkt
