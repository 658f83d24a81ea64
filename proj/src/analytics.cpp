#include "amkt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace amkt {

ExtremalRuns extremal_runs(std::span<const double> returns) {
    if (returns.empty()) {
        throw AnalyticsError("extremal_runs: empty return series");
    }
    ExtremalRuns out;
    double run = 0.0;
    int sign = 0;
    for (const double r : returns) {
        const int s = r > 0.0 ? 1 : (r < 0.0 ? -1 : 0);
        if (s != sign) {
            run = 0.0;
            sign = s;
        }
        if (s == 0) continue;
        run += r;
        if (s > 0) {
            out.max_drawup = std::max(out.max_drawup, run);
        } else {
            out.max_drawdown = std::min(out.max_drawdown, run);
        }
    }
    return out;
}

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
    const auto n = series.size();
    if (n <= 4 * max_lag || n < 2) {
        throw std::invalid_argument("autocorrelation: series length must exceed 4 * max_lag");
    }
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    std::vector<double> centered(n);
    std::transform(series.begin(), series.end(), centered.begin(), [mean](double x) { return x - mean; });

    double c0 = 0.0;
    for (const double x : centered) c0 += x * x;
    if (!(c0 > 0.0)) {
        throw AnalyticsError("autocorrelation: constant series");
    }

    std::vector<double> acf(max_lag + 1);
    acf[0] = 1.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (std::size_t t = lag; t < n; ++t) c += centered[t] * centered[t - lag];
        acf[lag] = c / c0;
    }
    return acf;
}

double excess_kurtosis(std::span<const double> values) {
    const auto n = static_cast<double>(values.size());
    if (values.empty()) {
        throw AnalyticsError("excess_kurtosis: empty sample");
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (const double x : values) {
        const double d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) {
        throw AnalyticsError("excess_kurtosis: zero variance");
    }
    return m4 / (m2 * m2) - 3.0;
}

std::vector<double> mean_k_trace(std::span<const StepRecord> records) {
    std::vector<double> out(records.size());
    std::transform(records.begin(), records.end(), out.begin(), [](const StepRecord& r) { return r.mean_k; });
    return out;
}

double max_mean_k(std::span<const StepRecord> records) {
    if (records.empty()) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) best = std::max(best, r.mean_k);
    return best;
}

double Histogram::bin_lo(std::size_t b) const {
    return spec.lo + (spec.hi - spec.lo) * static_cast<double>(b) / static_cast<double>(spec.bins);
}

double Histogram::bin_hi(std::size_t b) const { return bin_lo(b + 1); }

Histogram histogram(std::span<const double> values, const BinSpec& spec) {
    if (spec.bins == 0 || !(spec.hi > spec.lo)) {
        throw std::invalid_argument("histogram: need bins > 0 and hi > lo");
    }
    Histogram h;
    h.spec = spec;
    h.mass.assign(spec.bins, 0.0);
    if (values.empty()) return h;

    const double width = (spec.hi - spec.lo) / static_cast<double>(spec.bins);
    std::vector<std::size_t> counts(spec.bins, 0);
    std::size_t under = 0;
    std::size_t over = 0;
    for (const double v : values) {
        if (v < spec.lo) {
            ++under;
        } else if (v > spec.hi) {
            ++over;
        } else {
            auto b = static_cast<std::size_t>((v - spec.lo) / width);
            counts[std::min(b, spec.bins - 1)]++;
        }
    }
    const auto total = static_cast<double>(values.size());
    for (std::size_t b = 0; b < spec.bins; ++b) h.mass[b] = static_cast<double>(counts[b]) / total;
    h.underflow = static_cast<double>(under) / total;
    h.overflow = static_cast<double>(over) / total;
    return h;
}

std::span<const StepRecord> after_burn_in(std::span<const StepRecord> records, std::int64_t burn_in) {
    auto first = std::find_if(records.begin(), records.end(), [burn_in](const StepRecord& r) { return r.t > burn_in; });
    return records.subspan(static_cast<std::size_t>(first - records.begin()));
}

RunStatistics compute_statistics(std::span<const StepRecord> records, const StatsConfig& config) {
    RunStatistics st;
    st.n_records = records.size();
    std::vector<double> returns(records.size());
    std::transform(records.begin(), records.end(), returns.begin(), [](const StepRecord& r) { return r.ret; });
    std::vector<double> abs_returns(returns.size());
    std::transform(returns.begin(), returns.end(), abs_returns.begin(), [](double r) { return std::abs(r); });
    const auto mean_k = mean_k_trace(records);

    st.return_histogram = histogram(returns, config.return_bins);
    st.mean_k_histogram = histogram(mean_k, config.mean_k_bins);
    if (records.empty()) return st;

    st.max_mean_k = max_mean_k(records);
    const auto runs = extremal_runs(returns);
    st.max_drawdown = runs.max_drawdown;
    st.max_drawup = runs.max_drawup;

    try {
        st.kurtosis = excess_kurtosis(returns);
    } catch (const AnalyticsError&) {
        st.kurtosis = 0.0;
    }
    auto try_acf = [&](std::span<const double> series) -> std::vector<double> {
        if (series.size() <= 4 * config.acf_max_lag) return {};
        try {
            return autocorrelation(series, config.acf_max_lag);
        } catch (const AnalyticsError&) {
            return {};
        }
    };
    st.return_acf = try_acf(returns);
    st.vol_acf = try_acf(abs_returns);
    return st;
}

}  // namespace amkt
