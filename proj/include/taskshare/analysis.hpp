#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskshare/error.hpp"
#include "taskshare/shares.hpp"

namespace taskshare {

/**
 * @brief Centered moving average with truncated edges.
 *
 * For odd `window` the value at t averages t-(w-1)/2 .. t+(w-1)/2, clipped to
 * the series; for even `window` the extra point is taken on the left. Output
 * has the input's length.
 */
[[nodiscard]] inline std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
    if (window < 1 || window > series.size()) {
        throw Error(Errc::InvalidArgument, "moving-average window must be in [1, length]");
    }
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    const auto left = static_cast<std::ptrdiff_t>(window / 2);
    const auto right = static_cast<std::ptrdiff_t>(window - 1) - left;
    std::vector<double> out(series.size());
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        const auto lo = std::max<std::ptrdiff_t>(0, t - left);
        const auto hi = std::min<std::ptrdiff_t>(n - 1, t + right);
        double sum = 0.0;
        for (auto k = lo; k <= hi; ++k) sum += series[k];
        out[t] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

enum class TimeScale {
    Unit,   // time rescaled to [0, 1]; slope = fitted change over the whole window
    Month,  // time in months; slope = fitted change per month
};

[[nodiscard]] constexpr std::string_view to_string(TimeScale s) noexcept {
    return s == TimeScale::Unit ? "unit" : "month";
}

[[nodiscard]] inline TimeScale parse_time_scale(std::string_view text) {
    if (text == "unit") return TimeScale::Unit;
    if (text == "month") return TimeScale::Month;
    throw Error(Errc::InvalidArgument, "trend time scale must be 'unit' or 'month'");
}

struct TrendCoefficient {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t n_points = 0;
};

/// Ordinary least squares of the series against its time index.
[[nodiscard]] inline TrendCoefficient trend_coefficient(std::span<const double> series,
                                                        TimeScale scale = TimeScale::Unit) {
    const std::size_t n = series.size();
    if (n < 2) throw Error(Errc::SeriesTooShort, "trend needs at least 2 points");
    const double step = scale == TimeScale::Unit ? 1.0 / static_cast<double>(n - 1) : 1.0;
    const double half = 0.5 * static_cast<double>(n - 1);
    const double y_mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    // Centred index d_k = k - half is antisymmetric, so pairing k with n-1-k
    // gives sum d_k y_k without a mean subtraction; a flat series yields exactly 0.
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double d = static_cast<double>(k) - half;
        sxy += d * (series[k] - series[n - 1 - k]);
        sxx += 2.0 * d * d;
    }
    TrendCoefficient out;
    out.slope = sxy / sxx / step;
    out.intercept = y_mean - out.slope * half * step;
    out.n_points = n;
    if (!std::isfinite(out.slope)) throw Error(Errc::InvalidArgument, "non-finite trend slope");
    return out;
}

enum class RankBy { MeanLevel, Slope };

/// Top-k keys of one level by mean level or by trend slope, largest first;
/// ties keep key order.
[[nodiscard]] inline std::vector<SeriesKey> rank_series(const SeriesSet& set, ShareLevel level, RankBy by,
                                                        int k, TimeScale scale = TimeScale::Unit) {
    if (k <= 0) throw Error(Errc::InvalidArgument, "rank_series: k must be positive");
    std::vector<std::pair<double, SeriesKey>> scored;
    for (const auto& [key, values] : set) {
        if (key.level != level) continue;
        const double score =
            by == RankBy::MeanLevel
                ? std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size())
                : trend_coefficient(values, scale).slope;
        scored.emplace_back(score, key);
    }
    if (scored.empty()) throw Error(Errc::InvalidArgument, "rank_series: no series at requested level");
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<SeriesKey> out;
    for (std::size_t i = 0; i < scored.size() && i < static_cast<std::size_t>(k); ++i) {
        out.push_back(scored[i].second);
    }
    return out;
}

}  // namespace taskshare
