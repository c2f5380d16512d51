#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "taskshare/analysis.hpp"
#include "taskshare/arima.hpp"
#include "taskshare/error.hpp"
#include "taskshare/month.hpp"
#include "taskshare/shares.hpp"

namespace taskshare {

inline constexpr double kZ95 = 1.96;

struct ForecastPoint {
    std::size_t index = 0;  // position in the series
    double mean = 0.0;
    double lower95 = 0.0;
    double upper95 = 0.0;
    std::optional<double> actual;
};

/**
 * One-step-ahead forecasts for positions holdout_start .. size-1. Each mean
 * conditions on the actual observations before its position with the model
 * parameters frozen; the interval is mean +/- z * sqrt(sigma2).
 */
[[nodiscard]] inline std::vector<ForecastPoint> rolling_one_step(std::span<const double> series,
                                                                 const ArimaModel& model,
                                                                 std::size_t holdout_start, double z = kZ95) {
    if (holdout_start >= series.size()) throw Error(Errc::InvalidArgument, "holdout is empty");
    if (model.train_end > holdout_start) {
        throw Error(Errc::InvalidArgument, "model was trained on data at or after the holdout start");
    }
    const int p = model.order.p;
    const int d = model.order.d;
    const int q = model.order.q;
    if (static_cast<std::ptrdiff_t>(holdout_start) - d < p || static_cast<int>(holdout_start) < d) {
        throw Error(Errc::InvalidArgument, "not enough history before the holdout start");
    }

    const auto w = difference(series, d);
    const auto e = arma_residuals(w, model.ar_coeffs, model.ma_coeffs, model.intercept);
    std::vector<double> int_weights(d + 1);
    for (int k = 1; k <= d; ++k) int_weights[k] = binomial(d, k) * ((k % 2) ? -1.0 : 1.0);
    const double half = z * std::sqrt(model.sigma2);

    std::vector<ForecastPoint> out;
    out.reserve(series.size() - holdout_start);
    for (std::size_t t = holdout_start; t < series.size(); ++t) {
        const std::size_t j = t - static_cast<std::size_t>(d);  // position in w
        double wh = model.intercept;
        for (int i = 0; i < p; ++i) wh += model.ar_coeffs[i] * (w[j - 1 - i] - model.intercept);
        for (int k = 0; k < q && static_cast<std::size_t>(k) < j; ++k) wh += model.ma_coeffs[k] * e[j - 1 - k];
        // x_t = w_j - sum_{k>=1} C(d,k) (-1)^k x_{t-k}
        double xh = wh;
        for (int k = 1; k <= d; ++k) xh -= int_weights[k] * series[t - k];
        out.push_back({t, xh, xh - half, xh + half, series[t]});
    }
    return out;
}

struct MapeResult {
    double mape = 0.0;  // percent
    std::size_t n_used = 0;
    std::size_t n_zero_excluded = 0;
};

/// 100 * mean |actual - mean| / |actual| over points with a nonzero actual.
[[nodiscard]] inline MapeResult mape(std::span<const ForecastPoint> points) {
    MapeResult r;
    double sum = 0.0;
    for (const auto& pt : points) {
        if (!pt.actual) throw Error(Errc::InvalidArgument, "forecast point without an actual value");
        if (*pt.actual == 0.0) {
            ++r.n_zero_excluded;
            continue;
        }
        sum += std::abs(*pt.actual - pt.mean) / std::abs(*pt.actual);
        ++r.n_used;
    }
    if (r.n_used == 0) throw Error(Errc::NoValidPoints, "no forecast points with nonzero actuals");
    r.mape = 100.0 * sum / static_cast<double>(r.n_used);
    return r;
}

struct EvaluationRow {
    std::string family;
    std::string tercile;
    double mape = 0.0;
    std::size_t n_forecasts = 0;
    std::size_t n_zero_excluded = 0;
    ArimaOrder order;
};

struct SuiteOptions {
    MonthWindow window{};
    std::size_t train_months = 72;
    std::size_t smoothing_window = 3;  // 1 forecasts the raw series
    std::optional<ArimaOrder> order;   // pins the order; otherwise AIC over `grid`
    std::vector<ArimaOrder> grid = default_order_grid();
    double z = kZ95;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct SeriesForecast {
    SeriesKey key;
    std::vector<double> input;  // the (smoothed) window slice that was modelled
    ArimaModel model;
    std::vector<ForecastPoint> points;
    EvaluationRow row;
};

struct SuiteResult {
    std::vector<SeriesForecast> series;                      // key order
    std::vector<std::pair<SeriesKey, std::string>> failures;  // key order
    std::vector<SeriesKey> skipped;                          // all-zero in window
};

namespace detail {

[[nodiscard]] inline SeriesForecast forecast_one(const SeriesKey& key, const MonthlySeries& values,
                                                 const SuiteOptions& opt) {
    const auto first = static_cast<std::size_t>(opt.window.first.ordinal());
    std::vector<double> slice(values.begin() + static_cast<std::ptrdiff_t>(first),
                              values.begin() + static_cast<std::ptrdiff_t>(first + opt.window.size()));
    if (opt.smoothing_window > 1) slice = moving_average(slice, opt.smoothing_window);

    SeriesForecast f;
    f.key = key;
    f.input = slice;
    const std::span<const double> train(slice.data(), opt.train_months);
    const auto order = opt.order ? *opt.order : select_order(train, opt.grid);
    f.model = fit_arima(train, order);
    f.points = rolling_one_step(slice, f.model, opt.train_months, opt.z);
    const auto m = mape(f.points);
    f.row = {key.first, key.second, m.mape, f.points.size(), m.n_zero_excluded, f.model.order};
    return f;
}

}  // namespace detail

/**
 * @brief Per-series order selection, fit on the first train_months of the
 * window, rolling one-step forecasts over the rest and MAPE.
 *
 * Series are processed in parallel; results come back in key order. A failing
 * series is listed in `failures` and does not stop the run.
 */
[[nodiscard]] inline SuiteResult forecast_suite(const SeriesSet& set, const SuiteOptions& opt) {
    if (!opt.window.valid()) throw Error(Errc::InvalidArgument, "invalid window");
    if (opt.train_months == 0 || opt.train_months >= static_cast<std::size_t>(opt.window.size())) {
        throw Error(Errc::InvalidArgument, "train_months must be in [1, window length)");
    }
    SuiteResult result;
    std::vector<std::pair<SeriesKey, const MonthlySeries*>> work;
    for (const auto& [key, values] : set) {
        const auto b = values.begin() + opt.window.first.ordinal();
        const auto e = values.begin() + opt.window.last.ordinal() + 1;
        if (std::all_of(b, e, [](double v) { return v == 0.0; })) {
            result.skipped.push_back(key);
        } else {
            work.emplace_back(key, &values);
        }
    }

    struct Outcome {
        std::optional<SeriesForecast> forecast;
        std::string error;
    };
    std::vector<Outcome> outcomes(work.size());
    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, work.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
            try {
                outcomes[i].forecast = detail::forecast_one(work[i].first, *work[i].second, opt);
            } catch (const Error& e) {
                outcomes[i].error = std::string(to_string(e.code())) + ": " + e.what();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < work.size(); ++i) {
        if (outcomes[i].forecast) {
            result.series.push_back(std::move(*outcomes[i].forecast));
        } else {
            result.failures.emplace_back(work[i].first, std::move(outcomes[i].error));
        }
    }
    return result;
}

}  // namespace taskshare
