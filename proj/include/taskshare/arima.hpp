#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "taskshare/csv.hpp"
#include "taskshare/error.hpp"
#include "taskshare/optimize.hpp"

namespace taskshare {

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;

    [[nodiscard]] int total() const noexcept { return p + d + q; }

    [[nodiscard]] std::string to_string() const {
        return std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q);
    }

    /// "p,d,q"
    [[nodiscard]] static ArimaOrder parse(std::string_view text) {
        std::vector<int> parts;
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto end = std::min(text.find(',', start), text.size());
            const auto v = csv::parse_int(text.substr(start, end - start));
            if (!v || *v < 0 || *v > 10) {
                throw Error(Errc::InvalidArgument, "bad ARIMA order '" + std::string(text) + "' (expected p,d,q)");
            }
            parts.push_back(static_cast<int>(*v));
            start = end + 1;
        }
        if (parts.size() != 3) {
            throw Error(Errc::InvalidArgument, "bad ARIMA order '" + std::string(text) + "' (expected p,d,q)");
        }
        return {parts[0], parts[1], parts[2]};
    }

    friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

[[nodiscard]] inline std::vector<ArimaOrder> default_order_grid() {
    std::vector<ArimaOrder> grid;
    for (int d = 0; d <= 1; ++d) {
        for (int p = 0; p <= 2; ++p) {
            for (int q = 0; q <= 2; ++q) grid.push_back({p, d, q});
        }
    }
    return grid;
}

/**
 * @brief A fitted ARIMA(p,d,q) model.
 *
 * With w = d-fold difference of the series and mu the process mean of w
 * (estimated only when d == 0, otherwise 0):
 *
 *   (w_t - mu) = sum_i ar[i] (w_{t-1-i} - mu) + e_t + sum_j ma[j] e_{t-1-j}
 */
struct ArimaModel {
    ArimaOrder order;
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double intercept = 0.0;  // mean of the differenced series
    double sigma2 = 0.0;
    double css = 0.0;
    std::size_t n_residuals = 0;  // terms in the conditional sum of squares
    std::size_t train_begin = 0;  // training span [train_begin, train_end) in series positions
    std::size_t train_end = 0;
    std::vector<std::string> warnings;
    std::vector<double> css_trace;  // optimizer's best objective per iteration (standardized scale)

    /// n ln(CSS/n) + 2 (p + q + 1)
    [[nodiscard]] double aic() const {
        const double n = static_cast<double>(n_residuals);
        if (css <= 0.0) return -std::numeric_limits<double>::infinity();
        return n * std::log(css / n) + 2.0 * static_cast<double>(order.p + order.q + 1);
    }
};

// ---------------------------------------------------------------------------
// Differencing

[[nodiscard]] inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

/// d-fold first difference; the result is d elements shorter.
[[nodiscard]] inline std::vector<double> difference(std::span<const double> x, int d) {
    if (d < 0) throw Error(Errc::InvalidArgument, "negative differencing order");
    std::vector<double> out(x.begin(), x.end());
    for (int k = 0; k < d; ++k) {
        if (out.size() < 2) throw Error(Errc::SeriesTooShort, "series too short to difference");
        for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t] = out[t + 1] - out[t];
        out.pop_back();
    }
    return out;
}

/// Inverse of difference(): rebuilds x from its d-th difference and the first d values.
[[nodiscard]] inline std::vector<double> integrate(std::span<const double> diffs, int d,
                                                   std::span<const double> initial) {
    if (static_cast<int>(initial.size()) != d) {
        throw Error(Errc::InvalidArgument, "integrate needs exactly d initial values");
    }
    // Each level k is rebuilt from the level above plus its own first value,
    // which is the k-th difference of the initial values.
    std::vector<std::vector<double>> heads(d);
    std::vector<double> level(initial.begin(), initial.end());
    for (int k = 0; k < d; ++k) {
        heads[k] = level;
        for (std::size_t t = 0; t + 1 < level.size(); ++t) level[t] = level[t + 1] - level[t];
        if (!level.empty()) level.pop_back();
    }
    std::vector<double> cur(diffs.begin(), diffs.end());
    for (int k = d - 1; k >= 0; --k) {
        std::vector<double> up;
        up.reserve(cur.size() + 1);
        up.push_back(heads[k].front());
        for (double v : cur) up.push_back(up.back() + v);
        cur = std::move(up);
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Polynomial parametrization

/// Partial autocorrelations in (-1,1) -> coefficients of a stationary
/// 1 - sum c_i z^i (Durbin-Levinson).
[[nodiscard]] inline std::vector<double> pacf_to_coeffs(std::span<const double> r) {
    std::vector<double> c;
    for (std::size_t k = 0; k < r.size(); ++k) {
        std::vector<double> next(k + 1);
        for (std::size_t j = 0; j < k; ++j) next[j] = c[j] - r[k] * c[k - 1 - j];
        next[k] = r[k];
        c = std::move(next);
    }
    return c;
}

/// Step-down recursion, inverse of pacf_to_coeffs. Returns nullopt when some
/// |partial autocorrelation| >= 1, i.e. 1 - sum c_i z^i has a root on or inside
/// the unit circle.
[[nodiscard]] inline std::optional<std::vector<double>> coeffs_to_pacf(std::span<const double> coeffs) {
    std::vector<double> c(coeffs.begin(), coeffs.end());
    std::vector<double> r(c.size());
    for (std::size_t k = c.size(); k-- > 0;) {
        const double rk = c[k];
        if (!(std::abs(rk) < 1.0)) return std::nullopt;
        r[k] = rk;
        const double denom = 1.0 - rk * rk;
        std::vector<double> prev(k);
        for (std::size_t j = 0; j < k; ++j) prev[j] = (c[j] + rk * c[k - 1 - j]) / denom;
        c = std::move(prev);
    }
    return r;
}

/// All roots of 1 - sum ar_i z^i outside the unit circle.
[[nodiscard]] inline bool is_stationary(std::span<const double> ar) { return coeffs_to_pacf(ar).has_value(); }

/// All roots of 1 + sum ma_j z^j outside the unit circle.
[[nodiscard]] inline bool is_invertible(std::span<const double> ma) {
    std::vector<double> neg(ma.size());
    std::transform(ma.begin(), ma.end(), neg.begin(), [](double v) { return -v; });
    return coeffs_to_pacf(neg).has_value();
}

// ---------------------------------------------------------------------------
// Conditional sum of squares

/// Innovations e_t of an ARMA on an already differenced series. e_t = 0 for
/// t < p and pre-sample innovations are 0.
[[nodiscard]] inline std::vector<double> arma_residuals(std::span<const double> w, std::span<const double> ar,
                                                        std::span<const double> ma, double mu) {
    const std::size_t p = ar.size();
    const std::size_t q = ma.size();
    std::vector<double> e(w.size(), 0.0);
    for (std::size_t t = p; t < w.size(); ++t) {
        double v = w[t] - mu;
        for (std::size_t i = 0; i < p; ++i) v -= ar[i] * (w[t - 1 - i] - mu);
        for (std::size_t j = 0; j < q && j < t; ++j) v -= ma[j] * e[t - 1 - j];
        e[t] = v;
    }
    return e;
}

[[nodiscard]] inline double conditional_sum_of_squares(std::span<const double> w, std::span<const double> ar,
                                                       std::span<const double> ma, double mu) {
    const auto e = arma_residuals(w, ar, ma, mu);
    double css = 0.0;
    for (std::size_t t = ar.size(); t < e.size(); ++t) css += e[t] * e[t];
    return css;
}

namespace detail {

// Least squares via column-pivoting QR; rows are observations.
[[nodiscard]] inline std::optional<Eigen::VectorXd> least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() <= X.cols() || X.cols() == 0) return std::nullopt;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) return std::nullopt;
    Eigen::VectorXd beta = qr.solve(y);
    if (!beta.allFinite()) return std::nullopt;
    return beta;
}

// Shrinks coefficients toward zero until their polynomial is stationary.
[[nodiscard]] inline std::vector<double> shrink_to_stationary(std::vector<double> c) {
    for (int k = 0; k < 50 && !coeffs_to_pacf(c); ++k) {
        for (auto& v : c) v *= 0.9;
    }
    if (!coeffs_to_pacf(c)) std::fill(c.begin(), c.end(), 0.0);
    return c;
}

}  // namespace detail

struct ArmaInit {
    std::vector<double> ar;
    std::vector<double> ma;
};

/**
 * @brief Hannan-Rissanen starting values for a zero-mean ARMA(p,q).
 *
 * Fits a long autoregression by least squares, then regresses w_t on its
 * own lags and on the long-AR residual lags. Falls back to zeros when the
 * regressions are not identifiable on the available data.
 */
[[nodiscard]] inline ArmaInit hannan_rissanen(std::span<const double> w, int p, int q) {
    ArmaInit init{std::vector<double>(p, 0.0), std::vector<double>(q, 0.0)};
    const auto n = static_cast<std::ptrdiff_t>(w.size());
    if (p == 0 && q == 0) return init;

    std::vector<double> resid(w.size(), 0.0);
    std::ptrdiff_t start = 0;
    if (q > 0) {
        const auto m = std::max<std::ptrdiff_t>(
            p + q, std::min<std::ptrdiff_t>(n / 4, static_cast<std::ptrdiff_t>(10.0 * std::log10(double(n)))));
        if (n - m <= m + 1) return init;
        Eigen::MatrixXd X(n - m, m);
        Eigen::VectorXd y(n - m);
        for (std::ptrdiff_t t = m; t < n; ++t) {
            y(t - m) = w[t];
            for (std::ptrdiff_t i = 0; i < m; ++i) X(t - m, i) = w[t - 1 - i];
        }
        const auto beta = detail::least_squares(X, y);
        if (!beta) return init;
        const Eigen::VectorXd fitted = X * (*beta);
        for (std::ptrdiff_t t = m; t < n; ++t) resid[t] = y(t - m) - fitted(t - m);
        start = m + q;
    } else {
        start = p;
    }
    start = std::max<std::ptrdiff_t>(start, p);
    const auto rows = n - start;
    const auto cols = static_cast<std::ptrdiff_t>(p + q);
    if (rows <= cols + 1) return init;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    for (std::ptrdiff_t t = start; t < n; ++t) {
        y(t - start) = w[t];
        for (int i = 0; i < p; ++i) X(t - start, i) = w[t - 1 - i];
        for (int j = 0; j < q; ++j) X(t - start, p + j) = resid[t - 1 - j];
    }
    const auto beta = detail::least_squares(X, y);
    if (!beta) return init;
    for (int i = 0; i < p; ++i) init.ar[i] = (*beta)(i);
    for (int j = 0; j < q; ++j) init.ma[j] = (*beta)(p + j);
    init.ar = detail::shrink_to_stationary(init.ar);
    std::vector<double> neg(q);
    for (int j = 0; j < q; ++j) neg[j] = -init.ma[j];
    neg = detail::shrink_to_stationary(neg);
    for (int j = 0; j < q; ++j) init.ma[j] = -neg[j];
    return init;
}

// ---------------------------------------------------------------------------
// Fitting

struct ArimaFitOptions {
    std::size_t max_iterations = 5000;
    double f_tol = 1e-12;
    double x_tol = 1e-8;
};

namespace detail {

// Unconstrained parameter u -> partial autocorrelation; clamped so the
// polynomial stays strictly inside the stationary region.
inline constexpr double kMaxRaw = 7.5;

[[nodiscard]] inline std::vector<double> raw_to_coeffs(std::span<const double> u) {
    std::vector<double> r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = std::tanh(std::clamp(u[i], -kMaxRaw, kMaxRaw));
    return pacf_to_coeffs(r);
}

[[nodiscard]] inline std::vector<double> coeffs_to_raw(std::span<const double> c) {
    const auto r = coeffs_to_pacf(c);
    std::vector<double> u(c.size(), 0.0);
    if (!r) return u;
    for (std::size_t i = 0; i < c.size(); ++i) u[i] = std::atanh(std::clamp((*r)[i], -0.999, 0.999));
    return u;
}

[[nodiscard]] inline std::vector<double> negated(std::vector<double> v) {
    for (auto& x : v) x = -x;
    return v;
}

}  // namespace detail

/**
 * @brief Fits ARIMA(p,d,q) by conditional sum of squares.
 *
 * The series is differenced d times and standardized; AR and MA
 * coefficients are searched through their partial autocorrelations so every
 * candidate is stationary and invertible. Starting values come from
 * Hannan-Rissanen, the search is Nelder-Mead.
 *
 * A series whose differences are constant cannot identify p or q; it is fit
 * as (0,d,0) with a warning.
 */
[[nodiscard]] inline ArimaModel fit_arima(std::span<const double> series, ArimaOrder order,
                                          const ArimaFitOptions& opt = {}) {
    if (order.p < 0 || order.d < 0 || order.q < 0) throw Error(Errc::InvalidArgument, "negative ARIMA order");
    const std::size_t need = 3 * static_cast<std::size_t>(order.total()) + 10;
    if (series.size() < need) {
        throw Error(Errc::SeriesTooShort, "ARIMA(" + order.to_string() + ") needs at least " + std::to_string(need) +
                                              " points, got " + std::to_string(series.size()));
    }
    for (double v : series) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "series contains non-finite values");
    }

    ArimaModel model;
    model.order = order;
    model.train_begin = 0;
    model.train_end = series.size();

    const auto w = difference(series, order.d);
    const double n = static_cast<double>(w.size());
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= n;
    const bool with_mean = order.d == 0;

    auto finish_plain = [&](ArimaModel& m) {
        m.ar_coeffs.assign(m.order.p, 0.0);
        m.ma_coeffs.assign(m.order.q, 0.0);
        m.intercept = with_mean ? mean : 0.0;
        m.css = conditional_sum_of_squares(w, {}, {}, m.intercept);
        m.n_residuals = w.size();
        m.sigma2 = m.css / static_cast<double>(m.n_residuals);
    };

    if (!(var > 0.0) || std::sqrt(var) <= 1e-14 * std::max(1.0, std::abs(mean))) {
        if (order.p + order.q > 0) {
            model.warnings.push_back("constant series: fitting (0," + std::to_string(order.d) + ",0) instead of (" +
                                     order.to_string() + ")");
            model.order = {0, order.d, 0};
        }
        finish_plain(model);
        return model;
    }
    if (order.p + order.q == 0) {
        finish_plain(model);
        return model;
    }

    const double sd = std::sqrt(var);
    std::vector<double> z(w.size());
    for (std::size_t t = 0; t < w.size(); ++t) z[t] = (w[t] - mean) / sd;

    const int p = order.p;
    const int q = order.q;
    const auto init = hannan_rissanen(z, p, q);
    std::vector<double> x0;
    for (double v : detail::coeffs_to_raw(init.ar)) x0.push_back(v);
    for (double v : detail::coeffs_to_raw(detail::negated(init.ma))) x0.push_back(v);
    if (with_mean) x0.push_back(0.0);

    auto unpack = [&](std::span<const double> x, std::vector<double>& ar, std::vector<double>& ma, double& mu) {
        ar = detail::raw_to_coeffs(x.subspan(0, p));
        ma = detail::negated(detail::raw_to_coeffs(x.subspan(p, q)));
        mu = with_mean ? x[p + q] : 0.0;
    };
    auto objective = [&](std::span<const double> x) {
        std::vector<double> ar, ma;
        double mu = 0.0;
        unpack(x, ar, ma, mu);
        return conditional_sum_of_squares(z, ar, ma, mu);
    };

    optimize::NelderMeadOptions nm;
    nm.max_iterations = opt.max_iterations;
    nm.f_tol = opt.f_tol;
    nm.x_tol = opt.x_tol;
    nm.initial_step = 0.1;
    auto res = optimize::nelder_mead(objective, x0, nm);
    if (res.converged) {
        // restart from the optimum to escape a collapsed simplex
        auto again = optimize::nelder_mead(objective, res.x, nm);
        if (again.value <= res.value) {
            res.best_trace.insert(res.best_trace.end(), again.best_trace.begin(), again.best_trace.end());
            again.best_trace = std::move(res.best_trace);
            res = std::move(again);
        }
    }
    if (!res.converged) {
        throw Error(Errc::ConvergenceFailure, "CSS optimizer did not converge within " +
                                                  std::to_string(opt.max_iterations) + " iterations");
    }

    double mu_std = 0.0;
    unpack(res.x, model.ar_coeffs, model.ma_coeffs, mu_std);
    model.intercept = with_mean ? mean + sd * mu_std : 0.0;
    model.css_trace = std::move(res.best_trace);
    model.css = conditional_sum_of_squares(w, model.ar_coeffs, model.ma_coeffs, model.intercept);
    model.n_residuals = w.size() - static_cast<std::size_t>(p);
    model.sigma2 = model.css / static_cast<double>(model.n_residuals);

    if (!is_stationary(model.ar_coeffs)) throw Error(Errc::ModelRejected, "fitted AR part is not stationary");
    if (!is_invertible(model.ma_coeffs)) throw Error(Errc::ModelRejected, "fitted MA part is not invertible");
    if (!std::isfinite(model.sigma2) || model.sigma2 < 0.0) {
        throw Error(Errc::ModelRejected, "fitted innovation variance is not finite");
    }
    return model;
}

/// Order with the smallest AIC among candidates that fit; ties go to the
/// smaller p+q+d, then to grid order.
[[nodiscard]] inline ArimaOrder select_order(std::span<const double> series, std::span<const ArimaOrder> grid,
                                             const ArimaFitOptions& opt = {}) {
    if (grid.empty()) throw Error(Errc::InvalidArgument, "empty ARIMA order grid");
    std::optional<ArimaOrder> best;
    double best_aic = std::numeric_limits<double>::infinity();
    std::string last_error;
    for (const auto& order : grid) {
        try {
            const auto model = fit_arima(series, order, opt);
            if (!(model.order == order)) continue;  // degenerate fallback, not a fit of this candidate
            const double aic = model.aic();
            const bool better = !best || aic < best_aic - 1e-12 ||
                                (std::abs(aic - best_aic) <= 1e-12 && order.total() < best->total());
            if (better) {
                best = order;
                best_aic = aic;
            }
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (!best) {
        // Every candidate failed or degenerated; a constant series still has a (0,d,0) fit.
        for (const auto& order : grid) {
            if (order.p + order.q == 0) return order;
        }
        throw Error(Errc::ConvergenceFailure, "no ARIMA candidate could be fit: " + last_error);
    }
    return *best;
}

}  // namespace taskshare
