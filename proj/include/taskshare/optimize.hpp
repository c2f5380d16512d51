#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "taskshare/error.hpp"

namespace taskshare::optimize {

struct NelderMeadOptions {
    double initial_step = 0.1;
    double f_tol = 1e-12;  // relative spread of vertex values
    double x_tol = 1e-9;   // max vertex distance from the best vertex
    std::size_t max_iterations = 5000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::vector<double> best_trace;  // best vertex value after each iteration
};

/// Derivative-free downhill simplex (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Non-finite objective values are treated as +infinity.
[[nodiscard]] inline NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                                  std::vector<double> x0, const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    if (n == 0) {
        res.value = eval(x0);
        res.x = std::move(x0);
        res.converged = true;
        return res;
    }

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = x0[i] != 0.0 ? opt.initial_step * std::max(1.0, std::abs(x0[i])) : opt.initial_step;
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);
    if (!std::isfinite(values[0])) throw Error(Errc::InvalidArgument, "objective is not finite at the start point");

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n);
    std::vector<double> trial(n);
    auto point = [&](double coef, const std::vector<double>& worst, std::vector<double>& out) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (worst[j] - centroid[j]);
    };

    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        double spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                spread = std::max(spread, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        const double fspread = values[worst] - values[best];
        // a simplex lying on a plateau (fspread == 0) cannot make progress either
        if ((fspread <= opt.f_tol * (std::abs(values[best]) + 1e-300) && spread <= opt.x_tol) || fspread == 0.0) {
            res.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        point(-1.0, simplex[worst], trial);
        const double f_reflect = eval(trial);
        if (f_reflect < values[best]) {
            std::vector<double> expanded(n);
            point(-2.0, simplex[worst], expanded);
            const double f_expand = eval(expanded);
            if (f_expand < f_reflect) {
                simplex[worst] = std::move(expanded);
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
        } else if (f_reflect < values[second_worst]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
        } else {
            const bool outside = f_reflect < values[worst];
            std::vector<double> contracted(n);
            point(outside ? -0.5 : 0.5, simplex[worst], contracted);
            const double f_contract = eval(contracted);
            if (f_contract < (outside ? f_reflect : values[worst])) {
                simplex[worst] = std::move(contracted);
                values[worst] = f_contract;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j) {
                        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
                    }
                    values[i] = eval(simplex[i]);
                }
            }
        }
        res.best_trace.push_back(*std::min_element(values.begin(), values.end()));
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    res.x = simplex[best];
    res.value = values[best];
    return res;
}

}  // namespace taskshare::optimize
