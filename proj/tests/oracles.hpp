#pragma once

// Test-only reference implementations. Nothing here calls into the library's
// computational paths; they exist to check those paths independently.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

/// Gaussian ARMA(p,q) sample path with mean mu, after `burn` discarded steps.
inline std::vector<double> simulate_arma(const std::vector<double>& phi, const std::vector<double>& theta, double mu,
                                         double sigma, std::size_t n, std::uint64_t seed, std::size_t burn = 200) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    const std::size_t total = n + burn;
    std::vector<double> x(total, 0.0);
    std::vector<double> e(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        e[t] = noise(rng);
        double v = e[t];
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (t > i) v += phi[i] * x[t - 1 - i];
        }
        for (std::size_t j = 0; j < theta.size(); ++j) {
            if (t > j) v += theta[j] * e[t - 1 - j];
        }
        x[t] = v;
    }
    std::vector<double> out(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end());
    for (auto& v : out) v += mu;
    return out;
}

struct Line {
    double slope;
    double intercept;
};

/// Textbook OLS from raw sums: slope = (n Sxy - Sx Sy) / (n Sxx - Sx^2).
inline Line closed_form_ols(const std::vector<double>& x, const std::vector<double>& y) {
    long double n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0, sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
    }
    const long double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const long double intercept = (sy - slope * sx) / n;
    return {static_cast<double>(slope), static_cast<double>(intercept)};
}

/// Dense brute-force evaluation of z, e, y and both aggregations.
struct ToyCorpus {
    int tasks = 0;
    int occs = 0;
    int months = 0;
    std::vector<std::string> task_family;  // per task
    std::vector<std::string> task_cluster;
    std::vector<std::string> occ_family;   // per occupation
    std::vector<std::string> occ_tercile;
    // postings[j][t] = list of postings, each a list of task indices (may repeat)
    std::vector<std::vector<std::vector<std::vector<int>>>> postings;
    std::vector<std::vector<double>> employment;  // [j][t]
};

struct ToyResult {
    std::vector<std::vector<std::vector<double>>> y;  // [i][j][t]
    std::vector<std::vector<double>> e;               // [j][t]
    std::map<std::pair<std::string, std::string>, std::vector<double>> by_family;
    std::map<std::pair<std::string, std::string>, std::vector<double>> by_tercile;
    std::map<std::pair<std::string, std::string>, std::vector<double>> by_cluster;
};

inline ToyResult brute_force(const ToyCorpus& c) {
    ToyResult r;
    r.y.assign(c.tasks, std::vector<std::vector<double>>(c.occs, std::vector<double>(c.months, 0.0)));
    r.e.assign(c.occs, std::vector<double>(c.months, 0.0));
    for (int t = 0; t < c.months; ++t) {
        double total = 0.0;
        for (int j = 0; j < c.occs; ++j) total += c.employment[j][t];
        for (int j = 0; j < c.occs; ++j) r.e[j][t] = c.employment[j][t] / total;
    }
    for (int i = 0; i < c.tasks; ++i) {
        for (int j = 0; j < c.occs; ++j) {
            for (int t = 0; t < c.months; ++t) {
                const auto& posts = c.postings[j][t];
                if (posts.empty()) continue;
                int n = 0;
                for (const auto& p : posts) {
                    bool mentioned = false;
                    for (int k : p) mentioned = mentioned || k == i;
                    n += mentioned ? 1 : 0;
                }
                const double z = static_cast<double>(n) / static_cast<double>(posts.size());
                r.y[i][j][t] = r.e[j][t] * z;
            }
        }
    }
    auto add = [&](auto& m, const std::string& a, const std::string& b, int i, int j) {
        auto& s = m.try_emplace({a, b}, std::vector<double>(c.months, 0.0)).first->second;
        for (int t = 0; t < c.months; ++t) s[t] += r.y[i][j][t];
    };
    for (int i = 0; i < c.tasks; ++i) {
        for (int j = 0; j < c.occs; ++j) {
            add(r.by_family, c.task_family[i], c.occ_family[j], i, j);
            add(r.by_tercile, c.task_family[i], c.occ_tercile[j], i, j);
            add(r.by_cluster, c.task_cluster[i], c.occ_tercile[j], i, j);
        }
    }
    return r;
}

}  // namespace oracle
