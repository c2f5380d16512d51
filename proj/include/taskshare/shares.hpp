#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskshare/counts.hpp"
#include "taskshare/csv.hpp"
#include "taskshare/ingest.hpp"
#include "taskshare/month.hpp"
#include "taskshare/taxonomy.hpp"

namespace taskshare {

// Occupation-task share z(i,j,t) = n / m.

struct OccupationTaskShares {
    std::map<MentionKey, double> z;  // only cells with n > 0 and m > 0
    std::uint64_t orphan_counts = 0;  // n > 0 with m == 0, omitted
};

[[nodiscard]] inline OccupationTaskShares occupation_task_share(const CountsCube& cube) {
    OccupationTaskShares out;
    for (const auto& [key, n] : cube.mention_cells()) {
        if (n == 0) continue;
        const auto m = cube.postings(key.soc, key.month);
        if (m == 0) {
            ++out.orphan_counts;
            continue;
        }
        out.z.emplace(key, static_cast<double>(n) / static_cast<double>(m));
    }
    return out;
}

// Employment share e(j,t) = E(j,t) / sum_j E(j,t).

struct EmploymentShare {
    std::map<SocCode, MonthlySeries> values;

    [[nodiscard]] double at(const SocCode& soc, MonthIndex t) const {
        auto it = values.find(soc);
        return it == values.end() ? 0.0 : it->second[t.ordinal()];
    }
};

/// Shares for every month of `window`; months outside it are left at 0.
/// Throws ZeroTotalEmployment naming the first month whose total is not positive.
[[nodiscard]] inline EmploymentShare employment_share(const MonthlyStats& stats, MonthWindow window = {}) {
    EmploymentShare out;
    for (const auto& [soc, s] : stats.employment) out.values.emplace(soc, MonthlySeries(kMonthCount, 0.0));
    for (int t = window.first.ordinal(); t <= window.last.ordinal(); ++t) {
        double total = 0.0;
        for (const auto& [soc, s] : stats.employment) total += s[t];
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw Error(Errc::ZeroTotalEmployment, "total employment is zero in " + MonthIndex(t).to_string());
        }
        for (const auto& [soc, s] : stats.employment) out.values.at(soc)[t] = s[t] / total;
    }
    return out;
}

// Series keyed at the three aggregation levels plus the cluster drill-down.

enum class ShareLevel {
    Pair,               // (task_id, soc)
    FamilyByOccFamily,  // (task family, occupation family)
    FamilyByTercile,    // (task family, wage tercile)
    ClusterByTercile,   // (task cluster, wage tercile)
};

[[nodiscard]] constexpr std::string_view to_string(ShareLevel level) noexcept {
    switch (level) {
        case ShareLevel::Pair: return "pair";
        case ShareLevel::FamilyByOccFamily: return "family_occfamily";
        case ShareLevel::FamilyByTercile: return "family_tercile";
        case ShareLevel::ClusterByTercile: return "cluster_tercile";
    }
    return "pair";
}

[[nodiscard]] inline ShareLevel parse_share_level(std::string_view text) {
    for (auto l : {ShareLevel::Pair, ShareLevel::FamilyByOccFamily, ShareLevel::FamilyByTercile,
                   ShareLevel::ClusterByTercile}) {
        if (to_string(l) == text) return l;
    }
    throw Error(Errc::MalformedInput, "unknown share level '" + std::string(text) + "'");
}

struct SeriesKey {
    ShareLevel level = ShareLevel::Pair;
    std::string first;
    std::string second;

    friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
};

/// All series at one or more levels, ordered by key; each value vector has kMonthCount entries.
using SeriesSet = std::map<SeriesKey, MonthlySeries>;

struct TaskShareResult {
    SeriesSet pairs;
    std::set<SocCode> missing_employment;  // in z but absent from e, treated as e = 0
};

/// y(i,j,t) = e(j,t) * z(i,j,t). All-zero pairs are dropped unless keep_zeros.
[[nodiscard]] inline TaskShareResult task_share(const OccupationTaskShares& z, const EmploymentShare& e,
                                                bool keep_zeros = false) {
    TaskShareResult out;
    for (const auto& [key, zv] : z.z) {
        auto& series = out.pairs.try_emplace({ShareLevel::Pair, key.task_id, key.soc.to_string()},
                                             MonthlySeries(kMonthCount, 0.0))
                           .first->second;
        auto eit = e.values.find(key.soc);
        if (eit == e.values.end()) {
            out.missing_employment.insert(key.soc);
            continue;
        }
        series[key.month.ordinal()] = eit->second[key.month.ordinal()] * zv;
    }
    if (!keep_zeros) {
        std::erase_if(out.pairs, [](const auto& kv) {
            return std::all_of(kv.second.begin(), kv.second.end(), [](double v) { return v == 0.0; });
        });
    }
    return out;
}

namespace detail {

// Resolves one pair key to its group key.
using GroupFn = std::function<std::pair<std::string, std::string>(const TaskDescriptor&, const SocCode&)>;

// Sums pair series into groups. Iteration follows the ordered pair keys, so
// every group accumulates its terms in a fixed order.
[[nodiscard]] inline SeriesSet aggregate(const SeriesSet& pairs, const TaxonomyIndex& index, ShareLevel level,
                                         const GroupFn& group) {
    SeriesSet out;
    for (const auto& [key, values] : pairs) {
        if (key.level != ShareLevel::Pair) {
            throw Error(Errc::InvalidArgument, "aggregation input must be pair-level series");
        }
        const auto& task = index.task(key.first);
        const auto soc = SocCode::parse(key.second);
        auto [g1, g2] = group(task, soc);
        auto& acc = out.try_emplace({level, std::move(g1), std::move(g2)}, MonthlySeries(kMonthCount, 0.0))
                        .first->second;
        for (int t = 0; t < kMonthCount; ++t) acc[t] += values[t];
    }
    std::erase_if(out, [](const auto& kv) {
        return std::all_of(kv.second.begin(), kv.second.end(), [](double v) { return v == 0.0; });
    });
    return out;
}

[[nodiscard]] inline std::string require_occ_family(const TaxonomyIndex& index, const SocCode& soc) {
    if (auto f = index.occupation_family(soc)) return *f;
    throw Error(Errc::UnresolvableKey, "occupation " + soc.to_string() + " not in taxonomy");
}

[[nodiscard]] inline std::string require_tercile(const TaxonomyIndex& index, const SocCode& soc) {
    if (auto r = index.tercile(soc)) return std::string(to_string(*r));
    throw Error(Errc::UnresolvableKey, "occupation " + soc.to_string() + " has no wage tercile");
}

}  // namespace detail

/// ybar(p,q,t): sum of y over tasks of family p and occupations of family q.
[[nodiscard]] inline SeriesSet aggregate_by_family(const SeriesSet& pairs, const TaxonomyIndex& index) {
    return detail::aggregate(pairs, index, ShareLevel::FamilyByOccFamily,
                             [&](const TaskDescriptor& task, const SocCode& soc) {
                                 return std::pair{task.family, detail::require_occ_family(index, soc)};
                             });
}

/// ytilde(p,r,t): sum of y over tasks of family p and occupations in tercile r.
[[nodiscard]] inline SeriesSet aggregate_by_tercile(const SeriesSet& pairs, const TaxonomyIndex& index) {
    return detail::aggregate(pairs, index, ShareLevel::FamilyByTercile,
                             [&](const TaskDescriptor& task, const SocCode& soc) {
                                 return std::pair{task.family, detail::require_tercile(index, soc)};
                             });
}

/// Same as aggregate_by_tercile one level down the task hierarchy.
[[nodiscard]] inline SeriesSet aggregate_by_cluster_tercile(const SeriesSet& pairs, const TaxonomyIndex& index) {
    return detail::aggregate(pairs, index, ShareLevel::ClusterByTercile,
                             [&](const TaskDescriptor& task, const SocCode& soc) {
                                 return std::pair{task.cluster, detail::require_tercile(index, soc)};
                             });
}

/// Largest |sum_q ybar(p,q,t) - sum_r ytilde(p,r,t)| over families and months.
[[nodiscard]] inline double mass_consistency_gap(const SeriesSet& by_family, const SeriesSet& by_tercile) {
    std::map<std::string, MonthlySeries> lhs;
    std::map<std::string, MonthlySeries> rhs;
    auto fold = [](std::map<std::string, MonthlySeries>& acc, const SeriesSet& set) {
        for (const auto& [key, values] : set) {
            auto& s = acc.try_emplace(key.first, MonthlySeries(kMonthCount, 0.0)).first->second;
            for (int t = 0; t < kMonthCount; ++t) s[t] += values[t];
        }
    };
    fold(lhs, by_family);
    fold(rhs, by_tercile);
    double gap = 0.0;
    std::set<std::string> families;
    for (const auto& [f, s] : lhs) families.insert(f);
    for (const auto& [f, s] : rhs) families.insert(f);
    const MonthlySeries zeros(kMonthCount, 0.0);
    for (const auto& f : families) {
        const auto& a = lhs.contains(f) ? lhs.at(f) : zeros;
        const auto& b = rhs.contains(f) ? rhs.at(f) : zeros;
        for (int t = 0; t < kMonthCount; ++t) gap = std::max(gap, std::abs(a[t] - b[t]));
    }
    return gap;
}

// Occupation-task pair statistics over the full window.

struct PairStats {
    std::map<std::string, std::int64_t> occs_per_task;
    std::map<SocCode, std::int64_t> tasks_per_occ;
    std::map<std::string, std::int64_t> tasks_per_family;

    friend bool operator==(const PairStats&, const PairStats&) = default;
};

[[nodiscard]] inline PairStats pair_statistics(const CountsCube& cube, const TaxonomyIndex& index) {
    std::set<std::pair<std::string, SocCode>> pairs;
    for (const auto& [key, n] : cube.mention_cells()) {
        if (n > 0) pairs.emplace(key.task_id, key.soc);
    }
    PairStats out;
    std::map<std::string, std::set<std::string>> family_tasks;
    for (const auto& [task, soc] : pairs) {
        ++out.occs_per_task[task];
        ++out.tasks_per_occ[soc];
        family_tasks[index.task(task).family].insert(task);
    }
    for (const auto& [family, tasks] : family_tasks) {
        out.tasks_per_family[family] = static_cast<std::int64_t>(tasks.size());
    }
    return out;
}

/// count value -> number of keys with that count.
template <typename K>
[[nodiscard]] std::map<std::int64_t, std::int64_t> histogram(const std::map<K, std::int64_t>& counts) {
    std::map<std::int64_t, std::int64_t> out;
    for (const auto& [k, v] : counts) ++out[v];
    return out;
}

// Persistence: `level,key1,key2,month,value`, one row per nonzero cell.

inline void write_series_csv(const SeriesSet& set, std::ostream& out) {
    csv::write_row(out, {"level", "key1", "key2", "month", "value"});
    for (const auto& [key, values] : set) {
        for (int t = 0; t < kMonthCount; ++t) {
            if (values[t] == 0.0) continue;
            csv::write_row(out, {std::string(to_string(key.level)), key.first, key.second,
                                 MonthIndex(t).to_string(), csv::format_double(values[t])});
        }
    }
}

[[nodiscard]] inline SeriesSet read_series_csv(std::istream& in, std::string_view source = "series") {
    const auto t = csv::Table::read(in, source);
    const auto c_level = t.column("level");
    const auto c_k1 = t.column("key1");
    const auto c_k2 = t.column("key2");
    const auto c_month = t.column("month");
    const auto c_value = t.column("value");
    SeriesSet out;
    for (std::size_t i = 0; i < t.rows().size(); ++i) {
        const auto& r = t.rows()[i];
        const auto v = csv::parse_double(r[c_value]);
        if (!v || !std::isfinite(*v) || *v < 0.0) throw Error(Errc::MalformedInput, t.where(i) + ": bad value");
        auto& s = out.try_emplace({parse_share_level(r[c_level]), r[c_k1], r[c_k2]}, MonthlySeries(kMonthCount, 0.0))
                      .first->second;
        s[MonthIndex::parse(r[c_month]).ordinal()] = *v;
    }
    return out;
}

/// JSON alternative: one object per series with the full monthly vector.
[[nodiscard]] inline nlohmann::ordered_json series_to_json(const SeriesSet& set) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [key, values] : set) {
        arr.push_back({{"level", to_string(key.level)},
                       {"key1", key.first},
                       {"key2", key.second},
                       {"start", MonthIndex(0).to_string()},
                       {"values", values}});
    }
    return arr;
}

/// Series of one level only.
[[nodiscard]] inline SeriesSet select_level(const SeriesSet& set, ShareLevel level) {
    SeriesSet out;
    for (const auto& [key, values] : set) {
        if (key.level == level) out.emplace(key, values);
    }
    return out;
}

}  // namespace taskshare
