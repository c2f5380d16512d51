#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "taskshare/csv.hpp"
#include "taskshare/error.hpp"

namespace taskshare {

struct MajorGroup {
    int code;
    std::string_view name;
};

/// 2-digit SOC major groups (occupation families), military excluded.
inline constexpr std::array<MajorGroup, 22> kMajorGroups{{
    {11, "Management"},
    {13, "Business and Financial Operations"},
    {15, "Computer and Mathematical"},
    {17, "Architecture and Engineering"},
    {19, "Life, Physical, and Social Science"},
    {21, "Community and Social Service"},
    {23, "Legal"},
    {25, "Education, Training, and Library"},
    {27, "Arts, Design, Entertainment, Sports, and Media"},
    {29, "Healthcare Practitioners and Technical"},
    {31, "Healthcare Support"},
    {33, "Protective Service"},
    {35, "Food Preparation and Serving Related"},
    {37, "Building and Grounds Cleaning and Maintenance"},
    {39, "Personal Care and Service"},
    {41, "Sales and Related"},
    {43, "Office and Administrative Support"},
    {45, "Farming, Fishing, and Forestry"},
    {47, "Construction and Extraction"},
    {49, "Installation, Maintenance, and Repair"},
    {51, "Production"},
    {53, "Transportation and Material Moving"},
}};

[[nodiscard]] constexpr std::optional<std::string_view> major_group_name(int code) noexcept {
    for (const auto& g : kMajorGroups) {
        if (g.code == code) return g.name;
    }
    return std::nullopt;
}

/// 6-digit occupation code, canonical form "NN-NNNN".
class SocCode {
public:
    SocCode() = default;

    [[nodiscard]] static SocCode parse(std::string_view text) {
        auto fail = [&](Errc code, std::string_view why) -> SocCode {
            throw Error(code, "bad SOC code '" + std::string(text) + "': " + std::string(why));
        };
        const std::string t = csv::trim(text);
        if (t.size() != 7 || t[2] != '-') return fail(Errc::MalformedSoc, "expected NN-NNNN");
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i == 2) continue;
            if (t[i] < '0' || t[i] > '9') return fail(Errc::MalformedSoc, "non-digit character");
        }
        SocCode s;
        s.major_ = (t[0] - '0') * 10 + (t[1] - '0');
        s.detail_ = std::stoi(t.substr(3));
        if (!major_group_name(s.major_)) return fail(Errc::UnknownMajorGroup, "unknown major group");
        return s;
    }

    [[nodiscard]] static std::optional<SocCode> try_parse(std::string_view text) noexcept {
        try {
            return parse(text);
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    [[nodiscard]] int major() const noexcept { return major_; }
    [[nodiscard]] int detail() const noexcept { return detail_; }
    [[nodiscard]] std::string_view family() const { return *major_group_name(major_); }

    [[nodiscard]] std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02d-%04d", major_, detail_);
        return buf;
    }

    // Same order as the canonical string.
    friend auto operator<=>(const SocCode&, const SocCode&) = default;

private:
    int major_ = 0;
    int detail_ = 0;
};

/// trim, collapse internal whitespace runs to one space, ASCII lowercase.
[[nodiscard]] inline std::string canonicalize_task_name(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    }
    return out;
}

struct TaskDescriptor {
    std::string task_id;  // canonical name
    std::string name;     // as first seen in the taxonomy file
    std::string cluster;
    std::string family;

    friend bool operator==(const TaskDescriptor&, const TaskDescriptor&) = default;
};

enum class WageTercile { Low, Mid, High };

inline constexpr std::array<WageTercile, 3> kTerciles{WageTercile::Low, WageTercile::Mid, WageTercile::High};

[[nodiscard]] constexpr std::string_view to_string(WageTercile r) noexcept {
    switch (r) {
        case WageTercile::Low: return "Low";
        case WageTercile::Mid: return "Mid";
        case WageTercile::High: return "High";
    }
    return "Low";
}

[[nodiscard]] inline WageTercile parse_tercile(std::string_view text) {
    for (auto r : kTerciles) {
        if (to_string(r) == text) return r;
    }
    throw Error(Errc::MalformedInput, "bad wage tercile '" + std::string(text) + "'");
}

using TercileMap = std::map<SocCode, WageTercile>;

enum class TercileScheme {
    EqualCount,          // equal number of occupations per bin
    EmploymentWeighted,  // cumulative employment share cut at 1/3 and 2/3
};

namespace detail {

inline void check_wages(const std::map<SocCode, double>& wages) {
    if (wages.empty()) throw Error(Errc::InvalidArgument, "wage table is empty");
    for (const auto& [soc, w] : wages) {
        if (!std::isfinite(w) || w <= 0.0) {
            throw Error(Errc::NonPositiveWage, "non-positive or non-finite wage for " + soc.to_string());
        }
    }
}

// Ascending wage, ties by SOC code.
[[nodiscard]] inline std::vector<SocCode> wage_order(const std::map<SocCode, double>& wages) {
    std::vector<std::pair<double, SocCode>> order;
    order.reserve(wages.size());
    for (const auto& [soc, w] : wages) order.emplace_back(w, soc);
    std::sort(order.begin(), order.end());
    std::vector<SocCode> out;
    out.reserve(order.size());
    for (const auto& [w, soc] : order) out.push_back(soc);
    return out;
}

}  // namespace detail

/// Equal-count wage terciles. With |O| mod 3 != 0 the extra occupations go
/// to Low first, then Mid.
[[nodiscard]] inline TercileMap assign_terciles(const std::map<SocCode, double>& wages) {
    detail::check_wages(wages);
    const auto order = detail::wage_order(wages);
    const std::size_t n = order.size();
    const std::size_t base = n / 3;
    const std::size_t rem = n % 3;
    const std::size_t low_end = base + (rem > 0 ? 1 : 0);
    const std::size_t mid_end = low_end + base + (rem > 1 ? 1 : 0);
    TercileMap out;
    for (std::size_t k = 0; k < n; ++k) {
        out[order[k]] = k < low_end ? WageTercile::Low : (k < mid_end ? WageTercile::Mid : WageTercile::High);
    }
    return out;
}

/// Employment-weighted terciles: walking up the wage order, an occupation
/// falls in the bin containing the midpoint of its employment mass.
[[nodiscard]] inline TercileMap assign_terciles_weighted(const std::map<SocCode, double>& wages,
                                                         const std::map<SocCode, double>& employment) {
    detail::check_wages(wages);
    const auto order = detail::wage_order(wages);
    double total = 0.0;
    for (const auto& soc : order) {
        auto it = employment.find(soc);
        if (it == employment.end() || !std::isfinite(it->second) || it->second < 0.0) {
            throw Error(Errc::InvalidArgument, "missing or invalid employment for " + soc.to_string());
        }
        total += it->second;
    }
    if (total <= 0.0) throw Error(Errc::ZeroTotalEmployment, "total base-year employment is zero");
    TercileMap out;
    double cum = 0.0;
    for (const auto& soc : order) {
        const double e = employment.at(soc);
        const double mid = (cum + 0.5 * e) / total;
        cum += e;
        out[soc] = mid < 1.0 / 3.0 ? WageTercile::Low : (mid < 2.0 / 3.0 ? WageTercile::Mid : WageTercile::High);
    }
    return out;
}

/// Task hierarchy, occupation families and wage terciles. Immutable once built.
class TaxonomyIndex {
public:
    TaxonomyIndex() = default;

    [[nodiscard]] const TaskDescriptor* find_task(std::string_view name) const {
        auto it = tasks_.find(canonicalize_task_name(name));
        return it == tasks_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] const TaskDescriptor& task(std::string_view task_id) const {
        if (auto* t = find_task(task_id)) return *t;
        throw Error(Errc::UnresolvableKey, "unknown task '" + std::string(task_id) + "'");
    }

    [[nodiscard]] std::optional<std::string> occupation_family(const SocCode& soc) const {
        auto it = occupations_.find(soc);
        if (it == occupations_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] bool has_occupation(const SocCode& soc) const { return occupations_.contains(soc); }

    [[nodiscard]] std::optional<WageTercile> tercile(const SocCode& soc) const {
        auto it = terciles_.find(soc);
        if (it == terciles_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] const std::map<std::string, TaskDescriptor>& tasks() const noexcept { return tasks_; }
    [[nodiscard]] const std::map<SocCode, std::string>& occupations() const noexcept { return occupations_; }
    [[nodiscard]] const TercileMap& terciles() const noexcept { return terciles_; }

    [[nodiscard]] std::set<std::string> task_families() const {
        std::set<std::string> out;
        for (const auto& [id, t] : tasks_) out.insert(t.family);
        return out;
    }

    [[nodiscard]] std::set<std::string> clusters() const {
        std::set<std::string> out;
        for (const auto& [id, t] : tasks_) out.insert(t.cluster);
        return out;
    }

    /// Copy with the tercile map replaced.
    [[nodiscard]] TaxonomyIndex with_terciles(TercileMap terciles) const {
        TaxonomyIndex copy = *this;
        copy.terciles_ = std::move(terciles);
        return copy;
    }

    /// Builds from already-parsed task rows and occupation rows.
    [[nodiscard]] static TaxonomyIndex build(const std::vector<TaskDescriptor>& task_rows,
                                             const std::map<SocCode, std::string>& occupations) {
        TaxonomyIndex idx;
        std::map<std::string, std::string> cluster_family;
        for (const auto& row : task_rows) {
            TaskDescriptor t = row;
            t.task_id = canonicalize_task_name(row.name);
            if (t.task_id.empty() || t.cluster.empty() || t.family.empty()) {
                throw Error(Errc::MalformedInput, "task row with empty field: '" + row.name + "'");
            }
            auto [it, inserted] = idx.tasks_.emplace(t.task_id, t);
            if (!inserted && (it->second.cluster != t.cluster || it->second.family != t.family)) {
                throw Error(Errc::DuplicateConflict, "task '" + row.name + "' assigned to conflicting clusters");
            }
            auto [cit, cinserted] = cluster_family.emplace(t.cluster, t.family);
            if (!cinserted && cit->second != t.family) {
                throw Error(Errc::DuplicateConflict,
                            "cluster '" + t.cluster + "' assigned to conflicting families");
            }
        }
        idx.occupations_ = occupations;
        return idx;
    }

private:
    std::map<std::string, TaskDescriptor> tasks_;
    std::map<SocCode, std::string> occupations_;
    TercileMap terciles_;
};

/// Reads `task,cluster,family` and `soc,family_name` tables.
[[nodiscard]] inline TaxonomyIndex load_taxonomy(std::istream& task_source, std::istream& soc_source) {
    const auto tasks = csv::Table::read(task_source, "task taxonomy");
    const auto socs = csv::Table::read(soc_source, "soc families");
    const auto c_task = tasks.column("task");
    const auto c_cluster = tasks.column("cluster");
    const auto c_family = tasks.column("family");
    const auto c_soc = socs.column("soc");
    const auto c_name = socs.column("family_name");
    if (tasks.rows().empty()) throw Error(Errc::EmptyFile, "task taxonomy: no rows");
    if (socs.rows().empty()) throw Error(Errc::EmptyFile, "soc families: no rows");

    std::vector<TaskDescriptor> rows;
    rows.reserve(tasks.rows().size());
    for (const auto& r : tasks.rows()) {
        rows.push_back({"", csv::trim(r[c_task]), csv::trim(r[c_cluster]), csv::trim(r[c_family])});
    }
    std::map<SocCode, std::string> occupations;
    for (std::size_t i = 0; i < socs.rows().size(); ++i) {
        const auto& r = socs.rows()[i];
        const auto soc = SocCode::parse(r[c_soc]);
        const auto name = csv::trim(r[c_name]);
        auto [it, inserted] = occupations.emplace(soc, name);
        if (!inserted && it->second != name) {
            throw Error(Errc::DuplicateConflict, socs.where(i) + ": conflicting family for " + soc.to_string());
        }
    }
    return TaxonomyIndex::build(rows, occupations);
}

[[nodiscard]] inline TaxonomyIndex load_taxonomy(const std::filesystem::path& task_file,
                                                 const std::filesystem::path& soc_file) {
    std::ifstream tin(task_file);
    if (!tin) throw Error(Errc::FileNotFound, "cannot open " + task_file.string());
    std::ifstream sin(soc_file);
    if (!sin) throw Error(Errc::FileNotFound, "cannot open " + soc_file.string());
    return load_taxonomy(tin, sin);
}

/// Reads `soc,year,hourly_wage` and returns the wages for one year.
[[nodiscard]] inline std::map<SocCode, double> load_base_wages(std::istream& in, int base_year) {
    const auto t = csv::Table::read(in, "wage base");
    const auto c_soc = t.column("soc");
    const auto c_year = t.column("year");
    const auto c_wage = t.column("hourly_wage");
    std::map<SocCode, double> out;
    for (std::size_t i = 0; i < t.rows().size(); ++i) {
        const auto& r = t.rows()[i];
        const auto year = csv::parse_int(r[c_year]);
        const auto wage = csv::parse_double(r[c_wage]);
        if (!year || !wage) throw Error(Errc::MalformedInput, t.where(i) + ": bad year or wage");
        if (*year != base_year) continue;
        const auto soc = SocCode::parse(r[c_soc]);
        if (!out.emplace(soc, *wage).second) {
            throw Error(Errc::DuplicateKey, t.where(i) + ": duplicate wage for " + soc.to_string());
        }
    }
    return out;
}

}  // namespace taskshare
