#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ranges>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskshare/counts.hpp"
#include "taskshare/csv.hpp"
#include "taskshare/month.hpp"
#include "taskshare/taxonomy.hpp"

namespace taskshare {

/// A posting as it arrives from a reader; validation happens at ingest.
struct PostingRecord {
    std::string posting_id;
    std::string date;  // ISO-8601
    std::string soc;
    std::vector<std::string> tasks;
};

inline constexpr std::string_view kMOnlySentinel = "__m_only__";

struct IngestReport {
    std::uint64_t records_read = 0;
    std::uint64_t postings_counted = 0;
    std::uint64_t malformed_records = 0;
    std::uint64_t bad_date = 0;
    std::uint64_t out_of_window = 0;
    std::uint64_t unknown_soc = 0;
    std::uint64_t unknown_task_mentions = 0;
    std::uint64_t duplicate_task_mentions = 0;
    std::uint64_t task_free_postings = 0;

    IngestReport& operator+=(const IngestReport& o) {
        records_read += o.records_read;
        postings_counted += o.postings_counted;
        malformed_records += o.malformed_records;
        bad_date += o.bad_date;
        out_of_window += o.out_of_window;
        unknown_soc += o.unknown_soc;
        unknown_task_mentions += o.unknown_task_mentions;
        duplicate_task_mentions += o.duplicate_task_mentions;
        task_free_postings += o.task_free_postings;
        return *this;
    }

    [[nodiscard]] nlohmann::ordered_json to_json() const {
        return {
            {"records_read", records_read},
            {"postings_counted", postings_counted},
            {"malformed_records", malformed_records},
            {"bad_date", bad_date},
            {"out_of_window", out_of_window},
            {"unknown_soc", unknown_soc},
            {"unknown_task_mentions", unknown_task_mentions},
            {"duplicate_task_mentions", duplicate_task_mentions},
            {"task_free_postings", task_free_postings},
        };
    }

    friend bool operator==(const IngestReport&, const IngestReport&) = default;
};

struct IngestResult {
    CountsCube cube;
    IngestReport report;
};

/// Accumulates postings into a cube. One instance per shard; shards combine
/// with merge().
class Ingestor {
public:
    Ingestor(const TaxonomyIndex& index, MonthWindow window) : index_(&index), window_(window) {
        if (!window.valid()) throw Error(Errc::InvalidArgument, "empty month window");
    }

    void add(const PostingRecord& rec) {
        ++result_.report.records_read;
        const auto date = parse_iso_date(rec.date);
        if (!date) {
            ++result_.report.bad_date;
            return;
        }
        const auto month = MonthIndex::try_from_calendar(date->year, date->month);
        if (!month || !window_.contains(*month)) {
            ++result_.report.out_of_window;
            return;
        }
        const auto soc = SocCode::try_parse(rec.soc);
        if (!soc || !index_->has_occupation(*soc)) {
            ++result_.report.unknown_soc;
            return;
        }
        std::vector<std::string> ids;
        ids.reserve(rec.tasks.size());
        for (const auto& name : rec.tasks) {
            if (name == kMOnlySentinel) continue;
            const auto* task = index_->find_task(name);
            if (!task) {
                ++result_.report.unknown_task_mentions;
                continue;
            }
            ids.push_back(task->task_id);
        }
        std::sort(ids.begin(), ids.end());
        const auto before = ids.size();
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        result_.report.duplicate_task_mentions += before - ids.size();
        if (ids.empty()) ++result_.report.task_free_postings;
        result_.cube.add_posting(*soc, *month, std::move(ids));
        ++result_.report.postings_counted;
    }

    void merge(const Ingestor& other) {
        result_.cube.merge(other.result_.cube);
        result_.report += other.result_.report;
    }

    void note_malformed(std::uint64_t count = 1) {
        result_.report.records_read += count;
        result_.report.malformed_records += count;
    }

    [[nodiscard]] const IngestResult& result() const& noexcept { return result_; }
    [[nodiscard]] IngestResult result() && noexcept { return std::move(result_); }

private:
    const TaxonomyIndex* index_;
    MonthWindow window_;
    IngestResult result_;
};

template <std::ranges::input_range R>
    requires std::convertible_to<std::ranges::range_reference_t<R>, const PostingRecord&>
[[nodiscard]] IngestResult ingest_postings(R&& records, const TaxonomyIndex& index, MonthWindow window = {}) {
    Ingestor ing(index, window);
    for (const PostingRecord& rec : records) ing.add(rec);
    return std::move(ing).result();
}

/// Newline-delimited JSON objects with posting_id, date, soc, tasks.
/// Unparseable lines go to `on_malformed`.
inline void read_postings_jsonl(std::istream& in, const std::function<void(const PostingRecord&)>& on_record,
                                const std::function<void()>& on_malformed) {
    std::string line;
    while (std::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        PostingRecord rec;
        try {
            const auto j = nlohmann::json::parse(line);
            rec.posting_id = j.at("posting_id").is_string() ? j.at("posting_id").get<std::string>()
                                                              : j.at("posting_id").dump();
            rec.date = j.at("date").get<std::string>();
            rec.soc = j.at("soc").get<std::string>();
            for (const auto& t : j.at("tasks")) rec.tasks.push_back(t.get<std::string>());
        } catch (const nlohmann::json::exception&) {
            on_malformed();
            continue;
        }
        on_record(rec);
    }
    if (in.bad()) throw Error(Errc::MalformedInput, "read error on postings source");
}

/// One row per (posting, task): `posting_id,date,soc,task`. Rows of one posting
/// need not be adjacent; postings whose rows disagree on date or soc are malformed.
inline void read_postings_csv(std::istream& in, const std::function<void(const PostingRecord&)>& on_record,
                              const std::function<void()>& on_malformed) {
    const auto t = csv::Table::read(in, "postings");
    const auto c_id = t.column("posting_id");
    const auto c_date = t.column("date");
    const auto c_soc = t.column("soc");
    const auto c_task = t.column("task");
    std::vector<PostingRecord> postings;
    std::vector<bool> bad;
    std::unordered_map<std::string, std::size_t> by_id;
    for (const auto& r : t.rows()) {
        auto [it, inserted] = by_id.emplace(r[c_id], postings.size());
        if (inserted) {
            postings.push_back({r[c_id], csv::trim(r[c_date]), csv::trim(r[c_soc]), {}});
            bad.push_back(false);
        }
        auto& p = postings[it->second];
        if (p.date != csv::trim(r[c_date]) || p.soc != csv::trim(r[c_soc])) bad[it->second] = true;
        if (r[c_task] != kMOnlySentinel) p.tasks.push_back(r[c_task]);
    }
    for (std::size_t i = 0; i < postings.size(); ++i) {
        if (bad[i]) {
            on_malformed();
        } else {
            on_record(postings[i]);
        }
    }
}

// ---------------------------------------------------------------------------
// Annual statistics and monthly interpolation

struct AnnualRecord {
    double hourly_wage = 0.0;
    double employment = 0.0;
};

struct SocYear {
    SocCode soc;
    int year = 0;
    friend auto operator<=>(const SocYear&, const SocYear&) = default;
};

using AnnualTable = std::map<SocYear, AnnualRecord>;

/// Reads `soc,year,hourly_wage,employment`. All row problems are collected
/// and reported together; the first one determines the error code.
[[nodiscard]] inline AnnualTable load_annual_stats(std::istream& in) {
    const auto t = csv::Table::read(in, "annual stats");
    const auto c_soc = t.column("soc");
    const auto c_year = t.column("year");
    const auto c_wage = t.column("hourly_wage");
    const auto c_emp = t.column("employment");
    if (t.rows().empty()) throw Error(Errc::EmptyFile, "annual stats: no rows");

    AnnualTable out;
    std::optional<Errc> first;
    std::string messages;
    auto fail = [&](Errc code, std::string msg) {
        if (!first) first = code;
        messages += msg + "\n";
    };
    for (std::size_t i = 0; i < t.rows().size(); ++i) {
        const auto& r = t.rows()[i];
        const auto soc = SocCode::try_parse(r[c_soc]);
        const auto year = csv::parse_int(r[c_year]);
        const auto wage = csv::parse_double(r[c_wage]);
        const auto emp = csv::parse_double(r[c_emp]);
        if (!soc) {
            fail(Errc::MalformedSoc, t.where(i) + ": bad SOC '" + r[c_soc] + "'");
            continue;
        }
        if (!year || !wage || !emp || !std::isfinite(*wage) || !std::isfinite(*emp)) {
            fail(Errc::MalformedInput, t.where(i) + ": unparseable number");
            continue;
        }
        if (*wage < 0.0 || *emp < 0.0) {
            fail(Errc::NegativeValue, t.where(i) + ": negative wage or employment");
            continue;
        }
        if (!out.emplace(SocYear{*soc, static_cast<int>(*year)}, AnnualRecord{*wage, *emp}).second) {
            fail(Errc::DuplicateKey, t.where(i) + ": duplicate (" + soc->to_string() + ", " +
                                         std::to_string(*year) + ")");
        }
    }
    if (first) throw Error(*first, messages);
    return out;
}

using MonthlySeries = std::vector<double>;  // length kMonthCount, indexed by MonthIndex::ordinal()

/// Piecewise-linear annual -> monthly. The value for year y sits at month
/// `anchor_month` of y; between knots values are linear, outside the knot
/// span they are held at the nearest knot. Knot months are copied verbatim.
[[nodiscard]] inline std::map<SocCode, MonthlySeries> interpolate_monthly(const std::map<SocYear, double>& annual,
                                                                        int anchor_month = 1) {
    if (anchor_month < 1 || anchor_month > 12) throw Error(Errc::InvalidArgument, "anchor month must be 1..12");
    std::map<SocCode, std::vector<std::pair<int, double>>> knots;
    for (const auto& [key, value] : annual) {
        knots[key.soc].emplace_back((key.year - kEpochYear) * 12 + (anchor_month - 1), value);
    }
    std::map<SocCode, MonthlySeries> out;
    for (const auto& [soc, ks] : knots) {
        // map keys are ordered by year, so ks is sorted by position
        MonthlySeries s(kMonthCount);
        std::size_t k = 0;
        for (int t = 0; t < kMonthCount; ++t) {
            while (k + 1 < ks.size() && ks[k + 1].first <= t) ++k;
            const auto [p0, v0] = ks[k];
            if (t == p0 || t < p0 || k + 1 == ks.size()) {
                s[t] = v0;
            } else {
                const auto [p1, v1] = ks[k + 1];
                // extended precision so each month rounds once; keeps second differences at a few ulp
                const long double f = static_cast<long double>(t - p0) / static_cast<long double>(p1 - p0);
                s[t] = static_cast<double>(static_cast<long double>(v0) +
                                           f * (static_cast<long double>(v1) - static_cast<long double>(v0)));
            }
        }
        out.emplace(soc, std::move(s));
    }
    return out;
}

/// Interpolated monthly wage w(j,t) and employment E(j,t).
struct MonthlyStats {
    std::map<SocCode, MonthlySeries> wage;
    std::map<SocCode, MonthlySeries> employment;

    friend bool operator==(const MonthlyStats&, const MonthlyStats&) = default;
};

[[nodiscard]] inline MonthlyStats monthly_stats(const AnnualTable& annual, int anchor_month = 1) {
    std::map<SocYear, double> wage;
    std::map<SocYear, double> emp;
    for (const auto& [key, rec] : annual) {
        wage.emplace(key, rec.hourly_wage);
        emp.emplace(key, rec.employment);
    }
    return {interpolate_monthly(wage, anchor_month), interpolate_monthly(emp, anchor_month)};
}

/// Mean of a monthly series over the 12 months of `year`.
[[nodiscard]] inline std::map<SocCode, double> yearly_mean(const std::map<SocCode, MonthlySeries>& series, int year) {
    const int begin = (year - kEpochYear) * 12;
    if (begin < 0 || begin + 12 > kMonthCount) {
        throw Error(Errc::InvalidArgument, "year " + std::to_string(year) + " outside the month range");
    }
    std::map<SocCode, double> out;
    for (const auto& [soc, s] : series) {
        double sum = 0.0;
        for (int t = begin; t < begin + 12; ++t) sum += s[t];
        out.emplace(soc, sum / 12.0);
    }
    return out;
}

/// Writes `soc,month,hourly_wage,employment`.
inline void write_monthly_stats_csv(const MonthlyStats& stats, std::ostream& out) {
    csv::write_row(out, {"soc", "month", "hourly_wage", "employment"});
    for (const auto& [soc, w] : stats.wage) {
        const auto& e = stats.employment.at(soc);
        for (int t = 0; t < kMonthCount; ++t) {
            csv::write_row(out, {soc.to_string(), MonthIndex(t).to_string(), csv::format_double(w[t]),
                                 csv::format_double(e[t])});
        }
    }
}

[[nodiscard]] inline MonthlyStats read_monthly_stats_csv(std::istream& in) {
    const auto t = csv::Table::read(in, "monthly stats");
    const auto c_soc = t.column("soc");
    const auto c_month = t.column("month");
    const auto c_wage = t.column("hourly_wage");
    const auto c_emp = t.column("employment");
    MonthlyStats stats;
    for (std::size_t i = 0; i < t.rows().size(); ++i) {
        const auto& r = t.rows()[i];
        const auto soc = SocCode::parse(r[c_soc]);
        const auto month = MonthIndex::parse(r[c_month]);
        const auto w = csv::parse_double(r[c_wage]);
        const auto e = csv::parse_double(r[c_emp]);
        if (!w || !e) throw Error(Errc::MalformedInput, t.where(i) + ": bad number");
        auto& ws = stats.wage.try_emplace(soc, MonthlySeries(kMonthCount, 0.0)).first->second;
        auto& es = stats.employment.try_emplace(soc, MonthlySeries(kMonthCount, 0.0)).first->second;
        ws[month.ordinal()] = *w;
        es[month.ordinal()] = *e;
    }
    return stats;
}

}  // namespace taskshare
