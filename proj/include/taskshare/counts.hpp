#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "taskshare/csv.hpp"
#include "taskshare/month.hpp"
#include "taskshare/taxonomy.hpp"

namespace taskshare {

struct MentionKey {
    std::string task_id;
    SocCode soc;
    MonthIndex month;

    friend auto operator<=>(const MentionKey&, const MentionKey&) = default;
};

struct OccMonthKey {
    SocCode soc;
    MonthIndex month;

    friend auto operator<=>(const OccMonthKey&, const OccMonthKey&) = default;
};

/// Sparse task-mention counts n(task, soc, month) and posting counts m(soc, month).
/// A mention is only ever recorded together with its posting, so n > 0 implies m > 0.
class CountsCube {
public:
    using MentionMap = std::map<MentionKey, std::uint64_t>;
    using PostingMap = std::map<OccMonthKey, std::uint64_t>;

    /// One posting; each distinct task id counts once.
    void add_posting(const SocCode& soc, MonthIndex month, std::vector<std::string> task_ids) {
        std::sort(task_ids.begin(), task_ids.end());
        task_ids.erase(std::unique(task_ids.begin(), task_ids.end()), task_ids.end());
        ++postings_[{soc, month}];
        for (auto& id : task_ids) ++mentions_[{std::move(id), soc, month}];
    }

    /// Commutative, associative count addition.
    void merge(const CountsCube& other) {
        for (const auto& [k, v] : other.mentions_) mentions_[k] += v;
        for (const auto& [k, v] : other.postings_) postings_[k] += v;
    }

    [[nodiscard]] std::uint64_t mentions(const std::string& task_id, const SocCode& soc, MonthIndex t) const {
        auto it = mentions_.find({task_id, soc, t});
        return it == mentions_.end() ? 0 : it->second;
    }

    [[nodiscard]] std::uint64_t postings(const SocCode& soc, MonthIndex t) const {
        auto it = postings_.find({soc, t});
        return it == postings_.end() ? 0 : it->second;
    }

    [[nodiscard]] const MentionMap& mention_cells() const noexcept { return mentions_; }
    [[nodiscard]] const PostingMap& posting_cells() const noexcept { return postings_; }
    [[nodiscard]] bool empty() const noexcept { return postings_.empty() && mentions_.empty(); }

    // Raw setters for loading persisted cubes; no invariant enforcement.
    void set_mentions(MentionKey key, std::uint64_t count) { mentions_[std::move(key)] = count; }
    void set_postings(OccMonthKey key, std::uint64_t count) { postings_[key] = count; }

    friend bool operator==(const CountsCube&, const CountsCube&) = default;

private:
    MentionMap mentions_;
    PostingMap postings_;
};

/// Writes `task_id,soc,month,count`.
inline void write_mentions_csv(const CountsCube& cube, std::ostream& out) {
    csv::write_row(out, {"task_id", "soc", "month", "count"});
    for (const auto& [k, v] : cube.mention_cells()) {
        csv::write_row(out, {k.task_id, k.soc.to_string(), k.month.to_string(), std::to_string(v)});
    }
}

/// Writes `soc,month,postings`.
inline void write_postings_csv(const CountsCube& cube, std::ostream& out) {
    csv::write_row(out, {"soc", "month", "postings"});
    for (const auto& [k, v] : cube.posting_cells()) {
        csv::write_row(out, {k.soc.to_string(), k.month.to_string(), std::to_string(v)});
    }
}

[[nodiscard]] inline CountsCube read_cube_csv(std::istream& mentions_in, std::istream& postings_in) {
    CountsCube cube;
    const auto m = csv::Table::read(postings_in, "postings counts");
    const auto c_soc = m.column("soc");
    const auto c_month = m.column("month");
    const auto c_post = m.column("postings");
    for (std::size_t i = 0; i < m.rows().size(); ++i) {
        const auto& r = m.rows()[i];
        const auto count = csv::parse_int(r[c_post]);
        if (!count || *count < 0) throw Error(Errc::MalformedInput, m.where(i) + ": bad posting count");
        cube.set_postings({SocCode::parse(r[c_soc]), MonthIndex::parse(r[c_month])},
                          static_cast<std::uint64_t>(*count));
    }
    const auto n = csv::Table::read(mentions_in, "mention counts");
    const auto n_task = n.column("task_id");
    const auto n_soc = n.column("soc");
    const auto n_month = n.column("month");
    const auto n_count = n.column("count");
    for (std::size_t i = 0; i < n.rows().size(); ++i) {
        const auto& r = n.rows()[i];
        const auto count = csv::parse_int(r[n_count]);
        if (!count || *count < 0) throw Error(Errc::MalformedInput, n.where(i) + ": bad mention count");
        cube.set_mentions({r[n_task], SocCode::parse(r[n_soc]), MonthIndex::parse(r[n_month])},
                          static_cast<std::uint64_t>(*count));
    }
    return cube;
}

}  // namespace taskshare
