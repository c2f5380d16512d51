#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "taskshare/error.hpp"

namespace taskshare {

inline constexpr int kEpochYear = 2010;
inline constexpr int kMonthCount = 96;  // Jan-2010 .. Dec-2017

/// Months since January of the epoch year, restricted to [0, kMonthCount).
class MonthIndex {
public:
    constexpr MonthIndex() = default;

    constexpr explicit MonthIndex(int ordinal) : ordinal_(ordinal) {
        if (ordinal < 0 || ordinal >= kMonthCount) {
            throw Error(Errc::InvalidArgument, "month ordinal out of range: " + std::to_string(ordinal));
        }
    }

    [[nodiscard]] static constexpr std::optional<MonthIndex> try_from_calendar(int year, int month) noexcept {
        if (month < 1 || month > 12) return std::nullopt;
        const int ordinal = (year - kEpochYear) * 12 + (month - 1);
        if (ordinal < 0 || ordinal >= kMonthCount) return std::nullopt;
        MonthIndex m;
        m.ordinal_ = ordinal;
        return m;
    }

    [[nodiscard]] static MonthIndex from_calendar(int year, int month) {
        if (auto m = try_from_calendar(year, month)) return *m;
        throw Error(Errc::InvalidArgument,
                    "month outside analysis range: " + std::to_string(year) + "-" + std::to_string(month));
    }

    /// Parses "YYYY-MM".
    [[nodiscard]] static MonthIndex parse(std::string_view text);

    [[nodiscard]] constexpr int ordinal() const noexcept { return ordinal_; }
    [[nodiscard]] constexpr int year() const noexcept { return kEpochYear + ordinal_ / 12; }
    [[nodiscard]] constexpr int month() const noexcept { return ordinal_ % 12 + 1; }

    [[nodiscard]] std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
        return buf;
    }

    friend constexpr auto operator<=>(MonthIndex, MonthIndex) = default;

private:
    int ordinal_ = 0;
};

/// Inclusive range of months.
struct MonthWindow {
    MonthIndex first{0};
    MonthIndex last{kMonthCount - 1};

    [[nodiscard]] constexpr int size() const noexcept { return last.ordinal() - first.ordinal() + 1; }
    [[nodiscard]] constexpr bool contains(MonthIndex m) const noexcept { return first <= m && m <= last; }
    [[nodiscard]] constexpr bool valid() const noexcept { return first <= last; }

    friend constexpr bool operator==(const MonthWindow&, const MonthWindow&) = default;
};

struct CalendarDate {
    int year = 0;
    int month = 0;
    int day = 0;
};

namespace detail {

[[nodiscard]] inline std::optional<int> parse_fixed_int(std::string_view s) noexcept {
    if (s.empty()) return std::nullopt;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

[[nodiscard]] constexpr int days_in_month(int year, int month) noexcept {
    constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return month == 2 && leap ? 29 : days[month - 1];
}

}  // namespace detail

/// Accepts "YYYY-MM-DD", optionally followed by a 'T' or ' ' time part.
[[nodiscard]] inline std::optional<CalendarDate> parse_iso_date(std::string_view text) noexcept {
    if (text.size() > 10 && (text[10] == 'T' || text[10] == ' ')) text = text.substr(0, 10);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto y = detail::parse_fixed_int(text.substr(0, 4));
    auto m = detail::parse_fixed_int(text.substr(5, 2));
    auto d = detail::parse_fixed_int(text.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    if (*m < 1 || *m > 12 || *d < 1 || *d > detail::days_in_month(*y, *m)) return std::nullopt;
    return CalendarDate{*y, *m, *d};
}

inline MonthIndex MonthIndex::parse(std::string_view text) {
    if (text.size() == 7 && text[4] == '-') {
        auto y = detail::parse_fixed_int(text.substr(0, 4));
        auto m = detail::parse_fixed_int(text.substr(5, 2));
        if (y && m) {
            if (auto idx = try_from_calendar(*y, *m)) return *idx;
        }
    }
    throw Error(Errc::MalformedInput, "bad month '" + std::string(text) + "' (expected YYYY-MM in range)");
}

}  // namespace taskshare
