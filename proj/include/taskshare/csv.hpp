#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "taskshare/error.hpp"

namespace taskshare::csv {

/// Splits one comma-delimited line. Double-quoted fields may contain commas
/// and doubled quotes; a trailing '\r' is dropped.
[[nodiscard]] inline std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) throw Error(Errc::MalformedInput, "unterminated quote in line: " + std::string(line));
    fields.push_back(std::move(field));
    return fields;
}

[[nodiscard]] inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

[[nodiscard]] inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Shortest representation that parses back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error(Errc::Internal, "cannot format double");
    return std::string(buf, ptr);
}

[[nodiscard]] inline std::optional<double> parse_double(std::string_view s) noexcept {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    const char* first = t.data();
    if (*first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

[[nodiscard]] inline std::optional<std::int64_t> parse_int(std::string_view s) noexcept {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

/// A header plus rows, with blank lines skipped. Header names are trimmed.
class Table {
public:
    [[nodiscard]] static Table read(std::istream& in, std::string_view source_name) {
        Table t;
        t.source_ = std::string(source_name);
        std::string line;
        bool have_header = false;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            auto fields = split_line(line);
            if (!have_header) {
                for (auto& f : fields) {
                    f = trim(f);
                    // strip a UTF-8 byte order mark on the first header cell
                    if (t.header_.empty() && f.rfind("\xEF\xBB\xBF", 0) == 0) f.erase(0, 3);
                    t.header_.push_back(f);
                }
                have_header = true;
                continue;
            }
            if (fields.size() != t.header_.size()) {
                throw Error(Errc::MalformedInput, t.source_ + ":" + std::to_string(line_no) + ": expected " +
                                                      std::to_string(t.header_.size()) + " fields, got " +
                                                      std::to_string(fields.size()));
            }
            t.rows_.push_back(std::move(fields));
            t.line_numbers_.push_back(line_no);
        }
        if (!have_header) throw Error(Errc::EmptyFile, t.source_ + ": empty file");
        return t;
    }

    [[nodiscard]] static Table read_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
        return read(in, path.string());
    }

    /// Index of a required column; throws MissingColumn.
    [[nodiscard]] std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (header_[i] == name) return i;
        }
        throw Error(Errc::MissingColumn, source_ + ": missing column '" + std::string(name) + "'");
    }

    [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
    [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t line_number(std::size_t row) const { return line_numbers_.at(row); }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

    [[nodiscard]] std::string where(std::size_t row) const {
        return source_ + ":" + std::to_string(line_number(row));
    }

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> line_numbers_;
};

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote(fields[i]);
    }
    out << '\n';
}

}  // namespace taskshare::csv
