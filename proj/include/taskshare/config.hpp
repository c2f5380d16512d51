#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "taskshare/analysis.hpp"
#include "taskshare/arima.hpp"
#include "taskshare/csv.hpp"
#include "taskshare/error.hpp"
#include "taskshare/month.hpp"
#include "taskshare/taxonomy.hpp"

namespace taskshare {

inline constexpr const char* kOutputDirEnv = "TASKSHARE_OUTPUT_DIR";

enum class PostingsFormat { Auto, Jsonl, Csv };

/// Everything a pipeline run depends on. Keys match the config-file names.
struct PipelineConfig {
    std::filesystem::path taxonomy_file = "tasks.csv";
    std::filesystem::path soc_file = "soc_families.csv";
    std::filesystem::path postings_file = "postings.jsonl";
    std::filesystem::path annual_file = "annual_stats.csv";
    std::optional<std::filesystem::path> wage_base_file;
    std::filesystem::path output_dir = "taskshare-out";
    PostingsFormat postings_format = PostingsFormat::Auto;

    MonthWindow window{};
    int anchor_month = 1;
    int base_year = kEpochYear;
    TercileScheme tercile_scheme = TercileScheme::EqualCount;
    bool keep_zeros = false;

    std::size_t smoothing_window = 3;
    TimeScale trend_time_scale = TimeScale::Unit;
    std::size_t train_months = 72;
    std::optional<ArimaOrder> order;
    int max_p = 2;
    int max_d = 1;
    int max_q = 2;
    bool forecast_smoothed = true;
    double interval_z = 1.96;
    int top_k = 5;
    unsigned threads = 0;

    /// Sets one option from its textual form; relative paths resolve against `base`.
    void set(std::string_view key, std::string_view value, const std::filesystem::path& base = {}) {
        const std::string v = csv::trim(value);
        auto path = [&] {
            std::filesystem::path p(v);
            return p.is_relative() && !base.empty() ? base / p : p;
        };
        auto integer = [&](long lo, long hi) {
            const auto n = csv::parse_int(v);
            if (!n || *n < lo || *n > hi) bad(key, v);
            return static_cast<long>(*n);
        };
        auto boolean = [&] {
            if (v == "true" || v == "1" || v == "yes") return true;
            if (v == "false" || v == "0" || v == "no") return false;
            bad(key, v);
            return false;
        };

        if (key == "taxonomy") taxonomy_file = path();
        else if (key == "soc_families") soc_file = path();
        else if (key == "postings") postings_file = path();
        else if (key == "annual_stats") annual_file = path();
        else if (key == "wage_base") wage_base_file = v.empty() ? std::nullopt : std::optional(path());
        else if (key == "output_dir") output_dir = path();
        else if (key == "postings_format") {
            if (v == "auto") postings_format = PostingsFormat::Auto;
            else if (v == "jsonl") postings_format = PostingsFormat::Jsonl;
            else if (v == "csv") postings_format = PostingsFormat::Csv;
            else bad(key, v);
        } else if (key == "window_start") window.first = parse_month(key, v);
        else if (key == "window_end") window.last = parse_month(key, v);
        else if (key == "anchor_month") anchor_month = static_cast<int>(integer(1, 12));
        else if (key == "base_year") base_year = static_cast<int>(integer(kEpochYear, kEpochYear + kMonthCount / 12 - 1));
        else if (key == "tercile_scheme") {
            if (v == "equal_count") tercile_scheme = TercileScheme::EqualCount;
            else if (v == "employment") tercile_scheme = TercileScheme::EmploymentWeighted;
            else bad(key, v);
        } else if (key == "keep_zeros") keep_zeros = boolean();
        else if (key == "smoothing_window") smoothing_window = static_cast<std::size_t>(integer(1, kMonthCount));
        else if (key == "trend_time_scale") trend_time_scale = parse_time_scale(v);
        else if (key == "train_months") train_months = static_cast<std::size_t>(integer(1, kMonthCount));
        else if (key == "order") order = v.empty() || v == "auto" ? std::nullopt : std::optional(ArimaOrder::parse(v));
        else if (key == "max_p") max_p = static_cast<int>(integer(0, 5));
        else if (key == "max_d") max_d = static_cast<int>(integer(0, 2));
        else if (key == "max_q") max_q = static_cast<int>(integer(0, 5));
        else if (key == "forecast_input") {
            if (v == "smoothed") forecast_smoothed = true;
            else if (v == "raw") forecast_smoothed = false;
            else bad(key, v);
        } else if (key == "interval_z") {
            const auto z = csv::parse_double(v);
            if (!z || !(*z > 0.0)) bad(key, v);
            interval_z = *z;
        } else if (key == "top_k") top_k = static_cast<int>(integer(1, 1000));
        else if (key == "threads") threads = static_cast<unsigned>(integer(0, 1024));
        else throw Error(Errc::InvalidArgument, "unknown config key '" + std::string(key) + "'");
    }

    /// Throws InvalidArgument when options are inconsistent.
    void validate() const {
        if (!window.valid()) throw Error(Errc::InvalidArgument, "window_start is after window_end");
        if (train_months >= static_cast<std::size_t>(window.size())) {
            throw Error(Errc::InvalidArgument, "train_months must be shorter than the window");
        }
        if (smoothing_window % 2 == 0) throw Error(Errc::InvalidArgument, "smoothing_window must be odd");
        if (smoothing_window > static_cast<std::size_t>(window.size())) {
            throw Error(Errc::InvalidArgument, "smoothing_window longer than the window");
        }
    }

    [[nodiscard]] std::vector<ArimaOrder> order_grid() const {
        std::vector<ArimaOrder> grid;
        for (int d = 0; d <= max_d; ++d) {
            for (int p = 0; p <= max_p; ++p) {
                for (int q = 0; q <= max_q; ++q) grid.push_back({p, d, q});
            }
        }
        return grid;
    }

    [[nodiscard]] PostingsFormat resolved_postings_format() const {
        if (postings_format != PostingsFormat::Auto) return postings_format;
        return postings_file.extension() == ".csv" ? PostingsFormat::Csv : PostingsFormat::Jsonl;
    }

private:
    [[noreturn]] static void bad(std::string_view key, std::string_view value) {
        throw Error(Errc::InvalidArgument, "bad value '" + std::string(value) + "' for " + std::string(key));
    }

    static MonthIndex parse_month(std::string_view key, std::string_view v) {
        try {
            return MonthIndex::parse(v);
        } catch (const Error&) {
            bad(key, v);
        }
    }
};

/// `key = value` lines; '#' starts a comment. Relative paths resolve against
/// the config file's directory.
inline void apply_config_file(PipelineConfig& cfg, std::istream& in, const std::filesystem::path& base = {}) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (csv::trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(Errc::InvalidArgument, "config line " + std::to_string(line_no) + ": expected key = value");
        }
        cfg.set(csv::trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1), base);
    }
}

inline void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(Errc::FileNotFound, "cannot open config " + file.string());
    apply_config_file(cfg, in, file.parent_path());
}

}  // namespace taskshare
