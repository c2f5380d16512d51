// taskshare: monthly task-share series, trends and ARIMA forecasts from job postings.
//
//   taskshare ingest|shares|trend|forecast|report|all [--config FILE] [flags]
//
// Exit codes: 0 success, 1 internal error, 2 input error.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "taskshare/config.hpp"
#include "taskshare/pipeline.hpp"

namespace {

using taskshare::PipelineConfig;
using taskshare::pipeline::StageLog;

void print_log(const std::string& stage, const StageLog& log) {
    for (const auto& m : log.info) std::cout << stage << ": " << m << "\n";
    for (const auto& w : log.warnings) std::cerr << stage << ": warning: " << w << "\n";
}

int fail(std::string_view code, const std::string& message, int exit_code) {
    nlohmann::ordered_json j{{"error", code}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return exit_code;
}

// Flag name -> config key. Every option is a string so the config file and the
// command line share one parser.
const std::vector<std::pair<std::string, std::string>> kFlags = {
    {"--taxonomy", "taxonomy"},
    {"--soc-families", "soc_families"},
    {"--postings", "postings"},
    {"--annual-stats", "annual_stats"},
    {"--wage-base", "wage_base"},
    {"--out", "output_dir"},
    {"--postings-format", "postings_format"},
    {"--window-start", "window_start"},
    {"--window-end", "window_end"},
    {"--anchor-month", "anchor_month"},
    {"--base-year", "base_year"},
    {"--tercile-scheme", "tercile_scheme"},
    {"--smoothing-window", "smoothing_window"},
    {"--trend-time-scale", "trend_time_scale"},
    {"--train-months", "train_months"},
    {"--order", "order"},
    {"--max-p", "max_p"},
    {"--max-d", "max_d"},
    {"--max-q", "max_q"},
    {"--forecast-input", "forecast_input"},
    {"--interval-z", "interval_z"},
    {"--top-k", "top_k"},
    {"--threads", "threads"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monthly task-share series, trend coefficients and ARIMA forecasts from job postings"};
    app.require_subcommand(1);

    std::string config_file;
    bool keep_zeros = false;
    std::map<std::string, std::string> values;
    app.add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    for (const auto& [flag, key] : kFlags) app.add_option(flag, values[key], key);
    app.add_flag("--keep-zeros", keep_zeros, "keep all-zero pair series");

    using Stage = std::function<StageLog(const PipelineConfig&)>;
    const std::vector<std::tuple<std::string, std::string, Stage>> stages = {
        {"ingest", "postings and annual statistics -> counts cube, monthly stats, terciles",
         taskshare::pipeline::run_ingest},
        {"shares", "task shares at pair, family and tercile levels", taskshare::pipeline::run_shares},
        {"trend", "trend coefficients of smoothed aggregate series", taskshare::pipeline::run_trend},
        {"forecast", "ARIMA one-step-ahead forecasts and MAPE", taskshare::pipeline::run_forecast},
        {"report", "summary tables and plot data", taskshare::pipeline::run_report},
    };
    for (const auto& [name, desc, fn] : stages) app.add_subcommand(name, desc)->fallthrough();
    app.add_subcommand("all", "run every stage in order")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        PipelineConfig cfg;
        if (!config_file.empty()) taskshare::apply_config_file(cfg, config_file);
        if (const char* env = std::getenv(taskshare::kOutputDirEnv); env && *env) cfg.set("output_dir", env);
        for (const auto& [flag, key] : kFlags) {
            if (app.count(flag) > 0) cfg.set(key, values[key]);
        }
        if (keep_zeros) cfg.keep_zeros = true;
        cfg.validate();

        const auto* sub = app.get_subcommands().front();
        for (const auto& [name, desc, fn] : stages) {
            if (sub->get_name() == name || sub->get_name() == "all") print_log(name, fn(cfg));
        }
        return 0;
    } catch (const taskshare::Error& e) {
        return fail(taskshare::to_string(e.code()), e.what(), taskshare::is_input_error(e.code()) ? 2 : 1);
    } catch (const std::filesystem::filesystem_error& e) {
        return fail("IO_ERROR", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("INTERNAL", e.what(), 1);
    }
}
