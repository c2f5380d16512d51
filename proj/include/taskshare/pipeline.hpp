#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskshare/analysis.hpp"
#include "taskshare/config.hpp"
#include "taskshare/counts.hpp"
#include "taskshare/forecast.hpp"
#include "taskshare/ingest.hpp"
#include "taskshare/shares.hpp"
#include "taskshare/taxonomy.hpp"

namespace taskshare::pipeline {

// Artifact names inside the output directory.
inline constexpr const char* kMentionsFile = "counts.csv";
inline constexpr const char* kPostingsFile = "postings.csv";
inline constexpr const char* kMonthlyStatsFile = "monthly_stats.csv";
inline constexpr const char* kTercilesFile = "terciles.csv";
inline constexpr const char* kIngestReportFile = "ingest_report.json";
inline constexpr const char* kPairStatsFile = "pair_stats.csv";
inline constexpr const char* kSharesJsonFile = "shares.json";
inline constexpr const char* kSharesReportFile = "shares_report.json";
inline constexpr const char* kTrendFile = "trend.csv";
inline constexpr const char* kForecastFile = "forecast.csv";
inline constexpr const char* kEvaluationFile = "evaluation.csv";
inline constexpr const char* kModelsFile = "forecast_models.csv";
inline constexpr const char* kFailuresFile = "forecast_failures.csv";
inline constexpr const char* kReportFile = "report.md";
inline constexpr const char* kPlotSeriesFile = "plot_series.csv";
inline constexpr const char* kPlotForecastFile = "plot_forecast.csv";

inline constexpr double kMassTolerance = 1e-9;

[[nodiscard]] inline std::string shares_file(ShareLevel level) {
    return "shares_" + std::string(to_string(level)) + ".csv";
}

inline constexpr ShareLevel kAggregateLevels[] = {ShareLevel::FamilyByOccFamily, ShareLevel::FamilyByTercile,
                                                  ShareLevel::ClusterByTercile};

/// Messages for the operator; not part of any artifact.
struct StageLog {
    std::vector<std::string> info;
    std::vector<std::string> warnings;
};

namespace detail {

// Write to a sibling temp file, then rename over the target.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::Internal, "cannot write " + tmp.string());
        out << content;
        if (!out) throw Error(Errc::Internal, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

template <typename Fn>
void write_with(const std::filesystem::path& path, Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    write_file(path, ss.str());
}

[[nodiscard]] inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
    return in;
}

[[nodiscard]] inline std::ifstream open_artifact(const PipelineConfig& cfg, const char* name, const char* stage) {
    const auto path = cfg.output_dir / name;
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::FileNotFound,
                    "missing artifact " + path.string() + " (run `taskshare " + stage + "` first)");
    }
    return in;
}

inline void write_terciles_csv(const TercileMap& terciles, const std::map<SocCode, double>& base_wages,
                               std::ostream& out) {
    csv::write_row(out, {"soc", "base_wage", "tercile"});
    for (const auto& [soc, r] : terciles) {
        csv::write_row(out, {soc.to_string(), csv::format_double(base_wages.at(soc)), std::string(to_string(r))});
    }
}

[[nodiscard]] inline TercileMap read_terciles_csv(std::istream& in) {
    const auto t = csv::Table::read(in, kTercilesFile);
    const auto c_soc = t.column("soc");
    const auto c_r = t.column("tercile");
    TercileMap out;
    for (const auto& r : t.rows()) out[SocCode::parse(r[c_soc])] = parse_tercile(r[c_r]);
    return out;
}

[[nodiscard]] inline TaxonomyIndex load_index(const PipelineConfig& cfg) {
    return load_taxonomy(cfg.taxonomy_file, cfg.soc_file);
}

[[nodiscard]] inline TaxonomyIndex load_index_with_terciles(const PipelineConfig& cfg) {
    auto in = open_artifact(cfg, kTercilesFile, "ingest");
    return load_index(cfg).with_terciles(read_terciles_csv(in));
}

[[nodiscard]] inline SeriesSet load_level(const PipelineConfig& cfg, ShareLevel level) {
    const auto name = shares_file(level);
    auto in = open_artifact(cfg, name.c_str(), "shares");
    return read_series_csv(in, name);
}

[[nodiscard]] inline std::vector<double> window_slice(const MonthlySeries& s, MonthWindow w) {
    return {s.begin() + w.first.ordinal(), s.begin() + w.last.ordinal() + 1};
}

[[nodiscard]] inline std::string fmt_g(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

}  // namespace detail

/**
 * @brief Postings + annual statistics -> counts cube, monthly stats, terciles.
 *
 * Writes counts.csv, postings.csv, monthly_stats.csv, terciles.csv and
 * ingest_report.json into the output directory.
 */
inline StageLog run_ingest(const PipelineConfig& cfg) {
    cfg.validate();
    StageLog log;
    const auto index = detail::load_index(cfg);

    auto annual_in = detail::open_input(cfg.annual_file);
    const auto annual = load_annual_stats(annual_in);
    const auto stats = monthly_stats(annual, cfg.anchor_month);

    std::map<SocCode, double> base_wages;
    if (cfg.wage_base_file) {
        auto in = detail::open_input(*cfg.wage_base_file);
        base_wages = load_base_wages(in, cfg.base_year);
    } else {
        base_wages = yearly_mean(stats.wage, cfg.base_year);
    }
    const auto terciles = cfg.tercile_scheme == TercileScheme::EqualCount
                              ? assign_terciles(base_wages)
                              : assign_terciles_weighted(base_wages, yearly_mean(stats.employment, cfg.base_year));

    if (!std::filesystem::exists(cfg.postings_file)) {
        throw Error(Errc::FileNotFound, "postings file not found: " + cfg.postings_file.string());
    }
    Ingestor ingestor(index, cfg.window);
    if (std::filesystem::file_size(cfg.postings_file) == 0) {
        log.warnings.push_back("postings file is empty; writing an empty cube");
    } else {
        auto in = detail::open_input(cfg.postings_file);
        auto on_record = [&](const PostingRecord& r) { ingestor.add(r); };
        auto on_malformed = [&] { ingestor.note_malformed(); };
        if (cfg.resolved_postings_format() == PostingsFormat::Csv) {
            read_postings_csv(in, on_record, on_malformed);
        } else {
            read_postings_jsonl(in, on_record, on_malformed);
        }
    }
    const auto result = std::move(ingestor).result();
    if (result.cube.empty() && log.warnings.empty()) log.warnings.push_back("no postings were counted");

    std::filesystem::create_directories(cfg.output_dir);
    detail::write_with(cfg.output_dir / kMentionsFile, [&](auto& o) { write_mentions_csv(result.cube, o); });
    detail::write_with(cfg.output_dir / kPostingsFile, [&](auto& o) { write_postings_csv(result.cube, o); });
    detail::write_with(cfg.output_dir / kMonthlyStatsFile, [&](auto& o) { write_monthly_stats_csv(stats, o); });
    detail::write_with(cfg.output_dir / kTercilesFile,
                       [&](auto& o) { detail::write_terciles_csv(terciles, base_wages, o); });
    auto report = result.report.to_json();
    report["mention_rows"] = result.cube.mention_cells().size();
    report["posting_rows"] = result.cube.posting_cells().size();
    report["warnings"] = log.warnings;
    detail::write_file(cfg.output_dir / kIngestReportFile, report.dump(2) + "\n");

    const auto& r = result.report;
    log.info.push_back("records read: " + std::to_string(r.records_read) + ", counted: " +
                       std::to_string(r.postings_counted) + ", out of window: " + std::to_string(r.out_of_window) +
                       ", bad date: " + std::to_string(r.bad_date) + ", malformed: " +
                       std::to_string(r.malformed_records) + ", unknown SOC: " + std::to_string(r.unknown_soc) +
                       ", unknown task mentions: " + std::to_string(r.unknown_task_mentions));
    log.info.push_back("cube rows: " + std::to_string(result.cube.mention_cells().size()) + " mention, " +
                       std::to_string(result.cube.posting_cells().size()) + " posting");
    return log;
}

/// Task shares at pair level and all aggregate levels, plus pair statistics.
/// Aborts with ConsistencyViolation when the two aggregations disagree.
inline StageLog run_shares(const PipelineConfig& cfg) {
    cfg.validate();
    StageLog log;
    const auto index = detail::load_index_with_terciles(cfg);
    auto mentions_in = detail::open_artifact(cfg, kMentionsFile, "ingest");
    auto postings_in = detail::open_artifact(cfg, kPostingsFile, "ingest");
    const auto cube = read_cube_csv(mentions_in, postings_in);
    auto stats_in = detail::open_artifact(cfg, kMonthlyStatsFile, "ingest");
    const auto stats = read_monthly_stats_csv(stats_in);

    const auto z = occupation_task_share(cube);
    const auto e = employment_share(stats, cfg.window);
    const auto y = task_share(z, e, cfg.keep_zeros);
    const auto by_family = aggregate_by_family(y.pairs, index);
    const auto by_tercile = aggregate_by_tercile(y.pairs, index);
    const auto by_cluster = aggregate_by_cluster_tercile(y.pairs, index);
    const double gap = mass_consistency_gap(by_family, by_tercile);
    if (gap > kMassTolerance) {
        throw Error(Errc::ConsistencyViolation,
                    "family and tercile aggregates disagree by " + csv::format_double(gap));
    }
    if (z.orphan_counts > 0) {
        log.warnings.push_back(std::to_string(z.orphan_counts) + " mention cells without postings were omitted");
    }
    for (const auto& soc : y.missing_employment) {
        log.warnings.push_back("no employment data for " + soc.to_string() + "; its task shares are zero");
    }

    const auto pstats = pair_statistics(cube, index);
    detail::write_with(cfg.output_dir / shares_file(ShareLevel::Pair), [&](auto& o) { write_series_csv(y.pairs, o); });
    detail::write_with(cfg.output_dir / shares_file(ShareLevel::FamilyByOccFamily),
                       [&](auto& o) { write_series_csv(by_family, o); });
    detail::write_with(cfg.output_dir / shares_file(ShareLevel::FamilyByTercile),
                       [&](auto& o) { write_series_csv(by_tercile, o); });
    detail::write_with(cfg.output_dir / shares_file(ShareLevel::ClusterByTercile),
                       [&](auto& o) { write_series_csv(by_cluster, o); });

    SeriesSet aggregates = by_family;
    aggregates.insert(by_tercile.begin(), by_tercile.end());
    aggregates.insert(by_cluster.begin(), by_cluster.end());
    detail::write_file(cfg.output_dir / kSharesJsonFile, series_to_json(aggregates).dump(1) + "\n");

    detail::write_with(cfg.output_dir / kPairStatsFile, [&](std::ostream& o) {
        csv::write_row(o, {"kind", "key", "count"});
        for (const auto& [k, v] : pstats.occs_per_task) csv::write_row(o, {"occs_per_task", k, std::to_string(v)});
        for (const auto& [k, v] : pstats.tasks_per_occ) {
            csv::write_row(o, {"tasks_per_occ", k.to_string(), std::to_string(v)});
        }
        for (const auto& [k, v] : pstats.tasks_per_family) {
            csv::write_row(o, {"tasks_per_family", k, std::to_string(v)});
        }
    });

    nlohmann::ordered_json report{
        {"pair_series", y.pairs.size()},
        {"family_occfamily_series", by_family.size()},
        {"family_tercile_series", by_tercile.size()},
        {"cluster_tercile_series", by_cluster.size()},
        {"orphan_counts", z.orphan_counts},
        {"mass_consistency_max_gap", gap},
        {"mass_consistency_tolerance", kMassTolerance},
        {"warnings", log.warnings},
    };
    detail::write_file(cfg.output_dir / kSharesReportFile, report.dump(2) + "\n");
    log.info.push_back("series: " + std::to_string(y.pairs.size()) + " pair, " + std::to_string(by_family.size()) +
                       " family x occupation family, " + std::to_string(by_tercile.size()) +
                       " family x tercile, " + std::to_string(by_cluster.size()) + " cluster x tercile");
    log.info.push_back("mass consistency max gap: " + csv::format_double(gap));
    return log;
}

/// Smoothed-series trend coefficients for every aggregate series.
[[nodiscard]] inline std::map<SeriesKey, TrendCoefficient> compute_trends(const SeriesSet& set,
                                                                        const PipelineConfig& cfg) {
    std::map<SeriesKey, TrendCoefficient> out;
    for (const auto& [key, values] : set) {
        const auto slice = detail::window_slice(values, cfg.window);
        out.emplace(key, trend_coefficient(moving_average(slice, cfg.smoothing_window), cfg.trend_time_scale));
    }
    return out;
}

/// Writes trend.csv: `level,key1,key2,slope,intercept,n_points`.
inline StageLog run_trend(const PipelineConfig& cfg) {
    cfg.validate();
    StageLog log;
    std::map<SeriesKey, TrendCoefficient> trends;
    for (auto level : kAggregateLevels) trends.merge(compute_trends(detail::load_level(cfg, level), cfg));
    detail::write_with(cfg.output_dir / kTrendFile, [&](std::ostream& o) {
        csv::write_row(o, {"level", "key1", "key2", "slope", "intercept", "n_points"});
        for (const auto& [k, c] : trends) {
            csv::write_row(o, {std::string(to_string(k.level)), k.first, k.second, csv::format_double(c.slope),
                               csv::format_double(c.intercept), std::to_string(c.n_points)});
        }
    });
    log.info.push_back("trend coefficients: " + std::to_string(trends.size()));
    return log;
}

[[nodiscard]] inline SuiteOptions suite_options(const PipelineConfig& cfg) {
    SuiteOptions opt;
    opt.window = cfg.window;
    opt.train_months = cfg.train_months;
    opt.smoothing_window = cfg.forecast_smoothed ? cfg.smoothing_window : 1;
    opt.order = cfg.order;
    opt.grid = cfg.order_grid();
    opt.z = cfg.interval_z;
    opt.threads = cfg.threads;
    return opt;
}

/// Forecast suite over the family x tercile series.
inline StageLog run_forecast(const PipelineConfig& cfg) {
    cfg.validate();
    StageLog log;
    const auto set = detail::load_level(cfg, ShareLevel::FamilyByTercile);
    const auto suite = forecast_suite(set, suite_options(cfg));
    const int first = cfg.window.first.ordinal();

    detail::write_with(cfg.output_dir / kForecastFile, [&](std::ostream& o) {
        csv::write_row(o, {"family", "tercile", "month", "mean", "lower95", "upper95", "actual"});
        for (const auto& s : suite.series) {
            for (const auto& pt : s.points) {
                csv::write_row(o, {s.key.first, s.key.second,
                                   MonthIndex(first + static_cast<int>(pt.index)).to_string(),
                                   csv::format_double(pt.mean), csv::format_double(pt.lower95),
                                   csv::format_double(pt.upper95),
                                   pt.actual ? csv::format_double(*pt.actual) : std::string()});
            }
        }
    });
    detail::write_with(cfg.output_dir / kEvaluationFile, [&](std::ostream& o) {
        csv::write_row(o, {"family", "tercile", "mape", "n_forecasts"});
        for (const auto& s : suite.series) {
            csv::write_row(o, {s.row.family, s.row.tercile, csv::format_double(s.row.mape),
                               std::to_string(s.row.n_forecasts)});
        }
    });
    detail::write_with(cfg.output_dir / kModelsFile, [&](std::ostream& o) {
        csv::write_row(o, {"family", "tercile", "p", "d", "q", "intercept", "sigma2", "ar", "ma"});
        auto join = [](const std::vector<double>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + csv::format_double(v[i]);
            return s;
        };
        for (const auto& s : suite.series) {
            const auto& m = s.model;
            csv::write_row(o, {s.key.first, s.key.second, std::to_string(m.order.p), std::to_string(m.order.d),
                               std::to_string(m.order.q), csv::format_double(m.intercept),
                               csv::format_double(m.sigma2), join(m.ar_coeffs), join(m.ma_coeffs)});
        }
    });
    detail::write_with(cfg.output_dir / kFailuresFile, [&](std::ostream& o) {
        csv::write_row(o, {"family", "tercile", "error"});
        for (const auto& [k, err] : suite.failures) csv::write_row(o, {k.first, k.second, err});
    });
    for (const auto& s : suite.series) {
        for (const auto& w : s.model.warnings) log.warnings.push_back(s.key.first + "/" + s.key.second + ": " + w);
        if (s.row.n_zero_excluded > 0) {
            log.warnings.push_back(s.key.first + "/" + s.key.second + ": " + std::to_string(s.row.n_zero_excluded) +
                                   " zero actuals excluded from MAPE");
        }
    }
    for (const auto& [k, err] : suite.failures) log.warnings.push_back(k.first + "/" + k.second + ": " + err);
    log.info.push_back("forecast series: " + std::to_string(suite.series.size()) + ", failures: " +
                       std::to_string(suite.failures.size()) + ", skipped (all zero): " +
                       std::to_string(suite.skipped.size()));
    return log;
}

/// Summary markdown plus plot data for every figure-style view.
inline StageLog run_report(const PipelineConfig& cfg) {
    cfg.validate();
    StageLog log;
    std::map<ShareLevel, SeriesSet> levels;
    for (auto level : kAggregateLevels) levels.emplace(level, detail::load_level(cfg, level));

    auto trend_in = detail::open_artifact(cfg, kTrendFile, "trend");
    const auto trend_table = csv::Table::read(trend_in, kTrendFile);
    auto eval_in = detail::open_artifact(cfg, kEvaluationFile, "forecast");
    const auto eval_table = csv::Table::read(eval_in, kEvaluationFile);
    auto fc_in = detail::open_artifact(cfg, kForecastFile, "forecast");
    const auto fc_table = csv::Table::read(fc_in, kForecastFile);

    // plot data: raw and smoothed series on the analysis window
    detail::write_with(cfg.output_dir / kPlotSeriesFile, [&](std::ostream& o) {
        csv::write_row(o, {"level", "key1", "key2", "month", "raw", "smoothed"});
        for (const auto& [level, set] : levels) {
            for (const auto& [key, values] : set) {
                const auto raw = detail::window_slice(values, cfg.window);
                const auto smooth = moving_average(raw, cfg.smoothing_window);
                for (std::size_t t = 0; t < raw.size(); ++t) {
                    csv::write_row(o, {std::string(to_string(level)), key.first, key.second,
                                       MonthIndex(cfg.window.first.ordinal() + static_cast<int>(t)).to_string(),
                                       csv::format_double(raw[t]), csv::format_double(smooth[t])});
                }
            }
        }
    });
    detail::write_with(cfg.output_dir / kPlotForecastFile, [&](std::ostream& o) {
        csv::write_row(o, fc_table.header());
        for (const auto& r : fc_table.rows()) csv::write_row(o, r);
    });

    std::ostringstream md;
    md << "# Task-share report\n\n";
    md << "Window " << cfg.window.first.to_string() << " to " << cfg.window.last.to_string() << ", smoothing window "
       << cfg.smoothing_window << ", training months " << cfg.train_months << ".\n\n";

    const auto& terc = levels.at(ShareLevel::FamilyByTercile);
    md << "## Top " << cfg.top_k << " task families by mean share per wage tercile\n\n";
    for (auto r : {WageTercile::High, WageTercile::Mid, WageTercile::Low}) {
        SeriesSet subset;
        for (const auto& [k, v] : terc) {
            if (k.second == to_string(r)) subset.emplace(k, detail::window_slice(v, cfg.window));
        }
        md << "### " << to_string(r) << " wage\n\n";
        if (subset.empty()) {
            md << "(no series)\n\n";
            continue;
        }
        const auto top = rank_series(subset, ShareLevel::FamilyByTercile, RankBy::MeanLevel, cfg.top_k);
        md << "| rank | family | mean share |\n|---|---|---|\n";
        int rank = 0;
        for (const auto& k : top) {
            const auto& v = subset.at(k);
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            md << "| " << ++rank << " | " << k.first << " | " << detail::fmt_g(mean) << " |\n";
        }
        md << "\n";
    }

    // trend tables: rows key1, columns key2
    const auto c_level = trend_table.column("level");
    const auto c_k1 = trend_table.column("key1");
    const auto c_k2 = trend_table.column("key2");
    const auto c_slope = trend_table.column("slope");
    for (auto level : kAggregateLevels) {
        std::set<std::string> cols;
        std::map<std::string, std::map<std::string, std::string>> cells;
        for (const auto& r : trend_table.rows()) {
            if (r[c_level] != to_string(level)) continue;
            cols.insert(r[c_k2]);
            cells[r[c_k1]][r[c_k2]] = detail::fmt_g(csv::parse_double(r[c_slope]).value_or(0.0), 3);
        }
        std::vector<std::string> col_order(cols.begin(), cols.end());
        if (level != ShareLevel::FamilyByOccFamily) col_order = {"High", "Mid", "Low"};
        md << "## Trend coefficients (" << to_string(level) << ", time scale " << to_string(cfg.trend_time_scale)
           << ")\n\n| |";
        for (const auto& c : col_order) md << " " << c << " |";
        md << "\n|---|";
        for (std::size_t i = 0; i < col_order.size(); ++i) md << "---|";
        md << "\n";
        for (const auto& [row, m] : cells) {
            md << "| " << row << " |";
            for (const auto& c : col_order) {
                auto it = m.find(c);
                md << " " << (it == m.end() ? "" : it->second) << " |";
            }
            md << "\n";
        }
        md << "\n";
    }

    // MAPE table in family x (High, Mid, Low) layout; blank where no series
    {
        const auto c_f = eval_table.column("family");
        const auto c_t = eval_table.column("tercile");
        const auto c_m = eval_table.column("mape");
        std::map<std::string, std::map<std::string, std::string>> cells;
        for (const auto& [k, v] : terc) cells[k.first];
        for (const auto& r : eval_table.rows()) {
            cells[r[c_f]][r[c_t]] = detail::fmt_g(csv::parse_double(r[c_m]).value_or(0.0), 3);
        }
        md << "## One-step forecast MAPE (%)\n\n| Task family | High | Mid | Low |\n|---|---|---|---|\n";
        for (const auto& [fam, m] : cells) {
            md << "| " << fam << " |";
            for (const char* c : {"High", "Mid", "Low"}) {
                auto it = m.find(c);
                md << " " << (it == m.end() ? "" : it->second) << " |";
            }
            md << "\n";
        }
        md << "\n";
    }
    detail::write_file(cfg.output_dir / kReportFile, md.str());
    log.info.push_back("report written to " + (cfg.output_dir / kReportFile).string());
    return log;
}

}  // namespace taskshare::pipeline
