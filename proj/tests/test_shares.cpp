#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "taskshare/shares.hpp"

using namespace taskshare;

namespace {

Errc error_code(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::Internal;
}

SocCode soc(const char* s) { return SocCode::parse(s); }

MonthlyStats flat_employment(const std::map<SocCode, double>& e) {
    MonthlyStats s;
    for (const auto& [k, v] : e) {
        s.employment[k] = MonthlySeries(kMonthCount, v);
        s.wage[k] = MonthlySeries(kMonthCount, 20.0);
    }
    return s;
}

// Random corpus in both representations: dense for the oracle, cube + index for the library.
struct Toy {
    oracle::ToyCorpus dense;
    CountsCube cube;
    MonthlyStats stats;
    TaxonomyIndex index;
    std::vector<std::string> task_ids;
    std::vector<SocCode> socs;
};

Toy make_toy(std::uint32_t seed, int tasks, int occs, int months) {
    std::mt19937 rng(seed);
    Toy toy;
    auto& d = toy.dense;
    d.tasks = tasks;
    d.occs = occs;
    d.months = months;
    const std::vector<std::string> families{"IT", "Health", "Admin"};
    const std::vector<std::string> occ_families{"Computer and Mathematical", "Management", "Healthcare Support"};
    const std::vector<WageTercile> bins{WageTercile::Low, WageTercile::Mid, WageTercile::High};

    std::vector<TaskDescriptor> rows;
    for (int i = 0; i < tasks; ++i) {
        const int cluster = static_cast<int>(rng() % 4);
        const auto& fam = families[cluster % families.size()];
        toy.task_ids.push_back("task " + std::to_string(i));
        d.task_family.push_back(fam);
        d.task_cluster.push_back("cluster " + std::to_string(cluster));
        rows.push_back({"", toy.task_ids.back(), d.task_cluster.back(), fam});
    }
    std::map<SocCode, std::string> occ;
    TercileMap terciles;
    for (int j = 0; j < occs; ++j) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02d-%04d", kMajorGroups[j % 22].code, 1000 + j);
        toy.socs.push_back(SocCode::parse(buf));
        d.occ_family.push_back(occ_families[rng() % occ_families.size()]);
        const auto bin = bins[rng() % 3];
        d.occ_tercile.emplace_back(to_string(bin));
        occ[toy.socs.back()] = d.occ_family.back();
        terciles[toy.socs.back()] = bin;
    }
    toy.index = TaxonomyIndex::build(rows, occ).with_terciles(terciles);

    std::uniform_real_distribution<double> emp(100.0, 1e5);
    d.employment.assign(occs, std::vector<double>(months));
    d.postings.assign(occs, std::vector<std::vector<std::vector<int>>>(months));
    for (int j = 0; j < occs; ++j) {
        toy.stats.employment[toy.socs[j]] = MonthlySeries(kMonthCount, 0.0);
        toy.stats.wage[toy.socs[j]] = MonthlySeries(kMonthCount, 10.0);
        for (int t = 0; t < months; ++t) {
            d.employment[j][t] = emp(rng);
            toy.stats.employment[toy.socs[j]][t] = d.employment[j][t];
            const int count = static_cast<int>(rng() % 5);  // sometimes no postings at all
            for (int k = 0; k < count; ++k) {
                std::vector<int> mentioned;
                std::vector<std::string> names;
                for (int m = static_cast<int>(rng() % 4); m > 0; --m) {
                    const int i = static_cast<int>(rng() % tasks);
                    mentioned.push_back(i);
                    names.push_back(toy.task_ids[i]);
                }
                d.postings[j][t].push_back(mentioned);
                toy.cube.add_posting(toy.socs[j], MonthIndex(t), names);
            }
        }
    }
    return toy;
}

void expect_series_match(const SeriesSet& got, ShareLevel level,
                         const std::map<std::pair<std::string, std::string>, std::vector<double>>& want, int months,
                         double tol) {
    std::size_t nonzero = 0;
    for (const auto& [key, s] : want) {
        const bool all_zero = std::all_of(s.begin(), s.end(), [](double v) { return v == 0.0; });
        auto it = got.find({level, key.first, key.second});
        if (all_zero) {
            EXPECT_EQ(it, got.end()) << key.first << "/" << key.second;
            continue;
        }
        ++nonzero;
        ASSERT_NE(it, got.end()) << key.first << "/" << key.second;
        for (int t = 0; t < months; ++t) EXPECT_NEAR(it->second[t], s[t], tol);
    }
    EXPECT_EQ(got.size(), nonzero);
}

}  // namespace

TEST(OccupationTaskShare, Ratios) {
    CountsCube cube;
    cube.set_postings({soc("15-1132"), MonthIndex(0)}, 10);
    cube.set_mentions({"python", soc("15-1132"), MonthIndex(0)}, 5);
    cube.set_mentions({"perl", soc("15-1132"), MonthIndex(3)}, 3);  // m = 0
    const auto z = occupation_task_share(cube);
    EXPECT_DOUBLE_EQ(z.z.at({"python", soc("15-1132"), MonthIndex(0)}), 0.5);
    EXPECT_FALSE(z.z.contains({"sql", soc("15-1132"), MonthIndex(0)}));
    EXPECT_EQ(z.orphan_counts, 1u);
    EXPECT_EQ(z.z.size(), 1u);
}

TEST(EmploymentShare, Normalizes) {
    {
        const auto e = employment_share(flat_employment({{soc("15-1132"), 500}}));
        EXPECT_DOUBLE_EQ(e.at(soc("15-1132"), MonthIndex(10)), 1.0);
    }
    {
        const auto e = employment_share(flat_employment({{soc("15-1132"), 30}, {soc("11-9111"), 70}}));
        EXPECT_DOUBLE_EQ(e.at(soc("15-1132"), MonthIndex(0)), 0.3);
        EXPECT_DOUBLE_EQ(e.at(soc("11-9111"), MonthIndex(0)), 0.7);
    }
    {
        auto stats = flat_employment({{soc("15-1132"), 30}, {soc("11-9111"), 70}});
        stats.employment[soc("15-1132")][40] = 0;
        stats.employment[soc("11-9111")][40] = 0;
        EXPECT_EQ(error_code([&] { (void)employment_share(stats); }), Errc::ZeroTotalEmployment);
        // outside the window it does not matter
        EXPECT_NO_THROW((void)employment_share(stats, {MonthIndex(0), MonthIndex(39)}));
    }
}

TEST(EmploymentShare, SumsToOneAndScaleInvariant) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> emp(0.0, 1e7);
    MonthlyStats stats;
    for (int j = 0; j < 40; ++j) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "11-%04d", j);
        auto& s = stats.employment[SocCode::parse(buf)];
        for (int t = 0; t < kMonthCount; ++t) s.push_back(emp(rng));
    }
    const auto e = employment_share(stats);
    auto scaled = stats;
    for (auto& [k, s] : scaled.employment) {
        for (auto& v : s) v *= 1234.5;
    }
    const auto e2 = employment_share(scaled);
    for (int t = 0; t < kMonthCount; ++t) {
        double total = 0.0;
        for (const auto& [k, s] : e.values) {
            total += s[t];
            EXPECT_GE(s[t], 0.0);
            EXPECT_NEAR(e2.values.at(k)[t], s[t], 1e-15);
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(TaskShare, Products) {
    OccupationTaskShares z;
    z.z[{"python", soc("15-1132"), MonthIndex(0)}] = 0.5;
    z.z[{"sql", soc("11-9111"), MonthIndex(0)}] = 0.7;
    EmploymentShare e;
    e.values[soc("15-1132")] = MonthlySeries(kMonthCount, 0.2);
    e.values[soc("11-9111")] = MonthlySeries(kMonthCount, 0.0);
    const auto y = task_share(z, e);
    EXPECT_DOUBLE_EQ(y.pairs.at({ShareLevel::Pair, "python", "15-1132"})[0], 0.1);
    EXPECT_FALSE(y.pairs.contains({ShareLevel::Pair, "sql", "11-9111"}));  // all-zero dropped
    EXPECT_TRUE(task_share(z, e, true).pairs.contains({ShareLevel::Pair, "sql", "11-9111"}));
}

TEST(TaskShare, MissingEmploymentIsReported) {
    OccupationTaskShares z;
    z.z[{"python", soc("15-1132"), MonthIndex(0)}] = 0.5;
    const auto y = task_share(z, EmploymentShare{});
    EXPECT_TRUE(y.missing_employment.contains(soc("15-1132")));
    EXPECT_TRUE(y.pairs.empty());
}

TEST(TaskShare, TwoByTwoMatchesHandComputation) {
    // tasks a, b; occupations 15-1132 (employment 1), 43-4051 (employment 3); two months
    std::vector<TaskDescriptor> rows{{"", "a", "c1", "F"}, {"", "b", "c2", "F"}};
    const auto idx = TaxonomyIndex::build(rows, {{soc("15-1132"), "X"}, {soc("43-4051"), "Y"}});
    CountsCube cube;
    cube.add_posting(soc("15-1132"), MonthIndex(0), {"a", "b"});
    cube.add_posting(soc("15-1132"), MonthIndex(0), {"a"});
    cube.add_posting(soc("43-4051"), MonthIndex(0), {"b"});
    cube.add_posting(soc("43-4051"), MonthIndex(1), {"a", "a"});
    cube.add_posting(soc("43-4051"), MonthIndex(1), {});
    const auto y = task_share(occupation_task_share(cube),
                              employment_share(flat_employment({{soc("15-1132"), 1}, {soc("43-4051"), 3}})));
    auto at = [&](const char* task, const char* s, int t) {
        auto it = y.pairs.find({ShareLevel::Pair, task, s});
        return it == y.pairs.end() ? 0.0 : it->second[t];
    };
    EXPECT_DOUBLE_EQ(at("a", "15-1132", 0), 0.25 * 1.0);
    EXPECT_DOUBLE_EQ(at("b", "15-1132", 0), 0.25 * 0.5);
    EXPECT_DOUBLE_EQ(at("a", "43-4051", 0), 0.0);
    EXPECT_DOUBLE_EQ(at("b", "43-4051", 0), 0.75 * 1.0);
    EXPECT_DOUBLE_EQ(at("a", "43-4051", 1), 0.75 * 0.5);
    EXPECT_DOUBLE_EQ(at("b", "43-4051", 1), 0.0);
    EXPECT_DOUBLE_EQ(at("a", "15-1132", 1), 0.0);
}

TEST(TaskShare, RandomCorporaMatchBruteForce) {
    for (std::uint32_t seed = 1; seed <= 10; ++seed) {
        const int months = 12;
        const auto toy = make_toy(seed, 7, 9, months);
        const auto want = oracle::brute_force(toy.dense);
        const auto e = employment_share(toy.stats, {MonthIndex(0), MonthIndex(months - 1)});
        const auto y = task_share(occupation_task_share(toy.cube), e);

        std::map<std::pair<std::string, std::string>, std::vector<double>> pair_want;
        for (int i = 0; i < toy.dense.tasks; ++i) {
            for (int j = 0; j < toy.dense.occs; ++j) {
                pair_want[{toy.task_ids[i], toy.socs[j].to_string()}] = want.y[i][j];
            }
        }
        expect_series_match(y.pairs, ShareLevel::Pair, pair_want, months, 1e-12);
        expect_series_match(aggregate_by_family(y.pairs, toy.index), ShareLevel::FamilyByOccFamily, want.by_family,
                            months, 1e-12);
        expect_series_match(aggregate_by_tercile(y.pairs, toy.index), ShareLevel::FamilyByTercile, want.by_tercile,
                            months, 1e-12);
        expect_series_match(aggregate_by_cluster_tercile(y.pairs, toy.index), ShareLevel::ClusterByTercile,
                            want.by_cluster, months, 1e-12);
    }
}

TEST(Aggregate, TwoTermSumAndIdentity) {
    std::vector<TaskDescriptor> rows{{"", "python", "s", "IT"}, {"", "sql", "d", "IT"}};
    const auto idx = TaxonomyIndex::build(rows, {{soc("15-1132"), "Computer and Mathematical"}})
                         .with_terciles({{soc("15-1132"), WageTercile::High}});
    SeriesSet pairs;
    pairs[{ShareLevel::Pair, "python", "15-1132"}] = MonthlySeries(kMonthCount, 0.1);
    const auto single = aggregate_by_family(pairs, idx);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single.begin()->second, pairs.begin()->second);

    pairs[{ShareLevel::Pair, "sql", "15-1132"}] = MonthlySeries(kMonthCount, 0.2);
    const auto fam = aggregate_by_family(pairs, idx);
    EXPECT_NEAR(fam.at({ShareLevel::FamilyByOccFamily, "IT", "Computer and Mathematical"})[5], 0.3, 1e-15);

    // everything in High: tercile aggregate equals the family total
    const auto ter = aggregate_by_tercile(pairs, idx);
    ASSERT_EQ(ter.size(), 1u);
    EXPECT_EQ(ter.begin()->first.second, "High");
    EXPECT_EQ(ter.begin()->second, fam.begin()->second);
}

TEST(Aggregate, UnresolvableKeys) {
    std::vector<TaskDescriptor> rows{{"", "python", "s", "IT"}};
    const auto idx = TaxonomyIndex::build(rows, {{soc("15-1132"), "Computer and Mathematical"}});
    SeriesSet pairs;
    pairs[{ShareLevel::Pair, "cobol", "15-1132"}] = MonthlySeries(kMonthCount, 0.1);
    EXPECT_EQ(error_code([&] { (void)aggregate_by_family(pairs, idx); }), Errc::UnresolvableKey);
    pairs.clear();
    pairs[{ShareLevel::Pair, "python", "15-1132"}] = MonthlySeries(kMonthCount, 0.1);
    EXPECT_EQ(error_code([&] { (void)aggregate_by_tercile(pairs, idx); }), Errc::UnresolvableKey);
}

TEST(Aggregate, FamilyWithoutLowWagePostingsHasNoLowSeries) {
    std::vector<TaskDescriptor> rows{{"", "prayer", "worship", "Religion"}, {"", "filing", "clerical", "Admin"}};
    const auto idx = TaxonomyIndex::build(rows, {{soc("21-2011"), "Community and Social Service"},
                                                 {soc("43-4051"), "Office and Administrative Support"}})
                         .with_terciles({{soc("21-2011"), WageTercile::High}, {soc("43-4051"), WageTercile::Low}});
    SeriesSet pairs;
    pairs[{ShareLevel::Pair, "prayer", "21-2011"}] = MonthlySeries(kMonthCount, 0.01);
    pairs[{ShareLevel::Pair, "filing", "43-4051"}] = MonthlySeries(kMonthCount, 0.02);
    const auto ter = aggregate_by_tercile(pairs, idx);
    EXPECT_TRUE(ter.contains({ShareLevel::FamilyByTercile, "Religion", "High"}));
    EXPECT_FALSE(ter.contains({ShareLevel::FamilyByTercile, "Religion", "Low"}));
    EXPECT_FALSE(ter.contains({ShareLevel::FamilyByTercile, "Religion", "Mid"}));
}

TEST(Aggregate, MassConsistencyAndMonotonicity) {
    for (std::uint32_t seed = 20; seed < 30; ++seed) {
        const auto toy = make_toy(seed, 12, 15, kMonthCount);
        const auto y = task_share(occupation_task_share(toy.cube), employment_share(toy.stats)).pairs;
        const auto fam = aggregate_by_family(y, toy.index);
        const auto ter = aggregate_by_tercile(y, toy.index);
        EXPECT_LE(mass_consistency_gap(fam, ter), 1e-12);

        // every aggregate dominates each of its parts
        for (const auto& [key, s] : y) {
            const auto& task = toy.index.task(key.first);
            const auto occ_family = *toy.index.occupation_family(SocCode::parse(key.second));
            const auto& agg = fam.at({ShareLevel::FamilyByOccFamily, task.family, occ_family});
            for (int t = 0; t < kMonthCount; ++t) EXPECT_GE(agg[t], s[t]);
        }
    }
}

TEST(PairStats, Counts) {
    std::vector<TaskDescriptor> rows{{"", "a", "c", "F"}, {"", "b", "c", "F"}, {"", "c", "d", "G"}};
    const auto idx = TaxonomyIndex::build(
        rows, {{soc("11-0001"), "Management"}, {soc("11-0002"), "Management"}, {soc("11-0003"), "Management"}});
    {
        CountsCube cube;
        cube.add_posting(soc("11-0001"), MonthIndex(0), {"a"});
        const auto s = pair_statistics(cube, idx);
        EXPECT_EQ(s.occs_per_task.at("a"), 1);
        EXPECT_EQ(s.tasks_per_occ.at(soc("11-0001")), 1);
        EXPECT_EQ(s.tasks_per_family.at("F"), 1);
    }
    {
        CountsCube cube;
        cube.add_posting(soc("11-0001"), MonthIndex(0), {"a", "b"});
        cube.add_posting(soc("11-0002"), MonthIndex(5), {"a"});
        cube.add_posting(soc("11-0003"), MonthIndex(7), {"a", "c"});
        cube.add_posting(soc("11-0003"), MonthIndex(8), {"a"});
        const auto s = pair_statistics(cube, idx);
        EXPECT_EQ(s.occs_per_task.at("a"), 3);
        EXPECT_EQ(s.occs_per_task.at("b"), 1);
        EXPECT_EQ(s.tasks_per_occ.at(soc("11-0003")), 2);
        EXPECT_EQ(s.tasks_per_family.at("F"), 2);
        EXPECT_EQ(s.tasks_per_family.at("G"), 1);
        const auto h = histogram(s.occs_per_task);
        EXPECT_EQ(h.at(1), 2);
        EXPECT_EQ(h.at(3), 1);
    }
}

TEST(SeriesIo, CsvRoundTrip) {
    const auto toy = make_toy(77, 5, 6, kMonthCount);
    const auto y = task_share(occupation_task_share(toy.cube), employment_share(toy.stats)).pairs;
    SeriesSet all = y;
    all.merge(aggregate_by_tercile(y, toy.index));
    std::stringstream buf;
    write_series_csv(all, buf);
    EXPECT_EQ(read_series_csv(buf), all);
    EXPECT_EQ(select_level(all, ShareLevel::Pair), y);
    EXPECT_EQ(series_to_json(all).size(), all.size());
}
