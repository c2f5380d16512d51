#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "taskshare/taxonomy.hpp"

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

}  // namespace

TEST(SocCode, ParsesCanonicalCodes) {
    const auto a = SocCode::parse("15-1132");
    EXPECT_EQ(a.major(), 15);
    EXPECT_EQ(a.detail(), 1132);
    EXPECT_EQ(a.family(), "Computer and Mathematical");

    const auto b = SocCode::parse("11-9199");
    EXPECT_EQ(b.major(), 11);
    EXPECT_EQ(b.detail(), 9199);
    EXPECT_EQ(b.family(), "Management");
}

TEST(SocCode, RejectsMalformed) {
    EXPECT_EQ(error_code([] { (void)SocCode::parse("1-234"); }), Errc::MalformedSoc);
    EXPECT_EQ(error_code([] { (void)SocCode::parse("15-11a2"); }), Errc::MalformedSoc);
    EXPECT_EQ(error_code([] { (void)SocCode::parse("151132"); }), Errc::MalformedSoc);
    EXPECT_EQ(error_code([] { (void)SocCode::parse(""); }), Errc::MalformedSoc);
    EXPECT_EQ(error_code([] { (void)SocCode::parse("99-1234"); }), Errc::UnknownMajorGroup);
    EXPECT_EQ(error_code([] { (void)SocCode::parse("55-1011"); }), Errc::UnknownMajorGroup);
}

TEST(SocCode, StringRoundTripOnAllFamilies) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> detail(0, 9999);
    EXPECT_EQ(kMajorGroups.size(), 22u);
    for (const auto& g : kMajorGroups) {
        for (int k = 0; k < 20; ++k) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%02d-%04d", g.code, detail(rng));
            EXPECT_EQ(SocCode::parse(buf).to_string(), buf);
        }
    }
}

TEST(TaskName, Canonicalization) {
    EXPECT_EQ(canonicalize_task_name("  Machine \t  Learning "), "machine learning");
    EXPECT_EQ(canonicalize_task_name("PYTHON"), "python");
    EXPECT_EQ(canonicalize_task_name("C and C++"), "c and c++");
    EXPECT_EQ(canonicalize_task_name("   "), "");
}

TEST(LoadTaxonomy, ResolvesTaskToFamily) {
    std::istringstream tasks("task,cluster,family\nPython,Scripting Languages,Information Technology\n");
    std::istringstream socs("soc,family_name\n15-1132,Computer and Mathematical\n");
    const auto idx = load_taxonomy(tasks, socs);
    ASSERT_EQ(idx.tasks().size(), 1u);
    const auto* t = idx.find_task("  python ");
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->name, "Python");
    EXPECT_EQ(t->cluster, "Scripting Languages");
    EXPECT_EQ(t->family, "Information Technology");
    EXPECT_EQ(idx.occupation_family(soc("15-1132")), "Computer and Mathematical");
    EXPECT_FALSE(idx.occupation_family(soc("11-9199")).has_value());
}

TEST(LoadTaxonomy, IdenticalDuplicatesAreAccepted) {
    std::istringstream tasks("task,cluster,family\nPython,Scripting,IT\npython ,Scripting,IT\n");
    std::istringstream socs("soc,family_name\n15-1132,Computer and Mathematical\n");
    EXPECT_EQ(load_taxonomy(tasks, socs).tasks().size(), 1u);
}

TEST(LoadTaxonomy, ConflictingDuplicateIsAnError) {
    std::istringstream tasks("task,cluster,family\nPython,Scripting Languages,IT\nPython,General Programming,IT\n");
    std::istringstream socs("soc,family_name\n15-1132,Computer and Mathematical\n");
    EXPECT_EQ(error_code([&] { (void)load_taxonomy(tasks, socs); }), Errc::DuplicateConflict);
}

TEST(LoadTaxonomy, ClusterInTwoFamiliesIsAnError) {
    std::istringstream tasks("task,cluster,family\nPython,Scripting,IT\nPerl,Scripting,Admin\n");
    std::istringstream socs("soc,family_name\n15-1132,Computer and Mathematical\n");
    EXPECT_EQ(error_code([&] { (void)load_taxonomy(tasks, socs); }), Errc::DuplicateConflict);
}

TEST(LoadTaxonomy, MissingColumnAndEmptyFile) {
    {
        std::istringstream tasks("task,family\nPython,IT\n");
        std::istringstream socs("soc,family_name\n15-1132,x\n");
        EXPECT_EQ(error_code([&] { (void)load_taxonomy(tasks, socs); }), Errc::MissingColumn);
    }
    {
        std::istringstream tasks("");
        std::istringstream socs("soc,family_name\n15-1132,x\n");
        EXPECT_EQ(error_code([&] { (void)load_taxonomy(tasks, socs); }), Errc::EmptyFile);
    }
    {
        std::istringstream tasks("task,cluster,family\n");
        std::istringstream socs("soc,family_name\n15-1132,x\n");
        EXPECT_EQ(error_code([&] { (void)load_taxonomy(tasks, socs); }), Errc::EmptyFile);
    }
}

TEST(LoadTaxonomy, QuotedFieldsWithCommas) {
    std::istringstream tasks("task,cluster,family\n\"Teamwork / Collaboration\",\"Soft, Skills\",Basic\n");
    std::istringstream socs("soc,family_name\n27-1024,\"Arts, Design, Entertainment, Sports, and Media\"\n");
    const auto idx = load_taxonomy(tasks, socs);
    EXPECT_EQ(idx.task("teamwork / collaboration").cluster, "Soft, Skills");
    EXPECT_EQ(*idx.occupation_family(soc("27-1024")), "Arts, Design, Entertainment, Sports, and Media");
}

TEST(Terciles, OnePerBin) {
    const auto r = assign_terciles({{soc("11-0001"), 10}, {soc("11-0002"), 20}, {soc("11-0003"), 30}});
    EXPECT_EQ(r.at(soc("11-0001")), WageTercile::Low);
    EXPECT_EQ(r.at(soc("11-0002")), WageTercile::Mid);
    EXPECT_EQ(r.at(soc("11-0003")), WageTercile::High);
}

TEST(Terciles, TiesBrokenBySocOrder) {
    const auto r = assign_terciles({{soc("11-0002"), 10}, {soc("11-0001"), 10}, {soc("11-0003"), 30}});
    EXPECT_EQ(r.at(soc("11-0001")), WageTercile::Low);
    EXPECT_EQ(r.at(soc("11-0002")), WageTercile::Mid);
    EXPECT_EQ(r.at(soc("11-0003")), WageTercile::High);
}

TEST(Terciles, RemainderGoesToLowerBins) {
    auto sizes = [](int n) {
        std::map<SocCode, double> wages;
        for (int k = 0; k < n; ++k) {
            wages[SocCode::parse("11-" + std::string(4 - std::to_string(k).size(), '0') + std::to_string(k))] =
                10.0 + k;
        }
        std::map<WageTercile, int> count;
        for (const auto& [s, r] : assign_terciles(wages)) ++count[r];
        return std::array<int, 3>{count[WageTercile::Low], count[WageTercile::Mid], count[WageTercile::High]};
    };
    EXPECT_EQ(sizes(964), (std::array<int, 3>{322, 321, 321}));
    EXPECT_EQ(sizes(965), (std::array<int, 3>{322, 322, 321}));
    EXPECT_EQ(sizes(966), (std::array<int, 3>{322, 322, 322}));
    EXPECT_EQ(sizes(1), (std::array<int, 3>{1, 0, 0}));
    EXPECT_EQ(sizes(2), (std::array<int, 3>{1, 1, 0}));
}

TEST(Terciles, RejectsBadWages) {
    EXPECT_EQ(error_code([] { (void)assign_terciles({{soc("11-0001"), 0.0}}); }), Errc::NonPositiveWage);
    EXPECT_EQ(error_code([] { (void)assign_terciles({{soc("11-0001"), -3.0}}); }), Errc::NonPositiveWage);
    EXPECT_EQ(error_code([] { (void)assign_terciles({{soc("11-0001"), std::nan("")}}); }), Errc::NonPositiveWage);
    EXPECT_EQ(error_code([] { (void)assign_terciles({}); }), Errc::InvalidArgument);
}

TEST(Terciles, PartitionMonotonicityAndScaleInvariance) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> wage(8.0, 80.0);
    std::uniform_int_distribution<int> size(1, 200);
    for (int trial = 0; trial < 50; ++trial) {
        std::map<SocCode, double> wages;
        const int n = size(rng);
        for (int k = 0; k < n; ++k) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%02d-%04d", kMajorGroups[k % 22].code, k);
            // coarse rounding produces ties
            wages[SocCode::parse(buf)] = std::round(wage(rng));
        }
        const auto r = assign_terciles(wages);
        ASSERT_EQ(r.size(), wages.size());

        std::map<WageTercile, std::pair<double, double>> range;  // min, max
        for (const auto& [s, bin] : r) {
            auto [it, fresh] = range.try_emplace(bin, wages[s], wages[s]);
            if (!fresh) {
                it->second.first = std::min(it->second.first, wages[s]);
                it->second.second = std::max(it->second.second, wages[s]);
            }
        }
        if (range.contains(WageTercile::Mid)) {
            EXPECT_LE(range[WageTercile::Low].second, range[WageTercile::Mid].first);
        }
        if (range.contains(WageTercile::High)) {
            EXPECT_LE(range[WageTercile::Mid].second, range[WageTercile::High].first);
        }

        auto scaled = wages;
        for (auto& [s, w] : scaled) w *= 3.7;
        EXPECT_EQ(assign_terciles(scaled), r);
    }
}

TEST(Terciles, EmploymentWeighted) {
    // one large low-wage occupation takes the whole bottom third of employment
    const std::map<SocCode, double> wages{
        {soc("11-0001"), 10}, {soc("11-0002"), 20}, {soc("11-0003"), 30}, {soc("11-0004"), 40}};
    const std::map<SocCode, double> emp{
        {soc("11-0001"), 60}, {soc("11-0002"), 10}, {soc("11-0003"), 10}, {soc("11-0004"), 20}};
    const auto r = assign_terciles_weighted(wages, emp);
    EXPECT_EQ(r.at(soc("11-0001")), WageTercile::Low);   // midpoint 0.30
    EXPECT_EQ(r.at(soc("11-0002")), WageTercile::Mid);   // 0.65
    EXPECT_EQ(r.at(soc("11-0003")), WageTercile::High);  // 0.75
    EXPECT_EQ(r.at(soc("11-0004")), WageTercile::High);  // 0.90
}

TEST(TaxonomyIndex, WithTercilesLeavesOriginalUntouched) {
    std::istringstream tasks("task,cluster,family\nPython,Scripting,IT\n");
    std::istringstream socs("soc,family_name\n15-1132,Computer and Mathematical\n");
    const auto idx = load_taxonomy(tasks, socs);
    const auto with = idx.with_terciles({{soc("15-1132"), WageTercile::High}});
    EXPECT_FALSE(idx.tercile(soc("15-1132")).has_value());
    EXPECT_EQ(with.tercile(soc("15-1132")), WageTercile::High);
}
