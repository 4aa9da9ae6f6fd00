#include <gtest/gtest.h>

#include <cstdlib>
#include <map>

#include <clonekit/catalog.hpp>

#include "oracle.hpp"

using namespace clonekit;

namespace {

const catalog& cat() {
    static const catalog c = catalog::load();
    return c;
}

std::vector<truth_table> small_tables() {
    std::vector<truth_table> out;
    for (int n = 1; n <= 3; ++n)
        for (auto& f : all_tables(n)) out.push_back(std::move(f));
    return out;
}

}  // namespace

TEST(Census, GroupSizes) {
    std::map<std::string, int> g;
    for (const auto& n : cat().nodes()) ++g[n.group];
    EXPECT_EQ(g["cube"], 8);
    EXPECT_EQ(g["series"], 32);
    EXPECT_EQ(g["meet"], 8);
    EXPECT_EQ(g["aff"], 11);
    EXPECT_EQ(g["dual"], 3);
    EXPECT_EQ(cat().nodes().size(), 62u);
}

TEST(Census, EveryCoverVerifies) {
    for (auto [lo, up] : cat().covers()) {
        const auto c = cat().verify_edge(lo, up);
        EXPECT_TRUE(c.ok) << c.lower << " < " << c.upper << ": " << c.separation;
    }
}

TEST(Classify, Examples) {
    EXPECT_EQ(cat().classify(parse_function("ite(x0,x1,x2)@3")).name, "T0T1");
    EXPECT_EQ(cat().classify(parse_function("forall(2; x0,x1,x2)@3")).name, "DualMono");
    EXPECT_EQ(cat().classify(parse_function("0@1")).name, "Unary(0)");
    EXPECT_EQ(cat().classify(parse_function("and(x0,x1)@2")).name, "MeetT0T1");
    EXPECT_EQ(cat().classify(parse_function("not(x0)@1")).name, "Unary(not)");
    EXPECT_EQ(cat().classify(parse_function("xor(x0,x1,x2)@3")).name, "AffDualT0");
    EXPECT_EQ(cat().classify(parse_function("nimp(x0,x1)@2")).name, "T0(<w)");
}

// The least clone is below every clone that contains f.
TEST(Classify, ConsistentOnAllSmallTables) {
    for (const auto& f : small_tables()) {
        const auto& least = cat().classify(f);
        ASSERT_TRUE(cat().contains(least, f));
        const std::size_t li = *cat().find(least.name);
        for (std::size_t i = 0; i < cat().nodes().size(); ++i)
            if (cat().contains(cat().nodes()[i], f)) {
                ASSERT_TRUE(cat().includes(li, i)) << least.name << " vs " << cat().nodes()[i].name;
            }
    }
}

TEST(Classify, LeastCloneIsGeneratedByF) {
    // <f> at arity 3 is exactly the slice of its least catalog clone when that
    // clone is not a tower limit distinguished only above the cap.
    for (const auto& f : all_tables(2)) {
        if (f.is_constant(false) || f.is_constant(true)) continue;
        const auto s = close({f}, 3);
        ASSERT_TRUE(s.complete());
        const auto& least = cat().classify(f);
        if (least.k == "<w") continue;
        EXPECT_TRUE(s.same_restriction(cat().pol(*cat().find(least.name), 3))) << least.name;
    }
}

TEST(Contains, RelationConditionsMatchNaiveOracle) {
    for (const auto& n : cat().nodes())
        for (const auto& c : n.constraints) {
            if (c.k != constraint::kind::relation || c.name == "U3") continue;
            for (const auto& f : all_tables(2)) ASSERT_EQ(cat().satisfies(c, f), oracle::preserves(f, c.rel)) << n.name << " " << c.name;
        }
}

TEST(Pol, MonotoneTernaryCountMatchesBruteForce) {
    std::size_t want = 0;
    for (const auto& f : all_tables(3)) want += oracle::monotone(f);
    EXPECT_EQ(want, 20u);
    EXPECT_EQ(cat().pol(*cat().find("M"), 3).stratum(3).size(), want);
    EXPECT_EQ(cat().pol(*cat().find("Op2"), 3).stratum(3).size(), 256u);
}

TEST(IdentifyClone, Examples) {
    EXPECT_EQ(cat().identify_clone({parse_function("forall(2;x0,x1,x2)@3")}, 3).node->name, "DualMono");
    EXPECT_EQ(cat().identify_clone({parse_function("and(x0,x1)@2")}, 3).node->name, "MeetT0T1");
    EXPECT_EQ(cat().identify_clone({parse_function("nimp(x0,x1)@2")}, 3).node->name, "T0(<w)");
    EXPECT_EQ(cat().identify_clone({parse_function("and(x0,x1)@2"), parse_function("not(x0)@1")}, 3).node->name, "Op2");
    EXPECT_THROW(cat().identify_clone({parse_function("x0@1")}, 5), usage_error);
}

TEST(Lattice, Scopes) {
    const auto fig1 = cat().lattice_graph("fig1");
    EXPECT_EQ(fig1.nodes.size(), 62u);
    std::size_t towers = 0;
    for (const auto& e : fig1.edges) towers += e.attrs.value("tower_limit", false);
    EXPECT_GT(towers, 0u);
    EXPECT_NE(fig1.to_dot().find("style=dashed"), std::string::npos);
    EXPECT_EQ(cat().lattice_graph("fiber:MT0").nodes.size(), 6u);
    EXPECT_EQ(cat().lattice_graph("fiber:MT0T1").nodes.size(), 9u);
    EXPECT_EQ(cat().lattice_graph("side_tube:2").nodes.size(), 4u);
    EXPECT_EQ(cat().lattice_graph("side_tube:3").nodes.size(), 8u);
    EXPECT_THROW(cat().lattice_graph("nosuch"), usage_error);
}

TEST(Lattice, JsonLinksReferToNodes) {
    for (const char* scope : {"fig1", "fiber:T0T1", "side_tube:3"}) {
        const auto j = cat().lattice_graph(scope).to_json();
        std::set<std::string> ids;
        for (const auto& n : j["nodes"]) ids.insert(n["id"].get<std::string>());
        for (const auto& l : j["links"]) {
            EXPECT_TRUE(ids.count(l["source"].get<std::string>()));
            EXPECT_TRUE(ids.count(l["target"].get<std::string>()));
        }
    }
}

TEST(Fibers, SizesAndWitnessesReplay) {
    const std::map<std::string, std::size_t> sizes{{"O2", 2}, {"T0", 3}, {"T0T1", 5}, {"M", 4}, {"MT0", 6},
                                                   {"MT0T1", 9}, {"D", 2}, {"DT0", 3}, {"DM", 3}};
    ASSERT_EQ(cat().fibers().size(), sizes.size());
    for (const auto& f : cat().fibers()) {
        EXPECT_EQ(f.nodes.size(), sizes.at(f.id)) << f.id;
        for (const auto& e : f.edges)
            EXPECT_TRUE(refute_preservation(*e.separator, e.relation, e.witness).refuted) << f.id << " " << e.lower;
    }
}

TEST(Fibers, UpperNodesContainTheirSeparators) {
    const search_bounds b;
    for (const auto& f : cat().fibers())
        for (const auto& e : f.edges)
            for (const auto& r : f.node(e.upper).relations)
                EXPECT_FALSE(search_counterexample(*e.separator, r, b)) << e.separator_literal << " vs " << r.name();
}

TEST(SideTube, DownsetCounts) {
    for (int k = 1; k <= 5; ++k) EXPECT_EQ(side_tube_downsets(k).size(), std::size_t{1} << k);
    EXPECT_THROW(side_tube_downsets(7), usage_error);
}

TEST(DataDir, MissingFilesAreUsageErrors) {
    EXPECT_THROW(catalog::load("/nonexistent/clonekit"), usage_error);
}
