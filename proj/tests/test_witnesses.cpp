#include <gtest/gtest.h>

#include <clonekit/witnesses.hpp>

using namespace clonekit;

namespace {

const catalog& cat() {
    static const catalog c = catalog::load();
    return c;
}

up_matrix unit_strings() {
    up_matrix m;
    m.row_cycle = {{upseq::parse("1(0)"), upseq::parse("(0)")}};
    m.shift = 1;
    return m;
}

up_matrix zero_runs() {
    up_matrix m;
    m.row_cycle = {{upseq::parse("(1)"), upseq::parse("(0)")}};
    m.shift = 1;
    return m;
}

up_matrix single_zeros() {
    up_matrix m;
    m.row_cycle = {{upseq::parse("0(1)"), upseq::parse("(1)")}};
    m.shift = 1;
    return m;
}

}  // namespace

TEST(Wadge, BigJoinWithUnitStrings) {
    const auto r = wadge_construct(as_function(named_terms::big_join()), {unit_strings(), upseq::constant(false)}, "bigjoin");
    EXPECT_TRUE(r.report.pass());
    EXPECT_TRUE(r.family_value);
}

TEST(Wadge, LiminfAlongZeroRuns) {
    const auto r = wadge_construct(as_function(named_terms::lim_inf()), {zero_runs(), upseq::constant(false)}, "liminf");
    EXPECT_TRUE(r.report.pass());
}

TEST(Wadge, MapFollowsItsDefinition) {
    const wadge_map g{{unit_strings(), upseq::constant(false)}};
    EXPECT_EQ(g(upseq::parse("1(0)")), upseq::constant(true));
    EXPECT_EQ(g(upseq::parse("001(0)")), upseq::parse("01(0)"));
    EXPECT_EQ(g(upseq::constant(false)), upseq::constant(false));
    for (const auto& y : upseq_grid(4, 2))
        for (std::size_t i = 0; i < 8; ++i)
            if (y.at(0)) {
                ASSERT_TRUE(g(y).at(i));
            }
}

TEST(Wadge, ContinuousFunctionIsRejected) {
    try {
        wadge_construct(as_function(tvar(0)), {unit_strings(), upseq::constant(false)}, "x0");
        FAIL();
    } catch (const witness_rejected& e) {
        ASSERT_TRUE(e.index());
        EXPECT_EQ(*e.index(), 1u);
    }
}

TEST(Kahane, ThreeFunctionsYieldLiminf) {
    for (const char* lit :
         {"liminf", "liminf{[|x0@stride 2]}", "or(and(x0,limsup{[|x1@stride 1]}),liminf{[|x1@stride 1]})"}) {
        const auto r = kahane_extract(parse_omega_term(lit), zero_runs());
        EXPECT_TRUE(r.report.pass()) << lit;
        for (const auto& y : upseq_grid(5, 3)) ASSERT_EQ(up_eval(*r.term, y), up_eval(*named_terms::lim_inf(), y));
    }
}

TEST(Kahane, CeilJoinIsRejected) {
    EXPECT_THROW(kahane_extract(named_terms::ceil_join(), zero_runs()), witness_rejected);
}

TEST(Kahane, NonT0TwoIsRejected) {
    EXPECT_THROW(kahane_extract(named_terms::lim_sup(), zero_runs()), witness_rejected);
}

TEST(Forall2, Examples) {
    EXPECT_TRUE(forall2_construct(as_function(named_terms::lim_inf()), single_zeros(), "liminf").report.pass());
    EXPECT_TRUE(forall2_construct(as_function(named_terms::forall_w(2)), single_zeros(), "forallw(2)").report.pass());
    EXPECT_THROW(forall2_construct(as_function(named_terms::big_meet()), single_zeros(), "bigmeet"), witness_rejected);
}

TEST(Forall2, CountableStepIsLabelledAsserted) {
    const auto r = forall2_construct(as_function(named_terms::lim_inf()), single_zeros(), "liminf");
    std::size_t asserted = 0;
    for (const auto& c : r.report.checks) asserted += c.verdict == "asserted";
    EXPECT_EQ(asserted, 1u);
}

TEST(FktMatrix, Examples) {
    const auto m33 = fkt_matrix(3, 3);
    EXPECT_TRUE(m33.report.pass());
    EXPECT_EQ(m33.matrix.block_rows(), 3u);
    const auto m11 = fkt_matrix(1, 1);
    EXPECT_TRUE(m11.report.pass());
    for (std::size_t q = 0; q < 5; ++q) EXPECT_EQ(m11.matrix.row(q), upseq(bits(q + 1, 0), {1}));
    const auto m20 = fkt_matrix(2, 0);
    EXPECT_TRUE(m20.matrix.finite());
    EXPECT_TRUE(m20.report.pass());
    EXPECT_THROW(fkt_matrix(9, 1), usage_error);
}

// fkt(k,t) lies outside exactly the Lim0 clones at or above (k,t).
TEST(FktMatrix, ProfileMatchesTheIndexOrder) {
    for (int k = 1; k <= 3; ++k)
        for (int t = 0; t <= k; ++t) {
            const auto r = fkt_matrix(k, t);
            EXPECT_TRUE(r.report.pass()) << k << "," << t;
        }
}

TEST(FktGen, CanonicalWitnessGivesIdentity) {
    for (auto [k, t] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {2, 2}, {3, 3}, {2, 0}}) {
        const auto f = fkt_term(k, t);
        const auto r = fkt_gen_substitution(as_function(f), k, t, mixed_meet_matrix(k, t), to_string(*f));
        EXPECT_TRUE(r.report.pass()) << k << "," << t;
        // With t = 0 only the first k coordinates are pinned by the points.
        const std::size_t n = t == 0 ? std::size_t(k) : 30;
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(r.g.sigma[j], j);
    }
}

TEST(FktGen, LiminfOdisjLiminf) {
    const auto f = parse_omega_term("odisj(w,w){liminf;liminf}");
    EXPECT_TRUE(fkt_gen_substitution(as_function(f), 2, 2, mixed_meet_matrix(2, 2), "liminf odisj liminf").report.pass());
}

TEST(FktGen, MeetHasNoWitness) {
    EXPECT_THROW(fkt_gen_substitution(as_function(named_terms::big_meet()), 1, 1, mixed_meet_matrix(1, 1), "bigmeet"),
                 witness_rejected);
}

TEST(LiminfInterpolate, Examples) {
    const auto one = truth_table::constant(true, 2);
    const auto r1 = liminf_interpolate({one, one}, one, {0, 1, 2, 3});
    EXPECT_TRUE(r1.report.pass());
    const auto and3 = parse_function("and(x0,x1,x2)@3");
    const auto or3 = parse_function("or(x0,x1,x2)@3");
    EXPECT_TRUE(liminf_interpolate({or3, and3, or3, and3}, and3, {0, 3, 5, 7}).report.pass());
    EXPECT_TRUE(liminf_interpolate({and3}, and3, {}).report.pass());
    EXPECT_THROW(liminf_interpolate({one, and3}, and3, {}), arity_error);
}

TEST(Identities, Eq455BothDisplays) {
    const auto bm = named_terms::beta_meet();
    const auto lhs = fkt_term(2, 1);
    for (const auto& x : upseq_grid(6, 3)) ASSERT_EQ(up_eval(*bm, x), up_eval(*lhs, nested_medians(x))) << x.to_string();
    const auto med = parse_function("exists(2;x0,x1,x2)@3");
    for (std::uint32_t r = 0; r < 8; ++r) {
        const upseq p(bits{std::uint8_t(r & 1)}, bits{std::uint8_t((r >> 1) & 1), std::uint8_t((r >> 2) & 1)});
        EXPECT_EQ(up_eval(*bm, p), med.bit(r));
    }
}

TEST(Identities, Forall3BelowNestedForall2) {
    const auto f3 = named_terms::forall_w(3);
    for (const auto& x : upseq_grid(6, 3))
        if (up_eval(*f3, x)) {
            ASSERT_TRUE(forall2_nesting(x)) << x.to_string();
        }
}

TEST(Suites, RegistryResolves) {
    const auto suites = load_suites();
    EXPECT_THROW(find_suite(suites, "nosuch"), usage_error);
    for (const char* id : {"fiber_O2", "fiber_MT0T1", "beta_roundtrip", "cobweb_k3", "kahane", "wadge"})
        EXPECT_NO_THROW(find_suite(suites, id));
}

TEST(Suites, ExamplesPass) {
    const auto suites = load_suites();
    for (const char* id : {"fiber_O2", "fiber_MT0T1", "beta_roundtrip", "cobweb_k3", "eq455", "fkt_gen"}) {
        const auto r = run_suite(cat(), find_suite(suites, id));
        EXPECT_TRUE(r.pass()) << id << ": " << r.first_failure().value_or("");
    }
}

TEST(Suites, Cobweb3HasEightProfiles) {
    const auto r = run_suite(cat(), find_suite(load_suites(), "cobweb_k3"));
    ASSERT_EQ(r.checks.size(), 2u);
    EXPECT_EQ(r.checks[0].witness["rows"].size(), 8u);
    std::set<std::string> profiles;
    for (const auto& row : r.checks[0].witness["rows"]) profiles.insert(row["profile"].get<std::string>());
    EXPECT_EQ(profiles.size(), 8u);
}

// A fiber report replays from its JSON alone.
TEST(Suites, FiberReportReplays) {
    const auto r = run_suite(cat(), find_suite(load_suites(), "fiber_T0T1"));
    const auto j = nlohmann::json::parse(r.to_json().dump());
    std::size_t replayed = 0;
    for (const auto& c : j["checks"]) {
        if (!c["witness"].contains("matrix") || !c["witness"].contains("verdict")) continue;
        const auto t = parse_omega_term(c["witness"]["term"].get<std::string>());
        const auto R = c["witness"]["relation"].get<countable_relation>();
        const auto M = c["witness"]["matrix"].get<up_matrix>();
        EXPECT_TRUE(refute_preservation(*t, R, M).refuted);
        ++replayed;
    }
    EXPECT_EQ(replayed, 5u);
}

TEST(Suites, ReportsAreDeterministic) {
    const auto suites = load_suites();
    std::vector<suite_spec> some = {find_suite(suites, "fiber_MT0"), find_suite(suites, "cobweb_k2"),
                                    find_suite(suites, "forall2")};
    const auto a = run_suites(cat(), some);
    const auto b = run_suites(cat(), some);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].to_json().dump(), b[i].to_json().dump());
    EXPECT_EQ(a[0].suite, "fiber_MT0");
}
