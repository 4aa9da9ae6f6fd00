#include <gtest/gtest.h>

#include <functional>

#include <clonekit/catalog.hpp>
#include <clonekit/countable_relation.hpp>
#include <clonekit/omega_term.hpp>

using namespace clonekit;

namespace {

// Window oracle: the point is read exactly, and every connective is decided
// from the first N values of its input stream, with the eventual behavior
// taken from the second half of the window.
constexpr std::size_t N = 192;

using point = std::function<bool(std::size_t)>;

bool window_eval(const omega_term& t, const point& x);

std::vector<bool> window_stream(const family& f, const point& x) {
    std::vector<bool> v;
    for (const auto& p : f.prefix) v.push_back(window_eval(*p, x));
    for (std::size_t i = 0; v.size() < N; ++i)
        for (const auto& b : f.block) {
            const std::size_t off = f.stride * i;
            v.push_back(window_eval(*b, [&x, off](std::size_t n) { return x(n + off); }));
        }
    v.resize(N);
    if (f.mode != family::scan::none) {
        const bool absorbing = f.mode == family::scan::join;
        for (std::size_t i = 1; i < N; ++i)
            if (v[i - 1] == absorbing) v[i] = absorbing;
    }
    return v;
}

bool decide(inf_tag tag, int k, const std::vector<bool>& v) {
    const auto half = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    const auto zeros = std::count(v.begin(), v.end(), false);
    switch (tag) {
        case inf_tag::big_meet: return zeros == 0;
        case inf_tag::big_join: return zeros < static_cast<std::ptrdiff_t>(v.size());
        case inf_tag::lim_inf: return std::find(half, v.end(), false) == v.end();
        case inf_tag::lim_sup: return std::find(half, v.end(), true) != v.end();
        case inf_tag::forall_w: return zeros < k;
        case inf_tag::exists_w: return static_cast<std::ptrdiff_t>(v.size()) - zeros >= k;
    }
    return false;
}

bool window_eval(const omega_term& t, const point& x) {
    using node = omega_term::node;
    switch (t.kind) {
        case node::var: return x(t.index);
        case node::constant: return t.value;
        case node::negation: return !window_eval(*t.kids[0], x);
        case node::fin_apply: {
            std::uint32_t row = 0;
            for (std::size_t i = 0; i < t.kids.size(); ++i)
                if (window_eval(*t.kids[i], x)) row |= 1u << i;
            return t.head->bit(row);
        }
        case node::inf_apply: return decide(t.tag, t.k, window_stream(t.fam, x));
        case node::compose: {
            const auto v = window_stream(t.fam, x);
            // Past the window the stream repeats its second half's last period;
            // the nested terms used here only read the window.
            return window_eval(*t.body, [v](std::size_t n) { return n < v.size() ? bool(v[n]) : bool(v.back()); });
        }
        case node::odisj: {
            std::size_t fin = 0, w = 0;
            for (int b : t.blocks) {
                if (b == omega_block) ++w;
                else fin += static_cast<std::size_t>(b);
            }
            std::vector<point> inputs;
            std::vector<bool> all_one;
            std::size_t at = 0, a = 0;
            for (int b : t.blocks) {
                if (b == omega_block) {
                    const std::size_t base = fin + a++;
                    point p = [&x, base, w](std::size_t j) { return x(base + w * j); };
                    bool one = true;
                    for (std::size_t j = 0; j < N && one; ++j) one = p(j);
                    inputs.push_back(p);
                    all_one.push_back(one);
                } else {
                    const std::size_t start = at, len = static_cast<std::size_t>(b);
                    at += len;
                    point p = [&x, start, len](std::size_t j) { return j < len ? x(start + j) : false; };
                    bool one = true;
                    for (std::size_t j = 0; j < len; ++j) one = one && p(j);
                    inputs.push_back(p);
                    all_one.push_back(one);
                }
            }
            const auto zeros = std::count(all_one.begin(), all_one.end(), false);
            if (zeros >= 2) return false;
            if (zeros == 1) {
                const std::size_t i = static_cast<std::size_t>(std::find(all_one.begin(), all_one.end(), false) - all_one.begin());
                return window_eval(*t.kids[i], inputs[i]);
            }
            for (std::size_t i = 0; i < all_one.size(); ++i)
                if (window_eval(*t.kids[i], inputs[i])) return true;
            return false;
        }
    }
    return false;
}

bool oracle(const term_ptr& t, const upseq& x) {
    return window_eval(*t, [&x](std::size_t n) { return x.at(n); });
}

// Every term named in the fiber data plus the standard connectives.
std::vector<term_ptr> catalog_terms() {
    std::vector<term_ptr> out = {named_terms::big_meet(),  named_terms::big_join(),   named_terms::lim_inf(),
                                 named_terms::lim_sup(),   named_terms::forall_w(2),  named_terms::forall_w(3),
                                 named_terms::exists_w(2), named_terms::ceil_join(),  named_terms::floor_meet(),
                                 named_terms::beta_meet(), named_terms::beta_join(),  named_terms::beta_liminf(),
                                 fkt_term(2, 1),           fkt_term(3, 3),            fkt_term(3, 1)};
    const auto cat = catalog::load();
    for (const auto& f : cat.fibers()) {
        for (const auto& n : f.nodes) out.insert(out.end(), n.generators.begin(), n.generators.end());
        for (const auto& e : f.edges) out.push_back(e.separator);
    }
    return out;
}

const std::vector<upseq>& grid4() {
    static const auto g = upseq_grid(6, 4);
    return g;
}

}  // namespace

TEST(Upseq, CanonicalFormDecidesEquality) {
    EXPECT_EQ(upseq::parse("01(10)"), upseq::parse("011(01)"));
    EXPECT_EQ(upseq::parse("1(11)"), upseq::constant(true));
    EXPECT_EQ(upseq::parse("0101(01)"), upseq::parse("(01)"));
    const auto g = upseq_grid(4, 3);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) ASSERT_NE(g[i].take(24), g[j].take(24));
}

TEST(Upseq, ParseErrorsCarryPositions) {
    try {
        upseq::parse("01(2)");
        FAIL();
    } catch (const parse_error& e) {
        EXPECT_EQ(e.position(), 3u);
    }
    EXPECT_THROW(upseq::parse("01(10"), parse_error);
    EXPECT_THROW(upseq::parse("()"), parse_error);
}

TEST(UpEval, Examples) {
    EXPECT_TRUE(up_eval(*named_terms::lim_inf(), upseq::parse("0(1)")));
    EXPECT_FALSE(up_eval(*named_terms::forall_w(2), upseq::parse("00(1)")));
    EXPECT_TRUE(up_eval(*named_terms::beta_meet(), upseq::parse("10(1)")));
}

TEST(UpEval, MatchesWindowOracle) {
    const auto terms = catalog_terms();
    for (const auto& t : terms)
        for (const auto& x : grid4()) ASSERT_EQ(up_eval(*t, x), oracle(t, x)) << to_string(*t) << " at " << x.to_string();
}

TEST(UpEval, NonCanonicalRepresentationsAgree) {
    for (const auto& t : catalog_terms())
        for (const auto& x : upseq_grid(4, 3)) {
            bits p = x.prefix();
            p.insert(p.end(), x.cycle().begin(), x.cycle().end());
            bits c = x.cycle();
            c.insert(c.end(), x.cycle().begin(), x.cycle().end());
            const upseq y(p, c);
            ASSERT_EQ(up_eval(*t, x), up_eval(*t, y));
            // One full cycle past the prefix the point is unchanged.
            ASSERT_EQ(up_eval(*t, x.shift(x.prefix_len())), up_eval(*t, x.shift(x.prefix_len() + x.period())));
        }
}

TEST(UpEval, DualTermIsDeMorganDual) {
    for (const auto& t : catalog_terms()) {
        const auto d = dual_term(t);
        for (const auto& x : upseq_grid(5, 3)) ASSERT_EQ(up_eval(*d, x), !up_eval(*t, ~x)) << to_string(*t);
    }
}

TEST(OmegaParser, PrintedTermsReparse) {
    for (const auto& t : catalog_terms()) {
        const auto s = to_string(*t);
        const auto u = parse_omega_term(s);
        EXPECT_EQ(to_string(*u), s);
        for (const auto& x : upseq_grid(4, 2)) ASSERT_EQ(up_eval(*u, x), up_eval(*t, x)) << s;
    }
    EXPECT_THROW(parse_omega_term("liminf{[|x0@stride 1]"), parse_error);
    EXPECT_THROW(parse_omega_term("nosuch(x0)"), parse_error);
}

TEST(RelHolds, Examples) {
    EXPECT_TRUE(rel_holds(countable_relation::lim_eq(0), upseq::parse("1101(0)")));
    EXPECT_FALSE(rel_holds(countable_relation::of(countable_relation::kind::big_meet_eq0), upseq::parse("(1)")));
    const auto M = mixed_meet_matrix(3, 3);
    EXPECT_TRUE(rel_holds(countable_relation::lim_meet(3), M.column(0)));
    EXPECT_FALSE(rel_holds(countable_relation::lim_meet(3), upseq::parse("(110111)")));
}

TEST(RelHolds, NamesRoundTrip) {
    for (const char* n : {"LimEq(0)", "LimEq(1)", "BigMeetEq0", "BigJoinEq1", "LimMeetK(3)", "MixedMeet(3,1)",
                          "IncreasingJoinGraph", "DecreasingMeetGraph", "LimGraph", "LEQ"})
        EXPECT_EQ(countable_relation::parse(n).name(), n);
    EXPECT_THROW(countable_relation::parse("LimEq(2)"), error);
}

TEST(RowImage, Examples) {
    const auto M = mixed_meet_matrix(3, 3);
    EXPECT_EQ(row_image(*tvar(0), M), M.column(0));
    EXPECT_EQ(row_image(*fkt_term(3, 3), M), upseq::constant(true));
    up_matrix U;
    U.row_prefix = {upseq::parse("(1)")};
    U.row_cycle = {{upseq::parse("0(1)"), upseq::parse("(1)")}};
    U.shift = 1;
    // Row 0 has no zero, every later row has exactly one.
    EXPECT_EQ(row_image(*named_terms::big_meet(), U), upseq::parse("1(0)"));
}

TEST(RowImage, MatchesRowByRowEvaluation) {
    for (int k = 1; k <= 4; ++k)
        for (int t = 0; t <= k; ++t) {
            const auto M = mixed_meet_matrix(k, t);
            for (const auto& term : {fkt_term(k, t), named_terms::lim_inf(), named_terms::big_join()}) {
                const auto img = row_image(*term, M);
                const std::size_t rows = M.finite() ? M.prefix_rows() : 40;
                for (std::size_t i = 0; i < rows; ++i) ASSERT_EQ(img.at(i), up_eval(*term, M.row(i)));
            }
        }
}

TEST(Refute, Examples) {
    const auto M = mixed_meet_matrix(3, 3);
    EXPECT_TRUE(refute_preservation(*fkt_term(3, 3), countable_relation::lim_meet(3), M).refuted);
    EXPECT_FALSE(refute_preservation(*tvar(0), countable_relation::lim_meet(3), M).refuted);
    up_matrix E;
    E.row_prefix = {upseq::constant(false)};
    E.row_cycle = {{upseq::parse("1(0)"), upseq::parse("(0)")}};
    E.shift = 1;
    const auto r = refute_preservation(*named_terms::big_join(), countable_relation::of(countable_relation::kind::lim_graph), E);
    EXPECT_TRUE(r.refuted) << r.reason;
}

TEST(Refute, ReplaysFromJson) {
    const auto M = mixed_meet_matrix(2, 1);
    const nlohmann::json j = {{"term", to_string(*fkt_term(2, 1))}, {"relation", "MixedMeet(2,1)"}, {"matrix", M}};
    const auto back = nlohmann::json::parse(j.dump());
    const auto r = refute_preservation(*parse_omega_term(back["term"].get<std::string>()),
                                       back["relation"].get<countable_relation>(), back["matrix"].get<up_matrix>());
    EXPECT_TRUE(r.refuted);
    EXPECT_EQ(back["matrix"].get<up_matrix>(), M);
}

TEST(Search, Examples) {
    const search_bounds b;
    EXPECT_FALSE(search_counterexample(*named_terms::ceil_join(), countable_relation::lim_eq(0), b));
    const auto m = search_counterexample(*named_terms::big_join(), countable_relation::lim_eq(0), b);
    ASSERT_TRUE(m);
    EXPECT_TRUE(refute_preservation(*named_terms::big_join(), countable_relation::lim_eq(0), *m).refuted);
    const auto m2 = search_counterexample(*fkt_term(2, 1), countable_relation::mixed_meet(2, 1), b);
    ASSERT_TRUE(m2);
    EXPECT_TRUE(refute_preservation(*fkt_term(2, 1), countable_relation::mixed_meet(2, 1), *m2).refuted);
}

TEST(Search, DeterministicForSeed) {
    search_bounds b;
    b.seed = 11;
    for (const auto& t : {named_terms::big_meet(), named_terms::lim_sup(), named_terms::beta_liminf()}) {
        const auto a = search_counterexample(*t, countable_relation::lim_eq(1), b);
        const auto c = search_counterexample(*t, countable_relation::lim_eq(1), b);
        ASSERT_EQ(a.has_value(), c.has_value());
        if (a) {
            EXPECT_EQ(nlohmann::json(*a).dump(), nlohmann::json(*c).dump());
        }
    }
}

TEST(Search, FoundMatricesAlwaysRefute) {
    const search_bounds b;
    const std::vector<countable_relation> rels = {countable_relation::lim_eq(0), countable_relation::lim_eq(1),
                                                  countable_relation::of(countable_relation::kind::lim_graph),
                                                  countable_relation::lim_meet(2)};
    for (const auto& t : catalog_terms())
        for (const auto& R : rels)
            if (auto m = search_counterexample(*t, R, b)) {
                ASSERT_TRUE(refute_preservation(*t, R, *m).refuted) << to_string(*t);
            }
}

TEST(UpMatrix, ColumnsMatchEntries) {
    for (int k = 1; k <= 4; ++k)
        for (int t = 1; t <= k; ++t) {
            const auto M = mixed_meet_matrix(k, t);
            for (std::size_t j = 0; j < 20; ++j) {
                const auto c = M.column(j);
                for (std::size_t i = 0; i < 60; ++i) ASSERT_EQ(c.at(i), M.entry(i, j));
            }
        }
}
