#include <gtest/gtest.h>

#include <clonekit/expr.hpp>
#include <clonekit/named.hpp>
#include <clonekit/truth_table.hpp>

#include "oracle.hpp"

using namespace clonekit;

namespace {

const truth_table AND = named_fn::and_n(2).realize();
const truth_table OR = named_fn::or_n(2).realize();
const truth_table NOT = named_fn::negation().realize();

std::vector<truth_table> tables_up_to(int n) {
    std::vector<truth_table> out;
    for (int a = 1; a <= n; ++a)
        for (auto& t : all_tables(a)) out.push_back(t);
    return out;
}

}  // namespace

TEST(TruthTable, RowOrderPutsX0Lowest) {
    const auto p = truth_table::projection(0, 2);
    EXPECT_EQ(p.to_hex(), "a");
    EXPECT_EQ(AND.to_hex(), "8");
    EXPECT_EQ(truth_table::from_hex(2, "8"), AND);
    EXPECT_EQ(truth_table::from_hex(3, "e8"), named_fn::forall(2, 3).realize());
}

TEST(TruthTable, HexRoundTripAllSmallTables) {
    for (const auto& t : tables_up_to(4)) EXPECT_EQ(truth_table::from_hex(t.arity(), t.to_hex()), t);
    const auto big = named_fn::xor_n(9).realize();
    EXPECT_EQ(truth_table::from_hex(9, big.to_hex()), big);
}

TEST(TruthTable, RejectsBadArity) {
    EXPECT_THROW(truth_table(0), convention_error);
    EXPECT_THROW(truth_table(17), arity_error);
    EXPECT_THROW(truth_table::from_hex(2, "18"), arity_error);
    EXPECT_THROW(truth_table::from_hex(1, "4"), structural_error);
}

TEST(Eval, NamedExamples) {
    EXPECT_TRUE(named_fn::forall(2, 3).realize().eval({true, false, true}));
    EXPECT_TRUE(named_fn::projection(1, 3).realize().eval({false, true, false}));
    EXPECT_FALSE(named_fn::ite().realize().eval({true, false, true}));
    EXPECT_THROW(AND.eval({true}), arity_error);
}

TEST(Named, MatchesDefinitionsByBruteForce) {
    for (int n = 1; n <= 6; ++n) {
        for (int k = 0; k <= n + 1; ++k) {
            const auto fa = oracle::tabulate(n, [&](const std::vector<bool>& x) {
                int zeros = 0;
                for (bool b : x) zeros += !b;
                return zeros < k;
            });
            EXPECT_EQ(named_fn::forall(k, n).realize(), fa);
            if (k <= n) EXPECT_EQ(named_fn::forall(k, n).realize(), named_fn::exists(n - k + 1, n).realize());
        }
    }
    EXPECT_EQ(named_fn::implies().realize(), oracle::tabulate(2, [](auto& x) { return !x[0] || x[1]; }));
    EXPECT_EQ(named_fn::not_implies().realize(), oracle::tabulate(2, [](auto& x) { return x[0] && !x[1]; }));
    EXPECT_EQ(named_fn::ite().realize(), oracle::tabulate(3, [](auto& x) { return (x[0] && x[1]) || (!x[0] && x[2]); }));
}

TEST(Compose, Examples) {
    EXPECT_EQ(compose(AND, {truth_table::projection(0, 2), truth_table::projection(1, 2)}), AND);
    const auto nand = compose(NOT, {AND});
    EXPECT_EQ(nand.word0(), 0b0111u);
    const auto a01 = compose(AND, {truth_table::projection(0, 3), truth_table::projection(1, 3)});
    const auto a02 = compose(AND, {truth_table::projection(0, 3), truth_table::projection(2, 3)});
    EXPECT_EQ(compose(OR, {a01, a02}), oracle::tabulate(3, [](auto& x) { return (x[0] && x[1]) || (x[0] && x[2]); }));
    EXPECT_THROW(compose(AND, {AND}), arity_error);
    EXPECT_THROW(compose(AND, {AND, NOT}), arity_error);
}

TEST(Compose, AssociativeAtArityTwo) {
    const auto t1 = all_tables(1), t2 = all_tables(2);
    std::vector<truth_table> small = t2;
    for (const auto& h : t2)
        for (const auto& g0 : small)
            for (const auto& g1 : small)
                for (const auto& f0 : t1)
                    for (const auto& f1 : t1) {
                        const std::vector<truth_table> fs{f0, f1};
                        EXPECT_EQ(compose(h, {compose(g0, fs), compose(g1, fs)}), compose(compose(h, {g0, g1}), fs));
                    }
}

TEST(Compose, LargeArityMatchesOracle) {
    const auto maj = named_fn::forall(2, 3).realize();
    std::vector<truth_table> fs;
    for (int i = 0; i < 3; ++i) fs.push_back(named_fn::xor_n(8).realize() ^ truth_table::projection(i, 8));
    const auto out = compose(maj, fs);
    for (std::uint32_t r = 0; r < out.rows(); ++r) {
        std::vector<bool> v;
        for (const auto& f : fs) v.push_back(f.bit(r));
        EXPECT_EQ(out.bit(r), maj.eval(v));
    }
}

TEST(Dual, Examples) {
    EXPECT_EQ(demorgan_dual(AND), OR);
    const auto maj = named_fn::forall(2, 3).realize();
    EXPECT_EQ(demorgan_dual(maj), named_fn::exists(2, 3).realize());
    EXPECT_EQ(demorgan_dual(maj), maj);
    for (const auto& f : tables_up_to(3)) EXPECT_EQ(demorgan_dual(demorgan_dual(f)), f);
}

TEST(Dual, IsACloneAutomorphism) {
    for (const auto& g : tables_up_to(2)) {
        const auto comps = all_tables(2);
        std::vector<std::size_t> idx(g.arity(), 0);
        while (true) {
            std::vector<truth_table> fs, dfs;
            for (auto i : idx) {
                fs.push_back(comps[i]);
                dfs.push_back(demorgan_dual(comps[i]));
            }
            EXPECT_EQ(demorgan_dual(compose(g, fs)), compose(demorgan_dual(g), dfs));
            int p = g.arity() - 1;
            while (p >= 0 && idx[p] + 1 == comps.size()) idx[p--] = 0;
            if (p < 0) break;
            ++idx[p];
        }
    }
}

TEST(Bounding, Examples) {
    EXPECT_EQ(clonekit::ceil(AND), named_fn::and_n(3).realize());
    EXPECT_EQ(clonekit::floor(NOT), oracle::tabulate(2, [](auto& x) { return x[0] || !x[1]; }));
    EXPECT_THROW(clonekit::ceil(truth_table(16)), arity_error);
}

TEST(CrossSection, Examples) {
    for (bool c : {false, true}) EXPECT_EQ(cross_section(truth_table::projection(0, 2), c), truth_table::constant(c, 1));
    EXPECT_EQ(cross_section(AND, true), truth_table::projection(0, 1));
    EXPECT_THROW(cross_section(NOT, false), convention_error);
}

TEST(Beta, Examples) {
    const auto id = truth_table::projection(0, 1);
    EXPECT_EQ(beta(id), truth_table::projection(1, 2));
    EXPECT_EQ(beta(truth_table::constant(false, 1)), truth_table::projection(0, 2));
    for (const auto& f : tables_up_to(3)) {
        EXPECT_TRUE(is_selfdual(beta(f)));
        EXPECT_EQ(cross_section(beta(f), false), f);
    }
}

TEST(Beta, BijectionOntoSelfDual) {
    for (int n = 2; n <= 4; ++n)
        for (const auto& f : all_tables(n))
            if (is_selfdual(f)) EXPECT_EQ(beta(cross_section(f, false)), f);
}

TEST(UpClosure, Examples) {
    EXPECT_EQ(up_closure(NOT), truth_table::constant(true, 1));
    EXPECT_EQ(up_closure(AND), AND);
    EXPECT_EQ(up_closure(named_fn::xor_n(2).realize()), OR);
}

TEST(UpClosure, ExtensiveIdempotentMonotone) {
    for (const auto& f : tables_up_to(3)) {
        const auto u = up_closure(f);
        EXPECT_TRUE(leq(f, u));
        EXPECT_EQ(up_closure(u), u);
        EXPECT_TRUE(oracle::monotone(u));
        if (oracle::monotone(f)) EXPECT_EQ(u, f);
    }
}

TEST(EssentialVariables, Examples) {
    EXPECT_EQ(essential_variables(truth_table::projection(1, 3)), std::vector<int>{1});
    EXPECT_TRUE(essential_variables(truth_table::constant(false, 2)).empty());
    EXPECT_EQ(essential_variables(named_fn::forall(2, 3).realize()), (std::vector<int>{0, 1, 2}));
}

TEST(EssentialVariables, CanonicalizeDropsTrailingOnly) {
    const auto p0 = truth_table::projection(0, 3);
    EXPECT_EQ(canonicalize(p0), truth_table::projection(0, 1));
    const auto p2 = truth_table::projection(2, 3);
    EXPECT_EQ(canonicalize(p2), p2);
    EXPECT_EQ(restrict_to_essential(p2), truth_table::projection(0, 1));
    EXPECT_NE(truth_table::projection(0, 1), p0);
}

// ⌈f∘g⃗⌉ = ⌈f⌉∘(π0, ⌈g⃗⌉) and its dual for floor.
TEST(Identities, CeilOfComposition) {
    for (const auto& f : tables_up_to(2))
        for (const auto& g0 : tables_up_to(2)) {
            const int m = g0.arity();
            for (const auto& g1 : all_tables(m)) {
                std::vector<truth_table> gs{g0, g1};
                gs.resize(f.arity());
                const auto lhs = clonekit::ceil(compose(f, gs));
                std::vector<truth_table> args{truth_table::projection(0, m + 1)};
                for (const auto& g : gs) args.push_back(clonekit::ceil(g));
                EXPECT_EQ(lhs, compose(clonekit::ceil(f), args));
            }
        }
}

TEST(Parser, RoundTripsAndErrors) {
    EXPECT_EQ(parse_function("ite(x0,x1,x2)@3"), named_fn::ite().realize());
    EXPECT_EQ(parse_function("forall(2; x0, x1, x2)"), named_fn::forall(2, 3).realize());
    EXPECT_EQ(parse_function("0@1"), truth_table::constant(false, 1));
    EXPECT_EQ(parse_function("and(x0,x1)@3"), compose(AND, {truth_table::projection(0, 3), truth_table::projection(1, 3)}));
    EXPECT_EQ(parse_function("table(e8; x0,x1,x2)"), named_fn::forall(2, 3).realize());
    try {
        parse_function("and(x0,,x1)");
        FAIL();
    } catch (const parse_error& e) {
        EXPECT_EQ(e.position(), 7u);
    }
    EXPECT_THROW(parse_function("ite(x0,x1)"), parse_error);
    EXPECT_THROW(parse_function("x3@2"), parse_error);
    EXPECT_THROW(parse_function("foo(x0)"), parse_error);
    EXPECT_THROW(parse_function("x0 x1"), parse_error);
}

TEST(Parser, DescribeReparses) {
    for (const auto& f : tables_up_to(3)) {
        const auto lit = to_literal(describe(f), f.arity());
        EXPECT_EQ(parse_function(lit), f) << lit;
    }
}
