#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "omega_term.hpp"
#include "relation.hpp"
#include "up_matrix.hpp"

namespace clonekit {

// A relation preserved (or not) by ω-ary functions. Columns of a test matrix
// are indexed by row; the countable kinds read a whole column as an element of
// 2^ω, the finite kind reads the first `arity` entries of a matrix with exactly
// that many rows.
struct countable_relation {
    enum class kind {
        lim_eq,                 // the column converges to c
        big_meet_eq0,           // some entry is 0
        big_join_eq1,           // some entry is 1
        mixed_meet,             // one of the first k-t entries is 0, or eventually every t-block has a 0 (t >= 1)
        increasing_join_graph,  // entries 1,2,... increase and entry 0 is their join
        decreasing_meet_graph,  // entries 1,2,... decrease and entry 0 is their meet
        lim_graph,              // entries 1,2,... converge to entry 0
        finite,
    };

    kind k = kind::lim_eq;
    int c = 0;  // lim_eq value
    int blocks = 0, omega_blocks = 0;  // mixed_meet (k, t)
    std::optional<standard_relation> fin;

    static countable_relation lim_eq(int c) { return {kind::lim_eq, c, 0, 0, {}}; }
    static countable_relation mixed_meet(int k, int t) {
        if (k < 1 || t < 0 || t > k) throw usage_error("MixedMeet needs 0 <= t <= k, k >= 1");
        if (t == 0) return finite_rel({rel_tag::meet_zero, k});
        return {kind::mixed_meet, 0, k, t, {}};
    }
    static countable_relation lim_meet(int k) { return mixed_meet(k, k); }
    static countable_relation of(kind k) { return {k, 0, 0, 0, {}}; }
    static countable_relation finite_rel(standard_relation r) { return {kind::finite, 0, 0, 0, r}; }

    bool is_finite() const noexcept { return k == kind::finite; }
    int arity() const { return is_finite() ? fin->realize().arity() : -1; }

    std::string name() const {
        switch (k) {
            case kind::lim_eq: return "LimEq(" + std::to_string(c) + ")";
            case kind::big_meet_eq0: return "BigMeetEq0";
            case kind::big_join_eq1: return "BigJoinEq1";
            case kind::mixed_meet:
                if (blocks == omega_blocks) return "LimMeetK(" + std::to_string(blocks) + ")";
                return "MixedMeet(" + std::to_string(blocks) + "," + std::to_string(omega_blocks) + ")";
            case kind::increasing_join_graph: return "IncreasingJoinGraph";
            case kind::decreasing_meet_graph: return "DecreasingMeetGraph";
            case kind::lim_graph: return "LimGraph";
            case kind::finite: return fin->name();
        }
        return "?";
    }

    static countable_relation parse(const std::string& s) {
        cursor cur(s);
        const std::string word = cur.ident();
        auto args = [&] {
            std::vector<int> v;
            cur.expect('(');
            do v.push_back(cur.number());
            while (cur.accept(','));
            cur.expect(')');
            return v;
        };
        countable_relation r;
        if (word == "LimEq") {
            const auto a = args();
            if (a.size() != 1 || a[0] > 1) cur.fail("LimEq takes one bit");
            r = lim_eq(a[0]);
        } else if (word == "LimMeetK") {
            const auto a = args();
            if (a.size() != 1 || a[0] < 1) cur.fail("LimMeetK takes one positive integer");
            r = lim_meet(a[0]);
        } else if (word == "MixedMeet") {
            const auto a = args();
            if (a.size() != 2 || a[0] < 1 || a[1] > a[0]) cur.fail("MixedMeet takes k >= t");
            r = mixed_meet(a[0], a[1]);
        } else if (word == "BigMeetEq") {
            if (cur.number() != 0) cur.fail("expected BigMeetEq0");
            r = of(kind::big_meet_eq0);
        } else if (word == "BigJoinEq") {
            if (cur.number() != 1) cur.fail("expected BigJoinEq1");
            r = of(kind::big_join_eq1);
        } else if (word == "IncreasingJoinGraph") {
            r = of(kind::increasing_join_graph);
        } else if (word == "DecreasingMeetGraph") {
            r = of(kind::decreasing_meet_graph);
        } else if (word == "LimGraph") {
            r = of(kind::lim_graph);
        } else {
            static const std::pair<const char*, rel_tag> plain[] = {
                {"LEQ", rel_tag::leq},           {"NEQ", rel_tag::neq},           {"Zero", rel_tag::zero},
                {"One", rel_tag::one},           {"GraphXor", rel_tag::graph_xor3}, {"GraphAnd", rel_tag::graph_and},
                {"GraphOr", rel_tag::graph_or}};
            bool found = false;
            for (const auto& [n, tag] : plain)
                if (word == n) {
                    standard_relation sr{tag};
                    if (tag == rel_tag::graph_xor3) {
                        const int a = cur.number();
                        if (a != 3 && a != 4) cur.fail("expected GraphXor3 or GraphXor4");
                        if (a == 4) sr.tag = rel_tag::graph_xor4;
                    }
                    r = finite_rel(sr);
                    found = true;
                }
            if (!found && (word == "MeetZero" || word == "JoinOne")) {
                const auto a = args();
                if (a.size() != 1 || a[0] < 1 || a[0] > 8) cur.fail(word + " takes an arity 1..8");
                r = finite_rel({word == "MeetZero" ? rel_tag::meet_zero : rel_tag::join_one, a[0]});
                found = true;
            }
            if (!found) cur.fail("unknown relation '" + word + "'");
        }
        if (!cur.at_end()) cur.fail("trailing input");
        return r;
    }

    bool operator==(const countable_relation& o) const { return name() == o.name(); }
};

inline void to_json(nlohmann::json& j, const countable_relation& r) { j = r.name(); }
inline void from_json(const nlohmann::json& j, countable_relation& r) {
    r = countable_relation::parse(j.get<std::string>());
}

// Whether a column belongs to R.
inline bool rel_holds(const countable_relation& R, const upseq& col) {
    using kind = countable_relation::kind;
    switch (R.k) {
        case kind::lim_eq: return col.cycle_all(R.c == 1);
        case kind::big_meet_eq0: return col.has(false);
        case kind::big_join_eq1: return col.has(true);
        case kind::mixed_meet: {
            const std::size_t fin = static_cast<std::size_t>(R.blocks - R.omega_blocks);
            for (std::size_t i = 0; i < fin; ++i)
                if (!col.at(i)) return true;
            const std::size_t t = static_cast<std::size_t>(R.omega_blocks);
            if (t == 0) return false;
            // Blocks starting past the prefix repeat with period L / gcd(L, t).
            std::size_t j0 = 0;
            while (fin + t * j0 < col.prefix_len()) ++j0;
            const std::size_t per = col.period() / std::gcd(col.period(), t);
            for (std::size_t j = j0; j < j0 + per; ++j) {
                bool zero = false;
                for (std::size_t a = 0; a < t && !zero; ++a) zero = !col.at(fin + t * j + a);
                if (!zero) return false;
            }
            return true;
        }
        case kind::increasing_join_graph: {
            const upseq tail = col.shift(1);
            const std::size_t one = tail.first(true);
            if (one != upseq::npos && tail.shift(one).has(false)) return false;
            return col.at(0) == (one != upseq::npos);
        }
        case kind::decreasing_meet_graph: {
            const upseq tail = col.shift(1);
            const std::size_t zero = tail.first(false);
            if (zero != upseq::npos && tail.shift(zero).has(true)) return false;
            return col.at(0) == (zero == upseq::npos);
        }
        case kind::lim_graph: {
            const upseq tail = col.shift(1);
            return tail.cycle_all(col.at(0));
        }
        case kind::finite: {
            const auto rel = R.fin->realize();
            std::uint32_t t = 0;
            for (int i = 0; i < rel.arity(); ++i)
                if (col.at(static_cast<std::size_t>(i))) t |= 1u << i;
            return rel.contains(t);
        }
    }
    throw structural_error("unknown relation kind");
}

// The first column of M outside R, or nullopt when every column is in R.
inline std::optional<std::size_t> first_bad_column(const countable_relation& R, const up_matrix& M) {
    const std::size_t h = M.column_horizon();
    for (std::size_t j = 0; j < h; ++j)
        if (!rel_holds(R, M.column(j))) return j;
    return std::nullopt;
}

inline bool columns_valid(const countable_relation& R, const up_matrix& M) { return !first_bad_column(R, M); }

namespace detail {

inline constexpr std::size_t image_window = 64;
inline constexpr std::size_t image_max_period = 16;

}  // namespace detail

// The column (t(row_0), t(row_1), ...). Values along each sliding cycle row
// are sampled over a window and must settle into a visible period.
inline upseq row_image(const omega_term& t, const up_matrix& M) {
    M.validate();
    bits pre;
    for (const auto& r : M.row_prefix) pre.push_back(up_eval(t, r));
    if (M.finite()) return upseq(pre, {0});
    std::vector<upseq> streams;
    for (std::size_t r = 0; r < M.block_rows(); ++r) {
        if (M.shift == 0) {
            streams.push_back(upseq::constant(up_eval(t, M.block_row(0, r))));
            continue;
        }
        bits v(detail::image_window);
        for (std::size_t q = 0; q < v.size(); ++q) v[q] = up_eval(t, M.block_row(q, r));
        auto fit = fit_upseq(v, detail::image_max_period);
        if (!fit) throw structural_error("row values along cycle row " + std::to_string(r) + " do not settle");
        streams.push_back(*fit);
    }
    return interleave(streams).prepend(pre);
}

struct refutation {
    bool refuted = false;
    std::string reason;
    std::optional<std::size_t> bad_column;
    std::optional<upseq> image;
};

// Replays the check that M's columns lie in R while the row image does not.
inline refutation refute_preservation(const omega_term& t, const countable_relation& R, const up_matrix& M) {
    refutation out;
    if (R.is_finite() != M.finite()) {
        out.reason = "matrix shape does not fit the relation";
        return out;
    }
    if (R.is_finite() && M.prefix_rows() != static_cast<std::size_t>(R.arity())) {
        out.reason = "matrix needs exactly " + std::to_string(R.arity()) + " rows";
        return out;
    }
    if (auto j = first_bad_column(R, M)) {
        out.bad_column = j;
        out.reason = "column " + std::to_string(*j) + " is not in " + R.name();
        return out;
    }
    out.image = row_image(t, M);
    out.refuted = !rel_holds(R, *out.image);
    out.reason = out.refuted ? "row image " + out.image->to_string() + " is not in " + R.name()
                             : "row image " + out.image->to_string() + " is in " + R.name();
    return out;
}

// The matrix whose columns satisfy MixedMeet(k,t) while every row is sent to
// 1 by the function fkt_term(k,t). Each row has its zeros confined to one
// input block of that function, finitely many of them in the ω-blocks.
inline up_matrix mixed_meet_matrix(int k, int t) {
    if (k < 1 || t < 0 || t > k || k > 8) throw usage_error("matrix parameters need 0 <= t <= k <= 8");
    up_matrix m;
    const std::size_t fin = static_cast<std::size_t>(k - t);
    if (t == 0) {
        for (int r = 0; r < k; ++r) {
            bits p(static_cast<std::size_t>(k), 1);
            p[static_cast<std::size_t>(r)] = 0;
            m.row_prefix.emplace_back(p, bits{static_cast<std::uint8_t>(r == 0 ? 0 : 1)});
        }
        return m;
    }
    for (std::size_t r = 0; r < fin; ++r) {
        bits p(r, 1);
        p.push_back(0);
        m.row_prefix.emplace_back(p, bits{1});
    }
    for (int r = 0; r < t; ++r) {
        bits p(static_cast<std::size_t>(r), 1);
        p.push_back(0);
        bits cyc(static_cast<std::size_t>(t), 1);
        cyc[static_cast<std::size_t>(r)] = 0;
        m.row_cycle.push_back({upseq(p, {1}), upseq(bits(fin, 1), cyc)});
    }
    m.shift = static_cast<std::size_t>(t);
    m.offset = fin;
    return m;
}

struct search_bounds {
    std::size_t max_prefix = 3;
    std::size_t max_cycle = 2;
    std::size_t max_block_rows = 3;
    std::size_t samples = 200;
    std::uint64_t seed = 7;
};

namespace detail {

inline const std::vector<upseq>& structured_rows() {
    static const std::vector<upseq> s = [] {
        std::vector<upseq> v;
        for (const char* w : {"(0)", "(1)", "1(0)", "0(1)", "01(0)", "11(0)", "00(1)", "10(1)"}) v.push_back(upseq::parse(w));
        return v;
    }();
    return s;
}

inline upseq random_upseq(std::mt19937_64& rng, const search_bounds& b) {
    const std::size_t pl = rng() % (b.max_prefix + 1), cl = 1 + rng() % b.max_cycle;
    bits p(pl), c(cl);
    for (auto& x : p) x = rng() & 1u;
    for (auto& x : c) x = rng() & 1u;
    return upseq(p, c);
}

// Calls visit on candidates in the documented order until it returns true.
template <class Visit>
bool for_each_candidate(const countable_relation& R, const search_bounds& b, Visit&& visit) {
    const auto& S = structured_rows();
    std::mt19937_64 rng(b.seed);
    if (R.is_finite()) {
        const std::size_t K = static_cast<std::size_t>(R.arity());
        if (K <= 4) {
            std::size_t total = 1;
            for (std::size_t i = 0; i < K; ++i) total *= S.size();
            for (std::size_t code = 0; code < total; ++code) {
                up_matrix m;
                for (std::size_t i = 0, c = code; i < K; ++i, c /= S.size()) m.row_prefix.push_back(S[c % S.size()]);
                if (visit(m)) return true;
            }
        }
        for (std::size_t n = 0; n < b.samples; ++n) {
            up_matrix m;
            for (std::size_t i = 0; i < K; ++i) m.row_prefix.push_back(random_upseq(rng, b));
            if (visit(m)) return true;
        }
        return false;
    }
    for (int k = 1; k <= 4; ++k)
        for (int t = 1; t <= k; ++t)
            if (visit(mixed_meet_matrix(k, t))) return true;
    for (std::size_t pre = 0; pre <= S.size(); ++pre)
        for (const auto& tmpl : S)
            for (const auto& fill : S)
                for (std::size_t shift : {1, 0})
                    for (std::size_t offset : {0, 1}) {
                        up_matrix m;
                        if (pre > 0) m.row_prefix.push_back(S[pre - 1]);
                        m.row_cycle.push_back({tmpl, fill});
                        m.shift = shift;
                        m.offset = offset;
                        if (visit(m)) return true;
                    }
    for (std::size_t n = 0; n < b.samples; ++n) {
        up_matrix m;
        const std::size_t pre = rng() % 3, cyc = 1 + rng() % b.max_block_rows;
        for (std::size_t i = 0; i < pre; ++i) m.row_prefix.push_back(random_upseq(rng, b));
        for (std::size_t i = 0; i < cyc; ++i) m.row_cycle.push_back({random_upseq(rng, b), random_upseq(rng, b)});
        m.shift = rng() % 3;
        m.offset = rng() % 2;
        if (visit(m)) return true;
    }
    return false;
}

}  // namespace detail

// Bounded search for a matrix refuting that t preserves R: structured
// candidates first, then seeded random ones. Deterministic for a fixed seed.
inline std::optional<up_matrix> search_counterexample(const omega_term& t, const countable_relation& R,
                                                      const search_bounds& b = {}) {
    if (b.max_cycle == 0 || b.max_block_rows == 0) throw usage_error("search bounds must be positive");
    std::optional<up_matrix> hit;
    detail::for_each_candidate(R, b, [&](const up_matrix& m) {
        if (!columns_valid(R, m)) return false;
        if (rel_holds(R, row_image(t, m))) return false;
        hit = m;
        return true;
    });
    return hit;
}

}  // namespace clonekit
