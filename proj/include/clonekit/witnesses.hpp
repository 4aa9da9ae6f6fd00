#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "countable_relation.hpp"
#include "omega_term.hpp"

namespace clonekit {

// A point of 2^ω ↦ bit, known only through its values.
using omega_fn = std::function<bool(const upseq&)>;

inline omega_fn as_function(term_ptr t) {
    return [t = std::move(t)](const upseq& x) { return up_eval(*t, x); };
}

// Every canonical UP sequence with prefix <= 6 and cycle <= 3.
inline const std::vector<upseq>& sample_grid() {
    static const std::vector<upseq> grid = upseq_grid(6, 3);
    return grid;
}

class witness_rejected : public structural_error {
public:
    explicit witness_rejected(const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : structural_error(what), index_(index) {}
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    std::optional<std::size_t> index_;
};

struct check {
    std::string claim;
    std::string citation;
    std::string verdict;  // pass, fail, asserted, skipped
    nlohmann::json witness = nlohmann::json::object();
};

struct witness_report {
    std::string suite;
    std::vector<check> checks;

    void add(std::string claim, std::string citation, bool ok, nlohmann::json witness = nlohmann::json::object()) {
        checks.push_back({std::move(claim), std::move(citation), ok ? "pass" : "fail", std::move(witness)});
    }
    void note(std::string claim, std::string citation, std::string verdict, nlohmann::json witness = nlohmann::json::object()) {
        checks.push_back({std::move(claim), std::move(citation), std::move(verdict), std::move(witness)});
    }
    void absorb(const witness_report& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }

    bool pass() const {
        for (const auto& c : checks)
            if (c.verdict == "fail") return false;
        return true;
    }
    std::optional<std::string> first_failure() const {
        for (const auto& c : checks)
            if (c.verdict == "fail") return c.claim;
        return std::nullopt;
    }

    nlohmann::json to_json() const {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& c : checks)
            cs.push_back({{"claim", c.claim}, {"citation", c.citation}, {"verdict", c.verdict}, {"witness", c.witness}});
        return {{"suite", suite}, {"checks", cs}, {"overall", pass() ? "pass" : "fail"}};
    }
};

namespace detail {

inline constexpr std::size_t fit_window = 128;
// Leading rows of a witness family whose values are checked one by one.
inline constexpr std::size_t family_check_rows = 64;

// The UP sequence whose first `lead + fit_window` entries are at(0), at(1), ...
template <class F>
upseq fit_values(F&& at, std::size_t lead, const std::string& what) {
    bits v(lead + fit_window);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = at(j);
    auto s = fit_upseq(v, image_max_period);
    if (!s) throw structural_error(what + " does not settle into a period within the sampling window");
    return *s;
}

inline std::size_t checked_rows(const up_matrix& m) {
    return m.prefix_rows() + m.block_rows() * family_check_rows;
}

inline nlohmann::json to_json(const refutation& r) {
    nlohmann::json j = {{"refuted", r.refuted}, {"reason", r.reason}};
    if (r.bad_column) j["bad_column"] = *r.bad_column;
    if (r.image) j["image"] = *r.image;
    return j;
}

}  // namespace detail

// ---- Wadge-type construction ------------------------------------------------

struct wadge_witness {
    up_matrix rows;  // x_0, x_1, ...
    upseq limit;     // x_∞
};

inline void to_json(nlohmann::json& j, const wadge_witness& w) { j = {{"rows", w.rows}, {"limit", w.limit}}; }
inline void from_json(const nlohmann::json& j, wadge_witness& w) {
    w.rows = j.at("rows").get<up_matrix>();
    w.limit = j.at("limit").get<upseq>();
}

// 1y ↦ 1⃗, 0^{q+1}1y ↦ x_q, 0⃗ ↦ x_∞.
struct wadge_map {
    wadge_witness w;
    upseq operator()(const upseq& y) const {
        if (y.at(0)) return upseq::constant(true);
        const std::size_t one = y.first(true);
        if (one == upseq::npos) return w.limit;
        return w.rows.row(one - 1);
    }
};

struct wadge_result {
    wadge_map g;
    bool family_value = false;
    witness_report report;
};

inline wadge_result wadge_construct(const omega_fn& f, const wadge_witness& w, const std::string& f_name) {
    const auto& M = w.rows;
    M.validate();
    if (M.finite()) throw witness_rejected("the family needs infinitely many rows");
    const bool c = f(M.row(0));
    for (std::size_t q = 1; q < detail::checked_rows(M); ++q)
        if (f(M.row(q)) != c)
            throw witness_rejected(f_name + " is not constant on the family: row " + std::to_string(q) + " differs from row 0", q);
    const std::size_t H = M.column_horizon() * w.limit.period() + w.limit.prefix_len();
    for (std::size_t j = 0; j < H; ++j)
        if (!M.column(j).cycle_all(w.limit.at(j)))
            throw witness_rejected("rows do not converge to the limit at coordinate " + std::to_string(j), j);
    if (f(w.limit) == c) throw witness_rejected(f_name + " takes the family value at the limit point");

    wadge_result out{wadge_map{w}, c, {}};
    out.report.suite = "wadge:" + f_name;
    const std::string cite = "Wadge-type dichotomy: a discontinuous function recovers the countable join";
    nlohmann::json wit = {{"f", f_name}, {"witness", w}, {"family_value", c}, {"points", sample_grid().size()}};
    std::optional<upseq> bad;
    for (const auto& y : sample_grid()) {
        const bool fy = f(out.g(y));
        const bool rhs = y.at(0) || (c ? fy : !fy);
        if (rhs != y.has(true)) {
            bad = y;
            break;
        }
    }
    if (bad) wit["counterexample"] = *bad;
    out.report.add(std::string("bigjoin(y) = y0 ") + (c ? "or f(g(y))" : "or not f(g(y))") + " on the sampling grid", cite,
                   !bad, wit);
    bool dominated = true;
    for (const auto& y : sample_grid())
        if (y.at(0) && out.g(y) != upseq::constant(true)) dominated = false;
    out.report.add("every coordinate of g dominates x0 on the sampling grid", cite, dominated);
    return out;
}

// ---- Kahane extraction ------------------------------------------------------

// f(f(y0, y0∧y1, ...), f(y1, y1∧y2, ...), ...).
inline term_ptr kahane_term(const term_ptr& f) {
    family inner;
    inner.block = {tvar(0)};
    inner.mode = family::scan::meet;
    family outer;
    outer.block = {tcompose(f, inner)};
    return tcompose(f, outer);
}

struct kahane_result {
    term_ptr term;
    witness_report report;
};

// x_0 >= x_1 >= ... in f^{-1}(1) converging to 0⃗.
inline kahane_result kahane_extract(const term_ptr& f, const up_matrix& rows) {
    const std::string name = to_string(*f);
    const auto pts = upseq_grid(4, 2);
    std::vector<const upseq*> ones;
    for (const auto& p : pts)
        if (up_eval(*f, p)) ones.push_back(&p);
    for (std::size_t a = 0; a < ones.size(); ++a)
        for (std::size_t b = a; b < ones.size(); ++b)
            if (!(*ones[a] & *ones[b]).has(true))
                throw witness_rejected(name + " is not in T0(2): " + ones[a]->to_string() + " and " + ones[b]->to_string() +
                                       " are disjoint points of its support");
    rows.validate();
    if (rows.finite()) throw witness_rejected("the family needs infinitely many rows");
    const upseq img = row_image(*f, rows);
    if (img.has(false)) {
        const std::size_t q = img.first(false);
        throw witness_rejected("row " + std::to_string(q) + " is not in the support of " + name, q);
    }
    for (std::size_t q = 0; q + 1 < detail::checked_rows(rows); ++q)
        if (!rows.row(q + 1).leq(rows.row(q)))
            throw witness_rejected("row " + std::to_string(q + 1) + " is not below row " + std::to_string(q), q + 1);
    for (std::size_t j = 0; j < rows.column_horizon(); ++j)
        if (!rows.column(j).cycle_all(false))
            throw witness_rejected("rows do not converge to 0 at coordinate " + std::to_string(j), j);

    kahane_result out{kahane_term(f), {}};
    out.report.suite = "kahane:" + name;
    const std::string cite = "Kahane: a monotone T0(2) function outside Lim011 generates liminf with the binary meet";
    std::optional<upseq> bad;
    for (const auto& y : sample_grid())
        if (up_eval(*out.term, y) != y.cycle_all(true)) {
            bad = y;
            break;
        }
    nlohmann::json wit = {{"f", name}, {"term", to_string(*out.term)}, {"family", rows}, {"points", sample_grid().size()}};
    if (bad) wit["counterexample"] = *bad;
    out.report.add("the nested term equals liminf on the sampling grid", cite, !bad, wit);
    return out;
}

// ---- ∀₂ from a function outside T0(ω) ----------------------------------------

// y ↦ ⋀_i ((y_i ∨ x_i) ∧ y) for the points x_i listed as matrix rows.
struct forall2_map {
    up_matrix points;
    upseq operator()(const upseq& y) const {
        const upseq ny = ~y;
        return detail::fit_values(
            [&](std::size_t j) { return y.at(j) && !(ny & ~points.column(j)).has(true); },
            points.column_horizon() + y.prefix_len() + 4 * y.period(), "the meet of the coordinate maps");
    }
};

struct forall2_result {
    forall2_map g;
    witness_report report;
};

inline forall2_result forall2_construct(const omega_fn& f, const up_matrix& points, const std::string& f_name) {
    points.validate();
    if (points.finite()) throw witness_rejected("the witness needs infinitely many points");
    const std::size_t Q = detail::checked_rows(points);
    for (std::size_t i = 0; i < Q; ++i) {
        const upseq xi = points.row(i);
        if (xi.at(i)) throw witness_rejected("point " + std::to_string(i) + " has a 1 at its own index", i);
        if (!f(xi)) throw witness_rejected("point " + std::to_string(i) + " is not in the support of " + f_name, i);
    }
    forall2_result out{forall2_map{points}, {}};
    out.report.suite = "forall2:" + f_name;
    const std::string cite = "a function outside T0(omega) yields forall_2 with the countable meet";
    std::optional<std::size_t> bad;
    for (std::size_t i = 0; i < Q && !bad; ++i) {
        bits p(i, 1);
        p.push_back(0);
        const upseq e(p, {1});
        const upseq z = out.g(e);
        if (z != points.row(i) || !f(z)) bad = i;
    }
    nlohmann::json wit = {{"f", f_name}, {"points", points}, {"strings_checked", Q}};
    if (bad) wit["failing_index"] = *bad;
    out.report.add("f composed with the meet of the coordinate maps is 1 on every string with a single 0", cite, !bad, wit);
    out.report.note("some h in the generated clone satisfies forall_2 <= h (countable closure step)", cite, "asserted");
    return out;
}

// ---- fkt matrices -----------------------------------------------------------

struct fkt_matrix_result {
    up_matrix matrix;
    witness_report report;
};

inline fkt_matrix_result fkt_matrix(int k, int t, const search_bounds& b = {}) {
    if (k < 1 || k > 8 || t < 0 || t > k) throw usage_error("fkt_matrix needs 0 <= t <= k <= 8");
    fkt_matrix_result out{mixed_meet_matrix(k, t), {}};
    const auto term = fkt_term(k, t);
    const std::string tag = "(" + std::to_string(k) + "," + std::to_string(t) + ")";
    out.report.suite = "fkt_matrix" + tag;
    const std::string cite = "the orthogonal disjunction of forall_2 and liminf blocks lies outside exactly the L0 clones above its index";
    const auto rel = countable_relation::mixed_meet(k, t);
    const auto r = refute_preservation(*term, rel, out.matrix);
    out.report.add("fkt" + tag + " refutes " + rel.name(), cite, r.refuted,
                   {{"term", to_string(*term)}, {"relation", rel.name()}, {"matrix", out.matrix}, {"verdict", detail::to_json(r)}});
    for (const auto& [a, s] : side_tube_indices(k)) {
        if (a == k && s >= t) continue;
        const auto other = countable_relation::mixed_meet(a, s);
        const auto m = search_counterexample(*term, other, b);
        nlohmann::json wit = {{"relation", other.name()}, {"seed", b.seed}};
        if (m) wit["matrix"] = *m;
        out.report.add("fkt" + tag + " survives bounded search against " + other.name(), cite, !m, wit);
    }
    return out;
}

// ---- variable substitution from a non-L0(k,t) witness -------------------------

// y ↦ (y_{σ(j)})_j.
struct index_substitution {
    std::vector<std::size_t> sigma;  // σ over the sampling window
    upseq operator()(const upseq& y) const {
        bits v(sigma.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = y.at(sigma[j]);
        auto s = fit_upseq(v, detail::image_max_period);
        if (!s) throw structural_error("substituted point does not settle into a period within the sampling window");
        return *s;
    }
};

struct fkt_gen_result {
    index_substitution g;
    witness_report report;
};

// The witness lists x_0..x_{k-t-1} as prefix rows and the sequences
// (x_{r,q})_q as the t cycle rows, block q holding x_{k-t,q}, ..., x_{k-1,q}.
inline fkt_gen_result fkt_gen_substitution(const omega_fn& f, int k, int t, const up_matrix& W, const std::string& f_name) {
    if (k < 1 || t < 0 || t > k || k > 8) throw usage_error("fkt parameters need 0 <= t <= k <= 8");
    W.validate();
    const std::size_t fin = static_cast<std::size_t>(k - t), T = static_cast<std::size_t>(t);
    if (W.prefix_rows() != fin || W.block_rows() != T)
        throw witness_rejected("the witness needs " + std::to_string(fin) + " fixed points and " + std::to_string(T) +
                               " sequences");
    for (std::size_t r = 0; r < fin; ++r)
        if (!f(W.row_prefix[r])) throw witness_rejected("point " + std::to_string(r) + " is not in the support of " + f_name, r);
    const std::size_t Q = T == 0 ? 0 : detail::family_check_rows;
    for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t a = 0; a < T; ++a)
            if (!f(W.block_row(q, a)))
                throw witness_rejected("sequence " + std::to_string(fin + a) + " leaves the support of " + f_name + " at index " +
                                       std::to_string(q), q);

    const auto R = countable_relation::mixed_meet(k, t);
    if (auto j = first_bad_column(R, W))
        throw witness_rejected("column " + std::to_string(*j) + " is not in " + R.name(), *j);

    // Point q of a sliding sequence has its zeros pushed about shift*q
    // columns out, so the sampled window grows with the checked range.
    const std::size_t lead = W.column_horizon() + W.shift * Q;
    const std::size_t H = lead + detail::fit_window;
    // Per coordinate: the fixed points' bits and, for each sequence, its
    // column, limit and the index from which it is constant.
    struct coord {
        std::vector<bool> fixed;
        std::vector<upseq> col;
        std::vector<bool> limit;
        std::vector<std::size_t> settle;
    };
    std::vector<coord> cs(H);
    for (std::size_t j = 0; j < H; ++j) {
        auto& c = cs[j];
        for (std::size_t r = 0; r < fin; ++r) c.fixed.push_back(W.row_prefix[r].at(j));
        if (T == 0) continue;
        const upseq column = W.column(j);
        for (std::size_t a = 0; a < T; ++a) {
            const upseq col = column.subseq(fin + a, T);
            if (col.period() != 1)
                throw witness_rejected("sequence " + std::to_string(fin + a) + " does not converge at coordinate " +
                                       std::to_string(j), j);
            c.col.push_back(col);
            c.limit.push_back(col.cycle_all(true));
            c.settle.push_back(col.prefix_len());
        }
    }
    auto limit_bit = [&](std::size_t j, std::size_t r) { return r < fin ? cs[j].fixed[r] : cs[j].limit[r - fin]; };

    // Each sequence replaced by its suffix joins, then every point joined
    // with the complements of the earlier limits.
    auto normalized = [&](std::size_t r, std::size_t q) {
        return detail::fit_values(
            [&](std::size_t j) {
                bool v = r < fin ? cs[j].fixed[r] : cs[j].col[r - fin].shift(q).has(true);
                for (std::size_t s = 0; s < r && !v; ++s) v = !limit_bit(j, s);
                return v;
            },
            lead, "normalized witness point");
    };
    std::size_t normalized_checked = 0;
    for (std::size_t r = 0; r < fin; ++r, ++normalized_checked)
        if (!f(normalized(r, 0)))
            throw witness_rejected("normalized point " + std::to_string(r) + " is outside the support of " + f_name, r);
    for (std::size_t a = 0; a < T; ++a)
        for (std::size_t q = 0; q < Q; ++q, ++normalized_checked)
            if (!f(normalized(fin + a, q)))
                throw witness_rejected("normalized sequence " + std::to_string(fin + a) + " leaves the support of " + f_name +
                                       " at index " + std::to_string(q), q);

    fkt_gen_result out;
    out.g.sigma.resize(H);
    for (std::size_t j = 0; j < H; ++j) {
        std::optional<std::size_t> s;
        for (std::size_t r = 0; r < fin && !s; ++r)
            if (!cs[j].fixed[r]) s = r;
        for (std::size_t a = 0; a < T && !s; ++a)
            if (!cs[j].limit[a]) s = fin + cs[j].settle[a] * T + a;
        if (!s) throw witness_rejected("no limit point vanishes at coordinate " + std::to_string(j), j);
        out.g.sigma[j] = *s;
    }

    const std::string tag = "(" + std::to_string(k) + "," + std::to_string(t) + ")";
    out.report.suite = "fkt_gen" + tag + ":" + f_name;
    const std::string cite = "a function outside L0(k,t) dominates the fkt function after a variable substitution";
    const auto target = fkt_term(k, t);
    std::optional<upseq> bad;
    for (const auto& y : sample_grid())
        if (up_eval(*target, y) && !f(out.g(y))) {
            bad = y;
            break;
        }
    std::vector<std::size_t> shown(out.g.sigma.begin(), out.g.sigma.begin() + std::min<std::size_t>(24, H));
    nlohmann::json wit = {{"f", f_name}, {"witness", W}, {"sigma_prefix", shown}, {"normalized_points_checked", normalized_checked}};
    if (bad) wit["counterexample"] = *bad;
    out.report.add("fkt" + tag + "(y) <= f(g(y)) on the sampling grid", cite, !bad, wit);
    out.report.note("replacing f so that it is 1 on the normalized points stays in the generated clone", cite, "asserted");
    return out;
}

// ---- liminf interpolation ---------------------------------------------------

struct interpolation_result {
    term_ptr term;
    witness_report report;
};

// liminf(f_0, f_1, ..., f_last, f_last, ...) checked against target at points.
inline interpolation_result liminf_interpolate(const std::vector<truth_table>& g, const truth_table& target,
                                               const std::vector<std::uint32_t>& points) {
    if (g.empty()) throw usage_error("liminf_interpolate needs at least one table");
    const int n = target.arity();
    if (n > 10) throw arity_error("liminf_interpolate supports arity <= 10");
    std::vector<term_ptr> vars;
    for (int i = 0; i < n; ++i) vars.push_back(tvar(static_cast<std::size_t>(i)));
    family fam;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i].arity() != n) throw arity_error("table " + std::to_string(i) + " has arity " + std::to_string(g[i].arity()) +
                                                 ", target has " + std::to_string(n));
        (i + 1 < g.size() ? fam.prefix : fam.block).push_back(ttable(g[i], vars));
    }
    fam.stride = 0;
    interpolation_result out{tinf(inf_tag::lim_inf, std::move(fam)), {}};
    out.report.suite = "liminf_interpolate";
    std::optional<std::uint32_t> bad;
    for (auto p : points) {
        if (p >> n) throw usage_error("point " + std::to_string(p) + " does not fit arity " + std::to_string(n));
        bits x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (p >> i) & 1u;
        if (up_eval(*out.term, upseq(x, {0})) != target.bit(p)) {
            bad = p;
            break;
        }
    }
    nlohmann::json wit = {{"term", to_string(*out.term)}, {"target", target.to_hex()}, {"points", points}};
    if (bad) wit["failing_point"] = *bad;
    out.report.add("the liminf of the tables agrees with the target at every listed point",
                   "liminf of a sequence of clone members interpolates countably many values", !bad, wit);
    return out;
}

// ---- dedicated evaluators -------------------------------------------------

// ∀₂(∀₂(x_{π(0,0)}, x_{π(0,1)}, ...), ∀₂(x_{π(1,0)}, ...), ...) for the
// bijection π(j,m) = 2^j (2m+1) - 1.
inline bool forall2_nesting(const upseq& x) {
    const std::size_t P = x.prefix_len(), L = x.period();
    // Inner block j reads x at 2^j - 1 + 2^{j+1} m; only the residues of the
    // start and stride mod L matter once the start is past the prefix.
    auto inner = [&](std::size_t j) {
        if (j < 20) return up_eval(*named_terms::forall_w(2), x.subseq((std::size_t{1} << j) - 1, std::size_t{1} << (j + 1)));
        // Past the prefix only positions mod L matter.
        std::size_t pw = 1 % L;
        for (std::size_t i = 0; i < j; ++i) pw = (pw * 2) % L;
        const std::size_t start = P + (pw + L * (P + 2) - 1 - P) % L;
        const std::size_t stride = (2 * pw) % L == 0 ? L : (2 * pw) % L;
        return up_eval(*named_terms::forall_w(2), x.subseq(start, stride));
    };
    bits v(detail::fit_window);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = inner(j);
    auto s = fit_upseq(v, detail::image_max_period);
    if (!s) throw structural_error("inner values do not settle");
    return up_eval(*named_terms::forall_w(2), *s);
}

// x0, x1, m(x0,x1,x2), m(x0,x1,m(x0,x2,x3)), ... with m the median.
inline upseq nested_medians(const upseq& x) {
    auto med = [](bool a, bool b, bool c) { return (a && b) || (a && c) || (b && c); };
    return detail::fit_values(
        [&](std::size_t n) {
            if (n < 2) return x.at(n);
            bool e = x.at(n);
            for (std::size_t a = n - 1; a >= 2; --a) e = med(x.at(0), x.at(a), e);
            return med(x.at(0), x.at(1), e);
        },
        x.prefix_len() + 4 * x.period(), "nested medians");
}

// ---- suites -----------------------------------------------------------------

struct suite_spec {
    std::string id;
    std::string kind;
    std::string citation;
    nlohmann::json params = nlohmann::json::object();
};

inline std::vector<suite_spec> load_suites(const std::filesystem::path& dir = default_data_dir()) {
    const auto j = read_json_file(dir / "suites.json");
    std::vector<suite_spec> out;
    for (const auto& s : j.at("suites"))
        out.push_back({s.at("id"), s.at("kind"), s.at("citation"), s.value("params", nlohmann::json::object())});
    return out;
}

namespace detail {

inline wadge_witness unit_strings() {
    up_matrix m;
    m.row_cycle = {{upseq::parse("1(0)"), upseq::parse("(0)")}};
    m.shift = 1;
    return {m, upseq::constant(false)};
}

// Rows 0^q 1⃗ (q >= 0).
inline up_matrix zero_runs() {
    up_matrix m;
    m.row_cycle = {{upseq::parse("(1)"), upseq::parse("(0)")}};
    m.shift = 1;
    return m;
}

// Rows 1^i 0 1⃗.
inline up_matrix single_zeros() {
    up_matrix m;
    m.row_cycle = {{upseq::parse("0(1)"), upseq::parse("(1)")}};
    m.shift = 1;
    return m;
}

template <class F>
void expect_rejection(witness_report& rep, const std::string& claim, const std::string& cite, F&& run) {
    try {
        run();
        rep.add(claim, cite, false, {{"outcome", "accepted"}});
    } catch (const witness_rejected& e) {
        nlohmann::json w = {{"outcome", "rejected"}, {"reason", e.what()}};
        if (e.index()) w["index"] = *e.index();
        rep.add(claim, cite, true, w);
    }
}

inline void suite_fiber(const catalog& cat, const suite_spec& s, witness_report& rep, const search_bounds& b) {
    const auto& f = cat.fiber_by_id(s.params.at("fiber").get<std::string>());
    const std::size_t expect = s.params.at("nodes").get<std::size_t>();
    rep.add("the fiber over " + f.base + " has " + std::to_string(expect) + " catalogued clones", s.citation,
            f.nodes.size() == expect, {{"nodes", f.nodes.size()}, {"edges", f.edges.size()}});
    for (const auto& e : f.edges) {
        // Replay from the serialized witness only.
        const nlohmann::json ser = {{"term", e.separator_literal}, {"relation", e.relation}, {"matrix", e.witness}};
        const auto t = parse_omega_term(ser["term"].get<std::string>());
        const auto R = ser["relation"].get<countable_relation>();
        const auto M = ser["matrix"].get<up_matrix>();
        const auto r = refute_preservation(*t, R, M);
        nlohmann::json wit = ser;
        wit["verdict"] = to_json(r);
        rep.add(e.separator_literal + " separates " + e.lower + " < " + e.upper + " by refuting " + R.name(), s.citation,
                r.refuted, wit);
        for (const auto& rel : f.node(e.upper).relations) {
            const auto m = search_counterexample(*e.separator, rel, b);
            nlohmann::json w = {{"term", e.separator_literal}, {"relation", rel.name()}, {"seed", b.seed}};
            if (m) w["matrix"] = *m;
            rep.add("separator " + e.separator_literal + " survives bounded search against " + rel.name() + " of " + e.upper,
                    s.citation, !m, w);
        }
    }
    for (const auto& n : f.nodes)
        for (std::size_t g = 0; g < n.generators.size(); ++g)
            for (const auto& rel : n.relations) {
                const auto m = search_counterexample(*n.generators[g], rel, b);
                nlohmann::json w = {{"term", n.generator_literals[g]}, {"relation", rel.name()}, {"seed", b.seed}};
                if (m) w["matrix"] = *m;
                rep.add("generator " + n.generator_literals[g] + " of " + n.name + " survives bounded search against " +
                            rel.name(),
                        s.citation, !m, w);
            }
}

inline void suite_post_census(const catalog& cat, const suite_spec& s, witness_report& rep) {
    std::map<std::string, std::size_t> groups;
    for (const auto& n : cat.nodes()) ++groups[n.group];
    for (const auto& [g, want] : s.params.at("groups").items()) {
        const std::size_t have = groups[g];
        rep.add("group " + g + " has " + std::to_string(want.get<std::size_t>()) + " nodes", s.citation,
                have == want.get<std::size_t>(), {{"count", have}});
    }
    for (auto [lo, up] : cat.covers()) {
        const auto c = cat.verify_edge(lo, up);
        rep.add("covering edge " + c.lower + " < " + c.upper + " verified generator-wise", s.citation, c.ok,
                {{"membership", c.membership}, {"separation", c.separation}});
    }
}

inline void suite_pol_inv(const catalog& cat, const suite_spec& s, witness_report& rep) {
    for (std::size_t i = 0; i < cat.nodes().size(); ++i) {
        const auto& n = cat.nodes()[i];
        const auto c = close(n.generators, 3);
        const auto& p = cat.pol(i, 3);
        rep.add(n.name + ": closure of the generators equals the polymorphisms of the relations at arity <= 3", s.citation,
                c.complete() && c.same_restriction(p),
                {{"closure", c.fingerprint()}, {"pol", p.fingerprint()}, {"complete", c.complete()}});
    }
    for (const auto& [name, want] : s.params.at("stratum3").items()) {
        const auto i = cat.find(name);
        const std::size_t have = i ? cat.pol(*i, 3).stratum(3).size() : 0;
        rep.add(name + " has " + std::to_string(want.get<std::size_t>()) + " ternary members", s.citation,
                have == want.get<std::size_t>(), {{"count", have}});
    }
}

inline void suite_identities(const suite_spec& s, witness_report& rep) {
    auto tables = [](int lo, int hi) {
        std::vector<truth_table> v;
        for (int n = lo; n <= hi; ++n)
            for (auto& f : all_tables(n)) v.push_back(std::move(f));
        return v;
    };
    auto tuples = [](const std::vector<truth_table>& pool, int m, auto&& fn) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
        std::vector<truth_table> cur(static_cast<std::size_t>(m), pool[0]);
        while (true) {
            for (int i = 0; i < m; ++i) cur[static_cast<std::size_t>(i)] = pool[idx[static_cast<std::size_t>(i)]];
            if (!fn(cur)) return false;
            int p = m - 1;
            while (p >= 0 && ++idx[static_cast<std::size_t>(p)] == pool.size()) idx[static_cast<std::size_t>(p--)] = 0;
            if (p < 0) return true;
        }
    };
    {
        std::size_t cases = 0;
        bool ok = true;
        // Every outer table of arity <= 3; inner tuples of unary tables for the ternary ones.
        for (int m = 1; m <= 3 && ok; ++m)
            for (int n = 1; n <= 2 && ok; ++n) {
                if (m == 3 && n == 2) continue;
                const auto gs = tables(n, n);
                const auto p0 = truth_table::projection(0, n + 1);
                for (const auto& f : all_tables(m)) {
                    ok = ok && tuples(gs, m, [&](const std::vector<truth_table>& g) {
                        std::vector<truth_table> cg{p0}, fg{p0};
                        for (const auto& x : g) {
                            cg.push_back(ceil(x));
                            fg.push_back(floor(x));
                        }
                        ++cases;
                        return ceil(compose(f, g)) == compose(ceil(f), cg) && floor(compose(f, g)) == compose(floor(f), fg);
                    });
                }
            }
        rep.add("ceil and floor commute with composition, for every outer table of arity <= 3", s.citation, ok, {{"cases", cases}});
    }
    {
        std::size_t cases = 0;
        bool ok = true;
        // f of arity <= 3 against inner tuples of total size <= 512 tables.
        for (int m = 1; m <= 2 && ok; ++m)
            for (int n = 1; n <= 2 && ok; ++n) {
                if (m == 2 && n == 2) continue;
                const auto gs = tables(n + 1, n + 1);
                const auto p0 = truth_table::projection(0, n + 1);
                for (const auto& f : all_tables(m + 1))
                    for (bool c : {false, true}) {
                        ok = ok && tuples(gs, m, [&](const std::vector<truth_table>& g) {
                            std::vector<truth_table> gc, pg{p0};
                            for (const auto& x : g) {
                                gc.push_back(cross_section(x, c));
                                pg.push_back(x);
                            }
                            ++cases;
                            return compose(cross_section(f, c), gc) == cross_section(compose(f, pg), c);
                        });
                    }
            }
        rep.add("cross-sections commute with composition, for every outer table of arity <= 3", s.citation, ok,
                {{"cases", cases}});
    }
    const auto all = tables(1, 3);
    bool sections = true, upc = true;
    for (const auto& f : all) {
        sections = sections && cross_section(floor(f), false) == f && cross_section(ceil(f), true) == f;
        const auto u = up_closure(f);
        upc = upc && leq(f, u) && up_closure(u) == u && is_monotone(u);
    }
    rep.add("floor(f) at x0 = 0 and ceil(f) at x0 = 1 give back f, for all 276 tables", s.citation, sections);
    rep.add("the upward closure is extensive, idempotent and monotone, for all 276 tables", s.citation, upc);
}

inline void suite_beta_roundtrip(const suite_spec& s, witness_report& rep) {
    bool inverse = true, selfdual = true, onto = true;
    std::size_t cases = 0;
    for (int n = 1; n <= 3; ++n)
        for (const auto& f : all_tables(n)) {
            ++cases;
            const auto b = beta(f);
            inverse = inverse && cross_section(b, false) == f;
            selfdual = selfdual && is_selfdual(b);
        }
    std::size_t dual_count = 0;
    for (int n = 2; n <= 4; ++n)
        for (const auto& g : all_tables(n))
            if (is_selfdual(g)) {
                ++dual_count;
                onto = onto && beta(cross_section(g, false)) == g;
            }
    rep.add("beta(f) at x0 = 0 gives back f, for all 276 tables", s.citation, inverse, {{"cases", cases}});
    rep.add("beta(f) is self-dual, for all 276 tables", s.citation, selfdual);
    rep.add("every self-dual table of arity 2..4 is beta of its cross-section", s.citation, onto, {{"self_dual", dual_count}});
}

inline void suite_beta_correspondence(const catalog& cat, const suite_spec& s, witness_report& rep) {
    for (const auto& pr : s.params.at("pairs")) {
        const std::string from = pr.at(0), to = pr.at(1);
        const auto& src = cat.node(from);
        const auto& p = cat.pol(*cat.find(to), 3);
        std::vector<truth_table> g = src.generators, bg;
        g.push_back(truth_table::constant(false, 1));
        for (const auto& x : src.generators) bg.push_back(beta(x));
        bg.push_back(truth_table::constant(false, 1));
        const std::uint64_t budget = s.params.value("budget", std::uint64_t{50'000'000});
        // A partial closure that already reaches the target is enough when
        // every generator lies in the target clone.
        auto equal = [&](const std::vector<truth_table>& gens, nlohmann::json& w) {
            const auto c = close(gens, 3, budget);
            bool bounded = true;
            for (const auto& x : gens) bounded = bounded && cat.contains(cat.node(to), x);
            w = {{"closure", c.fingerprint()}, {"target", p.fingerprint()}, {"complete", c.complete()},
                 {"generators_in_target", bounded}};
            return c.same_restriction(p) && (c.complete() || bounded);
        };
        nlohmann::json w1, w2;
        const bool e1 = equal(g, w1), e2 = equal(bg, w2);
        rep.add("<" + from + " + 0> = " + to + " at arity <= 3", s.citation, e1, w1);
        rep.add("<beta(" + from + " generators) + 0> = " + to + " at arity <= 3", s.citation, e2, w2);
    }
}

inline void suite_modularity(const catalog& cat, const suite_spec& s, witness_report& rep) {
    const auto meet = parse_function("and(x0,x1)@2");
    const double limit = s.params.value("max_compositions", 2e8);
    for (std::size_t i = 0; i < cat.nodes().size(); ++i) {
        const auto& n = cat.nodes()[i];
        if (!cat.contains(n, meet)) continue;
        std::vector<std::vector<truth_table>> strata(3);
        for (int a = 1; a <= 3; ++a)
            for (const auto& f : cat.pol(i, 3).stratum(a)) {
                bool bounded = false;
                for (int v = 0; v < a && !bounded; ++v) bounded = leq(f, truth_table::projection(v, a));
                if (bounded) strata[static_cast<std::size_t>(a - 1)].push_back(f);
            }
        const auto target = clone_slice::from_strata(3, strata);
        std::vector<truth_table> gens{meet};
        int top = 2;
        for (const auto& g : n.generators) {
            gens.push_back(ceil(g));
            top = std::max(top, g.arity() + 1);
        }
        const double cost = std::pow(static_cast<double>(target.stratum(3).size()), top);
        const std::string claim = n.name + ": <ceil(generators) + and> equals " + n.name + " intersected with T0(<w) at arity <= 3";
        if (cost > limit) {
            rep.note(claim, s.citation, "skipped", {{"reason", "closure would need about " + std::to_string(static_cast<long long>(cost)) +
                                                                  " compositions"}});
            continue;
        }
        const auto c = close(gens, 3, static_cast<std::uint64_t>(limit));
        rep.add(claim, s.citation, c.complete() && c.same_restriction(target),
                {{"closure", c.fingerprint()}, {"target", target.fingerprint()}, {"complete", c.complete()}});
    }
}

inline void suite_cobweb(const suite_spec& s, witness_report& rep, const search_bounds& b) {
    const int k = s.params.at("k").get<int>();
    const auto P = side_tube_indices(k);
    const auto downsets = side_tube_downsets(k);
    std::map<std::pair<std::size_t, std::size_t>, bool> survives;  // fkt(P[a]) vs MixedMeet(P[b])
    auto survive = [&](std::size_t a, std::size_t bb) {
        auto key = std::make_pair(a, bb);
        if (auto it = survives.find(key); it != survives.end()) return it->second;
        const bool ok = !search_counterexample(*fkt_term(P[a].first, P[a].second),
                                               countable_relation::mixed_meet(P[bb].first, P[bb].second), b);
        return survives[key] = ok;
    };
    std::vector<bool> refuted(P.size());
    for (std::size_t a = 0; a < P.size(); ++a) {
        const auto r = refute_preservation(*fkt_term(P[a].first, P[a].second),
                                           countable_relation::mixed_meet(P[a].first, P[a].second),
                                           mixed_meet_matrix(P[a].first, P[a].second));
        refuted[a] = r.refuted;
    }
    std::set<std::vector<bool>> profiles;
    bool all_ok = true;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& D : downsets) {
        std::vector<bool> profile(P.size());
        bool ok = true;
        for (std::size_t a = 0; a < P.size(); ++a) {
            if (D[a]) {
                ok = ok && refuted[a];
                profile[a] = false;
            } else {
                bool in = true;
                for (std::size_t bb = 0; bb < P.size(); ++bb)
                    if (D[bb]) in = in && survive(a, bb);
                ok = ok && in;
                profile[a] = in;
            }
        }
        all_ok = all_ok && ok;
        profiles.insert(profile);
        std::string bitsr;
        for (bool x : profile) bitsr += x ? '1' : '0';
        rows.push_back({{"clone", side_tube_name(k, D)}, {"profile", bitsr}, {"consistent", ok}});
    }
    nlohmann::json idx = nlohmann::json::array();
    for (const auto& [a, t] : P) idx.push_back("fkt(" + std::to_string(a) + "," + std::to_string(t) + ")");
    rep.add("every downward-closed index set containing (" + std::to_string(k) + ",0) has the predicted membership profile",
            s.citation, all_ok, {{"columns", idx}, {"rows", rows}, {"seed", b.seed}});
    const std::size_t want = std::size_t{1} << k;
    rep.add(std::to_string(want) + " pairwise-distinct membership profiles", s.citation,
            downsets.size() == want && profiles.size() == want, {{"downsets", downsets.size()}, {"distinct", profiles.size()}});
}

inline void suite_kahane(const suite_spec& s, witness_report& rep) {
    for (const auto& lit : s.params.at("functions")) {
        const auto f = parse_omega_term(lit.get<std::string>());
        try {
            rep.absorb(kahane_extract(f, zero_runs()).report);
        } catch (const witness_rejected& e) {
            rep.add("kahane extraction for " + lit.get<std::string>(), s.citation, false, {{"rejected", e.what()}});
        }
    }
    for (const auto& lit : s.params.at("rejected")) {
        const auto f = parse_omega_term(lit.get<std::string>());
        expect_rejection(rep, "kahane extraction rejects " + lit.get<std::string>(), s.citation,
                         [&] { kahane_extract(f, zero_runs()); });
    }
}

inline void suite_wadge(const suite_spec& s, witness_report& rep) {
    rep.absorb(wadge_construct(as_function(named_terms::big_join()), unit_strings(), "bigjoin").report);
    rep.absorb(wadge_construct(as_function(named_terms::lim_inf()), {zero_runs(), upseq::constant(false)}, "liminf").report);
    expect_rejection(rep, "wadge construction rejects the projection x0", s.citation,
                     [&] { wadge_construct(as_function(tvar(0)), unit_strings(), "x0"); });
}

inline void suite_forall2(const suite_spec& s, witness_report& rep) {
    rep.absorb(forall2_construct(as_function(named_terms::lim_inf()), single_zeros(), "liminf").report);
    rep.absorb(forall2_construct(as_function(named_terms::forall_w(2)), single_zeros(), "forallw(2)").report);
    expect_rejection(rep, "forall_2 construction rejects bigmeet", s.citation,
                     [&] { forall2_construct(as_function(named_terms::big_meet()), single_zeros(), "bigmeet"); });
}

inline void suite_fkt_matrix(const suite_spec& s, witness_report& rep, const search_bounds& b) {
    for (const auto& kt : s.params.at("cases")) rep.absorb(fkt_matrix(kt.at(0), kt.at(1), b).report);
    // The specializations named for k = 3 and k = 1.
    rep.add("fkt_matrix(1,1) has rows 0^(q+1) followed by ones", s.citation,
            mixed_meet_matrix(1, 1).row(2) == upseq::parse("000(1)"));
}

inline void suite_fkt_gen(const suite_spec& s, witness_report& rep) {
    for (const auto& kt : s.params.at("cases")) {
        const int k = kt.at(0), t = kt.at(1);
        const auto f = fkt_term(k, t);
        rep.absorb(fkt_gen_substitution(as_function(f), k, t, mixed_meet_matrix(k, t), to_string(*f)).report);
    }
    expect_rejection(rep, "the substitution rejects bigmeet against L0(1,1)", s.citation, [&] {
        fkt_gen_substitution(as_function(named_terms::big_meet()), 1, 1, mixed_meet_matrix(1, 1), "bigmeet");
    });
}

inline void suite_liminf_interpolate(const suite_spec& s, witness_report& rep) {
    const auto and3 = parse_function("and(x0,x1,x2)@3");
    const auto not_and = parse_function("or(x0,x1,x2)@3");
    // Alternating tables that settle on the target at the listed points.
    rep.absorb(liminf_interpolate({not_and, and3, not_and, and3, and3}, and3, {0, 3, 5, 7}).report);
    rep.absorb(liminf_interpolate({and3}, and3, {}).report);
    const auto one = truth_table::constant(true, 2);
    rep.absorb(liminf_interpolate({one, one}, one, {0, 1, 2, 3}).report);
    (void)s;
}

inline void suite_eq455(const suite_spec& s, witness_report& rep) {
    const auto bm = named_terms::beta_meet();
    const auto one_liminf = fkt_term(2, 1);
    std::optional<upseq> bad;
    for (const auto& x : sample_grid())
        if (up_eval(*bm, x) != up_eval(*one_liminf, nested_medians(x))) {
            bad = x;
            break;
        }
    nlohmann::json w = {{"lhs", to_string(*bm)}, {"rhs", to_string(*one_liminf) + " over nested medians"},
                        {"points", sample_grid().size()}};
    if (bad) w["counterexample"] = *bad;
    rep.add("beta(bigmeet) equals (1 odisj liminf) applied to the nested medians on the sampling grid", s.citation, !bad, w);
    bool ok = true;
    const auto med = parse_function("exists(2;x0,x1,x2)@3");
    for (std::uint32_t r = 0; r < 8; ++r) {
        const upseq p(bits{static_cast<std::uint8_t>(r & 1)}, bits{static_cast<std::uint8_t>((r >> 1) & 1), static_cast<std::uint8_t>((r >> 2) & 1)});
        ok = ok && up_eval(*bm, p) == med.bit(r);
    }
    rep.add("the median of x, y, z equals beta(bigmeet)(x, y, z, y, z, ...)", s.citation, ok);
}

inline void suite_forall2_nesting(const suite_spec& s, witness_report& rep) {
    std::optional<upseq> bad;
    const auto f3 = named_terms::forall_w(3);
    for (const auto& x : sample_grid())
        if (up_eval(*f3, x) && !forall2_nesting(x)) {
            bad = x;
            break;
        }
    nlohmann::json w = {{"points", sample_grid().size()}, {"bijection", "(j,m) -> 2^j (2m+1) - 1"}};
    if (bad) w["counterexample"] = *bad;
    rep.add("forallw(3) <= forall_2 nested over a bijection of omega x omega, on the sampling grid", s.citation, !bad, w);
}

}  // namespace detail

inline witness_report run_suite(const catalog& cat, const suite_spec& s, const search_bounds& b = {}) {
    witness_report rep;
    rep.suite = s.id;
    try {
        if (s.kind == "fiber") detail::suite_fiber(cat, s, rep, b);
        else if (s.kind == "post_census") detail::suite_post_census(cat, s, rep);
        else if (s.kind == "pol_inv_roundtrip") detail::suite_pol_inv(cat, s, rep);
        else if (s.kind == "identities") detail::suite_identities(s, rep);
        else if (s.kind == "beta_roundtrip") detail::suite_beta_roundtrip(s, rep);
        else if (s.kind == "beta_correspondence") detail::suite_beta_correspondence(cat, s, rep);
        else if (s.kind == "modularity") detail::suite_modularity(cat, s, rep);
        else if (s.kind == "cobweb") detail::suite_cobweb(s, rep, b);
        else if (s.kind == "kahane") detail::suite_kahane(s, rep);
        else if (s.kind == "wadge") detail::suite_wadge(s, rep);
        else if (s.kind == "forall2") detail::suite_forall2(s, rep);
        else if (s.kind == "fkt_matrix") detail::suite_fkt_matrix(s, rep, b);
        else if (s.kind == "fkt_gen") detail::suite_fkt_gen(s, rep);
        else if (s.kind == "liminf_interpolate") detail::suite_liminf_interpolate(s, rep);
        else if (s.kind == "eq455") detail::suite_eq455(s, rep);
        else if (s.kind == "forall2_nesting") detail::suite_forall2_nesting(s, rep);
        else throw structural_error("suite " + s.id + " has unknown kind " + s.kind);
    } catch (const usage_error&) {
        throw;
    } catch (const error& e) {
        rep.add("suite completed", s.citation, false, {{"error", e.what()}});
    }
    return rep;
}

inline const suite_spec& find_suite(const std::vector<suite_spec>& suites, const std::string& id) {
    for (const auto& s : suites)
        if (s.id == id) return s;
    throw usage_error("unknown suite '" + id + "'");
}

// Runs the suites concurrently and returns the reports in registry order.
inline std::vector<witness_report> run_suites(const catalog& cat, const std::vector<suite_spec>& suites,
                                              const search_bounds& b = {}) {
    std::vector<std::future<witness_report>> jobs;
    for (const auto& s : suites) jobs.push_back(std::async(std::launch::async, [&cat, &s, b] { return run_suite(cat, s, b); }));
    std::vector<witness_report> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace clonekit
