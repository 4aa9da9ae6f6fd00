#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "expr.hpp"
#include "relation.hpp"

namespace clonekit {

inline constexpr std::uint64_t default_close_budget = 5'000'000;
inline constexpr int max_close_cap = 6;

// A defining condition of a clone: a finite relation, or "f <= some
// projection" / "f >= some projection" for the infinite-intersection nodes.
struct constraint {
    enum class kind { relation, below_var, above_var };
    kind k = kind::relation;
    finite_relation rel;
    std::string name;

    static constraint of(const standard_relation& s) { return {kind::relation, s.realize(), s.name()}; }
    static constraint of(finite_relation r, std::string name) { return {kind::relation, std::move(r), std::move(name)}; }
    static constraint below_var() { return {kind::below_var, finite_relation(1), "BoundedByVar"}; }
    static constraint above_var() { return {kind::above_var, finite_relation(1), "BoundsVar"}; }

    bool satisfied(const truth_table& f) const {
        switch (k) {
            case kind::relation: return preserves(f, rel);
            case kind::below_var:
                for (int i = 0; i < f.arity(); ++i)
                    if (leq(f, truth_table::projection(i, f.arity()))) return true;
                return false;
            case kind::above_var:
                for (int i = 0; i < f.arity(); ++i)
                    if (leq(truth_table::projection(i, f.arity()), f)) return true;
                return false;
        }
        return false;
    }
};

// How a member was first obtained: a projection (gen < 0, var = index) or
// generator `gen` applied to earlier members of the same arity.
struct derivation {
    int gen = -1;
    int var = 0;
    std::vector<std::uint32_t> children;
};

class clone_slice {
public:
    clone_slice() = default;
    clone_slice(int cap, bool complete) : cap_(cap), complete_(complete), strata_(cap), order_(cap), derivs_(cap) {}

    int arity_cap() const noexcept { return cap_; }
    bool complete() const noexcept { return complete_; }

    // Members of arity n in increasing table order.
    const std::vector<truth_table>& stratum(int n) const { return strata_.at(n - 1); }

    std::size_t size() const {
        std::size_t s = 0;
        for (const auto& st : strata_) s += st.size();
        return s;
    }

    bool contains(const truth_table& f) const {
        if (f.arity() < 1 || f.arity() > cap_) return false;
        const auto& st = strata_[f.arity() - 1];
        return std::binary_search(st.begin(), st.end(), f);
    }

    bool same_restriction(const clone_slice& o) const { return cap_ == o.cap_ && strata_ == o.strata_; }

    // Stratum sizes plus a hash of the contents.
    std::string fingerprint() const {
        std::uint64_t h = 1469598103934665603ull;
        std::string sizes;
        for (int n = 1; n <= cap_; ++n) {
            sizes += (n > 1 ? "/" : "") + std::to_string(strata_[n - 1].size());
            for (const auto& t : strata_[n - 1])
                for (auto w : t.words()) h = (h ^ w) * 1099511628211ull;
        }
        static constexpr char hex[] = "0123456789abcdef";
        std::string hs(16, '0');
        for (int i = 0; i < 16; ++i) hs[15 - i] = hex[(h >> (4 * i)) & 15];
        return sizes + "#" + hs;
    }

    // A term over the generators evaluating to f; gen_terms[i] is the term
    // printed for generator i.
    std::optional<expr> witness(const truth_table& f, const std::vector<expr>& gen_terms) const {
        if (f.arity() < 1 || f.arity() > cap_) return std::nullopt;
        const auto& ord = order_[f.arity() - 1];
        for (std::size_t i = 0; i < ord.size(); ++i)
            if (ord[i] == f) return build(f.arity(), static_cast<std::uint32_t>(i), gen_terms);
        return std::nullopt;
    }

    nlohmann::json to_json() const {
        nlohmann::json j = {{"arity_cap", cap_}, {"complete", complete_}};
        nlohmann::json strata = nlohmann::json::array();
        for (int n = 1; n <= cap_; ++n) {
            nlohmann::json s = nlohmann::json::array();
            for (const auto& t : strata_[n - 1]) s.push_back(t.to_hex());
            strata.push_back({{"arity", n}, {"size", strata_[n - 1].size()}, {"tables", s}});
        }
        j["strata"] = strata;
        return j;
    }

    static clone_slice from_strata(int cap, std::vector<std::vector<truth_table>> strata, bool complete = true) {
        clone_slice s(cap, complete);
        for (auto& st : strata) std::sort(st.begin(), st.end());
        s.strata_ = std::move(strata);
        s.order_.assign(cap, {});
        return s;
    }

    std::vector<truth_table> all_members() const {
        std::vector<truth_table> out;
        for (const auto& st : strata_) out.insert(out.end(), st.begin(), st.end());
        return out;
    }

private:
    friend clone_slice close(const std::vector<truth_table>&, int, std::uint64_t, const truth_table*);

    expr build(int n, std::uint32_t i, const std::vector<expr>& gen_terms) const {
        const auto& d = derivs_[n - 1][i];
        if (d.gen < 0) return expr::var(d.var);
        std::vector<expr> kids;
        for (auto c : d.children) kids.push_back(build(n, c, gen_terms));
        if (d.gen < static_cast<int>(gen_terms.size())) return substitute(gen_terms[d.gen], kids);
        throw structural_error("witness refers to an unnamed generator");
    }

    int cap_ = 0;
    bool complete_ = true;
    std::vector<std::vector<truth_table>> strata_;
    std::vector<std::vector<truth_table>> order_;  // discovery order, parallel to derivs_
    std::vector<std::vector<derivation>> derivs_;
};

namespace detail {

inline bool is_symmetric(const truth_table& g) {
    for (int i = 0; i + 1 < g.arity(); ++i) {
        std::vector<int> map(g.arity());
        for (int j = 0; j < g.arity(); ++j) map[j] = j;
        std::swap(map[i], map[i + 1]);
        if (minor(g, map, g.arity()) != g) return false;
    }
    return true;
}

inline std::uint64_t compose_word(const truth_table& g, const std::uint64_t* kids, int m, std::uint32_t rows) {
    std::uint64_t w = 0;
    for (std::uint32_t r = 0; r < rows; ++r) {
        std::uint32_t idx = 0;
        for (int i = 0; i < m; ++i) idx |= static_cast<std::uint32_t>((kids[i] >> r) & 1u) << i;
        if (g.bit(idx)) w |= std::uint64_t{1} << r;
    }
    return w;
}

// Membership set for tables of a fixed small arity.
class word_set {
public:
    explicit word_set(int n) : n_(n) {
        if (n <= 4) dense_.assign(std::size_t{1} << (1u << n), 0);
    }
    bool insert(std::uint64_t w) {
        if (n_ <= 4) {
            if (dense_[w]) return false;
            dense_[w] = 1;
            return true;
        }
        return sparse_.emplace(w, 0).second;
    }
    bool contains(std::uint64_t w) const { return n_ <= 4 ? dense_[w] != 0 : sparse_.count(w) != 0; }

private:
    int n_;
    std::vector<std::uint8_t> dense_;
    std::unordered_map<std::uint64_t, int> sparse_;
};

}  // namespace detail

// Least slice containing the projections and closed under the generators,
// built breadth-first by term depth. Each level only forms compositions with
// at least one argument from the previous level. `budget` bounds the number of
// candidate compositions; exceeding it returns a partial slice flagged
// incomplete. With `target` set, stops as soon as the target appears.
inline clone_slice close(const std::vector<truth_table>& gens, int cap, std::uint64_t budget = default_close_budget,
                         const truth_table* target = nullptr) {
    if (cap < 1) throw arity_error("close: arity cap must be >= 1");
    if (cap > max_close_cap) throw resource_error("close: arity cap " + std::to_string(cap) + " exceeds " + std::to_string(max_close_cap));
    clone_slice out(cap, true);
    std::uint64_t spent = 0;
    std::vector<bool> symmetric;
    for (const auto& g : gens) symmetric.push_back(detail::is_symmetric(g));

    // Strata are independent of each other; a target only needs its own arity.
    const int first = target ? std::min(target->arity(), cap) : 1;
    if (target && target->arity() > cap) return out;
    for (int n = first; n <= cap && out.complete_; ++n) {
        const std::uint32_t rows = 1u << n;
        const std::uint64_t universe_size = n <= 5 ? (std::uint64_t{1} << rows) : ~std::uint64_t{0};
        detail::word_set seen(n);
        std::vector<std::uint64_t> members;
        auto& derivs = out.derivs_[n - 1];
        for (int i = 0; i < n; ++i) {
            const auto w = truth_table::projection(i, n).word0();
            seen.insert(w);
            members.push_back(w);
            derivs.push_back({-1, i, {}});
        }
        bool found = target && target->arity() == n && seen.contains(target->word0());
        std::size_t start = 0, end = members.size();
        std::vector<std::uint64_t> kids(max_fin_arity);
        std::vector<std::uint32_t> idx(max_fin_arity);

        while (start < end && out.complete_ && !found && members.size() < universe_size) {
            std::vector<std::pair<std::uint64_t, derivation>> fresh;
            bool saturated = false;
            auto emit = [&](std::size_t gi, int m) {
                const std::uint64_t w = detail::compose_word(gens[gi], kids.data(), m, rows);
                if (seen.insert(w)) {
                    fresh.push_back({w, {static_cast<int>(gi), 0, std::vector<std::uint32_t>(idx.begin(), idx.begin() + m)}});
                    saturated = members.size() + fresh.size() >= universe_size;
                }
            };
            for (std::size_t gi = 0; gi < gens.size() && out.complete_ && !saturated; ++gi) {
                const int m = gens[gi].arity();
                if (symmetric[gi]) {
                    // Non-decreasing index sequences whose last entry is new.
                    for (std::size_t last = start; last < end && out.complete_ && !saturated; ++last) {
                        idx[m - 1] = static_cast<std::uint32_t>(last);
                        kids[m - 1] = members[last];
                        if (m == 1) {
                            if (saturated) break;
                            if (++spent > budget) { out.complete_ = false; break; }
                            emit(gi, m);
                            continue;
                        }
                        for (int p = 0; p < m - 1; ++p) {
                            idx[p] = 0;
                            kids[p] = members[0];
                        }
                        while (true) {
                            if (saturated) break;
                            if (++spent > budget) { out.complete_ = false; break; }
                            emit(gi, m);
                            int p = m - 2;
                            while (p >= 0 && idx[p] == last) --p;
                            if (p < 0) break;
                            ++idx[p];
                            for (int q = p + 1; q < m - 1; ++q) idx[q] = idx[p];
                            for (int q = p; q < m - 1; ++q) kids[q] = members[idx[q]];
                        }
                    }
                } else {
                    // Tuples whose first new entry sits at position p.
                    for (int p = 0; p < m && out.complete_ && !saturated; ++p) {
                        if (start == 0 && p > 0) break;
                        std::vector<std::size_t> lo(m), hi(m);
                        for (int q = 0; q < m; ++q) {
                            lo[q] = q == p ? start : 0;
                            hi[q] = q < p ? start : end;
                        }
                        for (int q = 0; q < m; ++q) {
                            idx[q] = static_cast<std::uint32_t>(lo[q]);
                            kids[q] = members[lo[q]];
                        }
                        while (true) {
                            if (saturated) break;
                            if (++spent > budget) { out.complete_ = false; break; }
                            emit(gi, m);
                            int q = m - 1;
                            while (q >= 0 && idx[q] + 1 == hi[q]) {
                                idx[q] = static_cast<std::uint32_t>(lo[q]);
                                kids[q] = members[lo[q]];
                                --q;
                            }
                            if (q < 0) break;
                            ++idx[q];
                            kids[q] = members[idx[q]];
                        }
                    }
                }
            }
            std::sort(fresh.begin(), fresh.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            start = members.size();
            for (auto& [w, d] : fresh) {
                members.push_back(w);
                derivs.push_back(std::move(d));
            }
            end = members.size();
            if (target && target->arity() == n && seen.contains(target->word0())) found = true;
        }
        auto& ord = out.order_[n - 1];
        for (auto w : members) ord.push_back(truth_table::from_word(n, w));
        out.strata_[n - 1] = ord;
        std::sort(out.strata_[n - 1].begin(), out.strata_[n - 1].end());
        if (found) {
            out.complete_ = false;
            break;
        }
    }
    return out;
}

// Exactly the tables of arity <= cap satisfying every constraint.
inline clone_slice pol_slice(const std::vector<constraint>& cs, int cap) {
    if (cap < 1) throw arity_error("pol_slice: arity cap must be >= 1");
    if (cap > 4) throw resource_error("pol_slice enumerates 2^(2^n) tables; arity cap " + std::to_string(cap) + " exceeds 4");
    std::vector<std::vector<truth_table>> strata(cap);
    for (int n = 1; n <= cap; ++n)
        for (auto& f : all_tables(n)) {
            bool ok = true;
            for (const auto& c : cs)
                if (!(ok = c.satisfied(f))) break;
            if (ok) strata[n - 1].push_back(std::move(f));
        }
    return clone_slice::from_strata(cap, std::move(strata));
}

inline clone_slice pol_slice(const std::vector<finite_relation>& rels, int cap) {
    std::vector<constraint> cs;
    for (const auto& r : rels) cs.push_back(constraint::of(r, ""));
    return pol_slice(cs, cap);
}

struct member_result {
    enum class verdict { yes, no, unknown };
    verdict v = verdict::unknown;
    std::optional<expr> term;            // yes: evaluates to the query
    std::optional<finite_relation> rel;  // no: preserved by the generators, violated by the query
    std::string rel_name;
};

inline std::string to_string(member_result::verdict v) {
    switch (v) {
        case member_result::verdict::yes: return "yes";
        case member_result::verdict::no: return "no";
        case member_result::verdict::unknown: return "unknown";
    }
    return "?";
}

namespace detail {

inline bool all_preserve(const std::vector<truth_table>& gens, const finite_relation& R) {
    try {
        for (const auto& g : gens)
            if (!preserves(g, R)) return false;
        return true;
    } catch (const resource_error&) {
        return false;
    }
}

inline std::vector<standard_relation> certificate_relations() {
    std::vector<standard_relation> out = {{rel_tag::zero},       {rel_tag::one},       {rel_tag::leq},
                                          {rel_tag::neq},        {rel_tag::graph_and}, {rel_tag::graph_or},
                                          {rel_tag::graph_xor3}, {rel_tag::graph_xor4}};
    for (int k = 2; k <= max_rel_arity; ++k) {
        out.push_back({rel_tag::meet_zero, k});
        out.push_back({rel_tag::join_one, k});
    }
    return out;
}

// The arity-n stratum of a slice read as a 2^n-ary relation: each member's
// table is one tuple. A query outside the stratum violates it.
inline finite_relation stratum_relation(const clone_slice& s, int n) {
    finite_relation R(1 << n);
    for (const auto& t : s.stratum(n)) R.insert(static_cast<std::uint32_t>(t.word0()));
    return R;
}

}  // namespace detail

struct member_options {
    std::uint64_t budget = default_close_budget;
    int max_invariant_arity = 3;
    std::vector<expr> gen_terms;  // printed form of each generator; describe() when empty
};

// Decides f ∈ <gens> with a certificate either way when possible.
inline member_result member(const truth_table& f, const std::vector<truth_table>& gens, const member_options& opt = {}) {
    member_result res;
    auto try_relation = [&](const finite_relation& R, const std::string& name) {
        try {
            if (preserves(f, R)) return false;
        } catch (const resource_error&) {
            return false;
        }
        if (!detail::all_preserve(gens, R)) return false;
        res.v = member_result::verdict::no;
        res.rel = R;
        res.rel_name = name;
        return true;
    };
    for (const auto& s : detail::certificate_relations())
        if (try_relation(s.realize(), s.name())) return res;
    for (int k = 1; k <= std::min(opt.max_invariant_arity, 3); ++k)
        for (const auto& R : invariants_of(gens, k))
            if (try_relation(R, "invariant")) return res;

    std::vector<expr> terms = opt.gen_terms;
    if (terms.empty())
        for (const auto& g : gens) terms.push_back(describe(g));
    if (f.arity() <= max_close_cap) {
        const auto slice = close(gens, f.arity(), opt.budget, &f);
        if (slice.contains(f)) {
            res.v = member_result::verdict::yes;
            res.term = slice.witness(f, terms);
            return res;
        }
        if (slice.complete() && f.arity() <= 3) {
            const auto R = detail::stratum_relation(slice, f.arity());
            if (try_relation(R, "stratum")) return res;
        }
    }
    if (opt.max_invariant_arity >= 4)
        for (const auto& R : invariants_of(gens, 4))
            if (try_relation(R, "invariant")) return res;
    return res;
}

}  // namespace clonekit
