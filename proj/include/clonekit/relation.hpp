#pragma once

#include <bit>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "truth_table.hpp"

namespace clonekit {

inline constexpr int max_rel_arity = 8;
inline constexpr std::uint64_t default_matrix_budget = std::uint64_t{1} << 24;

// A k-ary relation on {0,1}. Tuple t has component x_i = bit i of t.
class finite_relation {
public:
    finite_relation() : finite_relation(1) {}
    explicit finite_relation(int arity) : arity_(arity) {
        if (arity < 1 || arity > max_rel_arity)
            throw arity_error("relation arity must be in 1.." + std::to_string(max_rel_arity));
    }

    template <class P>
    static finite_relation from_predicate(int arity, P&& p) {
        finite_relation r(arity);
        for (std::uint32_t t = 0; t < r.universe(); ++t)
            if (p(t)) r.insert(t);
        return r;
    }

    // Tuples written x0 first, e.g. "01" is (x0, x1) = (0, 1).
    static finite_relation from_strings(int arity, const std::vector<std::string>& tuples) {
        finite_relation r(arity);
        for (const auto& s : tuples) {
            if (static_cast<int>(s.size()) != arity) throw arity_error("tuple '" + s + "' has the wrong length");
            std::uint32_t t = 0;
            for (int i = 0; i < arity; ++i) {
                if (s[i] != '0' && s[i] != '1') throw structural_error("tuple '" + s + "' is not a bit string");
                if (s[i] == '1') t |= 1u << i;
            }
            r.insert(t);
        }
        return r;
    }

    int arity() const noexcept { return arity_; }
    std::uint32_t universe() const noexcept { return 1u << arity_; }
    bool contains(std::uint32_t t) const noexcept { return bits_.test(t); }
    void insert(std::uint32_t t) { bits_.set(t); }
    std::size_t size() const noexcept { return bits_.count(); }
    const std::bitset<256>& bits() const noexcept { return bits_; }

    std::vector<std::uint32_t> tuples() const {
        std::vector<std::uint32_t> out;
        for (std::uint32_t t = 0; t < universe(); ++t)
            if (contains(t)) out.push_back(t);
        return out;
    }

    std::string tuple_string(std::uint32_t t) const {
        std::string s(arity_, '0');
        for (int i = 0; i < arity_; ++i)
            if (t >> i & 1u) s[i] = '1';
        return s;
    }

    std::vector<std::string> tuple_strings() const {
        std::vector<std::string> out;
        for (auto t : tuples()) out.push_back(tuple_string(t));
        return out;
    }

    // Every tuple with all bits flipped.
    finite_relation dual() const {
        const std::uint32_t all = universe() - 1;
        return from_predicate(arity_, [&](std::uint32_t t) { return contains(t ^ all); });
    }

    bool operator==(const finite_relation&) const = default;

private:
    int arity_;
    std::bitset<256> bits_;
};

inline void to_json(nlohmann::json& j, const finite_relation& r) {
    j = {{"arity", r.arity()}, {"tuples", r.tuple_strings()}};
}

inline void from_json(const nlohmann::json& j, finite_relation& r) {
    r = finite_relation::from_strings(j.at("arity").get<int>(), j.at("tuples").get<std::vector<std::string>>());
}

enum class rel_tag { leq, neq, zero, one, graph_xor3, graph_xor4, graph_and, graph_or, meet_zero, join_one };

// Graphs put the output in coordinate 0.
struct standard_relation {
    rel_tag tag;
    int k = 0;

    finite_relation realize() const {
        switch (tag) {
            case rel_tag::leq: return finite_relation::from_predicate(2, [](std::uint32_t t) { return t != 1; });
            case rel_tag::neq: return finite_relation::from_predicate(2, [](std::uint32_t t) { return t == 1 || t == 2; });
            case rel_tag::zero: return finite_relation::from_predicate(1, [](std::uint32_t t) { return t == 0; });
            case rel_tag::one: return finite_relation::from_predicate(1, [](std::uint32_t t) { return t == 1; });
            case rel_tag::graph_xor3:
                return finite_relation::from_predicate(3, [](std::uint32_t t) { return std::popcount(t) % 2 == 0; });
            case rel_tag::graph_xor4:
                return finite_relation::from_predicate(4, [](std::uint32_t t) { return std::popcount(t) % 2 == 0; });
            case rel_tag::graph_and:
                return finite_relation::from_predicate(3, [](std::uint32_t t) { return (t & 1u) == ((t >> 1) & (t >> 2) & 1u); });
            case rel_tag::graph_or:
                return finite_relation::from_predicate(3, [](std::uint32_t t) { return (t & 1u) == (((t >> 1) | (t >> 2)) & 1u); });
            case rel_tag::meet_zero:
                return finite_relation::from_predicate(k, [this](std::uint32_t t) { return t != (1u << k) - 1; });
            case rel_tag::join_one:
                return finite_relation::from_predicate(k, [](std::uint32_t t) { return t != 0; });
        }
        throw structural_error("unknown relation tag");
    }

    std::string name() const {
        switch (tag) {
            case rel_tag::leq: return "LEQ";
            case rel_tag::neq: return "NEQ";
            case rel_tag::zero: return "Zero";
            case rel_tag::one: return "One";
            case rel_tag::graph_xor3: return "GraphXor3";
            case rel_tag::graph_xor4: return "GraphXor4";
            case rel_tag::graph_and: return "GraphAnd";
            case rel_tag::graph_or: return "GraphOr";
            case rel_tag::meet_zero: return "MeetZero(" + std::to_string(k) + ")";
            case rel_tag::join_one: return "JoinOne(" + std::to_string(k) + ")";
        }
        return "?";
    }
};

// A k x n matrix given by its columns; column j is a k-bit tuple.
struct bit_matrix {
    int rows = 0;
    std::vector<std::uint32_t> columns;

    int cols() const { return static_cast<int>(columns.size()); }

    std::uint32_t row(int i) const {
        std::uint32_t r = 0;
        for (std::size_t j = 0; j < columns.size(); ++j) r |= ((columns[j] >> i) & 1u) << j;
        return r;
    }

    std::vector<std::string> row_strings() const {
        std::vector<std::string> out;
        for (int i = 0; i < rows; ++i) {
            std::string s;
            for (auto c : columns) s += (c >> i & 1u) ? '1' : '0';
            out.push_back(s);
        }
        return out;
    }

    std::uint32_t row_image(const truth_table& f) const {
        std::uint32_t o = 0;
        for (int i = 0; i < rows; ++i)
            if (f.bit(row(i))) o |= 1u << i;
        return o;
    }
};

namespace detail {

// Smallest number of true points of f whose bitwise meet is all-zero, or 0 if none.
inline int meet_cover_number(const truth_table& f) {
    const int n = f.arity();
    const std::uint32_t full = f.rows() - 1;
    std::vector<std::uint32_t> zero_sets;
    for (std::uint32_t r = 0; r < f.rows(); ++r)
        if (f.bit(r)) zero_sets.push_back(full & ~r);
    if (zero_sets.empty()) return 0;
    std::vector<int> dist(std::size_t{1} << n, -1);
    std::vector<std::uint32_t> frontier{0};
    dist[0] = 0;
    for (int d = 1; !frontier.empty(); ++d) {
        std::vector<std::uint32_t> next;
        for (auto m : frontier)
            for (auto z : zero_sets) {
                const std::uint32_t nm = m | z;
                if (dist[nm] >= 0) continue;
                dist[nm] = d;
                if (nm == full) return d;
                next.push_back(nm);
            }
        frontier = std::move(next);
    }
    return 0;
}

inline bool is_affine(const truth_table& f) {
    // Möbius transform: only the constant and single-variable monomials may survive.
    truth_table a = f;
    for (int i = 0; i < f.arity(); ++i)
        for (std::uint32_t r = 0; r < f.rows(); ++r)
            if (r >> i & 1u) a.set(r, a.bit(r) != a.bit(r ^ (1u << i)));
    for (std::uint32_t r = 0; r < f.rows(); ++r)
        if (a.bit(r) && std::popcount(r) > 1) return false;
    return true;
}

inline std::uint64_t matrix_count(std::size_t size, int n, std::uint64_t budget) {
    std::uint64_t total = 1;
    for (int j = 0; j < n; ++j) {
        if (size != 0 && total > budget / size) return budget + 1;
        total *= size;
    }
    return total;
}

// Lexicographically first violating matrix (first column slowest).
inline std::optional<bit_matrix> first_violation(const truth_table& f, const finite_relation& R, std::uint64_t budget) {
    const auto tup = R.tuples();
    const int n = f.arity();
    const int k = R.arity();
    if (tup.empty()) return std::nullopt;
    if (matrix_count(tup.size(), n, budget) > budget)
        throw resource_error("preservation check needs |R|^n = " + std::to_string(tup.size()) + "^" + std::to_string(n) +
                             " matrices, above the budget of " + std::to_string(budget));
    std::vector<std::size_t> digit(n, 0);
    std::vector<std::uint32_t> row(k, 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < k; ++i) row[i] |= ((tup[0] >> i) & 1u) << j;
    while (true) {
        std::uint32_t o = 0;
        for (int i = 0; i < k; ++i)
            if (f.bit(row[i])) o |= 1u << i;
        if (!R.contains(o)) {
            bit_matrix m{k, {}};
            for (int j = 0; j < n; ++j) m.columns.push_back(tup[digit[j]]);
            return m;
        }
        int j = n - 1;
        while (j >= 0 && digit[j] + 1 == tup.size()) {
            const std::uint32_t diff = tup[digit[j]] ^ tup[0];
            for (int i = 0; i < k; ++i) row[i] ^= ((diff >> i) & 1u) << j;
            digit[j] = 0;
            --j;
        }
        if (j < 0) return std::nullopt;
        const std::uint32_t diff = tup[digit[j]] ^ tup[digit[j] + 1];
        for (int i = 0; i < k; ++i) row[i] ^= ((diff >> i) & 1u) << j;
        ++digit[j];
    }
}

}  // namespace detail

inline std::optional<bit_matrix> counterexample(const truth_table& f, const finite_relation& R,
                                                std::uint64_t budget = default_matrix_budget) {
    return detail::first_violation(f, R, budget);
}

inline bool preserves(const truth_table& f, const finite_relation& R, std::uint64_t budget = default_matrix_budget) {
    const int k = R.arity();
    if (k >= 2 && R == standard_relation{rel_tag::meet_zero, k}.realize()) {
        const int c = detail::meet_cover_number(f);
        return c == 0 || c > k;
    }
    if (k >= 2 && R == standard_relation{rel_tag::join_one, k}.realize()) {
        const int c = detail::meet_cover_number(demorgan_dual(f));
        return c == 0 || c > k;
    }
    if (k == 4 && R == standard_relation{rel_tag::graph_xor4}.realize()) return detail::is_affine(f);
    if (k == 3 && R == standard_relation{rel_tag::graph_xor3}.realize()) return detail::is_affine(f) && !f.bit(0);
    return !detail::first_violation(f, R, budget).has_value();
}

namespace detail {

// For small arities: out[c_0 + 2^k c_1 + ...] is the row-image tuple of the
// matrix with columns c_j.
inline std::vector<std::uint8_t> application_table(const truth_table& f, int k) {
    const int n = f.arity();
    const std::uint32_t u = 1u << k;
    std::size_t total = 1;
    for (int j = 0; j < n; ++j) total *= u;
    std::vector<std::uint8_t> out(total);
    std::vector<std::uint32_t> cols(n, 0);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (int j = 0; j < n; ++j) {
            cols[j] = static_cast<std::uint32_t>(c % u);
            c /= u;
        }
        std::uint32_t o = 0;
        for (int i = 0; i < k; ++i) {
            std::uint32_t r = 0;
            for (int j = 0; j < n; ++j) r |= ((cols[j] >> i) & 1u) << j;
            if (f.bit(r)) o |= 1u << i;
        }
        out[code] = static_cast<std::uint8_t>(o);
    }
    return out;
}

inline bool preserves_by_table(const std::vector<std::uint8_t>& app, int n, int k, std::uint32_t rel) {
    std::vector<std::uint32_t> tup;
    for (std::uint32_t t = 0; t < (1u << k); ++t)
        if (rel >> t & 1u) tup.push_back(t);
    if (tup.empty()) return true;
    std::vector<std::size_t> digit(n, 0);
    const std::uint32_t u = 1u << k;
    while (true) {
        std::size_t code = 0;
        for (int j = n - 1; j >= 0; --j) code = code * u + tup[digit[j]];
        if (!(rel >> app[code] & 1u)) return false;
        int j = n - 1;
        while (j >= 0 && digit[j] + 1 == tup.size()) digit[j--] = 0;
        if (j < 0) return true;
        ++digit[j];
    }
}

}  // namespace detail

// All k-ary relations preserved by every member of F, in increasing bitset order.
inline std::vector<finite_relation> invariants_of(const std::vector<truth_table>& F, int k) {
    if (k < 1) throw arity_error("invariants_of: k must be >= 1");
    if (k > 4) throw resource_error("invariants_of enumerates 2^(2^k) relations; k = " + std::to_string(k) + " exceeds 4");
    struct prepared {
        const truth_table* f;
        std::vector<std::uint8_t> app;
    };
    std::vector<prepared> prep;
    for (const auto& f : F) {
        prepared p{&f, {}};
        if (f.arity() * k <= 20) p.app = detail::application_table(f, k);
        prep.push_back(std::move(p));
    }
    std::vector<finite_relation> out;
    const std::uint64_t count = std::uint64_t{1} << (1u << k);
    for (std::uint64_t rel = 0; rel < count; ++rel) {
        const auto R = finite_relation::from_predicate(k, [&](std::uint32_t t) { return rel >> t & 1u; });
        bool ok = true;
        for (const auto& p : prep) {
            ok = p.app.empty() ? preserves(*p.f, R)
                               : detail::preserves_by_table(p.app, p.f->arity(), k, static_cast<std::uint32_t>(rel));
            if (!ok) break;
        }
        if (ok) out.push_back(R);
    }
    return out;
}

}  // namespace clonekit
