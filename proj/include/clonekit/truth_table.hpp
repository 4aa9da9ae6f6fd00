#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace clonekit {

inline constexpr int max_fin_arity = 16;

// A finitary Boolean function as a packed table. Row r holds f(x) where
// x_i = bit i of r, so x0 is the least significant input.
class truth_table {
public:
    truth_table() : truth_table(1) {}

    explicit truth_table(int arity) : arity_(arity) {
        if (arity < 1) throw convention_error("truth tables have arity >= 1");
        if (arity > max_fin_arity)
            throw arity_error("arity " + std::to_string(arity) + " exceeds " +
                              std::to_string(max_fin_arity));
        words_.assign(word_count(arity), 0);
    }

    static truth_table from_word(int arity, std::uint64_t bits) {
        if (arity > 6) throw arity_error("from_word needs arity <= 6");
        truth_table t(arity);
        t.words_[0] = bits & t.last_mask();
        return t;
    }

    template <class F>
    static truth_table from_function(int arity, F&& f) {
        truth_table t(arity);
        for (std::uint32_t r = 0; r < t.rows(); ++r)
            if (f(r)) t.set(r, true);
        return t;
    }

    static truth_table constant(bool c, int arity) {
        truth_table t(arity);
        if (c) {
            std::fill(t.words_.begin(), t.words_.end(), ~std::uint64_t{0});
            t.words_.back() &= t.last_mask();
        }
        return t;
    }

    static truth_table projection(int i, int arity) {
        if (i < 0 || i >= arity)
            throw arity_error("projection index " + std::to_string(i) +
                              " out of range for arity " + std::to_string(arity));
        return from_function(arity, [i](std::uint32_t r) { return (r >> i) & 1u; });
    }

    int arity() const noexcept { return arity_; }
    std::uint32_t rows() const noexcept { return 1u << arity_; }
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }
    std::uint64_t word0() const noexcept { return words_[0]; }

    bool bit(std::uint32_t r) const noexcept { return (words_[r >> 6] >> (r & 63)) & 1u; }

    void set(std::uint32_t r, bool v) noexcept {
        const std::uint64_t m = std::uint64_t{1} << (r & 63);
        if (v)
            words_[r >> 6] |= m;
        else
            words_[r >> 6] &= ~m;
    }

    bool eval(const std::vector<bool>& x) const {
        if (static_cast<int>(x.size()) != arity_)
            throw arity_error("eval: expected " + std::to_string(arity_) + " inputs, got " +
                              std::to_string(x.size()));
        std::uint32_t r = 0;
        for (int i = 0; i < arity_; ++i)
            if (x[i]) r |= 1u << i;
        return bit(r);
    }

    std::size_t count() const noexcept {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    bool is_constant(bool c) const { return *this == constant(c, arity_); }

    truth_table operator~() const {
        truth_table t = *this;
        for (auto& w : t.words_) w = ~w;
        t.words_.back() &= t.last_mask();
        return t;
    }

    truth_table operator&(const truth_table& o) const { return zip(o, std::bit_and<>{}); }
    truth_table operator|(const truth_table& o) const { return zip(o, std::bit_or<>{}); }
    truth_table operator^(const truth_table& o) const { return zip(o, std::bit_xor<>{}); }

    bool operator==(const truth_table&) const = default;

    // Ordered by arity, then by the table read as an unsigned integer.
    std::strong_ordering operator<=>(const truth_table& o) const {
        if (arity_ != o.arity_) return arity_ <=> o.arity_;
        for (std::size_t i = words_.size(); i-- > 0;)
            if (words_[i] != o.words_[i]) return words_[i] <=> o.words_[i];
        return std::strong_ordering::equal;
    }

    // Most significant nibble first, ceil(2^n / 4) digits.
    std::string to_hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        const std::uint32_t n = std::max<std::uint32_t>(1, rows() / 4);
        std::string s(n, '0');
        for (std::uint32_t d = 0; d < n; ++d) {
            unsigned v = 0;
            for (unsigned b = 0; b < 4; ++b) {
                const std::uint32_t r = 4 * d + b;
                if (r < rows() && bit(r)) v |= 1u << b;
            }
            s[n - 1 - d] = digits[v];
        }
        return s;
    }

    static truth_table from_hex(int arity, std::string_view hex) {
        truth_table t(arity);
        const std::uint32_t n = std::max<std::uint32_t>(1, t.rows() / 4);
        if (hex.size() != n)
            throw arity_error("hex table for arity " + std::to_string(arity) + " needs " +
                              std::to_string(n) + " digits, got " + std::to_string(hex.size()));
        for (std::uint32_t d = 0; d < n; ++d) {
            const char c = hex[n - 1 - d];
            unsigned v;
            if (c >= '0' && c <= '9')
                v = c - '0';
            else if (c >= 'a' && c <= 'f')
                v = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F')
                v = c - 'A' + 10;
            else
                throw structural_error(std::string("bad hex digit '") + c + "'");
            for (unsigned b = 0; b < 4; ++b) {
                const std::uint32_t r = 4 * d + b;
                if (!(v >> b & 1u)) continue;
                if (r >= t.rows()) throw structural_error("hex table has bits beyond 2^arity");
                t.set(r, true);
            }
        }
        return t;
    }

    std::size_t hash() const noexcept {
        std::size_t h = static_cast<std::size_t>(arity_) * 0x9e3779b97f4a7c15ull;
        for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    }

private:
    static std::size_t word_count(int arity) { return arity <= 6 ? 1 : std::size_t{1} << (arity - 6); }

    std::uint64_t last_mask() const noexcept {
        return arity_ >= 6 ? ~std::uint64_t{0} : (std::uint64_t{1} << (1u << arity_)) - 1;
    }

    template <class Op>
    truth_table zip(const truth_table& o, Op op) const {
        if (o.arity_ != arity_) throw arity_error("pointwise operation on different arities");
        truth_table t(arity_);
        for (std::size_t i = 0; i < words_.size(); ++i) t.words_[i] = op(words_[i], o.words_[i]);
        return t;
    }

    int arity_;
    std::vector<std::uint64_t> words_;
};

struct truth_table_hash {
    std::size_t operator()(const truth_table& t) const noexcept { return t.hash(); }
};

inline void to_json(nlohmann::json& j, const truth_table& t) {
    j = {{"arity", t.arity()}, {"hex", t.to_hex()}};
}

inline void from_json(const nlohmann::json& j, truth_table& t) {
    t = truth_table::from_hex(j.at("arity").get<int>(), j.at("hex").get<std::string>());
}

// g(f_0(x), f_1(x), ...) at the common arity of the f_i.
inline truth_table compose(const truth_table& g, const std::vector<truth_table>& fs) {
    if (static_cast<int>(fs.size()) != g.arity())
        throw arity_error("compose: g has arity " + std::to_string(g.arity()) + " but " +
                          std::to_string(fs.size()) + " components were given");
    const int m = fs[0].arity();
    for (const auto& f : fs)
        if (f.arity() != m) throw arity_error("compose: components of different arities");
    truth_table out(m);
    if (m <= 6) {
        std::uint64_t w = 0;
        for (std::uint32_t r = 0; r < out.rows(); ++r) {
            std::uint32_t idx = 0;
            for (std::size_t i = 0; i < fs.size(); ++i) idx |= static_cast<std::uint32_t>((fs[i].word0() >> r) & 1u) << i;
            if (g.bit(idx)) w |= std::uint64_t{1} << r;
        }
        return truth_table::from_word(m, w);
    }
    for (std::uint32_t r = 0; r < out.rows(); ++r) {
        std::uint32_t idx = 0;
        for (std::size_t i = 0; i < fs.size(); ++i) idx |= static_cast<std::uint32_t>(fs[i].bit(r)) << i;
        if (g.bit(idx)) out.set(r, true);
    }
    return out;
}

// f(x_{map[0]}, ..., x_{map[n-1]}) as a function of arity m.
inline truth_table minor(const truth_table& f, const std::vector<int>& map, int m) {
    if (static_cast<int>(map.size()) != f.arity()) throw arity_error("minor: map length != arity");
    return truth_table::from_function(m, [&](std::uint32_t r) {
        std::uint32_t idx = 0;
        for (std::size_t i = 0; i < map.size(); ++i) idx |= ((r >> map[i]) & 1u) << i;
        return f.bit(idx);
    });
}

// The de Morgan dual ¬f(¬x).
inline truth_table demorgan_dual(const truth_table& f) {
    const std::uint32_t all = f.rows() - 1;
    return truth_table::from_function(f.arity(), [&](std::uint32_t r) { return !f.bit(r ^ all); });
}

inline bool is_selfdual(const truth_table& f) { return demorgan_dual(f) == f; }

inline bool leq(const truth_table& a, const truth_table& b) {
    if (a.arity() != b.arity()) throw arity_error("leq: different arities");
    for (std::size_t i = 0; i < a.words().size(); ++i)
        if (a.words()[i] & ~b.words()[i]) return false;
    return true;
}

inline void check_extend(const truth_table& f, const char* op) {
    if (f.arity() + 1 > max_fin_arity) throw arity_error(std::string(op) + ": arity overflow");
}

// x0 ∧ f(x1, ...); the new variable is x0.
inline truth_table ceil(const truth_table& f) {
    check_extend(f, "ceil");
    return truth_table::from_function(f.arity() + 1, [&](std::uint32_t r) { return (r & 1u) && f.bit(r >> 1); });
}

// x0 ∨ f(x1, ...).
inline truth_table floor(const truth_table& f) {
    check_extend(f, "floor");
    return truth_table::from_function(f.arity() + 1, [&](std::uint32_t r) { return (r & 1u) || f.bit(r >> 1); });
}

// f(c, x1, ...) as a function of the remaining variables.
inline truth_table cross_section(const truth_table& f, bool c) {
    if (f.arity() < 2) throw convention_error("cross_section of a unary function would be nullary");
    return truth_table::from_function(f.arity() - 1, [&](std::uint32_t r) { return f.bit((r << 1) | (c ? 1u : 0u)); });
}

// x0 ? δ(f)(x1, ...) : f(x1, ...). Always self-dual.
inline truth_table beta(const truth_table& f) {
    check_extend(f, "beta");
    const truth_table d = demorgan_dual(f);
    return truth_table::from_function(f.arity() + 1, [&](std::uint32_t r) { return (r & 1u) ? d.bit(r >> 1) : f.bit(r >> 1); });
}

// Indicator of the upward closure of f^{-1}(1) in the bitwise order.
inline truth_table up_closure(const truth_table& f) {
    truth_table u = f;
    for (int i = 0; i < f.arity(); ++i)
        for (std::uint32_t r = 0; r < f.rows(); ++r)
            if ((r >> i & 1u) && u.bit(r ^ (1u << i))) u.set(r, true);
    return u;
}

inline bool is_monotone(const truth_table& f) { return up_closure(f) == f; }

inline bool is_essential(const truth_table& f, int i) {
    for (std::uint32_t r = 0; r < f.rows(); ++r)
        if (!(r >> i & 1u) && f.bit(r) != f.bit(r | (1u << i))) return true;
    return false;
}

inline std::vector<int> essential_variables(const truth_table& f) {
    std::vector<int> out;
    for (int i = 0; i < f.arity(); ++i)
        if (is_essential(f, i)) out.push_back(i);
    return out;
}

// Deletes inessential trailing variables, keeping arity >= 1.
inline truth_table canonicalize(const truth_table& f) {
    int n = f.arity();
    while (n > 1 && !is_essential(f, n - 1)) --n;
    if (n == f.arity()) return f;
    return truth_table::from_function(n, [&](std::uint32_t r) { return f.bit(r); });
}

// The restriction of f to its essential variables, in increasing order.
// Functions with no essential variable restrict to a unary constant.
inline truth_table restrict_to_essential(const truth_table& f) {
    const auto ess = essential_variables(f);
    if (ess.empty()) return truth_table::constant(f.bit(0), 1);
    return truth_table::from_function(static_cast<int>(ess.size()), [&](std::uint32_t r) {
        std::uint32_t idx = 0;
        for (std::size_t j = 0; j < ess.size(); ++j) idx |= ((r >> j) & 1u) << ess[j];
        return f.bit(idx);
    });
}

// Every table of arity n, in increasing order. Only sensible for n <= 4.
inline std::vector<truth_table> all_tables(int n) {
    if (n > 4) throw resource_error("all_tables: arity " + std::to_string(n) + " exceeds 4");
    std::vector<truth_table> out;
    const std::uint64_t count = std::uint64_t{1} << (1u << n);
    out.reserve(count);
    for (std::uint64_t w = 0; w < count; ++w) out.push_back(truth_table::from_word(n, w));
    return out;
}

}  // namespace clonekit
