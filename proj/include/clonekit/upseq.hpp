#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace clonekit {

using bits = std::vector<std::uint8_t>;

// An ultimately periodic bit sequence prefix·cycle^ω, always kept canonical:
// the cycle is primitive and the prefix cannot be shortened by rotating the
// cycle back into it.
class upseq {
public:
    upseq() : cycle_{0} {}
    upseq(bits prefix, bits cycle) : prefix_(std::move(prefix)), cycle_(std::move(cycle)) {
        if (cycle_.empty()) throw structural_error("ultimately periodic sequence needs a nonempty cycle");
        for (auto b : prefix_)
            if (b > 1) throw structural_error("sequence entries must be bits");
        for (auto b : cycle_)
            if (b > 1) throw structural_error("sequence entries must be bits");
        canonicalize();
    }

    static upseq constant(bool c) { return upseq({}, {static_cast<std::uint8_t>(c)}); }

    // "01(10)"; a bare word "011" means 011 followed by zeros.
    static upseq parse(std::string_view s) {
        bits p, c;
        std::size_t i = 0;
        auto take = [&](bits& out, char stop) {
            for (; i < s.size() && s[i] != stop; ++i) {
                if (s[i] == ' ') continue;
                if (s[i] != '0' && s[i] != '1')
                    throw parse_error(std::string("bad character '") + s[i] + "' in sequence literal", i);
                out.push_back(s[i] == '1');
            }
        };
        take(p, '(');
        if (i == s.size()) return upseq(p, {0});
        ++i;
        take(c, ')');
        if (i == s.size()) throw parse_error("unterminated cycle in sequence literal", i);
        if (i + 1 != s.size()) throw parse_error("trailing input after sequence literal", i + 1);
        if (c.empty()) throw parse_error("empty cycle in sequence literal", i);
        return upseq(p, c);
    }

    const bits& prefix() const noexcept { return prefix_; }
    const bits& cycle() const noexcept { return cycle_; }
    std::size_t prefix_len() const noexcept { return prefix_.size(); }
    std::size_t period() const noexcept { return cycle_.size(); }

    bool at(std::size_t i) const {
        if (i < prefix_.size()) return prefix_[i];
        return cycle_[(i - prefix_.size()) % cycle_.size()];
    }

    // First n entries.
    bits take(std::size_t n) const {
        bits out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = at(i);
        return out;
    }

    // (x_s, x_{s+1}, ...).
    upseq shift(std::size_t s) const {
        if (s <= prefix_.size()) return upseq(bits(prefix_.begin() + s, prefix_.end()), cycle_);
        const std::size_t rot = (s - prefix_.size()) % cycle_.size();
        bits c(cycle_.begin() + rot, cycle_.end());
        c.insert(c.end(), cycle_.begin(), cycle_.begin() + rot);
        return upseq({}, c);
    }

    // Bits w followed by this sequence.
    upseq prepend(const bits& w) const {
        bits p = w;
        p.insert(p.end(), prefix_.begin(), prefix_.end());
        return upseq(p, cycle_);
    }

    // (x_{start}, x_{start+stride}, x_{start+2 stride}, ...).
    upseq subseq(std::size_t start, std::size_t stride) const {
        if (stride == 0) return constant(at(start));
        std::size_t j0 = 0;
        while (start + stride * j0 < prefix_.size()) ++j0;
        const std::size_t len = cycle_.size() / std::gcd(cycle_.size(), stride);
        bits p(j0), c(len);
        for (std::size_t j = 0; j < j0; ++j) p[j] = at(start + stride * j);
        for (std::size_t j = 0; j < len; ++j) c[j] = at(start + stride * (j0 + j));
        return upseq(p, c);
    }

    template <class Op>
    static upseq zip(const upseq& a, const upseq& b, Op op) {
        const std::size_t P = std::max(a.prefix_len(), b.prefix_len());
        const std::size_t L = std::lcm(a.period(), b.period());
        bits p(P), c(L);
        for (std::size_t i = 0; i < P; ++i) p[i] = op(a.at(i), b.at(i));
        for (std::size_t i = 0; i < L; ++i) c[i] = op(a.at(P + i), b.at(P + i));
        return upseq(p, c);
    }

    upseq operator~() const {
        bits p = prefix_, c = cycle_;
        for (auto& b : p) b ^= 1;
        for (auto& b : c) b ^= 1;
        return upseq(p, c);
    }
    upseq operator&(const upseq& o) const { return zip(*this, o, [](bool x, bool y) { return x && y; }); }
    upseq operator|(const upseq& o) const { return zip(*this, o, [](bool x, bool y) { return x || y; }); }

    bool cycle_all(bool c) const {
        return std::all_of(cycle_.begin(), cycle_.end(), [c](std::uint8_t b) { return b == c; });
    }
    bool cycle_has(bool c) const { return !cycle_all(!c); }
    std::size_t prefix_count(bool c) const {
        return static_cast<std::size_t>(std::count(prefix_.begin(), prefix_.end(), static_cast<std::uint8_t>(c)));
    }
    // Whether the value c occurs anywhere.
    bool has(bool c) const { return prefix_count(c) > 0 || cycle_has(c); }
    // Index of the first occurrence of c, or npos.
    std::size_t first(bool c) const {
        for (std::size_t i = 0; i < prefix_.size() + cycle_.size(); ++i)
            if (at(i) == c) return i;
        return npos;
    }
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    // Pointwise order.
    bool leq(const upseq& o) const {
        const std::size_t n = std::max(prefix_len(), o.prefix_len()) + std::lcm(period(), o.period());
        for (std::size_t i = 0; i < n; ++i)
            if (at(i) && !o.at(i)) return false;
        return true;
    }

    std::string to_string() const {
        std::string s;
        for (auto b : prefix_) s += b ? '1' : '0';
        s += '(';
        for (auto b : cycle_) s += b ? '1' : '0';
        s += ')';
        return s;
    }

    bool operator==(const upseq&) const = default;
    auto operator<=>(const upseq& o) const {
        if (auto c = prefix_.size() <=> o.prefix_.size(); c != 0) return c;
        if (auto c = cycle_.size() <=> o.cycle_.size(); c != 0) return c;
        if (auto c = prefix_ <=> o.prefix_; c != 0) return c;
        return cycle_ <=> o.cycle_;
    }

private:
    void canonicalize() {
        const std::size_t n = cycle_.size();
        for (std::size_t p = 1; p < n; ++p) {
            if (n % p) continue;
            bool ok = true;
            for (std::size_t i = p; i < n && ok; ++i) ok = cycle_[i] == cycle_[i - p];
            if (ok) {
                cycle_.resize(p);
                break;
            }
        }
        while (!prefix_.empty() && prefix_.back() == cycle_.back()) {
            std::rotate(cycle_.rbegin(), cycle_.rbegin() + 1, cycle_.rend());
            prefix_.pop_back();
        }
    }

    bits prefix_;
    bits cycle_;
};

inline void to_json(nlohmann::json& j, const upseq& s) { j = s.to_string(); }
inline void from_json(const nlohmann::json& j, upseq& s) { s = upseq::parse(j.get<std::string>()); }

// Interleaves streams s_0, ..., s_{c-1} into s_0[0] s_1[0] ... s_0[1] ...
inline upseq interleave(const std::vector<upseq>& s) {
    std::size_t a = 0, l = 1;
    for (const auto& x : s) {
        a = std::max(a, x.prefix_len());
        l = std::lcm(l, x.period());
    }
    const std::size_t c = s.size();
    bits pre(a * c), cyc(l * c);
    for (std::size_t i = 0; i < a * c; ++i) pre[i] = s[i % c].at(i / c);
    for (std::size_t i = 0; i < l * c; ++i) cyc[i] = s[i % c].at(a + i / c);
    return upseq(pre, cyc);
}

// Every canonical sequence with prefix length <= max_prefix and primitive
// cycle length <= max_cycle, in a fixed order.
inline std::vector<upseq> upseq_grid(std::size_t max_prefix = 6, std::size_t max_cycle = 3) {
    std::vector<upseq> out;
    for (std::size_t cl = 1; cl <= max_cycle; ++cl)
        for (std::uint32_t cw = 0; cw < (1u << cl); ++cw) {
            bits c(cl);
            for (std::size_t i = 0; i < cl; ++i) c[i] = (cw >> i) & 1u;
            const upseq probe({}, c);
            if (probe.period() != cl) continue;
            for (std::size_t pl = 0; pl <= max_prefix; ++pl)
                for (std::uint32_t pw = 0; pw < (1u << pl); ++pw) {
                    bits p(pl);
                    for (std::size_t i = 0; i < pl; ++i) p[i] = (pw >> i) & 1u;
                    if (pl > 0 && p.back() == c.back()) continue;
                    out.emplace_back(p, c);
                }
        }
    return out;
}

}  // namespace clonekit
