#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "expr.hpp"
#include "upseq.hpp"

namespace clonekit {

struct omega_term;
using term_ptr = std::shared_ptr<const omega_term>;

enum class inf_tag { big_meet, big_join, lim_inf, lim_sup, forall_w, exists_w };

// A countable list of terms: `prefix` first, then the template block
// repeated forever, the i-th repetition with every variable index raised by
// stride*i. In meetscan/joinscan mode the m-th element is replaced by the
// meet/join of elements 0..m.
struct family {
    enum class scan { none, meet, join };
    std::vector<term_ptr> prefix;
    std::vector<term_ptr> block;
    std::size_t stride = 1;
    scan mode = scan::none;
};

struct omega_term {
    enum class node { var, constant, negation, fin_apply, inf_apply, odisj, compose };

    node kind = node::var;
    std::size_t index = 0;  // var
    bool value = false;     // constant
    // fin_apply: head connective realized at the number of children
    expr::op op = expr::op::and_n;
    int threshold = 0;
    std::shared_ptr<const truth_table> head;
    // inf_apply
    inf_tag tag = inf_tag::big_meet;
    int k = 0;
    family fam;  // inf_apply, compose
    term_ptr body;  // compose
    std::vector<int> blocks;  // odisj block sizes; -1 for an ω-block
    std::vector<term_ptr> kids;
};

inline constexpr int omega_block = -1;

// ---- builders ---------------------------------------------------------------

inline term_ptr tvar(std::size_t i) {
    auto t = std::make_shared<omega_term>();
    t->kind = omega_term::node::var;
    t->index = i;
    return t;
}

inline term_ptr tconst(bool c) {
    auto t = std::make_shared<omega_term>();
    t->kind = omega_term::node::constant;
    t->value = c;
    return t;
}

inline term_ptr tnot(term_ptr a) {
    auto t = std::make_shared<omega_term>();
    t->kind = omega_term::node::negation;
    t->kids = {std::move(a)};
    return t;
}

inline term_ptr tfin(expr::op op, std::vector<term_ptr> kids, int threshold = 0,
                     std::shared_ptr<const truth_table> table = nullptr) {
    if (kids.empty() || kids.size() > static_cast<std::size_t>(max_fin_arity))
        throw arity_error("finitary head needs 1..16 arguments");
    const int n = static_cast<int>(kids.size());
    std::vector<expr> vars;
    for (int i = 0; i < n; ++i) vars.push_back(expr::var(i));
    auto t = std::make_shared<omega_term>();
    t->kind = omega_term::node::fin_apply;
    t->op = op;
    t->threshold = threshold;
    if (op == expr::op::table) {
        if (!table || table->arity() != n) throw arity_error("table head applied to the wrong number of arguments");
        t->head = std::move(table);
    } else {
        t->head = std::make_shared<const truth_table>(evaluate(expr::apply(op, vars, threshold), n));
    }
    t->kids = std::move(kids);
    return t;
}

inline term_ptr ttable(const truth_table& f, std::vector<term_ptr> kids) {
    return tfin(expr::op::table, std::move(kids), 0, std::make_shared<const truth_table>(f));
}

inline family identity_family(std::size_t start = 0, std::size_t stride = 1) {
    family f;
    f.block = {tvar(start)};
    f.stride = stride;
    return f;
}

inline term_ptr tinf(inf_tag tag, family fam, int k = 0) {
    if (fam.block.empty()) throw structural_error("family needs a nonempty template block");
    auto t = std::make_shared<omega_term>();
    t->kind = omega_term::node::inf_apply;
    t->tag = tag;
    t->k = k;
    t->fam = std::move(fam);
    return t;
}

inline term_ptr tcompose(term_ptr body, family fam) {
    if (fam.block.empty()) throw structural_error("family needs a nonempty template block");
    auto t = std::make_shared<omega_term>();
    t->kind = omega_term::node::compose;
    t->body = std::move(body);
    t->fam = std::move(fam);
    return t;
}

inline term_ptr todisj(std::vector<int> blocks, std::vector<term_ptr> parts) {
    if (blocks.empty() || blocks.size() != parts.size())
        throw structural_error("orthogonal disjunction needs one term per block");
    for (int b : blocks)
        if (b == 0 || b < omega_block) throw structural_error("block sizes are positive or ω");
    auto t = std::make_shared<omega_term>();
    t->kind = omega_term::node::odisj;
    t->blocks = std::move(blocks);
    t->kids = std::move(parts);
    return t;
}

// The finite-block ∀^{k-t}_2 combined with t copies of liminf on interleaved
// ω-blocks; t = 0 gives the finitary ∀^k_2.
inline term_ptr fkt_term(int k, int t) {
    if (k < 1 || t < 0 || t > k) throw usage_error("fkt parameters need 0 <= t <= k, k >= 1");
    std::vector<int> blocks;
    std::vector<term_ptr> parts;
    for (int i = 0; i < k - t; ++i) {
        blocks.push_back(1);
        parts.push_back(tconst(true));
    }
    for (int i = 0; i < t; ++i) {
        blocks.push_back(omega_block);
        parts.push_back(tinf(inf_tag::lim_inf, identity_family()));
    }
    return todisj(std::move(blocks), std::move(parts));
}

// ---- evaluation -------------------------------------------------------------

inline bool up_eval(const omega_term& t, const upseq& x);

namespace detail {

inline bool connective(inf_tag tag, int k, const upseq& s) {
    switch (tag) {
        case inf_tag::big_meet: return !s.has(false);
        case inf_tag::big_join: return s.has(true);
        case inf_tag::lim_inf: return s.cycle_all(true);
        case inf_tag::lim_sup: return s.cycle_has(true);
        case inf_tag::forall_w: return s.cycle_all(true) && s.prefix_count(false) < static_cast<std::size_t>(k);
        case inf_tag::exists_w:
            return s.cycle_has(true) || s.prefix_count(true) >= static_cast<std::size_t>(k);
    }
    throw structural_error("unknown connective");
}

}  // namespace detail

// The stream of values of a family's elements at the point x.
inline upseq family_stream(const family& f, const upseq& x) {
    if (f.block.empty()) throw structural_error("family needs a nonempty template block");
    bits pre;
    for (const auto& t : f.prefix) pre.push_back(up_eval(*t, x));
    const std::size_t B = f.block.size();
    bits cyc;
    const bool plain_vars = std::all_of(f.block.begin(), f.block.end(),
                                        [](const term_ptr& t) { return t->kind == omega_term::node::var; });
    if (plain_vars && f.stride > 0 && f.mode == family::scan::none) {
        std::vector<upseq> streams;
        for (const auto& t : f.block) streams.push_back(x.subseq(t->index, f.stride));
        return interleave(streams).prepend(pre);
    }
    if (f.stride == 0) {
        for (const auto& t : f.block) cyc.push_back(up_eval(*t, x));
    } else {
        // x shifted by stride*i is periodic in i once past the prefix.
        const std::size_t s = f.stride;
        const std::size_t i0 = (x.prefix_len() + s - 1) / s;
        const std::size_t per = x.period() / std::gcd(x.period(), s);
        for (std::size_t i = 0; i < i0 + per; ++i) {
            const upseq xi = x.shift(s * i);
            for (std::size_t r = 0; r < B; ++r) (i < i0 ? pre : cyc).push_back(up_eval(*f.block[r], xi));
        }
    }
    upseq out(pre, cyc);
    if (f.mode == family::scan::none) return out;
    const bool absorbing = f.mode == family::scan::meet ? false : true;
    const std::size_t z = out.first(absorbing);
    if (z == upseq::npos) return upseq::constant(!absorbing);
    return upseq(bits(z, !absorbing), {static_cast<std::uint8_t>(absorbing)});
}

inline bool up_eval(const omega_term& t, const upseq& x) {
    using node = omega_term::node;
    switch (t.kind) {
        case node::var: return x.at(t.index);
        case node::constant: return t.value;
        case node::negation: return !up_eval(*t.kids.at(0), x);
        case node::fin_apply: {
            std::uint32_t row = 0;
            for (std::size_t i = 0; i < t.kids.size(); ++i)
                if (up_eval(*t.kids[i], x)) row |= 1u << i;
            return t.head->bit(row);
        }
        case node::inf_apply: return detail::connective(t.tag, t.k, family_stream(t.fam, x));
        case node::compose: return up_eval(*t.body, family_stream(t.fam, x));
        case node::odisj: {
            // Finite blocks occupy the leading coordinates in order; the
            // ω-blocks share the rest, interleaved.
            std::size_t fin = 0, w = 0;
            for (int b : t.blocks) {
                if (b == omega_block) ++w;
                else fin += static_cast<std::size_t>(b);
            }
            std::vector<upseq> inputs;
            std::vector<bool> meets;
            std::size_t at = 0, a = 0;
            for (int b : t.blocks) {
                if (b == omega_block) {
                    inputs.push_back(x.subseq(fin + a++, w));
                    meets.push_back(!inputs.back().has(false));
                } else {
                    bits v(b);
                    for (int i = 0; i < b; ++i) v[i] = x.at(at + i);
                    at += b;
                    meets.push_back(std::find(v.begin(), v.end(), 0) == v.end());
                    inputs.emplace_back(std::move(v), bits{0});
                }
            }
            const auto zeros = std::count(meets.begin(), meets.end(), false);
            if (zeros >= 2) return false;
            if (zeros == 1) {
                const std::size_t i = std::find(meets.begin(), meets.end(), false) - meets.begin();
                return up_eval(*t.kids[i], inputs[i]);
            }
            for (std::size_t i = 0; i < t.kids.size(); ++i)
                if (up_eval(*t.kids[i], inputs[i])) return true;
            return false;
        }
    }
    throw structural_error("unknown term node");
}

// ---- printing ---------------------------------------------------------------

inline std::string to_string(const omega_term& t);

inline std::string to_string(const family& f) {
    std::string s;
    if (f.mode == family::scan::meet) s += "meetscan";
    if (f.mode == family::scan::join) s += "joinscan";
    s += "[";
    for (std::size_t i = 0; i < f.prefix.size(); ++i) s += (i ? "," : "") + to_string(*f.prefix[i]);
    s += "|";
    for (std::size_t i = 0; i < f.block.size(); ++i) s += (i ? "," : "") + to_string(*f.block[i]);
    s += "@stride " + std::to_string(f.stride) + "]";
    return s;
}

namespace detail {

inline bool is_identity(const family& f) {
    return f.prefix.empty() && f.block.size() == 1 && f.stride == 1 && f.mode == family::scan::none &&
           f.block[0]->kind == omega_term::node::var && f.block[0]->index == 0;
}

inline std::string tag_name(inf_tag tag, int k) {
    switch (tag) {
        case inf_tag::big_meet: return "bigmeet";
        case inf_tag::big_join: return "bigjoin";
        case inf_tag::lim_inf: return "liminf";
        case inf_tag::lim_sup: return "limsup";
        case inf_tag::forall_w: return "forallw(" + std::to_string(k) + ")";
        case inf_tag::exists_w: return "existsw(" + std::to_string(k) + ")";
    }
    return "?";
}

}  // namespace detail

inline std::string to_string(const omega_term& t) {
    using node = omega_term::node;
    auto join = [](const std::vector<term_ptr>& v, const char* sep) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + to_string(*v[i]);
        return s;
    };
    switch (t.kind) {
        case node::var: return "x" + std::to_string(t.index);
        case node::constant: return t.value ? "1" : "0";
        case node::negation: return "not(" + to_string(*t.kids[0]) + ")";
        case node::fin_apply: {
            std::string head;
            switch (t.op) {
                case expr::op::and_n: head = "and("; break;
                case expr::op::or_n: head = "or("; break;
                case expr::op::xor_n: head = "xor("; break;
                case expr::op::ite: head = "ite("; break;
                case expr::op::imp: head = "imp("; break;
                case expr::op::nimp: head = "nimp("; break;
                case expr::op::forall: head = "forall(" + std::to_string(t.threshold) + ";"; break;
                case expr::op::exists: head = "exists(" + std::to_string(t.threshold) + ";"; break;
                default: head = "table(" + t.head->to_hex() + ";"; break;
            }
            return head + join(t.kids, ",") + ")";
        }
        case node::inf_apply: {
            const std::string name = detail::tag_name(t.tag, t.k);
            if (detail::is_identity(t.fam)) return name;
            return name + "{" + to_string(t.fam) + "}";
        }
        case node::compose: return "compose{" + to_string(*t.body) + ";" + to_string(t.fam) + "}";
        case node::odisj: {
            std::string s = "odisj(";
            for (std::size_t i = 0; i < t.blocks.size(); ++i)
                s += (i ? "," : "") + (t.blocks[i] == omega_block ? std::string("w") : std::to_string(t.blocks[i]));
            return s + "){" + join(t.kids, ";") + "}";
        }
    }
    return "?";
}

// ---- parsing ----------------------------------------------------------------

namespace detail {

inline term_ptr parse_omega(cursor& c);

inline family parse_family(cursor& c) {
    family f;
    const std::size_t start = c.pos();
    const std::string mode = c.ident();
    if (mode == "meetscan") f.mode = family::scan::meet;
    else if (mode == "joinscan") f.mode = family::scan::join;
    else if (!mode.empty()) {
        c.set_pos(start);
        c.fail("expected a family");
    }
    c.expect('[');
    if (c.peek() != '|') {
        do f.prefix.push_back(parse_omega(c));
        while (c.accept(','));
    }
    c.expect('|');
    do f.block.push_back(parse_omega(c));
    while (c.accept(','));
    c.expect('@');
    if (c.ident() != "stride") c.fail("expected 'stride'");
    f.stride = static_cast<std::size_t>(c.number());
    c.expect(']');
    return f;
}

inline family parse_braced_family(cursor& c) {
    if (!c.accept('{')) return identity_family();
    family f = parse_family(c);
    c.expect('}');
    return f;
}

inline std::vector<term_ptr> parse_omega_args(cursor& c) {
    std::vector<term_ptr> out;
    if (c.peek() == ')') return out;
    do out.push_back(parse_omega(c));
    while (c.accept(','));
    return out;
}

inline term_ptr parse_omega(cursor& c) {
    using op = expr::op;
    const std::size_t start = c.pos();
    if (c.starts_digit()) {
        const int v = c.number();
        if (v > 1) {
            c.set_pos(start);
            c.fail("constants are 0 or 1");
        }
        return tconst(v == 1);
    }
    const std::string name = c.ident();
    if (name.empty()) c.fail("expected a term");
    if (name == "x") {
        if (!c.starts_digit()) c.fail("expected a variable index");
        return tvar(static_cast<std::size_t>(c.number()));
    }
    if (name == "not") {
        c.expect('(');
        auto a = parse_omega(c);
        c.expect(')');
        return tnot(std::move(a));
    }
    static const std::pair<const char*, op> plain[] = {{"and", op::and_n}, {"or", op::or_n}, {"xor", op::xor_n},
                                                       {"ite", op::ite},   {"imp", op::imp}, {"nimp", op::nimp}};
    for (const auto& [word, k] : plain) {
        if (name != word) continue;
        c.expect('(');
        auto args = parse_omega_args(c);
        c.expect(')');
        const std::size_t need = k == op::ite ? 3 : (k == op::imp || k == op::nimp) ? 2 : 0;
        if ((need && args.size() != need) || args.empty()) {
            c.set_pos(start);
            c.fail(name + " has the wrong number of arguments");
        }
        return tfin(k, std::move(args));
    }
    if (name == "forall" || name == "exists") {
        c.expect('(');
        const int k = c.number();
        c.expect(';');
        auto args = parse_omega_args(c);
        c.expect(')');
        if (args.empty()) c.fail(name + " needs at least one argument");
        return tfin(name == "forall" ? op::forall : op::exists, std::move(args), k);
    }
    if (name == "table") {
        c.expect('(');
        const std::string hex = c.hex_word();
        c.expect(';');
        auto args = parse_omega_args(c);
        c.expect(')');
        if (args.empty() || args.size() > static_cast<std::size_t>(max_fin_arity)) c.fail("table() needs 1..16 arguments");
        const auto tab = truth_table::from_hex(static_cast<int>(args.size()), hex);
        return ttable(tab, std::move(args));
    }
    static const std::pair<const char*, inf_tag> inf[] = {{"bigmeet", inf_tag::big_meet},
                                                          {"bigjoin", inf_tag::big_join},
                                                          {"liminf", inf_tag::lim_inf},
                                                          {"limsup", inf_tag::lim_sup}};
    for (const auto& [word, tag] : inf)
        if (name == word) return tinf(tag, parse_braced_family(c));
    if (name == "forallw" || name == "existsw") {
        c.expect('(');
        const int k = c.number();
        c.expect(')');
        return tinf(name == "forallw" ? inf_tag::forall_w : inf_tag::exists_w, parse_braced_family(c), k);
    }
    if (name == "compose") {
        c.expect('{');
        auto body = parse_omega(c);
        c.expect(';');
        family f = parse_family(c);
        c.expect('}');
        return tcompose(std::move(body), std::move(f));
    }
    if (name == "odisj") {
        c.expect('(');
        std::vector<int> blocks;
        do {
            if (c.peek() == 'w') {
                c.accept('w');
                blocks.push_back(omega_block);
            } else {
                const int b = c.number();
                if (b < 1) c.fail("block sizes are positive");
                blocks.push_back(b);
            }
        } while (c.accept(','));
        c.expect(')');
        c.expect('{');
        std::vector<term_ptr> parts;
        do parts.push_back(parse_omega(c));
        while (c.accept(';'));
        c.expect('}');
        if (parts.size() != blocks.size()) {
            c.set_pos(start);
            c.fail("odisj needs one term per block");
        }
        return todisj(std::move(blocks), std::move(parts));
    }
    c.set_pos(start);
    c.fail("unknown connective '" + name + "'");
}

}  // namespace detail

inline term_ptr parse_omega_term(std::string_view s) {
    cursor c(s);
    auto t = detail::parse_omega(c);
    if (!c.at_end()) c.fail("trailing input");
    return t;
}

// ---- de Morgan dual ---------------------------------------------------------

inline term_ptr dual_term(const term_ptr& t);

inline family dual_family(const family& f) {
    family d;
    for (const auto& p : f.prefix) d.prefix.push_back(dual_term(p));
    for (const auto& b : f.block) d.block.push_back(dual_term(b));
    d.stride = f.stride;
    d.mode = f.mode == family::scan::meet ? family::scan::join
             : f.mode == family::scan::join ? family::scan::meet
                                            : family::scan::none;
    return d;
}

// A term for x ↦ ¬t(¬x).
inline term_ptr dual_term(const term_ptr& t) {
    using node = omega_term::node;
    using op = expr::op;
    switch (t->kind) {
        case node::var: return t;
        case node::constant: return tconst(!t->value);
        case node::negation: return tnot(dual_term(t->kids[0]));
        case node::fin_apply: {
            std::vector<term_ptr> kids;
            for (const auto& k : t->kids) kids.push_back(dual_term(k));
            const int n = static_cast<int>(kids.size());
            switch (t->op) {
                case op::and_n: return tfin(op::or_n, std::move(kids));
                case op::or_n: return tfin(op::and_n, std::move(kids));
                case op::ite:
                    if (n == 3) return tfin(op::ite, {kids[0], kids[2], kids[1]});
                    break;
                case op::forall: return tfin(op::exists, std::move(kids), t->threshold);
                case op::exists: return tfin(op::forall, std::move(kids), t->threshold);
                case op::xor_n:
                    if (n % 2 == 1) return tfin(op::xor_n, std::move(kids));
                    break;
                default: break;
            }
            return ttable(demorgan_dual(*t->head), std::move(kids));
        }
        case node::inf_apply: {
            static const inf_tag swap[] = {inf_tag::big_join, inf_tag::big_meet, inf_tag::lim_sup,
                                           inf_tag::lim_inf,  inf_tag::exists_w, inf_tag::forall_w};
            return tinf(swap[static_cast<int>(t->tag)], dual_family(t->fam), t->k);
        }
        case node::compose: return tcompose(dual_term(t->body), dual_family(t->fam));
        case node::odisj: {
            family neg;
            neg.block = {tnot(tvar(0))};
            return tnot(tcompose(t, std::move(neg)));
        }
    }
    throw structural_error("unknown term node");
}

// ---- named ω-ary functions --------------------------------------------------

namespace named_terms {

inline family rest() { return identity_family(1); }
inline term_ptr big_meet() { return tinf(inf_tag::big_meet, identity_family()); }
inline term_ptr big_join() { return tinf(inf_tag::big_join, identity_family()); }
inline term_ptr lim_inf() { return tinf(inf_tag::lim_inf, identity_family()); }
inline term_ptr lim_sup() { return tinf(inf_tag::lim_sup, identity_family()); }
inline term_ptr forall_w(int k) { return tinf(inf_tag::forall_w, identity_family(), k); }
inline term_ptr exists_w(int k) { return tinf(inf_tag::exists_w, identity_family(), k); }
// ⌈⋁⌉ and ⌊⋀⌋
inline term_ptr ceil_join() { return tfin(expr::op::and_n, {tvar(0), tinf(inf_tag::big_join, rest())}); }
inline term_ptr floor_meet() { return tfin(expr::op::or_n, {tvar(0), tinf(inf_tag::big_meet, rest())}); }
// β(⋀) = (x0 ∧ ⋁ rest) ∨ ⋀ rest, β(⋁) = (¬x0 ∧ ⋁ rest) ∨ ⋀ rest
inline term_ptr beta_meet() {
    return tfin(expr::op::or_n, {tfin(expr::op::and_n, {tvar(0), tinf(inf_tag::big_join, rest())}),
                                 tinf(inf_tag::big_meet, rest())});
}
inline term_ptr beta_join() {
    return tfin(expr::op::or_n, {tfin(expr::op::and_n, {tnot(tvar(0)), tinf(inf_tag::big_join, rest())}),
                                 tinf(inf_tag::big_meet, rest())});
}
// β(liminf) = (x0 ∧ limsup rest) ∨ liminf rest
inline term_ptr beta_liminf() {
    return tfin(expr::op::or_n, {tfin(expr::op::and_n, {tvar(0), tinf(inf_tag::lim_sup, rest())}),
                                 tinf(inf_tag::lim_inf, rest())});
}

}  // namespace named_terms

}  // namespace clonekit
