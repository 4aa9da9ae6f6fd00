#pragma once

#include <bit>
#include <cctype>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "named.hpp"
#include "truth_table.hpp"

namespace clonekit {

// Character cursor shared by the finitary and ω-term parsers.
class cursor {
public:
    explicit cursor(std::string_view s) : s_(s) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    std::string ident() {
        skip_ws();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        return std::string(s_.substr(b, pos_ - b));
    }
    // True when the next non-space character is a digit.
    bool starts_digit() {
        skip_ws();
        return pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]));
    }
    int number() {
        skip_ws();
        const std::size_t b = pos_;
        long v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + (s_[pos_] - '0');
            if (v > 1'000'000) fail("number too large");
            ++pos_;
        }
        if (pos_ == b) fail("expected a number");
        return static_cast<int>(v);
    }
    std::string hex_word() {
        skip_ws();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && std::isxdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == b) fail("expected hex digits");
        return std::string(s_.substr(b, pos_ - b));
    }
    std::string bits() {
        skip_ws();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && (s_[pos_] == '0' || s_[pos_] == '1')) ++pos_;
        return std::string(s_.substr(b, pos_ - b));
    }
    std::size_t pos() const { return pos_; }
    void set_pos(std::size_t p) { pos_ = p; }
    [[noreturn]] void fail(const std::string& what) const { throw parse_error(what, pos_); }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

// Finitary term over variables x0, x1, ...
struct expr {
    enum class op { var, constant, negation, and_n, or_n, xor_n, ite, imp, nimp, forall, exists, table };

    op kind = op::var;
    int value = 0;  // variable index, constant bit or threshold
    std::shared_ptr<const truth_table> tab;
    std::vector<expr> args;

    static expr var(int i) { return {op::var, i, nullptr, {}}; }
    static expr constant(bool c) { return {op::constant, c ? 1 : 0, nullptr, {}}; }
    static expr apply(op k, std::vector<expr> a, int v = 0) { return {k, v, nullptr, std::move(a)}; }
    static expr table(truth_table t, std::vector<expr> a) {
        return {op::table, 0, std::make_shared<const truth_table>(std::move(t)), std::move(a)};
    }

    // One more than the largest variable index; 0 for closed terms.
    int var_bound() const {
        int m = kind == op::var ? value + 1 : 0;
        for (const auto& a : args) m = std::max(m, a.var_bound());
        return m;
    }
};

namespace detail {

inline truth_table eval_rows(int n, const std::vector<truth_table>& parts, const std::function<bool(std::uint32_t)>& g) {
    return truth_table::from_function(n, [&](std::uint32_t r) {
        std::uint32_t idx = 0;
        for (std::size_t i = 0; i < parts.size(); ++i) idx |= static_cast<std::uint32_t>(parts[i].bit(r)) << i;
        return g(idx);
    });
}

}  // namespace detail

inline truth_table evaluate(const expr& e, int n) {
    using op = expr::op;
    switch (e.kind) {
        case op::var:
            if (e.value >= n)
                throw arity_error("variable x" + std::to_string(e.value) + " exceeds arity " + std::to_string(n));
            return truth_table::projection(e.value, n);
        case op::constant: return truth_table::constant(e.value != 0, n);
        default: break;
    }
    std::vector<truth_table> parts;
    parts.reserve(e.args.size());
    for (const auto& a : e.args) parts.push_back(evaluate(a, n));
    const int m = static_cast<int>(parts.size());
    auto fold = [&](auto f, truth_table init) {
        for (const auto& p : parts) init = f(init, p);
        return init;
    };
    switch (e.kind) {
        case op::negation: return ~parts.at(0);
        case op::and_n: return fold([](const auto& a, const auto& b) { return a & b; }, truth_table::constant(true, n));
        case op::or_n: return fold([](const auto& a, const auto& b) { return a | b; }, truth_table::constant(false, n));
        case op::xor_n: return fold([](const auto& a, const auto& b) { return a ^ b; }, truth_table::constant(false, n));
        case op::ite: return (parts[0] & parts[1]) | (~parts[0] & parts[2]);
        case op::imp: return ~parts[0] | parts[1];
        case op::nimp: return parts[0] & ~parts[1];
        case op::forall:
            return detail::eval_rows(n, parts, [&](std::uint32_t idx) { return m - std::popcount(idx) < e.value; });
        case op::exists:
            return detail::eval_rows(n, parts, [&](std::uint32_t idx) { return std::popcount(idx) >= e.value; });
        case op::table:
            if (e.tab->arity() != m) throw arity_error("table() applied to the wrong number of arguments");
            return detail::eval_rows(n, parts, [&](std::uint32_t idx) { return e.tab->bit(idx); });
        default: break;
    }
    throw structural_error("unknown expression node");
}

inline std::string to_string(const expr& e) {
    using op = expr::op;
    auto join = [&](std::size_t from = 0) {
        std::string s;
        for (std::size_t i = from; i < e.args.size(); ++i) {
            if (i > from) s += ",";
            s += to_string(e.args[i]);
        }
        return s;
    };
    switch (e.kind) {
        case op::var: return "x" + std::to_string(e.value);
        case op::constant: return e.value ? "1" : "0";
        case op::negation: return "not(" + join() + ")";
        case op::and_n: return "and(" + join() + ")";
        case op::or_n: return "or(" + join() + ")";
        case op::xor_n: return "xor(" + join() + ")";
        case op::ite: return "ite(" + join() + ")";
        case op::imp: return "imp(" + join() + ")";
        case op::nimp: return "nimp(" + join() + ")";
        case op::forall: return "forall(" + std::to_string(e.value) + ";" + join() + ")";
        case op::exists: return "exists(" + std::to_string(e.value) + ";" + join() + ")";
        case op::table: return "table(" + e.tab->to_hex() + ";" + join() + ")";
    }
    return "?";
}

// Replaces x_i by args[i].
inline expr substitute(const expr& e, const std::vector<expr>& args) {
    if (e.kind == expr::op::var) {
        if (e.value >= static_cast<int>(args.size())) throw arity_error("substitute: missing argument");
        return args[e.value];
    }
    expr out = e;
    for (auto& a : out.args) a = substitute(a, args);
    return out;
}

namespace detail {

inline expr parse_expr(cursor& c);

inline std::vector<expr> parse_args(cursor& c) {
    std::vector<expr> out;
    if (c.peek() == ')') return out;
    do out.push_back(parse_expr(c));
    while (c.accept(','));
    return out;
}

inline expr parse_expr(cursor& c) {
    using op = expr::op;
    const std::size_t start = c.pos();
    if (c.starts_digit()) {
        const int v = c.number();
        if (v > 1) {
            c.set_pos(start);
            c.fail("constants are 0 or 1");
        }
        return expr::constant(v == 1);
    }
    const std::string name = c.ident();
    if (name.empty()) c.fail("expected a term");
    if (name == "x") {
        if (!c.starts_digit()) c.fail("expected a variable index");
        return expr::var(c.number());
    }
    static const std::pair<const char*, op> plain[] = {{"not", op::negation}, {"and", op::and_n}, {"or", op::or_n},
                                                       {"xor", op::xor_n},    {"ite", op::ite},   {"imp", op::imp},
                                                       {"nimp", op::nimp}};
    for (const auto& [word, k] : plain) {
        if (name != word) continue;
        c.expect('(');
        auto args = parse_args(c);
        c.expect(')');
        const std::size_t need = k == op::negation ? 1 : k == op::ite ? 3 : (k == op::imp || k == op::nimp) ? 2 : 0;
        if (need && args.size() != need) {
            c.set_pos(start);
            c.fail(name + " takes " + std::to_string(need) + " arguments");
        }
        if (!need && args.empty()) {
            c.set_pos(start);
            c.fail(name + " needs at least one argument");
        }
        return expr::apply(k, std::move(args));
    }
    if (name == "forall" || name == "exists") {
        c.expect('(');
        const int k = c.number();
        c.expect(';');
        auto args = parse_args(c);
        c.expect(')');
        if (args.empty()) c.fail(name + " needs at least one argument");
        return expr::apply(name == "forall" ? op::forall : op::exists, std::move(args), k);
    }
    if (name == "table") {
        c.expect('(');
        const std::string hex = c.hex_word();
        c.expect(';');
        auto args = parse_args(c);
        c.expect(')');
        if (args.empty() || args.size() > static_cast<std::size_t>(max_fin_arity)) c.fail("table() needs 1..16 arguments");
        auto t = truth_table::from_hex(static_cast<int>(args.size()), hex);
        return expr::table(std::move(t), std::move(args));
    }
    c.set_pos(start);
    c.fail("unknown connective '" + name + "'");
}

}  // namespace detail

struct literal {
    expr term;
    int arity;
};

// "e@n"; without the annotation the arity is inferred as the variable bound (at least 1).
inline literal parse_literal(std::string_view s) {
    cursor c(s);
    expr e = detail::parse_expr(c);
    int n = std::max(1, e.var_bound());
    if (c.accept('@')) {
        const std::size_t at = c.pos();
        n = c.number();
        if (n < 1) c.fail("arity must be >= 1");
        if (n > max_fin_arity) c.fail("arity exceeds " + std::to_string(max_fin_arity));
        if (e.var_bound() > n) {
            c.set_pos(at);
            c.fail("term uses variables beyond the declared arity");
        }
    }
    if (!c.at_end()) c.fail("trailing input");
    return {std::move(e), n};
}

inline truth_table parse_function(std::string_view s) {
    auto lit = parse_literal(s);
    return evaluate(lit.term, lit.arity);
}

inline std::string to_literal(const expr& e, int arity) { return to_string(e) + "@" + std::to_string(arity); }

// A short name-based term for f when one exists, otherwise a table() application.
inline expr describe(const truth_table& f) {
    using op = expr::op;
    const int n = f.arity();
    std::vector<expr> vars;
    for (int i = 0; i < n; ++i) vars.push_back(expr::var(i));
    for (bool c : {false, true})
        if (f.is_constant(c)) return expr::constant(c);
    for (int i = 0; i < n; ++i) {
        const auto p = truth_table::projection(i, n);
        if (f == p) return expr::var(i);
        if (f == ~p) return expr::apply(op::negation, {expr::var(i)});
    }
    if (n >= 2) {
        if (f == named_fn::and_n(n).realize()) return expr::apply(op::and_n, vars);
        if (f == named_fn::or_n(n).realize()) return expr::apply(op::or_n, vars);
        if (f == named_fn::xor_n(n).realize()) return expr::apply(op::xor_n, vars);
        if (f == ~named_fn::xor_n(n).realize())
            return expr::apply(op::negation, {expr::apply(op::xor_n, vars)});
        if (f == ~named_fn::and_n(n).realize())
            return expr::apply(op::negation, {expr::apply(op::and_n, vars)});
        if (f == ~named_fn::or_n(n).realize())
            return expr::apply(op::negation, {expr::apply(op::or_n, vars)});
        for (int k = 2; k < n; ++k)
            if (f == named_fn::forall(k, n).realize()) return expr::apply(op::forall, vars, k);
    }
    if (n == 2) {
        if (f == named_fn::implies().realize()) return expr::apply(op::imp, vars);
        if (f == named_fn::not_implies().realize()) return expr::apply(op::nimp, vars);
    }
    if (n == 3 && f == named_fn::ite().realize()) return expr::apply(op::ite, vars);
    return expr::table(f, vars);
}

}  // namespace clonekit
