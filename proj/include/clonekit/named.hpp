#pragma once

#include <bit>
#include <string>

#include "truth_table.hpp"

namespace clonekit {

enum class fn_tag { projection, constant, negation, and_n, or_n, forall, exists, xor_n, ite, implies, not_implies };

// A named finitary function. Unused parameters are ignored by realize().
struct named_fn {
    fn_tag tag;
    int n = 1;  // arity of the realized table
    int k = 0;  // threshold for forall/exists
    int i = 0;  // projection index
    bool c = false;

    static named_fn projection(int i, int n) { return {fn_tag::projection, n, 0, i, false}; }
    static named_fn constant(bool c, int n) { return {fn_tag::constant, n, 0, 0, c}; }
    static named_fn negation() { return {fn_tag::negation, 1}; }
    static named_fn and_n(int n) { return {fn_tag::and_n, n}; }
    static named_fn or_n(int n) { return {fn_tag::or_n, n}; }
    static named_fn xor_n(int n) { return {fn_tag::xor_n, n}; }
    static named_fn forall(int k, int n) { return {fn_tag::forall, n, k}; }
    static named_fn exists(int k, int n) { return {fn_tag::exists, n, k}; }
    static named_fn ite() { return {fn_tag::ite, 3}; }
    static named_fn implies() { return {fn_tag::implies, 2}; }
    static named_fn not_implies() { return {fn_tag::not_implies, 2}; }

    truth_table realize() const {
        const auto zeros = [this](std::uint32_t r) { return n - std::popcount(r); };
        switch (tag) {
            case fn_tag::projection: return truth_table::projection(i, n);
            case fn_tag::constant: return truth_table::constant(c, n);
            case fn_tag::negation: return truth_table::from_word(1, 0b01);
            case fn_tag::and_n: return truth_table::from_function(n, [&](std::uint32_t r) { return zeros(r) == 0; });
            case fn_tag::or_n: return truth_table::from_function(n, [&](std::uint32_t r) { return r != 0; });
            case fn_tag::xor_n: return truth_table::from_function(n, [](std::uint32_t r) { return std::popcount(r) & 1; });
            // all but fewer than k inputs are true
            case fn_tag::forall: return truth_table::from_function(n, [&](std::uint32_t r) { return zeros(r) < k; });
            // at least k inputs are true
            case fn_tag::exists: return truth_table::from_function(n, [&](std::uint32_t r) { return std::popcount(r) >= k; });
            case fn_tag::ite: return truth_table::from_word(3, 0b11011000);
            case fn_tag::implies: return truth_table::from_word(2, 0b1101);
            case fn_tag::not_implies: return truth_table::from_word(2, 0b0010);
        }
        throw structural_error("unknown function tag");
    }
};

}  // namespace clonekit
