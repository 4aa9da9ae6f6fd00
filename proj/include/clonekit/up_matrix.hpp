#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "upseq.hpp"

namespace clonekit {

// Finds the shortest eventually periodic description of a finite window v,
// with period at most max_period, that repeats at least three times inside
// the window. Returns nullopt when v shows no such pattern.
inline std::optional<upseq> fit_upseq(const bits& v, std::size_t max_period) {
    const std::size_t n = v.size();
    for (std::size_t start = 0; start < n; ++start)
        for (std::size_t p = 1; p <= max_period && start + 3 * p <= n; ++p) {
            bool ok = true;
            for (std::size_t i = start; i + p < n && ok; ++i) ok = v[i] == v[i + p];
            if (ok) return upseq(bits(v.begin(), v.begin() + start), bits(v.begin() + start, v.begin() + start + p));
        }
    return std::nullopt;
}

// An ω×ω bit matrix with ultimately periodic structure in both directions.
//
// Rows 0..p-1 are listed explicitly. After them come blocks q = 0, 1, ... of
// c rows each; row r of block q is
//     fill_r[0 .. offset + shift*q) ++ template_r,
// so each block slides its templates `shift` columns further right and fills
// the vacated columns from a second sequence. With no cycle rows the matrix
// has exactly p rows, which is how finite-arity relations are tested.
struct up_matrix {
    struct cycle_row {
        upseq templ;
        upseq fill = upseq::constant(false);
        bool operator==(const cycle_row&) const = default;
    };

    std::vector<upseq> row_prefix;
    std::vector<cycle_row> row_cycle;
    std::size_t shift = 0;
    std::size_t offset = 0;

    bool finite() const noexcept { return row_cycle.empty(); }
    std::size_t prefix_rows() const noexcept { return row_prefix.size(); }
    std::size_t block_rows() const noexcept { return row_cycle.size(); }

    upseq block_row(std::size_t q, std::size_t r) const {
        const auto& cr = row_cycle.at(r);
        return cr.templ.prepend(cr.fill.take(offset + shift * q));
    }

    upseq row(std::size_t i) const {
        if (i < row_prefix.size()) return row_prefix[i];
        if (finite()) throw structural_error("row index past the end of a finite matrix");
        const std::size_t k = i - row_prefix.size();
        return block_row(k / row_cycle.size(), k % row_cycle.size());
    }

    bool entry(std::size_t i, std::size_t j) const {
        if (i < row_prefix.size()) return row_prefix[i].at(j);
        const std::size_t k = i - row_prefix.size();
        const std::size_t q = k / row_cycle.size(), r = k % row_cycle.size();
        const auto& cr = row_cycle[r];
        const std::size_t w = offset + shift * q;
        return j < w ? cr.fill.at(j) : cr.templ.at(j - w);
    }

    // Column j as a sequence indexed by row. For a finite matrix the entries
    // past the last row read as 0 and carry no meaning.
    upseq column(std::size_t j) const {
        bits pre;
        for (const auto& r : row_prefix) pre.push_back(r.at(j));
        if (finite()) return upseq(pre, {0});
        const std::size_t c = row_cycle.size();
        bits cyc(c);
        if (shift == 0) {
            for (std::size_t r = 0; r < c; ++r) cyc[r] = entry(row_prefix.size() + r, j);
            return upseq(pre, cyc);
        }
        // Blocks whose template still covers column j, then the fill tail.
        const std::size_t blocks = j < offset ? 0 : (j - offset) / shift + 1;
        for (std::size_t q = 0; q < blocks; ++q)
            for (std::size_t r = 0; r < c; ++r) pre.push_back(row_cycle[r].templ.at(j - offset - shift * q));
        for (std::size_t r = 0; r < c; ++r) cyc[r] = row_cycle[r].fill.at(j);
        return upseq(pre, cyc);
    }

    // Number of leading columns that must be inspected to decide a
    // tail-insensitive property of every column. Past this point a column is
    // the column one super-period earlier with one more copy of a repeated
    // segment, and the relations used here are stable once that segment
    // occurs twice.
    std::size_t column_horizon() const {
        std::size_t a = 0, l = 1;
        auto see = [&](const upseq& s) {
            a = std::max(a, s.prefix_len());
            l = std::lcm(l, s.period());
        };
        for (const auto& r : row_prefix) see(r);
        for (const auto& cr : row_cycle) {
            see(cr.templ);
            see(cr.fill);
        }
        if (shift > 0) l = std::lcm(l, shift);
        return offset + a + 4 * l + 1;
    }

    void validate() const {
        if (row_prefix.empty() && row_cycle.empty()) throw structural_error("matrix has no rows");
    }

    bool operator==(const up_matrix&) const = default;
};

inline void to_json(nlohmann::json& j, const up_matrix& m) {
    j = nlohmann::json::object();
    j["row_prefix"] = m.row_prefix;
    auto cyc = nlohmann::json::array();
    for (const auto& cr : m.row_cycle) cyc.push_back({{"template", cr.templ}, {"fill", cr.fill}});
    j["row_cycle"] = cyc;
    j["shift"] = m.shift;
    j["offset"] = m.offset;
}

inline void from_json(const nlohmann::json& j, up_matrix& m) {
    m = up_matrix{};
    for (const auto& r : j.value("row_prefix", nlohmann::json::array())) m.row_prefix.push_back(r.get<upseq>());
    for (const auto& cr : j.value("row_cycle", nlohmann::json::array()))
        m.row_cycle.push_back({cr.at("template").get<upseq>(), cr.value("fill", nlohmann::json("(0)")).get<upseq>()});
    m.shift = j.value("shift", std::size_t{0});
    m.offset = j.value("offset", std::size_t{0});
    m.validate();
}

}  // namespace clonekit
