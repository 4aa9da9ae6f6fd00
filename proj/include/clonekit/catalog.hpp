#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clone.hpp"
#include "countable_relation.hpp"
#include "expr.hpp"
#include "omega_term.hpp"

namespace clonekit {

#ifdef CLONEKIT_DATA_DIR
inline constexpr const char* builtin_data_dir = CLONEKIT_DATA_DIR;
#else
inline constexpr const char* builtin_data_dir = "data";
#endif

// CLONEKIT_DATA_DIR in the environment, else the directory fixed at build time.
inline std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("CLONEKIT_DATA_DIR"); env && *env) return env;
    return builtin_data_dir;
}

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw usage_error("cannot open " + p.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw structural_error(p.string() + ": " + e.what());
    }
}

struct post_node {
    std::string name;
    std::string group;  // cube, series, meet, aff, dual
    std::string k;      // "2".."4" or "<w" for the series, empty otherwise
    std::vector<std::string> generator_literals;
    std::vector<truth_table> generators;
    std::vector<std::string> relation_names;
    std::vector<constraint> constraints;
    std::string citation;
    std::vector<std::string> aliases;
};

struct fiber_node {
    std::string name;
    std::vector<std::string> generator_literals;
    std::vector<term_ptr> generators;
    std::vector<countable_relation> relations;
    std::string note;
};

struct fiber_edge {
    std::string lower, upper;
    std::string separator_literal;
    term_ptr separator;
    countable_relation relation;
    up_matrix witness;
};

struct fiber {
    std::string id;
    std::string base;
    std::string citation;
    std::vector<fiber_node> nodes;
    std::vector<fiber_edge> edges;

    const fiber_node& node(const std::string& n) const {
        for (const auto& x : nodes)
            if (x.name == n) return x;
        throw usage_error("fiber " + id + " has no node '" + n + "'");
    }
};

struct open_interval {
    std::string fiber, base, lower, upper, question;
};

struct graph_node {
    std::string id;
    std::string citation;
    std::vector<std::string> generators;
    nlohmann::json attrs = nlohmann::json::object();
};

struct graph_edge {
    std::string lower, upper;
    nlohmann::json attrs = nlohmann::json::object();
};

// Nodes and covering edges of one region of the catalog, in catalog order.
struct graph_doc {
    std::string scope;
    std::vector<graph_node> nodes;
    std::vector<graph_edge> edges;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"scope", scope}, {"nodes", nlohmann::json::array()}, {"links", nlohmann::json::array()}};
        for (const auto& n : nodes) {
            nlohmann::json o = {{"id", n.id}, {"citation", n.citation}, {"generators", n.generators}};
            for (const auto& [k, v] : n.attrs.items()) o[k] = v;
            j["nodes"].push_back(o);
        }
        for (const auto& e : edges) {
            nlohmann::json o = {{"source", e.lower}, {"target", e.upper}};
            for (const auto& [k, v] : e.attrs.items()) o[k] = v;
            j["links"].push_back(o);
        }
        return j;
    }

    std::string to_dot() const {
        auto q = [](const std::string& s) {
            std::string o = "\"";
            for (char c : s) {
                if (c == '\n') {
                    o += "\\n";
                    continue;
                }
                if (c == '"' || c == '\\') o += '\\';
                o += c;
            }
            return o + "\"";
        };
        std::ostringstream out;
        out << "digraph " << q(scope) << " {\n  rankdir=BT;\n  node [shape=box];\n";
        for (const auto& n : nodes) {
            std::string gens;
            for (const auto& g : n.generators) gens += (gens.empty() ? "" : ", ") + g;
            out << "  " << q(n.id) << " [label=" << q(gens.empty() ? n.id : n.id + "\n" + gens)
                << ", tooltip=" << q(n.citation) << "];\n";
        }
        for (const auto& e : edges) {
            out << "  " << q(e.lower) << " -> " << q(e.upper);
            if (e.attrs.value("tower_limit", false)) out << " [style=dashed]";
            out << ";\n";
        }
        out << "}\n";
        return out.str();
    }
};

// ---- side tube -------------------------------------------------------------

using index_pair = std::pair<int, int>;  // (k, t) with t <= k

// {(k', t') : t' <= k' <= k}, ordered by k' then t'.
inline std::vector<index_pair> side_tube_indices(int k) {
    std::vector<index_pair> out;
    for (int a = 1; a <= k; ++a)
        for (int t = 0; t <= a; ++t) out.emplace_back(a, t);
    return out;
}

// The coordinatewise downward-closed subsets of side_tube_indices(k) that
// contain (k, 0), each as a membership mask over that index list.
inline std::vector<std::vector<bool>> side_tube_downsets(int k) {
    if (k < 1 || k > 6) throw usage_error("side tube supports 1 <= k <= 6");
    const auto P = side_tube_indices(k);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < P.size(); ++i)
        if (P[i].second > 0) free.push_back(i);
    std::vector<std::vector<bool>> out;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << free.size()); ++m) {
        std::vector<bool> in(P.size());
        for (std::size_t i = 0; i < P.size(); ++i) in[i] = P[i].second == 0;
        for (std::size_t b = 0; b < free.size(); ++b) in[free[b]] = (m >> b) & 1u;
        bool closed = true;
        for (std::size_t i = 0; i < P.size() && closed; ++i)
            for (std::size_t j = 0; j < P.size() && closed; ++j)
                if (in[i] && P[j].first <= P[i].first && P[j].second <= P[i].second && !in[j]) closed = false;
        if (closed) out.push_back(in);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        const auto ca = std::count(a.begin(), a.end(), true), cb = std::count(b.begin(), b.end(), true);
        return ca != cb ? ca < cb : a > b;
    });
    return out;
}

// Name of the intersection clone of a downset: its maximal indices.
inline std::string side_tube_name(int k, const std::vector<bool>& in) {
    const auto P = side_tube_indices(k);
    std::string s;
    for (std::size_t i = 0; i < P.size(); ++i) {
        if (!in[i]) continue;
        bool maximal = true;
        for (std::size_t j = 0; j < P.size(); ++j)
            if (j != i && in[j] && P[i].first <= P[j].first && P[i].second <= P[j].second) maximal = false;
        if (maximal) s += "Lim0(" + std::to_string(P[i].first) + "," + std::to_string(P[i].second) + ")";
    }
    return s;
}

// ---- catalog ---------------------------------------------------------------

class catalog {
public:
    static catalog load(const std::filesystem::path& dir = default_data_dir()) {
        catalog c;
        c.load_post(read_json_file(dir / "catalog.json"));
        c.load_fibers(read_json_file(dir / "fibers.json"));
        c.check();
        return c;
    }

    const std::vector<post_node>& nodes() const noexcept { return nodes_; }
    const std::vector<fiber>& fibers() const noexcept { return fibers_; }
    const std::vector<open_interval>& open_intervals() const noexcept { return opens_; }

    std::optional<std::size_t> find(const std::string& name) const {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].name == name) return i;
            for (const auto& a : nodes_[i].aliases)
                if (a == name) return i;
        }
        return std::nullopt;
    }

    const post_node& node(const std::string& name) const {
        auto i = find(name);
        if (!i) throw usage_error("unknown catalog node '" + name + "'");
        return nodes_[*i];
    }

    const fiber& fiber_by_id(const std::string& id) const {
        for (const auto& f : fibers_)
            if (f.id == id || f.base == id) return f;
        throw usage_error("unknown fiber '" + id + "'");
    }

    // f lies in the node's clone: every defining condition holds.
    bool contains(const post_node& n, const truth_table& f) const {
        for (std::size_t i = 0; i < n.constraints.size(); ++i)
            if (!satisfies(n.constraints[i], f)) return false;
        return true;
    }

    // A ⊆ B, decided by testing A's generators against B's conditions.
    bool includes(std::size_t a, std::size_t b) const { return sub_[a][b]; }

    // Covering pairs (lower, upper) of the inclusion order.
    const std::vector<std::pair<std::size_t, std::size_t>>& covers() const noexcept { return covers_; }

    bool tower_limit(std::size_t lower, std::size_t upper) const {
        return nodes_[lower].k == "<w" && !nodes_[upper].k.empty() && nodes_[upper].k != "<w";
    }

    // The least catalog clone containing f.
    const post_node& classify(const truth_table& f) const {
        std::vector<std::size_t> in;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (contains(nodes_[i], f)) in.push_back(i);
        return nodes_[least(in, "classify")];
    }

    struct identification {
        const post_node* node = nullptr;
        std::string generated_fingerprint;
        std::string node_fingerprint;
    };

    // The catalog clone whose slice at `cap` equals that of <gens>; towers
    // that agree at the cap are told apart by testing the generators.
    identification identify_clone(const std::vector<truth_table>& gens, int cap) const {
        if (cap < 1 || cap > 4) throw usage_error("identify_clone needs 1 <= cap <= 4");
        const auto s = close(gens, cap);
        if (!s.complete()) throw resource_error("closure budget exhausted before the cap");
        std::vector<std::size_t> match;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            bool all = true;
            for (const auto& g : gens) all = all && contains(nodes_[i], g);
            if (all && pol(i, cap).same_restriction(s)) match.push_back(i);
        }
        if (match.empty())
            throw structural_error("no catalog clone matches the generated slice " + s.fingerprint() + " at cap " +
                                   std::to_string(cap));
        const std::size_t i = least(match, "identify_clone");
        return {&nodes_[i], s.fingerprint(), pol(i, cap).fingerprint()};
    }

    // The slice of functions satisfying the node's conditions, cached.
    const clone_slice& pol(std::size_t i, int cap) const {
        std::lock_guard lock(*pol_mutex_);
        auto key = std::make_pair(i, cap);
        auto it = pol_cache_.find(key);
        if (it != pol_cache_.end()) return it->second;
        std::vector<truth_table> members;
        for (int n = 1; n <= cap; ++n)
            for (const auto& f : all_tables(n))
                if (contains(nodes_[i], f)) members.push_back(f);
        std::vector<std::vector<truth_table>> strata(cap);
        for (auto& f : members) strata[f.arity() - 1].push_back(f);
        for (auto& st : strata) std::sort(st.begin(), st.end());
        return pol_cache_.emplace(key, clone_slice::from_strata(cap, std::move(strata))).first->second;
    }

    graph_doc lattice_graph(const std::string& scope) const {
        graph_doc g;
        g.scope = scope;
        if (scope == "fig1") {
            for (const auto& n : nodes_) {
                graph_node gn{n.name, n.citation, n.generator_literals};
                gn.attrs["group"] = n.group;
                if (!n.k.empty()) gn.attrs["k"] = n.k;
                gn.attrs["relations"] = n.relation_names;
                g.nodes.push_back(gn);
            }
            for (auto [lo, up] : covers_) {
                graph_edge e{nodes_[lo].name, nodes_[up].name};
                if (tower_limit(lo, up)) e.attrs["tower_limit"] = true;
                g.edges.push_back(e);
            }
            return g;
        }
        if (scope.rfind("fiber:", 0) == 0) {
            const auto& f = fiber_by_id(scope.substr(6));
            for (const auto& n : f.nodes) {
                graph_node gn{n.name, f.citation, n.generator_literals};
                std::vector<std::string> rels;
                for (const auto& r : n.relations) rels.push_back(r.name());
                gn.attrs["relations"] = rels;
                if (!n.note.empty()) gn.attrs["note"] = n.note;
                g.nodes.push_back(gn);
            }
            for (const auto& e : f.edges) {
                graph_edge ge{e.lower, e.upper};
                ge.attrs["separator"] = e.separator_literal;
                ge.attrs["relation"] = e.relation.name();
                g.edges.push_back(ge);
            }
            return g;
        }
        if (scope.rfind("side_tube:", 0) == 0) {
            int k = 0;
            try {
                k = std::stoi(scope.substr(10));
            } catch (const std::exception&) {
                throw usage_error("side_tube scope needs an integer k");
            }
            const auto P = side_tube_indices(k);
            const auto D = side_tube_downsets(k);
            for (const auto& d : D) {
                graph_node gn{side_tube_name(k, d), "intersection of the Lim0(k,t) clones indexed by a downward-closed set",
                              {}};
                nlohmann::json idx = nlohmann::json::array();
                for (std::size_t i = 0; i < P.size(); ++i)
                    if (d[i]) idx.push_back({P[i].first, P[i].second});
                gn.attrs["indices"] = idx;
                gn.attrs["base"] = "T0(" + std::to_string(k) + ")";
                g.nodes.push_back(gn);
            }
            // A larger index set is a smaller clone; cover = one index more.
            for (std::size_t a = 0; a < D.size(); ++a)
                for (std::size_t b = 0; b < D.size(); ++b) {
                    std::size_t extra = 0;
                    bool sub = true;
                    for (std::size_t i = 0; i < P.size(); ++i) {
                        if (D[b][i] && !D[a][i]) sub = false;
                        if (D[a][i] && !D[b][i]) ++extra;
                    }
                    if (sub && extra == 1) g.edges.push_back({g.nodes[a].id, g.nodes[b].id});
                }
            return g;
        }
        throw usage_error("unknown lattice scope '" + scope + "' (expected fig1, fiber:<id> or side_tube:<k>)");
    }

    struct edge_check {
        std::string lower, upper;
        bool ok = true;
        std::vector<std::string> membership;  // one line per generator of the lower node
        std::string separation;
    };

    // Re-verifies one covering edge generator by generator.
    edge_check verify_edge(std::size_t lo, std::size_t up) const {
        const auto& A = nodes_[lo];
        const auto& B = nodes_[up];
        edge_check out;
        out.lower = A.name;
        out.upper = B.name;
        for (std::size_t i = 0; i < A.generators.size(); ++i) {
            const auto& g = A.generators[i];
            if (g.arity() <= 3) {
                member_options opt;
                for (const auto& l : B.generator_literals) opt.gen_terms.push_back(parse_literal(l).term);
                const auto r = member(g, B.generators, opt);
                const bool yes = r.v == member_result::verdict::yes && r.term && evaluate(*r.term, g.arity()) == g;
                out.ok = out.ok && yes;
                out.membership.push_back(A.generator_literals[i] + " yes " +
                                         (yes ? to_literal(*r.term, g.arity()) : "FAILED (" + to_string(r.v) + ")"));
            } else {
                const bool yes = contains(B, g);
                out.ok = out.ok && yes;
                out.membership.push_back(A.generator_literals[i] + (yes ? " yes by the defining conditions of " + B.name
                                                                        : " FAILED"));
            }
        }
        for (std::size_t i = 0; i < B.generators.size() && out.separation.empty(); ++i)
            for (std::size_t c = 0; c < A.constraints.size(); ++c)
                if (!satisfies(A.constraints[c], B.generators[i])) {
                    out.separation = B.generator_literals[i] + " no, violates " + A.constraints[c].name;
                    break;
                }
        if (out.separation.empty()) {
            out.ok = false;
            out.separation = "FAILED: no generator of " + B.name + " violates a condition of " + A.name;
        }
        return out;
    }

    // Whether f satisfies a condition, with the essentially-unary test used
    // for the U3 relation at any arity.
    bool satisfies(const constraint& c, const truth_table& f) const {
        if (c.k == constraint::kind::relation && c.name == "U3") return essential_variables(f).size() <= 1;
        return c.satisfied(f);
    }

    // The defining condition named in catalog data.
    constraint constraint_for(const std::string& name) const {
        if (name == "BoundedByVar") return constraint::below_var();
        if (name == "BoundsVar") return constraint::above_var();
        if (auto it = extra_relations_.find(name); it != extra_relations_.end()) return constraint::of(it->second, name);
        const auto r = countable_relation::parse(name);
        if (!r.is_finite()) throw structural_error("Post node relation '" + name + "' is not finitary");
        return constraint::of(*r.fin);
    }

private:
    std::size_t least(const std::vector<std::size_t>& in, const char* what) const {
        std::vector<std::size_t> minimal;
        for (auto i : in) {
            bool lower_exists = false;
            for (auto j : in)
                if (j != i && sub_[j][i]) lower_exists = true;
            if (!lower_exists) minimal.push_back(i);
        }
        if (minimal.size() != 1) throw structural_error(std::string(what) + ": no unique least catalog clone");
        return minimal[0];
    }


    void load_post(const nlohmann::json& j) {
        const auto rels = j.value("relations", nlohmann::json::object());
        for (const auto& [name, r] : rels.items())
            extra_relations_.emplace(name, finite_relation::from_strings(r.at("arity").get<int>(),
                                                                        r.at("tuples").get<std::vector<std::string>>()));
        for (const auto& jn : j.at("post_nodes")) {
            post_node n;
            n.name = jn.at("name").get<std::string>();
            n.group = jn.at("group").get<std::string>();
            if (jn.contains("k")) n.k = jn["k"].is_string() ? jn["k"].get<std::string>() : std::to_string(jn["k"].get<int>());
            n.generator_literals = jn.at("generators").get<std::vector<std::string>>();
            for (const auto& l : n.generator_literals) n.generators.push_back(parse_function(l));
            n.relation_names = jn.at("relations").get<std::vector<std::string>>();
            for (const auto& r : n.relation_names) n.constraints.push_back(constraint_for(r));
            n.citation = jn.at("citation").get<std::string>();
            n.aliases = jn.value("aliases", std::vector<std::string>{});
            nodes_.push_back(std::move(n));
        }
        const auto opens = j.value("open_intervals", nlohmann::json::array());
        for (const auto& o : opens)
            opens_.push_back({o.at("fiber"), o.at("base"), o.at("lower"), o.at("upper"), o.at("question")});
    }

    void load_fibers(const nlohmann::json& j) {
        for (const auto& jf : j.at("fibers")) {
            fiber f;
            f.id = jf.at("id").get<std::string>();
            f.base = jf.at("base").get<std::string>();
            f.citation = jf.at("citation").get<std::string>();
            for (const auto& jn : jf.at("nodes")) {
                fiber_node n;
                n.name = jn.at("name").get<std::string>();
                n.generator_literals = jn.at("generators").get<std::vector<std::string>>();
                for (const auto& l : n.generator_literals) n.generators.push_back(parse_omega_term(l));
                for (const auto& r : jn.at("relations")) n.relations.push_back(r.get<countable_relation>());
                n.note = jn.value("note", "");
                f.nodes.push_back(std::move(n));
            }
            for (const auto& je : jf.at("edges")) {
                fiber_edge e;
                e.lower = je.at("lower").get<std::string>();
                e.upper = je.at("upper").get<std::string>();
                e.separator_literal = je.at("separator").get<std::string>();
                e.separator = parse_omega_term(e.separator_literal);
                e.relation = je.at("relation").get<countable_relation>();
                e.witness = je.at("witness").get<up_matrix>();
                f.node(e.lower);
                f.node(e.upper);
                f.edges.push_back(std::move(e));
            }
            fibers_.push_back(std::move(f));
        }
    }

    // Load-time soundness and distinctness, then the inclusion order.
    void check() {
        for (const auto& n : nodes_)
            for (std::size_t g = 0; g < n.generators.size(); ++g)
                for (const auto& c : n.constraints)
                    if (!satisfies(c, n.generators[g]))
                        throw structural_error("catalog node " + n.name + ": generator " + n.generator_literals[g] +
                                               " violates " + c.name);
        const std::size_t N = nodes_.size();
        sub_.assign(N, std::vector<bool>(N, false));
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) {
                bool all = true;
                for (const auto& g : nodes_[a].generators) all = all && contains(nodes_[b], g);
                sub_[a][b] = all;
            }
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = a + 1; b < N; ++b)
                if (sub_[a][b] && sub_[b][a])
                    throw structural_error("catalog nodes " + nodes_[a].name + " and " + nodes_[b].name +
                                           " have the same membership profile");
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) {
                if (a == b || !sub_[a][b]) continue;
                bool cover = true;
                for (std::size_t m = 0; m < N && cover; ++m)
                    if (m != a && m != b && sub_[a][m] && sub_[m][b]) cover = false;
                if (cover) covers_.emplace_back(a, b);
            }
    }

    std::vector<post_node> nodes_;
    std::vector<fiber> fibers_;
    std::vector<open_interval> opens_;
    std::map<std::string, finite_relation> extra_relations_;
    std::vector<std::vector<bool>> sub_;
    std::vector<std::pair<std::size_t, std::size_t>> covers_;
    mutable std::map<std::pair<std::size_t, int>, clone_slice> pol_cache_;
    std::shared_ptr<std::mutex> pol_mutex_ = std::make_shared<std::mutex>();
};

}  // namespace clonekit
