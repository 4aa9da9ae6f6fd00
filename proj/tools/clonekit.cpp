#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clonekit/catalog.hpp"
#include "clonekit/witnesses.hpp"

namespace {

using namespace clonekit;
using nlohmann::json;

enum exit_code { ok = 0, check_failed = 1, usage = 2, resource = 3 };

// Settings resolved as flags > CLONEKIT_* environment > config file > defaults.
struct settings {
    std::uint64_t seed = 7;
    int cap = 3;
    std::uint64_t budget = default_close_budget;
    std::size_t samples = 200;
    std::string data_dir;
    bool json_out = false;
    bool dot_out = false;
    std::string out;
};

struct flags {
    std::optional<std::uint64_t> seed, budget;
    std::optional<int> cap;
    std::optional<std::size_t> samples;
    std::optional<std::string> data_dir, config;
};

std::string slurp(std::istream& in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

// "-" reads standard input, "@path" reads a file, anything else is literal.
std::string read_arg(const std::string& a) {
    if (a == "-") return slurp(std::cin);
    if (!a.empty() && a[0] == '@') {
        std::ifstream in(a.substr(1));
        if (!in) throw usage_error("cannot open " + a.substr(1));
        return slurp(in);
    }
    return a;
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

template <class T>
std::optional<T> env_number(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    try {
        std::size_t used = 0;
        const auto x = std::stoull(v, &used);
        if (used != std::string(v).size()) throw std::invalid_argument(v);
        return static_cast<T>(x);
    } catch (const std::exception&) {
        throw usage_error(std::string("environment variable ") + name + " is not a number");
    }
}

settings resolve(const flags& f, settings s) {
    std::string config;
    if (f.config) config = *f.config;
    else if (const char* c = std::getenv("CLONEKIT_CONFIG"); c && *c) config = c;
    if (!config.empty()) {
        const json j = read_json_file(config);
        if (!j.is_object()) throw usage_error("config file must hold a JSON object");
        for (const auto& [k, v] : j.items()) {
            if (k == "seed") s.seed = v.get<std::uint64_t>();
            else if (k == "cap") s.cap = v.get<int>();
            else if (k == "budget") s.budget = v.get<std::uint64_t>();
            else if (k == "samples") s.samples = v.get<std::size_t>();
            else if (k == "data_dir") s.data_dir = v.get<std::string>();
            else throw usage_error("unknown config key '" + k + "'");
        }
    }
    if (auto v = env_number<std::uint64_t>("CLONEKIT_SEED")) s.seed = *v;
    if (auto v = env_number<int>("CLONEKIT_CAP")) s.cap = *v;
    if (auto v = env_number<std::uint64_t>("CLONEKIT_BUDGET")) s.budget = *v;
    if (auto v = env_number<std::size_t>("CLONEKIT_SAMPLES")) s.samples = *v;
    if (const char* d = std::getenv("CLONEKIT_DATA_DIR"); d && *d) s.data_dir = d;
    if (f.seed) s.seed = *f.seed;
    if (f.cap) s.cap = *f.cap;
    if (f.budget) s.budget = *f.budget;
    if (f.samples) s.samples = *f.samples;
    if (f.data_dir) s.data_dir = *f.data_dir;
    if (s.data_dir.empty()) s.data_dir = builtin_data_dir;
    return s;
}

search_bounds bounds(const settings& s) {
    search_bounds b;
    b.seed = s.seed;
    b.samples = s.samples;
    return b;
}

void emit(const settings& s, const std::string& text) {
    if (s.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream o(s.out);
    if (!o) throw usage_error("cannot write " + s.out);
    o << text;
}

void emit_json(const settings& s, const json& j) { emit(s, j.dump(2) + "\n"); }

std::string hex_literal(const truth_table& f) { return to_literal(describe(f), f.arity()); }

// Every named condition used by the catalog, in first-use order.
std::vector<std::string> profile_columns(const catalog& cat) {
    std::vector<std::string> cols;
    for (const auto& n : cat.nodes())
        for (const auto& r : n.relation_names)
            if (std::find(cols.begin(), cols.end(), r) == cols.end()) cols.push_back(r);
    return cols;
}

int cmd_classify(const settings& s, const std::string& lit) {
    const auto cat = catalog::load(s.data_dir);
    const auto f = parse_function(trim(read_arg(lit)));
    const auto& n = cat.classify(f);
    json profile = json::object();
    std::ostringstream t;
    t << "clone: " << n.name << "\n";
    t << "citation: " << n.citation << "\n";
    t << "generators:";
    for (const auto& g : n.generator_literals) t << " " << g;
    t << "\nprofile:\n";
    for (const auto& c : profile_columns(cat)) {
        const bool in = cat.satisfies(cat.constraint_for(c), f);
        profile[c] = in;
        t << "  " << c << std::string(c.size() < 24 ? 24 - c.size() : 1, ' ') << (in ? "yes" : "no") << "\n";
    }
    if (s.json_out)
        emit_json(s, {{"input", hex_literal(f)}, {"arity", f.arity()}, {"clone", n.name}, {"citation", n.citation},
                      {"generators", n.generator_literals}, {"profile", profile}});
    else emit(s, t.str());
    return ok;
}

std::vector<truth_table> parse_functions(const std::vector<std::string>& lits) {
    std::vector<truth_table> out;
    for (const auto& l : lits) out.push_back(parse_function(trim(read_arg(l))));
    return out;
}

std::string sizes(const clone_slice& c) {
    std::string out;
    for (int n = 1; n <= c.arity_cap(); ++n) out += (n > 1 ? " " : "") + std::to_string(c.stratum(n).size());
    return out;
}

int cmd_closure(const settings& s, const std::vector<std::string>& lits) {
    const auto gens = parse_functions(lits);
    if (s.cap < 1 || s.cap > max_close_cap) throw usage_error("--cap must be between 1 and " + std::to_string(max_close_cap));
    const auto c = close(gens, s.cap, s.budget);
    if (!c.complete()) throw resource_error("closure budget exhausted before arity " + std::to_string(s.cap));
    std::optional<std::string> clone;
    if (s.cap <= 4) {
        const auto cat = catalog::load(s.data_dir);
        try {
            clone = cat.identify_clone(gens, s.cap).node->name;
        } catch (const structural_error&) {
        }
    }
    if (s.json_out) {
        json j = c.to_json();
        j["fingerprint"] = c.fingerprint();
        j["clone"] = clone ? json(*clone) : json(nullptr);
        emit_json(s, j);
    } else {
        emit(s, "stratum sizes: " + sizes(c) + "\nfingerprint: " + c.fingerprint() + "\nclone: " + clone.value_or("(none)") + "\n");
    }
    return ok;
}

int cmd_member(const settings& s, const std::string& f_lit, const std::vector<std::string>& g_lits) {
    const auto f = parse_function(trim(read_arg(f_lit)));
    const auto gens = parse_functions(g_lits);
    member_options opt;
    opt.budget = s.budget;
    for (const auto& g : g_lits) opt.gen_terms.push_back(parse_literal(trim(read_arg(g))).term);
    const auto r = member(f, gens, opt);
    json j = {{"query", hex_literal(f)}, {"verdict", to_string(r.v)}};
    std::string text = to_string(r.v) + "\n";
    if (r.term) {
        j["term"] = to_literal(*r.term, f.arity());
        text += "term: " + j["term"].get<std::string>() + "\n";
    }
    if (r.rel) {
        j["relation"] = r.rel_name;
        j["relation_tuples"] = *r.rel;
        text += "separating relation: " + r.rel_name + "\n";
    }
    if (s.json_out) emit_json(s, j);
    else emit(s, text);
    return r.v == member_result::verdict::unknown ? resource : ok;
}

int cmd_pol(const settings& s, const std::vector<std::string>& names) {
    const auto cat = catalog::load(s.data_dir);
    if (s.cap < 1 || s.cap > 4) throw usage_error("--cap must be between 1 and 4");
    std::vector<constraint> cs;
    for (const auto& n : names) {
        if (auto i = cat.find(n)) {
            cs.insert(cs.end(), cat.nodes()[*i].constraints.begin(), cat.nodes()[*i].constraints.end());
            continue;
        }
        cs.push_back(cat.constraint_for(n));
    }
    std::vector<std::vector<truth_table>> strata(static_cast<std::size_t>(s.cap));
    for (int n = 1; n <= s.cap; ++n)
        for (const auto& f : all_tables(n)) {
            bool in = true;
            for (const auto& c : cs) in = in && cat.satisfies(c, f);
            if (in) strata[static_cast<std::size_t>(n - 1)].push_back(f);
        }
    const auto p = clone_slice::from_strata(s.cap, std::move(strata));
    if (s.json_out) {
        json j = p.to_json();
        j["fingerprint"] = p.fingerprint();
        emit_json(s, j);
    } else {
        emit(s, "stratum sizes: " + sizes(p) + "\nfingerprint: " + p.fingerprint() + "\n");
    }
    return ok;
}

int cmd_lattice(const settings& s, const std::string& scope) {
    const auto cat = catalog::load(s.data_dir);
    const auto g = cat.lattice_graph(scope);
    if (s.json_out && s.dot_out) throw usage_error("choose one of --json and --dot");
    if (s.json_out) emit_json(s, g.to_json());
    else if (s.dot_out) emit(s, g.to_dot());
    else {
        std::ostringstream t;
        t << g.nodes.size() << " nodes, " << g.edges.size() << " edges\n";
        for (const auto& e : g.edges) t << "  " << e.lower << " < " << e.upper << "\n";
        emit(s, t.str());
    }
    return ok;
}

int cmd_eval(const settings& s, const std::string& term, const std::string& point) {
    const auto t = parse_omega_term(trim(read_arg(term)));
    const auto x = upseq::parse(trim(read_arg(point)));
    const bool v = up_eval(*t, x);
    if (s.json_out) emit_json(s, {{"term", to_string(*t)}, {"point", x}, {"value", v ? 1 : 0}});
    else emit(s, std::string(v ? "1" : "0") + "\n");
    return ok;
}

int cmd_refute(const settings& s, const std::string& term, const std::string& rel, const std::string& matrix) {
    const auto t = parse_omega_term(trim(read_arg(term)));
    const auto R = countable_relation::parse(trim(read_arg(rel)));
    json mj;
    try {
        mj = json::parse(read_arg(matrix));
    } catch (const json::parse_error& e) {
        throw parse_error("matrix is not valid JSON", e.byte);
    }
    const auto M = mj.get<up_matrix>();
    const auto r = refute_preservation(*t, R, M);
    json j = {{"term", to_string(*t)}, {"relation", R.name()}, {"matrix", M}, {"refuted", r.refuted}, {"reason", r.reason}};
    if (r.bad_column) j["bad_column"] = *r.bad_column;
    if (r.image) j["image"] = *r.image;
    if (s.json_out) emit_json(s, j);
    else emit(s, std::string(r.refuted ? "refuted: " : "not refuted: ") + r.reason + "\n");
    return r.refuted ? ok : check_failed;
}

int cmd_search(const settings& s, const std::string& term, const std::string& rel) {
    const auto t = parse_omega_term(trim(read_arg(term)));
    const auto R = countable_relation::parse(trim(read_arg(rel)));
    const auto m = search_counterexample(*t, R, bounds(s));
    json j = {{"term", to_string(*t)}, {"relation", R.name()}, {"seed", s.seed}, {"samples", s.samples}};
    j["matrix"] = m ? json(*m) : json(nullptr);
    if (s.json_out) emit_json(s, j);
    else emit(s, m ? "counterexample: " + json(*m).dump() + "\n" : "no counterexample within the search bounds\n");
    return ok;
}

int cmd_verify(const settings& s, const std::string& id) {
    const auto cat = catalog::load(s.data_dir);
    const auto suites = load_suites(s.data_dir);
    std::vector<suite_spec> chosen;
    if (id == "all") chosen = suites;
    else chosen.push_back(find_suite(suites, id));
    const auto reports = run_suites(cat, chosen, bounds(s));
    bool pass = true;
    json j;
    std::ostringstream t;
    for (const auto& r : reports) {
        pass = pass && r.pass();
        t << (r.pass() ? "pass " : "FAIL ") << r.suite << " (" << r.checks.size() << " checks)";
        if (auto f = r.first_failure()) t << ": " << *f;
        t << "\n";
    }
    t << "overall: " << (pass ? "pass" : "fail") << "\n";
    if (id == "all") {
        json arr = json::array();
        for (const auto& r : reports) arr.push_back(r.to_json());
        j = {{"seed", s.seed}, {"suites", arr}, {"overall", pass ? "pass" : "fail"}};
    } else {
        j = reports.front().to_json();
    }
    if (!s.out.empty()) {
        emit_json(s, j);
        if (!s.json_out) std::cout << t.str();
    } else if (s.json_out) {
        emit_json(s, j);
    } else {
        std::cout << t.str();
    }
    return pass ? ok : check_failed;
}

int cmd_catalog(const settings& s, const std::string& what) {
    const auto cat = catalog::load(s.data_dir);
    json j;
    std::ostringstream t;
    if (what == "nodes") {
        j = json::array();
        for (const auto& n : cat.nodes()) {
            j.push_back({{"name", n.name}, {"group", n.group}, {"generators", n.generator_literals},
                         {"relations", n.relation_names}, {"citation", n.citation}});
            t << n.name << "  [" << n.group << "]  " << n.citation << "\n";
        }
    } else if (what == "fibers") {
        j = json::array();
        for (const auto& f : cat.fibers()) {
            json names = json::array();
            for (const auto& n : f.nodes) names.push_back(n.name);
            j.push_back({{"id", f.id}, {"base", f.base}, {"nodes", names}, {"citation", f.citation}});
            t << f.id << "  over " << f.base << ": " << f.nodes.size() << " clones\n";
        }
    } else if (what == "open") {
        j = json::array();
        for (const auto& o : cat.open_intervals()) {
            j.push_back({{"fiber", o.fiber}, {"base", o.base}, {"lower", o.lower}, {"upper", o.upper}, {"question", o.question}});
            t << o.lower << " .. " << o.upper << " (" << o.fiber << "): " << o.question << "\n";
        }
    } else if (what == "suites") {
        j = json::array();
        for (const auto& su : load_suites(s.data_dir)) {
            j.push_back({{"id", su.id}, {"kind", su.kind}, {"citation", su.citation}});
            t << su.id << "  " << su.citation << "\n";
        }
    } else if (auto i = cat.find(what)) {
        const auto& n = cat.nodes()[*i];
        j = {{"name", n.name}, {"group", n.group}, {"k", n.k}, {"generators", n.generator_literals},
             {"relations", n.relation_names}, {"aliases", n.aliases}, {"citation", n.citation}};
        t << n.name << "\n  group: " << n.group << "\n  citation: " << n.citation << "\n  generators:";
        for (const auto& g : n.generator_literals) t << " " << g;
        t << "\n  relations:";
        for (const auto& r : n.relation_names) t << " " << r;
        t << "\n";
    } else {
        throw usage_error("unknown catalog entry '" + what + "' (try nodes, fibers, open, suites or a clone name)");
    }
    if (s.json_out) emit_json(s, j);
    else emit(s, t.str());
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clonekit: clones of Boolean functions and their Borel fibers"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    flags f;
    settings s;
    app.add_flag("--json", s.json_out, "JSON output");
    app.add_flag("--dot", s.dot_out, "DOT output (lattice)");
    app.add_option("--out", s.out, "write the result to a file");
    app.add_option("--seed", f.seed, "seed for randomized searches (default 7)");
    app.add_option("--cap", f.cap, "arity cap for closures and slices (default 3)");
    app.add_option("--budget", f.budget, "composition budget for closures");
    app.add_option("--samples", f.samples, "random samples per counterexample search");
    app.add_option("--data-dir", f.data_dir, "catalog data directory");
    app.add_option("--config", f.config, "JSON config file");

    std::string one, two, three;
    std::vector<std::string> many;

    auto* classify = app.add_subcommand("classify", "least catalog clone containing a function");
    classify->add_option("function", one, "function literal, e.g. ite(x0,x1,x2)@3")->required();
    auto* closure = app.add_subcommand("closure", "finite slice of the clone generated by functions");
    closure->add_option("generators", many, "function literals")->required();
    auto* mem = app.add_subcommand("member", "decide membership in a generated clone");
    mem->add_option("function", one)->required();
    mem->add_option("generators", many)->required();
    auto* pol = app.add_subcommand("pol", "polymorphisms of named relations or catalog clones");
    pol->add_option("relations", many)->required();
    auto* lattice = app.add_subcommand("lattice", "export fig1, fiber:ID or side_tube:k");
    lattice->add_option("scope", one)->required();
    auto* eval = app.add_subcommand("eval", "evaluate an omega-term at an ultimately periodic point");
    eval->add_option("term", one)->required();
    eval->add_option("point", two)->required();
    auto* refute = app.add_subcommand("refute", "replay a non-preservation witness");
    refute->add_option("term", one)->required();
    refute->add_option("relation", two)->required();
    refute->add_option("matrix", three, "matrix JSON, @file or -")->required();
    auto* search = app.add_subcommand("search", "bounded counterexample search");
    search->add_option("term", one)->required();
    search->add_option("relation", two)->required();
    auto* verify = app.add_subcommand("verify", "run a verification suite or all");
    verify->add_option("suite", one)->required();
    auto* cat = app.add_subcommand("catalog", "list nodes, fibers, open intervals, suites or one clone");
    cat->add_option("entry", one)->default_val("nodes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        s = resolve(f, s);
        if (*classify) return cmd_classify(s, one);
        if (*closure) return cmd_closure(s, many);
        if (*mem) return cmd_member(s, one, many);
        if (*pol) return cmd_pol(s, many);
        if (*lattice) return cmd_lattice(s, one);
        if (*eval) return cmd_eval(s, one, two);
        if (*refute) return cmd_refute(s, one, two, three);
        if (*search) return cmd_search(s, one, two);
        if (*verify) return cmd_verify(s, one);
        if (*cat) return cmd_catalog(s, one);
    } catch (const resource_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return resource;
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return usage;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    return usage;
}
