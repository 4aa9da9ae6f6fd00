#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "clonekit/catalog.hpp"
#include "clonekit/witnesses.hpp"

#ifndef CLONEKIT_CLI_PATH
#define CLONEKIT_CLI_PATH "clonekit"
#endif

namespace {

using namespace clonekit;

struct criterion {
    int id;
    std::string title;
    double limit_s;
    std::function<std::string(const catalog&, const std::vector<suite_spec>&)> run;  // empty string = pass
};

std::string suites_pass(const catalog& cat, const std::vector<suite_spec>& all, const std::vector<std::string>& ids) {
    std::vector<suite_spec> chosen;
    for (const auto& id : ids) chosen.push_back(find_suite(all, id));
    for (const auto& r : run_suites(cat, chosen)) {
        if (auto f = r.first_failure()) return r.suite + ": " + *f;
        for (const auto& c : r.checks)
            if (c.verdict == "skipped") return r.suite + ": skipped check " + c.claim;
    }
    return {};
}

std::string census(const catalog& cat, const std::vector<suite_spec>&) {
    const auto g = cat.lattice_graph("fig1");
    if (g.nodes.size() != cat.nodes().size()) return "fig1 node count differs from the catalog";
    std::map<std::string, std::size_t> groups;
    for (const auto& n : cat.nodes()) ++groups[n.group];
    const std::map<std::string, std::size_t> want{{"cube", 8}, {"series", 32}, {"meet", 8}, {"aff", 11}, {"dual", 3}};
    if (groups != want) return "group counts differ from the census";
    // The series: T0(k), T0(k)T1, MT0(k), MT0(k)T1 and their duals for k = 2, 3, 4, <w.
    for (const char* fam : {"T0(%s)", "T0(%s)T1", "MT0(%s)", "MT0(%s)T1", "T1(%s)", "T1(%s)T0", "MT1(%s)", "MT1(%s)T0"})
        for (const char* k : {"2", "3", "4", "<w"}) {
            char buf[32];
            std::snprintf(buf, sizeof buf, fam, k);
            if (!cat.find(buf)) return std::string("missing series node ") + buf;
        }
    if (g.edges.size() != cat.covers().size()) return "fig1 edge count differs from the covering relation";
    for (auto [lo, up] : cat.covers()) {
        const auto c = cat.verify_edge(lo, up);
        if (!c.ok) return "edge " + c.lower + " < " + c.upper + " failed: " + c.separation;
    }
    return {};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string determinism(const catalog&, const std::vector<suite_spec>&) {
    const auto dir = std::filesystem::temp_directory_path() / ("clonekit_acc_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    std::vector<std::string> out;
    for (int i = 0; i < 2; ++i) {
        const auto file = dir / ("report" + std::to_string(i) + ".json");
        const std::string cmd = std::string("\"") + CLONEKIT_CLI_PATH + "\" verify all --seed 7 --out \"" + file.string() +
                                "\" > /dev/null";
        const int rc = std::system(cmd.c_str());
        if (rc != 0) {
            std::filesystem::remove_all(dir);
            return "verify all exited with status " + std::to_string(rc);
        }
        out.push_back(slurp(file));
    }
    std::filesystem::remove_all(dir);
    if (out[0].empty()) return "empty report";
    if (out[0] != out[1]) return "the two reports differ";
    return {};
}

}  // namespace

int main() {
    const auto cat = catalog::load();
    const auto suites = load_suites();
    std::vector<std::string> fibers;
    for (const auto& s : suites)
        if (s.kind == "fiber") fibers.push_back(s.id);

    const std::vector<criterion> criteria = {
        {1, "Post-lattice census with generator-wise edge verification", 60, census},
        {2, "Pol-Inv roundtrip at arity cap 3", 120,
         [](const catalog& c, const auto& s) { return suites_pass(c, s, {"pol_inv_roundtrip"}); }},
        {3, "operator identity suites, exhaustive to arity 3", 10,
         [](const catalog& c, const auto& s) { return suites_pass(c, s, {"identities", "beta_roundtrip"}); }},
        {4, "beta-correspondence slice equalities", 60,
         [](const catalog& c, const auto& s) { return suites_pass(c, s, {"beta_correspondence"}); }},
        {5, "fiber distinctness for the nine classified fibers", 300,
         [&fibers](const catalog& c, const auto& s) {
             if (fibers.size() != 9) return std::string("expected 9 fiber suites");
             return suites_pass(c, s, fibers);
         }},
        {6, "cobweb lower bound for k = 2, 3, 4", 120,
         [](const catalog& c, const auto& s) { return suites_pass(c, s, {"cobweb_k2", "cobweb_k3", "cobweb_k4"}); }},
        {7, "Kahane extraction on three functions", 30,
         [](const catalog& c, const auto& s) {
             const auto& k = find_suite(s, "kahane");
             if (k.params.at("functions").size() != 3) return std::string("expected 3 functions");
             return suites_pass(c, s, {"kahane"});
         }},
        {8, "Wadge construction for bigjoin and liminf", 10,
         [](const catalog& c, const auto& s) { return suites_pass(c, s, {"wadge"}); }},
        {9, "determinism of verify all --seed 7", 600, determinism},
    };

    bool all = true;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string why;
        try {
            why = c.run(cat, suites);
        } catch (const std::exception& e) {
            why = std::string("exception: ") + e.what();
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (why.empty() && dt > c.limit_s) why = "time limit exceeded";
        const bool pass = why.empty();
        all = all && pass;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", dt, c.limit_s);
        std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << " (" << timing << ")";
        if (!pass) std::cout << ": " << why;
        std::cout << std::endl;
    }
    return all ? 0 : 1;
}
