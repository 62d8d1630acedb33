// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failures.

#include "reqsolve/assessment.hpp"
#include "reqsolve/cli.hpp"
#include "reqsolve/extraction.hpp"
#include "reqsolve/inventory.hpp"
#include "reqsolve/solver.hpp"

#include "../support/param_matrix.hpp"
#include "../support/random_problems.hpp"
#include "../support/scenarios.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace reqsolve;
namespace fs = std::filesystem;

namespace {

constexpr int solver_problems = 250;
constexpr double solver_seconds = 60.0;
constexpr int pin_fixtures = 60;
constexpr int chain_graphs = 600;
constexpr int closure_trees = 150;
constexpr double scenario_seconds = 5.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

class Scratch {
public:
    Scratch() {
        path_ = fs::temp_directory_path() / ("reqsolve-acceptance-" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// 1 -------------------------------------------------------------------------

Outcome solver_against_brute_force() {
    std::mt19937 rng(1101);
    const auto start = Clock::now();
    int sat = 0;
    for (int i = 0; i < solver_problems; ++i) {
        const auto p = testutil::random_problem(rng);
        const auto expected = testutil::brute_force_optimum(p);
        const auto got = solve(p);
        if (expected.has_value() != got.assignment.has_value())
            return {false, "problem " + std::to_string(i) + ": satisfiability differs"};
        if (!expected) continue;
        ++sat;
        if (!validate(*got.assignment, p.edges).empty()) return {false, "problem " + std::to_string(i) + ": violations"};
        if (*got.assignment != *expected) return {false, "problem " + std::to_string(i) + ": not the optimum"};
    }
    const double s = seconds_since(start);
    std::ostringstream d;
    d << solver_problems << " problems, " << sat << " satisfiable, " << s << " s";
    return {s < solver_seconds, d.str()};
}

// 2 -------------------------------------------------------------------------

Outcome pin_preference() {
    std::mt19937 rng(2202);
    int checked = 0, attempts = 0;
    while (checked < pin_fixtures && attempts < 100000) {
        ++attempts;
        auto p = testutil::random_problem(rng, 5, 6);
        p.forced.clear();
        p.pinned.clear();
        Assignment pins;
        for (const auto& [name, vars] : p.variables) pins[name] = vars[rng() % vars.size()];
        if (!validate(pins, p.edges).empty()) continue;
        auto target = std::next(p.variables.begin(), static_cast<long>(rng() % p.variables.size()));
        const auto& bump = target->second[rng() % target->second.size()];
        if (bump == pins.at(target->first)) continue;
        Assignment bumped = pins;
        bumped[target->first] = bump;
        if (!validate(bumped, p.edges).empty()) continue;

        for (const auto& [name, v] : pins) p.pinned[name] = v;
        p.pinned[target->first] = bump;
        p.forced[target->first] = bump;
        const auto r = solve(p);
        ++checked;
        if (!r.assignment || *r.assignment != bumped)
            return {false, "fixture " + std::to_string(checked) + ": solved assignment deviates from the pins"};
    }
    return {checked >= pin_fixtures, std::to_string(checked) + " self-consistent fixtures, 0 deviations"};
}

// 3 -------------------------------------------------------------------------

Outcome call_chains() {
    std::mt19937 rng(3303);
    int cyclic = 0;
    for (int round = 0; round < chain_graphs; ++round) {
        const std::size_t n = 2 + rng() % 7;  // project plus up to 7 packages
        std::vector<std::string> names{project_node};
        for (std::size_t i = 1; i < n; ++i) names.push_back("p" + std::to_string(i));
        const bool dag = round % 2 == 0;
        std::vector<std::vector<bool>> adj(n, std::vector<bool>(n));
        DependencyGraph g;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 1; b < n; ++b) {
                if (a == b || rng() % 3 != 0) continue;
                if (dag && b <= a) continue;
                adj[a][b] = true;
                g[names[a]].insert(names[b]);
            }
        bool has_cycle = false;
        for (std::size_t a = 1; a < n; ++a)
            for (std::size_t b = 1; b < n; ++b)
                if (adj[a][b] && adj[b][a]) has_cycle = true;
        cyclic += has_cycle;
        const std::size_t target = 1 + rng() % (n - 1);

        std::set<std::vector<std::string>> oracle;
        std::vector<std::size_t> path{0};
        std::function<void(std::size_t)> walk = [&](std::size_t u) {
            if (u == target) {
                std::vector<std::string> p;
                for (auto i : path) p.push_back(names[i]);
                oracle.insert(p);
                return;
            }
            for (std::size_t v = 0; v < n; ++v) {
                if (!adj[u][v] || std::find(path.begin(), path.end(), v) != path.end()) continue;
                path.push_back(v);
                walk(v);
                path.pop_back();
            }
        };
        walk(0);

        std::set<std::vector<std::string>> got;
        for (const auto& c : find_call_chains(g, names[target])) got.insert(c.nodes);
        if (got != oracle) return {false, "graph " + std::to_string(round) + ": chain sets differ"};
    }
    return {true, std::to_string(chain_graphs) + " graphs (" + std::to_string(cyclic) + " with 2-cycles), 0 mismatches"};
}

// 4 -------------------------------------------------------------------------

// A random package tree whose modules import each other in every supported
// spelling; the generator records which modules each statement reaches.
struct Tree {
    std::vector<std::string> modules;                // dotted; packages included
    std::set<std::string> packages;
    std::map<std::string, std::set<std::string>> reaches;
    std::map<std::string, std::string> text;
};

std::string parent_of(const std::string& m) {
    auto dot = m.rfind('.');
    return dot == std::string::npos ? "" : m.substr(0, dot);
}

std::string relative_spelling(const std::string& from, bool from_is_package, const std::string& to) {
    // Base package for level 1 is the module's own package.
    std::string base = from_is_package ? from : parent_of(from);
    std::string dots = ".";
    while (!base.empty()) {
        if (to.rfind(base + ".", 0) == 0) return dots + to.substr(base.size() + 1);
        base = parent_of(base);
        dots += ".";
    }
    return "";
}

Tree random_tree(std::mt19937& rng) {
    Tree t;
    t.modules.push_back("pkg");
    t.packages.insert("pkg");
    const int n = 3 + static_cast<int>(rng() % 9);
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> pkgs(t.packages.begin(), t.packages.end());
        const auto& parent = pkgs[rng() % pkgs.size()];
        const bool is_pkg = rng() % 3 == 0;
        const std::string name = parent + "." + (is_pkg ? "sub" : "m") + std::to_string(i);
        t.modules.push_back(name);
        if (is_pkg) t.packages.insert(name);
    }
    for (const auto& m : t.modules) {
        std::ostringstream src;
        auto& reach = t.reaches[m];
        const int k = static_cast<int>(rng() % 4);
        for (int j = 0; j < k; ++j) {
            const auto& to = t.modules[rng() % t.modules.size()];
            if (to == m || to == "pkg") continue;
            switch (rng() % 5) {
                case 0:
                    src << "import " << to << "\n";
                    reach.insert(to);
                    break;
                case 1:
                    src << "from " << parent_of(to) << " import " << to.substr(to.rfind('.') + 1) << "\n";
                    reach.insert(parent_of(to));
                    reach.insert(to);
                    break;
                case 2: {
                    auto rel = relative_spelling(m, t.packages.count(m) > 0, to);
                    if (rel.empty()) break;
                    const auto last = rel.rfind('.');
                    if (last + 1 == rel.find_first_not_of('.')) {
                        // ".x" or "..x": `from . import x` form
                        src << "from " << rel.substr(0, last + 1) << " import " << rel.substr(last + 1) << "\n";
                    } else {
                        src << "from " << rel << " import value\n";
                    }
                    reach.insert(to);
                    reach.insert(parent_of(to));
                    break;
                }
                case 3:
                    src << "def lazy():\n    import " << to << " as alias\n    return alias\n";
                    reach.insert(to);
                    break;
                default:
                    src << "from " << to << " import value\nimport os.path\n";
                    reach.insert(to);
                    break;
            }
        }
        src << "value = 1\n";
        t.text[m] = src.str();
    }
    return t;
}

std::set<std::string> reference_closure(const Tree& t, const std::string& entry) {
    std::set<std::string> seen{entry};
    std::vector<std::string> queue{entry};
    while (!queue.empty()) {
        auto m = queue.back();
        queue.pop_back();
        std::set<std::string> next = t.reaches.at(m);
        if (auto p = parent_of(m); !p.empty()) next.insert(p);
        for (const auto& n : next)
            if (seen.insert(n).second) queue.push_back(n);
    }
    return seen;
}

Outcome import_closure(const fs::path& scratch) {
    std::mt19937 rng(4404);
    int relative = 0;
    for (int round = 0; round < closure_trees; ++round) {
        const auto t = random_tree(rng);
        const auto root = scratch / ("tree" + std::to_string(round));
        for (const auto& m : t.modules) {
            auto rel = m;
            std::replace(rel.begin(), rel.end(), '.', '/');
            const auto file = t.packages.count(m) ? root / rel / "__init__.py" : root / (rel + ".py");
            fs::create_directories(file.parent_path());
            std::ofstream(file) << t.text.at(m);
            if (t.text.at(m).find("from .") != std::string::npos) ++relative;
        }
        SourceTree tree(root);
        ParsedSources parsed(tree);
        const auto& entry = t.modules[rng() % t.modules.size()];
        const auto got = find_related_files({entry}, parsed);
        if (got != reference_closure(t, entry)) return {false, "tree " + std::to_string(round) + " from " + entry};
    }
    return {true, std::to_string(closure_trees) + " trees (" + std::to_string(relative) +
                      " modules with relative imports), 0 mismatches"};
}

// 5, 7, 8 -------------------------------------------------------------------

struct Run {
    int exit_code = -1;
    double seconds = 0;
    std::string requirements;
    std::string report;
    nlohmann::json json;
};

Run run_cli(const fs::path& config, const fs::path& out, bool offline) {
    CommandLine cmd;
    cmd.config = config;
    cmd.offline = offline;
    cmd.output_dir = out;
    const auto t0 = Clock::now();
    Run r;
    r.exit_code = execute(cmd);
    r.seconds = seconds_since(t0);
    r.requirements = testutil::slurp(out / "requirements.out.txt");
    r.report = testutil::slurp(out / "report.json");
    if (!r.report.empty()) r.json = nlohmann::json::parse(r.report);
    return r;
}

struct Benchmark {
    std::map<std::string, testutil::Workspace> workspaces;
    std::map<std::string, Run> first;
    std::map<std::string, Run> second;
    std::map<std::string, std::string> setup_error;
};

Benchmark run_benchmark(const fs::path& scratch) {
    Benchmark b;
    for (const auto& s : testutil::load_scenarios(REQSOLVE_FIXTURES)) {
        const auto ws = testutil::prepare(s, REQSOLVE_FIXTURES, scratch / s.id);
        b.workspaces[s.id] = ws;
        const auto warm = run_cli(ws.config, ws.output / "warm", false);
        if (warm.json.is_null()) {
            b.setup_error[s.id] = "warm run wrote no report";
            continue;
        }
        b.first[s.id] = run_cli(ws.config, ws.output / "offline-1", true);
        b.second[s.id] = run_cli(ws.config, ws.output / "offline-2", true);
    }
    return b;
}

std::string describe(const Run& r) {
    std::ostringstream d;
    d << "exit " << r.exit_code << ", issues " << testutil::issue_summary(r.json.value("detected_issues", nlohmann::json::array())).dump()
      << ", requirements " << nlohmann::json(r.requirements).dump();
    if (r.json.contains("error") && !r.json["error"].is_null()) d << ", error " << r.json["error"].dump();
    return d.str();
}

Outcome scenarios(const Benchmark& b, const std::vector<std::string>& ids) {
    double slowest = 0;
    for (const auto& s : testutil::load_scenarios(REQSOLVE_FIXTURES)) {
        if (std::find(ids.begin(), ids.end(), s.id) == ids.end()) continue;
        if (b.setup_error.count(s.id)) return {false, s.id + ": " + b.setup_error.at(s.id)};
        const auto& r = b.first.at(s.id);
        slowest = std::max(slowest, r.seconds);
        const bool ok = r.exit_code == s.expected.at("exit_code") &&
                        r.requirements == s.expected.at("requirements").get<std::string>() &&
                        testutil::issue_summary(r.json.at("detected_issues")) == s.expected.at("detected_issues");
        if (!ok) return {false, s.id + ": " + describe(r)};
        if (r.seconds >= scenario_seconds) return {false, s.id + ": " + std::to_string(r.seconds) + " s offline"};
    }
    std::ostringstream d;
    d << ids.size() << " scenarios exact, slowest offline run " << slowest << " s";
    return {true, d.str()};
}

Outcome determinism(const Benchmark& b) {
    for (const auto& [id, r1] : b.first) {
        const auto& r2 = b.second.at(id);
        if (r1.requirements.empty() || r1.report.empty()) return {false, id + ": missing outputs"};
        if (r1.requirements != r2.requirements) return {false, id + ": requirements.out.txt differs"};
        if (r1.report != r2.report) return {false, id + ": report.json differs"};
    }
    if (!b.setup_error.empty()) return {false, b.setup_error.begin()->first + ": " + b.setup_error.begin()->second};
    return {true, std::to_string(b.first.size()) + " scenarios, byte-identical outputs"};
}

Outcome termination(const Benchmark& b, const std::string& id) {
    if (!b.first.count(id)) return {false, id + ": did not run"};
    const auto& r = b.first.at(id);
    // Fallback oracle: the starting pins with only the target bumped.
    auto start = parse_requirements(testutil::slurp(REQSOLVE_FIXTURES "/adversarial/requirements.txt"));
    start.set("core", Version::parse("2.0"));
    const int budget = r.json.at("config").at("max_iterations");
    const int used = r.json.at("iterations");
    if (r.exit_code != 2) return {false, "exit " + std::to_string(r.exit_code)};
    if (r.requirements != render_requirements(start)) return {false, "requirements are not the fallback"};
    if (used > budget) return {false, "iterations " + std::to_string(used) + " over budget"};
    return {true, "exit 2 after " + std::to_string(used) + "/" + std::to_string(budget) + " iterations, fallback emitted"};
}

// 6 -------------------------------------------------------------------------

Outcome parameter_matrix() {
    int cells = 0, realized = 0;
    for (const auto& cell : testutil::expected_table()) {
        ++cells;
        if (param_verdict(cell.kind, cell.change, cell.passing) != cell.compatible)
            return {false, std::string("table disagrees at ") + std::string(to_string(cell.kind)) + "/" +
                               std::string(to_string(cell.change)) + "/" + std::string(to_string(cell.passing))};
        const auto f = testutil::realize(cell);
        if (!f) continue;
        ++realized;
        const auto changes = diff_parameters(f->v1, f->v2);
        if (changes.empty() || changes.front().change != cell.change ||
            check_call(f->call, f->v1, f->v2).has_value() == cell.compatible)
            return {false, std::string("micro-fixture disagrees at ") + std::string(to_string(cell.kind)) + "/" +
                               std::string(to_string(cell.change)) + "/" + std::string(to_string(cell.passing))};
    }
    const int expected_cells = 2 * 6 * 3;  // parameter kind x change x passing
    return {cells == expected_cells, std::to_string(cells) + "/" + std::to_string(expected_cells) + " cells, " +
                                         std::to_string(realized) + " realized as signatures, 0 disagreements"};
}

}  // namespace

int main() {
    ::unsetenv("REQSOLVE_KNOWLEDGE");
    Scratch scratch;
    int failures = 0;
    auto report = [&](int n, const std::string& name, const Outcome& o) {
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << n << " " << name << ": " << o.detail << std::endl;
        failures += !o.pass;
    };

    report(1, "solver soundness and optimality", solver_against_brute_force());
    report(2, "pin preference", pin_preference());
    report(3, "call-chain oracle", call_chains());
    report(4, "import-closure oracle", import_closure(scratch.path() / "trees"));
    const auto bench = run_benchmark(scratch.path() / "bench");
    report(5, "scenario fixtures",
           scenarios(bench, {"a_torchvision_pin_conflict", "b_pillow_version_removed", "c_sklearn_module_removed",
                             "d_scipy_comb_removed", "e_sklearn_reexport_kept"}));
    report(6, "parameter model totality", parameter_matrix());
    report(7, "determinism", determinism(bench));
    report(8, "loop termination", termination(bench, "adversarial_every_plan_fails"));
    return failures;
}
