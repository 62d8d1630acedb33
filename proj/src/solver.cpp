#include "reqsolve/solver.hpp"

#include "reqsolve/errors.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace reqsolve {

// ---------------------------------------------------------------------------
// Problem construction

ConstraintProblem build_problem(const Requirements& reqs, const PackageName& target, const Version& target_version,
                                KnowledgeStore& store, const ProblemOptions& options,
                                std::vector<std::string>* warnings) {
    auto note = [&](std::string msg) {
        spdlog::debug("{}", msg);
        if (warnings) warnings->push_back(std::move(msg));
    };

    ConstraintProblem problem;
    for (const auto& pin : reqs) {
        if (pin.version.is_prerelease()) store.allow_prerelease(pin.name, pin.version);
        problem.pinned[pin.name] = pin.version;
    }
    if (target_version.is_prerelease()) store.allow_prerelease(target, target_version);
    problem.pinned[target] = target_version;
    problem.forced[target] = target_version;

    if (!store.known(target)) throw TargetVersionUnknown("target package '" + target.raw() + "' is not on the index");
    {
        const auto& cands = store.candidates(target);
        if (std::find(cands.begin(), cands.end(), target_version) == cands.end())
            throw TargetVersionUnknown("version " + target_version.raw() + " of '" + target.raw() +
                                       "' is not an installable candidate");
    }

    std::deque<std::pair<PackageName, int>> queue;
    for (const auto& [name, _] : problem.pinned) queue.emplace_back(name, 0);
    std::set<PackageName> seen;
    std::map<ReleaseKey, std::vector<Dependency>> raw_edges;
    while (!queue.empty()) {
        auto [name, depth] = queue.front();
        queue.pop_front();
        if (!seen.insert(name).second) continue;
        if (!store.known(name)) {
            if (problem.pinned.count(name))
                throw UnsatisfiablePin("pinned package '" + name.raw() + "' is not on the index");
            note("dependency '" + name.raw() + "' is not on the index; ignored");
            continue;
        }
        auto cands = store.candidates(name);
        auto& vars = problem.variables[name];
        for (const auto& v : cands) {
            try {
                raw_edges[{name, v}] = store.dependencies(name, v);
                vars.push_back(v);
            } catch (const MetadataMissing& e) {
                note(std::string(e.what()) + "; candidate dropped");
            }
        }
        if (auto pin = problem.pinned.find(name); pin != problem.pinned.end()) {
            if (std::find(vars.begin(), vars.end(), pin->second) == vars.end())
                throw UnsatisfiablePin("pinned version " + name.raw() + "==" + pin->second.raw() +
                                       " is not an installable candidate");
        }
        if (options.closure_depth >= 0 && depth >= options.closure_depth) continue;
        for (const auto& v : vars)
            for (const auto& d : raw_edges[{name, v}])
                if (!seen.count(d.name)) queue.emplace_back(d.name, depth + 1);
    }

    for (auto& [key, deps] : raw_edges) {
        if (!problem.variables.count(key.first)) continue;
        std::vector<Dependency> kept;
        for (const auto& d : deps)
            if (problem.variables.count(d.name)) kept.push_back(d);
        problem.edges.emplace(key, std::move(kept));
    }
    // Keep only preferences for packages in scope.
    for (auto it = problem.pinned.begin(); it != problem.pinned.end();)
        it = problem.variables.count(it->first) ? std::next(it) : problem.pinned.erase(it);
    return problem;
}

// ---------------------------------------------------------------------------
// Encoding

std::int64_t selection_weight(const ConstraintProblem& problem, const PackageName& name, std::size_t index) {
    const auto& vars = problem.variables.at(name);
    std::int64_t w = static_cast<std::int64_t>(index);
    auto pin = problem.pinned.find(name);
    if (pin != problem.pinned.end() && vars.at(index) == pin->second) w += static_cast<std::int64_t>(vars.size()) + 1;
    return w;
}

std::int64_t objective(const ConstraintProblem& problem, const Assignment& assignment) {
    std::int64_t total = 0;
    for (const auto& [name, v] : assignment) {
        const auto& vars = problem.variables.at(name);
        const auto it = std::find(vars.begin(), vars.end(), v);
        if (it == vars.end()) throw std::invalid_argument("assigned version outside candidates");
        total += selection_weight(problem, name, static_cast<std::size_t>(it - vars.begin()));
    }
    return total;
}

Formula encode(const ConstraintProblem& problem) {
    Formula f;
    std::map<PackageName, int> first_var;
    for (const auto& [name, vars] : problem.variables) {
        first_var[name] = static_cast<int>(f.selectors.size());
        std::vector<int> group;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            group.push_back(static_cast<int>(f.selectors.size()));
            f.selectors.emplace_back(name, vars[i]);
            f.weights.push_back(selection_weight(problem, name, i));
        }
        f.groups.push_back(std::move(group));
    }

    // Each release is visited once; shared and cyclic dependencies reuse the
    // same selector variables.
    for (const auto& [key, deps] : problem.edges) {
        const auto& vars = problem.variables.at(key.first);
        const auto pos = std::find(vars.begin(), vars.end(), key.second) - vars.begin();
        const int a = first_var.at(key.first) + static_cast<int>(pos);
        for (const auto& d : deps) {
            std::vector<Literal> clause{{a, false}};
            const auto& dvars = problem.variables.at(d.name);
            for (std::size_t j = 0; j < dvars.size(); ++j)
                if (d.spec.contains(dvars[j])) clause.push_back({first_var.at(d.name) + static_cast<int>(j), true});
            f.clauses.push_back(std::move(clause));
            f.clause_origin.push_back(key.first.raw() + " -> " + d.name.raw());
        }
    }
    for (const auto& [name, v] : problem.forced) {
        auto it = problem.variables.find(name);
        std::vector<Literal> clause;
        if (it != problem.variables.end()) {
            const auto pos = std::find(it->second.begin(), it->second.end(), v) - it->second.begin();
            if (pos < static_cast<long>(it->second.size())) clause.push_back({first_var.at(name) + static_cast<int>(pos), true});
        }
        f.clauses.push_back(std::move(clause));
        f.clause_origin.push_back("forced " + name.raw() + "==" + v.raw());
    }
    return f;
}

// ---------------------------------------------------------------------------
// Branch and bound

namespace {

struct Implication {
    int group;
    std::vector<char> allowed;  // indexed by position within group
};

class Search {
public:
    Search(const Formula& f, bool optimize, std::uint64_t& nodes) : f_(f), optimize_(optimize), nodes_(nodes) {
        const auto n = f.selectors.size();
        group_of_.assign(n, -1);
        pos_of_.assign(n, -1);
        for (std::size_t g = 0; g < f.groups.size(); ++g)
            for (std::size_t i = 0; i < f.groups[g].size(); ++i) {
                group_of_.at(static_cast<std::size_t>(f.groups[g][i])) = static_cast<int>(g);
                pos_of_[static_cast<std::size_t>(f.groups[g][i])] = static_cast<int>(i);
            }
        implications_.resize(n);
        root_.resize(f.groups.size());
        for (std::size_t g = 0; g < f.groups.size(); ++g) root_[g].assign(f.groups[g].size(), 1);

        for (const auto& clause : f.clauses) {
            if (clause.empty()) {
                infeasible_ = true;
                continue;
            }
            if (clause.size() == 1) {
                const auto& l = clause.front();
                auto& dom = root_[group(l.var)];
                if (l.positive) {
                    for (std::size_t i = 0; i < dom.size(); ++i)
                        if (static_cast<int>(i) != pos_of_[l.var]) dom[i] = 0;
                } else {
                    dom[pos_of_[l.var]] = 0;
                }
                continue;
            }
            const auto& head = clause.front();
            if (head.positive) throw std::invalid_argument("clause must start with a negative literal");
            Implication imp{-1, {}};
            for (std::size_t k = 1; k < clause.size(); ++k) {
                const auto& l = clause[k];
                if (!l.positive) throw std::invalid_argument("clause body must be positive");
                if (imp.group < 0) {
                    imp.group = static_cast<int>(group(l.var));
                    imp.allowed.assign(f.groups[group(l.var)].size(), 0);
                } else if (imp.group != static_cast<int>(group(l.var))) {
                    throw std::invalid_argument("clause body must lie in one group");
                }
                imp.allowed[pos_of_[l.var]] = 1;
            }
            implications_[head.var].push_back(std::move(imp));
        }
    }

    std::optional<std::vector<int>> run() {
        if (infeasible_ || f_.groups.empty()) {
            if (infeasible_) return std::nullopt;
            return std::vector<int>{};
        }
        auto dom = root_;
        if (!propagate(dom)) return std::nullopt;
        std::vector<int> chosen;
        descend(dom, 0, chosen);
        return best_;
    }

private:
    std::size_t group(int var) const {
        const int g = group_of_.at(static_cast<std::size_t>(var));
        if (g < 0) throw std::invalid_argument("selector outside every group");
        return static_cast<std::size_t>(g);
    }

    int var_at(std::size_t g, std::size_t pos) const { return f_.groups[g][pos]; }

    bool propagate(std::vector<std::vector<char>>& dom) const {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t g = 0; g < dom.size(); ++g) {
                std::size_t alive = 0, last = 0;
                for (std::size_t i = 0; i < dom[g].size(); ++i) {
                    if (!dom[g][i]) continue;
                    bool supported = true;
                    for (const auto& imp : implications_[static_cast<std::size_t>(var_at(g, i))]) {
                        const auto& dh = dom[static_cast<std::size_t>(imp.group)];
                        bool any = false;
                        for (std::size_t j = 0; j < dh.size() && !any; ++j) any = dh[j] && imp.allowed[j];
                        if (!any) {
                            supported = false;
                            break;
                        }
                    }
                    if (!supported) {
                        dom[g][i] = 0;
                        changed = true;
                    } else {
                        ++alive;
                        last = i;
                    }
                }
                if (alive == 0) return false;
                if (alive == 1) {
                    for (const auto& imp : implications_[static_cast<std::size_t>(var_at(g, last))]) {
                        auto& dh = dom[static_cast<std::size_t>(imp.group)];
                        for (std::size_t j = 0; j < dh.size(); ++j)
                            if (dh[j] && !imp.allowed[j]) {
                                dh[j] = 0;
                                changed = true;
                            }
                    }
                }
            }
        }
        return true;
    }

    std::int64_t bound(const std::vector<std::vector<char>>& dom) const {
        std::int64_t total = 0;
        for (std::size_t g = 0; g < dom.size(); ++g) {
            std::int64_t m = std::numeric_limits<std::int64_t>::min();
            for (std::size_t i = 0; i < dom[g].size(); ++i)
                if (dom[g][i]) m = std::max(m, f_.weights[static_cast<std::size_t>(var_at(g, i))]);
            total += m;
        }
        return total;
    }

    // -1 / 0 / +1 comparing the chosen prefix with the best model's prefix.
    int compare_prefix(const std::vector<int>& chosen) const {
        for (std::size_t g = 0; g < chosen.size(); ++g) {
            if (chosen[g] != (*best_)[g]) return chosen[g] > (*best_)[g] ? 1 : -1;
        }
        return 0;
    }

    bool descend(std::vector<std::vector<char>>& dom, std::size_t g, std::vector<int>& chosen) {
        ++nodes_;
        if (g == dom.size()) {
            const auto value = bound(dom);
            if (!best_ || value > best_value_ || (value == best_value_ && compare_prefix(chosen) > 0)) {
                best_ = chosen;
                best_value_ = value;
            }
            return !optimize_;
        }
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < dom[g].size(); ++i)
            if (dom[g][i]) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto wa = f_.weights[static_cast<std::size_t>(var_at(g, a))];
            const auto wb = f_.weights[static_cast<std::size_t>(var_at(g, b))];
            return wa != wb ? wa > wb : a > b;
        });
        for (auto i : order) {
            auto next = dom;
            std::fill(next[g].begin(), next[g].end(), 0);
            next[g][i] = 1;
            if (!propagate(next)) continue;
            chosen.push_back(static_cast<int>(i));
            bool keep = true;
            if (optimize_ && best_) {
                const auto b = bound(next);
                keep = b > best_value_ || (b == best_value_ && compare_prefix(chosen) >= 0);
            }
            if (keep && descend(next, g + 1, chosen)) return true;
            chosen.pop_back();
        }
        return false;
    }

    const Formula& f_;
    bool optimize_;
    std::uint64_t& nodes_;
    std::vector<int> group_of_;
    std::vector<int> pos_of_;
    std::vector<std::vector<Implication>> implications_;
    std::vector<std::vector<char>> root_;
    bool infeasible_ = false;
    std::optional<std::vector<int>> best_;
    std::int64_t best_value_ = 0;
};

std::vector<int> positions_to_vars(const Formula& f, const std::vector<int>& positions) {
    std::vector<int> out;
    for (std::size_t g = 0; g < positions.size(); ++g) out.push_back(f.groups[g][static_cast<std::size_t>(positions[g])]);
    return out;
}

}  // namespace

std::optional<std::vector<int>> BranchAndBoundSolver::maximize(const Formula& f) {
    auto r = Search(f, true, nodes_).run();
    if (!r) return std::nullopt;
    return positions_to_vars(f, *r);
}

std::optional<std::vector<int>> BranchAndBoundSolver::satisfy(const Formula& f) {
    auto r = Search(f, false, nodes_).run();
    if (!r) return std::nullopt;
    return positions_to_vars(f, *r);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> conflict_set(const ConstraintProblem& problem, const Formula& f, WeightedSolver& backend) {
    std::set<std::string> keys(f.clause_origin.begin(), f.clause_origin.end());
    std::set<std::string> dropped;
    auto without = [&](const std::set<std::string>& skip) {
        Formula g = f;
        g.clauses.clear();
        g.clause_origin.clear();
        for (std::size_t i = 0; i < f.clauses.size(); ++i) {
            if (skip.count(f.clause_origin[i])) continue;
            g.clauses.push_back(f.clauses[i]);
            g.clause_origin.push_back(f.clause_origin[i]);
        }
        return g;
    };
    if (keys.size() <= 200) {
        for (const auto& k : keys) {
            auto trial = dropped;
            trial.insert(k);
            if (!backend.satisfy(without(trial))) dropped = std::move(trial);
        }
    }
    std::vector<std::string> out;
    for (const auto& k : keys) {
        if (dropped.count(k)) continue;
        if (k.starts_with("forced ")) {
            out.push_back(k);
            continue;
        }
        // Describe the distinct specifiers that make up this edge.
        std::set<std::string> specs;
        for (const auto& [key, deps] : problem.edges)
            for (const auto& d : deps)
                if (key.first.raw() + " -> " + d.name.raw() == k)
                    specs.insert(key.second.raw() + ": " + (d.spec.empty() ? std::string("any") : d.spec.str()));
        std::string line = k + " [";
        bool first = true;
        for (const auto& s : specs) {
            line += (first ? "" : "; ") + s;
            first = false;
        }
        out.push_back(line + "]");
    }
    return out;
}

}  // namespace

SolveResult solve(const ConstraintProblem& problem, WeightedSolver* backend) {
    BranchAndBoundSolver fallback;
    if (!backend) backend = &fallback;
    const auto f = encode(problem);
    SolveResult result;
    auto model = backend->maximize(f);
    if (!model) {
        result.conflict = conflict_set(problem, f, *backend);
        return result;
    }
    Assignment a;
    for (int var : *model) {
        const auto& [name, v] = f.selectors[static_cast<std::size_t>(var)];
        a[name] = v;
    }
    result.objective = objective(problem, a);
    result.assignment = std::move(a);
    return result;
}

std::string Violation::str() const {
    std::string out = package.raw() + " " + version.raw() + " requires " + dependency.name.raw() +
                      (dependency.spec.empty() ? std::string() : dependency.spec.str());
    if (found) out += ", found " + found->raw();
    return out;
}

std::vector<Violation> validate(const Assignment& assignment, const std::map<ReleaseKey, std::vector<Dependency>>& edges) {
    std::vector<Violation> out;
    for (const auto& [name, v] : assignment) {
        auto it = edges.find({name, v});
        if (it == edges.end()) continue;
        for (const auto& d : it->second) {
            auto found = assignment.find(d.name);
            if (found == assignment.end()) continue;
            if (!d.spec.contains(found->second)) out.push_back({name, v, d, found->second});
        }
    }
    return out;
}

std::string dump_formula(const Formula& f) {
    std::ostringstream out;
    auto sym = [&](int var) {
        const auto& [name, v] = f.selectors[static_cast<std::size_t>(var)];
        return "|" + name.raw() + "==" + v.raw() + "|";
    };
    for (std::size_t i = 0; i < f.selectors.size(); ++i) out << "(declare-const " << sym(static_cast<int>(i)) << " Bool)\n";
    for (const auto& group : f.groups) {
        out << "(assert ((_ pbeq 1";
        for (std::size_t i = 0; i < group.size(); ++i) out << " 1";
        out << ")";
        for (int v : group) out << " " << sym(v);
        out << "))\n";
    }
    for (std::size_t c = 0; c < f.clauses.size(); ++c) {
        const auto& clause = f.clauses[c];
        out << "; " << f.clause_origin[c] << "\n(assert (or";
        if (clause.empty()) out << " false";
        for (const auto& l : clause) out << " " << (l.positive ? sym(l.var) : "(not " + sym(l.var) + ")");
        out << "))\n";
    }
    for (std::size_t i = 0; i < f.selectors.size(); ++i)
        if (f.weights[i] > 0) out << "(assert-soft " << sym(static_cast<int>(i)) << " :weight " << f.weights[i] << ")\n";
    out << "(check-sat)\n(get-model)\n";
    return out.str();
}

}  // namespace reqsolve
