#pragma once

#include "reqsolve/knowledge.hpp"
#include "reqsolve/versioning.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace reqsolve {

using Assignment = std::map<PackageName, Version>;
using ReleaseKey = std::pair<PackageName, Version>;

/// Candidate universe plus preferences. `pinned` holds the soft preferred
/// versions (the working requirements); `forced` holds hard selections (the
/// target and any override under trial).
struct ConstraintProblem {
    std::map<PackageName, std::vector<Version>> variables;  // ascending candidates
    std::map<ReleaseKey, std::vector<Dependency>> edges;    // only dependencies on packages in `variables`
    std::map<PackageName, Version> pinned;
    std::map<PackageName, Version> forced;
};

struct ProblemOptions {
    /// Dependency levels expanded below the requirements; negative = full closure.
    int closure_depth = -1;
};

/// Collects the closure of `reqs` through the dependency metadata of every
/// candidate version. The target is forced to `target_version` and its pin
/// replaced. Dependencies on packages absent from the index are ignored.
/// Throws TargetVersionUnknown, UnsatisfiablePin.
ConstraintProblem build_problem(const Requirements& reqs, const PackageName& target, const Version& target_version,
                                KnowledgeStore& store, const ProblemOptions& options = {},
                                std::vector<std::string>* warnings = nullptr);

struct Literal {
    int var = 0;
    bool positive = true;
};

/// Boolean formula over selector variables (one per package/version pair):
/// exactly one selector per group, plus clauses, plus a weight per selector.
struct Formula {
    std::vector<ReleaseKey> selectors;
    std::vector<std::vector<int>> groups;  // one per package, in name order, ascending versions
    std::vector<std::vector<Literal>> clauses;
    std::vector<std::int64_t> weights;
    /// Edge label of every clause, e.g. "torchvision 0.5.0 -> torch ==1.4.0".
    std::vector<std::string> clause_origin;
};

Formula encode(const ConstraintProblem& problem);

/// Objective weight of one selection: ascending position plus (|V|+1) when
/// it equals the pinned version.
std::int64_t selection_weight(const ConstraintProblem& problem, const PackageName& name, std::size_t index);
std::int64_t objective(const ConstraintProblem& problem, const Assignment& assignment);

/// "Maximize weighted boolean formula" contract. Ties are broken in favour of
/// the higher selector at the first group (in order) where two optima differ.
class WeightedSolver {
public:
    virtual ~WeightedSolver() = default;
    /// Chosen selector per group, or nullopt when unsatisfiable.
    virtual std::optional<std::vector<int>> maximize(const Formula& f) = 0;
    /// Any model; nullopt when unsatisfiable.
    virtual std::optional<std::vector<int>> satisfy(const Formula& f) = 0;
};

/// Branch and bound with arc-consistency propagation. Requires every clause
/// to be a unit literal or an implication `not a or (b1 or ... or bk)` whose
/// positive literals share one group.
class BranchAndBoundSolver : public WeightedSolver {
public:
    std::optional<std::vector<int>> maximize(const Formula& f) override;
    std::optional<std::vector<int>> satisfy(const Formula& f) override;

    std::uint64_t nodes() const { return nodes_; }

private:
    std::uint64_t nodes_ = 0;
};

struct SolveResult {
    std::optional<Assignment> assignment;
    std::int64_t objective = 0;
    /// When unsatisfiable: a small set of dependency edges and forced
    /// selections that cannot hold together (best effort minimal).
    std::vector<std::string> conflict;
};

SolveResult solve(const ConstraintProblem& problem, WeightedSolver* backend = nullptr);

struct Violation {
    PackageName package;
    Version version;
    Dependency dependency;
    std::optional<Version> found;

    std::string str() const;
};

/// Every dependency edge of an assigned release whose target is assigned a
/// version outside the edge's specifier.
std::vector<Violation> validate(const Assignment& assignment, const std::map<ReleaseKey, std::vector<Dependency>>& edges);

/// SMT-LIB flavoured text of the formula and its soft weights.
std::string dump_formula(const Formula& f);

}  // namespace reqsolve
