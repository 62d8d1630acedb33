#pragma once

#include "reqsolve/assessment.hpp"
#include "reqsolve/extraction.hpp"
#include "reqsolve/knowledge.hpp"
#include "reqsolve/solver.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace reqsolve {

enum class PlanRationale { target_downgrade, bidirectional, hold_target_adjust_peer, cascading };
std::string_view to_string(PlanRationale r) noexcept;

struct SearchPlan {
    PackageName subject;
    std::vector<Version> candidates;
    PlanRationale rationale = PlanRationale::bidirectional;
    /// Selections held for every candidate of this plan (the terminal
    /// package in the second stage of a cascade).
    std::map<PackageName, Version> fixed;
};

/// Newer versions ascending, then older ones descending; `current` excluded.
std::vector<Version> bidirectional_order(const std::vector<Version>& candidates, const Version& current);

/// Plans for one issue under the current assignment. Throws NoPlan when no
/// subject has an alternative version.
std::vector<SearchPlan> plan_changes(const CompatIssue& issue, const PackageName& target, const Assignment& current,
                                     KnowledgeStore& store);

/// Appends a sequence number to every event so the log is ordered without
/// wall-clock times.
class EventLog {
public:
    void add(const std::string& type, nlohmann::json payload = nlohmann::json::object());
    const nlohmann::json& events() const { return events_; }

private:
    nlohmann::json events_ = nlohmann::json::array();
};

struct Completion {
    Requirements requirements;
    std::vector<std::pair<PackageName, Version>> added;
    std::vector<std::string> unsatisfiable;  // "name (spec)"
};

/// Adds every dependency of a pinned release that is not pinned itself, at
/// the oldest candidate satisfying all collected constraints, until closed.
/// Existing pins are never altered.
Completion complete_missing(const Requirements& reqs, KnowledgeStore& store);

struct InferenceInput {
    Requirements start;
    PackageName target;
    Version target_version;
    fs::path project;
};

struct InferenceOptions {
    int max_iterations = 50;
    std::chrono::seconds wall_clock{600};
    int max_depth = 10;
};

struct InferenceResult {
    bool success = false;
    Requirements requirements;
    std::string reason;                       // why the run fell back
    std::vector<CompatIssue> detected;        // issues of the first assessment
    std::vector<CompatIssue> remaining;       // open issues when the run ended
    std::vector<std::pair<PackageName, Version>> completed;
    int iterations = 0;
    std::optional<Formula> first_formula;     // for --dump-formula
    EventLog log;
};

/// The fix-point loop: solve, extract, assess, and retry with the next
/// untried version of the active plan until compatible or out of options.
/// On failure the result holds the starting pins with only the target bumped.
InferenceResult run_inference(const InferenceInput& input, KnowledgeStore& store, const InferenceOptions& options = {});

nlohmann::json to_json(const CompatIssue& issue);
nlohmann::json to_json(const Requirements& reqs);
nlohmann::json to_json(const Assignment& assignment);

}  // namespace reqsolve
