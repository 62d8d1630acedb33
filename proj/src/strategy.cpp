#include "reqsolve/strategy.hpp"

#include "reqsolve/errors.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

namespace reqsolve {

using nlohmann::json;

std::string_view to_string(PlanRationale r) noexcept {
    switch (r) {
        case PlanRationale::target_downgrade: return "target-downgrade";
        case PlanRationale::bidirectional: return "bidirectional";
        case PlanRationale::hold_target_adjust_peer: return "hold-target-adjust-peer";
        case PlanRationale::cascading: return "cascading";
    }
    return "bidirectional";
}

json to_json(const CompatIssue& issue) {
    return {
        {"level", to_string(issue.level)},
        {"kind", to_string(issue.kind)},
        {"package", issue.package.normalized()},
        {"from", issue.from_version ? json(issue.from_version->raw()) : json(nullptr)},
        {"to", issue.to_version.raw()},
        {"entity", issue.entity},
        {"detail", issue.detail},
        {"site", issue.site ? json(issue.site->str()) : json(nullptr)},
        {"chain", issue.chain},
    };
}

json to_json(const Requirements& reqs) {
    json out = json::array();
    for (const auto& pin : reqs) out.push_back({{"name", pin.name.raw()}, {"version", pin.version.raw()}});
    return out;
}

json to_json(const Assignment& assignment) {
    json out = json::object();
    for (const auto& [name, v] : assignment) out[name.normalized()] = v.raw();
    return out;
}

void EventLog::add(const std::string& type, json payload) {
    json event = {{"seq", events_.size() + 1}, {"event", type}};
    for (auto& [k, v] : payload.items()) event[k] = std::move(v);
    events_.push_back(std::move(event));
}

std::vector<Version> bidirectional_order(const std::vector<Version>& candidates, const Version& current) {
    std::vector<Version> out;
    for (const auto& v : candidates)
        if (v > current) out.push_back(v);
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it)
        if (*it < current) out.push_back(*it);
    return out;
}

std::vector<SearchPlan> plan_changes(const CompatIssue& issue, const PackageName& target, const Assignment& current,
                                     KnowledgeStore& store) {
    std::vector<SearchPlan> plans;
    auto bidirectional = [&](const PackageName& subject, PlanRationale why, std::map<PackageName, Version> fixed) {
        auto it = current.find(subject);
        if (it == current.end()) return;
        plans.push_back({subject, bidirectional_order(store.candidates(subject), it->second), why, std::move(fixed)});
    };

    if (issue.level == IssueLevel::project_tpl) {
        if (issue.package == target) {
            auto it = current.find(target);
            if (it != current.end()) {
                SearchPlan plan{target, {}, PlanRationale::target_downgrade, {}};
                const auto& cands = store.candidates(target);
                for (auto c = cands.rbegin(); c != cands.rend(); ++c)
                    if (*c < it->second) plan.candidates.push_back(*c);
                plans.push_back(std::move(plan));
            }
        } else {
            bidirectional(issue.package, PlanRationale::bidirectional, {});
        }
    } else {
        const PackageName terminal = issue.package;
        const std::optional<PackageName> peer =
            issue.chain.size() >= 3 ? std::optional<PackageName>(issue.chain[issue.chain.size() - 2]) : std::nullopt;
        if (terminal == target) {
            if (peer) bidirectional(*peer, PlanRationale::hold_target_adjust_peer, {});
        } else if (peer && *peer == target) {
            bidirectional(terminal, PlanRationale::hold_target_adjust_peer, {});
        } else {
            bidirectional(terminal, PlanRationale::cascading, {});
            auto held = current.find(terminal);
            if (peer && held != current.end())
                bidirectional(*peer, PlanRationale::cascading, {{terminal, held->second}});
        }
    }
    std::erase_if(plans, [](const SearchPlan& p) { return p.candidates.empty(); });
    if (plans.empty()) throw NoPlan("no alternative versions to try for " + std::string(to_string(issue.kind)) + " issue on " + issue.entity);
    return plans;
}

Completion complete_missing(const Requirements& reqs, KnowledgeStore& store) {
    Completion c{reqs, {}, {}};
    std::set<PackageName> given_up;
    while (true) {
        std::map<PackageName, std::vector<Specifier>> wanted;
        for (const auto& pin : c.requirements) {
            try {
                for (const auto& d : store.dependencies(pin.name, pin.version))
                    if (!c.requirements.contains(d.name) && !given_up.count(d.name)) wanted[d.name].push_back(d.spec);
            } catch (const MetadataMissing&) {
            }
        }
        if (wanted.empty()) break;
        for (const auto& [name, specs] : wanted) {
            std::optional<Version> pick;
            if (store.known(name)) {
                for (const auto& v : store.candidates(name)) {
                    if (std::all_of(specs.begin(), specs.end(), [&](const Specifier& s) { return s.contains(v); })) {
                        pick = v;
                        break;
                    }
                }
            }
            if (!pick) {
                std::string text = name.raw() + " (";
                for (std::size_t i = 0; i < specs.size(); ++i) text += (i ? "; " : "") + specs[i].str();
                c.unsatisfiable.push_back(text + ")");
                given_up.insert(name);
                continue;
            }
            c.requirements.add(name, *pick);
            c.added.emplace_back(name, *pick);
        }
    }
    return c;
}

// ---------------------------------------------------------------------------

namespace {

using Overrides = std::map<PackageName, Version>;

std::string issue_key(const CompatIssue& i) {
    return std::string(to_string(i.kind)) + "|" + i.package.normalized() + "|" + i.entity;
}

json overrides_json(const Overrides& o) {
    json out = json::object();
    for (const auto& [k, v] : o) out[k.normalized()] = v.raw();
    return out;
}

class Inference {
public:
    Inference(const InferenceInput& input, KnowledgeStore& store, const InferenceOptions& options,
              InferenceResult& result)
        : in_(input), store_(store), opts_(options), out_(result), project_(input.project),
          started_(std::chrono::steady_clock::now()) {}

    void run();

private:
    struct Round {
        bool sat = false;
        Assignment assignment;
        std::vector<CompatIssue> issues;
    };
    struct Frame {
        CompatIssue issue;
        std::vector<SearchPlan> plans;
        std::size_t plan = 0;
        std::size_t candidate = 0;
        Overrides base;
    };

    Round evaluate(const Overrides& overrides);
    const UsageSet& usage_for(const ChangeTriple& t, const std::vector<CallChain>& chains, const Assignment& a);
    std::optional<Frame> open_frame(const CompatIssue& issue, const Assignment& a, Overrides base);
    bool over_budget() const;
    void succeed(const Round& r);
    void fall_back(std::string reason, const std::vector<CompatIssue>& open);

    const InferenceInput& in_;
    KnowledgeStore& store_;
    const InferenceOptions& opts_;
    InferenceResult& out_;
    ProjectSources project_;
    std::chrono::steady_clock::time_point started_;
    std::map<std::string, UsageSet> usage_cache_;
    std::set<std::pair<PackageName, Version>> tried_;
};

bool Inference::over_budget() const {
    return out_.iterations >= opts_.max_iterations || std::chrono::steady_clock::now() - started_ > opts_.wall_clock;
}

const UsageSet& Inference::usage_for(const ChangeTriple& t, const std::vector<CallChain>& chains, const Assignment& a) {
    std::string key = t.package.normalized() + "|" + t.from_version->raw() + "|" + t.to_version.raw();
    for (const auto& c : chains) {
        key += "|";
        for (const auto& n : c.nodes) {
            auto it = a.find(PackageName(n));
            key += n + "=" + (it == a.end() ? "" : it->second.raw()) + ",";
        }
    }
    auto it = usage_cache_.find(key);
    if (it != usage_cache_.end()) return it->second;
    ExtractionOptions eo;
    eo.max_depth = opts_.max_depth;
    return usage_cache_.emplace(key, assemble_usage_set(t, project_, chains, a, store_, eo)).first->second;
}

Inference::Round Inference::evaluate(const Overrides& overrides) {
    ++out_.iterations;
    Round round;
    auto target_it = overrides.find(in_.target);
    const Version target_version = target_it == overrides.end() ? in_.target_version : target_it->second;

    std::vector<std::string> notes;
    auto problem = build_problem(in_.start, in_.target, target_version, store_, {}, &notes);
    for (const auto& [name, v] : overrides) {
        auto vars = problem.variables.find(name);
        if (vars == problem.variables.end() || std::find(vars->second.begin(), vars->second.end(), v) == vars->second.end()) {
            out_.log.add("solve", {{"iteration", out_.iterations}, {"overrides", overrides_json(overrides)},
                                   {"status", "unsat"}, {"conflict", {"override " + name.raw() + "==" + v.raw() + " is not a candidate"}}});
            return round;
        }
        problem.pinned[name] = v;
        problem.forced[name] = v;
    }
    if (!out_.first_formula) out_.first_formula = encode(problem);

    auto solved = solve(problem);
    json event = {{"iteration", out_.iterations}, {"overrides", overrides_json(overrides)}, {"notes", notes}};
    if (!solved.assignment) {
        event["status"] = "unsat";
        event["conflict"] = solved.conflict;
        out_.log.add("solve", event);
        return round;
    }
    event["status"] = "sat";
    event["objective"] = solved.objective;
    event["assignment"] = to_json(*solved.assignment);
    out_.log.add("solve", event);
    round.sat = true;
    round.assignment = *solved.assignment;

    const auto graph = dependency_graph(in_.start, round.assignment, store_);
    for (const auto& t : diff_assignments(in_.start, round.assignment)) {
        json change = {{"package", t.package.normalized()},
                       {"from", t.from_version ? json(t.from_version->raw()) : json(nullptr)},
                       {"to", t.to_version.raw()}};
        if (!t.from_version) {
            change["assessed"] = false;
            out_.log.add("change", change);
            continue;
        }
        const auto chains = find_call_chains(graph, t.package.normalized());
        const auto& usage = usage_for(t, chains, round.assignment);
        json chain_text = json::array();
        for (const auto& c : chains) chain_text.push_back(c.str());
        change["assessed"] = true;
        change["chains"] = chain_text;
        change["apis"] = usage.apis.size();
        change["modules"] = usage.modules.size();
        change["notes"] = usage.notes;
        out_.log.add("change", change);
        for (auto& i : assess(t, usage, store_)) round.issues.push_back(std::move(i));
    }
    std::sort(round.issues.begin(), round.issues.end(), issue_order);
    json list = json::array();
    for (const auto& i : round.issues) list.push_back(to_json(i));
    out_.log.add("assessment", {{"iteration", out_.iterations}, {"issues", list}});
    return round;
}

std::optional<Inference::Frame> Inference::open_frame(const CompatIssue& issue, const Assignment& a, Overrides base) {
    Frame f{issue, {}, 0, 0, std::move(base)};
    try {
        f.plans = plan_changes(issue, in_.target, a, store_);
    } catch (const NoPlan& e) {
        out_.log.add("plan", {{"issue", to_json(issue)}, {"plans", json::array()}, {"note", e.what()}});
        return std::nullopt;
    }
    json plans = json::array();
    for (const auto& p : f.plans) {
        json cands = json::array();
        for (const auto& v : p.candidates) cands.push_back(v.raw());
        plans.push_back({{"subject", p.subject.normalized()},
                         {"rationale", to_string(p.rationale)},
                         {"candidates", cands},
                         {"fixed", overrides_json(p.fixed)}});
    }
    out_.log.add("plan", {{"issue", to_json(issue)}, {"plans", plans}});
    return f;
}

void Inference::succeed(const Round& r) {
    Requirements pins;
    for (const auto& pin : in_.start) pins.add(pin.name, r.assignment.at(pin.name));
    auto completion = complete_missing(pins, store_);
    json added = json::array();
    for (const auto& [n, v] : completion.added) added.push_back({{"name", n.raw()}, {"version", v.raw()}});
    out_.log.add("completion", {{"added", added}, {"unsatisfiable", completion.unsatisfiable}});
    out_.success = true;
    out_.requirements = completion.requirements;
    out_.completed = completion.added;
    out_.log.add("verdict", {{"status", "compatible"}, {"iterations", out_.iterations}});
}

void Inference::fall_back(std::string reason, const std::vector<CompatIssue>& open) {
    out_.success = false;
    out_.reason = std::move(reason);
    out_.remaining = open;
    out_.requirements = in_.start;
    out_.requirements.set(in_.target, in_.target_version);
    out_.log.add("verdict", {{"status", "fallback"}, {"reason", out_.reason}, {"iterations", out_.iterations}});
}

void Inference::run() {
    out_.log.add("start", {{"target", in_.target.normalized()},
                           {"from", in_.start.find(in_.target) ? json(in_.start.find(in_.target)->raw()) : json(nullptr)},
                           {"to", in_.target_version.raw()},
                           {"requirements", to_json(in_.start)}});
    if (!project_.parse_failures().empty()) out_.log.add("parse-failures", {{"files", project_.parse_failures()}});

    auto first = evaluate({});
    out_.detected = first.issues;
    if (!first.sat) return fall_back("the target version conflicts with the pinned requirements", {});
    if (first.issues.empty()) return succeed(first);

    std::vector<Frame> stack;
    if (auto f = open_frame(first.issues.front(), first.assignment, {})) stack.push_back(std::move(*f));
    std::vector<CompatIssue> open = first.issues;

    while (!stack.empty()) {
        if (over_budget()) return fall_back("budget exhausted", open);
        auto& frame = stack.back();
        std::optional<std::pair<const SearchPlan*, Version>> next;
        while (frame.plan < frame.plans.size() && !next) {
            const auto& plan = frame.plans[frame.plan];
            if (frame.candidate >= plan.candidates.size()) {
                ++frame.plan;
                frame.candidate = 0;
                continue;
            }
            const auto& v = plan.candidates[frame.candidate++];
            if (tried_.insert({plan.subject, v}).second) next.emplace(&plan, v);
        }
        if (!next) {
            out_.log.add("backtrack", {{"issue", to_json(frame.issue)}});
            stack.pop_back();
            continue;
        }

        auto [plan, version] = *next;
        Overrides trial = frame.base;
        for (const auto& [k, v] : plan->fixed) trial[k] = v;
        trial[plan->subject] = version;
        out_.log.add("trial", {{"subject", plan->subject.normalized()},
                               {"version", version.raw()},
                               {"rationale", to_string(plan->rationale)},
                               {"overrides", overrides_json(trial)}});
        Round r;
        try {
            r = evaluate(trial);
        } catch (const Error& e) {
            out_.log.add("trial-error", {{"kind", e.kind()}, {"message", e.what()}});
            continue;
        }
        if (!r.sat) continue;
        if (r.issues.empty()) return succeed(r);
        open = r.issues;

        const auto key = issue_key(frame.issue);
        const bool persists = std::any_of(r.issues.begin(), r.issues.end(),
                                          [&](const CompatIssue& i) { return issue_key(i) == key; });
        if (persists) continue;
        if (auto f = open_frame(r.issues.front(), r.assignment, trial)) stack.push_back(std::move(*f));
    }
    fall_back("every candidate version of every plan failed", open);
}

}  // namespace

InferenceResult run_inference(const InferenceInput& input, KnowledgeStore& store, const InferenceOptions& options) {
    InferenceResult result;
    Inference(input, store, options, result).run();
    return result;
}

}  // namespace reqsolve
