#include "reqsolve/assessment.hpp"

#include <algorithm>
#include <tuple>

namespace reqsolve {

std::string_view to_string(IssueLevel level) noexcept {
    return level == IssueLevel::project_tpl ? "Project-TPL" : "TPL-TPL";
}

std::string_view to_string(IssueKind kind) noexcept {
    switch (kind) {
        case IssueKind::module: return "Module";
        case IssueKind::api_name: return "ApiName";
        case IssueKind::api_param: return "ApiParam";
    }
    return "Module";
}

std::string_view to_string(ParamChangeKind c) noexcept {
    switch (c) {
        case ParamChangeKind::removed: return "removed";
        case ParamChangeKind::added_required: return "added-required";
        case ParamChangeKind::added_defaulted: return "added-defaulted";
        case ParamChangeKind::renamed: return "renamed";
        case ParamChangeKind::position_moved: return "position-moved";
        case ParamChangeKind::kind_converted: return "kind-converted";
    }
    return "removed";
}

std::string_view to_string(Passing p) noexcept {
    switch (p) {
        case Passing::not_passed: return "not passed";
        case Passing::by_position: return "passed by position";
        case Passing::by_name: return "passed by name";
    }
    return "not passed";
}

bool issue_order(const CompatIssue& a, const CompatIssue& b) {
    return std::tie(a.kind, a.level, a.entity, a.site) < std::tie(b.kind, b.level, b.entity, b.site);
}

namespace {

IssueLevel level_of(Provenance p) { return p == Provenance::direct ? IssueLevel::project_tpl : IssueLevel::tpl_tpl; }

CompatIssue make_issue(const ChangeTriple& t, IssueKind kind, std::string entity, std::string detail, Site site,
                       Provenance provenance, std::vector<std::string> chain) {
    CompatIssue issue;
    issue.level = level_of(provenance);
    issue.kind = kind;
    issue.package = t.package;
    issue.from_version = t.from_version;
    issue.to_version = t.to_version;
    issue.entity = std::move(entity);
    issue.detail = std::move(detail);
    issue.site = std::move(site);
    issue.chain = std::move(chain);
    return issue;
}

bool variadic(const Parameter& p) {
    return p.kind == Parameter::Kind::var_positional || p.kind == Parameter::Kind::var_keyword;
}

std::optional<int> positional_index(const ApiSignature& sig, const std::string& name) {
    int i = 0;
    for (const auto& p : sig.parameters) {
        if (p.kind != Parameter::Kind::positional) continue;
        if (p.name == name) return i;
        ++i;
    }
    return std::nullopt;
}

const Parameter* find_param(const ApiSignature& sig, const std::string& name) {
    for (const auto& p : sig.parameters)
        if (p.name == name && !variadic(p)) return &p;
    return nullptr;
}

}  // namespace

std::set<std::string> removed_modules(const ModuleInventory& v1, const ModuleInventory& v2) {
    std::set<std::string> out;
    std::set_difference(v1.modules.begin(), v1.modules.end(), v2.modules.begin(), v2.modules.end(),
                        std::inserter(out, out.end()));
    return out;
}

std::set<std::string> removed_apis(const CodeInventory& v1, const CodeInventory& v2) {
    std::set<std::string> out;
    for (const auto& [fqn, _] : v1.apis.apis)
        if (!v2.apis.find(fqn) && !v2.simplify.find(fqn)) out.insert(fqn);
    return out;
}

std::vector<CompatIssue> assess_modules(const ChangeTriple& triple, const UsageSet& usage,
                                        const std::set<std::string>& s1) {
    std::vector<CompatIssue> out;
    for (const auto& m : usage.modules)
        if (s1.count(m.path))
            out.push_back(make_issue(triple, IssueKind::module, m.path,
                                     "module removed in " + triple.to_version.raw(), m.site, m.provenance, m.chain));
    return out;
}

std::vector<CompatIssue> assess_api_names(const ChangeTriple& triple, const UsageSet& usage,
                                          const std::set<std::string>& s2, const CodeInventory& v2) {
    std::vector<CompatIssue> out;
    for (const auto& u : usage.apis) {
        if (!s2.count(u.fqn) || resolve_exact(u.name, v2)) continue;
        std::string detail = "API removed in " + triple.to_version.raw();
        if (u.name != u.fqn) detail += " (used as " + u.name + ")";
        out.push_back(make_issue(triple, IssueKind::api_name, u.fqn, detail, u.site, u.provenance, u.chain));
    }
    return out;
}

std::vector<ParamChange> diff_parameters(const ApiSignature& s1, const ApiSignature& s2) {
    std::vector<ParamChange> out;
    std::set<std::string> mapped1, mapped2;

    for (const auto& p1 : s1.parameters) {
        if (variadic(p1)) continue;
        const auto* p2 = find_param(s2, p1.name);
        if (!p2) continue;
        mapped1.insert(p1.name);
        mapped2.insert(p2->name);
        const auto i1 = positional_index(s1, p1.name);
        const auto i2 = positional_index(s2, p2->name);
        if (p1.kind != p2->kind)
            out.push_back({p1.name, "", p1.kind, p2->kind, ParamChangeKind::kind_converted, i1, i2});
        else if (i1 && i2 && *i1 != *i2)
            out.push_back({p1.name, "", p1.kind, p2->kind, ParamChangeKind::position_moved, i1, i2});
    }

    for (const auto& p1 : s1.parameters) {
        if (variadic(p1) || mapped1.count(p1.name)) continue;
        const auto i1 = positional_index(s1, p1.name);
        bool renamed = false;
        if (i1) {
            for (const auto& p2 : s2.parameters) {
                if (variadic(p2) || mapped2.count(p2.name) || positional_index(s2, p2.name) != i1) continue;
                const bool consistent = !p1.annotation || !p2.annotation || *p1.annotation == *p2.annotation;
                if (!consistent) continue;
                mapped2.insert(p2.name);
                out.push_back({p1.name, p2.name, p1.kind, p2.kind, ParamChangeKind::renamed, i1, i1});
                renamed = true;
                break;
            }
        }
        if (!renamed) out.push_back({p1.name, "", p1.kind, p1.kind, ParamChangeKind::removed, i1, std::nullopt});
    }

    for (const auto& p2 : s2.parameters) {
        if (variadic(p2) || mapped2.count(p2.name)) continue;
        out.push_back({p2.name, "", p2.kind, p2.kind,
                       p2.has_default ? ParamChangeKind::added_defaulted : ParamChangeKind::added_required,
                       std::nullopt, positional_index(s2, p2.name)});
    }
    return out;
}

bool param_verdict(Parameter::Kind kind_before, ParamChangeKind change, Passing passing) {
    switch (change) {
        case ParamChangeKind::removed: return passing == Passing::not_passed;
        case ParamChangeKind::added_required: return passing != Passing::not_passed;
        case ParamChangeKind::added_defaulted: return true;
        case ParamChangeKind::renamed: return passing != Passing::by_name;
        case ParamChangeKind::position_moved: return passing != Passing::by_position;
        case ParamChangeKind::kind_converted:
            return !(kind_before == Parameter::Kind::positional && passing == Passing::by_position);
    }
    return true;
}

Passing passing_of(const ApiUse& use, const ApiSignature& sig, const Parameter& param) {
    const bool named = std::find(use.keywords.begin(), use.keywords.end(), param.name) != use.keywords.end();
    if (param.kind == Parameter::Kind::positional) {
        const auto i = positional_index(sig, param.name);
        if (i && *i < use.positional) return Passing::by_position;
        return named ? Passing::by_name : Passing::not_passed;
    }
    if (param.kind != Parameter::Kind::keyword_only) return Passing::not_passed;
    if (named) return Passing::by_name;
    if (sig.has_var_positional()) return Passing::not_passed;
    int positional = 0, k = -1, seen = 0;
    for (const auto& p : sig.parameters) {
        if (p.kind == Parameter::Kind::positional) ++positional;
        if (p.kind == Parameter::Kind::keyword_only) {
            if (p.name == param.name) k = seen;
            ++seen;
        }
    }
    // Surplus positional arguments would land on keyword-only parameters in order.
    return k >= 0 && k < use.positional - positional ? Passing::by_position : Passing::not_passed;
}

std::optional<std::string> check_call(const ApiUse& use, const ApiSignature& s1, const ApiSignature& s2) {
    for (const auto& ch : diff_parameters(s1, s2)) {
        const bool added = ch.change == ParamChangeKind::added_required || ch.change == ParamChangeKind::added_defaulted;
        const auto* p = added ? find_param(s2, ch.name) : find_param(s1, ch.name);
        if (!p) continue;
        const auto passing = passing_of(use, added ? s2 : s1, *p);
        bool ok = param_verdict(ch.kind_before, ch.change, passing);
        if (!ok) {
            switch (ch.change) {
                case ParamChangeKind::removed:
                    ok = (passing == Passing::by_name && s2.has_var_keyword()) ||
                         (passing == Passing::by_position && s2.has_var_positional());
                    break;
                case ParamChangeKind::renamed: ok = passing == Passing::by_name && s2.has_var_keyword(); break;
                case ParamChangeKind::added_required: ok = use.star || use.dstar; break;
                default: break;
            }
        }
        if (ok) continue;
        std::string reason = "parameter '" + ch.name + "' " + std::string(to_string(ch.change));
        if (ch.change == ParamChangeKind::renamed) reason += " to '" + ch.new_name + "'";
        if (ch.change == ParamChangeKind::kind_converted)
            reason += " (" + std::string(to_string(ch.kind_before)) + " -> " + std::string(to_string(ch.kind_after)) + ")";
        if (ch.change == ParamChangeKind::position_moved)
            reason += " (" + std::to_string(*ch.position_before) + " -> " + std::to_string(*ch.position_after) + ")";
        reason += ", " + std::string(to_string(passing));
        return reason;
    }
    return std::nullopt;
}

std::optional<CompatIssue> assess_parameters(const ChangeTriple& triple, const ApiUse& use, const ApiEntry& e1,
                                             const ApiEntry& e2) {
    if (!use.call || e1.overloads.empty() || e2.overloads.empty()) return std::nullopt;
    std::optional<std::string> first;
    for (const auto& s1 : e1.overloads) {
        for (const auto& s2 : e2.overloads) {
            auto r = check_call(use, s1, s2);
            if (!r) return std::nullopt;
            if (!first) first = std::move(r);
        }
    }
    return make_issue(triple, IssueKind::api_param, use.fqn, *first, use.site, use.provenance, use.chain);
}

std::vector<CompatIssue> assess(const ChangeTriple& triple, const UsageSet& usage, const CodeInventory& v1,
                                const CodeInventory& v2) {
    const auto s1 = removed_modules(v1.modules, v2.modules);
    const auto s2 = removed_apis(v1, v2);
    auto issues = assess_modules(triple, usage, s1);
    for (auto& i : assess_api_names(triple, usage, s2, v2)) issues.push_back(std::move(i));

    for (const auto& u : usage.apis) {
        if (!u.call || s2.count(u.fqn)) continue;
        const auto* e1 = v1.apis.find(u.fqn);
        const ApiEntry* e2 = v2.apis.find(u.fqn);
        if (!e2) {
            auto r = resolve_exact(u.fqn, v2);
            if (!r) r = resolve_exact(u.name, v2);
            if (r && r->how != Restored::How::module) e2 = v2.apis.find(r->fqn);
        }
        if (!e1 || !e2) continue;
        if (auto issue = assess_parameters(triple, u, *e1, *e2)) issues.push_back(std::move(*issue));
    }

    std::sort(issues.begin(), issues.end(), issue_order);
    auto same = [](const CompatIssue& a, const CompatIssue& b) {
        return a.kind == b.kind && a.entity == b.entity && a.site == b.site;
    };
    std::vector<CompatIssue> out;
    for (auto& i : issues) {
        bool dup = false;
        for (const auto& o : out) dup = dup || same(o, i);
        if (!dup) out.push_back(std::move(i));
    }
    return out;
}

std::vector<CompatIssue> assess(const ChangeTriple& triple, const UsageSet& usage, KnowledgeStore& store) {
    if (!triple.from_version || *triple.from_version == triple.to_version || usage.empty()) return {};
    const auto& v1 = store.code(triple.package, *triple.from_version);
    const auto& v2 = store.code(triple.package, triple.to_version);
    return assess(triple, usage, v1, v2);
}

}  // namespace reqsolve
