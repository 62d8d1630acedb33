#pragma once

#include "reqsolve/extraction.hpp"
#include "reqsolve/inventory.hpp"
#include "reqsolve/knowledge.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reqsolve {

enum class IssueLevel { project_tpl, tpl_tpl };
enum class IssueKind { module, api_name, api_param };

std::string_view to_string(IssueLevel level) noexcept;
std::string_view to_string(IssueKind kind) noexcept;

struct CompatIssue {
    IssueLevel level = IssueLevel::project_tpl;
    IssueKind kind = IssueKind::module;
    PackageName package;
    std::optional<Version> from_version;
    Version to_version;
    std::string entity;
    std::string detail;
    std::optional<Site> site;
    std::vector<std::string> chain;
};

/// Module < ApiName < ApiParam, Project-TPL before TPL-TPL, then entity and site.
bool issue_order(const CompatIssue& a, const CompatIssue& b);

enum class ParamChangeKind { removed, added_required, added_defaulted, renamed, position_moved, kind_converted };
std::string_view to_string(ParamChangeKind c) noexcept;

struct ParamChange {
    std::string name;      // the old name; the new one for added parameters
    std::string new_name;  // renamed only
    Parameter::Kind kind_before = Parameter::Kind::positional;
    Parameter::Kind kind_after = Parameter::Kind::positional;
    ParamChangeKind change = ParamChangeKind::removed;
    std::optional<int> position_before;  // index among positional parameters
    std::optional<int> position_after;

    friend bool operator==(const ParamChange&, const ParamChange&) = default;
};

/// S_1: modules of v1 missing from v2.
std::set<std::string> removed_modules(const ModuleInventory& v1, const ModuleInventory& v2);
/// S_2: APIs of v1 neither defined in v2 nor re-exported under the same name.
std::set<std::string> removed_apis(const CodeInventory& v1, const CodeInventory& v2);

std::vector<CompatIssue> assess_modules(const ChangeTriple& triple, const UsageSet& usage,
                                        const std::set<std::string>& s1);
/// Uses whose restored name is in S_2 and whose name as written no longer
/// resolves in v2.
std::vector<CompatIssue> assess_api_names(const ChangeTriple& triple, const UsageSet& usage,
                                          const std::set<std::string>& s2, const CodeInventory& v2);

/// Maps parameters by name, then pairs leftover positional parameters at the
/// same index with consistent annotations as renames. Variadic parameters
/// are never mapped.
std::vector<ParamChange> diff_parameters(const ApiSignature& s1, const ApiSignature& s2);

enum class Passing { not_passed, by_position, by_name };
std::string_view to_string(Passing p) noexcept;

/// The decision table: compatibility of one change under one passing method.
bool param_verdict(Parameter::Kind kind_before, ParamChangeKind change, Passing passing);

/// How `use` supplies a v1 parameter (or, for added parameters, a v2 one).
Passing passing_of(const ApiUse& use, const ApiSignature& sig, const Parameter& param);

/// First incompatible parameter of `use` against one signature pair, as a
/// human-readable reason; nullopt when compatible. Variadics of v2 absorb
/// removed and renamed arguments; a splat in the call suppresses
/// missing-argument verdicts.
std::optional<std::string> check_call(const ApiUse& use, const ApiSignature& s1, const ApiSignature& s2);

/// ApiParam issue when no overload pair accepts the call.
std::optional<CompatIssue> assess_parameters(const ChangeTriple& triple, const ApiUse& use, const ApiEntry& e1,
                                             const ApiEntry& e2);

/// Module, API-name and parameter issues of one changed package, sorted and
/// deduplicated by (kind, entity, site).
std::vector<CompatIssue> assess(const ChangeTriple& triple, const UsageSet& usage, const CodeInventory& v1,
                                const CodeInventory& v2);
std::vector<CompatIssue> assess(const ChangeTriple& triple, const UsageSet& usage, KnowledgeStore& store);

}  // namespace reqsolve
