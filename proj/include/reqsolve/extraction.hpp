#pragma once

#include "reqsolve/inventory.hpp"
#include "reqsolve/knowledge.hpp"
#include "reqsolve/solver.hpp"
#include "reqsolve/versioning.hpp"

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reqsolve {

namespace fs = std::filesystem;

enum class Provenance { direct, chain, import_closure };
std::string_view to_string(Provenance p) noexcept;

struct Site {
    std::string file;  // project-relative, or `package==version/relative/path.py`
    int line = 0;

    friend auto operator<=>(const Site&, const Site&) = default;
    std::string str() const { return file + ":" + std::to_string(line); }
};

/// A package whose version moved between the starting pins and a solution.
/// `from_version` is empty for newly introduced packages.
struct ChangeTriple {
    PackageName package;
    std::optional<Version> from_version;
    Version to_version;
};

std::vector<ChangeTriple> diff_assignments(const Requirements& start, const Assignment& solved);

/// Reserved first node of every call chain.
inline constexpr const char* project_node = "project";

/// Normalized package names, `project` first, target last.
struct CallChain {
    std::vector<std::string> nodes;

    friend auto operator<=>(const CallChain&, const CallChain&) = default;
    std::string str() const;
};

/// Successor lists; `project` points at every pinned package.
using DependencyGraph = std::map<std::string, std::set<std::string>>;

/// Project edges to every pinned package plus the dependency edges of every
/// assigned release (limited to assigned packages).
DependencyGraph dependency_graph(const Requirements& pins, const Assignment& assignment, KnowledgeStore& store);

/// All simple paths from `project` to `target`, sorted.
std::vector<CallChain> find_call_chains(const DependencyGraph& graph, const std::string& target);

/// One reference to a library name found in code. Non-call references are
/// attribute reads (`PIL.PILLOW_VERSION`) and imported names.
struct ApiUse {
    std::string name;  // dotted path as reconstructed from imports and assignments
    std::string fqn;   // after restoration; empty when unresolved
    bool call = false;
    int positional = 0;
    std::vector<std::string> keywords;
    bool star = false;   // `*args` in the call
    bool dstar = false;  // `**kwargs` in the call
    Site site;
    Provenance provenance = Provenance::direct;
    std::vector<std::string> chain;
};

struct ModuleUse {
    std::string path;
    Site site;
    Provenance provenance = Provenance::direct;
    std::vector<std::string> chain;
};

/// S_a and S_m for one changed package.
struct UsageSet {
    std::vector<ApiUse> apis;
    std::vector<ModuleUse> modules;
    std::vector<std::string> notes;
    /// Set when names were resolved against the solved version because the
    /// package is new.
    bool resolved_against_solved = false;

    /// Deduplicated by (name, site).
    void add(ApiUse use);
    /// Deduplicated by path; the first site is kept.
    void add(ModuleUse use);
    bool empty() const { return apis.empty() && modules.empty(); }
};

/// The project under analysis: every parseable .py file below its root.
/// Name resolution runs once; the references are filtered per package later.
class ProjectSources {
public:
    explicit ProjectSources(fs::path root);
    ~ProjectSources();
    ProjectSources(ProjectSources&&) noexcept;
    ProjectSources& operator=(ProjectSources&&) noexcept;

    const fs::path& root() const { return root_; }
    const std::vector<std::string>& parse_failures() const { return failures_; }

    struct ImportUse {
        std::string name;  // `a.b` for `import a.b`, `a.b.c` for `from a.b import c`
        bool star = false;
        Site site;
    };

    /// Every reference rooted at one of `roots`.
    std::vector<ApiUse> references(const std::set<std::string>& roots) const;
    /// Absolute imports whose first segment is in `roots`.
    std::vector<ImportUse> imports(const std::set<std::string>& roots) const;

    static bool excluded_directory(const std::string& name);

private:
    struct Impl;
    fs::path root_;
    std::vector<std::string> failures_;
    std::unique_ptr<Impl> impl_;
};

/// Direct uses of the packages owning `roots`: calls and attribute reads
/// (S_a) and imported modules (S_m), unrestored.
UsageSet extract_direct_usage(const ProjectSources& project, const std::set<std::string>& roots);

double name_similarity(std::string_view a, std::string_view b);

struct Restored {
    enum class How { exact, module, simplified, prefix, fuzzy, unresolved };
    How how = How::unresolved;
    std::string fqn;
};

/// Maps a reconstructed name onto the API inventory: exact key, module,
/// re-export, longest re-exported or class prefix, then fuzzy match on
/// names sharing the last segment (similarity >= 0.5, ties to the shorter
/// and then lexicographically smaller path).
Restored restore_fqn(const std::string& name, const CodeInventory& inv);
/// The non-fuzzy part of `restore_fqn`: an API or module reachable as written.
std::optional<Restored> resolve_exact(const std::string& name, const CodeInventory& inv);

inline constexpr double fuzzy_threshold = 0.5;

struct CallGraphNode {
    std::string name;
    std::string caller;
    std::string location;  // definition reached, empty when unknown
    std::string owner;     // package owning the callee

    friend auto operator<=>(const CallGraphNode&, const CallGraphNode&) = default;
};

struct CallGraph {
    std::vector<CallGraphNode> nodes;
    std::vector<ApiUse> boundary;           // references into the next package
    std::set<std::string> entry_modules;    // modules holding the located entries
    std::vector<std::string> unresolved;    // entries that could not be located
};

struct CallGraphOptions {
    std::string package;                  // owner label for internal nodes
    std::set<std::string> own_roots;
    std::string next_package;
    std::set<std::string> next_roots;
    std::string site_prefix;              // prepended to file paths of sites
    int max_depth = 10;
};

/// Grows the call graph of one library from `entries`, following calls into
/// its own modules and recording every reference into the next package.
CallGraph build_on_demand_call_graph(const std::vector<std::string>& entries, ParsedSources& sources,
                                     const SimplificationMap& simplify, const CallGraphOptions& options);

/// Import closure over library modules: every module imported by a module
/// in the set (and every enclosing package) that exists in the tree.
std::set<std::string> find_related_files(const std::set<std::string>& entry_modules, ParsedSources& sources);

/// Names introduced by import statements of `modules` that start with one
/// of `roots`, as written.
std::vector<ProjectSources::ImportUse> extract_import_apis(const std::set<std::string>& modules, ParsedSources& sources,
                                                           const std::set<std::string>& roots,
                                                           const std::string& site_prefix = "");

/// Dotted prefixes of two or more segments, plus the whole name.
std::set<std::string> derive_import_modules(const std::string& raw_name);

struct ExtractionOptions {
    int max_depth = 10;
};

/// S_a and S_m of `triple.package` for the project under `solved`: direct
/// uses plus, for each longer chain, the call-graph boundary uses and the
/// import closure of the last intermediate package. Names are restored
/// against the starting version; modules and APIs absent from it are dropped.
UsageSet assemble_usage_set(const ChangeTriple& triple, const ProjectSources& project,
                            const std::vector<CallChain>& chains, const Assignment& solved, KnowledgeStore& store,
                            const ExtractionOptions& options = {});

}  // namespace reqsolve
