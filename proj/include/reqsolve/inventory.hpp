#pragma once

#include "reqsolve/python/ast.hpp"
#include "reqsolve/versioning.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace reqsolve {

namespace fs = std::filesystem;

/// One importable module found under an import root.
struct SourceModule {
    std::string name;  // dotted path
    fs::path file;     // .py or .pyi (the `__init__` file for packages)
    bool is_package = false;
    bool is_stub = false;
};

/// Scan of an unpacked distribution. Directories that are caches, tests,
/// docs, build output or hidden are never entered.
class SourceTree {
public:
    explicit SourceTree(fs::path import_root);

    const fs::path& root() const noexcept { return root_; }
    /// Keyed by dotted name; a module with both .py and .pyi keeps the .py.
    const std::map<std::string, SourceModule>& modules() const noexcept { return modules_; }
    /// Stub files shadowed by a .py of the same module.
    const std::map<std::string, SourceModule>& extra_stubs() const noexcept { return stubs_; }
    const SourceModule* find(const std::string& dotted) const;
    /// Top-level import names (first segments).
    std::set<std::string> top_level() const;

    static bool excluded_directory(const std::string& name);

    /// Finds the directory that holds the top-level packages of an unpacked
    /// archive (descends through a single wrapper directory and `src/`).
    static fs::path locate_import_root(const fs::path& unpacked);

private:
    fs::path root_;
    std::map<std::string, SourceModule> modules_;
    std::map<std::string, SourceModule> stubs_;
};

/// Absolute module targeted by a (possibly relative) from-import inside
/// `importer`. Returns nullopt when the level escapes the top package.
std::optional<std::string> resolve_relative_module(const std::string& importer, bool importer_is_package,
                                                   int level, const std::string& module);

struct ModuleInventory {
    PackageName package;
    Version version;
    std::set<std::string> modules;

    bool contains(const std::string& m) const { return modules.count(m) != 0; }
};

struct Parameter {
    using Kind = py::Param::Kind;

    std::string name;
    Kind kind = Kind::positional;
    bool has_default = false;
    std::optional<std::string> annotation;

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

std::string_view to_string(Parameter::Kind kind) noexcept;

struct ApiSignature {
    std::vector<Parameter> parameters;

    bool has_var_positional() const;
    bool has_var_keyword() const;
    friend bool operator==(const ApiSignature&, const ApiSignature&) = default;
};

struct ApiEntry {
    enum class Type { function, class_, variable };

    Type type = Type::function;
    int lineno = 0;
    /// Empty for variables and for classes without an own `__init__`.
    std::vector<ApiSignature> overloads;

    bool has_signature() const { return !overloads.empty(); }
    friend bool operator==(const ApiEntry&, const ApiEntry&) = default;
};

struct ApiInventory {
    PackageName package;
    Version version;
    std::map<std::string, ApiEntry> apis;

    const ApiEntry* find(const std::string& fqn) const {
        auto it = apis.find(fqn);
        return it == apis.end() ? nullptr : &it->second;
    }
};

/// Shortened access path -> fully qualified name.
struct SimplificationMap {
    PackageName package;
    Version version;
    std::map<std::string, std::string> names;

    const std::string* find(const std::string& shortened) const {
        auto it = names.find(shortened);
        return it == names.end() ? nullptr : &it->second;
    }
};

struct CodeInventory {
    ModuleInventory modules;
    ApiInventory apis;
    SimplificationMap simplify;
    std::vector<std::string> parse_failures;  // "file:line: message"
};

/// Dotted module paths for every source file and package directory.
ModuleInventory build_module_inventory(const SourceTree& tree);
ModuleInventory build_module_inventory(const fs::path& import_root);

/// Functions, classes (with nested definitions) and module-level assignments,
/// plus the re-export map. Unparseable files are skipped and listed.
CodeInventory build_code_inventory(const SourceTree& tree);
CodeInventory build_code_inventory(const fs::path& import_root);

/// Cache of parsed modules; parse failures are remembered as null entries.
class ParsedSources {
public:
    explicit ParsedSources(const SourceTree& tree) : tree_(&tree) {}

    const SourceTree& tree() const { return *tree_; }
    /// nullptr when the module is unknown or failed to parse.
    const py::Module* get(const std::string& dotted);
    const std::vector<std::string>& failures() const { return failures_; }

private:
    const SourceTree* tree_;
    std::map<std::string, std::unique_ptr<py::Module>> cache_;
    std::vector<std::string> failures_;
};

/// Parses a file from disk; throws ParseFailure.
py::Module parse_file(const fs::path& file);

// JSON layouts of the knowledge cache files.
nlohmann::json modules_to_json(const ModuleInventory& inv);
ModuleInventory modules_from_json(const nlohmann::json& j, PackageName pkg, Version v);
nlohmann::json apis_to_json(const ApiInventory& inv);
ApiInventory apis_from_json(const nlohmann::json& j, PackageName pkg, Version v);
nlohmann::json simplify_to_json(const SimplificationMap& map);
SimplificationMap simplify_from_json(const nlohmann::json& j, PackageName pkg, Version v);

}  // namespace reqsolve
