#pragma once

// Name resolution over the reduced syntax tree: module-level bindings,
// class members and bases, and a body walker that reports every dotted
// reference with the path it resolves to.

#include "reqsolve/python/ast.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reqsolve::analysis {

struct Binding {
    std::string path;
    bool value = false;  // instance or return value of `path` rather than `path` itself
    bool self = false;   // the implicit instance inside a method
};

struct ClassData {
    std::string path;
    const py::Stmt* stmt = nullptr;
    std::vector<Binding> bases;
    std::set<std::string> members;
    std::map<std::string, Binding> instance_attrs;
};

class ModuleContext {
public:
    ModuleContext(std::string name, bool is_package, const py::Module& module);

    const std::string& name() const { return name_; }
    bool is_package() const { return is_package_; }
    const py::Module& module() const { return *module_; }

    const std::map<std::string, Binding>& globals() const { return globals_; }
    /// Local dotted path ("f", "C", "C.m", "f.inner") -> definition.
    const std::map<std::string, const py::Stmt*>& definitions() const { return defs_; }
    const std::map<std::string, ClassData>& classes() const { return classes_; }
    /// Modules brought in by `from x import *` (absolute).
    const std::vector<std::string>& star_imports() const { return stars_; }

    /// Absolute module for a from-import in this module.
    std::optional<std::string> absolute(int level, const std::string& module) const;

private:
    void scan_globals(const py::Body& body);
    void scan_definitions(const std::string& prefix, const py::Body& body, bool in_class);
    void scan_class(const std::string& local, const py::Stmt& s);

    std::string name_;
    bool is_package_;
    const py::Module* module_;
    std::map<std::string, Binding> globals_;
    std::map<std::string, const py::Stmt*> defs_;
    std::map<std::string, ClassData> classes_;
    std::vector<std::string> stars_;
};

/// Looks up classes by their full dotted path across modules.
using ClassLookup = std::function<const ClassData*(const std::string& path)>;

struct Reference {
    std::string path;
    bool value = false;
    bool call = false;
    int line = 0;
    const py::Expr* expr = nullptr;  // the call (when `call`) or the chain
};

using ReferenceSink = std::function<void(const Reference&)>;

/// Binds `from` / `import` statements and assignments into `scope`.
void bind_import(const ModuleContext& ctx, const py::Stmt& s, std::map<std::string, std::optional<Binding>>& scope);

/// Walks bodies of one module, emitting resolved references.
class BodyWalker {
public:
    BodyWalker(const ModuleContext& ctx, ClassLookup classes, ReferenceSink sink);

    /// Module-level statements only (function bodies are not entered).
    void walk_module_level();
    /// One function body; `owner` is the enclosing class for methods.
    void walk_function(const py::Stmt& def, const ClassData* owner);
    /// Statements of a class body other than method definitions.
    void walk_class_level(const ClassData& cls);
    /// Every statement of the module, including all function and class bodies.
    void walk_everything();

    /// Resolves an attribute of a class instance through members and bases.
    std::optional<Binding> member(const ClassData& cls, const std::string& attr, int depth = 0) const;

private:
    using Scope = std::map<std::string, std::optional<Binding>>;

    void walk_body(const py::Body& body, Scope& scope, bool enter_defs);
    void walk_stmt(const py::Stmt& s, Scope& scope, bool enter_defs);
    void visit(const py::Expr& e, const Scope& scope);
    void visit_chain_inner(const py::Expr& e, const Scope& scope);
    std::optional<Binding> resolve(const py::Expr& e, const Scope& scope) const;
    std::optional<Binding> lookup(const std::string& name, const Scope& scope) const;
    void assign(const py::Expr& target, std::optional<Binding> value, Scope& scope);

    const ModuleContext& ctx_;
    ClassLookup classes_;
    ReferenceSink sink_;
    const ClassData* owner_ = nullptr;
    std::string self_name_;
};

/// Resolves an expression using module globals only.
std::optional<Binding> resolve_global(const ModuleContext& ctx, const py::Expr& e);

}  // namespace reqsolve::analysis
