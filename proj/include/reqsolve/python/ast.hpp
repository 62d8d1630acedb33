#pragma once

// A reduced syntax tree for Python 3 sources. It keeps exactly what the
// inventory and usage analyses need (imports, definitions with parameter
// lists, assignments, names/attributes/calls with argument shapes) and folds
// every other expression form into `Expr::Kind::other` with its children.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reqsolve::py {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Keyword {
    std::string name;  // empty for `**mapping`
    ExprPtr value;
};

struct Expr {
    enum class Kind { name, attribute, call, subscript, constant, starred, lambda, other };

    Kind kind = Kind::other;
    int line = 0;
    std::string id;                 // name: identifier, attribute: attribute name
    ExprPtr base;                   // attribute/subscript value, call callee, starred value
    std::vector<ExprPtr> args;      // call positional args (may contain starred)
    std::vector<Keyword> keywords;  // call keyword args
    std::vector<ExprPtr> children;  // everything else (operands, slices, elements, bodies)

    /// `a.b.c` for a pure name/attribute chain, nullopt otherwise.
    std::optional<std::string> dotted() const;
};

struct Param {
    enum class Kind { positional, keyword_only, var_positional, var_keyword };

    std::string name;
    Kind kind = Kind::positional;
    bool positional_only = false;
    bool has_default = false;
    std::optional<std::string> annotation;
};

struct ImportAlias {
    std::string name;    // dotted module (import) or member name (from-import); "*" for star
    std::string asname;  // empty when absent
};

struct Stmt;
using Body = std::vector<Stmt>;

struct Stmt {
    enum class Kind {
        import,       // aliases
        import_from,  // module, level, aliases
        function_def, // name, params, decorators, body
        class_def,    // name, bases, class_keywords, decorators, body
        assign,       // targets (one per `=`), value (may be null for bare annotation), annotation
        aug_assign,   // targets[0], value
        expr,         // exprs
        ret,          // exprs
        compound,     // if/for/while/with/try/match: header exprs + bodies
        other,
    };

    Kind kind = Kind::other;
    int line = 0;

    std::string name;
    std::string module;
    int level = 0;
    std::vector<ImportAlias> aliases;

    std::vector<Param> params;
    std::vector<ExprPtr> decorators;
    std::vector<ExprPtr> bases;
    std::vector<Keyword> class_keywords;

    std::vector<ExprPtr> targets;
    ExprPtr value;
    std::optional<std::string> annotation;

    std::vector<ExprPtr> exprs;
    std::vector<Body> bodies;  // function/class body is bodies[0]

    const Body& body() const { return bodies.front(); }
};

struct Module {
    Body body;
};

/// Throws ParseFailure (message carries `file:line`).
Module parse_module(std::string_view source, std::string_view filename = "<string>");

}  // namespace reqsolve::py
