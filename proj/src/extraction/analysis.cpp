#include "analysis.hpp"

#include "reqsolve/inventory.hpp"

namespace reqsolve::analysis {

namespace {

bool is_staticmethod(const py::Stmt& def) {
    for (const auto& d : def.decorators) {
        auto name = d->dotted();
        if (name && (*name == "staticmethod" || name->ends_with(".staticmethod"))) return true;
    }
    return false;
}

std::string self_parameter(const py::Stmt& def) {
    if (is_staticmethod(def) || def.params.empty()) return "";
    const auto& p = def.params.front();
    return p.kind == py::Param::Kind::positional ? p.name : "";
}

void collect_names(const py::Expr& target, std::vector<std::string>& out) {
    if (target.kind == py::Expr::Kind::name) {
        out.push_back(target.id);
    } else if (target.kind == py::Expr::Kind::starred && target.base) {
        collect_names(*target.base, out);
    } else if (target.kind == py::Expr::Kind::other) {
        for (const auto& c : target.children) collect_names(*c, out);
    }
}

// Resolution shared by module scans: names, attribute chains and calls.
template <typename Lookup>
std::optional<Binding> resolve_plain(const py::Expr& e, const Lookup& lookup) {
    switch (e.kind) {
        case py::Expr::Kind::name: return lookup(e.id);
        case py::Expr::Kind::attribute: {
            if (!e.base) return std::nullopt;
            auto b = resolve_plain(*e.base, lookup);
            if (!b || b->self) return std::nullopt;
            return Binding{b->path + "." + e.id, b->value, false};
        }
        case py::Expr::Kind::call: {
            if (!e.base) return std::nullopt;
            auto b = resolve_plain(*e.base, lookup);
            if (!b || b->self) return std::nullopt;
            return Binding{b->path, true, false};
        }
        default: return std::nullopt;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

ModuleContext::ModuleContext(std::string name, bool is_package, const py::Module& module)
    : name_(std::move(name)), is_package_(is_package), module_(&module) {
    scan_globals(module.body);
    scan_definitions("", module.body, false);
}

std::optional<std::string> ModuleContext::absolute(int level, const std::string& module) const {
    return resolve_relative_module(name_, is_package_, level, module);
}

void bind_import(const ModuleContext& ctx, const py::Stmt& s, std::map<std::string, std::optional<Binding>>& scope) {
    if (s.kind == py::Stmt::Kind::import) {
        for (const auto& a : s.aliases) {
            if (!a.asname.empty()) scope[a.asname] = Binding{a.name, false, false};
            else {
                const auto top = a.name.substr(0, a.name.find('.'));
                scope[top] = Binding{top, false, false};
            }
        }
    } else if (s.kind == py::Stmt::Kind::import_from) {
        auto base = ctx.absolute(s.level, s.module);
        for (const auto& a : s.aliases) {
            if (a.name == "*") continue;
            const auto& local = a.asname.empty() ? a.name : a.asname;
            if (base) scope[local] = Binding{*base + "." + a.name, false, false};
            else scope[local] = std::nullopt;
        }
    }
}

void ModuleContext::scan_globals(const py::Body& body) {
    for (const auto& s : body) {
        switch (s.kind) {
            case py::Stmt::Kind::import:
            case py::Stmt::Kind::import_from: {
                std::map<std::string, std::optional<Binding>> scope;
                bind_import(*this, s, scope);
                for (auto& [k, v] : scope) {
                    if (v) globals_[k] = *v;
                    else globals_.erase(k);
                }
                if (s.kind == py::Stmt::Kind::import_from)
                    for (const auto& a : s.aliases)
                        if (a.name == "*")
                            if (auto m = absolute(s.level, s.module)) stars_.push_back(*m);
                break;
            }
            case py::Stmt::Kind::function_def:
            case py::Stmt::Kind::class_def: globals_[s.name] = Binding{name_ + "." + s.name, false, false}; break;
            case py::Stmt::Kind::assign: {
                std::optional<Binding> value;
                if (s.value) value = resolve_global(*this, *s.value);
                for (const auto& t : s.targets) {
                    if (t->kind == py::Expr::Kind::name && s.value) {
                        if (value) globals_[t->id] = *value;
                        else globals_[t->id] = Binding{name_ + "." + t->id, false, false};
                    }
                }
                break;
            }
            case py::Stmt::Kind::compound:
                for (const auto& b : s.bodies) scan_globals(b);
                break;
            default: break;
        }
    }
}

void ModuleContext::scan_definitions(const std::string& prefix, const py::Body& body, bool in_class) {
    for (const auto& s : body) {
        if (s.kind == py::Stmt::Kind::function_def || s.kind == py::Stmt::Kind::class_def) {
            const auto local = prefix.empty() ? s.name : prefix + "." + s.name;
            defs_[local] = &s;
            if (s.kind == py::Stmt::Kind::class_def) {
                scan_class(local, s);
                scan_definitions(local, s.body(), true);
            } else {
                scan_definitions(local, s.body(), false);
            }
        } else if (s.kind == py::Stmt::Kind::compound) {
            for (const auto& b : s.bodies) scan_definitions(prefix, b, in_class);
        }
    }
}

void ModuleContext::scan_class(const std::string& local, const py::Stmt& s) {
    ClassData cd;
    cd.path = name_ + "." + local;
    cd.stmt = &s;
    for (const auto& b : s.bases)
        if (auto r = resolve_global(*this, *b)) cd.bases.push_back(*r);

    std::function<void(const py::Body&)> members = [&](const py::Body& body) {
        for (const auto& st : body) {
            if (st.kind == py::Stmt::Kind::function_def || st.kind == py::Stmt::Kind::class_def) {
                cd.members.insert(st.name);
            } else if (st.kind == py::Stmt::Kind::assign) {
                std::vector<std::string> names;
                for (const auto& t : st.targets) collect_names(*t, names);
                cd.members.insert(names.begin(), names.end());
            } else if (st.kind == py::Stmt::Kind::compound) {
                for (const auto& b : st.bodies) members(b);
            }
        }
    };
    members(s.body());

    // `self.x = <expr>` inside methods.
    std::function<void(const py::Body&, const std::string&, const std::set<std::string>&)> attrs =
        [&](const py::Body& body, const std::string& self, const std::set<std::string>& params) {
            for (const auto& st : body) {
                if (st.kind == py::Stmt::Kind::assign && st.value) {
                    for (const auto& t : st.targets) {
                        if (t->kind != py::Expr::Kind::attribute || !t->base || t->base->kind != py::Expr::Kind::name ||
                            t->base->id != self)
                            continue;
                        auto v = resolve_plain(*st.value, [&](const std::string& n) -> std::optional<Binding> {
                            if (params.count(n)) return std::nullopt;
                            auto it = globals_.find(n);
                            if (it == globals_.end()) return std::nullopt;
                            return it->second;
                        });
                        if (v && !cd.instance_attrs.count(t->id)) cd.instance_attrs[t->id] = *v;
                    }
                } else if (st.kind == py::Stmt::Kind::compound) {
                    for (const auto& b : st.bodies) attrs(b, self, params);
                }
            }
        };
    std::function<void(const py::Body&)> methods = [&](const py::Body& body) {
        for (const auto& st : body) {
            if (st.kind == py::Stmt::Kind::function_def) {
                const auto self = self_parameter(st);
                if (self.empty()) continue;
                std::set<std::string> params;
                for (const auto& p : st.params) params.insert(p.name);
                attrs(st.body(), self, params);
            } else if (st.kind == py::Stmt::Kind::compound) {
                for (const auto& b : st.bodies) methods(b);
            }
        }
    };
    methods(s.body());
    classes_.emplace(local, std::move(cd));
}

std::optional<Binding> resolve_global(const ModuleContext& ctx, const py::Expr& e) {
    return resolve_plain(e, [&](const std::string& n) -> std::optional<Binding> {
        auto it = ctx.globals().find(n);
        if (it == ctx.globals().end()) return std::nullopt;
        return it->second;
    });
}

// ---------------------------------------------------------------------------

BodyWalker::BodyWalker(const ModuleContext& ctx, ClassLookup classes, ReferenceSink sink)
    : ctx_(ctx), classes_(std::move(classes)), sink_(std::move(sink)) {}

void BodyWalker::walk_module_level() {
    Scope scope;
    owner_ = nullptr;
    self_name_.clear();
    walk_body(ctx_.module().body, scope, false);
}

void BodyWalker::walk_function(const py::Stmt& def, const ClassData* owner) {
    const auto saved_owner = owner_;
    const auto saved_self = self_name_;
    owner_ = owner;
    self_name_ = owner ? self_parameter(def) : "";
    Scope scope;
    for (const auto& p : def.params) scope[p.name] = std::nullopt;
    walk_body(def.body(), scope, true);
    owner_ = saved_owner;
    self_name_ = saved_self;
}

void BodyWalker::walk_class_level(const ClassData& cls) {
    Scope scope;
    owner_ = nullptr;
    self_name_.clear();
    walk_body(cls.stmt->body(), scope, false);
}

void BodyWalker::walk_everything() {
    walk_module_level();
    for (const auto& [local, def] : ctx_.definitions()) {
        if (def->kind != py::Stmt::Kind::function_def) continue;
        const auto dot = local.rfind('.');
        const ClassData* owner = nullptr;
        if (dot != std::string::npos) {
            auto parent = local.substr(0, dot);
            auto cls = ctx_.classes().find(parent);
            if (cls == ctx_.classes().end()) continue;  // nested function: walked with its parent
            owner = &cls->second;
        }
        walk_function(*def, owner);
    }
}

void BodyWalker::walk_body(const py::Body& body, Scope& scope, bool enter_defs) {
    for (const auto& s : body) walk_stmt(s, scope, enter_defs);
}

void BodyWalker::walk_stmt(const py::Stmt& s, Scope& scope, bool enter_defs) {
    switch (s.kind) {
        case py::Stmt::Kind::import:
        case py::Stmt::Kind::import_from: bind_import(ctx_, s, scope); break;
        case py::Stmt::Kind::function_def:
            for (const auto& d : s.decorators) visit(*d, scope);
            if (enter_defs) {
                Scope inner = scope;
                for (const auto& p : s.params) inner[p.name] = std::nullopt;
                walk_body(s.body(), inner, true);
                scope[s.name] = std::nullopt;
            }
            break;
        case py::Stmt::Kind::class_def: {
            for (const auto& d : s.decorators) visit(*d, scope);
            for (const auto& b : s.bases) visit(*b, scope);
            for (const auto& k : s.class_keywords)
                if (k.value) visit(*k.value, scope);
            Scope inner = scope;
            const auto saved_owner = owner_;
            const auto saved_self = self_name_;
            owner_ = nullptr;
            self_name_.clear();
            walk_body(s.body(), inner, false);
            owner_ = saved_owner;
            self_name_ = saved_self;
            if (enter_defs) scope[s.name] = std::nullopt;
            break;
        }
        case py::Stmt::Kind::assign: {
            if (s.value) visit(*s.value, scope);
            for (const auto& t : s.targets)
                if (t->kind == py::Expr::Kind::subscript) visit(*t, scope);
            std::optional<Binding> value;
            if (s.value) value = resolve(*s.value, scope);
            if (s.value)
                for (const auto& t : s.targets) assign(*t, value, scope);
            break;
        }
        case py::Stmt::Kind::aug_assign:
            if (s.value) visit(*s.value, scope);
            for (const auto& t : s.targets) visit(*t, scope);
            break;
        case py::Stmt::Kind::expr:
        case py::Stmt::Kind::ret:
            for (const auto& e : s.exprs) visit(*e, scope);
            break;
        case py::Stmt::Kind::compound:
            for (const auto& e : s.exprs) visit(*e, scope);
            for (const auto& b : s.bodies) walk_body(b, scope, enter_defs);
            break;
        default: break;
    }
}

void BodyWalker::assign(const py::Expr& target, std::optional<Binding> value, Scope& scope) {
    if (target.kind == py::Expr::Kind::name) {
        scope[target.id] = std::move(value);
        return;
    }
    std::vector<std::string> names;
    collect_names(target, names);
    for (const auto& n : names) scope[n] = std::nullopt;
}

std::optional<Binding> BodyWalker::lookup(const std::string& name, const Scope& scope) const {
    if (!self_name_.empty() && owner_ && name == self_name_) return Binding{owner_->path, true, true};
    if (auto it = scope.find(name); it != scope.end()) return it->second;
    if (auto it = ctx_.globals().find(name); it != ctx_.globals().end()) return it->second;
    return std::nullopt;
}

std::optional<Binding> BodyWalker::member(const ClassData& cls, const std::string& attr, int depth) const {
    if (depth > 8) return std::nullopt;
    if (cls.members.count(attr)) return Binding{cls.path + "." + attr, false, false};
    if (auto it = cls.instance_attrs.find(attr); it != cls.instance_attrs.end()) return it->second;
    for (const auto& base : cls.bases) {
        if (const auto* bc = classes_ ? classes_(base.path) : nullptr) {
            if (bc == &cls) continue;
            if (auto m = member(*bc, attr, depth + 1)) return m;
        } else {
            return Binding{base.path + "." + attr, true, false};
        }
    }
    return std::nullopt;
}

std::optional<Binding> BodyWalker::resolve(const py::Expr& e, const Scope& scope) const {
    switch (e.kind) {
        case py::Expr::Kind::name: return lookup(e.id, scope);
        case py::Expr::Kind::attribute: {
            if (!e.base) return std::nullopt;
            auto b = resolve(*e.base, scope);
            if (!b) return std::nullopt;
            if (b->self) return owner_ ? member(*owner_, e.id) : std::nullopt;
            if (b->value && classes_) {
                if (const auto* cls = classes_(b->path)) return member(*cls, e.id);
            }
            return Binding{b->path + "." + e.id, b->value, false};
        }
        case py::Expr::Kind::call: {
            if (!e.base) return std::nullopt;
            if (e.base->kind == py::Expr::Kind::name && e.base->id == "super" && owner_ &&
                !scope.count("super") && !ctx_.globals().count("super")) {
                if (owner_->bases.empty()) return std::nullopt;
                return Binding{owner_->bases.front().path, true, false};
            }
            auto b = resolve(*e.base, scope);
            if (!b || b->self) return std::nullopt;
            return Binding{b->path, true, false};
        }
        default: return std::nullopt;
    }
}

void BodyWalker::visit_chain_inner(const py::Expr& e, const Scope& scope) {
    const py::Expr* cur = &e;
    while (cur->kind == py::Expr::Kind::attribute && cur->base) cur = cur->base.get();
    if (cur != &e && cur->kind != py::Expr::Kind::name) visit(*cur, scope);
}

void BodyWalker::visit(const py::Expr& e, const Scope& scope) {
    switch (e.kind) {
        case py::Expr::Kind::call: {
            const py::Expr* callee = e.base.get();
            if (callee) {
                auto b = resolve(*callee, scope);
                if (b && !b->self) {
                    sink_({b->path, b->value, true, e.line, &e});
                    visit_chain_inner(*callee, scope);
                } else {
                    visit(*callee, scope);
                }
            }
            for (const auto& a : e.args) visit(*a, scope);
            for (const auto& k : e.keywords)
                if (k.value) visit(*k.value, scope);
            break;
        }
        case py::Expr::Kind::name:
        case py::Expr::Kind::attribute: {
            auto b = resolve(e, scope);
            if (b && !b->value && !b->self) sink_({b->path, false, false, e.line, &e});
            visit_chain_inner(e, scope);
            break;
        }
        case py::Expr::Kind::lambda: {
            Scope inner = scope;
            for (const auto& c : e.children) visit(*c, inner);
            break;
        }
        default:
            if (e.base) visit(*e.base, scope);
            for (const auto& a : e.args) visit(*a, scope);
            for (const auto& k : e.keywords)
                if (k.value) visit(*k.value, scope);
            for (const auto& c : e.children) visit(*c, scope);
            break;
    }
}

}  // namespace reqsolve::analysis
