#include "reqsolve/inventory.hpp"

#include "reqsolve/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace reqsolve {

namespace {

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    const auto first = static_cast<unsigned char>(s.front());
    if (!(std::isalpha(first) || first == '_' || first >= 0x80)) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; });
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string parent_of(const std::string& dotted) {
    const auto dot = dotted.rfind('.');
    return dot == std::string::npos ? std::string() : dotted.substr(0, dot);
}

std::string last_segment(const std::string& dotted) {
    const auto dot = dotted.rfind('.');
    return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// SourceTree

bool SourceTree::excluded_directory(const std::string& name) {
    static const std::set<std::string> kExcluded = {"__pycache__", "test", "tests", "doc", "docs", "build", "dist"};
    if (name.empty() || name.front() == '.') return true;
    if (kExcluded.count(name)) return true;
    return name.size() > 9 && name.substr(name.size() - 9) == ".egg-info";
}

SourceTree::SourceTree(fs::path import_root) : root_(std::move(import_root)) {
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) return;

    // Depth-first walk carrying the dotted prefix of the current directory.
    struct Frame {
        fs::path dir;
        std::string prefix;
    };
    std::vector<Frame> stack{{root_, ""}};
    while (!stack.empty()) {
        auto [dir, prefix] = std::move(stack.back());
        stack.pop_back();
        auto entries = sorted_entries(dir);
        std::vector<Frame> subdirs;
        for (const auto& p : entries) {
            const auto fname = p.filename().string();
            if (fs::is_directory(p, ec)) {
                if (excluded_directory(fname) || !is_identifier(fname)) continue;
                subdirs.push_back({p, prefix.empty() ? fname : prefix + "." + fname});
                continue;
            }
            const auto ext = p.extension().string();
            if (ext != ".py" && ext != ".pyi") continue;
            const auto stem = p.stem().string();
            if (!is_identifier(stem)) continue;
            if (prefix.empty() && (stem == "setup" || stem == "conftest")) continue;

            SourceModule m;
            m.file = p;
            m.is_stub = ext == ".pyi";
            if (stem == "__init__") {
                if (prefix.empty()) continue;
                m.name = prefix;
                m.is_package = true;
            } else {
                m.name = prefix.empty() ? stem : prefix + "." + stem;
            }
            auto it = modules_.find(m.name);
            if (it == modules_.end()) {
                modules_.emplace(m.name, std::move(m));
            } else if (it->second.is_stub && !m.is_stub) {
                stubs_.emplace(m.name, it->second);
                it->second = std::move(m);
            } else if (m.is_stub) {
                stubs_.emplace(m.name, std::move(m));
            }
        }
        for (auto it = subdirs.rbegin(); it != subdirs.rend(); ++it) stack.push_back(std::move(*it));
    }
}

const SourceModule* SourceTree::find(const std::string& dotted) const {
    auto it = modules_.find(dotted);
    return it == modules_.end() ? nullptr : &it->second;
}

std::set<std::string> SourceTree::top_level() const {
    std::set<std::string> out;
    for (const auto& [name, _] : modules_) out.insert(name.substr(0, name.find('.')));
    return out;
}

fs::path SourceTree::locate_import_root(const fs::path& unpacked) {
    fs::path current = unpacked;
    std::error_code ec;
    for (int depth = 0; depth < 4; ++depth) {
        if (fs::is_directory(current / "src", ec)) {
            bool has_pkg = false;
            for (const auto& e : sorted_entries(current / "src"))
                if (fs::exists(e / "__init__.py", ec) || e.extension() == ".py") has_pkg = true;
            if (has_pkg) return current / "src";
        }
        auto entries = sorted_entries(current);
        std::vector<fs::path> dirs;
        bool has_python = false;
        for (const auto& e : entries) {
            if (fs::is_directory(e, ec)) {
                if (e.filename().string().front() != '.') dirs.push_back(e);
            } else if (e.extension() == ".py" && e.filename() != "setup.py") {
                has_python = true;
            }
        }
        if (dirs.size() == 1 && !has_python && !fs::exists(dirs.front() / "__init__.py", ec)) {
            current = dirs.front();
            continue;
        }
        break;
    }
    return current;
}

std::optional<std::string> resolve_relative_module(const std::string& importer, bool importer_is_package,
                                                   int level, const std::string& module) {
    if (level == 0) return module;
    std::string base = importer_is_package ? importer : parent_of(importer);
    for (int i = 1; i < level; ++i) {
        if (base.empty()) return std::nullopt;
        base = parent_of(base);
    }
    if (base.empty()) return std::nullopt;
    return module.empty() ? base : base + "." + module;
}

// ---------------------------------------------------------------------------
// Modules

ModuleInventory build_module_inventory(const SourceTree& tree) {
    ModuleInventory inv;
    for (const auto& [name, _] : tree.modules()) inv.modules.insert(name);
    for (const auto& [name, _] : tree.extra_stubs()) inv.modules.insert(name);
    return inv;
}

ModuleInventory build_module_inventory(const fs::path& import_root) {
    return build_module_inventory(SourceTree(import_root));
}

py::Module parse_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ParseFailure(file.string() + ": cannot read");
    std::stringstream ss;
    ss << in.rdbuf();
    return py::parse_module(ss.str(), file.string());
}

const py::Module* ParsedSources::get(const std::string& dotted) {
    auto it = cache_.find(dotted);
    if (it != cache_.end()) return it->second.get();
    const auto* m = tree_->find(dotted);
    std::unique_ptr<py::Module> parsed;
    if (m) {
        try {
            parsed = std::make_unique<py::Module>(parse_file(m->file));
        } catch (const ParseFailure& e) {
            failures_.push_back(e.what());
            spdlog::debug("skipping unparseable file: {}", e.what());
        }
    }
    return cache_.emplace(dotted, std::move(parsed)).first->second.get();
}

// ---------------------------------------------------------------------------
// APIs

std::string_view to_string(Parameter::Kind kind) noexcept {
    switch (kind) {
        case Parameter::Kind::positional: return "positional";
        case Parameter::Kind::keyword_only: return "keyword-only";
        case Parameter::Kind::var_positional: return "var-positional";
        case Parameter::Kind::var_keyword: return "var-keyword";
    }
    return "?";
}

bool ApiSignature::has_var_positional() const {
    return std::any_of(parameters.begin(), parameters.end(),
                       [](const Parameter& p) { return p.kind == Parameter::Kind::var_positional; });
}

bool ApiSignature::has_var_keyword() const {
    return std::any_of(parameters.begin(), parameters.end(),
                       [](const Parameter& p) { return p.kind == Parameter::Kind::var_keyword; });
}

namespace {

bool has_decorator(const py::Stmt& s, std::string_view name) {
    for (const auto& d : s.decorators) {
        const py::Expr* e = d.get();
        if (e->kind == py::Expr::Kind::call) e = e->base.get();
        if (auto dotted = e->dotted(); dotted && last_segment(*dotted) == name) return true;
    }
    return false;
}

ApiSignature signature_of(const py::Stmt& def, bool drop_first) {
    ApiSignature sig;
    bool dropped = !drop_first;
    for (const auto& p : def.params) {
        if (!dropped && p.kind == py::Param::Kind::positional) {
            dropped = true;
            continue;
        }
        dropped = true;
        sig.parameters.push_back({p.name, p.kind, p.has_default, p.annotation});
    }
    return sig;
}

class ApiCollector {
public:
    ApiCollector(ApiInventory& inv, bool stub) : inv_(inv), stub_(stub) {}

    void module_body(const std::string& prefix, const py::Body& body) {
        for (const auto& s : body) {
            switch (s.kind) {
                case py::Stmt::Kind::function_def: function(prefix, s, false); break;
                case py::Stmt::Kind::class_def: klass(prefix, s); break;
                case py::Stmt::Kind::assign:
                    for (const auto& t : s.targets) assign_target(prefix, *t, s.line);
                    break;
                case py::Stmt::Kind::import_from:
                    if (s.level == 0 && s.module == "builtins")
                        for (const auto& a : s.aliases)
                            if (a.name != "*") add_variable(prefix + "." + (a.asname.empty() ? a.name : a.asname), s.line);
                    break;
                case py::Stmt::Kind::compound:
                    for (const auto& b : s.bodies) module_body(prefix, b);
                    break;
                default: break;
            }
        }
    }

private:
    void add_variable(const std::string& fqn, int line) {
        if (inv_.apis.count(fqn)) return;
        inv_.apis[fqn] = ApiEntry{ApiEntry::Type::variable, line, {}};
    }

    void assign_target(const std::string& prefix, const py::Expr& t, int line) {
        if (t.kind == py::Expr::Kind::name) {
            add_variable(prefix + "." + t.id, line);
        } else if (t.kind == py::Expr::Kind::other) {
            for (const auto& c : t.children) assign_target(prefix, *c, line);
        } else if (t.kind == py::Expr::Kind::starred && t.base) {
            assign_target(prefix, *t.base, line);
        }
    }

    void record_callable(const std::string& fqn, ApiEntry::Type type, int line,
                         std::optional<ApiSignature> sig, bool overload) {
        auto it = inv_.apis.find(fqn);
        if (it == inv_.apis.end() || it->second.type == ApiEntry::Type::variable) {
            ApiEntry e{type, line, {}};
            if (sig) e.overloads.push_back(std::move(*sig));
            inv_.apis[fqn] = std::move(e);
            overloaded_[fqn] = overload || stub_;
            return;
        }
        auto& entry = it->second;
        if (overload || stub_ || overloaded_[fqn]) {
            if (sig && std::find(entry.overloads.begin(), entry.overloads.end(), *sig) == entry.overloads.end())
                entry.overloads.push_back(std::move(*sig));
            overloaded_[fqn] = true;
        } else {
            entry = ApiEntry{type, line, {}};
            if (sig) entry.overloads.push_back(std::move(*sig));
        }
    }

    void function(const std::string& prefix, const py::Stmt& s, bool method) {
        const auto fqn = prefix + "." + s.name;
        const bool drop_first = method && !has_decorator(s, "staticmethod");
        record_callable(fqn, ApiEntry::Type::function, s.line, signature_of(s, drop_first),
                        has_decorator(s, "overload"));
        nested(fqn, s.body());
    }

    void klass(const std::string& prefix, const py::Stmt& s) {
        const auto fqn = prefix + "." + s.name;
        std::optional<ApiSignature> init;
        find_init(s.body(), init);
        record_callable(fqn, ApiEntry::Type::class_, s.line, init, false);
        class_body(fqn, s.body());
    }

    void find_init(const py::Body& body, std::optional<ApiSignature>& init) const {
        for (const auto& st : body) {
            if (st.kind == py::Stmt::Kind::function_def && st.name == "__init__") {
                if (!init) init = signature_of(st, true);
            } else if (st.kind == py::Stmt::Kind::compound) {
                for (const auto& b : st.bodies) find_init(b, init);
            }
        }
    }

    void class_body(const std::string& prefix, const py::Body& body) {
        for (const auto& st : body) {
            if (st.kind == py::Stmt::Kind::function_def) function(prefix, st, true);
            else if (st.kind == py::Stmt::Kind::class_def) klass(prefix, st);
            else if (st.kind == py::Stmt::Kind::compound)
                for (const auto& b : st.bodies) class_body(prefix, b);
        }
    }

    // Definitions nested inside a function body.
    void nested(const std::string& prefix, const py::Body& body) {
        for (const auto& st : body) {
            if (st.kind == py::Stmt::Kind::function_def) function(prefix, st, false);
            else if (st.kind == py::Stmt::Kind::class_def) klass(prefix, st);
            else if (st.kind == py::Stmt::Kind::compound)
                for (const auto& b : st.bodies) nested(prefix, b);
        }
    }

    ApiInventory& inv_;
    bool stub_;
    std::map<std::string, bool> overloaded_;
};

void collect_imports(const py::Body& body, std::vector<const py::Stmt*>& out) {
    for (const auto& s : body) {
        if (s.kind == py::Stmt::Kind::import || s.kind == py::Stmt::Kind::import_from) out.push_back(&s);
        else if (s.kind == py::Stmt::Kind::compound)
            for (const auto& b : s.bodies) collect_imports(b, out);
    }
}

// Builds shortened-name aliases from module-level import statements and
// resolves alias chains to names that exist in the inventories.
SimplificationMap build_simplification(const SourceTree& tree, const std::map<std::string, const py::Module*>& parsed,
                                       const ApiInventory& apis, const ModuleInventory& modules) {
    const auto roots = tree.top_level();
    auto internal = [&](const std::string& dotted) { return roots.count(dotted.substr(0, dotted.find('.'))) != 0; };

    std::map<std::string, std::string> raw;  // alias -> referenced path
    struct Star {
        std::string importer;
        std::string source;
    };
    std::vector<Star> stars;

    for (const auto& [name, module] : parsed) {
        if (!module) continue;
        const auto* sm = tree.find(name);
        const bool is_pkg = sm && sm->is_package;
        std::vector<const py::Stmt*> imports;
        collect_imports(module->body, imports);
        for (const auto* s : imports) {
            if (s->kind == py::Stmt::Kind::import) {
                for (const auto& a : s->aliases) {
                    if (a.asname.empty() || !internal(a.name)) continue;
                    raw.emplace(name + "." + a.asname, a.name);
                }
                continue;
            }
            auto source = resolve_relative_module(name, is_pkg, s->level, s->module);
            if (!source || !internal(*source)) continue;
            for (const auto& a : s->aliases) {
                if (a.name == "*") {
                    stars.push_back({name, *source});
                    continue;
                }
                const auto key = name + "." + (a.asname.empty() ? a.name : a.asname);
                const auto value = *source + "." + a.name;
                if (key != value) raw.emplace(key, value);
            }
        }
    }

    // Star imports re-export public names; iterate because stars can chain.
    for (std::size_t round = 0; round < 8 && !stars.empty(); ++round) {
        bool changed = false;
        for (const auto& st : stars) {
            const auto prefix = st.source + ".";
            std::vector<std::string> names;
            for (auto it = apis.apis.lower_bound(prefix); it != apis.apis.end() && it->first.starts_with(prefix); ++it) {
                const auto rest = it->first.substr(prefix.size());
                if (rest.find('.') == std::string::npos && rest.front() != '_') names.push_back(rest);
            }
            for (auto it = raw.lower_bound(prefix); it != raw.end() && it->first.starts_with(prefix); ++it) {
                const auto rest = it->first.substr(prefix.size());
                if (rest.find('.') == std::string::npos && rest.front() != '_') names.push_back(rest);
            }
            for (const auto& n : names) {
                const auto key = st.importer + "." + n;
                if (raw.emplace(key, st.source + "." + n).second) changed = true;
            }
        }
        if (!changed) break;
    }

    auto exists = [&](const std::string& fqn) { return apis.apis.count(fqn) || modules.contains(fqn); };

    SimplificationMap map;
    for (const auto& [key, first] : raw) {
        if (apis.apis.count(key) && apis.apis.at(key).type != ApiEntry::Type::variable) continue;
        std::string value = first;
        std::set<std::string> seen{key};
        while (!exists(value)) {
            // Follow an alias on the whole path or on its longest aliased prefix.
            std::string next;
            if (auto it = raw.find(value); it != raw.end()) {
                next = it->second;
            } else {
                for (auto cut = value.rfind('.'); cut != std::string::npos; cut = value.rfind('.', cut - 1)) {
                    if (auto pit = raw.find(value.substr(0, cut)); pit != raw.end()) {
                        next = pit->second + value.substr(cut);
                        break;
                    }
                    if (cut == 0) break;
                }
            }
            if (next.empty() || !seen.insert(next).second) break;
            value = next;
        }
        if (exists(value) && value != key) map.names.emplace(key, value);
    }
    return map;
}

}  // namespace

CodeInventory build_code_inventory(const SourceTree& tree) {
    CodeInventory out;
    out.modules = build_module_inventory(tree);

    std::map<std::string, std::unique_ptr<py::Module>> storage;
    std::map<std::string, const py::Module*> parsed;

    auto process = [&](const SourceModule& m, bool stub) {
        try {
            auto module = std::make_unique<py::Module>(parse_file(m.file));
            ApiCollector(out.apis, stub).module_body(m.name, module->body);
            if (!stub || !parsed.count(m.name)) parsed[m.name] = module.get();
            storage[m.file.string()] = std::move(module);
        } catch (const ParseFailure& e) {
            out.parse_failures.push_back(e.what());
            spdlog::warn("skipping unparseable file: {}", e.what());
        }
    };
    for (const auto& [_, m] : tree.modules()) process(m, m.is_stub);
    for (const auto& [_, m] : tree.extra_stubs()) process(m, true);

    out.simplify = build_simplification(tree, parsed, out.apis, out.modules);
    return out;
}

CodeInventory build_code_inventory(const fs::path& import_root) {
    return build_code_inventory(SourceTree(import_root));
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json modules_to_json(const ModuleInventory& inv) {
    return nlohmann::json{{"Modules", std::vector<std::string>(inv.modules.begin(), inv.modules.end())}};
}

ModuleInventory modules_from_json(const nlohmann::json& j, PackageName pkg, Version v) {
    ModuleInventory inv{std::move(pkg), std::move(v), {}};
    for (const auto& m : j.at("Modules")) inv.modules.insert(m.get<std::string>());
    return inv;
}

namespace {

nlohmann::json params_to_json(const ApiSignature& sig) {
    auto arr = nlohmann::json::array();
    for (const auto& p : sig.parameters) {
        nlohmann::json jp{{"name", p.name}, {"kind", std::string(to_string(p.kind))}, {"has_default", p.has_default}};
        jp["annotation"] = p.annotation ? nlohmann::json(*p.annotation) : nlohmann::json(nullptr);
        arr.push_back(std::move(jp));
    }
    return arr;
}

ApiSignature params_from_json(const nlohmann::json& arr) {
    ApiSignature sig;
    for (const auto& jp : arr) {
        Parameter p;
        p.name = jp.at("name").get<std::string>();
        const auto kind = jp.at("kind").get<std::string>();
        if (kind == "positional") p.kind = Parameter::Kind::positional;
        else if (kind == "keyword-only") p.kind = Parameter::Kind::keyword_only;
        else if (kind == "var-positional") p.kind = Parameter::Kind::var_positional;
        else if (kind == "var-keyword") p.kind = Parameter::Kind::var_keyword;
        else throw std::runtime_error("unknown parameter kind '" + kind + "'");
        p.has_default = jp.at("has_default").get<bool>();
        if (jp.contains("annotation") && !jp.at("annotation").is_null()) p.annotation = jp.at("annotation").get<std::string>();
        sig.parameters.push_back(std::move(p));
    }
    return sig;
}

}  // namespace

nlohmann::json apis_to_json(const ApiInventory& inv) {
    nlohmann::json apis = nlohmann::json::object();
    for (const auto& [name, e] : inv.apis) {
        static constexpr const char* kTypes[] = {"function", "class", "variable"};
        nlohmann::json je{{"lineno", e.lineno}, {"type", kTypes[static_cast<int>(e.type)]}};
        je["parameter"] = e.overloads.empty() ? nlohmann::json::array() : params_to_json(e.overloads.front());
        je["has_signature"] = e.has_signature();
        if (e.overloads.size() > 1) {
            auto ov = nlohmann::json::array();
            for (const auto& sig : e.overloads) ov.push_back(params_to_json(sig));
            je["overloads"] = std::move(ov);
        }
        apis[name] = std::move(je);
    }
    return nlohmann::json{{"APIs", std::move(apis)}};
}

ApiInventory apis_from_json(const nlohmann::json& j, PackageName pkg, Version v) {
    ApiInventory inv{std::move(pkg), std::move(v), {}};
    for (const auto& [name, je] : j.at("APIs").items()) {
        ApiEntry e;
        e.lineno = je.at("lineno").get<int>();
        const auto type = je.value("type", std::string("function"));
        e.type = type == "class" ? ApiEntry::Type::class_
                 : type == "variable" ? ApiEntry::Type::variable
                                      : ApiEntry::Type::function;
        if (je.contains("overloads")) {
            for (const auto& ov : je.at("overloads")) e.overloads.push_back(params_from_json(ov));
        } else if (je.value("has_signature", true)) {
            e.overloads.push_back(params_from_json(je.at("parameter")));
        }
        inv.apis.emplace(name, std::move(e));
    }
    return inv;
}

nlohmann::json simplify_to_json(const SimplificationMap& map) {
    return nlohmann::json{{"Simplify", map.names}};
}

SimplificationMap simplify_from_json(const nlohmann::json& j, PackageName pkg, Version v) {
    SimplificationMap map{std::move(pkg), std::move(v), {}};
    map.names = j.at("Simplify").get<std::map<std::string, std::string>>();
    return map;
}

}  // namespace reqsolve
