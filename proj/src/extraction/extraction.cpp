#include "reqsolve/extraction.hpp"

#include "analysis.hpp"
#include "reqsolve/errors.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include <spdlog/spdlog.h>

namespace reqsolve {

namespace {

std::string first_segment(const std::string& dotted) { return dotted.substr(0, dotted.find('.')); }

std::string last_segment(const std::string& dotted) {
    auto dot = dotted.rfind('.');
    return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

bool rooted(const std::string& path, const std::set<std::string>& roots) { return roots.count(first_segment(path)) != 0; }

ApiUse use_from(const analysis::Reference& ref, Site site) {
    ApiUse use;
    use.name = ref.path;
    use.call = ref.call;
    use.site = std::move(site);
    if (ref.call && ref.expr) {
        for (const auto& a : ref.expr->args) {
            if (a->kind == py::Expr::Kind::starred) use.star = true;
            else ++use.positional;
        }
        for (const auto& k : ref.expr->keywords) {
            if (k.name.empty()) use.dstar = true;
            else use.keywords.push_back(k.name);
        }
    }
    return use;
}

void collect_imports(const py::Body& body, std::vector<const py::Stmt*>& out) {
    for (const auto& s : body) {
        if (s.kind == py::Stmt::Kind::import || s.kind == py::Stmt::Kind::import_from) out.push_back(&s);
        for (const auto& b : s.bodies) collect_imports(b, out);
    }
}

std::string relative_file(const fs::path& file, const fs::path& root) {
    return file.lexically_relative(root).generic_string();
}

/// Lazily built module contexts over one unpacked library.
class LibraryIndex {
public:
    explicit LibraryIndex(ParsedSources& sources) : sources_(sources) {}

    const analysis::ModuleContext* get(const std::string& module) {
        auto it = contexts_.find(module);
        if (it != contexts_.end()) return it->second.get();
        std::unique_ptr<analysis::ModuleContext> ctx;
        const auto* sm = sources_.tree().find(module);
        if (sm) {
            if (const auto* parsed = sources_.get(module))
                ctx = std::make_unique<analysis::ModuleContext>(module, sm->is_package, *parsed);
        }
        return contexts_.emplace(module, std::move(ctx)).first->second.get();
    }

    /// Longest module prefix of `path` and the remaining local path.
    std::pair<const analysis::ModuleContext*, std::string> locate(const std::string& path) {
        std::string prefix = path;
        while (true) {
            if (sources_.tree().find(prefix)) {
                if (const auto* ctx = get(prefix))
                    return {ctx, prefix.size() == path.size() ? "" : path.substr(prefix.size() + 1)};
            }
            auto dot = prefix.rfind('.');
            if (dot == std::string::npos) return {nullptr, ""};
            prefix.resize(dot);
        }
    }

    const analysis::ClassData* class_at(const std::string& path) {
        auto [ctx, local] = locate(path);
        if (!ctx || local.empty()) return nullptr;
        auto it = ctx->classes().find(local);
        return it == ctx->classes().end() ? nullptr : &it->second;
    }

    std::string file_of(const std::string& module) const {
        const auto* sm = sources_.tree().find(module);
        return sm ? relative_file(sm->file, sources_.tree().root()) : module;
    }

private:
    ParsedSources& sources_;
    std::map<std::string, std::unique_ptr<analysis::ModuleContext>> contexts_;
};

}  // namespace

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::direct: return "direct";
        case Provenance::chain: return "chain";
        case Provenance::import_closure: return "import-closure";
    }
    return "direct";
}

std::string CallChain::str() const {
    std::string out;
    for (const auto& n : nodes) {
        if (!out.empty()) out += " -> ";
        out += n;
    }
    return out;
}

std::vector<ChangeTriple> diff_assignments(const Requirements& start, const Assignment& solved) {
    std::vector<ChangeTriple> out;
    for (const auto& [name, version] : solved) {
        const auto* before = start.find(name);
        if (!before) out.push_back({name, std::nullopt, version});
        else if (!(*before == version)) out.push_back({name, *before, version});
    }
    return out;
}

DependencyGraph dependency_graph(const Requirements& pins, const Assignment& assignment, KnowledgeStore& store) {
    DependencyGraph g;
    auto& project = g[project_node];
    for (const auto& pin : pins)
        if (assignment.count(pin.name)) project.insert(pin.name.normalized());
    for (const auto& [name, version] : assignment) {
        auto& succ = g[name.normalized()];
        try {
            for (const auto& d : store.dependencies(name, version))
                if (assignment.count(d.name) && !(d.name == name)) succ.insert(d.name.normalized());
        } catch (const MetadataMissing&) {
        }
    }
    return g;
}

std::vector<CallChain> find_call_chains(const DependencyGraph& graph, const std::string& target) {
    std::vector<CallChain> out;
    std::vector<std::string> path{project_node};
    std::set<std::string> on_path{project_node};
    std::function<void(const std::string&)> dfs = [&](const std::string& node) {
        if (node == target && path.size() > 1) {
            out.push_back({path});
            return;
        }
        auto it = graph.find(node);
        if (it == graph.end()) return;
        for (const auto& next : it->second) {
            if (on_path.count(next)) continue;
            path.push_back(next);
            on_path.insert(next);
            dfs(next);
            on_path.erase(next);
            path.pop_back();
        }
    };
    dfs(project_node);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------

void UsageSet::add(ApiUse use) {
    for (const auto& u : apis)
        if (u.name == use.name && u.site == use.site) return;
    apis.push_back(std::move(use));
}

void UsageSet::add(ModuleUse use) {
    for (const auto& m : modules)
        if (m.path == use.path) return;
    modules.push_back(std::move(use));
}

// ---------------------------------------------------------------------------

struct ProjectSources::Impl {
    struct Entry {
        std::string file;
        bool is_package = false;
        std::unique_ptr<py::Module> module;
        std::unique_ptr<analysis::ModuleContext> ctx;
    };
    std::map<std::string, Entry> modules;
    std::vector<ApiUse> references;
    std::vector<ImportUse> imports;

    const analysis::ClassData* class_at(const std::string& path) const {
        std::string prefix = path;
        while (true) {
            auto dot = prefix.rfind('.');
            if (dot == std::string::npos) return nullptr;
            prefix.resize(dot);
            auto it = modules.find(prefix);
            if (it != modules.end() && it->second.ctx) {
                auto c = it->second.ctx->classes().find(path.substr(prefix.size() + 1));
                if (c != it->second.ctx->classes().end()) return &c->second;
            }
        }
    }
};

bool ProjectSources::excluded_directory(const std::string& name) {
    static const std::set<std::string> skip{"__pycache__", "venv", "env",  "site-packages",
                                            "build",       "dist", "node_modules"};
    return name.empty() || name[0] == '.' || skip.count(name) != 0;
}

ProjectSources::ProjectSources(fs::path root) : root_(std::move(root)), impl_(std::make_unique<Impl>()) {
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) throw ConfigInvalid("project_path: not a readable directory: " + root_.string());

    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(root_, fs::directory_options::skip_permission_denied, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        const auto name = it->path().filename().string();
        if (it->is_directory(ec)) {
            if (excluded_directory(name)) it.disable_recursion_pending();
            continue;
        }
        if (it->path().extension() == ".py") files.push_back(it->path());
    }
    std::sort(files.begin(), files.end());

    for (const auto& f : files) {
        auto rel = f.lexically_relative(root_);
        std::string dotted;
        for (const auto& part : rel.parent_path()) {
            if (!dotted.empty()) dotted += '.';
            dotted += part.string();
        }
        const auto stem = rel.stem().string();
        bool is_package = stem == "__init__";
        if (!is_package) dotted += (dotted.empty() ? "" : ".") + stem;
        if (dotted.empty()) dotted = "__init__";
        Impl::Entry entry;
        entry.file = rel.generic_string();
        entry.is_package = is_package;
        try {
            entry.module = std::make_unique<py::Module>(parse_file(f));
        } catch (const ParseFailure& e) {
            failures_.push_back(e.what());
            spdlog::warn("skipping unparseable project file: {}", e.what());
            continue;
        }
        impl_->modules.emplace(dotted, std::move(entry));
    }
    for (auto& [name, entry] : impl_->modules)
        entry.ctx = std::make_unique<analysis::ModuleContext>(name, entry.is_package, *entry.module);

    const Impl& impl = *impl_;
    for (auto& [name, entry] : impl_->modules) {
        const auto& file = entry.file;
        analysis::BodyWalker walker(
            *entry.ctx, [&impl](const std::string& path) { return impl.class_at(path); },
            [&](const analysis::Reference& ref) { impl_->references.push_back(use_from(ref, Site{file, ref.line})); });
        walker.walk_everything();

        std::vector<const py::Stmt*> stmts;
        collect_imports(entry.module->body, stmts);
        for (const auto* s : stmts) {
            if (s->kind == py::Stmt::Kind::import) {
                for (const auto& a : s->aliases) impl_->imports.push_back({a.name, false, Site{file, s->line}});
            } else if (s->level == 0) {
                for (const auto& a : s->aliases) {
                    if (a.name == "*") impl_->imports.push_back({s->module, true, Site{file, s->line}});
                    else impl_->imports.push_back({s->module + "." + a.name, false, Site{file, s->line}});
                }
            }
        }
    }
}

ProjectSources::~ProjectSources() = default;
ProjectSources::ProjectSources(ProjectSources&&) noexcept = default;
ProjectSources& ProjectSources::operator=(ProjectSources&&) noexcept = default;

std::vector<ApiUse> ProjectSources::references(const std::set<std::string>& roots) const {
    std::vector<ApiUse> out;
    for (const auto& r : impl_->references)
        if (rooted(r.name, roots)) out.push_back(r);
    return out;
}

std::vector<ProjectSources::ImportUse> ProjectSources::imports(const std::set<std::string>& roots) const {
    std::vector<ImportUse> out;
    for (const auto& i : impl_->imports)
        if (rooted(i.name, roots)) out.push_back(i);
    return out;
}

UsageSet extract_direct_usage(const ProjectSources& project, const std::set<std::string>& roots) {
    UsageSet out;
    for (auto& use : project.references(roots)) out.add(std::move(use));
    for (const auto& imp : project.imports(roots)) {
        if (imp.star) {
            out.add(ModuleUse{imp.name, imp.site, Provenance::direct, {}});
            continue;
        }
        ApiUse use;
        use.name = imp.name;
        use.site = imp.site;
        out.add(std::move(use));
        for (const auto& m : derive_import_modules(imp.name)) out.add(ModuleUse{m, imp.site, Provenance::direct, {}});
    }
    return out;
}

// ---------------------------------------------------------------------------

double name_similarity(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    // Insert/delete edit distance (a substitution costs two) over the summed length.
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const auto up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
            diag = up;
        }
    }
    const auto total = a.size() + b.size();
    return static_cast<double>(2 * row[b.size()]) / static_cast<double>(total);
}

namespace {

enum class Lookup { found, blocked, absent };

// `blocked` means the name extends a function, variable or class that lacks
// the member, so fuzzy matching must not guess.
Lookup lookup_exact(const std::string& name, const CodeInventory& inv, int depth, Restored& out) {
    if (depth > 8) return Lookup::absent;
    if (inv.apis.find(name)) {
        out = {depth == 0 ? Restored::How::exact : Restored::How::simplified, name};
        return Lookup::found;
    }
    if (inv.modules.contains(name)) {
        out = {Restored::How::module, name};
        return Lookup::found;
    }
    if (const auto* mapped = inv.simplify.find(name)) {
        auto r = lookup_exact(*mapped, inv, depth + 1, out);
        if (r == Lookup::found && out.how != Restored::How::module) out.how = Restored::How::simplified;
        return r;
    }
    for (auto cut = name.rfind('.'); cut != std::string::npos && cut > 0; cut = name.rfind('.', cut - 1)) {
        const auto prefix = name.substr(0, cut);
        const auto rest = name.substr(cut);
        if (inv.apis.find(prefix)) return Lookup::blocked;
        if (const auto* mapped = inv.simplify.find(prefix)) {
            auto r = lookup_exact(*mapped + rest, inv, depth + 1, out);
            if (r == Lookup::found && out.how != Restored::How::module) out.how = Restored::How::prefix;
            return r;
        }
        if (inv.modules.contains(prefix)) return Lookup::absent;
    }
    return Lookup::absent;
}

}  // namespace

std::optional<Restored> resolve_exact(const std::string& name, const CodeInventory& inv) {
    Restored r;
    if (lookup_exact(name, inv, 0, r) == Lookup::found) return r;
    return std::nullopt;
}

Restored restore_fqn(const std::string& name, const CodeInventory& inv) {
    Restored r;
    switch (lookup_exact(name, inv, 0, r)) {
        case Lookup::found: return r;
        case Lookup::blocked: return {Restored::How::unresolved, ""};
        case Lookup::absent: break;
    }
    const auto terminal = last_segment(name);
    const std::string* best = nullptr;
    double best_score = 0;
    for (const auto& [fqn, entry] : inv.apis.apis) {
        if (last_segment(fqn) != terminal) continue;
        const double score = name_similarity(name, fqn);
        if (score < fuzzy_threshold) continue;
        const bool better = !best || score > best_score ||
                            (score == best_score && (fqn.size() < best->size() ||
                                                     (fqn.size() == best->size() && fqn < *best)));
        if (better) {
            best = &fqn;
            best_score = score;
        }
    }
    if (!best) return {Restored::How::unresolved, ""};
    return {Restored::How::fuzzy, *best};
}

// ---------------------------------------------------------------------------

namespace {

struct Located {
    const analysis::ModuleContext* ctx = nullptr;
    std::string local;  // empty for a module
    const py::Stmt* def = nullptr;

    std::string fqn() const { return local.empty() ? ctx->name() : ctx->name() + "." + local; }
};

std::optional<Located> locate_entry(LibraryIndex& idx, const SimplificationMap& simplify, const std::string& path,
                                    int depth = 0) {
    if (depth > 8) return std::nullopt;
    auto [ctx, local] = idx.locate(path);
    if (ctx) {
        if (local.empty()) return Located{ctx, "", nullptr};
        auto it = ctx->definitions().find(local);
        if (it != ctx->definitions().end()) return Located{ctx, local, it->second};
    }
    if (const auto* mapped = simplify.find(path)) return locate_entry(idx, simplify, *mapped, depth + 1);
    for (auto cut = path.rfind('.'); cut != std::string::npos && cut > 0; cut = path.rfind('.', cut - 1)) {
        if (const auto* mapped = simplify.find(path.substr(0, cut)))
            return locate_entry(idx, simplify, *mapped + path.substr(cut), depth + 1);
    }
    return std::nullopt;
}

}  // namespace

CallGraph build_on_demand_call_graph(const std::vector<std::string>& entries, ParsedSources& sources,
                                     const SimplificationMap& simplify, const CallGraphOptions& options) {
    CallGraph graph;
    LibraryIndex idx(sources);
    struct Item {
        std::string path;
        int depth = 0;
    };
    std::deque<Item> work;
    std::set<std::string> queued;
    std::set<CallGraphNode> nodes;
    for (const auto& e : entries)
        if (queued.insert(e).second) work.push_back({e, 0});

    while (!work.empty()) {
        const auto item = work.front();
        work.pop_front();
        auto target = locate_entry(idx, simplify, item.path);
        if (!target) {
            if (item.depth == 0) graph.unresolved.push_back(item.path);
            continue;
        }
        graph.entry_modules.insert(target->ctx->name());
        const auto file = options.site_prefix + idx.file_of(target->ctx->name());

        auto sink = [&](const analysis::Reference& ref) {
            if (rooted(ref.path, options.own_roots)) {
                if (!ref.call) return;
                auto callee = locate_entry(idx, simplify, ref.path);
                nodes.insert({ref.path, item.path, callee ? callee->fqn() : "", options.package});
                if (item.depth + 1 <= options.max_depth && queued.insert(ref.path).second)
                    work.push_back({ref.path, item.depth + 1});
            } else if (rooted(ref.path, options.next_roots)) {
                nodes.insert({ref.path, item.path, "", options.next_package});
                graph.boundary.push_back(use_from(ref, Site{file, ref.line}));
            }
        };
        analysis::BodyWalker walker(
            *target->ctx, [&idx](const std::string& p) { return idx.class_at(p); }, sink);

        if (!target->def) {
            walker.walk_module_level();
        } else if (target->def->kind == py::Stmt::Kind::class_def) {
            const auto& cls = target->ctx->classes().at(target->local);
            walker.walk_class_level(cls);
            auto init = target->ctx->definitions().find(target->local + ".__init__");
            if (init != target->ctx->definitions().end()) walker.walk_function(*init->second, &cls);
        } else {
            const analysis::ClassData* owner = nullptr;
            auto dot = target->local.rfind('.');
            if (dot != std::string::npos) {
                auto c = target->ctx->classes().find(target->local.substr(0, dot));
                if (c != target->ctx->classes().end()) owner = &c->second;
            }
            walker.walk_function(*target->def, owner);
        }
    }
    graph.nodes.assign(nodes.begin(), nodes.end());
    return graph;
}

std::set<std::string> find_related_files(const std::set<std::string>& entry_modules, ParsedSources& sources) {
    const auto& tree = sources.tree();
    std::set<std::string> out;
    std::deque<std::string> work;
    auto add = [&](std::string m) {
        while (true) {
            if (tree.find(m) && out.insert(m).second) work.push_back(m);
            auto dot = m.rfind('.');
            if (dot == std::string::npos) return;
            m.resize(dot);
        }
    };
    for (const auto& e : entry_modules) add(e);
    while (!work.empty()) {
        const auto m = work.front();
        work.pop_front();
        const auto* parsed = sources.get(m);
        if (!parsed) continue;
        const bool is_package = tree.find(m)->is_package;
        std::vector<const py::Stmt*> stmts;
        collect_imports(parsed->body, stmts);
        for (const auto* s : stmts) {
            if (s->kind == py::Stmt::Kind::import) {
                for (const auto& a : s->aliases) add(a.name);
                continue;
            }
            auto base = resolve_relative_module(m, is_package, s->level, s->module);
            if (!base) continue;
            add(*base);
            for (const auto& a : s->aliases)
                if (a.name != "*") add(*base + "." + a.name);
        }
    }
    return out;
}

std::vector<ProjectSources::ImportUse> extract_import_apis(const std::set<std::string>& modules, ParsedSources& sources,
                                                           const std::set<std::string>& roots,
                                                           const std::string& site_prefix) {
    std::vector<ProjectSources::ImportUse> out;
    for (const auto& m : modules) {
        const auto* parsed = sources.get(m);
        if (!parsed) continue;
        const auto* sm = sources.tree().find(m);
        const auto file = site_prefix + relative_file(sm->file, sources.tree().root());
        std::vector<const py::Stmt*> stmts;
        collect_imports(parsed->body, stmts);
        for (const auto* s : stmts) {
            if (s->kind == py::Stmt::Kind::import) {
                for (const auto& a : s->aliases)
                    if (rooted(a.name, roots)) out.push_back({a.name, false, Site{file, s->line}});
            } else if (s->level == 0 && rooted(s->module, roots)) {
                for (const auto& a : s->aliases) {
                    if (a.name == "*") out.push_back({s->module, true, Site{file, s->line}});
                    else out.push_back({s->module + "." + a.name, false, Site{file, s->line}});
                }
            }
        }
    }
    return out;
}

std::set<std::string> derive_import_modules(const std::string& raw_name) {
    std::set<std::string> out;
    for (auto dot = raw_name.find('.'); dot != std::string::npos; dot = raw_name.find('.', dot + 1)) {
        auto prefix = raw_name.substr(0, dot);
        if (prefix.find('.') != std::string::npos) out.insert(prefix);
    }
    out.insert(raw_name);
    return out;
}

// ---------------------------------------------------------------------------

UsageSet assemble_usage_set(const ChangeTriple& triple, const ProjectSources& project,
                            const std::vector<CallChain>& chains, const Assignment& solved, KnowledgeStore& store,
                            const ExtractionOptions& options) {
    UsageSet out;
    const auto& target = triple.package;
    const Version resolve_version = triple.from_version.value_or(triple.to_version);
    out.resolved_against_solved = !triple.from_version.has_value();

    const CodeInventory* inv = nullptr;
    std::set<std::string> roots;
    try {
        inv = &store.code(target, resolve_version);
        roots = store.sources(target, resolve_version).top_level();
    } catch (const Error& e) {
        out.notes.push_back(target.normalized() + ": no sources to analyse (" + e.what() + ")");
        return out;
    }

    auto finish = [&](ApiUse use) {
        const auto r = restore_fqn(use.name, *inv);
        if (r.how == Restored::How::module) {
            out.add(ModuleUse{r.fqn, use.site, use.provenance, use.chain});
        } else if (r.how == Restored::How::unresolved) {
            out.notes.push_back("unresolved " + use.name + " at " + use.site.str());
        } else {
            use.fqn = r.fqn;
            out.add(std::move(use));
        }
    };
    auto add_module = [&](ModuleUse m) {
        if (inv->modules.contains(m.path)) out.add(std::move(m));
    };

    for (const auto& chain : chains) {
        const auto& nodes = chain.nodes;
        if (nodes.size() < 2) continue;
        try {
            if (nodes.size() == 2) {
                auto direct = extract_direct_usage(project, roots);
                for (auto& use : direct.apis) {
                    use.chain = nodes;
                    finish(std::move(use));
                }
                for (auto& m : direct.modules) {
                    m.chain = nodes;
                    add_module(std::move(m));
                }
                continue;
            }

            auto version_of = [&](const std::string& pkg) -> const Version& {
                auto it = solved.find(PackageName(pkg));
                if (it == solved.end()) throw UnknownPackage(pkg + " is not part of the solved assignment");
                return it->second;
            };

            std::set<std::string> first_roots = store.sources(PackageName(nodes[1]), version_of(nodes[1])).top_level();
            std::set<std::string> entry_set;
            for (const auto& use : project.references(first_roots)) entry_set.insert(use.name);
            for (const auto& imp : project.imports(first_roots)) entry_set.insert(imp.name);
            std::vector<std::string> entries(entry_set.begin(), entry_set.end());

            for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
                const PackageName pkg(nodes[i]);
                const auto& version = version_of(nodes[i]);
                const bool last = i + 2 == nodes.size();
                CallGraphOptions opts;
                opts.package = nodes[i];
                opts.own_roots = store.sources(pkg, version).top_level();
                opts.next_package = nodes[i + 1];
                opts.next_roots = last ? roots : store.sources(PackageName(nodes[i + 1]), version_of(nodes[i + 1])).top_level();
                opts.site_prefix = pkg.normalized() + "==" + version.raw() + "/";
                opts.max_depth = options.max_depth;

                auto& parsed = store.parsed(pkg, version);
                auto graph = build_on_demand_call_graph(entries, parsed, store.code(pkg, version).simplify, opts);
                if (!last) {
                    std::set<std::string> next;
                    for (const auto& b : graph.boundary) next.insert(b.name);
                    entries.assign(next.begin(), next.end());
                    if (entries.empty()) break;
                    continue;
                }
                for (auto& use : graph.boundary) {
                    use.provenance = Provenance::chain;
                    use.chain = nodes;
                    finish(std::move(use));
                }
                const auto files = find_related_files(graph.entry_modules, parsed);
                for (const auto& imp : extract_import_apis(files, parsed, roots, opts.site_prefix)) {
                    if (imp.star) {
                        add_module(ModuleUse{imp.name, imp.site, Provenance::import_closure, nodes});
                        continue;
                    }
                    ApiUse use;
                    use.name = imp.name;
                    use.site = imp.site;
                    use.provenance = Provenance::import_closure;
                    use.chain = nodes;
                    finish(std::move(use));
                    for (const auto& m : derive_import_modules(imp.name))
                        add_module(ModuleUse{m, imp.site, Provenance::import_closure, nodes});
                }
            }
        } catch (const Error& e) {
            out.notes.push_back("chain " + chain.str() + " skipped: " + e.what());
        }
    }
    return out;
}

}  // namespace reqsolve
