#include "reqsolve/errors.hpp"
#include "reqsolve/knowledge.hpp"

#include <fstream>
#include <random>

#include <spdlog/spdlog.h>

namespace reqsolve {

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_file_atomic(const fs::path& path, const std::string& content) {
    static std::mt19937_64 rng(std::random_device{}());
    fs::create_directories(path.parent_path());
    const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp" + std::to_string(rng()));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

std::optional<nlohmann::json> read_json(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
        spdlog::warn("ignoring corrupted cache file {}", p.string());
        return std::nullopt;
    }
}

std::string string_or_empty(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) return "";
    return j.at(key).get<std::string>();
}

nlohmann::json file_record(const nlohmann::json& f) {
    bool yanked = f.contains("yanked") && f.at("yanked").is_boolean() && f.at("yanked").get<bool>();
    return {{"filename", string_or_empty(f, "filename")},
            {"url", string_or_empty(f, "url")},
            {"packagetype", string_or_empty(f, "packagetype")},
            {"requires_python", string_or_empty(f, "requires_python")},
            {"yanked", yanked}};
}

void copy_python_tree(const fs::path& from, const fs::path& to) {
    for (auto it = fs::recursive_directory_iterator(from); it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        const auto ext = it->path().extension();
        if (ext != ".py" && ext != ".pyi") continue;
        const auto target = to / fs::relative(it->path(), from);
        fs::create_directories(target.parent_path());
        fs::copy_file(it->path(), target, fs::copy_options::overwrite_existing);
    }
}

}  // namespace

KnowledgeStore::KnowledgeStore(std::unique_ptr<IndexClient> client, KnowledgeOptions options)
    : client_(std::move(client)), options_(std::move(options)) {}

KnowledgeStore::~KnowledgeStore() = default;

void KnowledgeStore::warn(std::string message) {
    spdlog::debug("{}", message);
    if (std::find(warnings_.begin(), warnings_.end(), message) == warnings_.end()) warnings_.push_back(std::move(message));
}

KnowledgeStore::Project* KnowledgeStore::load_project(const PackageName& name) {
    if (auto it = projects_.find(name); it != projects_.end()) return it->second ? &*it->second : nullptr;

    const auto cache_file = options_.cache_dir / name.normalized() / "versions.json";
    auto cached = read_json(cache_file);
    if (cached && !(cached->is_object() && cached->contains("releases") && cached->at("releases").is_object()))
        cached.reset();
    if (!cached) {
        if (options_.offline || !client_)
            throw IndexUnavailable("offline and no cached version list for '" + name.raw() + "'");
        auto fetched = client_->project(name);
        nlohmann::json record;
        if (!fetched) {
            record = {{"name", name.raw()}, {"known", false}, {"releases", nlohmann::json::object()}};
        } else {
            record["name"] = fetched->contains("info") ? string_or_empty(fetched->at("info"), "name") : name.raw();
            if (record["name"] == "") record["name"] = name.raw();
            record["known"] = true;
            record["releases"] = nlohmann::json::object();
            if (fetched->contains("releases") && fetched->at("releases").is_object()) {
                for (const auto& [ver, files] : fetched->at("releases").items()) {
                    auto arr = nlohmann::json::array();
                    if (files.is_array())
                        for (const auto& f : files) arr.push_back(file_record(f));
                    record["releases"][ver] = std::move(arr);
                }
            }
        }
        write_file_atomic(cache_file, dump_json(record));
        cached = std::move(record);
    }

    if (!cached->value("known", true)) {
        projects_.emplace(name, std::nullopt);
        return nullptr;
    }
    Project p;
    p.raw_name = cached->value("name", name.raw());
    for (const auto& [ver, files] : cached->at("releases").items()) {
        auto& list = p.releases[ver];
        for (const auto& f : files) {
            list.push_back({string_or_empty(f, "filename"), string_or_empty(f, "url"), string_or_empty(f, "packagetype"),
                            string_or_empty(f, "requires_python"), f.value("yanked", false)});
        }
    }
    filter_versions(name, p);
    return &*projects_.insert_or_assign(name, std::move(p)).first->second;
}

void KnowledgeStore::filter_versions(const PackageName& name, Project& p) {
    p.versions.clear();
    p.raw_by_version.clear();
    for (const auto& [raw, files] : p.releases) {
        auto v = Version::try_parse(raw);
        if (!v) {
            warn("skipping unparseable version '" + raw + "' of " + name.raw());
            continue;
        }
        p.raw_by_version.emplace(*v, raw);
        if (files.empty()) continue;
        if (std::all_of(files.begin(), files.end(), [](const ReleaseFile& f) { return f.yanked; })) continue;
        if (v->is_prerelease() && !allowed_pre_.count({name, v->str()})) continue;
        const bool admitted = std::any_of(files.begin(), files.end(), [&](const ReleaseFile& f) {
            if (f.yanked) return false;
            if (f.requires_python.empty()) return true;
            try {
                return Specifier::parse(f.requires_python).contains(options_.environment.python_version);
            } catch (const MalformedSpecifier&) {
                return true;
            }
        });
        if (admitted) p.versions.push_back(*v);
    }
    std::sort(p.versions.begin(), p.versions.end());
    p.versions.erase(std::unique(p.versions.begin(), p.versions.end()), p.versions.end());
}

bool KnowledgeStore::known(const PackageName& name) { return load_project(name) != nullptr; }

const std::vector<Version>& KnowledgeStore::candidates(const PackageName& name) {
    auto* p = load_project(name);
    if (!p) throw UnknownPackage("package '" + name.raw() + "' is not on the index");
    return p->versions;
}

void KnowledgeStore::allow_prerelease(const PackageName& name, const Version& version) {
    if (!version.is_prerelease()) return;
    allowed_pre_.insert({name, version.str()});
    if (auto it = projects_.find(name); it != projects_.end() && it->second) filter_versions(name, *it->second);
}

std::string KnowledgeStore::raw_version(const PackageName& name, const Version& v) {
    auto* p = load_project(name);
    if (!p) throw UnknownPackage("package '" + name.raw() + "' is not on the index");
    auto it = p->raw_by_version.find(v);
    if (it == p->raw_by_version.end())
        throw MetadataMissing("no release " + v.raw() + " of '" + name.raw() + "' on the index");
    return it->second;
}

fs::path KnowledgeStore::release_dir(const PackageName& name, const Version& v) {
    return options_.cache_dir / name.normalized() / raw_version(name, v);
}

KnowledgeStore::Release& KnowledgeStore::release(const PackageName& name, const Version& v) {
    return releases_[{name, raw_version(name, v)}];
}

nlohmann::json KnowledgeStore::release_metadata(const PackageName& name, const Version& v) {
    const auto file = release_dir(name, v) / "meta.json";
    auto cached = read_json(file);
    if (cached && cached->is_object() && cached->contains("requires_dist")) return *cached;
    if (options_.offline || !client_)
        throw IndexUnavailable("offline and no cached metadata for " + name.raw() + " " + v.raw());

    const auto raw = raw_version(name, v);
    auto fetched = client_->release(name, raw);
    if (!fetched) throw MetadataMissing("index has no metadata for " + name.raw() + " " + raw);
    nlohmann::json meta;
    const auto info = fetched->value("info", nlohmann::json::object());
    meta["requires_dist"] = info.contains("requires_dist") && info.at("requires_dist").is_array()
                                ? info.at("requires_dist")
                                : nlohmann::json::array();
    meta["requires_python"] = string_or_empty(info, "requires_python");

    std::vector<nlohmann::json> files;
    if (fetched->contains("urls") && fetched->at("urls").is_array())
        for (const auto& f : fetched->at("urls")) files.push_back(file_record(f));
    if (files.empty())
        for (const auto& f : load_project(name)->releases.at(raw))
            files.push_back({{"filename", f.filename}, {"url", f.url}, {"packagetype", f.packagetype}});
    nlohmann::json source = nullptr;
    for (const char* kind : {"sdist", "bdist_wheel", ""}) {
        for (const auto& f : files) {
            if (f.value("url", "").empty()) continue;
            if (*kind && f.value("packagetype", "") != kind) continue;
            source = {{"url", f.at("url")}, {"filename", f.value("filename", "")}};
            break;
        }
        if (!source.is_null()) break;
    }
    meta["source"] = source;
    write_file_atomic(file, dump_json(meta));
    return meta;
}

const std::vector<Dependency>& KnowledgeStore::dependencies(const PackageName& name, const Version& version) {
    auto& rel = release(name, version);
    if (rel.deps) return *rel.deps;
    const auto meta = release_metadata(name, version);
    std::vector<Dependency> deps;
    for (const auto& entry : meta.at("requires_dist")) {
        if (!entry.is_string()) continue;
        try {
            if (auto d = parse_dependency(entry.get<std::string>(), options_.environment)) {
                auto same = std::find_if(deps.begin(), deps.end(), [&](const Dependency& x) { return x.name == d->name; });
                if (same == deps.end()) {
                    deps.push_back(std::move(*d));
                } else {
                    // Two entries on the same package (e.g. split by marker) must both hold.
                    auto clauses = same->spec.clauses();
                    clauses.insert(clauses.end(), d->spec.clauses().begin(), d->spec.clauses().end());
                    same->spec = Specifier(std::move(clauses));
                }
            }
        } catch (const MalformedRequirement& e) {
            warn(name.raw() + " " + version.raw() + ": skipping dependency entry: " + e.what());
        }
    }
    rel.deps = std::move(deps);
    return *rel.deps;
}

fs::path KnowledgeStore::ensure_sources(const PackageName& name, const Version& v) {
    const auto dir = release_dir(name, v);
    const auto src = dir / "src";
    if (fs::is_directory(src)) return src;
    if (options_.offline || !client_)
        throw SourceUnavailable("offline and no cached sources for " + name.raw() + " " + v.raw());

    const auto meta = release_metadata(name, v);
    if (!meta.contains("source") || meta.at("source").is_null())
        throw SourceUnavailable("no downloadable distribution for " + name.raw() + " " + v.raw());
    const auto url = meta.at("source").at("url").get<std::string>();
    const auto download_dir = dir / ".download";
    const auto fetched = client_->download(url, download_dir);

    const auto partial = dir / ".src.partial";
    fs::remove_all(partial);
    fs::create_directories(partial);
    if (fs::is_directory(fetched)) copy_python_tree(fetched, partial);
    else extract_python_sources(fetched, partial);
    fs::remove_all(download_dir);
    fs::rename(partial, src);
    return src;
}

const SourceTree& KnowledgeStore::sources(const PackageName& name, const Version& version) {
    auto& rel = release(name, version);
    if (rel.tree) return *rel.tree;
    if (rel.source_failed) throw SourceUnavailable("sources of " + name.raw() + " " + version.raw() + " unavailable");
    try {
        const auto root = SourceTree::locate_import_root(ensure_sources(name, version));
        rel.tree = std::make_unique<SourceTree>(root);
    } catch (const SourceUnavailable&) {
        rel.source_failed = true;
        throw;
    }
    return *rel.tree;
}

ParsedSources& KnowledgeStore::parsed(const PackageName& name, const Version& version) {
    const auto& tree = sources(name, version);
    auto& rel = release(name, version);
    if (!rel.parsed) rel.parsed = std::make_unique<ParsedSources>(tree);
    return *rel.parsed;
}

const CodeInventory& KnowledgeStore::code(const PackageName& name, const Version& version) {
    auto& rel = release(name, version);
    if (rel.code) return *rel.code;
    const auto dir = release_dir(name, version);
    auto modules = read_json(dir / "modules.json");
    auto apis = read_json(dir / "apis.json");
    auto simplify = read_json(dir / "simplify.json");
    if (modules && apis && simplify) {
        try {
            CodeInventory inv;
            inv.modules = modules_from_json(*modules, name, version);
            inv.apis = apis_from_json(*apis, name, version);
            inv.simplify = simplify_from_json(*simplify, name, version);
            rel.code = std::move(inv);
            return *rel.code;
        } catch (const std::exception& e) {
            spdlog::warn("ignoring corrupted inventory cache for {} {}: {}", name.raw(), version.raw(), e.what());
        }
    }
    CodeInventory inv = build_code_inventory(sources(name, version));
    inv.modules.package = inv.apis.package = inv.simplify.package = name;
    inv.modules.version = inv.apis.version = inv.simplify.version = version;
    for (const auto& f : inv.parse_failures) warn(name.raw() + " " + version.raw() + ": unparseable file " + f);
    write_file_atomic(dir / "modules.json", dump_json(modules_to_json(inv.modules)));
    write_file_atomic(dir / "apis.json", dump_json(apis_to_json(inv.apis)));
    write_file_atomic(dir / "simplify.json", dump_json(simplify_to_json(inv.simplify)));
    rel.code = std::move(inv);
    return *rel.code;
}

}  // namespace reqsolve
