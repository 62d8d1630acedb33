#pragma once

#include "reqsolve/inventory.hpp"
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

/// One dependency of a release after marker evaluation.
struct Dependency {
    PackageName name;
    Specifier spec;
    std::set<std::string> extras;

    friend bool operator==(const Dependency& a, const Dependency& b) {
        return a.name == b.name && a.spec == b.spec && a.extras == b.extras;
    }
};

/// The interpreter the requirements are being resolved for. Markers other
/// than the Python version assume CPython on x86_64 Linux.
struct TargetEnvironment {
    Version python_version = Version::parse("3.8");

    std::string lookup(const std::string& variable) const;
};

/// Evaluates an environment marker such as
/// `python_version < "3.7" and sys_platform != "win32"`. Clauses on `extra`
/// are false because extras are never requested. Throws MalformedRequirement.
bool evaluate_marker(std::string_view marker, const TargetEnvironment& env);

/// Parses one `requires_dist` entry (`name[extras] (spec) ; marker`).
/// Returns nullopt when the marker excludes it. Throws MalformedRequirement.
std::optional<Dependency> parse_dependency(std::string_view text, const TargetEnvironment& env);

/// Unpacks the Python sources (.py/.pyi) of a .tar.gz/.tgz/.tar/.zip/.whl
/// archive into `dest`. Entries escaping `dest` are rejected. Throws
/// SourceUnavailable.
void extract_python_sources(const fs::path& archive, const fs::path& dest);

/// Access to a package index speaking the JSON API
/// (`{base}/pypi/{name}/json`, `{base}/pypi/{name}/{version}/json`).
class IndexClient {
public:
    virtual ~IndexClient() = default;

    /// nullopt when the index does not know the package. Throws IndexUnavailable.
    virtual std::optional<nlohmann::json> project(const PackageName& name) = 0;
    virtual std::optional<nlohmann::json> release(const PackageName& name, const std::string& version) = 0;
    /// Stores the file behind `url` under `dest_dir`; returns its path (a
    /// directory when the index serves unpacked sources). Throws SourceUnavailable.
    virtual fs::path download(const std::string& url, const fs::path& dest_dir) = 0;
};

/// HTTP(S) index with three attempts per request and exponential backoff.
class HttpIndexClient : public IndexClient {
public:
    explicit HttpIndexClient(std::string base_url);

    std::optional<nlohmann::json> project(const PackageName& name) override;
    std::optional<nlohmann::json> release(const PackageName& name, const std::string& version) override;
    fs::path download(const std::string& url, const fs::path& dest_dir) override;

private:
    std::optional<std::string> get(const std::string& url);

    std::string base_;
};

/// Index laid out on disk (`file://` URLs). Source URLs that are relative
/// resolve against the index root and may name a directory.
class FileIndexClient : public IndexClient {
public:
    explicit FileIndexClient(fs::path root);

    std::optional<nlohmann::json> project(const PackageName& name) override;
    std::optional<nlohmann::json> release(const PackageName& name, const std::string& version) override;
    fs::path download(const std::string& url, const fs::path& dest_dir) override;

private:
    std::optional<fs::path> project_dir(const PackageName& name) const;

    fs::path root_;
};

/// `file://...` gives a FileIndexClient, anything else an HttpIndexClient.
std::unique_ptr<IndexClient> make_index_client(const std::string& url);

struct KnowledgeOptions {
    fs::path cache_dir;
    bool offline = false;
    TargetEnvironment environment;
};

/// Cached view of the index: candidate versions, dependency metadata and
/// code inventories per release. Every fetched artifact is written to
/// `cache_dir` so that offline runs can reuse it.
class KnowledgeStore {
public:
    /// `client` may be null when offline.
    KnowledgeStore(std::unique_ptr<IndexClient> client, KnowledgeOptions options);
    ~KnowledgeStore();

    const KnowledgeOptions& options() const { return options_; }

    /// False when the index does not list the package at all.
    bool known(const PackageName& name);
    /// Installable versions in ascending order: parseable, not fully yanked,
    /// admitted by `requires_python`, and not pre-releases unless allowed.
    /// Throws UnknownPackage / IndexUnavailable.
    const std::vector<Version>& candidates(const PackageName& name);
    /// Lets one pre-release (e.g. a starting pin) into the candidate list.
    void allow_prerelease(const PackageName& name, const Version& version);

    /// Dependencies of a release with markers applied. Throws MetadataMissing.
    const std::vector<Dependency>& dependencies(const PackageName& name, const Version& version);

    /// Module, API and re-export inventories of a release. Throws SourceUnavailable.
    const CodeInventory& code(const PackageName& name, const Version& version);
    /// Import root of the unpacked sources. Throws SourceUnavailable.
    const SourceTree& sources(const PackageName& name, const Version& version);
    /// Parsed-module cache over `sources`.
    ParsedSources& parsed(const PackageName& name, const Version& version);

    /// Human-readable notes about skipped versions, entries and files.
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    struct ReleaseFile {
        std::string filename;
        std::string url;
        std::string packagetype;
        std::string requires_python;
        bool yanked = false;
    };
    struct Project {
        std::string raw_name;
        std::map<std::string, std::vector<ReleaseFile>> releases;  // raw version -> files
        std::vector<Version> versions;                             // filtered, ascending
        std::map<Version, std::string> raw_by_version;
    };
    struct Release {
        std::optional<std::vector<Dependency>> deps;
        std::optional<CodeInventory> code;
        std::unique_ptr<SourceTree> tree;
        std::unique_ptr<ParsedSources> parsed;
        bool source_failed = false;
    };

    Project* load_project(const PackageName& name);
    void filter_versions(const PackageName& name, Project& p);
    std::string raw_version(const PackageName& name, const Version& v);
    Release& release(const PackageName& name, const Version& v);
    fs::path release_dir(const PackageName& name, const Version& v);
    nlohmann::json release_metadata(const PackageName& name, const Version& v);
    fs::path ensure_sources(const PackageName& name, const Version& v);
    void warn(std::string message);

    std::unique_ptr<IndexClient> client_;
    KnowledgeOptions options_;
    std::map<PackageName, std::optional<Project>> projects_;
    std::map<std::pair<PackageName, std::string>, Release> releases_;
    std::set<std::pair<PackageName, std::string>> allowed_pre_;
    std::vector<std::string> warnings_;
};

/// Writes via a temporary sibling and rename so readers never see partial files.
void write_file_atomic(const fs::path& path, const std::string& content);
/// Sorted keys, two-space indent, trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace reqsolve
