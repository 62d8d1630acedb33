#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace reqsolve {

/// A distribution name. Equality, ordering and hashing all go through the
/// normalized form (lowercase, runs of `-`, `_`, `.` collapsed to `-`).
class PackageName {
public:
    PackageName() = default;
    PackageName(std::string raw);  // NOLINT: implicit from text is convenient in tables
    PackageName(const char* raw) : PackageName(std::string(raw)) {}

    const std::string& raw() const noexcept { return raw_; }
    const std::string& normalized() const noexcept { return normalized_; }

    static std::string normalize(std::string_view name);

    friend bool operator==(const PackageName& a, const PackageName& b) noexcept {
        return a.normalized_ == b.normalized_;
    }
    friend std::strong_ordering operator<=>(const PackageName& a, const PackageName& b) noexcept {
        return a.normalized_ <=> b.normalized_;
    }

private:
    std::string raw_;
    std::string normalized_;
};

/// A version identifier ordered by the packaging ecosystem rules: epoch,
/// release (zero padded), pre-release, post-release, dev-release, local label.
class Version {
public:
    enum class PreKind : std::uint8_t { alpha, beta, rc };
    using LocalPart = std::variant<std::uint64_t, std::string>;

    Version() = default;

    /// Throws MalformedVersion.
    static Version parse(std::string_view text);
    static std::optional<Version> try_parse(std::string_view text);

    std::uint64_t epoch() const noexcept { return epoch_; }
    const std::vector<std::uint64_t>& release() const noexcept { return release_; }
    std::optional<std::pair<PreKind, std::uint64_t>> pre() const noexcept { return pre_; }
    std::optional<std::uint64_t> post() const noexcept { return post_; }
    std::optional<std::uint64_t> dev() const noexcept { return dev_; }
    const std::vector<LocalPart>& local() const noexcept { return local_; }

    /// Text as it was written (trimmed).
    const std::string& raw() const noexcept { return raw_; }
    /// Canonical rendering; `parse(str())` compares equal to `*this`.
    std::string str() const;

    bool is_prerelease() const noexcept { return pre_.has_value() || dev_.has_value(); }
    bool is_postrelease() const noexcept { return post_.has_value(); }

    /// Same version with the local label dropped.
    Version public_version() const;
    /// Epoch and release only.
    Version base_version() const;

    friend std::strong_ordering operator<=>(const Version& a, const Version& b);
    friend bool operator==(const Version& a, const Version& b) { return (a <=> b) == 0; }

private:
    std::uint64_t epoch_ = 0;
    std::vector<std::uint64_t> release_{0};
    std::optional<std::pair<PreKind, std::uint64_t>> pre_;
    std::optional<std::uint64_t> post_;
    std::optional<std::uint64_t> dev_;
    std::vector<LocalPart> local_;
    std::string raw_ = "0";
};

/// A conjunction of version clauses, e.g. `>=1.13.3,<=1.14.5`.
class Specifier {
public:
    enum class Op : std::uint8_t { eq, ne, le, ge, lt, gt, compatible, arbitrary };

    struct Clause {
        Op op = Op::eq;
        Version version;
        std::string version_text;
        bool wildcard = false;  // `==1.4.*` / `!=3.0.*`
    };

    Specifier() = default;
    explicit Specifier(std::vector<Clause> clauses) : clauses_(std::move(clauses)) {}

    /// Throws MalformedSpecifier. Empty or blank text is the empty specifier.
    static Specifier parse(std::string_view text);

    const std::vector<Clause>& clauses() const noexcept { return clauses_; }
    bool empty() const noexcept { return clauses_.empty(); }
    bool contains(const Version& v) const;
    std::string str() const;

    friend bool operator==(const Specifier& a, const Specifier& b) { return a.str() == b.str(); }

private:
    std::vector<Clause> clauses_;
};

std::string_view to_string(Specifier::Op op) noexcept;

/// True iff every clause of `spec` admits `v`.
inline bool satisfies(const Version& v, const Specifier& spec) { return spec.contains(v); }

/// A fully pinned requirements set; source order is preserved and each
/// package appears once.
class Requirements {
public:
    struct Pin {
        PackageName name;
        Version version;
    };

    /// Throws DuplicatePackage.
    void add(PackageName name, Version version);
    /// Inserts or overwrites in place.
    void set(const PackageName& name, Version version);
    bool erase(const PackageName& name);

    const Version* find(const PackageName& name) const;
    bool contains(const PackageName& name) const { return find(name) != nullptr; }
    const std::vector<Pin>& pins() const noexcept { return pins_; }
    std::size_t size() const noexcept { return pins_.size(); }
    bool empty() const noexcept { return pins_.empty(); }

    auto begin() const { return pins_.begin(); }
    auto end() const { return pins_.end(); }

    friend bool operator==(const Requirements& a, const Requirements& b);

private:
    std::vector<Pin> pins_;
};

/// Parses `name==version` lines; `#` starts a comment, blank lines are
/// ignored, LF and CRLF are accepted. Throws MalformedRequirement or
/// DuplicatePackage.
Requirements parse_requirements(std::string_view text);

/// One `name==version` line per pin, LF terminated, in source order.
std::string render_requirements(const Requirements& reqs);

}  // namespace reqsolve

template <>
struct std::hash<reqsolve::PackageName> {
    std::size_t operator()(const reqsolve::PackageName& n) const noexcept {
        return std::hash<std::string>{}(n.normalized());
    }
};
