#include "reqsolve/versioning.hpp"

#include "reqsolve/errors.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace reqsolve {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_sep(char c) { return c == '-' || c == '_' || c == '.'; }

// Cursor over lowercased version text.
class Scanner {
public:
    explicit Scanner(std::string text) : s_(std::move(text)) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
    }
    std::size_t pos() const { return pos_; }
    void reset(std::size_t p) { pos_ = p; }
    void advance(std::size_t n = 1) { pos_ += n; }

    bool digit_at(std::size_t ahead = 0) const {
        return std::isdigit(static_cast<unsigned char>(peek(ahead))) != 0;
    }

    std::optional<std::uint64_t> number() {
        if (!digit_at()) return std::nullopt;
        std::uint64_t value = 0;
        while (digit_at()) {
            const auto d = static_cast<std::uint64_t>(peek() - '0');
            if (value > (std::numeric_limits<std::uint64_t>::max() - d) / 10) return std::nullopt;
            value = value * 10 + d;
            advance();
        }
        return value;
    }

    bool word(std::string_view w) {
        if (s_.compare(pos_, w.size(), w) == 0) {
            pos_ += w.size();
            return true;
        }
        return false;
    }

    void skip_sep() {
        if (is_sep(peek())) advance();
    }

    const std::string& text() const { return s_; }

private:
    std::string s_;
    std::size_t pos_ = 0;
};

// -1: negative infinity, +1: positive infinity, 0: finite value in `value`.
struct Bound {
    int inf = 0;
    std::uint64_t value = 0;
    int kind = 0;

    friend std::strong_ordering operator<=>(const Bound& a, const Bound& b) {
        if (a.inf != b.inf) return a.inf <=> b.inf;
        if (a.inf != 0) return std::strong_ordering::equal;
        if (a.kind != b.kind) return a.kind <=> b.kind;
        return a.value <=> b.value;
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// PackageName

PackageName::PackageName(std::string raw) : raw_(std::move(raw)), normalized_(normalize(raw_)) {}

std::string PackageName::normalize(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool in_run = false;
    for (char c : trim(name)) {
        if (is_sep(c)) {
            if (!in_run) out.push_back('-');
            in_run = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            in_run = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Version

std::optional<Version> Version::try_parse(std::string_view text) {
    const auto trimmed = trim(text);
    if (trimmed.empty()) return std::nullopt;

    std::string lowered(trimmed);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    Scanner sc(std::move(lowered));

    Version v;
    v.raw_ = std::string(trimmed);
    v.release_.clear();

    if (sc.peek() == 'v') sc.advance();

    // epoch
    {
        const auto save = sc.pos();
        auto n = sc.number();
        if (n && sc.peek() == '!') {
            v.epoch_ = *n;
            sc.advance();
        } else {
            sc.reset(save);
        }
    }

    // release
    auto first = sc.number();
    if (!first) return std::nullopt;
    v.release_.push_back(*first);
    while (sc.peek() == '.' && sc.digit_at(1)) {
        sc.advance();
        auto n = sc.number();
        if (!n) return std::nullopt;
        v.release_.push_back(*n);
    }

    // pre-release
    {
        const auto save = sc.pos();
        sc.skip_sep();
        std::optional<PreKind> kind;
        // longest spellings first
        if (sc.word("preview") || sc.word("pre") || sc.word("rc") || sc.word("c")) kind = PreKind::rc;
        else if (sc.word("alpha") || sc.word("a")) kind = PreKind::alpha;
        else if (sc.word("beta") || sc.word("b")) kind = PreKind::beta;
        if (kind) {
            const auto after_word = sc.pos();
            sc.skip_sep();
            auto n = sc.number();
            if (!n) {
                sc.reset(after_word);
                n = 0;
            }
            v.pre_ = std::pair{*kind, *n};
        } else {
            sc.reset(save);
        }
    }

    // post-release
    {
        const auto save = sc.pos();
        if (sc.peek() == '-' && sc.digit_at(1)) {
            sc.advance();
            v.post_ = sc.number();
            if (!v.post_) return std::nullopt;
        } else {
            sc.skip_sep();
            if (sc.word("post") || sc.word("rev") || sc.word("r")) {
                const auto after_word = sc.pos();
                sc.skip_sep();
                auto n = sc.number();
                if (!n) {
                    sc.reset(after_word);
                    n = 0;
                }
                v.post_ = *n;
            } else {
                sc.reset(save);
            }
        }
    }

    // dev-release
    {
        const auto save = sc.pos();
        sc.skip_sep();
        if (sc.word("dev")) {
            const auto after_word = sc.pos();
            sc.skip_sep();
            auto n = sc.number();
            if (!n) {
                sc.reset(after_word);
                n = 0;
            }
            v.dev_ = *n;
        } else {
            sc.reset(save);
        }
    }

    // local label
    if (sc.peek() == '+') {
        sc.advance();
        std::string part;
        auto flush = [&]() -> bool {
            if (part.empty()) return false;
            if (std::all_of(part.begin(), part.end(), [](unsigned char c) { return std::isdigit(c); })) {
                if (part.size() > 18) return false;
                v.local_.emplace_back(static_cast<std::uint64_t>(std::stoull(part)));
            } else {
                v.local_.emplace_back(part);
            }
            part.clear();
            return true;
        };
        while (!sc.done()) {
            const char c = sc.peek();
            if (std::isalnum(static_cast<unsigned char>(c))) {
                part.push_back(c);
            } else if (is_sep(c)) {
                if (!flush()) return std::nullopt;
            } else {
                return std::nullopt;
            }
            sc.advance();
        }
        if (!flush()) return std::nullopt;
    }

    if (!sc.done()) return std::nullopt;
    return v;
}

Version Version::parse(std::string_view text) {
    auto v = try_parse(text);
    if (!v) throw MalformedVersion("malformed version '" + std::string(text) + "'");
    return *v;
}

std::string Version::str() const {
    std::string out;
    if (epoch_ != 0) out += std::to_string(epoch_) + "!";
    for (std::size_t i = 0; i < release_.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(release_[i]);
    }
    if (pre_) {
        static constexpr const char* kNames[] = {"a", "b", "rc"};
        out += kNames[static_cast<int>(pre_->first)];
        out += std::to_string(pre_->second);
    }
    if (post_) out += ".post" + std::to_string(*post_);
    if (dev_) out += ".dev" + std::to_string(*dev_);
    if (!local_.empty()) {
        out += '+';
        for (std::size_t i = 0; i < local_.size(); ++i) {
            if (i) out += '.';
            std::visit(
                [&](const auto& p) {
                    if constexpr (std::is_same_v<std::decay_t<decltype(p)>, std::string>) out += p;
                    else out += std::to_string(p);
                },
                local_[i]);
        }
    }
    return out;
}

Version Version::public_version() const {
    Version v = *this;
    v.local_.clear();
    v.raw_ = v.str();
    return v;
}

Version Version::base_version() const {
    Version v;
    v.epoch_ = epoch_;
    v.release_ = release_;
    v.raw_ = v.str();
    return v;
}

std::strong_ordering operator<=>(const Version& a, const Version& b) {
    if (auto c = a.epoch_ <=> b.epoch_; c != 0) return c;

    const auto n = std::max(a.release_.size(), b.release_.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = i < a.release_.size() ? a.release_[i] : 0;
        const auto y = i < b.release_.size() ? b.release_[i] : 0;
        if (auto c = x <=> y; c != 0) return c;
    }

    // A bare dev release sorts before every pre-release of the same release.
    auto pre_key = [](const Version& v) {
        if (!v.pre_ && !v.post_ && v.dev_) return Bound{-1};
        if (!v.pre_) return Bound{1};
        return Bound{0, v.pre_->second, static_cast<int>(v.pre_->first)};
    };
    auto post_key = [](const Version& v) { return v.post_ ? Bound{0, *v.post_} : Bound{-1}; };
    auto dev_key = [](const Version& v) { return v.dev_ ? Bound{0, *v.dev_} : Bound{1}; };

    if (auto c = pre_key(a) <=> pre_key(b); c != 0) return c;
    if (auto c = post_key(a) <=> post_key(b); c != 0) return c;
    if (auto c = dev_key(a) <=> dev_key(b); c != 0) return c;

    // Local labels: absent < present; numeric segments beat alphanumeric ones.
    if (a.local_.empty() != b.local_.empty()) return a.local_.empty() ? std::strong_ordering::less
                                                                      : std::strong_ordering::greater;
    const auto m = std::min(a.local_.size(), b.local_.size());
    for (std::size_t i = 0; i < m; ++i) {
        const auto& x = a.local_[i];
        const auto& y = b.local_[i];
        if (x.index() != y.index()) return x.index() == 0 ? std::strong_ordering::greater
                                                          : std::strong_ordering::less;
        if (x.index() == 0) {
            if (auto c = std::get<0>(x) <=> std::get<0>(y); c != 0) return c;
        } else {
            if (auto c = std::get<1>(x).compare(std::get<1>(y)); c != 0)
                return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
        }
    }
    return a.local_.size() <=> b.local_.size();
}

// ---------------------------------------------------------------------------
// Specifier

std::string_view to_string(Specifier::Op op) noexcept {
    switch (op) {
        case Specifier::Op::eq: return "==";
        case Specifier::Op::ne: return "!=";
        case Specifier::Op::le: return "<=";
        case Specifier::Op::ge: return ">=";
        case Specifier::Op::lt: return "<";
        case Specifier::Op::gt: return ">";
        case Specifier::Op::compatible: return "~=";
        case Specifier::Op::arbitrary: return "===";
    }
    return "?";
}

Specifier Specifier::parse(std::string_view text) {
    std::vector<Clause> clauses;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        const auto piece = trim(rest.substr(0, comma));
        if (piece.empty()) {
            if (comma == std::string_view::npos && clauses.empty()) break;
            if (comma == std::string_view::npos && trim(text).empty()) break;
            throw MalformedSpecifier("empty clause in specifier '" + std::string(text) + "'");
        }

        static constexpr std::pair<std::string_view, Op> kOps[] = {
            {"===", Op::arbitrary}, {"==", Op::eq}, {"!=", Op::ne}, {"<=", Op::le},
            {">=", Op::ge},         {"~=", Op::compatible}, {"<", Op::lt}, {">", Op::gt},
        };
        Clause clause;
        bool matched = false;
        for (const auto& [token, op] : kOps) {
            if (piece.substr(0, token.size()) == token) {
                clause.op = op;
                clause.version_text = std::string(trim(piece.substr(token.size())));
                matched = true;
                break;
            }
        }
        if (!matched || clause.version_text.empty())
            throw MalformedSpecifier("bad clause '" + std::string(piece) + "'");

        if (clause.op == Op::arbitrary) {
            clause.version = Version::try_parse(clause.version_text).value_or(Version{});
        } else {
            std::string_view vt = clause.version_text;
            if (vt.size() >= 2 && vt.substr(vt.size() - 2) == ".*") {
                if (clause.op != Op::eq && clause.op != Op::ne)
                    throw MalformedSpecifier("wildcard not allowed in '" + std::string(piece) + "'");
                clause.wildcard = true;
                vt.remove_suffix(2);
            }
            auto v = Version::try_parse(vt);
            if (!v) throw MalformedSpecifier("bad version in clause '" + std::string(piece) + "'");
            if (clause.wildcard && (v->pre() || v->post() || v->dev() || !v->local().empty()))
                throw MalformedSpecifier("wildcard needs a plain release in '" + std::string(piece) + "'");
            if (clause.op == Op::compatible && v->release().size() < 2)
                throw MalformedSpecifier("'~=' needs two release segments in '" + std::string(piece) + "'");
            clause.version = *v;
        }
        clauses.push_back(std::move(clause));

        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return Specifier(std::move(clauses));
}

namespace {

bool release_prefix_match(const Version& candidate, const Version& prefix) {
    if (candidate.epoch() != prefix.epoch()) return false;
    const auto& c = candidate.release();
    const auto& p = prefix.release();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto x = i < c.size() ? c[i] : 0;
        if (x != p[i]) return false;
    }
    return true;
}

bool clause_holds(const Specifier::Clause& cl, const Version& v) {
    using Op = Specifier::Op;
    switch (cl.op) {
        case Op::eq:
        case Op::ne: {
            bool equal;
            if (cl.wildcard) {
                equal = release_prefix_match(v, cl.version);
            } else if (cl.version.local().empty()) {
                equal = v.public_version() == cl.version;
            } else {
                equal = v == cl.version;
            }
            return cl.op == Op::eq ? equal : !equal;
        }
        case Op::le: return v.public_version() <= cl.version;
        case Op::ge: return v.public_version() >= cl.version;
        case Op::lt: {
            if (!(v.public_version() < cl.version)) return false;
            if (!cl.version.is_prerelease() && v.is_prerelease() &&
                v.base_version() == cl.version.base_version())
                return false;
            return true;
        }
        case Op::gt: {
            if (!(v.public_version() > cl.version)) return false;
            if (!cl.version.is_postrelease() && v.is_postrelease() &&
                v.base_version() == cl.version.base_version())
                return false;
            return true;
        }
        case Op::compatible: {
            if (v.public_version() < cl.version) return false;
            std::vector<std::uint64_t> prefix(cl.version.release().begin(),
                                              cl.version.release().end() - 1);
            std::string text;
            for (std::size_t i = 0; i < prefix.size(); ++i) {
                if (i) text += '.';
                text += std::to_string(prefix[i]);
            }
            auto pv = Version::parse((cl.version.epoch() ? std::to_string(cl.version.epoch()) + "!" : "") + text);
            return release_prefix_match(v, pv);
        }
        case Op::arbitrary: return v.raw() == cl.version_text;
    }
    return false;
}

}  // namespace

bool Specifier::contains(const Version& v) const {
    return std::all_of(clauses_.begin(), clauses_.end(),
                       [&](const Clause& c) { return clause_holds(c, v); });
}

std::string Specifier::str() const {
    std::string out;
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
        if (i) out += ',';
        out += to_string(clauses_[i].op);
        out += clauses_[i].version_text;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Requirements

void Requirements::add(PackageName name, Version version) {
    if (contains(name)) throw DuplicatePackage("duplicate package '" + name.raw() + "'");
    pins_.push_back({std::move(name), std::move(version)});
}

void Requirements::set(const PackageName& name, Version version) {
    for (auto& pin : pins_) {
        if (pin.name == name) {
            pin.version = std::move(version);
            return;
        }
    }
    pins_.push_back({name, std::move(version)});
}

bool Requirements::erase(const PackageName& name) {
    auto it = std::find_if(pins_.begin(), pins_.end(), [&](const Pin& p) { return p.name == name; });
    if (it == pins_.end()) return false;
    pins_.erase(it);
    return true;
}

const Version* Requirements::find(const PackageName& name) const {
    for (const auto& pin : pins_)
        if (pin.name == name) return &pin.version;
    return nullptr;
}

bool operator==(const Requirements& a, const Requirements& b) {
    if (a.size() != b.size()) return false;
    for (const auto& pin : a) {
        const auto* other = b.find(pin.name);
        if (!other || !(*other == pin.version)) return false;
    }
    return true;
}

namespace {

bool valid_name(std::string_view name) {
    if (name.empty()) return false;
    auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    if (!alnum(name.front()) || !alnum(name.back())) return false;
    return std::all_of(name.begin(), name.end(), [&](char c) { return alnum(c) || is_sep(c); });
}

}  // namespace

Requirements parse_requirements(std::string_view text) {
    Requirements reqs;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;

        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const std::string original(line);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }

        const auto eq = line.find("==");
        if (eq == std::string_view::npos || line.find("===") != std::string_view::npos)
            throw MalformedRequirement("expected 'name==version': '" + original + "'");
        const auto name = trim(line.substr(0, eq));
        const auto ver = trim(line.substr(eq + 2));
        if (!valid_name(name)) throw MalformedRequirement("bad package name in '" + original + "'");
        auto v = Version::try_parse(ver);
        if (!v) throw MalformedRequirement("bad pinned version in '" + original + "'");
        reqs.add(PackageName(std::string(name)), *v);
        if (end == text.size()) break;
    }
    return reqs;
}

std::string render_requirements(const Requirements& reqs) {
    std::string out;
    for (const auto& pin : reqs) {
        out += pin.name.raw();
        out += "==";
        out += pin.version.raw();
        out += '\n';
    }
    return out;
}

}  // namespace reqsolve
