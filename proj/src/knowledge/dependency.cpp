#include "reqsolve/errors.hpp"
#include "reqsolve/knowledge.hpp"

#include <cctype>

namespace reqsolve {

std::string TargetEnvironment::lookup(const std::string& variable) const {
    if (variable == "python_version") {
        const auto& r = python_version.release();
        return std::to_string(r.at(0)) + "." + std::to_string(r.size() > 1 ? r[1] : 0);
    }
    if (variable == "python_full_version") return python_version.str();
    if (variable == "sys_platform") return "linux";
    if (variable == "platform_system") return "Linux";
    if (variable == "os_name") return "posix";
    if (variable == "platform_machine") return "x86_64";
    if (variable == "implementation_name") return "cpython";
    if (variable == "platform_python_implementation") return "CPython";
    if (variable == "implementation_version") return python_version.str();
    return "";
}

namespace {

class MarkerParser {
public:
    MarkerParser(std::string_view text, const TargetEnvironment& env) : text_(text), env_(env) {}

    bool run() {
        const bool value = disjunction();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected text");
        return value;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw MalformedRequirement("bad marker '" + std::string(text_) + "': " + why);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool keyword(std::string_view kw) {
        skip_ws();
        if (text_.substr(pos_, kw.size()) != kw) return false;
        const auto after = pos_ + kw.size();
        if (after < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[after])) || text_[after] == '_'))
            return false;
        pos_ = after;
        return true;
    }

    bool disjunction() {
        bool value = conjunction();
        while (keyword("or")) value = conjunction() || value;
        return value;
    }

    bool conjunction() {
        bool value = atom();
        while (keyword("and")) value = atom() && value;
        return value;
    }

    struct Operand {
        std::string value;
        std::string variable;  // empty for literals
    };

    Operand operand() {
        skip_ws();
        if (pos_ >= text_.size()) fail("missing operand");
        const char q = text_[pos_];
        if (q == '"' || q == '\'') {
            const auto end = text_.find(q, pos_ + 1);
            if (end == std::string_view::npos) fail("unterminated string");
            Operand o{std::string(text_.substr(pos_ + 1, end - pos_ - 1)), ""};
            pos_ = end + 1;
            return o;
        }
        const auto start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                       text_[pos_] == '.'))
            ++pos_;
        if (start == pos_) fail("expected a variable or string");
        std::string var(text_.substr(start, pos_ - start));
        if (var.starts_with("os.") || var.starts_with("sys.") || var.starts_with("platform."))
            std::replace(var.begin(), var.end(), '.', '_');
        return {var == "extra" ? "" : env_.lookup(var), var};
    }

    std::string comparison_op() {
        skip_ws();
        for (std::string_view op : {"===", "==", "!=", "<=", ">=", "~=", "<", ">"}) {
            if (text_.substr(pos_, op.size()) == op) {
                pos_ += op.size();
                return std::string(op);
            }
        }
        if (keyword("in")) return "in";
        if (keyword("not")) {
            if (!keyword("in")) fail("expected 'in' after 'not'");
            return "not in";
        }
        fail("expected a comparison operator");
    }

    bool atom() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            ++pos_;
            const bool value = disjunction();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("missing ')'");
            ++pos_;
            return value;
        }
        const auto lhs = operand();
        const auto op = comparison_op();
        const auto rhs = operand();
        if (lhs.variable == "extra" || rhs.variable == "extra") return op == "!=" || op == "not in";
        return compare(lhs.value, op, rhs.value);
    }

    static bool compare(const std::string& lhs, const std::string& op, const std::string& rhs) {
        if (op == "in") return rhs.find(lhs) != std::string::npos;
        if (op == "not in") return rhs.find(lhs) == std::string::npos;
        const auto lv = Version::try_parse(lhs);
        if (lv && Version::try_parse(rhs)) {
            try {
                return Specifier::parse(op + rhs).contains(*lv);
            } catch (const MalformedSpecifier&) {
            }
        }
        if (op == "==" || op == "===") return lhs == rhs;
        if (op == "!=") return lhs != rhs;
        if (op == "<") return lhs < rhs;
        if (op == "<=") return lhs <= rhs;
        if (op == ">") return lhs > rhs;
        if (op == ">=") return lhs >= rhs;
        return false;
    }

    std::string_view text_;
    const TargetEnvironment& env_;
    std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

bool evaluate_marker(std::string_view marker, const TargetEnvironment& env) {
    return MarkerParser(marker, env).run();
}

std::optional<Dependency> parse_dependency(std::string_view text, const TargetEnvironment& env) {
    const std::string original(text);
    std::string_view body = text;
    if (auto semi = text.find(';'); semi != std::string_view::npos) {
        if (!evaluate_marker(text.substr(semi + 1), env)) return std::nullopt;
        body = text.substr(0, semi);
    }
    body = trim(body);

    std::size_t i = 0;
    auto name_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    };
    while (i < body.size() && name_char(body[i])) ++i;
    if (i == 0 || !std::isalnum(static_cast<unsigned char>(body.front())))
        throw MalformedRequirement("bad dependency '" + original + "'");

    Dependency dep;
    dep.name = PackageName(std::string(body.substr(0, i)));
    auto rest = trim(body.substr(i));

    if (!rest.empty() && rest.front() == '[') {
        const auto close = rest.find(']');
        if (close == std::string_view::npos) throw MalformedRequirement("unclosed extras in '" + original + "'");
        auto extras = rest.substr(1, close - 1);
        while (!extras.empty()) {
            const auto comma = extras.find(',');
            const auto e = trim(extras.substr(0, comma));
            if (!e.empty()) dep.extras.insert(PackageName::normalize(e));
            if (comma == std::string_view::npos) break;
            extras.remove_prefix(comma + 1);
        }
        rest = trim(rest.substr(close + 1));
    }
    if (!rest.empty() && rest.front() == '@') return dep;  // direct reference: no version constraint
    if (!rest.empty() && rest.front() == '(') {
        if (rest.back() != ')') throw MalformedRequirement("unbalanced parentheses in '" + original + "'");
        rest = trim(rest.substr(1, rest.size() - 2));
    }
    try {
        dep.spec = Specifier::parse(rest);
    } catch (const MalformedSpecifier& e) {
        throw MalformedRequirement("bad dependency '" + original + "': " + e.what());
    }
    return dep;
}

}  // namespace reqsolve
