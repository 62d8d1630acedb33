#include "reqsolve/config.hpp"

#include "reqsolve/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace reqsolve {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
    return s;
}

std::map<std::string, std::string> read_pairs(std::string_view text) {
    std::map<std::string, std::string> out;
    const auto trimmed = trim(text);
    if (!trimmed.empty() && trimmed.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(trimmed);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigInvalid(std::string("config: invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ConfigInvalid("config: JSON configuration must be an object");
        for (auto& [k, v] : j.items()) {
            if (v.is_string()) out[k] = v.get<std::string>();
            else if (v.is_null()) continue;
            else out[k] = v.dump();
        }
        return out;
    }
    std::istringstream in{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) eq = t.find(':');
        if (eq == std::string::npos) throw ConfigInvalid("config line " + std::to_string(n) + ": expected key = value");
        out[trim(t.substr(0, eq))] = unquote(trim(t.substr(eq + 1)));
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off" || v.empty()) return false;
    throw ConfigInvalid(key + ": expected a boolean, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        int i = std::stoi(v, &used);
        if (used == v.size() && i > 0) return i;
    } catch (const std::exception&) {
    }
    throw ConfigInvalid(key + ": expected a positive integer, got '" + v + "'");
}

Version parse_version(const std::string& key, const std::string& v) {
    try {
        return Version::parse(v);
    } catch (const MalformedVersion&) {
        throw ConfigInvalid(key + ": not a valid version: '" + v + "'");
    }
}

fs::path default_cache() {
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "reqsolve";
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "reqsolve";
    return fs::temp_directory_path() / "reqsolve-cache";
}

}  // namespace

Config parse_config(std::string_view text, const fs::path& base_dir) {
    auto pairs = read_pairs(text);
    auto take = [&](std::initializer_list<const char*> keys) -> std::optional<std::string> {
        for (const char* k : keys) {
            auto it = pairs.find(k);
            if (it != pairs.end()) {
                auto v = it->second;
                pairs.erase(it);
                return v;
            }
        }
        return std::nullopt;
    };
    auto required = [&](std::initializer_list<const char*> keys) {
        auto v = take(keys);
        if (!v || v->empty()) throw ConfigInvalid(std::string(*keys.begin()) + ": missing");
        return *v;
    };
    auto path = [&](const std::string& v) {
        fs::path p(v);
        return p.is_absolute() ? p : (base_dir / p).lexically_normal();
    };

    Config c;
    c.project_path = path(required({"project_path", "project"}));
    c.requirements_path = path(required({"requirements_path", "requirements"}));
    c.target_name = PackageName(required({"target_name", "target"}));
    c.current_version = parse_version("current_version", required({"current_version"}));
    c.target_version = parse_version("target_version", required({"target_version"}));
    if (auto v = take({"python_version"})) c.python_version = *v;
    parse_version("python_version", c.python_version);
    if (auto v = take({"knowledge_path", "knowledge"})) c.knowledge_path = path(*v);
    if (auto v = take({"index_url"}); v && !v->empty()) c.index_url = *v;
    if (auto v = take({"offline"})) c.offline = parse_bool("offline", *v);
    if (auto v = take({"max_iterations"})) c.max_iterations = parse_int("max_iterations", *v);
    if (auto v = take({"max_seconds"})) c.max_seconds = parse_int("max_seconds", *v);
    if (auto v = take({"call_graph_depth"})) c.call_graph_depth = parse_int("call_graph_depth", *v);
    if (auto v = take({"output_dir"})) c.output_dir = path(*v);
    if (!pairs.empty()) throw ConfigInvalid(pairs.begin()->first + ": unknown key");

    if (c.current_version == c.target_version)
        throw ConfigInvalid("target_version: equals current_version " + c.current_version.raw());
    if (c.output_dir.empty()) c.output_dir = base_dir;
    return c;
}

Config load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigInvalid("config: cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto base = fs::absolute(path).parent_path();
    auto c = parse_config(ss.str(), base);
    if (const char* env = std::getenv("REQSOLVE_KNOWLEDGE"); env && *env) c.knowledge_path = fs::absolute(env);
    if (c.knowledge_path.empty()) c.knowledge_path = default_cache();
    return c;
}

Requirements validate_config(const Config& config) {
    std::error_code ec;
    if (!fs::is_directory(config.project_path, ec))
        throw ConfigInvalid("project_path: not a readable directory: " + config.project_path.string());
    std::ifstream in(config.requirements_path, std::ios::binary);
    if (!in) throw ConfigInvalid("requirements_path: cannot read " + config.requirements_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Requirements reqs;
    try {
        reqs = parse_requirements(ss.str());
    } catch (const Error& e) {
        throw ConfigInvalid("requirements_path: " + std::string(e.what()));
    }
    const auto* pinned = reqs.find(config.target_name);
    if (!pinned)
        throw PinMismatch(config.target_name.raw() + ": declared " + config.current_version.raw() +
                          ", but the requirements do not pin it");
    if (!(*pinned == config.current_version))
        throw PinMismatch(config.target_name.raw() + ": declared " + config.current_version.raw() +
                          ", requirements pin " + pinned->raw());
    return reqs;
}

}  // namespace reqsolve
