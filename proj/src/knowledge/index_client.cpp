#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "reqsolve/errors.hpp"
#include "reqsolve/knowledge.hpp"

#include <chrono>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

namespace reqsolve {

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw IndexUnavailable("not an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string strip_trailing_slash(std::string s) {
    while (s.size() > 1 && s.back() == '/') s.pop_back();
    return s;
}

std::optional<std::string> read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

nlohmann::json parse_index_json(const std::string& body, const std::string& where) {
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw IndexUnavailable("malformed index response from " + where + ": " + e.what());
    }
}

}  // namespace

// ---------------------------------------------------------------------------

HttpIndexClient::HttpIndexClient(std::string base_url) : base_(strip_trailing_slash(std::move(base_url))) {}

std::optional<std::string> HttpIndexClient::get(const std::string& url) {
    const auto [origin, path] = split_url(url);
    std::string last_error;
    auto delay = std::chrono::milliseconds(500);
    for (int attempt = 1; attempt <= 3; ++attempt) {
        httplib::Client client(origin);
        client.set_follow_location(true);
        client.set_connection_timeout(10);
        client.set_read_timeout(60);
        auto res = client.Get(path);
        if (res) {
            if (res->status == 200) return res->body;
            if (res->status == 404) return std::nullopt;
            last_error = "HTTP " + std::to_string(res->status);
        } else {
            last_error = httplib::to_string(res.error());
        }
        spdlog::debug("GET {} failed (attempt {}): {}", url, attempt, last_error);
        if (attempt < 3) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
    throw IndexUnavailable("GET " + url + " failed: " + last_error);
}

std::optional<nlohmann::json> HttpIndexClient::project(const PackageName& name) {
    const auto url = base_ + "/pypi/" + name.normalized() + "/json";
    auto body = get(url);
    if (!body) return std::nullopt;
    return parse_index_json(*body, url);
}

std::optional<nlohmann::json> HttpIndexClient::release(const PackageName& name, const std::string& version) {
    const auto url = base_ + "/pypi/" + name.normalized() + "/" + version + "/json";
    auto body = get(url);
    if (!body) return std::nullopt;
    return parse_index_json(*body, url);
}

fs::path HttpIndexClient::download(const std::string& url, const fs::path& dest_dir) {
    std::optional<std::string> body;
    try {
        body = get(url);
    } catch (const IndexUnavailable& e) {
        throw SourceUnavailable(e.what());
    }
    if (!body) throw SourceUnavailable("not found: " + url);
    auto filename = split_url(url).path;
    filename = filename.substr(filename.rfind('/') + 1);
    if (auto q = filename.find_first_of("?#"); q != std::string::npos) filename.resize(q);
    fs::create_directories(dest_dir);
    const auto target = dest_dir / filename;
    write_file_atomic(target, *body);
    return target;
}

// ---------------------------------------------------------------------------

FileIndexClient::FileIndexClient(fs::path root) : root_(std::move(root)) {}

std::optional<fs::path> FileIndexClient::project_dir(const PackageName& name) const {
    for (const auto& dir : {name.normalized(), name.raw()})
        if (fs::is_directory(root_ / "pypi" / dir)) return root_ / "pypi" / dir;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_ / "pypi", ec))
        if (PackageName(entry.path().filename().string()) == name) return entry.path();
    return std::nullopt;
}

std::optional<nlohmann::json> FileIndexClient::project(const PackageName& name) {
    if (!fs::is_directory(root_)) throw IndexUnavailable("index directory missing: " + root_.string());
    const auto dir = project_dir(name);
    if (!dir) return std::nullopt;
    const auto p = *dir / "json";
    if (auto text = read_text(p)) return parse_index_json(*text, p.string());
    return std::nullopt;
}

std::optional<nlohmann::json> FileIndexClient::release(const PackageName& name, const std::string& version) {
    const auto dir = project_dir(name);
    if (!dir) return std::nullopt;
    const auto p = *dir / version / "json";
    if (auto text = read_text(p)) return parse_index_json(*text, p.string());
    return std::nullopt;
}

fs::path FileIndexClient::download(const std::string& url, const fs::path&) {
    fs::path p = url.starts_with("file://") ? fs::path(url.substr(7)) : root_ / url;
    if (!fs::exists(p)) throw SourceUnavailable("not found: " + p.string());
    return p;
}

std::unique_ptr<IndexClient> make_index_client(const std::string& url) {
    if (url.starts_with("file://")) return std::make_unique<FileIndexClient>(fs::path(url.substr(7)));
    return std::make_unique<HttpIndexClient>(url);
}

}  // namespace reqsolve
