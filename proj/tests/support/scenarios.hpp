#pragma once

// Scenario fixtures: each directory under tests/fixtures holds an
// `index.json` ({package: {version: {requires_dist, requires_python}}}),
// release sources under `sources/<name>-<version>/`, a `project/` tree and a
// `requirements.txt`. `scenarios.json` names the upgrade to run on a fixture
// and what must come out.

#include "index_builder.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace testutil {

namespace fs = std::filesystem;

struct Scenario {
    std::string id;
    std::string fixture;
    std::string target;
    std::string current;
    std::string target_version;
    nlohmann::json expected;  // exit_code, requirements, detected_issues
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<Scenario> load_scenarios(const fs::path& fixtures) {
    std::vector<Scenario> out;
    for (const auto& s : nlohmann::json::parse(slurp(fixtures / "scenarios.json")))
        out.push_back({s.at("id"), s.at("fixture"), s.at("target"), s.at("current"), s.at("target_version"),
                       s.at("expected")});
    return out;
}

/// Writes the fixture's package index as a file index under `dest`.
inline void build_index(const fs::path& fixture, const fs::path& dest) {
    IndexBuilder builder(dest);
    const auto index = nlohmann::json::parse(slurp(fixture / "index.json"));
    for (const auto& [name, releases] : index.items()) {
        for (const auto& [version, meta] : releases.items()) {
            IndexBuilder::Release r;
            r.version = version;
            r.requires_dist = meta.value("requires_dist", std::vector<std::string>{});
            r.requires_python = meta.value("requires_python", std::string{});
            const auto src = fixture / "sources" / (name + "-" + version);
            if (fs::is_directory(src)) {
                std::vector<fs::path> files;
                for (const auto& e : fs::recursive_directory_iterator(src))
                    if (e.is_regular_file()) files.push_back(e.path());
                for (const auto& f : files) r.files[fs::relative(f, src).generic_string()] = slurp(f);
            }
            builder.add(name, std::move(r));
        }
    }
    builder.write();
}

struct Workspace {
    fs::path config;
    fs::path output;
    fs::path cache;
};

/// Materializes the index under `work/index` and writes `work/config.txt`
/// pointing at the fixture's project and requirements.
inline Workspace prepare(const Scenario& s, const fs::path& fixtures, const fs::path& work) {
    const auto fixture = fixtures / s.fixture;
    fs::create_directories(work);
    build_index(fixture, work / "index");
    Workspace ws{work / "config.txt", work / "out", work / "cache"};
    std::ofstream(ws.config) << "project_path = " << (fixture / "project").string() << "\n"
                             << "requirements_path = " << (fixture / "requirements.txt").string() << "\n"
                             << "target_name = " << s.target << "\n"
                             << "current_version = " << s.current << "\n"
                             << "target_version = " << s.target_version << "\n"
                             << "knowledge_path = " << ws.cache.string() << "\n"
                             << "index_url = file://" << (work / "index").string() << "\n"
                             << "output_dir = " << ws.output.string() << "\n";
    return ws;
}

/// Issues reduced to the fields a scenario pins down.
inline nlohmann::json issue_summary(const nlohmann::json& issues) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& i : issues)
        out.push_back({i.at("level"), i.at("kind"), i.at("package"), i.at("entity")});
    return out;
}

}  // namespace testutil
