#pragma once

#include "reqsolve/versioning.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace reqsolve {

namespace fs = std::filesystem;

struct Config {
    fs::path project_path;
    fs::path requirements_path;
    PackageName target_name;
    Version current_version;
    Version target_version;
    std::string python_version = "3.8";
    fs::path knowledge_path;
    std::optional<std::string> index_url;
    bool offline = false;
    int max_iterations = 50;
    int max_seconds = 600;
    int call_graph_depth = 10;
    fs::path output_dir;
};

/// Parses a configuration given as JSON (an object) or as `key = value`
/// lines. Relative paths resolve against `base_dir`. Throws ConfigInvalid.
Config parse_config(std::string_view text, const fs::path& base_dir);

/// Reads, parses and validates a configuration file. The knowledge path may
/// be overridden by the REQSOLVE_KNOWLEDGE environment variable. Throws
/// ConfigInvalid, PinMismatch.
Config load_config(const fs::path& path);

/// Checks that paths exist and the requirements pin the target at
/// `current_version`; returns the parsed requirements.
Requirements validate_config(const Config& config);

}  // namespace reqsolve
