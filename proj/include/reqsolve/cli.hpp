#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace reqsolve {

namespace fs = std::filesystem;

inline constexpr const char* default_index_url = "https://pypi.org";

/// Command-line settings; each set field overrides the configuration file.
struct CommandLine {
    fs::path config;
    bool offline = false;
    std::optional<std::string> index_url;
    std::optional<fs::path> dump_formula;
    std::optional<int> max_iterations;
    std::optional<fs::path> output_dir;
    bool verbose = false;
};

/// Runs one inference and writes `requirements.out.txt`, `report.json` and
/// `report.txt` to the output directory. Returns 0 (compatible), 2 (fallback
/// emitted) or 1 (fatal error). Never throws.
int execute(const CommandLine& cmd);

}  // namespace reqsolve
