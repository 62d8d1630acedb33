#pragma once

#include "reqsolve/config.hpp"
#include "reqsolve/strategy.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace reqsolve {

inline constexpr int report_schema_version = 1;

enum class RunStatus { compatible, fallback, error };
std::string_view to_string(RunStatus s) noexcept;
int exit_code(RunStatus s) noexcept;

struct ReportInput {
    RunStatus status = RunStatus::error;
    const Config* config = nullptr;
    const Requirements* start = nullptr;
    const InferenceResult* result = nullptr;
    std::vector<std::string> warnings;
    std::string error_kind;
    std::string error_message;
};

/// Version moves between the starting pins and the final requirements;
/// `from` is null for packages added by completion.
nlohmann::json requirement_changes(const Requirements& start, const Requirements& final_reqs);

nlohmann::json report_json(const ReportInput& in);
std::string report_text(const nlohmann::json& report);

}  // namespace reqsolve
