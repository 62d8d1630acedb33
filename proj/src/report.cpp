#include "reqsolve/report.hpp"

#include <sstream>

namespace reqsolve {

using nlohmann::json;

std::string_view to_string(RunStatus s) noexcept {
    switch (s) {
        case RunStatus::compatible: return "compatible";
        case RunStatus::fallback: return "fallback";
        case RunStatus::error: return "error";
    }
    return "error";
}

int exit_code(RunStatus s) noexcept {
    switch (s) {
        case RunStatus::compatible: return 0;
        case RunStatus::fallback: return 2;
        case RunStatus::error: return 1;
    }
    return 1;
}

json requirement_changes(const Requirements& start, const Requirements& final_reqs) {
    json out = json::array();
    for (const auto& pin : final_reqs) {
        const auto* before = start.find(pin.name);
        if (before && *before == pin.version) continue;
        out.push_back({{"package", pin.name.raw()},
                       {"from", before ? json(before->raw()) : json(nullptr)},
                       {"to", pin.version.raw()}});
    }
    return out;
}

namespace {

json config_json(const Config& c) {
    return {
        {"project_path", c.project_path.string()},
        {"requirements_path", c.requirements_path.string()},
        {"target_name", c.target_name.raw()},
        {"current_version", c.current_version.raw()},
        {"target_version", c.target_version.raw()},
        {"python_version", c.python_version},
        {"index_url", c.index_url ? json(*c.index_url) : json(nullptr)},
        {"offline", c.offline},
        {"max_iterations", c.max_iterations},
        {"max_seconds", c.max_seconds},
        {"call_graph_depth", c.call_graph_depth},
    };
}

json issues_json(const std::vector<CompatIssue>& issues) {
    json out = json::array();
    for (const auto& i : issues) out.push_back(to_json(i));
    return out;
}

}  // namespace

json report_json(const ReportInput& in) {
    json r;
    r["schema"] = report_schema_version;
    r["status"] = to_string(in.status);
    r["exit_code"] = exit_code(in.status);
    r["config"] = in.config ? config_json(*in.config) : json(nullptr);
    r["requirements"] = json::array();
    r["changes"] = json::array();
    r["detected_issues"] = json::array();
    r["remaining_issues"] = json::array();
    r["completed"] = json::array();
    r["iterations"] = 0;
    r["reason"] = nullptr;
    r["events"] = json::array();
    r["warnings"] = in.warnings;
    r["error"] = nullptr;
    if (const auto* res = in.result) {
        r["requirements"] = to_json(res->requirements);
        if (in.start) r["changes"] = requirement_changes(*in.start, res->requirements);
        r["detected_issues"] = issues_json(res->detected);
        r["remaining_issues"] = issues_json(res->remaining);
        for (const auto& [n, v] : res->completed) r["completed"].push_back({{"name", n.raw()}, {"version", v.raw()}});
        r["iterations"] = res->iterations;
        if (!res->success) r["reason"] = res->reason;
        r["events"] = res->log.events();
    }
    if (in.status == RunStatus::error) r["error"] = {{"kind", in.error_kind}, {"message", in.error_message}};
    return r;
}

namespace {

std::string text_of(const json& j) { return j.is_null() ? "-" : j.get<std::string>(); }

void issue_lines(std::ostringstream& out, const json& issues) {
    if (issues.empty()) {
        out << "  (none)\n";
        return;
    }
    for (const auto& i : issues) {
        out << "  [" << text_of(i["level"]) << " " << text_of(i["kind"]) << "] " << text_of(i["package"]) << " "
            << text_of(i["from"]) << " -> " << text_of(i["to"]) << ": " << text_of(i["entity"]) << "\n";
        out << "      " << text_of(i["detail"]);
        if (!i["site"].is_null()) out << " at " << text_of(i["site"]);
        out << "\n";
        if (!i["chain"].empty()) {
            out << "      via";
            for (const auto& n : i["chain"]) out << " " << n.get<std::string>();
            out << "\n";
        }
    }
}

std::string event_line(const json& e) {
    const auto type = e["event"].get<std::string>();
    std::ostringstream out;
    out << "#" << e["seq"].get<int>() << " " << type;
    if (type == "solve") {
        out << " iteration " << e["iteration"] << ": " << text_of(e["status"]);
        if (e.contains("assignment")) {
            for (auto& [k, v] : e["assignment"].items()) out << " " << k << "==" << v.get<std::string>();
        }
    } else if (type == "change") {
        out << " " << text_of(e["package"]) << " " << text_of(e["from"]) << " -> " << text_of(e["to"]);
        if (e.value("assessed", false))
            out << " (" << e["apis"] << " APIs, " << e["modules"] << " modules, " << e["chains"].size() << " chains)";
        else
            out << " (new package, not assessed)";
    } else if (type == "assessment") {
        out << " iteration " << e["iteration"] << ": " << e["issues"].size() << " issue(s)";
    } else if (type == "plan") {
        out << " for " << text_of(e["issue"]["entity"]) << ":";
        for (const auto& p : e["plans"]) out << " " << text_of(p["subject"]) << "/" << text_of(p["rationale"]) << "(" << p["candidates"].size() << ")";
        if (e.contains("note")) out << " " << text_of(e["note"]);
    } else if (type == "trial") {
        out << " " << text_of(e["subject"]) << "==" << text_of(e["version"]) << " (" << text_of(e["rationale"]) << ")";
    } else if (type == "trial-error") {
        out << " " << text_of(e["kind"]) << ": " << text_of(e["message"]);
    } else if (type == "backtrack") {
        out << " from " << text_of(e["issue"]["entity"]);
    } else if (type == "completion") {
        out << " added " << e["added"].size() << ", unsatisfiable " << e["unsatisfiable"].size();
    } else if (type == "verdict") {
        out << " " << text_of(e["status"]);
        if (e.contains("reason")) out << ": " << text_of(e["reason"]);
    } else if (type == "start") {
        out << " " << text_of(e["target"]) << " " << text_of(e["from"]) << " -> " << text_of(e["to"]);
    } else if (type == "parse-failures") {
        out << " " << e["files"].size() << " file(s)";
    }
    return out.str();
}

}  // namespace

std::string report_text(const json& r) {
    std::ostringstream out;
    out << "status: " << text_of(r["status"]) << " (exit " << r["exit_code"] << ")\n";
    if (!r["config"].is_null()) {
        const auto& c = r["config"];
        out << "upgrade: " << text_of(c["target_name"]) << " " << text_of(c["current_version"]) << " -> "
            << text_of(c["target_version"]) << "\n";
    }
    if (!r["error"].is_null()) out << "error: " << text_of(r["error"]["kind"]) << ": " << text_of(r["error"]["message"]) << "\n";
    if (!r["reason"].is_null()) out << "reason: " << text_of(r["reason"]) << "\n";
    out << "iterations: " << r["iterations"] << "\n";

    out << "\nrequirements:\n";
    for (const auto& p : r["requirements"]) out << "  " << text_of(p["name"]) << "==" << text_of(p["version"]) << "\n";
    out << "\nchanges:\n";
    if (r["changes"].empty()) out << "  (none)\n";
    for (const auto& c : r["changes"])
        out << "  " << text_of(c["package"]) << " " << (c["from"].is_null() ? "(added)" : text_of(c["from"])) << " -> "
            << text_of(c["to"]) << "\n";
    out << "\ndetected issues:\n";
    issue_lines(out, r["detected_issues"]);
    if (r["status"] != "compatible") {
        out << "\nremaining issues:\n";
        issue_lines(out, r["remaining_issues"]);
    }
    if (!r["warnings"].empty()) {
        out << "\nwarnings:\n";
        for (const auto& w : r["warnings"]) out << "  " << w.get<std::string>() << "\n";
    }
    if (!r["events"].empty()) {
        out << "\nlog:\n";
        for (const auto& e : r["events"]) out << "  " << event_line(e) << "\n";
    }
    return out.str();
}

}  // namespace reqsolve
