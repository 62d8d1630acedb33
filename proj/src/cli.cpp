#include "reqsolve/cli.hpp"

#include "reqsolve/config.hpp"
#include "reqsolve/errors.hpp"
#include "reqsolve/knowledge.hpp"
#include "reqsolve/report.hpp"
#include "reqsolve/solver.hpp"
#include "reqsolve/strategy.hpp"

#include <spdlog/spdlog.h>

namespace reqsolve {

namespace {

void write_outputs(const fs::path& dir, const nlohmann::json& report, const Requirements* reqs) {
    fs::create_directories(dir);
    if (reqs) write_file_atomic(dir / "requirements.out.txt", render_requirements(*reqs));
    write_file_atomic(dir / "report.json", dump_json(report));
    write_file_atomic(dir / "report.txt", report_text(report));
}

}  // namespace

int execute(const CommandLine& cmd) {
    spdlog::set_level(cmd.verbose ? spdlog::level::debug : spdlog::level::warn);

    ReportInput report;
    std::optional<Config> config;
    std::optional<fs::path> out_dir = cmd.output_dir;
    Requirements start;
    std::optional<InferenceResult> result;

    try {
        config = load_config(cmd.config);
        if (cmd.offline) config->offline = true;
        if (cmd.index_url) config->index_url = *cmd.index_url;
        if (cmd.max_iterations) {
            if (*cmd.max_iterations <= 0) throw ConfigInvalid("max_iterations: expected a positive integer");
            config->max_iterations = *cmd.max_iterations;
        }
        if (cmd.output_dir) config->output_dir = *cmd.output_dir;
        out_dir = config->output_dir;
        report.config = &*config;

        start = validate_config(*config);
        report.start = &start;

        KnowledgeOptions ko;
        ko.cache_dir = config->knowledge_path;
        ko.offline = config->offline;
        ko.environment.python_version = Version::parse(config->python_version);
        std::unique_ptr<IndexClient> client;
        if (!config->offline) client = make_index_client(config->index_url.value_or(default_index_url));
        KnowledgeStore store(std::move(client), ko);

        InferenceInput input{start, config->target_name, config->target_version, config->project_path};
        InferenceOptions io;
        io.max_iterations = config->max_iterations;
        io.wall_clock = std::chrono::seconds(config->max_seconds);
        io.max_depth = config->call_graph_depth;
        spdlog::info("upgrading {} {} -> {}", config->target_name.raw(), config->current_version.raw(),
                     config->target_version.raw());
        result = run_inference(input, store, io);
        report.result = &*result;
        report.status = result->success ? RunStatus::compatible : RunStatus::fallback;
        report.warnings = store.warnings();

        if (cmd.dump_formula && result->first_formula) {
            auto path = *cmd.dump_formula;
            if (path.is_relative()) path = *out_dir / path;
            fs::create_directories(path.parent_path());
            write_file_atomic(path, dump_formula(*result->first_formula));
        }
    } catch (const Error& e) {
        report.status = RunStatus::error;
        report.error_kind = e.kind();
        report.error_message = e.what();
    } catch (const std::exception& e) {
        report.status = RunStatus::error;
        report.error_kind = "InternalError";
        report.error_message = e.what();
    }

    if (report.status == RunStatus::error) spdlog::error("{}: {}", report.error_kind, report.error_message);
    const auto json = report_json(report);
    if (out_dir) {
        try {
            write_outputs(*out_dir, json, report.status == RunStatus::error ? nullptr : &result->requirements);
        } catch (const std::exception& e) {
            spdlog::error("cannot write outputs to {}: {}", out_dir->string(), e.what());
            return 1;
        }
    }
    return exit_code(report.status);
}

}  // namespace reqsolve
