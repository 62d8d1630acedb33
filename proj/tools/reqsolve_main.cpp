#include "reqsolve/cli.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    reqsolve::CommandLine cmd;
    CLI::App app{"Infer a compatible pinned requirements file after upgrading one library"};
    std::string config, index_url, dump, output;
    int max_iterations = 0;
    app.add_option("-c,--config", config, "configuration file (key = value or JSON)")->required()->check(CLI::ExistingFile);
    app.add_flag("--offline", cmd.offline, "use only the knowledge cache");
    auto* index_opt = app.add_option("--index-url", index_url, "package index base URL (https:// or file://)");
    auto* dump_opt = app.add_option("--dump-formula", dump, "write the first constraint formula to this path");
    auto* iter_opt = app.add_option("--max-iterations", max_iterations, "solve/assess round budget")->check(CLI::PositiveNumber);
    auto* out_opt = app.add_option("-o,--output-dir", output, "directory for requirements.out.txt and the reports");
    app.add_flag("-v,--verbose", cmd.verbose, "log progress to stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    cmd.config = config;
    if (*index_opt) cmd.index_url = index_url;
    if (*dump_opt) cmd.dump_formula = dump;
    if (*iter_opt) cmd.max_iterations = max_iterations;
    if (*out_opt) cmd.output_dir = output;
    return reqsolve::execute(cmd);
}
