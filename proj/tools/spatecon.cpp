#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "spatecon/config.hpp"
#include "spatecon/parallel.hpp"
#include "spatecon/pipeline.hpp"

namespace {

std::string read_file_or_die(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw spatecon::ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"spatecon: county-scale spatial regression toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string manifest_path;
    long long seed_override = -1;
    int threads_override = -1;

    const char* model_commands[] = {"ingest", "weights", "model1", "model2", "model3",
                                    "model4", "select", "importance"};
    const char* descriptions[] = {
        "join geometry and attributes, emit the joined GeoJSON",
        "build and export the spatial weight matrix",
        "global regression with dependence diagnostics (OLS, then SLM/SEM when indicated)",
        "local regression: GWR and MGWR on the configured covariates",
        "group-wise selection followed by per-group GWR and MGWR",
        "month-by-month GWR and MGWR on monthly response totals",
        "stepwise forward variable selection with VIF gates",
        "random-forest relative importance of the configured covariates",
    };
    for (std::size_t c = 0; c < std::size(model_commands); ++c) {
        CLI::App* sub = app.add_subcommand(model_commands[c], descriptions[c]);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides run.output_dir)");
        sub->add_option("--seed", seed_override, "seed override");
        sub->add_option("--threads", threads_override, "thread count override");
    }
    CLI::App* report = app.add_subcommand("report", "verify a run directory against its manifest");
    report->add_option("--manifest", manifest_path, "path to manifest.json")->required();

    CLI11_PARSE(app, argc, argv);

    if (const char* env = std::getenv("SPATECON_THREADS")) {
        int n = std::atoi(env);
        if (n > 0)
            spatecon::set_default_threads(n);
    }

    try {
        if (report->parsed()) {
            bool ok = spatecon::verify_manifest(manifest_path, std::cout);
            return ok ? 0 : 1;
        }
        std::string command = app.get_subcommands().front()->get_name();
        spatecon::RunConfig cfg = spatecon::parse_run_config(read_file_or_die(config_path));
        if (!out_dir.empty())
            cfg.output_dir = out_dir;
        if (seed_override >= 0)
            cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (threads_override >= 0)
            cfg.threads = threads_override;

        spatecon::CommandResult result = spatecon::run_command(command, cfg);
        for (const auto& warning : result.warnings)
            std::cerr << "warning: " << warning << '\n';
        std::cout << command << ": wrote " << result.outputs.size() << " files to " << cfg.output_dir
                  << '\n';
        for (const auto& path : result.outputs)
            std::cout << "  " << path << '\n';
        return 0;
    } catch (const spatecon::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
