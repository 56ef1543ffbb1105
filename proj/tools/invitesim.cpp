#include "invitesim/acceptance.hpp"
#include "invitesim/error.hpp"
#include "invitesim/experiment.hpp"
#include "invitesim/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace invitesim;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "Base seed (u64)");
    cmd->add_option("--out", flags.out_dir, "Output directory");
    cmd->add_option("--workers", flags.workers, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
    }
    return config_from_json(doc);
}

void apply(ExperimentConfig& c, const CommonFlags& flags) {
    if (flags.seed) c.seed = *flags.seed;
    if (!flags.out_dir.empty()) c.out_dir = flags.out_dir;
    if (flags.workers) c.workers = *flags.workers;
}

int execute(ExperimentConfig config) {
    const auto manifest = run(config);
    std::cout << config.name << ": " << manifest.files.size() << " files in " << config.out_dir.string() << " ("
              << format_number(manifest.wall_seconds) << " s)\n";
    for (const auto& f : manifest.files) std::cout << "  " << f.path << "  " << f.checksum << '\n';
    for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
    if (!manifest.summary.empty()) std::cout << manifest.summary.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and limit-model toolkit for an invitation-based service system"};
    app.set_version_flag("--version", INVITESIM_VERSION);
    app.require_subcommand(1);

    struct Pipeline {
        const char* name;
        const char* help;
        std::vector<Output> outputs;
    };
    const std::vector<Pipeline> pipelines = {
        {"simulate", "Simulate the CTMC and write sampled trajectories", {Output::Trajectory}},
        {"fluid", "Solve the fluid model from each initial state", {Output::Fluid}},
        {"diffusion", "Integrate the diffusion moment equations", {Output::DiffusionMoments}},
        {"stationary", "Long-run batch-means estimate with Gaussian check", {Output::Stationary}},
        {"compare", "Simulation against fluid model: overlay CSV and deviation report",
         {Output::Trajectory, Output::Fluid, Output::Overlay}},
        {"sweep", "Sup deviation from the fluid model across scales r", {Output::Sweep}},
    };

    CommonFlags flags;
    std::vector<CLI::App*> pipeline_cmds;
    for (const auto& p : pipelines) {
        auto* cmd = app.add_subcommand(p.name, p.help);
        add_common(cmd, flags);
        pipeline_cmds.push_back(cmd);
    }

    auto* preset_cmd = app.add_subcommand("preset", "Run a compiled-in experiment preset");
    std::string preset_name;
    bool export_only = false;
    bool list_only = false;
    preset_cmd->add_option("name", preset_name, "Preset name");
    preset_cmd->add_flag("--export", export_only, "Print the preset as JSON config instead of running it");
    preset_cmd->add_flag("--list", list_only, "List preset names");
    add_common(preset_cmd, flags);

    auto* acc_cmd = app.add_subcommand("acceptance", "Run an acceptance suite (or 'all')");
    std::string suite;
    bool json_out = false;
    acc_cmd->add_option("suite", suite, "Suite name")->required();
    acc_cmd->add_flag("--json", json_out, "Print the JSON report instead of summary lines");
    add_common(acc_cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        for (std::size_t i = 0; i < pipelines.size(); ++i) {
            if (!pipeline_cmds[i]->parsed()) continue;
            ExperimentConfig config;
            if (!flags.config_path.empty()) config = load_config(flags.config_path);
            config.outputs = pipelines[i].outputs;
            apply(config, flags);
            return execute(config);
        }

        if (preset_cmd->parsed()) {
            if (list_only || preset_name.empty()) {
                for (const auto& c : presets()) std::cout << c.name << '\n';
                return 0;
            }
            auto config = preset(preset_name);
            apply(config, flags);
            if (export_only) {
                std::cout << config_to_json(config).dump(2) << '\n';
                return 0;
            }
            return execute(config);
        }

        if (acc_cmd->parsed()) {
            AcceptanceOptions opt;
            if (flags.seed) opt.seed = *flags.seed;
            if (flags.workers) opt.workers = *flags.workers;
            const auto reports = run_acceptance(suite, opt);
            const auto doc = to_json(reports);
            if (json_out) {
                std::cout << doc.dump(2) << '\n';
            } else {
                for (const auto& rep : reports) {
                    for (const auto& c : rep.criteria) {
                        std::cout << summary_line(c) << '\n';
                        for (const auto& d : c.details) std::cout << "      " << d << '\n';
                    }
                    if (reports.size() > 1)
                        std::cout << "      suite " << rep.suite << ": " << format_number(rep.seconds) << " s\n";
                }
            }
            if (!flags.out_dir.empty()) write_json_file(std::filesystem::path(flags.out_dir) / ("acceptance_" + suite + ".json"), doc);
            return doc.at("pass").get<bool>() ? 0 : 2;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
