// Batch front end: sector inspection, spectra, DoS, level statistics,
// eigenstate observables, Page values, quench dynamics, scaling collapse and
// imbalance-decay fits, driven by a JSON config or canned reproduction tags.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stark/config.hpp"
#include "stark/experiment.hpp"
#include "stark/io.hpp"
#include "stark/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitNumericalError = 2;
constexpr int kExitPartial = 3;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int workers = 0;
    std::string scale = "desk";
};

stark::RunConfig load_config(const CommonFlags& flags) {
    if (flags.config_path.empty()) {
        throw stark::ConfigError("a --config file is required for this subcommand");
    }
    auto cfg = stark::RunConfig::from_json(stark::io::read_json(flags.config_path));
    if (flags.seed) cfg.seed = *flags.seed;
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.workers > 0) cfg.workers = flags.workers;
    cfg.validate();
    return cfg;
}

int manifest_exit_code(const stark::RunManifest& manifest) {
    const std::size_t failed = manifest.failed_count();
    if (failed == 0) return kExitOk;
    for (const auto& t : manifest.tasks) {
        if (t.status == "failed") {
            std::cerr << "task " << t.name << (t.point.empty() ? "" : " @ " + t.point)
                      << " failed: " << t.error << "\n";
        }
    }
    return failed == manifest.tasks.size() ? kExitNumericalError : kExitPartial;
}

int run_single_task(const CommonFlags& flags, const std::string& task) {
    auto cfg = load_config(flags);
    cfg.tasks = {task};
    const auto manifest = stark::run_experiment(cfg);
    std::cout << "wrote " << cfg.out_dir << "/manifest.json\n";
    return manifest_exit_code(manifest);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stark-MBL exact-diagonalization toolkit"};
    app.set_version_flag("--version", stark::kVersion);
    app.require_subcommand(1);

    CommonFlags flags;
    app.add_option("--config", flags.config_path, "JSON experiment configuration");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "root RNG seed (overrides config)");
    app.add_option("--out", flags.out_dir, "output directory (overrides config)");
    app.add_option("--workers", flags.workers, "task-level worker count (overrides config)");
    app.add_option("--scale", flags.scale, "desk or full (reproduce only)")
        ->check(CLI::IsMember({"desk", "full"}));
    app.fallthrough();

    // sector inspection without a config file
    auto* basis_cmd = app.add_subcommand("basis", "print sector dimensions");
    std::string basis_model = "bose_hubbard";
    int basis_L = 0;
    int basis_N = -1;
    int basis_cap = -1;
    basis_cmd->add_option("--model", basis_model, "bose_hubbard or all_to_all_xx")
        ->check(CLI::IsMember({"bose_hubbard", "all_to_all_xx"}));
    basis_cmd->add_option("--L", basis_L, "chain length")->required();
    basis_cmd->add_option("--N", basis_N, "particle number (default L/2)");
    basis_cmd->add_option("--max-occ", basis_cap, "occupancy cap (bosons; default N)");

    auto* validate_cmd = app.add_subcommand("validate-config", "parse and validate a config");
    for (const char* task :
         {"spectrum", "dos", "rstat", "eigenobs", "pagevalue", "dynamics", "collapse",
          "fitimbalance"}) {
        app.add_subcommand(task, std::string("run the ") + task + " task over the config grid");
    }

    auto* reproduce_cmd = app.add_subcommand("reproduce", "run a canned figure/table pipeline");
    std::string tag;
    reproduce_cmd->add_option("tag", tag, "fig2 fig3 fig6 fig8 fig9 fig10 figS1..figS6 tableI")
        ->required();

    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) flags.seed = seed_value;

    try {
        if (basis_cmd->parsed()) {
            const int N = basis_N >= 0 ? basis_N : basis_L / 2;
            const int cap = basis_model == "all_to_all_xx" ? 1 : (basis_cap >= 0 ? basis_cap : N);
            const stark::SectorBasis basis(basis_L, N, cap);
            std::cout << "model=" << basis_model << " L=" << basis_L << " N=" << N
                      << " max_occ=" << cap << " dimension=" << basis.dimension() << "\n";
            return kExitOk;
        }
        if (validate_cmd->parsed()) {
            const auto cfg = load_config(flags);
            std::cout << "config ok: hash=" << cfg.hash() << " tasks=" << cfg.tasks.size()
                      << " grid points="
                      << cfg.sizes.size() * cfg.gammas.size() * cfg.couplings.size() *
                             cfg.alphas.size()
                      << "\n";
            return kExitOk;
        }
        if (reproduce_cmd->parsed()) {
            const std::uint64_t seed = flags.seed.value_or(1);
            const std::string out = flags.out_dir.empty() ? "runs/" + tag + "_" + flags.scale
                                                          : flags.out_dir;
            auto cfg = stark::reproduce_config(tag, flags.scale, seed, out);
            if (flags.workers > 0) cfg.workers = flags.workers;
            const auto manifest = stark::run_experiment(cfg);
            std::cout << "wrote " << out << "/manifest.json\n";
            return manifest_exit_code(manifest);
        }
        for (const auto* sub : app.get_subcommands()) {
            const std::string name = sub->get_name();
            if (name == "spectrum" || name == "dos" || name == "rstat" || name == "eigenobs" ||
                name == "pagevalue" || name == "dynamics" || name == "collapse" ||
                name == "fitimbalance") {
                return run_single_task(flags, name);
            }
        }
        std::cerr << "no subcommand executed\n";
        return kExitConfigError;
    } catch (const stark::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const stark::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalError;
    }
}
