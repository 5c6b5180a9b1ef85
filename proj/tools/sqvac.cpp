// sqvac: command-line driver.
//
//   sqvac ground-state  --config run.yaml --out DIR
//   sqvac figure1       --config run.yaml --out DIR
//   sqvac quench        --config run.yaml --out DIR
//   sqvac spectrum-test --config run.yaml --out DIR [--threads N]
//   sqvac selftest
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "sqvac/cli/commands.hpp"

namespace {

using sqvac::cli::Config;
using sqvac::cli::OutputSet;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 1;
};

int run_command(const CommonOptions& opts, const std::function<OutputSet(const Config&, unsigned)>& command) {
    try {
        Config cfg = opts.config_path.empty() ? Config() : Config::from_file(opts.config_path);
        if (opts.seed_given) cfg.set("seed", YAML::Node(opts.seed));
        const OutputSet outputs = command(cfg, opts.threads);
        sqvac::cli::write_outputs(outputs, opts.out_dir);
        for (const auto& [name, content] : outputs) std::cout << (std::filesystem::path(opts.out_dir) / name).string() << "\n";
        return sqvac::cli::kSuccess;
    } catch (const sqvac::Error& e) {
        std::cerr << "sqvac: " << e.what() << "\n";
        return sqvac::cli::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "sqvac: " << e.what() << "\n";
        return sqvac::cli::kNumericalFailure;
    }
}

void add_common(CLI::App* sub, CommonOptions& opts, bool config_required) {
    auto* c = sub->add_option("--config", opts.config_path, "YAML run configuration");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&opts](const std::uint64_t& s) {
            opts.seed = s;
            opts.seed_given = true;
        },
        "override the master seed");
    sub->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezed-vacuum simulation and spectrum hypothesis test"};
    app.require_subcommand(1);

    CommonOptions opts;
    auto* ground = app.add_subcommand("ground-state", "exact vs effective Rabi ground state report");
    auto* fig1 = app.add_subcommand("figure1", "rotating squeezed vacuum: Husimi panels and variance traces");
    auto* quench = app.add_subcommand("quench", "sudden and ramped coupling switch-off");
    auto* spectrum = app.add_subcommand("spectrum-test", "photon-count vs fluctuation spectrum verdict");
    auto* selftest = app.add_subcommand("selftest", "quick internal consistency checks");
    for (auto* sub : {ground, fig1, quench, spectrum}) add_common(sub, opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sqvac::cli::kConfigError;
    }

    if (ground->parsed()) {
        return run_command(opts, [](const Config& c, unsigned) { return sqvac::cli::cmd_ground_state(c); });
    }
    if (fig1->parsed()) {
        return run_command(opts, [](const Config& c, unsigned) { return sqvac::cli::cmd_figure1(c); });
    }
    if (quench->parsed()) {
        return run_command(opts, [](const Config& c, unsigned) { return sqvac::cli::cmd_quench(c); });
    }
    if (spectrum->parsed()) {
        return run_command(opts, [](const Config& c, unsigned t) { return sqvac::cli::cmd_spectrum_test(c, t); });
    }
    if (selftest->parsed()) {
        bool ok = true;
        try {
            for (const auto& line : sqvac::cli::run_selftest()) {
                std::cout << (line.pass ? "[PASS] " : "[FAIL] ") << line.name << " (" << line.detail << ")\n";
                ok = ok && line.pass;
            }
        } catch (const std::exception& e) {
            std::cerr << "sqvac: " << e.what() << "\n";
            return sqvac::cli::kNumericalFailure;
        }
        return ok ? sqvac::cli::kSuccess : sqvac::cli::kNumericalFailure;
    }
    return sqvac::cli::kConfigError;
}
