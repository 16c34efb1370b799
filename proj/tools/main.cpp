// corrheston <experiment> --config <path> [--seed N] [--paths N] [--out path]
//
// Worker threads default to CORRHESTON_THREADS, else the hardware count.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <corrheston/calibration.hpp>
#include <corrheston/errors.hpp>
#include <corrheston/version.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace {

using namespace corrheston;

const char* error_kind(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return "validation";
    if (dynamic_cast<const CalibrationError*>(&e)) return "calibration";
    if (dynamic_cast<const RangeError*>(&e)) return "range";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const NoSolutionError*>(&e)) return "no-solution";
    if (dynamic_cast<const AccuracyError*>(&e)) return "accuracy";
    if (dynamic_cast<const EngineError*>(&e)) return "engine";
    return "internal";
}

int fail(const char* kind, const std::string& message) {
    std::string line = message;
    for (char& c : line) {
        if (c == '\n') c = ' ';
    }
    std::cerr << "corrheston: error: " << kind << ": " << line << '\n';
    return std::string(kind) == "validation" ? 2 : 1;
}

void print_list() {
    for (const cli::Experiment& e : cli::experiments()) {
        std::printf("%-18s %s\n", e.name.c_str(), e.description.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic-correlation Heston experiments"};
    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::string out;
    bool list = false;
    bool version = false;
    app.add_option("experiment", experiment, "Experiment name (see --list)");
    app.add_option("--config,-c", config_path, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Override mc.seed");
    app.add_option("--paths", paths, "Override mc.paths");
    app.add_option("--out,-o", out, "CSV output path (manifest goes next to it)");
    app.add_flag("--list", list, "List experiments and exit");
    app.add_flag("--version", version, "Print the version and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("validation", e.what());
    }

    if (version) {
        std::printf("corrheston %s\n", kVersion);
        return 0;
    }
    if (list) {
        print_list();
        return 0;
    }
    if (experiment.empty()) return fail("validation", "missing experiment name (see --list)");
    if (config_path.empty()) return fail("validation", "--config is required");

    try {
        (void)cli::find_experiment(experiment);
        cli::ExperimentConfig cfg = cli::load_config(config_path, experiment);
        if (seed) cfg.mc.seed = *seed;
        if (paths) cfg.mc.paths = *paths;
        std::filesystem::path target = out.empty() ? cfg.output : std::filesystem::path(out);
        if (target.empty()) target = experiment + ".csv";
        const cli::RunSummary summary = cli::run_experiment(cfg, target);
        std::cerr << "corrheston: wrote " << summary.rows << " rows to " << summary.csv.string()
                  << '\n';
    } catch (const std::exception& e) {
        return fail(error_kind(e), e.what());
    }
    return 0;
}
