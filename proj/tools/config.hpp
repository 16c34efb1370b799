#pragma once

// Experiment configuration files: INI with sections. See configs/README.md
// for the schema.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <corrheston/black_scholes.hpp>
#include <corrheston/exotics.hpp>
#include <corrheston/montecarlo.hpp>

namespace corrheston::cli {

struct ExperimentConfig {
    std::string experiment;
    std::filesystem::path source;

    // [market]
    double spot = 1.0;
    double r = 0.0;
    double q = 0.0;
    DeltaConvention convention = DeltaConvention::Spot;

    // [quote]
    SmileQuote quote{};

    // [model]
    double beta = 2.0;
    std::vector<double> eta_grid;
    double theta = 0.01;
    double alpha = 0.3;
    double rho_bar = 0.0;
    std::optional<double> v0;
    std::optional<double> rho_0;

    // [sweep]
    double expiry = 0.25;
    std::vector<double> strikes;
    std::vector<double> tenors;
    std::vector<double> bs_prices;

    // [volswap]
    VolSwapSpec volswap{};

    // [analytics]
    std::filesystem::path input;
    double bump = 0.01;
    std::optional<double> beta_rr_target;

    McConfig mc{};
    std::filesystem::path output;

    /// Every key read from the file, "section.key" -> text, for the manifest.
    std::map<std::string, std::string> raw;
};

/// Parses the file; unknown sections or keys are errors so typos surface.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path,
                                           const std::string& experiment);

/// Checks the fields the experiment needs.
void validate_config(const ExperimentConfig& cfg);

}  // namespace corrheston::cli
