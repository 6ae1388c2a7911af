#pragma once

#include "longrun/estimate.hpp"
#include "longrun/models.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace longrun::cli {

enum class Format { Csv, Json };

/// Scenario file (JSON object). Keys:
///   family                       BlackScholes | OU | CIR | ThreeHalves | QuadraticDrift
///   b, k, sigma, mu              physical model (mu: Black–Scholes only)
///   r, omega, xi, nu, rho_bar, rho_sq
///   T or T_list                  horizon(s)
///   n_paths, n_steps, seed       Monte Carlo budget; n_steps is per unit time
///   output, format               destination path and csv|json
///   nu_grid, mu_grid             compare sweeps (mu_grid sweeps k)
/// Unknown keys are rejected so that typos do not silently fall back to
/// defaults.
struct Scenario {
    ModelSpec spec;
    MarketParams market;
    std::vector<double> T_list{1.0};
    std::size_t n_paths = 200000;
    double n_steps = 100.0;
    std::uint64_t seed = RngPolicy{}.seed;
    std::optional<std::string> output;
    Format format = Format::Csv;
    std::optional<std::vector<double>> nu_grid;
    std::optional<std::vector<double>> mu_grid;

    McConfig mc() const;
};

/// Throws InvalidInput on malformed documents, unknown keys or wrong types.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

std::optional<Format> parse_format(const std::string& name);

}  // namespace longrun::cli
