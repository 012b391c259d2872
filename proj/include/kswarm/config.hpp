#pragma once

// Sectioned key-value experiment configuration.
//
//   [field]     kernel sigma ell grid_n seed noise_std artifact
//   [domain]    lo hi                                  (required)
//   [cover]     kind=orthants overlap | kind=explicit subdomain.<i>=lo.. hi..
//   [pou]       kind=overlap_average | kind=custom_table table.<i+j+..>=w_1..w_N
//   [stepper]   gamma h epsilon_bar (required unless epsilon_budget) q a
//               preconditioned epsilon_budget epsilon_tolerance
//   [estimator] kernel sigma ell                       (default: field kernel)
//   [schedule]  resolutions (required) start=mirror|lo
//   [metrics]   eval_grid_n fill_resolution fuse_every
//   [run]       seed parallel=on|off
//   [sweep]     factors rescale_gamma
//
// Lists are whitespace separated; '#' starts a comment.

#include <iosfwd>
#include <string>
#include <vector>

#include "kswarm/sim.hpp"

namespace kswarm {

struct ExperimentConfig {
    SimConfig sim;
    double epsilon_budget = 0.0;  // > 0: tune epsilon_bar to this many centers per agent before running
    double epsilon_tolerance = 0.1;
    std::vector<double> sweep_factors{1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.0, 2.0, 3.0, 4.0};
    bool rescale_gamma = true;  // sweep keeps h * gamma * sigma^2 fixed
};

/// Parses a configuration, listing every schema violation in one ConfigError.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved form: explicit subdomains and estimator, full precision.
std::string serialize_config(const ExperimentConfig& cfg);

/// Reads "0.25", "1/4" or "-3e-2".
double parse_real(const std::string& token);

}  // namespace kswarm
