#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlsc/allocation.hpp"
#include "mlsc/problem.hpp"

namespace mlsc {

/// Flat experiment configuration; presets encode the two benchmark setups,
/// config files and CLI flags override individual keys.
struct ExperimentConfig {
    // problem
    int spatial_dim = 1;
    int N = 20;
    double h0 = 0.25;
    int eta = 2;
    std::string coefficient = "kl-exponential";  // or "constant"
    double constant_value = 1.0;
    int kl_pool = 0;

    // functional
    std::string functional = "point";  // point | local-average | l2 | l2-squared | power
    double x_star = 0.75;
    double y_star = 0.0;
    double ref_width = 1.0 / 256.0;
    int power_q = 2;

    // stochastic grid
    std::string grid = "smolyak";
    std::vector<double> grid_weights;

    // method and targets
    std::string method = "mlsc";  // slsc | mlsc | mc | mlmc | adaptive
    std::vector<double> eps;
    std::string scheme = "updown";
    int grid_level = -1;   // explicit single-run knobs
    int mesh_level = -1;
    long long samples = 0;
    std::uint64_t seed = 0;
    int workers = 0;
    int max_levels = 10;
    int max_grid_level = 5;

    // rate constants (allocation); gamma = 0 means "use the spatial dimension"
    double alpha = 0.0, beta = 0.0, mu = 0.0, C = 0.0, C_s = 0.0, gamma = 0.0, C_c = 1.0;
    bool estimate_constants = false;

    // reference
    int ref_mesh_level = -1;
    int ref_grid_level = -1;
    bool use_reference = true;

    std::string out;
    std::string cache_dir = "refcache";

    void validate() const;  // throws with the offending key in the message
    RateConstants rate_constants() const;
};

/// Named setups of the two experiment families.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Parse a flat key = value file (# comments) into an existing config.
/// Unknown keys throw.
void apply_config_file(ExperimentConfig& config, const std::string& path);
void apply_config_line(ExperimentConfig& config, const std::string& key,
                       const std::string& value);

/// Materialize the problem and functional described by the config.
Problem build_problem(const ExperimentConfig& config);
Functional build_functional(const ExperimentConfig& config);

}  // namespace mlsc
