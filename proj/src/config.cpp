#include "mlsc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mlsc {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw std::invalid_argument("config error: " + key + " " + what);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        bad(key, "is not a number (got '" + v + "')");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return i;
    } catch (...) {
        bad(key, "is not an integer (got '" + v + "')");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(parse_double(key, item));
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    std::string t = s.substr(b, e - b + 1);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (spatial_dim != 1 && spatial_dim != 2) bad("spatial_dim", "must be 1 or 2");
    if (N < 1) bad("N", "must be >= 1");
    if (eta < 2) bad("eta", "must be an integer >= 2 (got " + std::to_string(eta) + ")");
    if (!(h0 > 0.0 && h0 < 1.0)) bad("h0", "must lie in (0,1)");
    const double inv = 1.0 / h0;
    if (std::abs(inv - std::llround(inv)) > 1e-9) bad("h0", "must be the reciprocal of an integer");
    if (coefficient != "kl-exponential" && coefficient != "constant")
        bad("coefficient", "must be kl-exponential or constant (got '" + coefficient + "')");
    if (functional != "point" && functional != "local-average" && functional != "l2" &&
        functional != "l2-squared" && functional != "power")
        bad("functional", "unknown kind '" + functional + "'");
    if (functional == "power" && power_q < 1) bad("power_q", "must be >= 1");
    if (grid != "smolyak" && grid != "tensor" && grid != "total-degree" &&
        grid != "hyperbolic-cross" && grid != "anisotropic-smolyak")
        bad("grid", "unknown kind '" + grid + "'");
    if (grid == "anisotropic-smolyak" && static_cast<int>(grid_weights.size()) != N)
        bad("grid_weights", "must list one positive weight per dimension");
    if (method != "slsc" && method != "mlsc" && method != "mc" && method != "mlmc" &&
        method != "adaptive")
        bad("method", "unknown method '" + method + "'");
    for (double e : eps)
        if (!(e > 0.0)) bad("eps", "targets must be positive");
    if (scheme != "ceil" && scheme != "up" && scheme != "updown")
        bad("scheme", "must be ceil, up or updown");
    if (workers < 0) bad("workers", "must be >= 0");
    if (max_levels < 1) bad("max_levels", "must be >= 1");
    if (max_grid_level < 1) bad("max_grid_level", "must be >= 1");
    if (samples < 0) bad("samples", "must be >= 0");
}

RateConstants ExperimentConfig::rate_constants() const {
    RateConstants rc;
    rc.alpha = alpha > 0 ? alpha : 2.0;
    rc.beta = beta > 0 ? beta : rc.alpha;
    rc.mu = mu > 0 ? mu : 1.0;
    rc.C = C > 0 ? C : 1e-2;
    rc.C_s = C_s > 0 ? C_s : 1e-3;
    rc.gamma = gamma > 0 ? gamma : double(spatial_dim);
    rc.C_c = C_c > 0 ? C_c : 1.0;
    rc.eta = eta;
    rc.h0 = h0;
    return rc;
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    if (name == "paper-1d-n20") {
        c.spatial_dim = 1;
        c.N = 20;
        c.h0 = 0.25;
        c.eta = 2;
        c.functional = "point";
        c.x_star = 0.75;
        c.alpha = 2.1;
        c.beta = 2.1;
        c.mu = 0.8;
        c.C = 0.01;
        c.C_s = 2e-3;
        c.gamma = 1.0;
        c.ref_mesh_level = 8;   // h* = 1/1024
        c.ref_grid_level = 4;
        c.eps = {6.3e-4, 7.9e-5, 1.4e-5, 4.7e-6};
        return c;
    }
    if (name == "paper-2d-n10") {
        c.spatial_dim = 2;
        c.N = 10;
        c.h0 = 0.25;
        c.eta = 2;
        c.functional = "local-average";
        c.x_star = 0.5;
        c.y_star = 0.5;
        c.ref_width = 1.0 / 256.0;
        c.alpha = 2.0;
        c.beta = 2.0;
        c.mu = 1.4;
        c.C = 0.05;
        c.C_s = 2e-3;
        c.gamma = 2.0;
        c.ref_mesh_level = 6;   // h* = 1/256
        c.ref_grid_level = 5;
        c.eps = {1e-3, 3e-4, 1e-4, 3e-5, 1e-5};
        return c;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"paper-1d-n20", "paper-2d-n10"}; }

void apply_config_line(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "spatial_dim") c.spatial_dim = static_cast<int>(parse_int(key, value));
    else if (key == "N") c.N = static_cast<int>(parse_int(key, value));
    else if (key == "h0") c.h0 = parse_double(key, value);
    else if (key == "eta") c.eta = static_cast<int>(parse_int(key, value));
    else if (key == "coefficient") c.coefficient = value;
    else if (key == "constant_value") c.constant_value = parse_double(key, value);
    else if (key == "kl_pool") c.kl_pool = static_cast<int>(parse_int(key, value));
    else if (key == "functional") c.functional = value;
    else if (key == "x_star") c.x_star = parse_double(key, value);
    else if (key == "y_star") c.y_star = parse_double(key, value);
    else if (key == "ref_width") c.ref_width = parse_double(key, value);
    else if (key == "power_q") c.power_q = static_cast<int>(parse_int(key, value));
    else if (key == "grid") c.grid = value;
    else if (key == "grid_weights") c.grid_weights = parse_list(key, value);
    else if (key == "method") c.method = value;
    else if (key == "eps") c.eps = parse_list(key, value);
    else if (key == "scheme") c.scheme = value;
    else if (key == "grid_level") c.grid_level = static_cast<int>(parse_int(key, value));
    else if (key == "mesh_level") c.mesh_level = static_cast<int>(parse_int(key, value));
    else if (key == "samples") c.samples = parse_int(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "workers") c.workers = static_cast<int>(parse_int(key, value));
    else if (key == "max_levels") c.max_levels = static_cast<int>(parse_int(key, value));
    else if (key == "max_grid_level") c.max_grid_level = static_cast<int>(parse_int(key, value));
    else if (key == "alpha") c.alpha = parse_double(key, value);
    else if (key == "beta") c.beta = parse_double(key, value);
    else if (key == "mu") c.mu = parse_double(key, value);
    else if (key == "C") c.C = parse_double(key, value);
    else if (key == "C_s") c.C_s = parse_double(key, value);
    else if (key == "gamma") c.gamma = parse_double(key, value);
    else if (key == "C_c") c.C_c = parse_double(key, value);
    else if (key == "estimate_constants") c.estimate_constants = (value == "true" || value == "1");
    else if (key == "ref_mesh_level") c.ref_mesh_level = static_cast<int>(parse_int(key, value));
    else if (key == "ref_grid_level") c.ref_grid_level = static_cast<int>(parse_int(key, value));
    else if (key == "use_reference") c.use_reference = (value == "true" || value == "1");
    else if (key == "out") c.out = value;
    else if (key == "cache_dir") c.cache_dir = value;
    else bad(key, "is not a recognized configuration key");
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config error: cannot open file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config error: line " + std::to_string(lineno) +
                                        " is not key = value");
        apply_config_line(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

Problem build_problem(const ExperimentConfig& config) {
    config.validate();
    CoefficientField field =
        (config.coefficient == "constant")
            ? constant_coefficient(config.spatial_dim, config.N, config.constant_value)
            : kl_coefficient(config.spatial_dim, config.N, config.kl_pool);
    MeshHierarchy mesh = make_hierarchy(config.spatial_dim, config.h0, config.eta);
    return Problem(std::move(field), mesh, grid_kind_from_string(config.grid),
                   config.grid_weights);
}

Functional build_functional(const ExperimentConfig& config) {
    config.validate();
    if (config.functional == "point")
        return (config.spatial_dim == 1) ? Functional::point_value_1d(config.x_star)
                                         : Functional::point_value_2d(config.x_star, config.y_star);
    if (config.functional == "local-average")
        return (config.spatial_dim == 1)
                   ? Functional::local_average_1d(config.ref_width, config.x_star)
                   : Functional::local_average_2d(config.ref_width, config.x_star, config.y_star);
    if (config.functional == "l2-squared") return Functional::l2_norm_squared();
    if (config.functional == "l2") return Functional::l2_norm();
    // power of the point value
    const Functional inner = (config.spatial_dim == 1)
                                 ? Functional::point_value_1d(config.x_star)
                                 : Functional::point_value_2d(config.x_star, config.y_star);
    return Functional::power_of(inner, config.power_q);
}

}  // namespace mlsc
