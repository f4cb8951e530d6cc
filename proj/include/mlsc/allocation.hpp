#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlsc/estimators.hpp"

namespace mlsc {

/// Rates and constants of the error/cost model:
/// spatial error C_s h^alpha, interpolation error C M^-mu scaled by h^beta
/// on level differences, per-sample cost C_c h^-gamma.
struct RateConstants {
    double alpha = 2.0;
    double C_s = 1e-3;
    double beta = 2.0;
    double mu = 1.0;
    double C = 1e-2;  // product C_I * C_zeta
    double gamma = 1.0;
    double C_c = 1.0;
    double eta = 2.0;
    double h0 = 0.25;

    /// Throws on non-positive entries; returns false (with a note to stderr)
    /// if alpha >= min(beta, mu*gamma) fails.
    bool validate(bool quiet = false) const;
};

/// Finest level from the spatial error target: ceil(log_eta(2 C_s / eps) / alpha),
/// clamped at zero.
int choose_finest_level(double eps, const RateConstants& rc);

/// Optimal sample counts M_{K-k}, k = 0..K, before rounding to integers.
std::vector<double> sample_counts_raw(double eps, int K, const RateConstants& rc);
/// Same, rounded up to integers.  Overflow-guarded.
std::vector<long long> sample_counts(double eps, int K, const RateConstants& rc);

enum class RoundingScheme { Ceil, UpToGrid, BalancedUpDown };

RoundingScheme rounding_scheme_from_string(const std::string& s);
std::string to_string(RoundingScheme scheme);

struct RoundedCounts {
    std::vector<long long> counts;
    std::vector<int> grid_levels;  // empty for Ceil (counts are not realizable grids)
};

/// Round counts onto realizable grid cardinalities.  UpToGrid takes the next
/// grid at or above each count.  BalancedUpDown first takes the nearest grid
/// in log-ratio distance, then while one direction outnumbers the other by
/// more than one, flips the entry with the largest log-ratio movement.
RoundedCounts round_to_grid(const std::vector<long long>& counts,
                            const std::vector<long long>& grid_sizes, RoundingScheme scheme);

/// Q_{grid_level}[psi(u_{mesh_level})] oracle used by the constant
/// estimation; production code wraps NestedQuadrature, tests substitute
/// synthetic models.
using QuadOracle = std::function<double(int grid_level, int mesh_level)>;

struct ConstantsEstimate {
    RateConstants rc;
    double normalizer = 1.0;  // |E[psi]| estimate used to form relative errors
    double d1 = 0.0, d2 = 0.0;  // pilot level differences
};

/// Pilot estimation on mesh levels 0..2 and grid levels 0..pilot_grid_levels-1
/// against the reference grid level ref_grid_level: alpha from the level-1
/// interpolants of the first three mesh levels, beta = alpha, (C, mu) from a
/// pooled log-log fit of the interpolation errors of psi(u_0) and
/// psi(u_1) - psi(u_0) with the h^beta scaling removed.
ConstantsEstimate estimate_rate_constants(const QuadOracle& oracle,
                                          const std::vector<long long>& grid_sizes,
                                          const MeshHierarchy& mesh, double gamma, double C_c,
                                          int pilot_grid_levels = 3, int ref_grid_level = 3);

ConstantsEstimate estimate_rate_constants(const Problem& problem, const Functional& psi,
                                          int workers = 0);

/// Spatial convergence test: |Q[psi(u_K) - psi(u_{K-1})]| <= (eta^alpha - 1) eps / 2.
/// The measured difference must be in the same (relative) scale as eps.
bool spatial_convergence_test(double measured_difference, const RateConstants& rc, double eps);

struct MaxLevelsExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AdaptiveResult {
    LevelPlan plan;
    EstimateReport report;
    ConstantsEstimate constants;
    bool constants_were_estimated = true;
    double convergence_metric = 0.0;  // last measured |Q[diff]| / |value|
};

/// Reference-free driver: estimate constants once, then grow K, allocating
/// samples by the optimal formula rounded to realizable grids, until the
/// measured finest-level difference passes the convergence test.  Throws
/// MaxLevelsExceeded after max_levels iterations.
AdaptiveResult adaptive_mlsc(const Problem& problem, const Functional& psi, double eps,
                             RoundingScheme scheme, int max_levels = 10, int max_grid_level = 5,
                             int workers = 0,
                             const ConstantsEstimate* fixed_constants = nullptr);

/// Driver loop against an arbitrary sample source with given constants; the
/// problem supplies the designs, mesh widths and grid-size table.
AdaptiveResult adaptive_mlsc(const SampleSource& source, const Problem& problem, double eps,
                             RoundingScheme scheme, const ConstantsEstimate& constants,
                             int max_levels = 10, int max_grid_level = 5, int workers = 0);

/// Theorem-style epsilon-cost regimes.
enum class CostRegime { BetaGreater, BetaEqual, BetaLess };

struct TheoreticalCost {
    CostRegime regime;
    double ml_exponent;          // cost ~ eps^-ml_exponent
    double ml_log_exponent;      // |log eps| power (BetaEqual only)
    double sl_exponent;          // single-level cost ~ eps^-sl_exponent
    double ml_cost;              // bound value at eps, up to a constant
    double sl_cost;
};

/// Selects the regime from the sign of beta - mu*gamma and evaluates the
/// bound at eps.  eps must lie in (0, 1/e); outside, throws unless warn_only.
TheoreticalCost theoretical_cost(double eps, const RateConstants& rc, bool warn_only = false);

/// Plan serialization {K, grid_levels, counts_raw, counts_rounded, scheme, constants}.
std::string plan_to_json(const LevelPlan& plan, const std::vector<double>& counts_raw,
                         const RateConstants& rc);

}  // namespace mlsc
