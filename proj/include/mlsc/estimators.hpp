#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlsc/problem.hpp"

namespace mlsc {

/// Pairing of spatial levels k = 0..K with sparse-grid levels; richest grid
/// on the coarsest mesh.
struct LevelPlan {
    int K = 0;
    std::vector<int> grid_levels;           // size K+1, indexed by k, non-increasing
    std::vector<long long> sample_counts;   // grid cardinalities, same indexing
    std::string rounding = "none";

    void validate() const;
};

/// Per-level cost model C_k = C_c h_k^-gamma.
struct CostModel {
    double C_c = 1.0;
    double gamma = 1.0;  // usually the spatial dimension

    double level_cost(const MeshHierarchy& mesh, int level) const;
};

struct LevelContribution {
    int k_begin = 0;
    int k_end = 0;  // equal to k_begin unless cancellation grouping merged levels
    int grid_level = 0;
    long long points = 0;
    double contribution = 0.0;
    double model_cost = 0.0;
    long long solves = 0;
};

struct EstimateReport {
    std::string method;
    double value = 0.0;
    std::vector<LevelContribution> per_level;
    double total_model_cost = 0.0;
    long long total_solve_count = 0;
    double wall_seconds = 0.0;
    std::optional<double> relative_error;  // versus a supplied reference
    std::uint64_t seed = 0;

    /// Quadrature values Q_{grid}[psi(u_mesh)] computed along the way,
    /// keyed by (grid level, mesh level); reused by the adaptive driver.
    std::map<std::pair<int, int>, double> quadratures;

    std::string to_json() const;
};

/// Sparse-grid quadrature of the sample function at one mesh level.
double sparse_quadrature(const SampleSource& source, const SparseGridDesign& design,
                         int mesh_level, int workers, long long* solve_count = nullptr);

/// Single-level stochastic collocation estimate of E[psi(u_h)].
EstimateReport slsc_estimate(const SampleSource& source, const Problem& problem,
                             int mesh_level, int grid_level, const CostModel& cost,
                             int workers = 0);
EstimateReport slsc_estimate(const Problem& problem, int mesh_level, int grid_level,
                             const Functional& psi, int workers = 0);

/// Multilevel estimate: sum over k of Q_{grid(k)}[psi(u_k) - psi(u_{k-1})].
/// Consecutive levels sharing a grid are merged into one difference when
/// group_cancellations is set; the value is unchanged, interior solves are
/// skipped.  Model cost always reports the ungrouped metric.
EstimateReport mlsc_estimate(const SampleSource& source, const Problem& problem,
                             const LevelPlan& plan, const CostModel& cost,
                             bool group_cancellations = true, int workers = 0);
EstimateReport mlsc_estimate(const Problem& problem, const LevelPlan& plan,
                             const Functional& psi, bool group_cancellations = true,
                             int workers = 0);

/// Plain Monte Carlo baseline; deterministic given the seed.
EstimateReport mc_estimate(const SampleSource& source, const Problem& problem, int mesh_level,
                           long long samples, std::uint64_t seed, const CostModel& cost,
                           int workers = 0);
EstimateReport mc_estimate(const Problem& problem, int mesh_level, long long samples,
                           std::uint64_t seed, const Functional& psi, int workers = 0);

/// Multilevel Monte Carlo baseline.  Either explicit per-level sample counts
/// or a target accuracy with pilot-based variance-optimal allocation
/// (M_k proportional to sqrt(V_k / C_k)).
EstimateReport mlmc_estimate(const SampleSource& source, const Problem& problem, int finest_level,
                             const std::vector<long long>& samples_per_level, std::uint64_t seed,
                             const CostModel& cost, int workers = 0);
EstimateReport mlmc_estimate_target(const SampleSource& source, const Problem& problem,
                                    int finest_level, double target_eps, std::uint64_t seed,
                                    const CostModel& cost, int pilot_samples = 32,
                                    int workers = 0);

/// Overkill single-level value at (h*, L*), cached on disk keyed by the
/// problem fingerprint.
double reference_value(const Problem& problem, int ref_mesh_level, int ref_grid_level,
                       const Functional& psi, const std::string& cache_dir, int workers = 0);

/// Values of psi(u_mesh) on the points of a top-level design, evaluated once
/// and reusable for every nested sub-design quadrature Q_l, l <= top level.
class NestedQuadrature {
  public:
    NestedQuadrature(const Problem& problem, const Functional& psi, int top_grid_level,
                     int workers = 0);

    /// Q_{grid_level}[psi(u_{mesh_level})]; values are cached per mesh level.
    double value(int grid_level, int mesh_level);
    long long solve_count() const { return solves_; }

  private:
    const Problem& problem_;
    Functional psi_;
    int top_level_;
    int workers_;
    std::shared_ptr<const SparseGridDesign> top_design_;
    std::map<int, std::vector<double>> samples_by_mesh_;  // indexed by top design ids
    std::map<int, std::vector<int>> ids_by_level_;        // sub-design -> top design ids
    long long solves_ = 0;

    const std::vector<double>& samples(int mesh_level);
    const std::vector<int>& ids(int grid_level);
};

}  // namespace mlsc
