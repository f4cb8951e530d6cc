#pragma once

#include <functional>
#include <memory>
#include <string>

#include "mlsc/fem.hpp"
#include "mlsc/functionals.hpp"
#include "mlsc/sparse_grid.hpp"

namespace mlsc {

/// A parameterized elliptic problem together with its stochastic grid family
/// and cost model.  Immutable after construction; designs are cached.
class Problem {
  public:
    Problem(CoefficientField coefficient, MeshHierarchy hierarchy,
            GridKind grid_kind = GridKind::Smolyak, std::vector<double> grid_weights = {});

    int spatial_dim() const { return solver_->hierarchy().spatial_dim; }
    int dimension() const { return solver_->coefficient().dimension; }
    const MeshHierarchy& hierarchy() const { return solver_->hierarchy(); }
    const FemSolver& solver() const { return *solver_; }
    GridKind grid_kind() const { return grid_kind_; }
    const std::vector<double>& grid_weights() const { return grid_weights_; }

    /// Cached sparse-grid design at the given level.
    std::shared_ptr<const SparseGridDesign> design(int level) const;

    /// Realizable grid cardinalities for levels 0..max_level.
    std::vector<long long> grid_sizes(int max_level) const;

    /// Canonical identity of (problem, functional) for reference caching.
    std::string fingerprint(const Functional& psi) const;

  private:
    std::shared_ptr<FemSolver> solver_;
    GridKind grid_kind_;
    std::vector<double> grid_weights_;
    struct DesignCache;
    std::shared_ptr<DesignCache> cache_;
};

/// Scalar sample function psi(u_{h_k}(y, .)): the estimators consume this
/// interface, so tests can substitute synthetic interpolands.
struct SampleSource {
    int dimension = 0;
    std::function<double(std::span<const double> y, int mesh_level)> eval;
};

SampleSource make_sample_source(const Problem& problem, const Functional& psi);

}  // namespace mlsc
