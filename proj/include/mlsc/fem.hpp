#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mlsc/random_field.hpp"

namespace mlsc {

/// Uniform meshes of (0,1) or (0,1)^2 with h_k = eta^-k h0.  2D meshes are
/// right-triangle meshes with every square cell cut bottom-left to top-right,
/// so refinements are nested.
struct MeshHierarchy {
    int spatial_dim = 1;
    double h0 = 0.25;
    int eta = 2;

    double width(int level) const;
    int cells_per_side(int level) const;
};

MeshHierarchy make_hierarchy(int spatial_dim, double h0, int eta);

/// P1 Galerkin solution on one mesh level; nodal values over interior nodes,
/// homogeneous Dirichlet boundary.  2D interior ordering: index
/// (i-1)*(n-1) + (j-1) for node (i*h, j*h), the y index fastest.
struct FemSolution {
    int spatial_dim = 1;
    int level = 0;
    double h = 0.0;
    std::vector<double> nodal;

    double eval(double x) const;
    double eval(double x, double y) const;
};

/// Solver bound to one coefficient field; per-level coefficient tables at the
/// quadrature points (element midpoints in 1D, triangle centroids in 2D) are
/// cached and immutable, so solve() is safe to call concurrently.
class FemSolver {
  public:
    FemSolver(CoefficientField coefficient, MeshHierarchy hierarchy);
    ~FemSolver();

    FemSolution solve(std::span<const double> y, int level, double forcing = 1.0) const;

    const MeshHierarchy& hierarchy() const { return hierarchy_; }
    const CoefficientField& coefficient() const { return coefficient_; }

  private:
    struct LevelTables;
    const LevelTables& tables(int level) const;

    CoefficientField coefficient_;
    MeshHierarchy hierarchy_;
    mutable std::vector<std::shared_ptr<const LevelTables>> tables_;
    mutable std::shared_ptr<void> tables_mutex_;
};

/// One Galerkin solve; convenience wrapper constructing a solver per call.
FemSolution assemble_solve(const CoefficientField& coefficient, const MeshHierarchy& hierarchy,
                           std::span<const double> y, int level, double forcing = 1.0);

/// Nodal dump (CSV) with a JSON sidecar describing the layout.
void dump_solution(const FemSolution& sol, const std::string& csv_path,
                   const std::string& sidecar_path);

}  // namespace mlsc
