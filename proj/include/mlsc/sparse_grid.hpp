#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mlsc/multi_index.hpp"
#include "mlsc/one_dim_rule.hpp"

namespace mlsc {

/// Deduplicated collocation points, combination coefficients and quadrature
/// weights of one sparse-grid interpolation operator.
struct SparseGridDesign {
    MultiIndexSet index_set;
    std::map<MultiIndex, int> combo;  // nonzero combination coefficients

    // Points are stored row-major, point m at [m*N, (m+1)*N).
    std::vector<double> coords;
    std::vector<double> quad_weights;
    int point_count = 0;

    // One entry per nonzero-coefficient index: the design ids of its tensor
    // grid in odometer order (last dimension fastest).
    struct TensorTerm {
        MultiIndex levels;
        int coeff = 0;
        std::vector<int> point_ids;
    };
    std::vector<TensorTerm> terms;

    // 1D rules indexed by level (slot 0 unused).
    std::vector<OneDimRule> rules;

    int dimension() const { return index_set.dimension; }
    std::span<const double> point(int m) const {
        return {coords.data() + static_cast<size_t>(m) * dimension(),
                static_cast<size_t>(dimension())};
    }
};

/// Enumerate the distinct collocation points of the index set and accumulate
/// their quadrature weights.  Points constructed from the canonical 1D rules
/// are deduplicated by exact coordinate equality.
std::shared_ptr<const SparseGridDesign> build_design(MultiIndexSet set);

std::shared_ptr<const SparseGridDesign> build_design(GridKind kind, int dimension, int level,
                                                     std::vector<double> weights = {});

/// Sampled values attached to a design.  value_dim = 1 for scalar samples;
/// nodal-coefficient vectors use value_dim = (number of nodes).
struct Interpolant {
    std::shared_ptr<const SparseGridDesign> design;
    int value_dim = 1;
    std::vector<double> values;  // row-major, point_count x value_dim

    std::span<double> value_row(int m) {
        return {values.data() + static_cast<size_t>(m) * value_dim,
                static_cast<size_t>(value_dim)};
    }
};

Interpolant make_interpolant(std::shared_ptr<const SparseGridDesign> design, int value_dim = 1);

/// Evaluate the sparse-grid interpolant at y in [-1,1]^N.
std::vector<double> interpolate(const Interpolant& interp, std::span<const double> y);
double interpolate_scalar(const Interpolant& interp, std::span<const double> y);

/// Quadrature of the interpolant against the uniform density: sum of
/// quad_weights[m] * values[m].
std::vector<double> expectation(const Interpolant& interp);
double expectation_scalar(const Interpolant& interp);

/// Anisotropy weight from the analyticity-region width: the polynomial
/// best-approximation rate on an interval of the given width whose analytic
/// extension reaches distance tau.
double weight_from_tau(double tau, double interval_width);

/// Predicted interpolation convergence rate mu(N) for the grid kind.
/// The anisotropic kind needs the full weight vector.
double predicted_mu(int dimension, double alpha_min, GridKind kind,
                    std::span<const double> weights = {});

/// Versioned JSON serialization of a design (points, weights, combination
/// coefficients).  Loading reconstructs the interpolation terms.
std::string design_to_json(const SparseGridDesign& design);
std::shared_ptr<const SparseGridDesign> design_from_json(const std::string& text);

/// Cardinality of the design for the given kind/level without building it
/// when a closed-form count is available (nested-doubling kinds).
long long design_point_count(GridKind kind, int dimension, int level,
                             std::vector<double> weights = {});

}  // namespace mlsc
