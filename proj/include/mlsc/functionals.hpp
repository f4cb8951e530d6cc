#pragma once

#include <string>

#include "mlsc/fem.hpp"

namespace mlsc {

/// Scalar quantity of interest psi(u).  All kinds satisfy psi(0) = 0.
struct Functional {
    enum class Kind { PointValue, LocalAverage, L2NormSquared, L2Norm, PowerOfLinear };

    Kind kind = Kind::PointValue;
    double x1 = 0.0, x2 = 0.0;  // evaluation point / patch node
    double ref_width = 0.0;     // LocalAverage reference mesh width
    int power = 1;              // PowerOfLinear exponent
    Kind inner_kind = Kind::PointValue;  // PowerOfLinear inner functional

    static Functional point_value_1d(double x);
    static Functional point_value_2d(double x, double y);
    /// Average over the elements of the reference mesh adjacent to the node:
    /// the two intervals around x in 1D, the six-triangle patch in 2D.
    static Functional local_average_1d(double ref_width, double x);
    static Functional local_average_2d(double ref_width, double x, double y);
    static Functional l2_norm_squared();
    static Functional l2_norm();
    /// q-th power of a linear functional (PointValue or LocalAverage).
    static Functional power_of(const Functional& linear_inner, int q);

    bool is_linear() const {
        return kind == Kind::PointValue || kind == Kind::LocalAverage;
    }
    std::string fingerprint() const;
};

double functional_eval(const FemSolution& sol, const Functional& psi);

/// psi(u_{h_k}) - psi(u_{h_{k-1}}) at the same parameter point; level -1 is
/// the zero function.
double level_difference_sample(const FemSolver& solver, std::span<const double> y, int k,
                               const Functional& psi);

}  // namespace mlsc
