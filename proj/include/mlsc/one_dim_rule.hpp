#pragma once

#include <span>
#include <vector>

namespace mlsc {

/// Growth map l -> number of 1D points.  Nested doubling keeps Clenshaw-Curtis
/// abscissas nested across levels; Linear is used by the algebraic index sets.
enum class Growth { Linear, NestedDoubling };

/// Number of points at level l (l >= 1).  Linear: p(l) = l.
/// NestedDoubling: p(1) = 1, p(l) = 2^(l-1) + 1.
int growth_points(Growth growth, int level);

/// One-dimensional interpolation/quadrature rule on [-1, 1].
/// Quadrature weights integrate against the uniform density 1/2, so they
/// sum to one and the rule is exact for polynomials of degree p(l) - 1.
struct OneDimRule {
    int level = 0;
    Growth growth = Growth::NestedDoubling;
    std::vector<double> abscissas;     // strictly increasing, symmetric about 0
    std::vector<double> quad_weights;  // sums to 1
    std::vector<double> bary_weights;  // barycentric weights for interpolation

    int point_count() const { return static_cast<int>(abscissas.size()); }

    /// Lagrange basis values at y, written into out (size point_count()).
    void basis_at(double y, std::span<double> out) const;
};

/// Clenshaw-Curtis rule at the given level.  Abscissas are the Chebyshev
/// extrema -cos(pi*j/(p-1)); the midpoint is pinned to exactly 0 and the
/// two halves mirror bit-for-bit, so equal points constructed at different
/// levels of the nested family compare equal with ==.
OneDimRule clenshaw_curtis_rule(int level, Growth growth);

}  // namespace mlsc
