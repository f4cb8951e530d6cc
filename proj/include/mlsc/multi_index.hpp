#pragma once

#include <map>
#include <string>
#include <vector>

#include "mlsc/one_dim_rule.hpp"

namespace mlsc {

/// Level multi-index, entries >= 1.
using MultiIndex = std::vector<int>;

enum class GridKind { TensorProduct, TotalDegree, HyperbolicCross, Smolyak, AnisotropicSmolyak };

GridKind grid_kind_from_string(const std::string& s);
std::string to_string(GridKind kind);

/// 1D growth map used by a grid kind.
Growth growth_of(GridKind kind);

/// Downward-closed set { l : g(l) <= L } for the kind's level function g.
/// TensorProduct: max(l_n - 1); TotalDegree/Smolyak: sum(l_n - 1);
/// HyperbolicCross: prod l_n <= L + 1; AnisotropicSmolyak:
/// sum (w_n / w_min) (l_n - 1) for positive weights w.
struct MultiIndexSet {
    GridKind kind = GridKind::Smolyak;
    int dimension = 0;
    int level = 0;
    std::vector<double> weights;      // anisotropy weights, empty unless anisotropic
    std::vector<MultiIndex> members;  // lexicographically sorted

    bool contains(const MultiIndex& idx) const;
    int size() const { return static_cast<int>(members.size()); }
};

MultiIndexSet build_index_set(GridKind kind, int dimension, int level,
                              std::vector<double> weights = {});

/// Combination coefficients c_l = sum over z in {0,1}^N with l+z in the set
/// of (-1)^|z|, zero entries omitted.  Throws if the set is not downward
/// closed.  The coefficients always sum to one.
std::map<MultiIndex, int> combination_coefficients(const MultiIndexSet& set);

}  // namespace mlsc
