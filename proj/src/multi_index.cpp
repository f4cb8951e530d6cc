#include "mlsc/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace mlsc {

GridKind grid_kind_from_string(const std::string& s) {
    if (s == "tensor") return GridKind::TensorProduct;
    if (s == "total-degree") return GridKind::TotalDegree;
    if (s == "hyperbolic-cross") return GridKind::HyperbolicCross;
    if (s == "smolyak") return GridKind::Smolyak;
    if (s == "anisotropic-smolyak") return GridKind::AnisotropicSmolyak;
    throw std::invalid_argument("unknown grid kind: " + s);
}

std::string to_string(GridKind kind) {
    switch (kind) {
        case GridKind::TensorProduct: return "tensor";
        case GridKind::TotalDegree: return "total-degree";
        case GridKind::HyperbolicCross: return "hyperbolic-cross";
        case GridKind::Smolyak: return "smolyak";
        case GridKind::AnisotropicSmolyak: return "anisotropic-smolyak";
    }
    return "?";
}

Growth growth_of(GridKind kind) {
    switch (kind) {
        case GridKind::Smolyak:
        case GridKind::AnisotropicSmolyak: return Growth::NestedDoubling;
        default: return Growth::Linear;
    }
}

bool MultiIndexSet::contains(const MultiIndex& idx) const {
    return std::binary_search(members.begin(), members.end(), idx);
}

namespace {

// Depth-first enumeration; emits members in lexicographic order.
void enumerate_additive(int dim, int n, double budget, std::span<const double> cost_per_step,
                        MultiIndex& current, std::vector<MultiIndex>& out) {
    if (dim == n) {
        out.push_back(current);
        return;
    }
    const double step = cost_per_step[dim];
    for (int l = 1;; ++l) {
        const double used = step * (l - 1);
        if (used > budget + 1e-12) break;
        current[dim] = l;
        enumerate_additive(dim + 1, n, budget - used, cost_per_step, current, out);
    }
    current[dim] = 1;
}

void enumerate_product(int dim, int n, long long budget, MultiIndex& current,
                       std::vector<MultiIndex>& out) {
    if (dim == n) {
        out.push_back(current);
        return;
    }
    for (int l = 1; l <= budget; ++l) {
        current[dim] = l;
        enumerate_product(dim + 1, n, budget / l, current, out);
    }
    current[dim] = 1;
}

void enumerate_box(int dim, int n, int max_entry, MultiIndex& current,
                   std::vector<MultiIndex>& out) {
    if (dim == n) {
        out.push_back(current);
        return;
    }
    for (int l = 1; l <= max_entry; ++l) {
        current[dim] = l;
        enumerate_box(dim + 1, n, max_entry, current, out);
    }
    current[dim] = 1;
}

}  // namespace

MultiIndexSet build_index_set(GridKind kind, int dimension, int level,
                              std::vector<double> weights) {
    if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
    if (level < 0) throw std::invalid_argument("level must be >= 0");
    if (kind == GridKind::AnisotropicSmolyak) {
        if (static_cast<int>(weights.size()) != dimension)
            throw std::invalid_argument("anisotropic grid needs one weight per dimension");
        for (double w : weights)
            if (!(w > 0.0)) throw std::invalid_argument("anisotropy weights must be positive");
    } else if (!weights.empty()) {
        throw std::invalid_argument("weights are only valid for the anisotropic kind");
    }

    MultiIndexSet set;
    set.kind = kind;
    set.dimension = dimension;
    set.level = level;
    set.weights = weights;

    MultiIndex current(dimension, 1);
    switch (kind) {
        case GridKind::TensorProduct:
            if (dimension * std::log(level + 1.0) > 22.0)
                throw std::invalid_argument("tensor-product index set too large");
            enumerate_box(0, dimension, level + 1, current, set.members);
            break;
        case GridKind::TotalDegree:
        case GridKind::Smolyak: {
            std::vector<double> cost(dimension, 1.0);
            enumerate_additive(0, dimension, level, cost, current, set.members);
            break;
        }
        case GridKind::AnisotropicSmolyak: {
            const double wmin = *std::min_element(weights.begin(), weights.end());
            std::vector<double> cost(dimension);
            for (int n = 0; n < dimension; ++n) cost[n] = weights[n] / wmin;
            enumerate_additive(0, dimension, level, cost, current, set.members);
            break;
        }
        case GridKind::HyperbolicCross:
            enumerate_product(0, dimension, static_cast<long long>(level) + 1, current,
                              set.members);
            break;
    }
    std::sort(set.members.begin(), set.members.end());
    return set;
}

std::map<MultiIndex, int> combination_coefficients(const MultiIndexSet& set) {
    // Downward closure is required for the telescoping identity.
    for (const MultiIndex& m : set.members) {
        MultiIndex probe = m;
        for (int n = 0; n < set.dimension; ++n) {
            if (m[n] > 1) {
                probe[n] -= 1;
                if (!set.contains(probe))
                    throw std::invalid_argument("index set is not downward closed");
                probe[n] += 1;
            }
        }
    }

    std::map<MultiIndex, int> coeff;
    std::vector<int> free_dims;
    for (const MultiIndex& m : set.members) {
        free_dims.clear();
        for (int n = 0; n < set.dimension; ++n)
            if (m[n] > 1) free_dims.push_back(n);
        if (free_dims.size() > 30)
            throw std::invalid_argument("combination coefficient expansion too large");
        const unsigned subsets = 1u << free_dims.size();
        MultiIndex target = m;
        for (unsigned mask = 0; mask < subsets; ++mask) {
            target = m;
            int bits = 0;
            for (size_t b = 0; b < free_dims.size(); ++b) {
                if (mask & (1u << b)) {
                    target[free_dims[b]] -= 1;
                    ++bits;
                }
            }
            coeff[target] += (bits % 2 == 0) ? 1 : -1;
        }
    }
    std::erase_if(coeff, [](const auto& kv) { return kv.second == 0; });
    return coeff;
}

}  // namespace mlsc
