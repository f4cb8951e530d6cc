#include "mlsc/sparse_grid.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace mlsc {

namespace {

int max_level_in(const MultiIndexSet& set) {
    int m = 1;
    for (const auto& idx : set.members)
        for (int l : idx) m = std::max(m, l);
    return m;
}

std::vector<OneDimRule> rules_up_to(Growth growth, int max_level) {
    std::vector<OneDimRule> rules(max_level + 1);
    for (int l = 1; l <= max_level; ++l) rules[l] = clenshaw_curtis_rule(l, growth);
    return rules;
}

}  // namespace

std::shared_ptr<const SparseGridDesign> build_design(MultiIndexSet set) {
    auto design = std::make_shared<SparseGridDesign>();
    const int N = set.dimension;
    design->combo = combination_coefficients(set);
    design->rules = rules_up_to(growth_of(set.kind), max_level_in(set));
    design->index_set = std::move(set);

    std::unordered_map<std::string, int> ids;
    std::string key(static_cast<size_t>(N) * sizeof(double), '\0');

    for (const auto& [levels, c] : design->combo) {
        SparseGridDesign::TensorTerm term;
        term.levels = levels;
        term.coeff = c;

        long long tensor_size = 1;
        for (int n = 0; n < N; ++n) tensor_size *= design->rules[levels[n]].point_count();
        term.point_ids.reserve(tensor_size);

        std::vector<int> digit(N, 0);
        std::vector<double> pt(N);
        for (long long flat = 0; flat < tensor_size; ++flat) {
            double w = static_cast<double>(c);
            for (int n = 0; n < N; ++n) {
                const OneDimRule& r = design->rules[levels[n]];
                pt[n] = r.abscissas[digit[n]];
                w *= r.quad_weights[digit[n]];
            }
            std::memcpy(key.data(), pt.data(), key.size());
            auto [it, inserted] = ids.try_emplace(key, design->point_count);
            if (inserted) {
                design->coords.insert(design->coords.end(), pt.begin(), pt.end());
                design->quad_weights.push_back(0.0);
                ++design->point_count;
            }
            design->quad_weights[it->second] += w;
            term.point_ids.push_back(it->second);

            for (int n = N - 1; n >= 0; --n) {
                if (++digit[n] < design->rules[levels[n]].point_count()) break;
                digit[n] = 0;
            }
        }
        design->terms.push_back(std::move(term));
    }
    return design;
}

std::shared_ptr<const SparseGridDesign> build_design(GridKind kind, int dimension, int level,
                                                     std::vector<double> weights) {
    return build_design(build_index_set(kind, dimension, level, std::move(weights)));
}

Interpolant make_interpolant(std::shared_ptr<const SparseGridDesign> design, int value_dim) {
    if (!design) throw std::invalid_argument("null design");
    if (value_dim < 1) throw std::invalid_argument("value_dim must be >= 1");
    Interpolant interp;
    interp.value_dim = value_dim;
    interp.values.assign(static_cast<size_t>(design->point_count) * value_dim, 0.0);
    interp.design = std::move(design);
    return interp;
}

std::vector<double> interpolate(const Interpolant& interp, std::span<const double> y) {
    const SparseGridDesign& d = *interp.design;
    const int N = d.dimension();
    const int D = interp.value_dim;
    if (static_cast<int>(y.size()) != N) throw std::invalid_argument("point dimension mismatch");
    for (double v : y)
        if (!(v >= -1.0 && v <= 1.0))
            throw std::invalid_argument("evaluation point outside [-1,1]^N");
    if (interp.values.size() != static_cast<size_t>(d.point_count) * D)
        throw std::invalid_argument("interpolant values not populated");

    // Basis vectors per (dimension, level), computed once per call.
    const int max_level = static_cast<int>(d.rules.size()) - 1;
    std::vector<std::vector<double>> basis(static_cast<size_t>(N) * (max_level + 1));
    auto basis_for = [&](int n, int level) -> const std::vector<double>& {
        auto& b = basis[static_cast<size_t>(n) * (max_level + 1) + level];
        if (b.empty()) {
            b.resize(d.rules[level].point_count());
            d.rules[level].basis_at(y[n], b);
        }
        return b;
    };

    std::vector<double> result(D, 0.0);
    std::vector<const std::vector<double>*> dim_basis(N);
    std::vector<int> digit(N);
    for (const auto& term : d.terms) {
        for (int n = 0; n < N; ++n) dim_basis[n] = &basis_for(n, term.levels[n]);
        std::fill(digit.begin(), digit.end(), 0);
        for (int id : term.point_ids) {
            double f = static_cast<double>(term.coeff);
            for (int n = 0; n < N; ++n) f *= (*dim_basis[n])[digit[n]];
            if (f != 0.0) {
                const double* row = interp.values.data() + static_cast<size_t>(id) * D;
                for (int k = 0; k < D; ++k) result[k] += f * row[k];
            }
            for (int n = N - 1; n >= 0; --n) {
                if (++digit[n] < static_cast<int>(dim_basis[n]->size())) break;
                digit[n] = 0;
            }
        }
    }
    return result;
}

double interpolate_scalar(const Interpolant& interp, std::span<const double> y) {
    if (interp.value_dim != 1) throw std::invalid_argument("interpolant is not scalar-valued");
    return interpolate(interp, y)[0];
}

std::vector<double> expectation(const Interpolant& interp) {
    const SparseGridDesign& d = *interp.design;
    const int D = interp.value_dim;
    std::vector<double> result(D, 0.0);
    for (int m = 0; m < d.point_count; ++m) {
        const double w = d.quad_weights[m];
        const double* row = interp.values.data() + static_cast<size_t>(m) * D;
        for (int k = 0; k < D; ++k) result[k] += w * row[k];
    }
    return result;
}

double expectation_scalar(const Interpolant& interp) {
    if (interp.value_dim != 1) throw std::invalid_argument("interpolant is not scalar-valued");
    return expectation(interp)[0];
}

double weight_from_tau(double tau, double interval_width) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(interval_width > 0.0)) throw std::invalid_argument("interval width must be positive");
    const double r = 2.0 * tau / interval_width;
    return 0.5 * std::log(r + std::sqrt(1.0 + r * r));
}

double predicted_mu(int dimension, double alpha_min, GridKind kind,
                    std::span<const double> weights) {
    if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(alpha_min > 0.0)) throw std::invalid_argument("alpha_min must be positive");
    switch (kind) {
        case GridKind::TensorProduct:
            return alpha_min / dimension;
        case GridKind::Smolyak:
            return alpha_min / (1.0 + std::log(2.0 * dimension));
        case GridKind::AnisotropicSmolyak: {
            if (static_cast<int>(weights.size()) != dimension)
                throw std::invalid_argument("anisotropic rate needs the weight vector");
            double s = 0.0;
            for (double w : weights) {
                if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
                s += alpha_min / w;
            }
            return alpha_min * (std::numbers::e_v<double> * std::log(2.0) - 0.5) /
                   (std::log(2.0) + s);
        }
        default:
            throw std::invalid_argument("no predicted rate for this grid kind");
    }
}

std::string design_to_json(const SparseGridDesign& design) {
    nlohmann::json j;
    j["version"] = 1;
    j["kind"] = to_string(design.index_set.kind);
    j["N"] = design.index_set.dimension;
    j["L"] = design.index_set.level;
    if (!design.index_set.weights.empty()) j["weights"] = design.index_set.weights;
    nlohmann::json pts = nlohmann::json::array();
    for (int m = 0; m < design.point_count; ++m) {
        auto p = design.point(m);
        pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    j["points"] = std::move(pts);
    j["quad_weights"] = design.quad_weights;
    nlohmann::json combo = nlohmann::json::array();
    for (const auto& [idx, c] : design.combo)
        combo.push_back({{"index", idx}, {"coeff", c}});
    j["combo"] = std::move(combo);
    return j.dump();
}

std::shared_ptr<const SparseGridDesign> design_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error("unsupported design format version");
    auto design = std::make_shared<SparseGridDesign>();
    const int N = j.at("N").get<int>();
    design->index_set.kind = grid_kind_from_string(j.at("kind").get<std::string>());
    design->index_set.dimension = N;
    design->index_set.level = j.at("L").get<int>();
    if (j.contains("weights"))
        design->index_set.weights = j.at("weights").get<std::vector<double>>();

    for (const auto& row : j.at("points")) {
        const auto pt = row.get<std::vector<double>>();
        if (static_cast<int>(pt.size()) != N)
            throw std::runtime_error("design point has wrong dimension");
        design->coords.insert(design->coords.end(), pt.begin(), pt.end());
        ++design->point_count;
    }
    design->quad_weights = j.at("quad_weights").get<std::vector<double>>();
    if (static_cast<int>(design->quad_weights.size()) != design->point_count)
        throw std::runtime_error("quadrature weight count mismatch");

    int max_level = 1;
    for (const auto& entry : j.at("combo")) {
        const auto idx = entry.at("index").get<MultiIndex>();
        design->combo[idx] = entry.at("coeff").get<int>();
        for (int l : idx) max_level = std::max(max_level, l);
        design->index_set.members.push_back(idx);
    }
    std::sort(design->index_set.members.begin(), design->index_set.members.end());
    design->rules = rules_up_to(growth_of(design->index_set.kind), max_level);

    // Rebuild the tensor terms against the stored points.
    std::unordered_map<std::string, int> ids;
    std::string key(static_cast<size_t>(N) * sizeof(double), '\0');
    for (int m = 0; m < design->point_count; ++m) {
        std::memcpy(key.data(), design->coords.data() + static_cast<size_t>(m) * N, key.size());
        ids.emplace(key, m);
    }
    std::vector<double> pt(N);
    for (const auto& [levels, c] : design->combo) {
        SparseGridDesign::TensorTerm term;
        term.levels = levels;
        term.coeff = c;
        long long tensor_size = 1;
        for (int n = 0; n < N; ++n) tensor_size *= design->rules[levels[n]].point_count();
        std::vector<int> digit(N, 0);
        for (long long flat = 0; flat < tensor_size; ++flat) {
            for (int n = 0; n < N; ++n)
                pt[n] = design->rules[levels[n]].abscissas[digit[n]];
            std::memcpy(key.data(), pt.data(), key.size());
            auto it = ids.find(key);
            if (it == ids.end())
                throw std::runtime_error("stored design is missing a tensor point");
            term.point_ids.push_back(it->second);
            for (int n = N - 1; n >= 0; --n) {
                if (++digit[n] < design->rules[levels[n]].point_count()) break;
                digit[n] = 0;
            }
        }
        design->terms.push_back(std::move(term));
    }
    return design;
}

long long design_point_count(GridKind kind, int dimension, int level,
                             std::vector<double> weights) {
    if (growth_of(kind) == Growth::NestedDoubling && kind == GridKind::Smolyak) {
        // Nested increments are disjoint, so the cardinality is the sum over
        // the index set of products of per-level new-point counts.
        // new(1) = 1, new(2) = 2, new(l) = 2^(l-2) for l >= 3.
        auto new_points = [](int l) -> long long {
            if (l == 1) return 1;
            if (l == 2) return 2;
            return 1LL << (l - 2);
        };
        // DP over dimensions on the additive budget.
        std::vector<long long> count(level + 1, 0);
        count[0] = 1;
        for (int n = 0; n < dimension; ++n) {
            std::vector<long long> next(level + 1, 0);
            for (int b = 0; b <= level; ++b) {
                if (count[b] == 0) continue;
                for (int l = 1; b + l - 1 <= level; ++l)
                    next[b + l - 1] += count[b] * new_points(l);
            }
            count = std::move(next);
        }
        return std::accumulate(count.begin(), count.end(), 0LL);
    }
    return build_design(kind, dimension, level, std::move(weights))->point_count;
}

}  // namespace mlsc
