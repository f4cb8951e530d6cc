#include "mlsc/random_field.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlsc {

namespace {

// Pole-free form of tan(w) = 2w/(w^2-1).
double transcendental(double w) {
    return std::sin(w) * (w * w - 1.0) - 2.0 * w * std::cos(w);
}

}  // namespace

std::vector<double> solve_transcendental(int count) {
    if (count < 1) throw std::invalid_argument("root count must be >= 1");
    std::vector<double> roots;
    roots.reserve(count);
    for (int k = 0; k < count; ++k) {
        double a = k * std::numbers::pi;
        double b = (k + 1) * std::numbers::pi;
        if (k == 0) a = 1e-6;  // skip the trivial root at w = 0
        double fa = transcendental(a);
        const double fb = transcendental(b);
        if (fa == 0.0) {
            roots.push_back(a);
            continue;
        }
        if (fa * fb > 0.0)
            throw std::runtime_error("failed to bracket transcendental root " +
                                     std::to_string(k + 1));
        for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = transcendental(mid);
            if (fm == 0.0) {
                a = b = mid;
                break;
            }
            if (fa * fm < 0.0) {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        roots.push_back(0.5 * (a + b));
    }
    return roots;
}

double normalization_constant(double w) {
    if (!(w > 0.0)) throw std::invalid_argument("root must be positive");
    // integral of (sin(wx) + w cos(wx))^2 over (0,1)
    const double s2w = std::sin(2.0 * w);
    const double c2w = std::cos(2.0 * w);
    const double integral =
        0.5 * (1.0 + w * w) + 0.5 * (1.0 - c2w) + (w * w - 1.0) * s2w / (4.0 * w);
    return 1.0 / std::sqrt(integral);
}

double KLExpansion1D::basis(int n, double x) const {
    const double w = roots[n];
    return norm_constants[n] * (std::sin(w * x) + w * std::cos(w * x));
}

KLExpansion1D make_kl_expansion_1d(int count) {
    KLExpansion1D kl;
    kl.size = count;
    kl.roots = solve_transcendental(count);
    kl.eigenvalues.reserve(count);
    kl.norm_constants.reserve(count);
    for (double w : kl.roots) {
        kl.eigenvalues.push_back(2.0 / (w * w + 1.0));
        kl.norm_constants.push_back(normalization_constant(w));
    }
    return kl;
}

double KLExpansion2D::basis(int n, double x1, double x2) const {
    const auto [i, j] = pairs[n];
    return base.basis(i - 1, x1) * base.basis(j - 1, x2);
}

KLExpansion2D make_kl_expansion_2d(int count, int pool_size) {
    if (count < 1) throw std::invalid_argument("truncation must be >= 1");
    if (pool_size == 0)
        pool_size = std::max(2 * static_cast<int>(std::ceil(std::sqrt(double(count)))), 10);
    if (static_cast<long long>(pool_size) * pool_size < count)
        throw std::invalid_argument("1D pool too small for the requested truncation");

    KLExpansion2D kl;
    // One extra 1D eigenvalue certifies that nothing outside the pool can
    // beat the selected products.
    KLExpansion1D pool = make_kl_expansion_1d(pool_size + 1);
    struct Cand {
        double value;
        int i, j;
    };
    std::vector<Cand> cands;
    cands.reserve(static_cast<size_t>(pool_size) * pool_size);
    for (int i = 1; i <= pool_size; ++i)
        for (int j = 1; j <= pool_size; ++j)
            cands.push_back({pool.eigenvalues[i - 1] * pool.eigenvalues[j - 1], i, j});
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    const double best_excluded = pool.eigenvalues[pool_size] * pool.eigenvalues[0];
    if (best_excluded > cands[count - 1].value)
        throw std::invalid_argument("1D pool too small to certify the top-N eigenpairs");

    kl.size = count;
    for (int n = 0; n < count; ++n) {
        kl.pairs.emplace_back(cands[n].i, cands[n].j);
        kl.eigenvalues.push_back(cands[n].value);
    }
    int max_index = 1;
    for (const auto& [i, j] : kl.pairs) max_index = std::max({max_index, i, j});
    kl.base = make_kl_expansion_1d(max_index);
    return kl;
}

double CoefficientField::evaluate(std::span<const double> y, double x) const {
    if (kind == Kind::Constant) return constant_value;
    if (kind != Kind::KL1D) throw std::invalid_argument("coefficient is not one-dimensional");
    if (static_cast<int>(y.size()) != dimension)
        throw std::invalid_argument("parameter dimension mismatch");
    double s = 0.0;
    for (int n = 0; n < dimension; ++n)
        s += std::sqrt(kl1d.eigenvalues[n]) * kl1d.basis(n, x) * y[n];
    return base_shift + std::exp(s);
}

double CoefficientField::evaluate(std::span<const double> y, double x1, double x2) const {
    if (kind == Kind::Constant) return constant_value;
    if (kind != Kind::KL2D) throw std::invalid_argument("coefficient is not two-dimensional");
    if (static_cast<int>(y.size()) != dimension)
        throw std::invalid_argument("parameter dimension mismatch");
    double s = 0.0;
    for (int n = 0; n < dimension; ++n)
        s += std::sqrt(kl2d.eigenvalues[n]) * kl2d.basis(n, x1, x2) * y[n];
    return base_shift + std::exp(s);
}

double CoefficientField::scaled_basis(int n, double x) const {
    if (kind != Kind::KL1D) throw std::invalid_argument("coefficient is not one-dimensional");
    return std::sqrt(kl1d.eigenvalues[n]) * kl1d.basis(n, x);
}

double CoefficientField::scaled_basis(int n, double x1, double x2) const {
    if (kind != Kind::KL2D) throw std::invalid_argument("coefficient is not two-dimensional");
    return std::sqrt(kl2d.eigenvalues[n]) * kl2d.basis(n, x1, x2);
}

std::string CoefficientField::fingerprint() const {
    switch (kind) {
        case Kind::Constant:
            return "const:" + std::to_string(constant_value) + ":d" +
                   std::to_string(spatial_dim) + ":N" + std::to_string(dimension);
        case Kind::KL1D:
            return "kl1d:N" + std::to_string(dimension);
        case Kind::KL2D:
            return "kl2d:N" + std::to_string(dimension);
    }
    return "?";
}

CoefficientField constant_coefficient(int spatial_dim, int dimension, double value) {
    CoefficientField f;
    f.kind = CoefficientField::Kind::Constant;
    f.spatial_dim = spatial_dim;
    f.dimension = dimension;
    f.constant_value = value;
    return f;
}

CoefficientField kl_coefficient(int spatial_dim, int dimension, int pool_size) {
    CoefficientField f;
    f.spatial_dim = spatial_dim;
    f.dimension = dimension;
    if (spatial_dim == 1) {
        f.kind = CoefficientField::Kind::KL1D;
        f.kl1d = make_kl_expansion_1d(dimension);
    } else if (spatial_dim == 2) {
        f.kind = CoefficientField::Kind::KL2D;
        f.kl2d = make_kl_expansion_2d(dimension, pool_size);
    } else {
        throw std::invalid_argument("spatial dimension must be 1 or 2");
    }
    return f;
}

std::string kl_to_json(const KLExpansion1D& kl) {
    nlohmann::json j;
    j["N"] = kl.size;
    j["roots"] = kl.roots;
    j["eigenvalues"] = kl.eigenvalues;
    j["norm_constants"] = kl.norm_constants;
    return j.dump();
}

}  // namespace mlsc
