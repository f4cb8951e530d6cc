#include "mlsc/one_dim_rule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlsc {

int growth_points(Growth growth, int level) {
    if (level < 1) throw std::invalid_argument("rule level must be >= 1");
    if (growth == Growth::Linear) return level;
    if (level == 1) return 1;
    if (level > 40) throw std::invalid_argument("rule level too large");
    return (1 << (level - 1)) + 1;
}

namespace {

std::vector<double> cc_abscissas(int p) {
    if (p == 1) return {0.0};
    const int n = p - 1;
    std::vector<double> y(p);
    for (int j = 0; 2 * j < n; ++j) {
        const double c = std::cos(std::numbers::pi * j / n);
        y[j] = -c;
        y[n - j] = c;
    }
    if (n % 2 == 0) y[n / 2] = 0.0;
    return y;
}

// Closed-form Clenshaw-Curtis weights for the extrema nodes, normalized to
// the uniform density 1/2 on [-1, 1].
std::vector<double> cc_weights(int p) {
    if (p == 1) return {1.0};
    const int n = p - 1;
    std::vector<double> w(p);
    for (int j = 0; 2 * j <= n; ++j) {
        double s = 0.0;
        for (int k = 1; 2 * k <= n; ++k) {
            const double b = (2 * k == n) ? 1.0 : 2.0;
            s += b * std::cos(2.0 * k * j * std::numbers::pi / n) / (4.0 * k * k - 1.0);
        }
        const double c = (j == 0 || j == n) ? 1.0 : 2.0;
        const double wj = c / n * (1.0 - s) / 2.0;
        w[j] = wj;
        w[n - j] = wj;
    }
    return w;
}

std::vector<double> barycentric_weights(std::span<const double> x) {
    const int p = static_cast<int>(x.size());
    std::vector<double> lam(p, 1.0);
    for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k)
            if (k != j) lam[j] /= (x[j] - x[k]);
    double scale = 0.0;
    for (double v : lam) scale = std::max(scale, std::abs(v));
    for (double& v : lam) v /= scale;
    return lam;
}

}  // namespace

OneDimRule clenshaw_curtis_rule(int level, Growth growth) {
    OneDimRule rule;
    rule.level = level;
    rule.growth = growth;
    const int p = growth_points(growth, level);
    rule.abscissas = cc_abscissas(p);
    rule.quad_weights = cc_weights(p);
    rule.bary_weights = barycentric_weights(rule.abscissas);
    return rule;
}

void OneDimRule::basis_at(double y, std::span<double> out) const {
    const int p = point_count();
    if (static_cast<int>(out.size()) != p)
        throw std::invalid_argument("basis output span has wrong size");
    if (p == 1) {
        out[0] = 1.0;
        return;
    }
    for (int j = 0; j < p; ++j) {
        if (y == abscissas[j]) {
            for (int k = 0; k < p; ++k) out[k] = 0.0;
            out[j] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (int j = 0; j < p; ++j) {
        const double t = bary_weights[j] / (y - abscissas[j]);
        out[j] = t;
        denom += t;
    }
    for (int j = 0; j < p; ++j) out[j] /= denom;
}

}  // namespace mlsc
