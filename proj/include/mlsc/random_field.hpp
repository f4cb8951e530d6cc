#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mlsc {

/// Karhunen-Loeve eigenstructure of the exponential covariance
/// exp(-|x - x'|) on (0,1): eigenvalues 2/(w^2+1) with w the positive
/// solutions of tan(w) = 2w/(w^2-1), eigenfunctions
/// b(x) = A (sin(wx) + w cos(wx)) normalized in L2(0,1).
struct KLExpansion1D {
    int size = 0;
    std::vector<double> roots;           // strictly increasing
    std::vector<double> eigenvalues;     // strictly decreasing
    std::vector<double> norm_constants;  // A_n > 0

    double basis(int n, double x) const;  // b_{n+1}(x), 0-based n
};

/// The n smallest positive roots of tan(w) = 2w/(w^2-1), each to absolute
/// tolerance 1e-12.  Bisection runs on the pole-free recast
/// sin(w)(w^2-1) - 2w cos(w), which changes sign on every (k pi, (k+1) pi).
std::vector<double> solve_transcendental(int count);

/// Normalization constant A with ||A (sin(wx) + w cos(wx))||_{L2(0,1)} = 1,
/// from the closed-form antiderivative.
double normalization_constant(double w);

KLExpansion1D make_kl_expansion_1d(int count);

/// Product eigenstructure on (0,1)^2: the largest N products
/// lambda_i * lambda_j over a 1D pool, ties broken lexicographically.
struct KLExpansion2D {
    int size = 0;
    std::vector<std::pair<int, int>> pairs;  // 1-based (i, j)
    std::vector<double> eigenvalues;         // non-increasing
    KLExpansion1D base;

    double basis(int n, double x1, double x2) const;
};

/// pool_size = 0 picks the default max(2*ceil(sqrt(N)), 10).  Throws if the
/// pool cannot certify the top-N selection (the best excluded product would
/// exceed the smallest included one).
KLExpansion2D make_kl_expansion_2d(int count, int pool_size = 0);

/// Diffusion coefficient of the experiments:
/// a(y, x) = shift + exp(sum_n sqrt(lambda_n) b_n(x) y_n), or a constant.
struct CoefficientField {
    enum class Kind { Constant, KL1D, KL2D };
    Kind kind = Kind::Constant;
    int spatial_dim = 1;
    int dimension = 1;  // parameter dimension N
    double base_shift = 0.5;
    double constant_value = 1.0;
    KLExpansion1D kl1d;
    KLExpansion2D kl2d;

    bool depends_on_parameters() const { return kind != Kind::Constant; }
    double evaluate(std::span<const double> y, double x) const;
    double evaluate(std::span<const double> y, double x1, double x2) const;

    /// sqrt(lambda_n) * b_n at a spatial point, for precomputed tables.
    double scaled_basis(int n, double x) const;
    double scaled_basis(int n, double x1, double x2) const;

    std::string fingerprint() const;
};

CoefficientField constant_coefficient(int spatial_dim, int dimension, double value);
CoefficientField kl_coefficient(int spatial_dim, int dimension, int pool_size = 0);

/// Reproducibility snapshot {N, roots, eigenvalues, norm_constants}.
std::string kl_to_json(const KLExpansion1D& kl);

}  // namespace mlsc
