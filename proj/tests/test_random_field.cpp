#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mlsc/random_field.hpp"

using namespace mlsc;

namespace {

// Composite-midpoint quadrature oracle on (0,1).
template <typename F>
double integrate_01(F&& f, int n = 10000) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += f((i + 0.5) / n);
    return s / n;
}

}  // namespace

TEST_CASE("transcendental roots") {
    const auto roots = solve_transcendental(20);
    REQUIRE(roots.size() == 20);

    SUBCASE("defining equation residual") {
        for (double w : roots)
            CHECK(std::abs(std::tan(w) * (w * w - 1.0) - 2.0 * w) < 1e-10);
    }
    SUBCASE("one root per pi-bracket, increasing") {
        for (size_t n = 0; n < roots.size(); ++n) {
            CHECK(roots[n] > n * std::numbers::pi);
            CHECK(roots[n] < (n + 1) * std::numbers::pi);
            if (n > 0) CHECK(roots[n] > roots[n - 1]);
        }
    }
    SUBCASE("eigenvalues decrease quadratically") {
        const auto kl = make_kl_expansion_1d(20);
        for (int n = 1; n < 20; ++n) CHECK(kl.eigenvalues[n] < kl.eigenvalues[n - 1]);
        const double ratio = kl.eigenvalues[4] / kl.eigenvalues[9];
        CHECK(ratio == doctest::Approx(4.0).epsilon(0.30));
        // lambda_n * n^2 bounded above and below
        double lo = 1e300, hi = 0.0;
        for (int n = 0; n < 20; ++n) {
            const double v = kl.eigenvalues[n] * (n + 1) * (n + 1);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo > 0.05);
        CHECK(hi < 5.0);
    }
}

TEST_CASE("normalization constants") {
    const auto roots = solve_transcendental(8);
    for (double w : roots) {
        const double A = normalization_constant(w);
        CHECK(A > 0.0);
        const double norm = integrate_01([&](double x) {
            const double b = A * (std::sin(w * x) + w * std::cos(w * x));
            return b * b;
        });
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
    }
    // closed form and quadrature agree off the root set too
    for (double w : {0.7, 1.9, 7.3}) {
        const double A = normalization_constant(w);
        const double I = integrate_01([&](double x) {
            const double b = std::sin(w * x) + w * std::cos(w * x);
            return b * b;
        }, 200000);
        CHECK(A == doctest::Approx(1.0 / std::sqrt(I)).epsilon(1e-8));
    }
    CHECK_THROWS(normalization_constant(0.0));
}

TEST_CASE("unit L2 norm of the eigenfunctions") {
    const auto kl = make_kl_expansion_1d(6);
    for (int n = 0; n < 6; ++n) {
        const double norm = integrate_01([&](double x) {
            const double b = kl.basis(n, x);
            return b * b;
        });
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("2d eigenpairs") {
    const auto kl2 = make_kl_expansion_2d(10);
    REQUIRE(kl2.size == 10);

    SUBCASE("top eigenvalue is the squared 1D maximum") {
        const auto kl1 = make_kl_expansion_1d(1);
        CHECK(kl2.eigenvalues[0] ==
              doctest::Approx(kl1.eigenvalues[0] * kl1.eigenvalues[0]).epsilon(1e-14));
        CHECK(kl2.pairs[0] == std::pair<int, int>{1, 1});
    }
    SUBCASE("non-increasing, matches brute force over the pool") {
        const int pool = 10;
        const auto kl1 = make_kl_expansion_1d(pool);
        std::vector<double> products;
        for (int i = 0; i < pool; ++i)
            for (int j = 0; j < pool; ++j)
                products.push_back(kl1.eigenvalues[i] * kl1.eigenvalues[j]);
        std::sort(products.rbegin(), products.rend());
        for (int n = 0; n < 10; ++n) {
            CHECK(kl2.eigenvalues[n] == doctest::Approx(products[n]).epsilon(1e-13));
            if (n > 0) CHECK(kl2.eigenvalues[n] <= kl2.eigenvalues[n - 1]);
        }
    }
    SUBCASE("tie-breaking is lexicographic") {
        // lambda_1*lambda_2 appears as (1,2) before (2,1)
        for (size_t n = 0; n + 1 < kl2.pairs.size(); ++n) {
            if (kl2.eigenvalues[n] == kl2.eigenvalues[n + 1])
                CHECK(kl2.pairs[n] < kl2.pairs[n + 1]);
        }
    }
    SUBCASE("pool too small is rejected") {
        CHECK_THROWS(make_kl_expansion_2d(99, 10));
    }
    SUBCASE("product eigenfunctions have unit norm") {
        for (int n : {0, 3, 9}) {
            double norm = 0.0;
            const int q = 300;
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j) {
                    const double b = kl2.basis(n, (i + 0.5) / q, (j + 0.5) / q);
                    norm += b * b;
                }
            norm /= double(q) * q;
            CHECK(norm == doctest::Approx(1.0).epsilon(1e-5));
        }
    }
}

TEST_CASE("coefficient field") {
    const auto field = kl_coefficient(1, 6);

    SUBCASE("y = 0 gives the shifted unit coefficient") {
        const std::vector<double> y(6, 0.0);
        for (double x : {0.0, 0.25, 0.9}) CHECK(field.evaluate(y, x) == 1.5);
    }
    SUBCASE("sign flip inverts the exponential part") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> y(6), neg(6);
            for (int n = 0; n < 6; ++n) {
                y[n] = u(rng);
                neg[n] = -y[n];
            }
            const double x = 0.5 * (u(rng) + 1.0);
            const double prod =
                (field.evaluate(y, x) - 0.5) * (field.evaluate(neg, x) - 0.5);
            CHECK(prod == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("extremal vertex attains the lower envelope") {
        // brute force over all sign vertices
        const double x = 0.37;
        double min_val = 1e300;
        for (unsigned mask = 0; mask < (1u << 6); ++mask) {
            std::vector<double> y(6);
            for (int n = 0; n < 6; ++n) y[n] = (mask & (1u << n)) ? 1.0 : -1.0;
            min_val = std::min(min_val, field.evaluate(y, x));
        }
        double envelope = 0.0;
        for (int n = 0; n < 6; ++n) envelope += std::abs(field.scaled_basis(n, x));
        CHECK(min_val == doctest::Approx(0.5 + std::exp(-envelope)).epsilon(1e-12));
    }
    SUBCASE("bounds hold over random samples") {
        double envelope = 0.0;
        for (int n = 0; n < 6; ++n) {
            double bmax = 0.0;
            for (int i = 0; i <= 200; ++i)
                bmax = std::max(bmax, std::abs(field.scaled_basis(n, i / 200.0)));
            envelope += bmax;
        }
        std::mt19937 rng(4);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 1000; ++t) {
            std::vector<double> y(6);
            for (auto& v : y) v = u(rng);
            const double x = 0.5 * (u(rng) + 1.0);
            const double a = field.evaluate(y, x);
            CHECK(a > 0.5);
            CHECK(a < 0.5 + std::exp(envelope) + 1e-12);
        }
    }
    SUBCASE("dimension mismatch is rejected") {
        const std::vector<double> y(5, 0.0);
        CHECK_THROWS(field.evaluate(y, 0.5));
    }
}

TEST_CASE("2d coefficient field") {
    const auto field = kl_coefficient(2, 4);
    const std::vector<double> y0(4, 0.0);
    CHECK(field.evaluate(y0, 0.3, 0.7) == 1.5);
    std::vector<double> y(4, 0.5);
    CHECK(field.evaluate(y, 0.3, 0.7) > 0.5);
    const std::vector<double> bad(3, 0.0);
    CHECK_THROWS(field.evaluate(bad, 0.3, 0.7));
}

TEST_CASE("kl snapshot export") {
    const auto kl = make_kl_expansion_1d(3);
    const auto text = kl_to_json(kl);
    CHECK(text.find("\"N\":3") != std::string::npos);
    CHECK(text.find("roots") != std::string::npos);
    CHECK(text.find("eigenvalues") != std::string::npos);
    CHECK(text.find("norm_constants") != std::string::npos);
}
