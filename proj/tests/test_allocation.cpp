#include <doctest.h>

#include <cmath>
#include <random>

#include "mlsc/allocation.hpp"
#include "mlsc/config.hpp"
#include "test_util.hpp"

using namespace mlsc;

namespace {

RateConstants paper_1d_constants() {
    RateConstants rc;
    rc.alpha = 2.1;
    rc.beta = 2.1;
    rc.mu = 0.8;
    rc.C = 0.01;
    rc.C_s = 2e-3;
    rc.gamma = 1.0;
    rc.C_c = 1.0;
    rc.eta = 2.0;
    rc.h0 = 0.25;
    return rc;
}

const std::vector<long long> kGrids20 = {1, 41, 841, 11561, 120401};

}  // namespace

TEST_CASE("finest level selection") {
    RateConstants rc;
    rc.alpha = 2.0;
    rc.C_s = 1.0;
    rc.eta = 2.0;
    SUBCASE("integral logs land exactly") {
        // eps = 2 C_s eta^(-alpha K0) with K0 = 3
        const double eps = 2.0 * std::pow(2.0, -2.0 * 3);
        CHECK(choose_finest_level(eps, rc) == 3);
    }
    SUBCASE("large targets clamp to zero") {
        CHECK(choose_finest_level(2.0, rc) == 0);
        CHECK(choose_finest_level(5.0, rc) == 0);
    }
    SUBCASE("paper-style example") {
        CHECK(choose_finest_level(1e-3, rc) == 6);  // ceil(log2(2000)/2)
    }
}

TEST_CASE("optimal sample counts") {
    SUBCASE("single level uses the plain formula") {
        RateConstants rc;
        rc.mu = 0.5;
        rc.C = 0.02;
        const auto counts = sample_counts(1e-3, 0, rc);
        REQUIRE(counts.size() == 1);
        const double expected = std::pow(2.0 * 0.02, 2.0) * std::pow(1e-3, -2.0);
        CHECK(counts[0] == static_cast<long long>(std::ceil(expected - 1e-9)));
    }
    SUBCASE("paper constants land within a factor two of the published row") {
        const auto rc = paper_1d_constants();
        CHECK(choose_finest_level(6.3e-4, rc) == 2);
        const auto counts = sample_counts(6.3e-4, 2, rc);
        const std::vector<long long> published = {191, 48, 15};
        REQUIRE(counts.size() == published.size());
        for (size_t i = 0; i < counts.size(); ++i) {
            CHECK(double(counts[i]) <= 2.0 * double(published[i]));
            CHECK(double(counts[i]) >= 0.5 * double(published[i]));
        }
    }
    SUBCASE("counts scale as eps^(-1/mu) before rounding") {
        const auto rc = paper_1d_constants();
        const auto a = sample_counts_raw(1e-4, 3, rc);
        const auto b = sample_counts_raw(5e-5, 3, rc);
        for (size_t i = 0; i < a.size(); ++i)
            CHECK(b[i] / a[i] == doctest::Approx(std::pow(2.0, 1.0 / rc.mu)).epsilon(1e-9));
    }
    SUBCASE("raw counts decrease strictly towards finer meshes") {
        const auto rc = paper_1d_constants();
        const auto raw = sample_counts_raw(1e-4, 4, rc);
        for (size_t i = 1; i < raw.size(); ++i) CHECK(raw[i] < raw[i - 1]);
    }
    SUBCASE("invalid rates are rejected") {
        RateConstants rc = paper_1d_constants();
        rc.mu = -1.0;
        CHECK_THROWS(sample_counts(1e-4, 2, rc));
        CHECK_THROWS(sample_counts(-1e-4, 2, paper_1d_constants()));
    }
}

TEST_CASE("rounding to realizable grids") {
    SUBCASE("published table rows reproduce exactly") {
        const std::vector<long long> formula = {191, 48, 15};
        const auto up = round_to_grid(formula, kGrids20, RoundingScheme::UpToGrid);
        CHECK(up.counts == std::vector<long long>{841, 841, 41});
        const auto updown = round_to_grid(formula, kGrids20, RoundingScheme::BalancedUpDown);
        CHECK(updown.counts == std::vector<long long>{841, 41, 41});
    }
    SUBCASE("remaining published rows") {
        const auto r2 = round_to_grid({3002, 747, 233, 73}, kGrids20, RoundingScheme::UpToGrid);
        CHECK(r2.counts == std::vector<long long>{11561, 841, 841, 841});
        const auto r2b =
            round_to_grid({3002, 747, 233, 73}, kGrids20, RoundingScheme::BalancedUpDown);
        CHECK(r2b.counts == std::vector<long long>{841, 841, 841, 41});
        const auto r3 = round_to_grid({27940, 6949, 2169, 677, 212}, kGrids20,
                                      RoundingScheme::UpToGrid);
        CHECK(r3.counts == std::vector<long long>{120401, 11561, 11561, 841, 841});
        const auto r3b = round_to_grid({27940, 6949, 2169, 677, 212}, kGrids20,
                                       RoundingScheme::BalancedUpDown);
        CHECK(r3b.counts == std::vector<long long>{11561, 11561, 841, 841, 841});
        const auto r4 = round_to_grid({110310, 27433, 8562, 2672, 834}, kGrids20,
                                      RoundingScheme::UpToGrid);
        CHECK(r4.counts == std::vector<long long>{120401, 120401, 11561, 11561, 841});
        const auto r4b = round_to_grid({110310, 27433, 8562, 2672, 834}, kGrids20,
                                       RoundingScheme::BalancedUpDown);
        CHECK(r4b.counts == std::vector<long long>{120401, 11561, 11561, 841, 841});
    }
    SUBCASE("counts already on the grid stay put under every scheme") {
        const std::vector<long long> exact = {841, 41, 1};
        for (auto scheme : {RoundingScheme::Ceil, RoundingScheme::UpToGrid,
                            RoundingScheme::BalancedUpDown}) {
            const auto r = round_to_grid(exact, kGrids20, scheme);
            CHECK(r.counts == exact);
        }
    }
    SUBCASE("ceil is the identity") {
        const std::vector<long long> counts = {191, 48, 15};
        const auto r = round_to_grid(counts, kGrids20, RoundingScheme::Ceil);
        CHECK(r.counts == counts);
        CHECK(r.grid_levels.empty());
    }
    SUBCASE("up-rounding is idempotent and dominates the input") {
        std::mt19937 rng(9);
        std::uniform_int_distribution<long long> pick(1, 120000);
        for (int t = 0; t < 50; ++t) {
            std::vector<long long> counts = {pick(rng), pick(rng) % 12000 + 1,
                                             pick(rng) % 800 + 1};
            std::sort(counts.rbegin(), counts.rend());
            const auto once = round_to_grid(counts, kGrids20, RoundingScheme::UpToGrid);
            for (size_t i = 0; i < counts.size(); ++i) CHECK(once.counts[i] >= counts[i]);
            const auto twice = round_to_grid(once.counts, kGrids20, RoundingScheme::UpToGrid);
            CHECK(twice.counts == once.counts);
        }
    }
    SUBCASE("balanced rounding differs from nearest in few entries") {
        std::mt19937 rng(10);
        std::uniform_int_distribution<long long> pick(2, 100000);
        for (int t = 0; t < 50; ++t) {
            const int K = 1 + t % 5;
            std::vector<long long> counts(K + 1);
            for (auto& c : counts) c = pick(rng);
            std::sort(counts.rbegin(), counts.rend());
            const auto balanced =
                round_to_grid(counts, kGrids20, RoundingScheme::BalancedUpDown);
            // nearest-in-log rounding, no rebalancing
            int moved = 0;
            for (size_t i = 0; i < counts.size(); ++i) {
                size_t up = 0;
                while (kGrids20[up] < counts[i]) ++up;
                long long nearest = kGrids20[up];
                if (up > 0 && kGrids20[up] != counts[i]) {
                    const double up_move = std::log(double(kGrids20[up]) / counts[i]);
                    const double down_move = std::log(double(counts[i]) / kGrids20[up - 1]);
                    if (down_move < up_move) nearest = kGrids20[up - 1];
                }
                if (balanced.counts[i] != nearest) ++moved;
            }
            CHECK(moved <= (K + 2) / 2);
            // grids stay monotone
            for (size_t i = 1; i < balanced.counts.size(); ++i)
                CHECK(balanced.counts[i] <= balanced.counts[i - 1]);
        }
    }
    SUBCASE("counts beyond the largest grid are rejected") {
        CHECK_THROWS(round_to_grid({200000}, kGrids20, RoundingScheme::UpToGrid));
    }
}

TEST_CASE("rate constant estimation") {
    const auto mesh = make_hierarchy(1, 0.25, 2);
    const std::vector<long long> grids = {1, 41, 841, 11561};

    SUBCASE("manufactured spatial decay gives the exact rate") {
        // interpolation error independent of the mesh level cancels in the
        // spatial differences; a tiny mesh coupling keeps the fit well posed
        const QuadOracle oracle = [&](int g, int m) {
            const double h = mesh.width(m);
            const double interp = 0.05 * (1.0 + 1e-9 * m) * std::pow(double(grids[g]), -0.8);
            return 1.0 - 0.3 * h * h + interp;
        };
        const auto est = estimate_rate_constants(oracle, grids, mesh, 1.0, 1.0);
        CHECK(est.rc.alpha == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(est.rc.beta == est.rc.alpha);
        // C_s recovers the manufactured constant (relative scale, normalizer ~ 1)
        CHECK(est.rc.C_s == doctest::Approx(0.3 / est.normalizer).epsilon(1e-3));
    }
    SUBCASE("manufactured interpolation decay recovers mu") {
        const QuadOracle oracle = [&](int g, int m) {
            const double h = mesh.width(m);
            const double interp =
                0.02 * (1.0 + 0.4 * m) * std::pow(double(grids[g]), -0.8);
            return 1.0 - 0.3 * h * h - interp;
        };
        const auto est = estimate_rate_constants(oracle, grids, mesh, 1.0, 1.0);
        CHECK(est.rc.mu == doctest::Approx(0.8).epsilon(0.0625));  // 0.8 +- 0.05
        CHECK(est.rc.C > 0.0);
    }
    SUBCASE("zero pilot differences fail loudly") {
        const QuadOracle oracle = [](int, int) { return 1.0; };
        CHECK_THROWS(estimate_rate_constants(oracle, grids, mesh, 1.0, 1.0));
    }
}

TEST_CASE("spatial convergence test") {
    RateConstants rc;
    rc.alpha = 2.0;
    rc.eta = 2.0;
    SUBCASE("zero difference converges for any target") {
        CHECK(spatial_convergence_test(0.0, rc, 1e-12));
    }
    SUBCASE("threshold is (eta^alpha - 1) eps / 2") {
        const double eps = 1e-3;
        CHECK(spatial_convergence_test(1.5 * eps - 1e-12, rc, eps));
        CHECK(!spatial_convergence_test(1.5 * eps + 1e-12, rc, eps));
    }
    SUBCASE("manufactured quadratic error passes exactly at c h^2 <= eps/2") {
        // measured difference at level K is c h_K^2 (eta^alpha - 1)
        const double c = 0.3, hK = 1.0 / 16.0;
        const double diff = c * hK * hK * 3.0;
        CHECK(spatial_convergence_test(diff, rc, 2.0 * c * hK * hK + 1e-12));
        CHECK(!spatial_convergence_test(diff, rc, 2.0 * c * hK * hK - 1e-9));
    }
}

TEST_CASE("theoretical cost regimes") {
    SUBCASE("2d experiment constants") {
        RateConstants rc;
        rc.alpha = 2.0;
        rc.beta = 2.0;
        rc.mu = 1.4;
        rc.gamma = 2.0;
        const auto tc = theoretical_cost(1e-3, rc);
        CHECK(tc.regime == CostRegime::BetaLess);
        CHECK(tc.ml_exponent == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(tc.sl_exponent - 1.72) < 0.01);
    }
    SUBCASE("1d experiment constants") {
        RateConstants rc;
        rc.alpha = 2.0;
        rc.beta = 2.0;
        rc.mu = 0.8;
        rc.gamma = 1.0;
        const auto tc = theoretical_cost(1e-3, rc);
        CHECK(tc.regime == CostRegime::BetaGreater);
        CHECK(tc.ml_exponent == doctest::Approx(1.25).epsilon(1e-12));
        CHECK(std::abs(tc.sl_exponent - 1.75) < 0.01);
    }
    SUBCASE("boundary case carries the log factor") {
        RateConstants rc;
        rc.alpha = 2.0;
        rc.beta = 2.0;
        rc.mu = 1.0;
        rc.gamma = 2.0;
        const auto tc = theoretical_cost(1e-3, rc);
        CHECK(tc.regime == CostRegime::BetaEqual);
        CHECK(tc.ml_log_exponent == doctest::Approx(2.0));
    }
    SUBCASE("regime is a pure function of beta - mu gamma") {
        RateConstants rc;
        rc.alpha = 3.0;
        rc.gamma = 1.5;
        rc.mu = 1.0;
        rc.beta = 1.6;
        CHECK(theoretical_cost(1e-2, rc).regime == CostRegime::BetaGreater);
        rc.beta = 1.5;
        CHECK(theoretical_cost(1e-2, rc).regime == CostRegime::BetaEqual);
        rc.beta = 1.4;
        CHECK(theoretical_cost(1e-2, rc).regime == CostRegime::BetaLess);
    }
    SUBCASE("targets outside the theorem range") {
        RateConstants rc;
        CHECK_THROWS(theoretical_cost(0.5, rc));
        CHECK_NOTHROW(theoretical_cost(0.5, rc, true));
        CHECK_THROWS(theoretical_cost(-1.0, rc, true));
    }
}

TEST_CASE("adaptive driver on the manufactured problem") {
    // synthetic smooth interpoland with a known quadratic spatial error
    const auto problem = Problem(constant_coefficient(1, 3, 1.0), make_hierarchy(1, 0.25, 2));
    auto make_source = [&](double c_spatial) {
        SampleSource src;
        src.dimension = 3;
        src.eval = [c_spatial, &problem](std::span<const double> y, int m) {
            const double h = problem.hierarchy().width(m);
            double f = 1.0;
            for (double v : y) f *= std::exp(0.2 * v);
            return f - c_spatial * h * h;
        };
        return src;
    };

    SUBCASE("convergence happens at the predicted level") {
        const auto src = make_source(0.3);
        const auto grids = problem.grid_sizes(4);
        // constants straight from the manufactured model
        const QuadOracle oracle = [&](int g, int m) {
            const double h = problem.hierarchy().width(m);
            const double interp = 0.02 * (1.0 + 0.4 * m) * std::pow(double(grids[g]), -0.8);
            return 1.0 - 0.3 * h * h - interp;
        };
        const auto est =
            estimate_rate_constants(oracle, grids, problem.hierarchy(), 1.0, 1.0, 3, 3);
        const double eps = 1e-4;
        const auto result =
            adaptive_mlsc(src, problem, eps, RoundingScheme::UpToGrid, est, 8, 4);
        const int K_formula = choose_finest_level(eps, est.rc);
        CHECK(std::abs(result.plan.K - std::max(1, K_formula)) <= 1);

        // interpolation error of the converged estimate stays below eps/2:
        // compare against the overkill quadrature of the same interpoland
        const double overkill =
            sparse_quadrature(src, *problem.design(4), result.plan.K, 1);
        const double interp_err =
            std::abs(result.report.value - overkill) / std::abs(overkill);
        CHECK(interp_err <= eps / 2.0 + 1e-12);
    }

    SUBCASE("targets larger than the coarse error terminate at K = 1") {
        const auto src = make_source(0.3);
        ConstantsEstimate fixed;
        fixed.rc = paper_1d_constants();
        fixed.rc.alpha = 2.0;
        fixed.rc.beta = 2.0;
        const auto result =
            adaptive_mlsc(src, problem, 0.5, RoundingScheme::BalancedUpDown, fixed, 8, 4);
        CHECK(result.plan.K == 1);
    }

    SUBCASE("non-decaying differences raise MaxLevelsExceeded") {
        SampleSource src;
        src.dimension = 3;
        src.eval = [](std::span<const double> y, int m) {
            return 1.0 + 0.5 * (m % 2) + 0.01 * y[0];
        };
        ConstantsEstimate fixed;
        fixed.rc = paper_1d_constants();
        CHECK_THROWS_AS(
            adaptive_mlsc(src, problem, 2e-2, RoundingScheme::BalancedUpDown, fixed, 4, 4),
            MaxLevelsExceeded);
    }
}

TEST_CASE("adaptive driver end to end") {
    // real 1d problem, small dimension so the pilot stays fast
    const auto problem = Problem(kl_coefficient(1, 4), make_hierarchy(1, 0.25, 2));
    const auto psi = Functional::point_value_1d(0.75);
    const auto result = adaptive_mlsc(problem, psi, 0.3, RoundingScheme::BalancedUpDown);
    CHECK(result.plan.K == 1);
    CHECK(result.constants_were_estimated);
    CHECK(result.report.value != 0.0);
    CHECK(result.constants.rc.alpha > 0.0);
}

TEST_CASE("pilot on the 1d benchmark problem lands in the published bands") {
    const auto config = preset("paper-1d-n20");
    const auto problem = build_problem(config);
    const auto psi = build_functional(config);
    const auto est = estimate_rate_constants(problem, psi);
    CHECK(est.rc.alpha >= 1.8);
    CHECK(est.rc.alpha <= 2.4);
    CHECK(est.rc.mu >= 0.6);
    CHECK(est.rc.mu <= 1.0);
    CHECK(est.rc.C > 0.0);
    CHECK(est.rc.C_s > 0.0);
}

TEST_CASE("plan serialization") {
    LevelPlan plan;
    plan.K = 2;
    plan.grid_levels = {2, 1, 1};
    plan.sample_counts = {841, 41, 41};
    plan.rounding = "updown";
    const auto rc = paper_1d_constants();
    const auto text = plan_to_json(plan, {191.0, 48.0, 15.0}, rc);
    CHECK(text.find("\"K\":2") != std::string::npos);
    CHECK(text.find("counts_raw") != std::string::npos);
    CHECK(text.find("\"scheme\":\"updown\"") != std::string::npos);
}
