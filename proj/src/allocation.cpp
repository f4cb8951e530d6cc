#include "mlsc/allocation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace mlsc {

bool RateConstants::validate(bool quiet) const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw std::invalid_argument(std::string("rate constant ") + name +
                                        " must be positive");
    };
    positive(alpha, "alpha");
    positive(C_s, "C_s");
    positive(beta, "beta");
    positive(mu, "mu");
    positive(C, "C");
    positive(gamma, "gamma");
    positive(C_c, "C_c");
    positive(h0, "h0");
    if (!(eta > 1.0)) throw std::invalid_argument("rate constant eta must exceed 1");
    if (alpha < std::min(beta, mu * gamma) - 1e-12) {
        if (!quiet)
            std::cerr << "warning: alpha < min(beta, mu*gamma); the cost theorem hypothesis "
                         "does not hold\n";
        return false;
    }
    return true;
}

int choose_finest_level(double eps, const RateConstants& rc) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const double k = std::log(2.0 * rc.C_s / eps) / (std::log(rc.eta) * rc.alpha);
    return std::max(0, static_cast<int>(std::ceil(k - 1e-12)));
}

std::vector<double> sample_counts_raw(double eps, int K, const RateConstants& rc) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (K < 0) throw std::invalid_argument("K must be >= 0");
    if (!(rc.mu > 0.0)) throw std::invalid_argument("mu must be positive");
    double S = 0.0;
    for (int k = 0; k <= K; ++k)
        S += std::pow(rc.eta, -k * (rc.beta - rc.gamma * rc.mu) / (rc.mu + 1.0));
    const double lead = std::pow(2.0 * rc.C * S, 1.0 / rc.mu) * std::pow(eps, -1.0 / rc.mu);
    std::vector<double> counts(K + 1);
    for (int k = 0; k <= K; ++k)
        counts[k] = lead * std::pow(rc.eta, -k * (rc.beta + rc.gamma) / (rc.mu + 1.0));
    return counts;
}

std::vector<long long> sample_counts(double eps, int K, const RateConstants& rc) {
    const auto raw = sample_counts_raw(eps, K, rc);
    std::vector<long long> counts(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        if (!(raw[i] < 9e15)) throw std::overflow_error("sample count overflow");
        counts[i] = std::max<long long>(1, static_cast<long long>(std::ceil(raw[i] - 1e-9)));
    }
    return counts;
}

RoundingScheme rounding_scheme_from_string(const std::string& s) {
    if (s == "ceil") return RoundingScheme::Ceil;
    if (s == "up") return RoundingScheme::UpToGrid;
    if (s == "updown" || s == "up/down") return RoundingScheme::BalancedUpDown;
    throw std::invalid_argument("unknown rounding scheme: " + s);
}

std::string to_string(RoundingScheme scheme) {
    switch (scheme) {
        case RoundingScheme::Ceil: return "ceil";
        case RoundingScheme::UpToGrid: return "up";
        case RoundingScheme::BalancedUpDown: return "updown";
    }
    return "?";
}

RoundedCounts round_to_grid(const std::vector<long long>& counts,
                            const std::vector<long long>& grid_sizes, RoundingScheme scheme) {
    if (grid_sizes.empty()) throw std::invalid_argument("grid sizes must not be empty");
    for (size_t i = 1; i < grid_sizes.size(); ++i)
        if (grid_sizes[i] <= grid_sizes[i - 1])
            throw std::invalid_argument("grid sizes must be strictly increasing");
    for (long long c : counts) {
        if (c < 1) throw std::invalid_argument("counts must be positive");
        if (c > grid_sizes.back())
            throw std::invalid_argument("count exceeds the largest realizable grid");
    }

    RoundedCounts out;
    out.counts = counts;
    if (scheme == RoundingScheme::Ceil) return out;

    auto level_at_or_above = [&](long long c) {
        for (size_t l = 0; l < grid_sizes.size(); ++l)
            if (grid_sizes[l] >= c) return static_cast<int>(l);
        return static_cast<int>(grid_sizes.size()) - 1;
    };

    out.grid_levels.resize(counts.size());
    if (scheme == RoundingScheme::UpToGrid) {
        for (size_t i = 0; i < counts.size(); ++i) {
            out.grid_levels[i] = level_at_or_above(counts[i]);
            out.counts[i] = grid_sizes[out.grid_levels[i]];
        }
        return out;
    }

    // BalancedUpDown: nearest grid in log-ratio, then rebalance.
    for (size_t i = 0; i < counts.size(); ++i) {
        const int up = level_at_or_above(counts[i]);
        int pick = up;
        if (up > 0 && grid_sizes[up] != counts[i]) {
            const double up_move = std::log(double(grid_sizes[up]) / double(counts[i]));
            const double down_move = std::log(double(counts[i]) / double(grid_sizes[up - 1]));
            if (down_move < up_move) pick = up - 1;
        }
        out.grid_levels[i] = pick;
    }
    for (;;) {
        int ups = 0, downs = 0;
        for (size_t i = 0; i < counts.size(); ++i) {
            const long long g = grid_sizes[out.grid_levels[i]];
            if (g > counts[i]) ++ups;
            else if (g < counts[i]) ++downs;
        }
        if (std::abs(ups - downs) <= 1) break;
        const bool flip_down_to_up = downs > ups;
        double best_move = -1.0;
        int best_i = -1;
        for (size_t i = 0; i < counts.size(); ++i) {
            const long long g = grid_sizes[out.grid_levels[i]];
            if (flip_down_to_up && g < counts[i]) {
                const double move = std::log(double(counts[i]) / double(g));
                if (move > best_move) {
                    best_move = move;
                    best_i = static_cast<int>(i);
                }
            } else if (!flip_down_to_up && g > counts[i]) {
                const double move = std::log(double(g) / double(counts[i]));
                if (move > best_move) {
                    best_move = move;
                    best_i = static_cast<int>(i);
                }
            }
        }
        if (best_i < 0) break;
        out.grid_levels[best_i] += flip_down_to_up ? 1 : -1;
    }
    for (size_t i = 0; i < counts.size(); ++i) out.counts[i] = grid_sizes[out.grid_levels[i]];
    return out;
}

ConstantsEstimate estimate_rate_constants(const QuadOracle& oracle,
                                          const std::vector<long long>& grid_sizes,
                                          const MeshHierarchy& mesh, double gamma, double C_c,
                                          int pilot_grid_levels, int ref_grid_level) {
    if (pilot_grid_levels < 2)
        throw std::invalid_argument("pilot needs at least two interpolation levels");
    if (static_cast<int>(grid_sizes.size()) < pilot_grid_levels)
        throw std::invalid_argument("grid sizes do not cover the pilot levels");

    ConstantsEstimate est;
    est.rc.eta = mesh.eta;
    est.rc.h0 = mesh.h0;
    est.rc.gamma = gamma;
    est.rc.C_c = C_c;

    // alpha from the level-1 interpolants of the first three mesh levels
    const double q10 = oracle(1, 0);
    const double q11 = oracle(1, 1);
    const double q12 = oracle(1, 2);
    est.d1 = q11 - q10;
    est.d2 = q12 - q11;
    if (est.d1 == 0.0 || est.d2 == 0.0)
        throw std::runtime_error("pilot level difference is zero; no rate fit possible");
    est.rc.alpha = std::log(std::abs(est.d1) / std::abs(est.d2)) / std::log(double(mesh.eta));
    if (!(est.rc.alpha > 0.0))
        throw std::runtime_error("pilot spatial rate is not positive");
    est.rc.beta = est.rc.alpha;

    // All errors are scaled to relative form by the best pilot estimate of E[psi].
    const double qref2 = oracle(ref_grid_level, 2);
    est.normalizer = std::abs(qref2);
    if (est.normalizer == 0.0)
        throw std::runtime_error("pilot estimate of E[psi] vanishes; cannot normalize");

    const double h1 = mesh.width(1);
    est.rc.C_s = (std::abs(est.d1) / est.normalizer) /
                 (std::pow(h1, est.rc.alpha) * (std::pow(double(mesh.eta), est.rc.alpha) - 1.0));

    // Pooled fit of log|Q_ref - Q_l| vs log M_l for psi(u_0) and
    // psi(u_1) - psi(u_0), h^beta scaling removed.
    const double ref0 = oracle(ref_grid_level, 0);
    const double ref1 = oracle(ref_grid_level, 1);
    const double scale0 = est.normalizer * std::pow(mesh.width(0), est.rc.beta);
    const double scale1 = est.normalizer * std::pow(mesh.width(1), est.rc.beta);
    std::vector<double> logM, logE;
    for (int l = 0; l < pilot_grid_levels; ++l) {
        const double ql0 = oracle(l, 0);
        const double ql1 = oracle(l, 1);
        const double e0 = std::abs(ref0 - ql0) / scale0;
        const double e1 = std::abs((ref1 - ref0) - (ql1 - ql0)) / scale1;
        for (double e : {e0, e1}) {
            if (e == 0.0)
                throw std::runtime_error("pilot interpolation error is zero; no fit possible");
            logE.push_back(std::log(e));
        }
        logM.push_back(std::log(double(grid_sizes[l])));
        logM.push_back(std::log(double(grid_sizes[l])));
    }
    const size_t n = logM.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += logM[i];
        my += logE[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (logM[i] - mx) * (logE[i] - my);
        sxx += (logM[i] - mx) * (logM[i] - mx);
    }
    const double slope = sxy / sxx;
    est.rc.mu = -slope;
    est.rc.C = std::exp(my - slope * mx);
    if (!(est.rc.mu > 0.0))
        throw std::runtime_error("pilot interpolation rate is not positive");
    est.rc.validate(true);
    return est;
}

ConstantsEstimate estimate_rate_constants(const Problem& problem, const Functional& psi,
                                          int workers) {
    const int ref_level = 3;
    NestedQuadrature quad(problem, psi, ref_level, workers);
    QuadOracle oracle = [&quad](int g, int m) { return quad.value(g, m); };
    return estimate_rate_constants(oracle, problem.grid_sizes(ref_level), problem.hierarchy(),
                                   double(problem.spatial_dim()), 1.0, 3, ref_level);
}

bool spatial_convergence_test(double measured_difference, const RateConstants& rc, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const double threshold = (std::pow(rc.eta, rc.alpha) - 1.0) * eps / 2.0;
    return std::abs(measured_difference) <= threshold;
}

AdaptiveResult adaptive_mlsc(const Problem& problem, const Functional& psi, double eps,
                             RoundingScheme scheme, int max_levels, int max_grid_level,
                             int workers, const ConstantsEstimate* fixed_constants) {
    ConstantsEstimate constants;
    bool estimated = true;
    if (fixed_constants) {
        constants = *fixed_constants;
        estimated = false;
    } else {
        constants = estimate_rate_constants(problem, psi, workers);
    }
    AdaptiveResult result = adaptive_mlsc(make_sample_source(problem, psi), problem, eps, scheme,
                                          constants, max_levels, max_grid_level, workers);
    result.constants_were_estimated = estimated;
    return result;
}

AdaptiveResult adaptive_mlsc(const SampleSource& source, const Problem& problem, double eps,
                             RoundingScheme scheme, const ConstantsEstimate& constants,
                             int max_levels, int max_grid_level, int workers) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (scheme == RoundingScheme::Ceil)
        throw std::invalid_argument("the driver needs counts rounded to realizable grids");

    AdaptiveResult result;
    result.constants = constants;
    const RateConstants& rc = result.constants.rc;
    const auto grid_sizes = problem.grid_sizes(max_grid_level);
    const CostModel cost{rc.C_c, rc.gamma};

    for (int K = 1; K <= max_levels; ++K) {
        const auto counts = sample_counts(eps, K, rc);
        const auto rounded = round_to_grid(counts, grid_sizes, scheme);
        LevelPlan plan;
        plan.K = K;
        plan.grid_levels = rounded.grid_levels;
        plan.sample_counts = rounded.counts;
        plan.rounding = to_string(scheme);
        plan.validate();

        EstimateReport report = mlsc_estimate(source, problem, plan, cost, true, workers);

        // Finest-level difference under its own grid; reuse quadratures the
        // estimate already computed where possible.
        const int g = plan.grid_levels[K];
        double q_fine = 0.0, q_coarse = 0.0;
        auto it = report.quadratures.find({g, K});
        q_fine = (it != report.quadratures.end())
                     ? it->second
                     : sparse_quadrature(source, *problem.design(g), K, workers);
        it = report.quadratures.find({g, K - 1});
        q_coarse = (it != report.quadratures.end())
                       ? it->second
                       : sparse_quadrature(source, *problem.design(g), K - 1, workers);
        const double normalizer = std::max(std::abs(report.value), 1e-300);
        result.convergence_metric = std::abs(q_fine - q_coarse) / normalizer;

        if (spatial_convergence_test(result.convergence_metric, rc, eps)) {
            result.plan = std::move(plan);
            result.report = std::move(report);
            return result;
        }
    }
    std::ostringstream os;
    os << "adaptive driver did not converge within " << max_levels
       << " levels (eps=" << eps << ", last measured relative difference="
       << result.convergence_metric << ", threshold="
       << (std::pow(rc.eta, rc.alpha) - 1.0) * eps / 2.0 << ")";
    throw MaxLevelsExceeded(os.str());
}

TheoreticalCost theoretical_cost(double eps, const RateConstants& rc, bool warn_only) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (eps >= std::exp(-1.0)) {
        if (!warn_only)
            throw std::invalid_argument("eps outside the theorem range (0, 1/e)");
        std::cerr << "warning: eps outside the theorem range (0, 1/e); bound is asymptotic\n";
    }
    TheoreticalCost out{};
    const double diff = rc.beta - rc.mu * rc.gamma;
    if (diff > 0.0) {
        out.regime = CostRegime::BetaGreater;
        out.ml_exponent = 1.0 / rc.mu;
        out.ml_log_exponent = 0.0;
    } else if (diff == 0.0) {
        out.regime = CostRegime::BetaEqual;
        out.ml_exponent = 1.0 / rc.mu;
        out.ml_log_exponent = 1.0 + 1.0 / rc.mu;
    } else {
        out.regime = CostRegime::BetaLess;
        out.ml_exponent = 1.0 / rc.mu + (rc.gamma * rc.mu - rc.beta) / (rc.alpha * rc.mu);
        out.ml_log_exponent = 0.0;
    }
    out.sl_exponent = 1.0 / rc.mu + rc.gamma / rc.alpha;
    out.ml_cost = std::pow(eps, -out.ml_exponent) *
                  std::pow(std::abs(std::log(eps)), out.ml_log_exponent);
    out.sl_cost = std::pow(eps, -out.sl_exponent);
    return out;
}

std::string plan_to_json(const LevelPlan& plan, const std::vector<double>& counts_raw,
                         const RateConstants& rc) {
    nlohmann::json j;
    j["K"] = plan.K;
    j["grid_levels"] = plan.grid_levels;
    j["counts_raw"] = counts_raw;
    j["counts_rounded"] = plan.sample_counts;
    j["scheme"] = plan.rounding;
    j["constants"] = {{"alpha", rc.alpha}, {"C_s", rc.C_s},   {"beta", rc.beta},
                      {"mu", rc.mu},       {"C", rc.C},       {"gamma", rc.gamma},
                      {"C_c", rc.C_c},     {"eta", rc.eta},   {"h0", rc.h0}};
    return j.dump();
}

}  // namespace mlsc
