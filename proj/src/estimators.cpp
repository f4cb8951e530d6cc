#include "mlsc/estimators.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "mlsc/parallel.hpp"
#include "mlsc/rng.hpp"

namespace mlsc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

void LevelPlan::validate() const {
    if (K < 0) throw std::invalid_argument("plan: K must be >= 0");
    if (static_cast<int>(grid_levels.size()) != K + 1)
        throw std::invalid_argument("plan: need one grid level per spatial level");
    for (int k = 1; k <= K; ++k)
        if (grid_levels[k] > grid_levels[k - 1])
            throw std::invalid_argument(
                "plan: grid levels must be non-increasing towards finer meshes");
    if (!sample_counts.empty() && sample_counts.size() != grid_levels.size())
        throw std::invalid_argument("plan: sample counts and grid levels disagree");
}

double CostModel::level_cost(const MeshHierarchy& mesh, int level) const {
    return C_c * std::pow(mesh.width(level), -gamma);
}

std::string EstimateReport::to_json() const {
    nlohmann::json j;
    j["method"] = method;
    j["value"] = value;
    j["total_model_cost"] = total_model_cost;
    j["total_solve_count"] = total_solve_count;
    j["wall_seconds"] = wall_seconds;
    if (relative_error) j["relative_error"] = *relative_error;
    j["seed"] = seed;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : per_level)
        rows.push_back({{"k_begin", row.k_begin},
                        {"k_end", row.k_end},
                        {"grid_level", row.grid_level},
                        {"points", row.points},
                        {"contribution", row.contribution},
                        {"model_cost", row.model_cost},
                        {"solves", row.solves}});
    j["per_level"] = std::move(rows);
    return j.dump();
}

double sparse_quadrature(const SampleSource& source, const SparseGridDesign& design,
                         int mesh_level, int workers, long long* solve_count) {
    const int M = design.point_count;
    std::vector<double> terms(M);
    parallel_for(M, workers, [&](long long m) {
        terms[m] = design.quad_weights[m] * source.eval(design.point(static_cast<int>(m)),
                                                        mesh_level);
    });
    if (solve_count) *solve_count += M;
    return pairwise_sum(terms);
}

EstimateReport slsc_estimate(const SampleSource& source, const Problem& problem, int mesh_level,
                             int grid_level, const CostModel& cost, int workers) {
    const auto start = Clock::now();
    EstimateReport report;
    report.method = "slsc";
    auto design = problem.design(grid_level);
    long long solves = 0;
    report.value = sparse_quadrature(source, *design, mesh_level, workers, &solves);
    report.quadratures[{grid_level, mesh_level}] = report.value;
    LevelContribution row;
    row.k_begin = row.k_end = mesh_level;
    row.grid_level = grid_level;
    row.points = design->point_count;
    row.contribution = report.value;
    row.model_cost = design->point_count * cost.level_cost(problem.hierarchy(), mesh_level);
    row.solves = solves;
    report.per_level.push_back(row);
    report.total_model_cost = row.model_cost;
    report.total_solve_count = solves;
    report.wall_seconds = elapsed_seconds(start);
    return report;
}

EstimateReport slsc_estimate(const Problem& problem, int mesh_level, int grid_level,
                             const Functional& psi, int workers) {
    CostModel cost{1.0, double(problem.spatial_dim())};
    return slsc_estimate(make_sample_source(problem, psi), problem, mesh_level, grid_level, cost,
                         workers);
}

EstimateReport mlsc_estimate(const SampleSource& source, const Problem& problem,
                             const LevelPlan& plan, const CostModel& cost,
                             bool group_cancellations, int workers) {
    plan.validate();
    const auto start = Clock::now();
    EstimateReport report;
    report.method = "mlsc";

    // Ungrouped Eq-style model cost: every level pays its own grid.
    for (int k = 0; k <= plan.K; ++k) {
        const auto design = problem.design(plan.grid_levels[k]);
        report.total_model_cost +=
            design->point_count * cost.level_cost(problem.hierarchy(), k);
    }

    std::vector<double> contributions;
    auto add_group = [&](int a, int b) {
        const int level = plan.grid_levels[a];
        const auto design = problem.design(level);
        long long solves = 0;
        double q_fine = sparse_quadrature(source, *design, b, workers, &solves);
        report.quadratures[{level, b}] = q_fine;
        double q_coarse = 0.0;
        if (a > 0) {
            q_coarse = sparse_quadrature(source, *design, a - 1, workers, &solves);
            report.quadratures[{level, a - 1}] = q_coarse;
        }
        LevelContribution row;
        row.k_begin = a;
        row.k_end = b;
        row.grid_level = level;
        row.points = design->point_count;
        row.contribution = q_fine - q_coarse;
        for (int k = a; k <= b; ++k)
            row.model_cost += design->point_count * cost.level_cost(problem.hierarchy(), k);
        row.solves = solves;
        report.per_level.push_back(row);
        report.total_solve_count += solves;
        contributions.push_back(row.contribution);
    };

    if (group_cancellations) {
        int a = 0;
        for (int k = 1; k <= plan.K + 1; ++k) {
            if (k == plan.K + 1 || plan.grid_levels[k] != plan.grid_levels[a]) {
                add_group(a, k - 1);
                a = k;
            }
        }
    } else {
        for (int k = 0; k <= plan.K; ++k) add_group(k, k);
    }

    report.value = pairwise_sum(contributions);
    report.wall_seconds = elapsed_seconds(start);
    return report;
}

EstimateReport mlsc_estimate(const Problem& problem, const LevelPlan& plan,
                             const Functional& psi, bool group_cancellations, int workers) {
    CostModel cost{1.0, double(problem.spatial_dim())};
    return mlsc_estimate(make_sample_source(problem, psi), problem, plan, cost,
                         group_cancellations, workers);
}

EstimateReport mc_estimate(const SampleSource& source, const Problem& problem, int mesh_level,
                           long long samples, std::uint64_t seed, const CostModel& cost,
                           int workers) {
    if (samples < 1) throw std::invalid_argument("mc: need at least one sample");
    const auto start = Clock::now();
    const int N = source.dimension;
    std::vector<double> terms(samples);
    parallel_for(samples, workers, [&](long long i) {
        UniformStream stream(seed, static_cast<std::uint64_t>(mesh_level), i);
        std::vector<double> y(N);
        stream.fill(y);
        terms[i] = source.eval(y, mesh_level);
    });
    EstimateReport report;
    report.method = "mc";
    report.seed = seed;
    report.value = pairwise_sum(terms) / double(samples);
    LevelContribution row;
    row.k_begin = row.k_end = mesh_level;
    row.grid_level = -1;
    row.points = samples;
    row.contribution = report.value;
    row.model_cost = samples * cost.level_cost(problem.hierarchy(), mesh_level);
    row.solves = samples;
    report.per_level.push_back(row);
    report.total_model_cost = row.model_cost;
    report.total_solve_count = samples;
    report.wall_seconds = elapsed_seconds(start);
    return report;
}

EstimateReport mc_estimate(const Problem& problem, int mesh_level, long long samples,
                           std::uint64_t seed, const Functional& psi, int workers) {
    CostModel cost{1.0, double(problem.spatial_dim())};
    return mc_estimate(make_sample_source(problem, psi), problem, mesh_level, samples, seed, cost,
                       workers);
}

namespace {

// Sample mean and unbiased variance of psi(u_k) - psi(u_{k-1}).
struct LevelStats {
    double mean = 0.0;
    double variance = 0.0;
};

LevelStats mc_level_stats(const SampleSource& source, int k, long long count,
                          std::uint64_t seed, int workers, std::vector<double>* keep = nullptr) {
    const int N = source.dimension;
    std::vector<double> diffs(count);
    parallel_for(count, workers, [&](long long i) {
        UniformStream stream(seed, static_cast<std::uint64_t>(k), i);
        std::vector<double> y(N);
        stream.fill(y);
        double v = source.eval(y, k);
        if (k > 0) v -= source.eval(y, k - 1);
        diffs[i] = v;
    });
    LevelStats stats;
    stats.mean = pairwise_sum(diffs) / double(count);
    if (count > 1) {
        std::vector<double> sq(count);
        for (long long i = 0; i < count; ++i) {
            const double d = diffs[i] - stats.mean;
            sq[i] = d * d;
        }
        stats.variance = pairwise_sum(sq) / double(count - 1);
    }
    if (keep) *keep = std::move(diffs);
    return stats;
}

}  // namespace

EstimateReport mlmc_estimate(const SampleSource& source, const Problem& problem,
                             int finest_level, const std::vector<long long>& samples_per_level,
                             std::uint64_t seed, const CostModel& cost, int workers) {
    if (static_cast<int>(samples_per_level.size()) != finest_level + 1)
        throw std::invalid_argument("mlmc: need one sample count per level");
    const auto start = Clock::now();
    EstimateReport report;
    report.method = "mlmc";
    report.seed = seed;
    std::vector<double> contributions;
    for (int k = 0; k <= finest_level; ++k) {
        const long long M = samples_per_level[k];
        if (M < 1) throw std::invalid_argument("mlmc: sample counts must be positive");
        const LevelStats stats = mc_level_stats(source, k, M, seed, workers);
        LevelContribution row;
        row.k_begin = row.k_end = k;
        row.grid_level = -1;
        row.points = M;
        row.contribution = stats.mean;
        row.model_cost = M * cost.level_cost(problem.hierarchy(), k);
        row.solves = (k == 0) ? M : 2 * M;
        report.per_level.push_back(row);
        report.total_model_cost += row.model_cost;
        report.total_solve_count += row.solves;
        contributions.push_back(stats.mean);
    }
    report.value = pairwise_sum(contributions);
    report.wall_seconds = elapsed_seconds(start);
    return report;
}

EstimateReport mlmc_estimate_target(const SampleSource& source, const Problem& problem,
                                    int finest_level, double target_eps, std::uint64_t seed,
                                    const CostModel& cost, int pilot_samples, int workers) {
    if (!(target_eps > 0.0)) throw std::invalid_argument("mlmc: target accuracy must be positive");
    if (pilot_samples < 2)
        throw std::invalid_argument("mlmc: pilot variance estimation needs at least 2 samples");
    std::vector<double> variances(finest_level + 1);
    std::vector<double> costs(finest_level + 1);
    for (int k = 0; k <= finest_level; ++k) {
        variances[k] = mc_level_stats(source, k, pilot_samples, seed, workers).variance;
        costs[k] = cost.level_cost(problem.hierarchy(), k);
    }
    double lagrange = 0.0;
    for (int k = 0; k <= finest_level; ++k)
        lagrange += std::sqrt(variances[k] * costs[k]);
    std::vector<long long> counts(finest_level + 1);
    for (int k = 0; k <= finest_level; ++k) {
        const double raw =
            2.0 / (target_eps * target_eps) * std::sqrt(variances[k] / costs[k]) * lagrange;
        counts[k] = std::max<long long>(pilot_samples, static_cast<long long>(std::ceil(raw)));
    }
    return mlmc_estimate(source, problem, finest_level, counts, seed, cost, workers);
}

double reference_value(const Problem& problem, int ref_mesh_level, int ref_grid_level,
                       const Functional& psi, const std::string& cache_dir, int workers) {
    const std::string fp = problem.fingerprint(psi) + ":ref_h_level=" +
                           std::to_string(ref_mesh_level) +
                           ":ref_grid_level=" + std::to_string(ref_grid_level);
    std::filesystem::path dir(cache_dir);
    std::filesystem::path file;
    if (!cache_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof(name), "ref_%016llx.json",
                      static_cast<unsigned long long>(fnv1a(fp)));
        file = dir / name;
        if (std::filesystem::exists(file)) {
            std::ifstream in(file);
            nlohmann::json j;
            in >> j;
            if (j.at("fingerprint").get<std::string>() == fp)
                return j.at("value").get<double>();
        }
    }
    const EstimateReport report =
        slsc_estimate(problem, ref_mesh_level, ref_grid_level, psi, workers);
    if (!cache_dir.empty()) {
        std::filesystem::create_directories(dir);
        nlohmann::json j;
        j["fingerprint"] = fp;
        j["value"] = report.value;
        j["points"] = report.per_level.front().points;
        j["mesh_level"] = ref_mesh_level;
        j["grid_level"] = ref_grid_level;
        std::ofstream out(file);
        out << j.dump(2) << "\n";
    }
    return report.value;
}

NestedQuadrature::NestedQuadrature(const Problem& problem, const Functional& psi,
                                   int top_grid_level, int workers)
    : problem_(problem), psi_(psi), top_level_(top_grid_level), workers_(workers) {
    top_design_ = problem.design(top_grid_level);
}

const std::vector<double>& NestedQuadrature::samples(int mesh_level) {
    auto it = samples_by_mesh_.find(mesh_level);
    if (it != samples_by_mesh_.end()) return it->second;
    const SampleSource source = make_sample_source(problem_, psi_);
    std::vector<double> vals(top_design_->point_count);
    parallel_for(top_design_->point_count, workers_, [&](long long m) {
        vals[m] = source.eval(top_design_->point(static_cast<int>(m)), mesh_level);
    });
    solves_ += top_design_->point_count;
    return samples_by_mesh_.emplace(mesh_level, std::move(vals)).first->second;
}

const std::vector<int>& NestedQuadrature::ids(int grid_level) {
    auto it = ids_by_level_.find(grid_level);
    if (it != ids_by_level_.end()) return it->second;
    if (grid_level > top_level_)
        throw std::invalid_argument("grid level above the precomputed top level");
    const auto sub = problem_.design(grid_level);
    const int N = sub->dimension();
    std::unordered_map<std::string, int> top_ids;
    std::string key(static_cast<size_t>(N) * sizeof(double), '\0');
    for (int m = 0; m < top_design_->point_count; ++m) {
        std::memcpy(key.data(), top_design_->point(m).data(), key.size());
        top_ids.emplace(key, m);
    }
    std::vector<int> map(sub->point_count);
    for (int m = 0; m < sub->point_count; ++m) {
        std::memcpy(key.data(), sub->point(m).data(), key.size());
        auto found = top_ids.find(key);
        if (found == top_ids.end())
            throw std::runtime_error("sub-design point missing from the top design");
        map[m] = found->second;
    }
    return ids_by_level_.emplace(grid_level, std::move(map)).first->second;
}

double NestedQuadrature::value(int grid_level, int mesh_level) {
    const auto& vals = samples(mesh_level);
    const auto& map = ids(grid_level);
    const auto sub = problem_.design(grid_level);
    std::vector<double> terms(sub->point_count);
    for (int m = 0; m < sub->point_count; ++m)
        terms[m] = sub->quad_weights[m] * vals[map[m]];
    return pairwise_sum(terms);
}

}  // namespace mlsc
