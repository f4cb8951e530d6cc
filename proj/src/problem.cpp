#include "mlsc/problem.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace mlsc {

struct Problem::DesignCache {
    std::mutex mutex;
    std::map<int, std::shared_ptr<const SparseGridDesign>> by_level;
};

Problem::Problem(CoefficientField coefficient, MeshHierarchy hierarchy, GridKind grid_kind,
                 std::vector<double> grid_weights)
    : solver_(std::make_shared<FemSolver>(std::move(coefficient), hierarchy)),
      grid_kind_(grid_kind),
      grid_weights_(std::move(grid_weights)),
      cache_(std::make_shared<DesignCache>()) {}

std::shared_ptr<const SparseGridDesign> Problem::design(int level) const {
    {
        std::lock_guard lock(cache_->mutex);
        auto it = cache_->by_level.find(level);
        if (it != cache_->by_level.end()) return it->second;
    }
    auto d = build_design(grid_kind_, dimension(), level, grid_weights_);
    std::lock_guard lock(cache_->mutex);
    return cache_->by_level.try_emplace(level, std::move(d)).first->second;
}

std::vector<long long> Problem::grid_sizes(int max_level) const {
    std::vector<long long> sizes;
    sizes.reserve(max_level + 1);
    for (int l = 0; l <= max_level; ++l)
        sizes.push_back(design_point_count(grid_kind_, dimension(), l, grid_weights_));
    return sizes;
}

std::string Problem::fingerprint(const Functional& psi) const {
    std::ostringstream os;
    os.precision(17);
    os << "d" << spatial_dim() << ":N" << dimension() << ":h0=" << hierarchy().h0
       << ":eta=" << hierarchy().eta << ":" << solver_->coefficient().fingerprint() << ":grid="
       << to_string(grid_kind_);
    for (double w : grid_weights_) os << "," << w;
    os << ":psi=" << psi.fingerprint();
    return os.str();
}

SampleSource make_sample_source(const Problem& problem, const Functional& psi) {
    SampleSource src;
    src.dimension = problem.dimension();
    const FemSolver* solver = &problem.solver();
    Functional functional = psi;
    src.eval = [solver, functional](std::span<const double> y, int mesh_level) {
        return functional_eval(solver->solve(y, mesh_level), functional);
    };
    return src;
}

}  // namespace mlsc
