#include "mlsc/fem.hpp"

#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>

namespace mlsc {

double MeshHierarchy::width(int level) const {
    if (level < 0) throw std::invalid_argument("mesh level must be >= 0");
    return h0 * std::pow(double(eta), -level);
}

int MeshHierarchy::cells_per_side(int level) const {
    const double n = 1.0 / width(level);
    const long long rounded = std::llround(n);
    if (std::abs(n - double(rounded)) > 1e-9)
        throw std::invalid_argument("1/h is not an integer at this level");
    return static_cast<int>(rounded);
}

MeshHierarchy make_hierarchy(int spatial_dim, double h0, int eta) {
    if (spatial_dim != 1 && spatial_dim != 2)
        throw std::invalid_argument("spatial dimension must be 1 or 2");
    if (eta < 2) throw std::invalid_argument("refinement ratio eta must be >= 2");
    if (!(h0 > 0.0 && h0 < 1.0)) throw std::invalid_argument("h0 must lie in (0,1)");
    MeshHierarchy h{spatial_dim, h0, eta};
    h.cells_per_side(0);  // validates 1/h0
    return h;
}

double FemSolution::eval(double x) const {
    if (spatial_dim != 1) throw std::invalid_argument("solution is not one-dimensional");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("point outside the closed domain");
    const int n = static_cast<int>(nodal.size()) + 1;
    const double t = x * n;
    int e = std::min(static_cast<int>(t), n - 1);
    const double local = t - e;
    const double left = (e == 0) ? 0.0 : nodal[e - 1];
    const double right = (e == n - 1) ? 0.0 : nodal[e];
    return left * (1.0 - local) + right * local;
}

double FemSolution::eval(double x, double y) const {
    if (spatial_dim != 2) throw std::invalid_argument("solution is not two-dimensional");
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
        throw std::invalid_argument("point outside the closed domain");
    const int m = static_cast<int>(std::llround(std::sqrt(double(nodal.size()))));
    const int n = m + 1;  // cells per side
    auto node = [&](int i, int j) -> double {
        if (i <= 0 || i >= n || j <= 0 || j >= n) return 0.0;
        return nodal[static_cast<size_t>(i - 1) * (n - 1) + (j - 1)];
    };
    const double tx = x * n;
    const double ty = y * n;
    int ci = std::min(static_cast<int>(tx), n - 1);
    int cj = std::min(static_cast<int>(ty), n - 1);
    const double lx = tx - ci;
    const double ly = ty - cj;
    // Cell split bottom-left to top-right: lower triangle has ly <= lx.
    if (ly <= lx) {
        // vertices (ci,cj), (ci+1,cj), (ci+1,cj+1)
        return node(ci, cj) * (1.0 - lx) + node(ci + 1, cj) * (lx - ly) +
               node(ci + 1, cj + 1) * ly;
    }
    // vertices (ci,cj), (ci+1,cj+1), (ci,cj+1)
    return node(ci, cj) * (1.0 - ly) + node(ci + 1, cj + 1) * lx +
           node(ci, cj + 1) * (ly - lx);
}

// Coefficient tables: scaled KL basis values at the element quadrature
// points, so per-sample coefficient evaluation is one dot product + exp.
struct FemSolver::LevelTables {
    int cells = 0;
    // 1D: [elem][n] ; 2D: [triangle][n], triangles ordered cell-major,
    // lower triangle first.  Empty for constant coefficients.
    std::vector<double> basis;  // row-major, rows = quad points, cols = N
    int num_rows = 0;
};

FemSolver::FemSolver(CoefficientField coefficient, MeshHierarchy hierarchy)
    : coefficient_(std::move(coefficient)), hierarchy_(hierarchy) {
    if (coefficient_.spatial_dim != hierarchy_.spatial_dim)
        throw std::invalid_argument("coefficient and mesh dimension mismatch");
    tables_mutex_ = std::make_shared<std::mutex>();
}

FemSolver::~FemSolver() = default;

const FemSolver::LevelTables& FemSolver::tables(int level) const {
    auto* mtx = static_cast<std::mutex*>(tables_mutex_.get());
    std::lock_guard<std::mutex> lock(*mtx);
    if (static_cast<int>(tables_.size()) <= level) tables_.resize(level + 1);
    if (!tables_[level]) {
        auto t = std::make_shared<LevelTables>();
        t->cells = hierarchy_.cells_per_side(level);
        const int N = coefficient_.dimension;
        const double h = hierarchy_.width(level);
        if (coefficient_.depends_on_parameters()) {
            if (hierarchy_.spatial_dim == 1) {
                t->num_rows = t->cells;
                t->basis.resize(static_cast<size_t>(t->num_rows) * N);
                for (int e = 0; e < t->cells; ++e) {
                    const double xm = (e + 0.5) * h;
                    for (int n = 0; n < N; ++n)
                        t->basis[static_cast<size_t>(e) * N + n] =
                            coefficient_.scaled_basis(n, xm);
                }
            } else {
                t->num_rows = 2 * t->cells * t->cells;
                t->basis.resize(static_cast<size_t>(t->num_rows) * N);
                int row = 0;
                for (int i = 0; i < t->cells; ++i) {
                    for (int j = 0; j < t->cells; ++j) {
                        const double x0 = i * h, y0 = j * h;
                        const double cx[2] = {x0 + 2.0 * h / 3.0, x0 + h / 3.0};
                        const double cy[2] = {y0 + h / 3.0, y0 + 2.0 * h / 3.0};
                        for (int tri = 0; tri < 2; ++tri, ++row)
                            for (int n = 0; n < N; ++n)
                                t->basis[static_cast<size_t>(row) * N + n] =
                                    coefficient_.scaled_basis(n, cx[tri], cy[tri]);
                    }
                }
            }
        }
        tables_[level] = std::move(t);
    }
    return *tables_[level];
}

namespace {

// Coefficient value at quadrature-point row.
inline double coeff_at(const CoefficientField& field, const std::vector<double>& basis,
                       int row, std::span<const double> y) {
    if (!field.depends_on_parameters()) return field.constant_value;
    const int N = field.dimension;
    const double* b = basis.data() + static_cast<size_t>(row) * N;
    double s = 0.0;
    for (int n = 0; n < N; ++n) s += b[n] * y[n];
    return field.base_shift + std::exp(s);
}

FemSolution solve_1d(const CoefficientField& field, const MeshHierarchy& mesh, int cells,
                     std::span<const double> y, int level, double forcing,
                     const std::vector<double>& basis) {
    const int n = cells;
    const double h = mesh.width(level);
    const int m = n - 1;  // interior nodes

    std::vector<double> a(n);  // elementwise coefficient (midpoint rule)
    for (int e = 0; e < n; ++e) {
        a[e] = coeff_at(field, basis, e, y);
        if (!(a[e] > 0.0)) throw std::runtime_error("sampled coefficient is not positive");
    }

    // Tridiagonal system; Thomas algorithm.
    std::vector<double> diag(m), lower(m, 0.0), upper(m, 0.0), rhs(m, forcing * h);
    for (int i = 0; i < m; ++i) {
        diag[i] = (a[i] + a[i + 1]) / h;
        if (i + 1 < m) upper[i] = -a[i + 1] / h;
        if (i > 0) lower[i] = -a[i] / h;
    }
    std::vector<double> cp(m), dp(m);
    cp[0] = upper[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for (int i = 1; i < m; ++i) {
        const double denom = diag[i] - lower[i] * cp[i - 1];
        cp[i] = (i + 1 < m) ? upper[i] / denom : 0.0;
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom;
    }
    FemSolution sol;
    sol.spatial_dim = 1;
    sol.level = level;
    sol.h = h;
    sol.nodal.resize(m);
    sol.nodal[m - 1] = dp[m - 1];
    for (int i = m - 2; i >= 0; --i) sol.nodal[i] = dp[i] - cp[i] * sol.nodal[i + 1];

    // Residual check.
    double rnorm = 0.0, bnorm = 0.0;
    for (int i = 0; i < m; ++i) {
        double r = diag[i] * sol.nodal[i] - rhs[i];
        if (i > 0) r += lower[i] * sol.nodal[i - 1];
        if (i + 1 < m) r += upper[i] * sol.nodal[i + 1];
        rnorm += r * r;
        bnorm += rhs[i] * rhs[i];
    }
    if (bnorm > 0.0 && std::sqrt(rnorm) > 1e-12 * std::sqrt(bnorm) + 1e-300)
        throw std::runtime_error("1D solve residual too large");
    return sol;
}

FemSolution solve_2d(const CoefficientField& field, const MeshHierarchy& mesh, int cells,
                     std::span<const double> y, int level, double forcing,
                     const std::vector<double>& basis) {
    const int n = cells;
    const double h = mesh.width(level);
    const int side = n - 1;
    const int m = side * side;
    auto dof = [&](int i, int j) -> int {
        if (i <= 0 || i >= n || j <= 0 || j >= n) return -1;
        return (i - 1) * side + (j - 1);
    };

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(m) * 7);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);

    // Reference stiffness (unit coefficient) of the two triangles, vertex
    // order lower: BL, BR, TR; upper: BL, TR, TL.
    const double lowerK[3][3] = {{0.5, -0.5, 0.0}, {-0.5, 1.0, -0.5}, {0.0, -0.5, 0.5}};
    const double upperK[3][3] = {{0.5, 0.0, -0.5}, {0.0, 0.5, -0.5}, {-0.5, -0.5, 1.0}};
    const double load = forcing * h * h / 6.0;  // |T|/3 per vertex

    int row = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int lower_v[3] = {dof(i, j), dof(i + 1, j), dof(i + 1, j + 1)};
            const int upper_v[3] = {dof(i, j), dof(i + 1, j + 1), dof(i, j + 1)};
            for (int tri = 0; tri < 2; ++tri, ++row) {
                const double a = coeff_at(field, basis, row, y);
                if (!(a > 0.0))
                    throw std::runtime_error("sampled coefficient is not positive");
                const int* v = (tri == 0) ? lower_v : upper_v;
                const auto& K = (tri == 0) ? lowerK : upperK;
                for (int p = 0; p < 3; ++p) {
                    if (v[p] < 0) continue;
                    rhs[v[p]] += load;
                    for (int q = 0; q < 3; ++q) {
                        if (v[q] < 0) continue;
                        trips.emplace_back(v[p], v[q], a * K[p][q]);
                    }
                }
            }
        }
    }

    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("2D factorization failed");
    Eigen::VectorXd u = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("2D solve failed");
    const double rel = (A * u - rhs).norm() / (rhs.norm() + 1e-300);
    if (rel > 1e-10) throw std::runtime_error("2D solve residual too large");

    FemSolution sol;
    sol.spatial_dim = 2;
    sol.level = level;
    sol.h = h;
    sol.nodal.assign(u.data(), u.data() + m);
    return sol;
}

}  // namespace

FemSolution FemSolver::solve(std::span<const double> y, int level, double forcing) const {
    if (coefficient_.depends_on_parameters() &&
        static_cast<int>(y.size()) != coefficient_.dimension)
        throw std::invalid_argument("parameter dimension mismatch");
    for (double v : y)
        if (!(v >= -1.0 && v <= 1.0))
            throw std::invalid_argument("parameter outside [-1,1]^N");
    const LevelTables& t = tables(level);
    if (hierarchy_.spatial_dim == 1)
        return solve_1d(coefficient_, hierarchy_, t.cells, y, level, forcing, t.basis);
    return solve_2d(coefficient_, hierarchy_, t.cells, y, level, forcing, t.basis);
}

FemSolution assemble_solve(const CoefficientField& coefficient, const MeshHierarchy& hierarchy,
                           std::span<const double> y, int level, double forcing) {
    FemSolver solver(coefficient, hierarchy);
    return solver.solve(y, level, forcing);
}

void dump_solution(const FemSolution& sol, const std::string& csv_path,
                   const std::string& sidecar_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open " + csv_path);
    csv.precision(17);
    for (double v : sol.nodal) csv << v << "\n";
    nlohmann::json side;
    side["d"] = sol.spatial_dim;
    side["h"] = sol.h;
    side["ordering"] = "lexicographic by (x, y)";
    std::ofstream sc(sidecar_path);
    if (!sc) throw std::runtime_error("cannot open " + sidecar_path);
    sc << side.dump(2) << "\n";
}

}  // namespace mlsc
