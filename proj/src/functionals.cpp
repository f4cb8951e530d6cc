#include "mlsc/functionals.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mlsc {

Functional Functional::point_value_1d(double x) {
    Functional f;
    f.kind = Kind::PointValue;
    f.x1 = x;
    return f;
}

Functional Functional::point_value_2d(double x, double y) {
    Functional f;
    f.kind = Kind::PointValue;
    f.x1 = x;
    f.x2 = y;
    return f;
}

Functional Functional::local_average_1d(double ref_width, double x) {
    Functional f;
    f.kind = Kind::LocalAverage;
    f.ref_width = ref_width;
    f.x1 = x;
    return f;
}

Functional Functional::local_average_2d(double ref_width, double x, double y) {
    Functional f;
    f.kind = Kind::LocalAverage;
    f.ref_width = ref_width;
    f.x1 = x;
    f.x2 = y;
    return f;
}

Functional Functional::l2_norm_squared() {
    Functional f;
    f.kind = Kind::L2NormSquared;
    return f;
}

Functional Functional::l2_norm() {
    Functional f;
    f.kind = Kind::L2Norm;
    return f;
}

Functional Functional::power_of(const Functional& linear_inner, int q) {
    if (!linear_inner.is_linear())
        throw std::invalid_argument("power functional needs a linear inner functional");
    if (q < 1) throw std::invalid_argument("power must be >= 1");
    Functional f = linear_inner;
    f.inner_kind = linear_inner.kind;
    f.kind = Kind::PowerOfLinear;
    f.power = q;
    return f;
}

std::string Functional::fingerprint() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::PointValue: os << "point:" << x1 << "," << x2; break;
        case Kind::LocalAverage: os << "avg:" << ref_width << ":" << x1 << "," << x2; break;
        case Kind::L2NormSquared: os << "l2sq"; break;
        case Kind::L2Norm: os << "l2"; break;
        case Kind::PowerOfLinear:
            os << "pow" << power << ":" << (inner_kind == Kind::PointValue ? "point" : "avg")
               << ":" << ref_width << ":" << x1 << "," << x2;
            break;
    }
    return os.str();
}

namespace {

// Integer ratio between two dyadic mesh widths; throws if incompatible.
long long width_ratio(double coarse, double fine) {
    const double r = coarse / fine;
    const long long n = std::llround(r);
    if (n < 1 || std::abs(r - double(n)) > 1e-9 * r)
        throw std::invalid_argument("reference width does not divide the mesh width");
    return n;
}

double local_average_1d_eval(const FemSolution& sol, const Functional& psi) {
    const double w = psi.ref_width;
    if (!(w > 0.0)) throw std::invalid_argument("reference width must be positive");
    // integration resolution: the finer of solution mesh and reference mesh
    const double hq = std::min(sol.h, w);
    if (sol.h >= w)
        width_ratio(sol.h, w);
    else
        width_ratio(w, sol.h);
    const long long cells = 2 * std::llround(w / hq);
    const double x0 = psi.x1 - w;
    double integral = 0.0;
    for (long long c = 0; c < cells; ++c) {
        const double a = x0 + c * hq;
        const double b = a + hq;
        integral += 0.5 * hq * (sol.eval(a) + sol.eval(b));
    }
    return integral / (2.0 * w);
}

double local_average_2d_eval(const FemSolution& sol, const Functional& psi) {
    const double w = psi.ref_width;
    if (!(w > 0.0)) throw std::invalid_argument("reference width must be positive");
    if (sol.h >= w)
        width_ratio(sol.h, w);
    else
        width_ratio(w, sol.h);
    const double hq = std::min(sol.h, w);
    const long long sub = std::llround(w / hq);  // sub-cells per reference cell

    // Patch D*: {|qx|<=1, |qy|<=1, |qx-qy|<=1} in units of w around the node.
    double integral = 0.0;
    const double tri_area = 0.5 * hq * hq;
    for (long long ci = -sub; ci < sub; ++ci) {
        for (long long cj = -sub; cj < sub; ++cj) {
            const double x0 = psi.x1 + ci * hq;
            const double y0 = psi.x2 + cj * hq;
            // two triangles per cell; centroid membership decides inclusion
            const double cx[2] = {x0 + 2.0 * hq / 3.0, x0 + hq / 3.0};
            const double cy[2] = {y0 + hq / 3.0, y0 + 2.0 * hq / 3.0};
            for (int tri = 0; tri < 2; ++tri) {
                const double qx = (cx[tri] - psi.x1) / w;
                const double qy = (cy[tri] - psi.x2) / w;
                if (std::abs(qx) > 1.0 || std::abs(qy) > 1.0 || std::abs(qx - qy) > 1.0)
                    continue;
                double vx[3], vy[3];
                if (tri == 0) {
                    vx[0] = x0; vy[0] = y0;
                    vx[1] = x0 + hq; vy[1] = y0;
                    vx[2] = x0 + hq; vy[2] = y0 + hq;
                } else {
                    vx[0] = x0; vy[0] = y0;
                    vx[1] = x0 + hq; vy[1] = y0 + hq;
                    vx[2] = x0; vy[2] = y0 + hq;
                }
                double s = 0.0;
                for (int v = 0; v < 3; ++v) s += sol.eval(vx[v], vy[v]);
                integral += tri_area * s / 3.0;
            }
        }
    }
    return integral / (3.0 * w * w);  // |D*| = 6 * w^2 / 2
}

double l2_norm_squared_eval(const FemSolution& sol) {
    if (sol.spatial_dim == 1) {
        const int n = static_cast<int>(sol.nodal.size()) + 1;
        const double h = 1.0 / n;
        double s = 0.0;
        for (int e = 0; e < n; ++e) {
            const double a = (e == 0) ? 0.0 : sol.nodal[e - 1];
            const double b = (e == n - 1) ? 0.0 : sol.nodal[e];
            s += h * (a * a + a * b + b * b) / 3.0;
        }
        return s;
    }
    const int m = static_cast<int>(std::llround(std::sqrt(double(sol.nodal.size()))));
    const int n = m + 1;
    const double h = 1.0 / n;
    auto node = [&](int i, int j) -> double {
        if (i <= 0 || i >= n || j <= 0 || j >= n) return 0.0;
        return sol.nodal[static_cast<size_t>(i - 1) * (n - 1) + (j - 1)];
    };
    const double area = 0.5 * h * h;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double bl = node(i, j), br = node(i + 1, j);
            const double tr = node(i + 1, j + 1), tl = node(i, j + 1);
            // lower (bl, br, tr) and upper (bl, tr, tl) mass contributions
            s += area / 6.0 *
                 (bl * bl + br * br + tr * tr + bl * br + br * tr + tr * bl);
            s += area / 6.0 *
                 (bl * bl + tr * tr + tl * tl + bl * tr + tr * tl + tl * bl);
        }
    }
    return s;
}

}  // namespace

double functional_eval(const FemSolution& sol, const Functional& psi) {
    switch (psi.kind) {
        case Functional::Kind::PointValue:
            return (sol.spatial_dim == 1) ? sol.eval(psi.x1) : sol.eval(psi.x1, psi.x2);
        case Functional::Kind::LocalAverage:
            return (sol.spatial_dim == 1) ? local_average_1d_eval(sol, psi)
                                          : local_average_2d_eval(sol, psi);
        case Functional::Kind::L2NormSquared:
            return l2_norm_squared_eval(sol);
        case Functional::Kind::L2Norm:
            return std::sqrt(l2_norm_squared_eval(sol));
        case Functional::Kind::PowerOfLinear: {
            Functional inner = psi;
            inner.kind = psi.inner_kind;
            return std::pow(functional_eval(sol, inner), psi.power);
        }
    }
    throw std::logic_error("unknown functional kind");
}

double level_difference_sample(const FemSolver& solver, std::span<const double> y, int k,
                               const Functional& psi) {
    if (k < 0) throw std::invalid_argument("level must be >= 0");
    const double fine = functional_eval(solver.solve(y, k), psi);
    if (k == 0) return fine;  // psi(0) = 0
    return fine - functional_eval(solver.solve(y, k - 1), psi);
}

}  // namespace mlsc
