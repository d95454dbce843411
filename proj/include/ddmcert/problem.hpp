#pragma once

// Elliptic model problem -div(A grad u) = f, u = u_g on the boundary, and its
// conforming P1 discretization.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ddmcert/linalg.hpp"
#include "ddmcert/mesh.hpp"
#include "ddmcert/quadrature.hpp"

namespace ddmcert {

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Vec2(const Point&)>;

struct ExactSolution {
    ScalarFunction u;
    VectorFunction grad_u;
};

class EllipticProblem {
public:
    EllipticProblem(Mat2 a, ScalarFunction f, ScalarFunction u_g, std::optional<ExactSolution> exact = std::nullopt)
        : a_(a), a_inv_(a.inverse()), f_(std::move(f)), u_g_(std::move(u_g)), exact_(std::move(exact)) {
        const auto ev = a_.eigenvalues();
        if (!(ev[0] > 0.0)) throw std::invalid_argument("EllipticProblem: A must be positive definite");
        c_min_ = ev[0];
        c_max_ = ev[1];
    }

    const Mat2& a() const { return a_; }
    const Mat2& a_inverse() const { return a_inv_; }
    double c_min() const { return c_min_; }
    double c_max() const { return c_max_; }
    double f(const Point& p) const { return f_(p); }
    double u_g(const Point& p) const { return u_g_(p); }
    const ScalarFunction& source() const { return f_; }
    bool has_exact() const { return exact_.has_value(); }
    const ExactSolution& exact() const {
        if (!exact_) throw std::logic_error("EllipticProblem: no exact solution available");
        return *exact_;
    }

private:
    Mat2 a_;
    Mat2 a_inv_;
    ScalarFunction f_;
    ScalarFunction u_g_;
    std::optional<ExactSolution> exact_;
    double c_min_ = 1.0;
    double c_max_ = 1.0;
};

/// A = I and u = (sin(pi x) sin(pi y) + (1 - cos(pi x))(1 - cos(pi y)) / 2) / pi^2
/// on the L-shaped domain.
inline EllipticProblem manufactured_lshape_problem() {
    auto u = [](const Point& p) {
        const double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
        const double cx = std::cos(pi * p.x), cy = std::cos(pi * p.y);
        return (sx * sy + 0.5 * (1.0 - cx) * (1.0 - cy)) / (pi * pi);
    };
    auto grad = [](const Point& p) {
        const double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
        const double cx = std::cos(pi * p.x), cy = std::cos(pi * p.y);
        return Vec2{(cx * sy + 0.5 * sx * (1.0 - cy)) / pi, (sx * cy + 0.5 * (1.0 - cx) * sy) / pi};
    };
    auto f = [](const Point& p) {
        const double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
        const double cx = std::cos(pi * p.x), cy = std::cos(pi * p.y);
        return 2.0 * sx * sy - 0.5 * (cx * (1.0 - cy) + (1.0 - cx) * cy);
    };
    return EllipticProblem(Mat2::identity(), f, u, ExactSolution{u, grad});
}

/// Continuous piecewise-linear field given by its nodal values.
struct ScalarFieldP1 {
    const TriMesh* mesh = nullptr;
    std::vector<double> values;

    ScalarFieldP1() = default;
    ScalarFieldP1(const TriMesh& m, double fill = 0.0)
        : mesh(&m), values(static_cast<std::size_t>(m.num_vertices()), fill) {}
    ScalarFieldP1(const TriMesh& m, std::vector<double> v) : mesh(&m), values(std::move(v)) {
        if (static_cast<Index>(values.size()) != m.num_vertices())
            throw std::invalid_argument("ScalarFieldP1: value count differs from vertex count");
    }

    static ScalarFieldP1 interpolate(const TriMesh& m, const ScalarFunction& fn) {
        ScalarFieldP1 s(m);
        for (Index v = 0; v < m.num_vertices(); ++v) s.values[v] = fn(m.vertex(v));
        return s;
    }

    /// Constant gradient on triangle t.
    Vec2 gradient(Index t) const {
        const auto g = p1_gradients(*mesh, t);
        const auto& tri = mesh->triangle(t);
        return values[tri[0]] * g[0] + values[tri[1]] * g[1] + values[tri[2]] * g[2];
    }

    double value(Index t, const std::array<double, 3>& bary) const {
        const auto& tri = mesh->triangle(t);
        return bary[0] * values[tri[0]] + bary[1] * values[tri[1]] + bary[2] * values[tri[2]];
    }

    /// Gradients of the three barycentric basis functions on triangle t.
    static std::array<Vec2, 3> p1_gradients(const TriMesh& m, Index t) {
        const auto c = m.corners(t);
        const double two_area = 2.0 * m.area(t);
        std::array<Vec2, 3> g;
        for (int i = 0; i < 3; ++i) {
            const Point& a = c[(i + 1) % 3];
            const Point& b = c[(i + 2) % 3];
            g[i] = Vec2{a.y - b.y, b.x - a.x} * (1.0 / two_area);
        }
        return g;
    }
};

/// Stiffness matrix of a(u, w) = int A grad u . grad w plus a load vector.
struct LinearSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
};

inline CsrMatrix assemble_stiffness(const TriMesh& mesh, const Mat2& a) {
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = ScalarFieldP1::p1_gradients(mesh, t);
        const auto& tri = mesh.triangle(t);
        const double area = mesh.area(t);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                const double kij = area * dot(a * g[i], g[j]);
                trips.push_back({tri[i], tri[j], kij});
                if (i != j) trips.push_back({tri[j], tri[i], kij});
            }
    }
    return CsrMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), std::move(trips));
}

/// Load vector int f phi_i with the edge-midpoint rule.
inline std::vector<double> assemble_load(const TriMesh& mesh, const ScalarFunction& f) {
    std::vector<double> b(static_cast<std::size_t>(mesh.num_vertices()), 0.0);
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto c = mesh.corners(t);
        const auto& tri = mesh.triangle(t);
        for (const auto& q : quadrature::midpoint3) {
            const double fq = f(quadrature::map(c, q.bary)) * q.weight * mesh.area(t);
            for (int i = 0; i < 3; ++i) b[tri[i]] += fq * q.bary[i];
        }
    }
    return b;
}

inline LinearSystem assemble_system(const TriMesh& mesh, const EllipticProblem& problem) {
    return {assemble_stiffness(mesh, problem.a()), assemble_load(mesh, problem.source())};
}

/// Dirichlet elimination for a fixed free-vertex set: keeps K_FF and K_FB so
/// repeated solves with different boundary data only rebuild the right-hand side.
class ConstrainedSolver {
public:
    ConstrainedSolver(const CsrMatrix& k, std::vector<Index> free, SpdSolveOptions opt = {})
        : free_(std::move(free)), opt_(opt) {
        std::vector<Index> all(static_cast<std::size_t>(k.cols()));
        for (Index i = 0; i < k.cols(); ++i) all[i] = i;
        kff_ = k.extract(free_, free_);
        kf_all_ = k.extract(free_, all);
    }

    const std::vector<Index>& free_dofs() const { return free_; }
    Index last_iterations() const { return last_iterations_; }

    /// Solves for the free entries of `u` in place; constrained entries of `u`
    /// supply the boundary data.
    void solve(std::span<const double> load, std::vector<double>& u) {
        const Index nf = static_cast<Index>(free_.size());
        if (nf == 0) return;
        std::vector<double> saved(static_cast<std::size_t>(nf));
        for (Index i = 0; i < nf; ++i) {
            saved[i] = u[free_[i]];
            u[free_[i]] = 0.0;
        }
        std::vector<double> rhs = kf_all_ * std::span<const double>(u);
        for (Index i = 0; i < nf; ++i) rhs[i] = load[free_[i]] - rhs[i];
        const SpdSolveResult r = spd_solve(kff_, rhs, opt_, saved);
        last_iterations_ = r.iterations;
        for (Index i = 0; i < nf; ++i) u[free_[i]] = r.x[i];
    }

private:
    std::vector<Index> free_;
    SpdSolveOptions opt_;
    CsrMatrix kff_;
    CsrMatrix kf_all_;
    Index last_iterations_ = 0;
};

/// Unique P1 field with the prescribed nodal boundary values minimizing the
/// discrete energy.
inline ScalarFieldP1 solve_dirichlet(const TriMesh& mesh, const LinearSystem& system,
                                     std::span<const Index> boundary_nodes, std::span<const double> boundary_values,
                                     SpdSolveOptions opt = {}) {
    if (boundary_nodes.size() != boundary_values.size())
        throw std::invalid_argument("solve_dirichlet: boundary node/value count mismatch");
    ScalarFieldP1 u(mesh);
    std::vector<bool> fixed(static_cast<std::size_t>(mesh.num_vertices()), false);
    for (std::size_t i = 0; i < boundary_nodes.size(); ++i) {
        fixed[boundary_nodes[i]] = true;
        u.values[boundary_nodes[i]] = boundary_values[i];
    }
    std::vector<Index> free;
    for (Index v = 0; v < mesh.num_vertices(); ++v)
        if (!fixed[v]) free.push_back(v);
    ConstrainedSolver solver(system.matrix, std::move(free), opt);
    solver.solve(system.rhs, u.values);
    return u;
}

inline std::vector<Index> boundary_vertices(const TriMesh& mesh) {
    std::vector<Index> b;
    for (Index v = 0; v < mesh.num_vertices(); ++v)
        if (mesh.is_boundary_vertex(v)) b.push_back(v);
    return b;
}

/// Global discrete solution with u_g interpolated at boundary vertices.
inline ScalarFieldP1 solve_global(const TriMesh& mesh, const EllipticProblem& problem, SpdSolveOptions opt = {}) {
    const LinearSystem sys = assemble_system(mesh, problem);
    const std::vector<Index> bnodes = boundary_vertices(mesh);
    std::vector<double> bvals;
    for (Index v : bnodes) bvals.push_back(problem.u_g(mesh.vertex(v)));
    return solve_dirichlet(mesh, sys, bnodes, bvals, opt);
}

/// || grad(u - v) ||_A over the mesh with the degree-5 rule.
inline double energy_error(const ScalarFieldP1& v, const EllipticProblem& problem) {
    if (!problem.has_exact()) throw std::logic_error("energy_error: problem has no exact solution");
    const TriMesh& mesh = *v.mesh;
    const auto& grad_u = problem.exact().grad_u;
    double sum = 0.0;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto c = mesh.corners(t);
        const Vec2 gv = v.gradient(t);
        double s = 0.0;
        for (const auto& q : quadrature::degree5) {
            const Vec2 e = grad_u(quadrature::map(c, q.bary)) - gv;
            s += q.weight * dot(problem.a() * e, e);
        }
        sum += s * mesh.area(t);
    }
    return std::sqrt(sum);
}

/// sqrt((x - y)^T K (x - y)) for nodal vectors.
inline double discrete_energy_distance(const CsrMatrix& k, std::span<const double> x, std::span<const double> y) {
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    const std::vector<double> kd = k * std::span<const double>(d);
    return std::sqrt(std::max(0.0, dot(d, kd)));
}

}  // namespace ddmcert
