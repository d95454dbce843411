#pragma once

// Guaranteed error majorant for broken fluxes on a decomposed domain, its
// constants, the closed-form epsilon weights, and the global baseline.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ddmcert/flux.hpp"
#include "ddmcert/mesh.hpp"
#include "ddmcert/problem.hpp"

namespace ddmcert {

/// Sharp constant of ||w||_gamma <= C ||grad w||_omega for mean-free w on a
/// side gamma of length h2 of a rectangle.
inline double poincare_edge_constant(double h2) {
    if (!(h2 > 0.0)) throw std::invalid_argument("poincare_edge_constant: h2 must be positive");
    const double a = pi / h2;
    return 1.0 / std::sqrt(a * std::tanh(a));
}

inline double beta(double cp_k, double cp_j) { return std::sqrt(0.5 * (cp_k * cp_k + cp_j * cp_j)); }

struct MajorantConstants {
    std::vector<double> cp;  ///< Poincare constant per basic subdomain
    double cp_max = 0.0;
    double c_min = 1.0;
    int e_max = 0;
    std::vector<double> beta;  ///< per interface, indexed like dd.interfaces()
    double c_f = 0.0;
};

namespace detail {

inline bool is_axis_rectangle(const std::vector<Point>& poly) {
    if (poly.size() != 4) return false;
    for (std::size_t i = 0; i < 4; ++i) {
        const Vec2 d = poly[(i + 1) % 4] - poly[i];
        if (d.x != 0.0 && d.y != 0.0) return false;
    }
    return true;
}

}  // namespace detail

/// Constants for a decomposition into convex basic subdomains:
/// C_P,k = diam(omega_k)/pi, beta from the rectangle edge constant, E_max the
/// largest interface count, C_F from the bounding box of the domain.
inline MajorantConstants majorant_constants(const TriMesh& mesh, const DomainDecomposition& dd,
                                            const EllipticProblem& problem) {
    MajorantConstants c;
    c.c_min = problem.c_min();
    for (int k = 0; k < dd.num_subdomains(); ++k) {
        c.cp.push_back(dd.diameter(k) / pi);
        c.cp_max = std::max(c.cp_max, c.cp.back());
        c.e_max = std::max(c.e_max, dd.interface_count(k));
    }
    for (const auto& itf : dd.interfaces()) {
        if (!detail::is_axis_rectangle(dd.outline(itf.k)) || !detail::is_axis_rectangle(dd.outline(itf.j)))
            throw std::invalid_argument("majorant_constants: edge constants need rectangular basic subdomains");
        const double cg = poincare_edge_constant(itf.length);
        c.beta.push_back(beta(cg, cg));
    }
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const Point& p : mesh.vertices()) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double a = x1 - x0, b = y1 - y0;
    c.c_f = 1.0 / (pi * std::sqrt(1.0 / (a * a) + 1.0 / (b * b)));
    return c;
}

struct Eps {
    double e1 = 1.0;
    double e2 = 1.0;
    double e3 = 1.0;
};

struct Alphas {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
};

inline Alphas alphas(const Eps& eps, const MajorantConstants& c) {
    if (!(eps.e1 > 0.0 && eps.e2 > 0.0 && eps.e3 > 0.0))
        throw std::invalid_argument("alphas: epsilon values must be positive");
    return {1.0 + eps.e1 + eps.e2, (1.0 + 1.0 / eps.e1 + eps.e3) * c.cp_max * c.cp_max / c.c_min,
            (1.0 + 1.0 / eps.e2 + 1.0 / eps.e3) * c.e_max / c.c_min};
}

inline CorrectorWeights corrector_weights(const Eps& eps, const MajorantConstants& c) {
    const Alphas a = alphas(eps, c);
    return {a.a1, a.a2, a.a3, c.beta};
}

struct MajorantReport {
    std::vector<double> m1_sq;  ///< per basic subdomain
    std::vector<double> m2_sq;  ///< per basic subdomain
    std::vector<double> m3_sq;  ///< per interface
    double M1_sq = 0.0;
    double M2_sq = 0.0;
    double M3_sq = 0.0;
    double total_sq = 0.0;
    double total = 0.0;
    double d11_bound = 0.0;
    Eps eps;
    Alphas alpha;
    FluxTerms terms;
    double admissibility_residual = 0.0;
    bool guaranteed = false;
    std::optional<double> energy_error;
    std::optional<double> i_eff;
};

inline constexpr double admissibility_tolerance = 1e-8;

/// Majorant from precomputed unweighted terms. `residual` is the normalized
/// constraint residual of the flux.
inline MajorantReport evaluate_majorant(const FluxTerms& terms, const MajorantConstants& c, const Eps& eps,
                                        double residual) {
    MajorantReport r;
    r.eps = eps;
    r.alpha = alphas(eps, c);
    r.terms = terms;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (double s : terms.s1) {
        r.m1_sq.push_back(r.alpha.a1 * s);
        r.M1_sq += r.m1_sq.back();
        s1 += s;
    }
    for (double s : terms.s2) {
        r.m2_sq.push_back(r.alpha.a2 * s);
        r.M2_sq += r.m2_sq.back();
        s2 += s;
    }
    for (std::size_t m = 0; m < terms.s3.size(); ++m) {
        const double bs = c.beta[m] * c.beta[m] * terms.s3[m];
        r.m3_sq.push_back(r.alpha.a3 * bs);
        r.M3_sq += r.m3_sq.back();
        s3 += bs;
    }
    r.total_sq = r.M1_sq + r.M2_sq + r.M3_sq;
    r.total = std::sqrt(r.total_sq);
    r.d11_bound = std::sqrt(s1) + (c.cp_max * std::sqrt(s2) + std::sqrt(double(c.e_max)) * std::sqrt(s3)) /
                                      std::sqrt(c.c_min);
    r.admissibility_residual = residual;
    r.guaranteed = residual <= admissibility_tolerance;
    return r;
}

inline MajorantReport evaluate_majorant(const ScalarFieldP1& v, const BrokenFluxField& y, const EllipticProblem& problem,
                                        const MajorantConstants& c, const Eps& eps = {}) {
    const ConstraintResiduals res = constraint_residuals(y, problem.source());
    MajorantReport r = evaluate_majorant(flux_terms(y, v, problem), c, eps, res.normalized());
    if (problem.has_exact()) {
        r.energy_error = energy_error(v, problem);
        if (*r.energy_error > 0.0) r.i_eff = r.total / *r.energy_error;
    }
    return r;
}

inline double efficiency_index(const MajorantReport& r, double error) {
    if (!(error > 0.0)) throw std::invalid_argument("efficiency_index: energy error must be positive");
    return r.total / error;
}

/// T1 = S1, T2 = C_P,max^2/C_min S2, T3 = E_max/C_min sum beta^2 S3.
struct MajorantT {
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
};

inline MajorantT majorant_t(const FluxTerms& terms, const MajorantConstants& c) {
    MajorantT t;
    for (double s : terms.s1) t.t1 += s;
    for (double s : terms.s2) t.t2 += s;
    for (std::size_t m = 0; m < terms.s3.size(); ++m) t.t3 += c.beta[m] * c.beta[m] * terms.s3[m];
    t.t2 *= c.cp_max * c.cp_max / c.c_min;
    t.t3 *= c.e_max / c.c_min;
    return t;
}

/// M_plus^2 as a function of epsilon.
inline double majorant_sq(const MajorantT& t, const Eps& e) {
    return (1.0 + e.e1 + e.e2) * t.t1 + (1.0 + 1.0 / e.e1 + e.e3) * t.t2 + (1.0 + 1.0 / e.e2 + 1.0 / e.e3) * t.t3;
}

struct OptimizedEps {
    Eps eps;
    bool zero_majorant = false;
};

inline constexpr double eps_min = 1e-8;
inline constexpr double eps_max = 1e8;

/// The majorant separates into e1 T1 + T2/e1, e2 T1 + T3/e2 and e3 T2 + T3/e3
/// plus a constant, so each weight is minimized independently.
inline OptimizedEps optimize_eps(const MajorantT& t) {
    if (t.t1 < 0.0 || t.t2 < 0.0 || t.t3 < 0.0) throw std::invalid_argument("optimize_eps: terms must be >= 0");
    if (t.t1 == 0.0 && t.t2 == 0.0 && t.t3 == 0.0) return {{1.0, 1.0, 1.0}, true};
    auto ratio = [](double num, double den) {
        if (num == 0.0 && den == 0.0) return 1.0;
        if (den == 0.0) return eps_max;
        return std::clamp(std::sqrt(num / den), eps_min, eps_max);
    };
    return {{ratio(t.t2, t.t1), ratio(t.t3, t.t1), ratio(t.t3, t.t2)}, false};
}

inline OptimizedEps optimize_eps(const FluxTerms& terms, const MajorantConstants& c) {
    return optimize_eps(majorant_t(terms, c));
}

struct BaselineResult {
    double bound = 0.0;
    double flux_term = 0.0;      ///< ||A grad v - y||_{A^-1}
    double residual_term = 0.0;  ///< C_F / sqrt(C_min) ||div y + f||
    bool hypercircle = false;
};

class NonConformingFlux : public std::invalid_argument {
public:
    NonConformingFlux(Index edge, Point where, double jump)
        : std::invalid_argument("global_majorant_baseline: normal jump " + std::to_string(jump) + " on edge " +
                                std::to_string(edge) + " at (" + std::to_string(where.x) + ", " +
                                std::to_string(where.y) + ")"),
          edge_(edge), where_(where), jump_(jump) {}
    Index edge() const { return edge_; }
    Point where() const { return where_; }
    double jump() const { return jump_; }

private:
    Index edge_;
    Point where_;
    double jump_;
};

/// Global two-term bound for an H(div)-conforming flux; reduces to the
/// hypercircle estimate when div y + f vanishes.
inline BaselineResult global_majorant_baseline(const ScalarFieldP1& v, const BrokenFluxField& y,
                                               const EllipticProblem& problem, double c_f) {
    const TriMesh& mesh = y.mesh();
    double ymax = 0.0, worst = 0.0;
    Index worst_edge = -1;
    Point worst_at;
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        const MeshEdge& me = mesh.edge(e);
        if (me.on_boundary()) continue;
        const Point a = mesh.vertex(me.v[0]), b = mesh.vertex(me.v[1]);
        const Vec2 d = b - a;
        const Vec2 n = (1.0 / norm(d)) * Vec2{d.y, -d.x};
        for (const auto& g : quadrature::gauss3) {
            const Point p = (1.0 - g.t) * a + g.t * b;
            const Vec2 y0 = y.value_at(me.tri[0], p), y1 = y.value_at(me.tri[1], p);
            ymax = std::max({ymax, norm(y0), norm(y1)});
            const double jump = std::abs(dot(y0 - y1, n));
            if (jump > worst) {
                worst = jump;
                worst_edge = e;
                worst_at = p;
            }
        }
    }
    if (worst > 1e-10 * (1.0 + ymax)) throw NonConformingFlux(worst_edge, worst_at, worst);

    const FluxTerms t = flux_terms(y, v, problem);
    double s1 = 0.0, s2 = 0.0;
    for (double s : t.s1) s1 += s;
    for (double s : t.s2) s2 += s;
    BaselineResult r;
    r.flux_term = std::sqrt(s1);
    r.hypercircle = s2 < 1e-12;
    r.residual_term = r.hypercircle ? 0.0 : c_f / std::sqrt(problem.c_min()) * std::sqrt(s2);
    r.bound = r.flux_term + r.residual_term;
    return r;
}

}  // namespace ddmcert
