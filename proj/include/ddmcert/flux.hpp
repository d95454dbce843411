#pragma once

// Broken flux fields y = (y_1, ..., y_N): a piecewise-linear part per basic
// subdomain (averaged gradient) plus lowest-order Raviart–Thomas correctors
// living on a coarse simplicial mesh, broken across interfaces only.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "ddmcert/linalg.hpp"
#include "ddmcert/mesh.hpp"
#include "ddmcert/problem.hpp"
#include "ddmcert/quadrature.hpp"

namespace ddmcert {

inline std::array<double, 3> barycentric(const std::array<Point, 3>& c, const Point& p) {
    const double two_area = cross(c[1] - c[0], c[2] - c[0]);
    std::array<double, 3> b;
    for (int i = 0; i < 3; ++i) b[i] = cross(c[(i + 1) % 3] - p, c[(i + 2) % 3] - p) / two_area;
    return b;
}

/// RT0 space on the simplices of a coarse mesh. DOFs are normal-flux
/// densities with respect to a fixed normal per DOF: one DOF per edge interior
/// to a basic subdomain or on the boundary, two per interface edge (one per
/// side, both measured along n_kj).
class CorrectorSpace {
public:
    struct Dof {
        Index coarse_edge = 0;
        int side = 0;       ///< 0 single-valued, 1 omega_k side, 2 omega_j side of gamma_kj
        int subdomain = 0;
        Vec2 normal;
        double length = 0.0;
        bool boundary = false;
    };

    CorrectorSpace(const TriMesh& fine, const DomainDecomposition& dd, const CoarseMesh& coarse)
        : fine_(&fine), coarse_(coarse.has_simplices() ? coarse.simplices() : TriMesh{}) {
        if (!coarse.has_simplices()) throw std::invalid_argument("CorrectorSpace: coarse mesh has no simplices");
        if (const auto chk = compatibility_check(coarse); !chk.satisfied)
            throw std::invalid_argument("CorrectorSpace: incompatible coarse mesh, slack deficit " +
                                        std::to_string(-chk.slack));
        if (!fine.has_grid_keys() || !coarse_.has_grid_keys())
            throw std::invalid_argument("CorrectorSpace: structured meshes required");
        const double ratio = coarse_.h() / fine.h();
        ratio_ = static_cast<Index>(std::llround(ratio));
        if (ratio_ < 1 || std::abs(ratio - static_cast<double>(ratio_)) > 1e-9 * ratio)
            throw std::invalid_argument("CorrectorSpace: H/h must be a positive integer");

        const TriMesh& s = coarse_;
        sub_.resize(static_cast<std::size_t>(s.num_triangles()));
        for (Index t = 0; t < s.num_triangles(); ++t) sub_[t] = coarse.subdomain_of_simplex(t);

        edge_dofs_.assign(static_cast<std::size_t>(s.num_edges()), {-1, -1});
        for (Index e = 0; e < s.num_edges(); ++e) {
            const MeshEdge& me = s.edge(e);
            const Vec2 d = s.vertex(me.v[1]) - s.vertex(me.v[0]);
            const double len = norm(d);
            Vec2 n{d.y / len, -d.x / len};
            if (me.on_boundary()) {
                edge_dofs_[e][0] = add({e, 0, sub_[me.tri[0]], n, len, true});
                continue;
            }
            int a = sub_[me.tri[0]], b = sub_[me.tri[1]];
            if (a == b) {
                edge_dofs_[e][0] = add({e, 0, a, n, len, false});
                continue;
            }
            Index ta = me.tri[0], tb = me.tri[1];
            if (a > b) {
                std::swap(a, b);
                std::swap(ta, tb);
            }
            if (dot(n, s.centroid(tb) - s.centroid(ta)) < 0.0) n *= -1.0;
            edge_dofs_[e][0] = add({e, 1, a, n, len, false});
            edge_dofs_[e][1] = add({e, 2, b, n, len, false});
        }

        local_.resize(static_cast<std::size_t>(s.num_triangles()));
        for (Index t = 0; t < s.num_triangles(); ++t) {
            const auto c = s.corners(t);
            Local& loc = local_[t];
            for (int i = 0; i < 3; ++i) {
                const Index e = s.triangle_edge(t, i);
                const auto& ed = edge_dofs_[e];
                const Index dof = (ed[1] >= 0 && dofs_[ed[1]].subdomain == sub_[t]) ? ed[1] : ed[0];
                const Vec2 d = c[(i + 2) % 3] - c[(i + 1) % 3];
                const Vec2 outward{d.y, -d.x};
                const double sigma = dot(dofs_[dof].normal, outward) > 0.0 ? 1.0 : -1.0;
                loc.dof[i] = dof;
                loc.factor[i] = sigma * dofs_[dof].length / (2.0 * s.area(t));
                loc.apex[i] = c[i];
            }
        }

        fine_to_coarse_.resize(static_cast<std::size_t>(fine.num_triangles()));
        for (Index t = 0; t < fine.num_triangles(); ++t) {
            const GridKey& k = fine.grid_key(t);
            const Index a = k.gx % ratio_, b = k.gy % ratio_;
            const GridKey ck{k.gx / ratio_, k.gy / ratio_, b > a || (a == b && k.upper)};
            const Index ct = s.find(ck);
            if (ct < 0) throw std::invalid_argument("CorrectorSpace: fine triangle outside the coarse mesh");
            if (sub_[ct] != dd.subdomain_of(t))
                throw std::invalid_argument("CorrectorSpace: coarse simplex crosses a subdomain boundary");
            fine_to_coarse_[t] = ct;
        }
    }

    Index size() const { return static_cast<Index>(dofs_.size()); }
    const std::vector<Dof>& dofs() const { return dofs_; }
    const TriMesh& simplices() const { return coarse_; }
    const TriMesh& fine_mesh() const { return *fine_; }
    Index coarse_of(Index fine_t) const { return fine_to_coarse_[fine_t]; }
    /// DOFs of a coarse edge; the second entry is -1 unless the edge is on an interface.
    const std::array<Index, 2>& edge_dofs(Index coarse_edge) const { return edge_dofs_[coarse_edge]; }
    Index count_side(int side) const {
        return std::count_if(dofs_.begin(), dofs_.end(), [&](const Dof& d) { return d.side == side; });
    }

    /// DOF indices carried by the coarse simplex containing fine triangle t.
    const std::array<Index, 3>& local_dofs(Index fine_t) const { return local_[fine_to_coarse_[fine_t]].dof; }

    /// Basis values at p for the three local DOFs of fine triangle t.
    std::array<Vec2, 3> basis(Index fine_t, const Point& p) const {
        const Local& l = local_[fine_to_coarse_[fine_t]];
        return {l.factor[0] * (p - l.apex[0]), l.factor[1] * (p - l.apex[1]), l.factor[2] * (p - l.apex[2])};
    }
    std::array<double, 3> basis_divergence(Index fine_t) const {
        const Local& l = local_[fine_to_coarse_[fine_t]];
        return {2.0 * l.factor[0], 2.0 * l.factor[1], 2.0 * l.factor[2]};
    }

    Vec2 evaluate(Index fine_t, const Point& p, std::span<const double> c) const {
        const auto& d = local_dofs(fine_t);
        const auto b = basis(fine_t, p);
        return c[d[0]] * b[0] + c[d[1]] * b[1] + c[d[2]] * b[2];
    }
    double divergence(Index fine_t, std::span<const double> c) const {
        const auto& d = local_dofs(fine_t);
        const auto b = basis_divergence(fine_t);
        return c[d[0]] * b[0] + c[d[1]] * b[1] + c[d[2]] * b[2];
    }

private:
    struct Local {
        std::array<Index, 3> dof{};
        std::array<double, 3> factor{};
        std::array<Point, 3> apex{};
    };

    Index add(Dof d) {
        dofs_.push_back(d);
        return static_cast<Index>(dofs_.size()) - 1;
    }

    const TriMesh* fine_;
    TriMesh coarse_;
    Index ratio_ = 1;
    std::vector<int> sub_;
    std::vector<Dof> dofs_;
    std::vector<std::array<Index, 2>> edge_dofs_;
    std::vector<Local> local_;
    std::vector<Index> fine_to_coarse_;
};

inline std::shared_ptr<const CorrectorSpace> build_corrector_space(const TriMesh& fine, const DomainDecomposition& dd,
                                                                   const CoarseMesh& coarse) {
    return std::make_shared<const CorrectorSpace>(fine, dd, coarse);
}

/// Corrector space of spacing H on the decomposition's own layout.
inline std::shared_ptr<const CorrectorSpace> build_corrector_space(const TriMesh& fine, const DomainDecomposition& dd,
                                                                   double coarse_h) {
    return build_corrector_space(fine, dd, CoarseMesh::on_layout(dd.layout(), coarse_h, CellType::quad));
}

struct CorrectorComponent {
    std::shared_ptr<const CorrectorSpace> space;
    std::vector<double> coefficients;
};

class BrokenFluxField {
public:
    BrokenFluxField() = default;
    BrokenFluxField(const TriMesh& mesh, const DomainDecomposition& dd) : mesh_(&mesh), dd_(&dd) {
        nodal_.resize(static_cast<std::size_t>(dd.num_subdomains()));
        for (int k = 0; k < dd.num_subdomains(); ++k) nodal_[k].assign(dd.vertices_of(k).size(), Vec2{});
    }

    const TriMesh& mesh() const { return *mesh_; }
    const DomainDecomposition& decomposition() const { return *dd_; }

    /// Nodal vector values of the piecewise-linear part on omega_k, indexed
    /// by the subdomain-local vertex numbering.
    std::vector<Vec2>& nodal(int k) { return nodal_[k]; }
    const std::vector<Vec2>& nodal(int k) const { return nodal_[k]; }
    const std::vector<CorrectorComponent>& correctors() const { return correctors_; }
    void add_corrector(CorrectorComponent c) {
        if (static_cast<Index>(c.coefficients.size()) != c.space->size())
            throw std::invalid_argument("BrokenFluxField: coefficient count differs from space dimension");
        if (&c.space->fine_mesh() != mesh_) throw std::invalid_argument("BrokenFluxField: corrector on another mesh");
        correctors_.push_back(std::move(c));
    }

    Vec2 value(Index t, const std::array<double, 3>& bary) const {
        return value(t, bary, quadrature::map(mesh_->corners(t), bary));
    }
    Vec2 value_at(Index t, const Point& p) const { return value(t, barycentric(mesh_->corners(t), p), p); }

    /// Divergence on fine triangle t (constant there).
    double divergence(Index t) const {
        const auto g = ScalarFieldP1::p1_gradients(*mesh_, t);
        const auto& nk = nodal_[dd_->subdomain_of(t)];
        double d = 0.0;
        for (int i = 0; i < 3; ++i) d += dot(nk[dd_->local_corner(t, i)], g[i]);
        for (const auto& c : correctors_) d += c.space->divergence(t, c.coefficients);
        return d;
    }

    /// y_k . n_kj and y_j . n_kj at parameter s in [0, 1] along interface edge i.
    std::pair<double, double> interface_traces(const Interface& itf, std::size_t i, double s) const {
        const MeshEdge& e = mesh_->edge(itf.edges[i]);
        const Point p = (1.0 - s) * mesh_->vertex(e.v[0]) + s * mesh_->vertex(e.v[1]);
        return {dot(value_at(itf.tri_k[i], p), itf.normal), dot(value_at(itf.tri_j[i], p), itf.normal)};
    }

    /// Value at the centroid of every fine triangle (for cell-data export).
    std::vector<Vec2> centroid_values() const {
        std::vector<Vec2> out(static_cast<std::size_t>(mesh_->num_triangles()));
        for (Index t = 0; t < mesh_->num_triangles(); ++t) out[t] = value(t, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
        return out;
    }

private:
    Vec2 value(Index t, const std::array<double, 3>& bary, const Point& p) const {
        const auto& nk = nodal_[dd_->subdomain_of(t)];
        Vec2 y = bary[0] * nk[dd_->local_corner(t, 0)] + bary[1] * nk[dd_->local_corner(t, 1)] +
                 bary[2] * nk[dd_->local_corner(t, 2)];
        for (const auto& c : correctors_) y += c.space->evaluate(t, p, c.coefficients);
        return y;
    }

    const TriMesh* mesh_ = nullptr;
    const DomainDecomposition* dd_ = nullptr;
    std::vector<std::vector<Vec2>> nodal_;
    std::vector<CorrectorComponent> correctors_;
};

/// G_k(A grad v) on each omega_k: nodal values are area-weighted averages of
/// the elementwise flux over the triangles of omega_k touching the node.
inline BrokenFluxField average_gradient(const ScalarFieldP1& v, const DomainDecomposition& dd, const Mat2& a) {
    const TriMesh& mesh = *v.mesh;
    BrokenFluxField y(mesh, dd);
    for (int k = 0; k < dd.num_subdomains(); ++k) {
        std::vector<double> weight(dd.vertices_of(k).size(), 0.0);
        auto& nk = y.nodal(k);
        for (Index t : dd.triangles_of(k)) {
            const Vec2 flux = a * v.gradient(t);
            const double area = mesh.area(t);
            for (int i = 0; i < 3; ++i) {
                const Index l = dd.local_corner(t, i);
                nk[l] += area * flux;
                weight[l] += area;
            }
        }
        for (std::size_t l = 0; l < nk.size(); ++l) nk[l] *= 1.0 / weight[l];
    }
    return y;
}

/// y + q for q in the given space.
inline BrokenFluxField corrected_flux(BrokenFluxField y, std::shared_ptr<const CorrectorSpace> space,
                                      std::vector<double> q) {
    y.add_corrector({std::move(space), std::move(q)});
    return y;
}

struct ConstraintResiduals {
    std::vector<double> equilibration;  ///< r_k, mean of div y + f over omega_k
    std::vector<double> jump;           ///< s_kj, mean of (y_k - y_j).n_kj over gamma_kj
    double f_scale = 0.0;               ///< max |f| over quadrature points
    double y_scale = 0.0;               ///< max |y| over quadrature points

    double max_equilibration() const {
        double m = 0.0;
        for (double r : equilibration) m = std::max(m, std::abs(r));
        return m;
    }
    double max_jump() const {
        double m = 0.0;
        for (double s : jump) m = std::max(m, std::abs(s));
        return m;
    }
    /// Largest residual relative to 1 + ||f|| or 1 + ||y||.
    double normalized() const {
        return std::max(max_equilibration() / (1.0 + f_scale), max_jump() / (1.0 + y_scale));
    }
};

inline ConstraintResiduals constraint_residuals(const BrokenFluxField& y, const ScalarFunction& f) {
    const TriMesh& mesh = y.mesh();
    const DomainDecomposition& dd = y.decomposition();
    ConstraintResiduals out;
    out.equilibration.assign(static_cast<std::size_t>(dd.num_subdomains()), 0.0);
    for (int k = 0; k < dd.num_subdomains(); ++k) {
        double sum = 0.0;
        for (Index t : dd.triangles_of(k)) {
            const auto c = mesh.corners(t);
            double fint = 0.0;
            for (const auto& q : quadrature::degree5) {
                const double fq = f(quadrature::map(c, q.bary));
                out.f_scale = std::max(out.f_scale, std::abs(fq));
                out.y_scale = std::max(out.y_scale, norm(y.value(t, q.bary)));
                fint += q.weight * fq;
            }
            sum += mesh.area(t) * (y.divergence(t) + fint);
        }
        out.equilibration[k] = sum / dd.area(k);
    }
    for (const auto& itf : dd.interfaces()) {
        double sum = 0.0;
        for (std::size_t i = 0; i < itf.edges.size(); ++i) {
            const double len = mesh.edge_length(itf.edges[i]);
            for (const auto& g : quadrature::gauss3) {
                const auto [a, b] = y.interface_traces(itf, i, g.t);
                sum += len * g.weight * (a - b);
            }
        }
        out.jump.push_back(sum / itf.length);
    }
    return out;
}

/// Unweighted majorant integrals: S1_k = ||y_k - A grad v||^2_{A^-1, omega_k},
/// S2_k = ||div y_k + f||^2_{omega_k}, S3_kj = ||(y_k - y_j).n_kj||^2_{gamma_kj}.
struct FluxTerms {
    std::vector<double> s1;
    std::vector<double> s2;
    std::vector<double> s3;
};

inline FluxTerms flux_terms(const BrokenFluxField& y, const ScalarFieldP1& v, const EllipticProblem& problem) {
    const TriMesh& mesh = y.mesh();
    const DomainDecomposition& dd = y.decomposition();
    FluxTerms out;
    out.s1.assign(static_cast<std::size_t>(dd.num_subdomains()), 0.0);
    out.s2.assign(static_cast<std::size_t>(dd.num_subdomains()), 0.0);
    for (int k = 0; k < dd.num_subdomains(); ++k)
        for (Index t : dd.triangles_of(k)) {
            const auto c = mesh.corners(t);
            const Vec2 av = problem.a() * v.gradient(t);
            const double div = y.divergence(t);
            double a1 = 0.0, a2 = 0.0;
            for (const auto& q : quadrature::degree5) {
                const Vec2 r = y.value(t, q.bary) - av;
                const double e = div + problem.f(quadrature::map(c, q.bary));
                a1 += q.weight * dot(problem.a_inverse() * r, r);
                a2 += q.weight * e * e;
            }
            out.s1[k] += a1 * mesh.area(t);
            out.s2[k] += a2 * mesh.area(t);
        }
    for (const auto& itf : dd.interfaces()) {
        double sum = 0.0;
        for (std::size_t i = 0; i < itf.edges.size(); ++i) {
            const double len = mesh.edge_length(itf.edges[i]);
            for (const auto& g : quadrature::gauss3) {
                const auto [a, b] = y.interface_traces(itf, i, g.t);
                sum += len * g.weight * (a - b) * (a - b);
            }
        }
        out.s3.push_back(sum);
    }
    return out;
}

/// Weights of the corrector functional; beta is indexed like dd.interfaces().
struct CorrectorWeights {
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double alpha3 = 1.0;
    std::vector<double> beta;
};

struct CorrectorSolution {
    std::vector<double> coefficients;
    std::vector<double> multipliers;  ///< N equilibration rows first, then one per interface
    double kkt_residual = 0.0;
    double constraint_residual = 0.0;
    bool used_schur_path = false;
};

/// Quadratic functional J(y0 + q) = q^T H q - 2 g^T q + J(y0) over the
/// corrector space, together with the normalized constraint rows B q = d.
inline SaddleSystem assemble_corrector_system(const BrokenFluxField& y0, const ScalarFieldP1& v,
                                              const EllipticProblem& problem, const CorrectorSpace& space,
                                              const CorrectorWeights& w) {
    const TriMesh& mesh = y0.mesh();
    const DomainDecomposition& dd = y0.decomposition();
    if (!(w.alpha1 > 0.0 && w.alpha2 > 0.0 && w.alpha3 > 0.0))
        throw std::invalid_argument("solve_corrector: weights must be positive");
    if (w.beta.size() != dd.interfaces().size())
        throw std::invalid_argument("solve_corrector: one beta per interface required");
    const Index n = space.size();
    const Mat2 ainv = problem.a_inverse();
    std::vector<Triplet> h, b;
    std::vector<double> g(static_cast<std::size_t>(n), 0.0);
    std::vector<double> d;

    for (int k = 0; k < dd.num_subdomains(); ++k) {
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        std::vector<Index> touched;
        double rhs = 0.0;
        for (Index t : dd.triangles_of(k)) {
            const auto c = mesh.corners(t);
            const double area = mesh.area(t);
            const auto& dof = space.local_dofs(t);
            const auto bdiv = space.basis_divergence(t);
            const Vec2 av = problem.a() * v.gradient(t);
            const double div0 = y0.divergence(t);
            std::array<std::array<double, 3>, 3> loc{};
            std::array<double, 3> lin{};
            double fint = 0.0;
            for (const auto& q : quadrature::degree5) {
                const Point p = quadrature::map(c, q.bary);
                const auto phi = space.basis(t, p);
                const Vec2 r0 = y0.value(t, q.bary) - av;
                const double e0 = div0 + problem.f(p);
                fint += q.weight * problem.f(p);
                for (int i = 0; i < 3; ++i) {
                    const Vec2 aphi = ainv * phi[i];
                    lin[i] += q.weight * (w.alpha1 * dot(aphi, r0) + w.alpha2 * bdiv[i] * e0);
                    for (int j = 0; j < 3; ++j) loc[i][j] += q.weight * w.alpha1 * dot(aphi, phi[j]);
                }
            }
            for (int i = 0; i < 3; ++i) {
                g[dof[i]] -= area * lin[i];
                for (int j = 0; j < 3; ++j)
                    h.push_back({dof[i], dof[j], area * (loc[i][j] + w.alpha2 * bdiv[i] * bdiv[j])});
                if (row[dof[i]] == 0.0) touched.push_back(dof[i]);
                row[dof[i]] += area * bdiv[i] / dd.area(k);
            }
            rhs -= area * (div0 + fint) / dd.area(k);
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        double rmax = 0.0;
        for (Index i : touched) rmax = std::max(rmax, std::abs(row[i]));
        for (Index i : touched)
            if (std::abs(row[i]) > 1e-13 * rmax) b.push_back({k, i, row[i]});
        d.push_back(rhs);
    }

    Index r = dd.num_subdomains();
    for (std::size_t m = 0; m < dd.interfaces().size(); ++m) {
        const Interface& itf = dd.interfaces()[m];
        const double wj = w.alpha3 * w.beta[m] * w.beta[m];
        std::vector<std::pair<Index, double>> row;
        double jump0 = 0.0;
        for (std::size_t i = 0; i < itf.edges.size(); ++i) {
            const MeshEdge& e = mesh.edge(itf.edges[i]);
            const double len = mesh.edge_length(itf.edges[i]);
            // one-sided normal traces of the basis on this edge
            std::array<double, 3> tk{}, tj{};
            std::array<std::array<double, 6>, 6> loc{};
            const auto& dk = space.local_dofs(itf.tri_k[i]);
            const auto& dj = space.local_dofs(itf.tri_j[i]);
            std::array<double, 6> lin{};
            for (const auto& gp : quadrature::gauss3) {
                const Point p = (1.0 - gp.t) * mesh.vertex(e.v[0]) + gp.t * mesh.vertex(e.v[1]);
                const auto pk = space.basis(itf.tri_k[i], p);
                const auto pj = space.basis(itf.tri_j[i], p);
                const auto [a, bb] = y0.interface_traces(itf, i, gp.t);
                std::array<double, 6> phi;
                for (int l = 0; l < 3; ++l) {
                    phi[l] = dot(pk[l], itf.normal);
                    phi[3 + l] = -dot(pj[l], itf.normal);
                }
                const double j0 = a - bb;
                jump0 += len * gp.weight * j0;
                for (int l = 0; l < 6; ++l) {
                    lin[l] += len * gp.weight * phi[l] * j0;
                    for (int m2 = 0; m2 < 6; ++m2) loc[l][m2] += len * gp.weight * phi[l] * phi[m2];
                }
                for (int l = 0; l < 3; ++l) {
                    tk[l] += len * gp.weight * phi[l];
                    tj[l] += len * gp.weight * phi[3 + l];
                }
            }
            std::array<Index, 6> ids{dk[0], dk[1], dk[2], dj[0], dj[1], dj[2]};
            for (int l = 0; l < 6; ++l) {
                g[ids[l]] -= wj * lin[l];
                for (int m2 = 0; m2 < 6; ++m2) h.push_back({ids[l], ids[m2], wj * loc[l][m2]});
            }
            for (int l = 0; l < 3; ++l) {
                if (std::abs(tk[l]) > 1e-14 * len) row.emplace_back(dk[l], tk[l] / itf.length);
                if (std::abs(tj[l]) > 1e-14 * len) row.emplace_back(dj[l], tj[l] / itf.length);
            }
        }
        std::sort(row.begin(), row.end());
        for (std::size_t i = 0; i < row.size();) {
            double s = 0.0;
            std::size_t k = i;
            for (; k < row.size() && row[k].first == row[i].first; ++k) s += row[k].second;
            b.push_back({r, row[i].first, s});
            i = k;
        }
        d.push_back(-jump0 / itf.length);
        ++r;
    }

    SaddleSystem sys;
    sys.h = CsrMatrix::from_triplets(n, n, std::move(h));
    sys.b = CsrMatrix::from_triplets(r, n, std::move(b));
    sys.g = std::move(g);
    sys.d = std::move(d);
    return sys;
}

/// Minimizes the weighted majorant functional over q in the corrector space
/// subject to zero mean equilibration per omega_k and zero mean normal jump
/// per gamma_kj.
inline CorrectorSolution solve_corrector(const BrokenFluxField& y0, const ScalarFieldP1& v,
                                         const EllipticProblem& problem, const CorrectorSpace& space,
                                         const CorrectorWeights& w, SaddleSolveOptions opt = {}) {
    const SaddleSystem sys = assemble_corrector_system(y0, v, problem, space, w);
    const SaddleSolution sol = saddle_solve(sys, opt);
    return {sol.x, sol.lambda, sol.kkt_residual, sol.constraint_residual, sol.used_schur_path};
}

/// alpha1 sum S1 + alpha2 sum S2 + alpha3 sum beta^2 S3.
inline double corrector_objective(const BrokenFluxField& y, const ScalarFieldP1& v, const EllipticProblem& problem,
                                  const CorrectorWeights& w) {
    const FluxTerms t = flux_terms(y, v, problem);
    double j = 0.0;
    for (double s : t.s1) j += w.alpha1 * s;
    for (double s : t.s2) j += w.alpha2 * s;
    for (std::size_t m = 0; m < t.s3.size(); ++m) j += w.alpha3 * w.beta[m] * w.beta[m] * t.s3[m];
    return j;
}

/// Fine RT0 refinement of an admissible flux. For each omega_k the volume
/// terms are re-minimized over fine-mesh RT0 fields whose DOFs sit on edges
/// interior to omega_k. Such fields have zero normal flux on the boundary of
/// omega_k, so the mean equilibration and all interface traces are unchanged.
/// Returns the fine-level update (empty when the flux has no coarser corrector).
inline std::optional<CorrectorComponent> improve_corrector_locally(const BrokenFluxField& y, const ScalarFieldP1& v,
                                                                   const EllipticProblem& problem,
                                                                   const CorrectorWeights& w,
                                                                   SpdSolveOptions opt = {}) {
    const TriMesh& mesh = y.mesh();
    const DomainDecomposition& dd = y.decomposition();
    bool coarser = false;
    for (const auto& c : y.correctors()) coarser = coarser || c.space->simplices().h() > mesh.h() * (1.0 + 1e-12);
    if (!coarser) return std::nullopt;

    auto fine = build_corrector_space(mesh, dd, CoarseMesh::on_layout(dd.layout(), mesh.h(), CellType::triangle));
    std::vector<double> update(static_cast<std::size_t>(fine->size()), 0.0);
    const Mat2 ainv = problem.a_inverse();

    for (int k = 0; k < dd.num_subdomains(); ++k) {
        std::vector<Index> local(static_cast<std::size_t>(fine->size()), -1);
        Index nloc = 0;
        for (Index i = 0; i < fine->size(); ++i) {
            const auto& dof = fine->dofs()[i];
            if (dof.side == 0 && !dof.boundary && dof.subdomain == k) local[i] = nloc++;
        }
        if (nloc == 0) continue;
        std::vector<Triplet> h;
        std::vector<double> g(static_cast<std::size_t>(nloc), 0.0);
        for (Index t : dd.triangles_of(k)) {
            const auto c = mesh.corners(t);
            const double area = mesh.area(t);
            const auto& dof = fine->local_dofs(t);
            const auto bdiv = fine->basis_divergence(t);
            const Vec2 av = problem.a() * v.gradient(t);
            const double div0 = y.divergence(t);
            std::array<std::array<double, 3>, 3> loc{};
            std::array<double, 3> lin{};
            for (const auto& q : quadrature::degree5) {
                const Point p = quadrature::map(c, q.bary);
                const auto phi = fine->basis(t, p);
                const Vec2 r0 = y.value(t, q.bary) - av;
                const double e0 = div0 + problem.f(p);
                for (int i = 0; i < 3; ++i) {
                    const Vec2 aphi = ainv * phi[i];
                    lin[i] += q.weight * (w.alpha1 * dot(aphi, r0) + w.alpha2 * bdiv[i] * e0);
                    for (int j = 0; j < 3; ++j) loc[i][j] += q.weight * w.alpha1 * dot(aphi, phi[j]);
                }
            }
            for (int i = 0; i < 3; ++i) {
                const Index li = local[dof[i]];
                if (li < 0) continue;
                g[li] -= area * lin[i];
                for (int j = 0; j < 3; ++j) {
                    const Index lj = local[dof[j]];
                    if (lj >= 0) h.push_back({li, lj, area * (loc[i][j] + w.alpha2 * bdiv[i] * bdiv[j])});
                }
            }
        }
        const CsrMatrix hm = CsrMatrix::from_triplets(nloc, nloc, std::move(h));
        const SpdSolveResult r = spd_solve(hm, g, opt);
        for (Index i = 0; i < fine->size(); ++i)
            if (local[i] >= 0) update[i] = r.x[local[i]];
    }
    return CorrectorComponent{std::move(fine), std::move(update)};
}

/// CSV dump of corrector coefficients: coarse edge id, side, coefficient.
inline void write_corrector_csv(std::ostream& os, const CorrectorSpace& space, std::span<const double> q) {
    os << "edge_id,side,coefficient\n" << std::setprecision(17);
    for (Index i = 0; i < space.size(); ++i) {
        const auto& d = space.dofs()[i];
        os << d.coarse_edge << ',' << d.side << ',' << q[i] << '\n';
    }
}

}  // namespace ddmcert
