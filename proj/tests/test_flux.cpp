#include <gtest/gtest.h>

#include <sstream>

#include "ddmcert/flux.hpp"
#include "ddmcert/majorant.hpp"
#include "ddmcert/schwarz.hpp"

using namespace ddmcert;

namespace {

ScalarFunction constant(double c) {
    return [c](const Point&) { return c; };
}

/// Local index of the vertex at p within subdomain k.
Index local_vertex(const TriMesh& mesh, const DomainDecomposition& dd, int k, const Point& p) {
    const auto& vs = dd.vertices_of(k);
    for (std::size_t l = 0; l < vs.size(); ++l)
        if (norm(mesh.vertex(vs[l]) - p) < 1e-14) return static_cast<Index>(l);
    return -1;
}

CorrectorWeights unit_weights(const DomainDecomposition& dd) {
    return {1.0, 1.0, 1.0, std::vector<double>(dd.interfaces().size(), 1.0)};
}

}  // namespace

TEST(AverageGradient, AffineFieldGivesConstantFlux) {
    const auto md = build_lshape_mesh(0.25);
    const Mat2 a{2.0, 0.5, 1.0};
    const auto v = ScalarFieldP1::interpolate(md.mesh, [](const Point& p) { return 2.0 * p.x - 3.0 * p.y + 1.0; });
    const auto y = average_gradient(v, md.decomposition, a);
    const Vec2 ref = a * Vec2{2.0, -3.0};
    for (int k = 0; k < 3; ++k)
        for (const Vec2& n : y.nodal(k)) {
            EXPECT_NEAR(n.x, ref.x, 1e-12);
            EXPECT_NEAR(n.y, ref.y, 1e-12);
        }
    for (Index t = 0; t < md.mesh.num_triangles(); ++t) EXPECT_NEAR(y.divergence(t), 0.0, 1e-11);
    const auto res = constraint_residuals(y, constant(0.0));
    EXPECT_LT(res.max_jump(), 1e-12);
}

TEST(AverageGradient, SharedVertexTakesAreaWeightedMean) {
    const auto r = build_rect_grid_decomposition(1, 1, 1.0, CellType::quad);
    // v = x on the lower triangle and v = y on the upper one
    ScalarFieldP1 v(r.mesh);
    for (Index i = 0; i < r.mesh.num_vertices(); ++i) {
        const Point p = r.mesh.vertex(i);
        v.values[i] = (p.x == 0.0 && p.y == 0.0) ? 0.0 : 1.0;
    }
    const auto y = average_gradient(v, r.decomposition, Mat2::identity());
    for (const Point p : {Point{0, 0}, Point{1, 1}}) {
        const Index l = local_vertex(r.mesh, r.decomposition, 0, p);
        ASSERT_GE(l, 0);
        EXPECT_NEAR(y.nodal(0)[l].x, 0.5, 1e-15);
        EXPECT_NEAR(y.nodal(0)[l].y, 0.5, 1e-15);
    }
    const Index l10 = local_vertex(r.mesh, r.decomposition, 0, {1, 0});
    EXPECT_NEAR(y.nodal(0)[l10].x, 1.0, 1e-15);
    EXPECT_NEAR(y.nodal(0)[l10].y, 0.0, 1e-15);
}

TEST(AverageGradient, CloserToFluxThanElementwiseJumps) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = manufactured_lshape_problem();
    const auto v = run_schwarz(md.mesh, md.decomposition, p).iterate;
    const auto y = average_gradient(v, md.decomposition, p.a());
    const FluxTerms t = flux_terms(y, v, p);
    double s1 = 0.0;
    for (double s : t.s1) s1 += s;
    // ||G grad v - grad v|| is of the order of the gradient jumps
    EXPECT_GT(s1, 0.0);
    EXPECT_LT(std::sqrt(s1), 0.2);
}

TEST(CorrectorSpace, LShapeUnitCellsDofCount) {
    const auto md = build_lshape_mesh(1.0);
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 1.0);
    EXPECT_EQ(sp->size(), 15);
    EXPECT_EQ(sp->count_side(1), 2);
    EXPECT_EQ(sp->count_side(2), 2);
    Index boundary = 0, cell_faces = 0;
    for (const auto& d : sp->dofs()) boundary += d.boundary;
    const auto coarse = CoarseMesh::on_layout(md.decomposition.layout(), 1.0, CellType::quad);
    for (const auto& d : sp->dofs()) cell_faces += coarse.is_cell_face(d.coarse_edge);
    EXPECT_EQ(boundary, 8);
    // 8 boundary + 2 interface edges x 2 sides on cell faces, 3 quad diagonals
    EXPECT_EQ(cell_faces, 12);
    EXPECT_EQ(sp->size() - cell_faces, 3);
}

TEST(CorrectorSpace, AllTriangleSingleSubdomain) {
    const auto r = build_rect_grid_decomposition(1, 1, 0.25, CellType::quad);
    const auto coarse = CoarseMesh::on_layout(r.decomposition.layout(), 0.5, CellType::triangle);
    const auto sp = build_corrector_space(r.mesh, r.decomposition, coarse);
    EXPECT_EQ(sp->size(), coarse.counts().faces);
    EXPECT_EQ(coarse.counts().per_cell_dim, 3 * coarse.counts().cells);
    EXPECT_EQ(sp->count_side(1) + sp->count_side(2), 0);
}

TEST(CorrectorSpace, InterfaceDofsShareNormal) {
    const auto md = build_lshape_mesh(0.25);
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.5);
    for (Index e = 0; e < sp->simplices().num_edges(); ++e) {
        const auto& ed = sp->edge_dofs(e);
        if (ed[1] < 0) continue;
        const auto& a = sp->dofs()[ed[0]];
        const auto& b = sp->dofs()[ed[1]];
        EXPECT_EQ(a.side, 1);
        EXPECT_EQ(b.side, 2);
        EXPECT_LT(a.subdomain, b.subdomain);
        EXPECT_EQ(a.normal, b.normal);
    }
}

TEST(CorrectorSpace, RepresentsConstantFieldOnSquare) {
    const auto r = build_rect_grid_decomposition(1, 1, 0.25, CellType::quad);
    const auto sp = build_corrector_space(r.mesh, r.decomposition, r.coarse);
    const Vec2 c{0.7, -1.9};
    std::vector<double> q;
    for (const auto& d : sp->dofs()) q.push_back(dot(c, d.normal));
    for (Index t = 0; t < r.mesh.num_triangles(); ++t) {
        const Vec2 val = sp->evaluate(t, r.mesh.centroid(t), q);
        EXPECT_NEAR(val.x, c.x, 1e-14);
        EXPECT_NEAR(val.y, c.y, 1e-14);
        EXPECT_NEAR(sp->divergence(t, q), 0.0, 1e-13);
    }
}

TEST(CorrectorSpace, NormalFluxIsContinuousAcrossCoarseEdges) {
    const auto md = build_lshape_mesh(0.125);
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.25);
    std::vector<double> q(static_cast<std::size_t>(sp->size()));
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::sin(1.0 + 0.37 * double(i));
    for (Index e = 0; e < md.mesh.num_edges(); ++e) {
        const MeshEdge& me = md.mesh.edge(e);
        if (me.on_boundary()) continue;
        if (md.decomposition.subdomain_of(me.tri[0]) != md.decomposition.subdomain_of(me.tri[1])) continue;
        const Vec2 d = md.mesh.vertex(me.v[1]) - md.mesh.vertex(me.v[0]);
        const Vec2 n{d.y, -d.x};
        const Point p = md.mesh.edge_midpoint(e) + 0.1 * d;
        EXPECT_NEAR(dot(sp->evaluate(me.tri[0], p, q) - sp->evaluate(me.tri[1], p, q), n), 0.0, 1e-12);
    }
}

TEST(CorrectorSpace, RejectsIncompatibleOrMisalignedMeshes) {
    const auto r = build_rect_grid_decomposition(1, 1, 0.5, CellType::triangle);
    const auto bad = r.coarse.with_dirichlet_faces(0);
    EXPECT_THROW(build_corrector_space(r.mesh, r.decomposition, bad), std::invalid_argument);

    const auto md = build_lshape_mesh(1.0 / 3.0);
    EXPECT_THROW(build_corrector_space(md.mesh, md.decomposition, 0.5), std::invalid_argument);
    EXPECT_THROW(build_corrector_space(md.mesh, md.decomposition, CoarseMesh::from_polygons({}, {})),
                 std::invalid_argument);
}

TEST(Residuals, ConstantFluxWithoutSource) {
    const auto md = build_lshape_mesh(0.25);
    BrokenFluxField y(md.mesh, md.decomposition);
    for (int k = 0; k < 3; ++k)
        for (Vec2& n : y.nodal(k)) n = {1.5, -0.5};
    const auto r = constraint_residuals(y, constant(0.0));
    for (double x : r.equilibration) EXPECT_NEAR(x, 0.0, 1e-14);
    for (double x : r.jump) EXPECT_NEAR(x, 0.0, 1e-14);
}

TEST(Residuals, ZeroFluxUnitSource) {
    const auto md = build_lshape_mesh(0.25);
    const BrokenFluxField y(md.mesh, md.decomposition);
    const auto r = constraint_residuals(y, constant(1.0));
    for (double x : r.equilibration) EXPECT_NEAR(x, 1.0, 1e-14);
    for (double x : r.jump) EXPECT_EQ(x, 0.0);
    EXPECT_EQ(r.f_scale, 1.0);
    EXPECT_NEAR(r.normalized(), 0.5, 1e-14);
}

TEST(Corrector, RestoresAdmissibilityOfAveragedFlux) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = manufactured_lshape_problem();
    const auto v = solve_global(md.mesh, p);
    const auto y0 = average_gradient(v, md.decomposition, p.a());
    const auto before = constraint_residuals(y0, p.source());
    EXPECT_GT(before.normalized(), 1e-4);

    const auto c = majorant_constants(md.mesh, md.decomposition, p);
    for (double H : {0.25, 0.5, 1.0}) {
        const auto sp = build_corrector_space(md.mesh, md.decomposition, H);
        const auto sol = solve_corrector(y0, v, p, *sp, corrector_weights({}, c));
        EXPECT_FALSE(sol.used_schur_path);
        EXPECT_LT(sol.constraint_residual, 1e-12);
        const auto y = corrected_flux(y0, sp, sol.coefficients);
        EXPECT_LE(constraint_residuals(y, p.source()).normalized(), 1e-10) << "H=" << H;
    }
}

TEST(Corrector, SchurPathMatchesDensePath) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = manufactured_lshape_problem();
    const auto v = solve_global(md.mesh, p);
    const auto y0 = average_gradient(v, md.decomposition, p.a());
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.25);
    const auto w = corrector_weights({}, majorant_constants(md.mesh, md.decomposition, p));
    const auto dense = solve_corrector(y0, v, p, *sp, w);
    SaddleSolveOptions opt;
    opt.dense_limit = 0;
    opt.tolerance = 1e-14;
    const auto schur = solve_corrector(y0, v, p, *sp, w, opt);
    ASSERT_TRUE(schur.used_schur_path);
    for (std::size_t i = 0; i < dense.coefficients.size(); ++i)
        EXPECT_NEAR(dense.coefficients[i], schur.coefficients[i], 1e-9);
}

TEST(Corrector, ExactEquilibratedFluxNeedsNoCorrection) {
    const auto md = build_lshape_mesh(0.25);
    auto u = [](const Point& q) { return q.x + 2.0 * q.y; };
    const EllipticProblem p(Mat2::identity(), constant(0.0), u);
    const auto v = ScalarFieldP1::interpolate(md.mesh, u);
    const auto y0 = average_gradient(v, md.decomposition, p.a());
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.5);
    const auto sol = solve_corrector(y0, v, p, *sp, unit_weights(md.decomposition));
    for (double x : sol.coefficients) EXPECT_NEAR(x, 0.0, 1e-12);
    for (double x : sol.multipliers) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(Corrector, SingleCellUnitSource) {
    const auto r = build_rect_grid_decomposition(1, 1, 0.5, CellType::quad);
    const EllipticProblem p(Mat2::identity(), constant(1.0), constant(0.0));
    const ScalarFieldP1 v(r.mesh);
    const BrokenFluxField y0(r.mesh, r.decomposition);
    const auto sp = build_corrector_space(r.mesh, r.decomposition, r.coarse);
    const auto sol = solve_corrector(y0, v, p, *sp, unit_weights(r.decomposition));
    const auto y = corrected_flux(y0, sp, sol.coefficients);
    double div_integral = 0.0;
    for (Index t = 0; t < r.mesh.num_triangles(); ++t) div_integral += r.mesh.area(t) * y.divergence(t);
    EXPECT_NEAR(div_integral, -1.0, 1e-12);
    EXPECT_NEAR(constraint_residuals(y, p.source()).equilibration[0], 0.0, 1e-12);
}

TEST(Corrector, ZeroCorrectorLeavesFluxUnchanged) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = manufactured_lshape_problem();
    const auto v = solve_global(md.mesh, p);
    const auto y0 = average_gradient(v, md.decomposition, p.a());
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.5);
    const auto y = corrected_flux(y0, sp, std::vector<double>(static_cast<std::size_t>(sp->size()), 0.0));
    for (Index t = 0; t < md.mesh.num_triangles(); ++t) {
        const Vec2 a = y.value(t, {0.2, 0.3, 0.5}), b = y0.value(t, {0.2, 0.3, 0.5});
        EXPECT_EQ(a, b);
        EXPECT_EQ(y.divergence(t), y0.divergence(t));
    }
    EXPECT_THROW(corrected_flux(y0, sp, {1.0}), std::invalid_argument);
}

TEST(Corrector, ObjectiveMatchesQuadraticForm) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = manufactured_lshape_problem();
    const auto v = solve_global(md.mesh, p);
    const auto y0 = average_gradient(v, md.decomposition, p.a());
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.5);
    const CorrectorWeights w{3.0, 0.6, 6.0, {0.7, 0.7}};
    const auto sys = assemble_corrector_system(y0, v, p, *sp, w);
    std::vector<double> q(static_cast<std::size_t>(sp->size()));
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = 0.01 * std::cos(double(i));
    const auto hq = sys.h * std::span<const double>(q);
    const double predicted = corrector_objective(y0, v, p, w) + dot(q, hq) - 2.0 * dot(sys.g, q);
    EXPECT_NEAR(corrector_objective(corrected_flux(y0, sp, q), v, p, w), predicted, 1e-12 * (1.0 + predicted));
}

TEST(Corrector, RejectsBadWeights) {
    const auto md = build_lshape_mesh(0.5);
    const auto p = manufactured_lshape_problem();
    const ScalarFieldP1 v(md.mesh);
    const BrokenFluxField y0(md.mesh, md.decomposition);
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.5);
    EXPECT_THROW(solve_corrector(y0, v, p, *sp, {0.0, 1.0, 1.0, {1.0, 1.0}}), std::invalid_argument);
    EXPECT_THROW(solve_corrector(y0, v, p, *sp, {1.0, 1.0, 1.0, {1.0}}), std::invalid_argument);
}

TEST(LocalImprovement, NoOpWhenCorrectorIsFine) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = manufactured_lshape_problem();
    const auto v = solve_global(md.mesh, p);
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.25);
    const auto y = corrected_flux(average_gradient(v, md.decomposition, p.a()), sp,
                                  std::vector<double>(static_cast<std::size_t>(sp->size()), 0.0));
    EXPECT_FALSE(improve_corrector_locally(y, v, p, unit_weights(md.decomposition)).has_value());
}

TEST(LocalImprovement, CoarseCorrectorImprovesAndStaysAdmissible) {
    const auto md = build_lshape_mesh(1.0 / 32);
    const auto p = manufactured_lshape_problem();
    const auto v = run_schwarz(md.mesh, md.decomposition, p).iterate;
    const auto c = majorant_constants(md.mesh, md.decomposition, p);
    const auto w = corrector_weights({}, c);
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 0.25);
    const auto y0 = average_gradient(v, md.decomposition, p.a());
    auto y = corrected_flux(y0, sp, solve_corrector(y0, v, p, *sp, w).coefficients);
    const double before = evaluate_majorant(v, y, p, c).M2_sq;
    const double j_before = corrector_objective(y, v, p, w);
    auto upd = improve_corrector_locally(y, v, p, w);
    ASSERT_TRUE(upd.has_value());
    y.add_corrector(std::move(*upd));
    const auto rep = evaluate_majorant(v, y, p, c);
    EXPECT_LT(rep.M2_sq, before);
    EXPECT_LT(corrector_objective(y, v, p, w), j_before);
    EXPECT_LE(constraint_residuals(y, p.source()).normalized(), 1e-10);
}

TEST(CorrectorCsv, HeaderAndRows) {
    const auto md = build_lshape_mesh(1.0);
    const auto sp = build_corrector_space(md.mesh, md.decomposition, 1.0);
    std::vector<double> q(static_cast<std::size_t>(sp->size()), 0.25);
    std::ostringstream os;
    write_corrector_csv(os, *sp, q);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "edge_id,side,coefficient");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 15);
}
