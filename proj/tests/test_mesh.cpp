#include <gtest/gtest.h>

#include <cmath>

#include "ddmcert/mesh.hpp"

using namespace ddmcert;

TEST(LShapeMesh, QuarterSpacingCounts) {
    const auto md = build_lshape_mesh(0.25);
    EXPECT_EQ(md.mesh.num_vertices(), 65);
    EXPECT_EQ(md.mesh.num_triangles(), 96);
    EXPECT_EQ(md.mesh.num_edges(), 160);
    EXPECT_EQ(md.mesh.euler_characteristic(), 1);
    ASSERT_EQ(md.decomposition.interfaces().size(), 2u);
    for (const auto& itf : md.decomposition.interfaces()) {
        EXPECT_EQ(itf.edges.size(), 4u);
        EXPECT_NEAR(itf.length, 1.0, 1e-14);
    }
}

TEST(LShapeMesh, UnitSpacingIsMinimal) {
    const auto md = build_lshape_mesh(1.0);
    EXPECT_EQ(md.mesh.num_vertices(), 8);
    EXPECT_EQ(md.mesh.num_triangles(), 6);
    for (const auto& itf : md.decomposition.interfaces()) EXPECT_EQ(itf.edges.size(), 1u);
}

TEST(LShapeMesh, UniformTriangleAreas) {
    const auto md = build_lshape_mesh(1.0 / 3.0);
    const double h = 1.0 / 3.0;
    for (Index t = 0; t < md.mesh.num_triangles(); ++t) EXPECT_NEAR(md.mesh.area(t), 0.5 * h * h, 1e-15);
}

TEST(LShapeMesh, RejectsNonIntegerInverseSpacing) {
    EXPECT_THROW(build_lshape_mesh(0.3), std::invalid_argument);
    EXPECT_THROW(build_lshape_mesh(0.0), std::invalid_argument);
    EXPECT_THROW(build_lshape_mesh(2.0), std::invalid_argument);
}

TEST(LShapeMesh, SubdomainsAndInterfaces) {
    const auto md = build_lshape_mesh(0.125);
    const auto& dd = md.decomposition;
    EXPECT_EQ(dd.num_subdomains(), 3);
    EXPECT_EQ(dd.num_overlaps(), 2);
    for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(dd.area(k), 1.0, 1e-13);
        EXPECT_NEAR(dd.diameter(k), std::sqrt(2.0), 1e-15);
        EXPECT_EQ(dd.triangles_of(k).size(), 128u);
    }
    // omega_1 sits above omega_2, omega_3 to its right
    for (Index t : dd.triangles_of(0)) EXPECT_GT(md.mesh.centroid(t).y, 1.0);
    for (Index t : dd.triangles_of(2)) EXPECT_GT(md.mesh.centroid(t).x, 1.0);

    const auto& i01 = dd.interfaces()[0];
    const auto& i12 = dd.interfaces()[1];
    EXPECT_EQ(i01.k, 0);
    EXPECT_EQ(i01.j, 1);
    EXPECT_NEAR(i01.normal.x, 0.0, 1e-15);
    EXPECT_NEAR(i01.normal.y, -1.0, 1e-15);
    EXPECT_EQ(i12.k, 1);
    EXPECT_EQ(i12.j, 2);
    EXPECT_NEAR(i12.normal.x, 1.0, 1e-15);
    EXPECT_NEAR(i12.normal.y, 0.0, 1e-15);
    for (std::size_t i = 0; i < i01.edges.size(); ++i) {
        EXPECT_EQ(dd.subdomain_of(i01.tri_k[i]), 0);
        EXPECT_EQ(dd.subdomain_of(i01.tri_j[i]), 1);
    }
    EXPECT_EQ(dd.interface_count(0), 1);
    EXPECT_EQ(dd.interface_count(1), 2);
    EXPECT_EQ(dd.interface_count(2), 1);
    EXPECT_TRUE(dd.satisfies_overlap_condition());
    EXPECT_TRUE(dd.overlaps_cover_domain());
}

TEST(LShapeMesh, DirichletEdgesCoverBoundary) {
    const auto md = build_lshape_mesh(0.25);
    std::size_t total = 0;
    double length = 0.0;
    for (int k = 0; k < 3; ++k) {
        total += md.decomposition.dirichlet_edges(k).size();
        for (Index e : md.decomposition.dirichlet_edges(k)) length += md.mesh.edge_length(e);
    }
    EXPECT_EQ(total, 32u);
    EXPECT_NEAR(length, 8.0, 1e-13);
}

TEST(Decomposition, OverlapConditionDetectsUncoveredInterface) {
    Layout l = lshape_layout();
    l.overlaps = {{0, 1}, {2}};
    const TriMesh mesh = build_structured_mesh(l, 0.5);
    const DomainDecomposition dd(mesh, l);
    EXPECT_FALSE(dd.satisfies_overlap_condition());
    EXPECT_TRUE(dd.overlaps_cover_domain());

    l.overlaps = {{0, 1}};
    const DomainDecomposition dd2(mesh, l);
    EXPECT_FALSE(dd2.overlaps_cover_domain());
}

TEST(CoarseMesh, RectangularGridCounts) {
    const auto tri = CoarseMesh::on_layout(rect_grid_layout(4, 3, CellType::triangle), 1.0, CellType::triangle);
    EXPECT_EQ(tri.counts().cells, 24);
    EXPECT_EQ(tri.counts().vertices, 20);
    EXPECT_EQ(tri.counts().faces, 43);
    EXPECT_EQ(tri.counts().faces, tri.counts().vertices + tri.counts().cells - 1);
    EXPECT_EQ(tri.counts().per_cell_dim, 3 * 24);

    const auto q1 = CoarseMesh::on_layout(rect_grid_layout(1, 1, CellType::quad), 1.0, CellType::quad);
    EXPECT_EQ(q1.counts().cells, 1);
    EXPECT_EQ(q1.counts().vertices, 4);
    EXPECT_EQ(q1.counts().faces, 4);

    const auto q2 = CoarseMesh::on_layout(rect_grid_layout(2, 2, CellType::quad), 1.0, CellType::quad);
    EXPECT_EQ(q2.counts().cells, 4);
    EXPECT_EQ(q2.counts().vertices, 9);
    EXPECT_EQ(q2.counts().faces, 12);
    EXPECT_EQ(q2.counts().faces_per_cell, 4);
}

TEST(CoarseMesh, FacesMatchDirectEnumeration) {
    // horizontal m(n+1) plus vertical n(m+1) grid edges
    for (int m = 1; m <= 4; ++m)
        for (int n = 1; n <= 4; ++n) {
            const auto q = CoarseMesh::on_layout(rect_grid_layout(m, n, CellType::quad), 1.0, CellType::quad);
            EXPECT_EQ(q.counts().faces, m * (n + 1) + n * (m + 1));
            EXPECT_EQ(q.counts().dirichlet_faces, 2 * (m + n));
            EXPECT_NEAR(q.total_area(), double(m * n), 1e-14);
        }
}

TEST(CoarseMesh, LShapeQuadCells) {
    const auto c = CoarseMesh::on_layout(lshape_layout(), 1.0, CellType::quad);
    EXPECT_EQ(c.counts().cells, 3);
    EXPECT_EQ(c.counts().vertices, 8);
    EXPECT_EQ(c.counts().faces, 10);
    EXPECT_EQ(c.counts().dirichlet_faces, 8);
    ASSERT_TRUE(c.has_simplices());
    EXPECT_EQ(c.simplices().num_triangles(), 6);
    Index diagonals = 0;
    for (Index e = 0; e < c.simplices().num_edges(); ++e) diagonals += !c.is_cell_face(e);
    EXPECT_EQ(diagonals, 3);
}

TEST(CoarseMesh, FromPolygons) {
    const auto c = CoarseMesh::from_polygons({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {2, 0}, {2, 1}},
                                             {{0, 1, 2, 3}, {1, 4, 5, 2}});
    EXPECT_EQ(c.counts().cells, 2);
    EXPECT_EQ(c.counts().vertices, 6);
    EXPECT_EQ(c.counts().faces, 7);
    EXPECT_EQ(c.counts().dirichlet_faces, 6);
    EXPECT_FALSE(c.has_simplices());
}

TEST(Compatibility, StripOfSixTriangles) {
    const auto strip = CoarseMesh::on_layout(rect_grid_layout(3, 1, CellType::triangle), 1.0, CellType::triangle);
    EXPECT_EQ(strip.counts().cells, 6);
    EXPECT_EQ(strip.counts().vertices, 8);
    EXPECT_EQ(strip.counts().faces, 13);
    EXPECT_FALSE(compatibility_check(strip.with_dirichlet_faces(0)).satisfied);
    EXPECT_EQ(compatibility_check(strip.with_dirichlet_faces(0)).slack, -1);
    EXPECT_TRUE(compatibility_check(strip.with_dirichlet_faces(1)).satisfied);
}

TEST(Compatibility, RegularTriangulatedGrids) {
    auto grid = [](int m, int n) {
        return CoarseMesh::on_layout(rect_grid_layout(m, n, CellType::triangle), 1.0, CellType::triangle)
            .with_dirichlet_faces(0);
    };
    EXPECT_FALSE(compatibility_check(grid(1, 1)).satisfied);
    const auto r22 = compatibility_check(grid(2, 2));
    EXPECT_TRUE(r22.satisfied);
    EXPECT_EQ(r22.slack, 0);
    for (int m = 1; m <= 5; ++m)
        for (int n = 1; n <= 5; ++n) {
            const auto r = compatibility_check(grid(m, n));
            EXPECT_EQ(r.slack, m * n - m - n) << m << "x" << n;
            EXPECT_EQ(r.satisfied, m > 1 && n > 1) << m << "x" << n;
        }
}

TEST(RectGrid, DecompositionOverlaps) {
    const auto r = build_rect_grid_decomposition(4, 2, 0.5, CellType::quad);
    EXPECT_EQ(r.decomposition.num_subdomains(), 8);
    EXPECT_EQ(r.decomposition.num_overlaps(), 2);
    EXPECT_TRUE(r.decomposition.satisfies_overlap_condition());
    EXPECT_TRUE(r.decomposition.overlaps_cover_domain());
    EXPECT_EQ(r.coarse.counts().cells, 8);

    const auto t = build_rect_grid_decomposition(1, 1, 0.5, CellType::triangle);
    EXPECT_EQ(t.decomposition.num_subdomains(), 2);
    ASSERT_EQ(t.decomposition.interfaces().size(), 1u);
    EXPECT_NEAR(t.decomposition.interfaces()[0].length, std::sqrt(2.0), 1e-14);
    EXPECT_THROW(rect_grid_layout(0, 2, CellType::quad), std::invalid_argument);
}

TEST(TriMesh, RejectsClockwiseTriangle) {
    EXPECT_THROW(TriMesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}}, 1.0), std::invalid_argument);
}

TEST(TriMesh, GridKeyLookup) {
    const auto md = build_lshape_mesh(0.5);
    for (Index t = 0; t < md.mesh.num_triangles(); ++t) EXPECT_EQ(md.mesh.find(md.mesh.grid_key(t)), t);
    EXPECT_EQ(md.mesh.find({3, 3, false}), -1);
}
