#include <gtest/gtest.h>

#include <random>

#include "ddmcert/problem.hpp"

using namespace ddmcert;

namespace {

TriMesh unit_triangle() { return TriMesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, 1.0); }

EllipticProblem affine_problem(double a, double b, double c) {
    auto u = [=](const Point& p) { return a * p.x + b * p.y + c; };
    auto g = [=](const Point&) { return Vec2{a, b}; };
    return EllipticProblem(Mat2::identity(), [](const Point&) { return 0.0; }, u, ExactSolution{u, g});
}

}  // namespace

TEST(Manufactured, SourceAtCenterOfUnitSquare) {
    const auto p = manufactured_lshape_problem();
    EXPECT_NEAR(p.f({0.5, 0.5}), 2.0, 1e-14);
}

TEST(Manufactured, SourceMatchesFiniteDifferenceLaplacian) {
    const auto p = manufactured_lshape_problem();
    const auto& u = p.exact().u;
    const double d = 1e-3;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> x(0.05, 1.95), y(0.05, 0.95);
    for (int i = 0; i < 50; ++i) {
        const Point q{x(rng), y(rng)};
        const double lap = (u({q.x + d, q.y}) + u({q.x - d, q.y}) + u({q.x, q.y + d}) + u({q.x, q.y - d}) -
                            4.0 * u(q)) / (d * d);
        EXPECT_NEAR(-lap, p.f(q), 1e-5);
        const Vec2 g = p.exact().grad_u(q);
        EXPECT_NEAR(g.x, (u({q.x + d, q.y}) - u({q.x - d, q.y})) / (2 * d), 1e-6);
        EXPECT_NEAR(g.y, (u({q.x, q.y + d}) - u({q.x, q.y - d})) / (2 * d), 1e-6);
    }
}

TEST(Problem, RejectsIndefiniteCoefficient) {
    auto zero = [](const Point&) { return 0.0; };
    EXPECT_THROW(EllipticProblem(Mat2{1.0, 2.0, 1.0}, zero, zero), std::invalid_argument);
    const EllipticProblem p(Mat2{2.0, 0.0, 3.0}, zero, zero);
    EXPECT_DOUBLE_EQ(p.c_min(), 2.0);
    EXPECT_DOUBLE_EQ(p.c_max(), 3.0);
    EXPECT_FALSE(p.has_exact());
    EXPECT_THROW(p.exact(), std::logic_error);
}

TEST(Stiffness, UnitRightTriangle) {
    const TriMesh m = unit_triangle();
    const CsrMatrix k = assemble_stiffness(m, Mat2::identity());
    const double ref[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(k.at(i, j), ref[i][j], 1e-15);
    const CsrMatrix k2 = assemble_stiffness(m, 2.0 * Mat2::identity());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(k2.at(i, j), 2.0 * ref[i][j], 1e-15);
}

TEST(Stiffness, SymmetricWithZeroRowSums) {
    const auto md = build_lshape_mesh(0.25);
    const CsrMatrix k = assemble_stiffness(md.mesh, Mat2{2.0, 0.3, 1.0});
    EXPECT_TRUE(k.is_symmetric());
    const std::vector<double> ones(static_cast<std::size_t>(md.mesh.num_vertices()), 1.0);
    for (double r : k * std::span<const double>(ones)) EXPECT_NEAR(r, 0.0, 1e-13);
}

TEST(Load, ExactForLowDegreeSources) {
    const TriMesh m = unit_triangle();
    const auto one = assemble_load(m, [](const Point&) { return 1.0; });
    for (double x : one) EXPECT_NEAR(x, 1.0 / 6.0, 1e-15);
    const auto zero = assemble_load(m, [](const Point&) { return 0.0; });
    for (double x : zero) EXPECT_EQ(x, 0.0);
    const auto lin = assemble_load(m, [](const Point& p) { return p.x; });
    EXPECT_NEAR(lin[0], 1.0 / 24.0, 1e-15);
    EXPECT_NEAR(lin[1], 1.0 / 12.0, 1e-15);
    EXPECT_NEAR(lin[2], 1.0 / 24.0, 1e-15);
}

TEST(Dirichlet, ConstantDataGivesConstantField) {
    const auto md = build_lshape_mesh(0.25);
    const EllipticProblem p(Mat2::identity(), [](const Point&) { return 0.0; }, [](const Point&) { return 3.5; });
    const auto u = solve_global(md.mesh, p);
    for (double x : u.values) EXPECT_NEAR(x, 3.5, 1e-11);
}

TEST(Dirichlet, AffineDataReproducedExactly) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = affine_problem(1.0, 0.0, 0.0);
    const auto u = solve_global(md.mesh, p);
    for (Index v = 0; v < md.mesh.num_vertices(); ++v) EXPECT_NEAR(u.values[v], md.mesh.vertex(v).x, 1e-11);
    EXPECT_NEAR(energy_error(u, p), 0.0, 1e-10);
}

TEST(Dirichlet, MismatchedBoundaryDataThrows) {
    const auto md = build_lshape_mesh(0.5);
    const auto sys = assemble_system(md.mesh, manufactured_lshape_problem());
    const std::vector<Index> nodes{0, 1};
    const std::vector<double> vals{0.0};
    EXPECT_THROW(solve_dirichlet(md.mesh, sys, nodes, vals), std::invalid_argument);
}

TEST(Dirichlet, EnergyErrorIsFirstOrder) {
    const auto p = manufactured_lshape_problem();
    const auto m8 = build_lshape_mesh(1.0 / 8);
    const auto m16 = build_lshape_mesh(1.0 / 16);
    const double e8 = energy_error(solve_global(m8.mesh, p), p);
    const double e16 = energy_error(solve_global(m16.mesh, p), p);
    EXPECT_GT(e16 / e8, 0.45);
    EXPECT_LT(e16 / e8, 0.55);
}

TEST(EnergyError, InterpolantConvergesAtFirstOrder) {
    const auto p = manufactured_lshape_problem();
    double prev = 0.0;
    for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const auto md = build_lshape_mesh(h);
        const double e = energy_error(ScalarFieldP1::interpolate(md.mesh, p.exact().u), p);
        if (prev > 0.0) {
            EXPECT_GT(e / prev, 0.45);
            EXPECT_LT(e / prev, 0.55);
        }
        prev = e;
    }
}

TEST(EnergyError, AffineInterpolantIsExact) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = affine_problem(0.7, -1.3, 2.0);
    EXPECT_NEAR(energy_error(ScalarFieldP1::interpolate(md.mesh, p.exact().u), p), 0.0, 1e-13);
}

TEST(EnergyError, PerturbingInteriorNodeIncreasesError) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = affine_problem(0.7, -1.3, 2.0);
    auto v = ScalarFieldP1::interpolate(md.mesh, p.exact().u);
    const double e0 = energy_error(v, p);
    Index interior = -1;
    for (Index i = 0; i < md.mesh.num_vertices() && interior < 0; ++i)
        if (!md.mesh.is_boundary_vertex(i)) interior = i;
    ASSERT_GE(interior, 0);
    v.values[interior] += 1e-3;
    EXPECT_GT(energy_error(v, p), e0);
}

TEST(EnergyError, DiscreteDistanceMatchesForP1Difference) {
    const auto md = build_lshape_mesh(0.25);
    const auto p = affine_problem(1.0, 2.0, 0.0);
    const CsrMatrix k = assemble_stiffness(md.mesh, Mat2::identity());
    const auto a = ScalarFieldP1::interpolate(md.mesh, p.exact().u);
    const std::vector<double> zero(a.values.size(), 0.0);
    EXPECT_NEAR(discrete_energy_distance(k, a.values, zero), std::sqrt(5.0 * 3.0), 1e-12);
}

TEST(ScalarField, GradientAndValue) {
    const TriMesh m = unit_triangle();
    const ScalarFieldP1 v(m, std::vector<double>{1.0, 3.0, -1.0});
    const Vec2 g = v.gradient(0);
    EXPECT_NEAR(g.x, 2.0, 1e-15);
    EXPECT_NEAR(g.y, -2.0, 1e-15);
    EXPECT_NEAR(v.value(0, {1.0 / 3, 1.0 / 3, 1.0 / 3}), 1.0, 1e-15);
    EXPECT_THROW(ScalarFieldP1(m, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(ConstrainedSolver, EmptyFreeSetLeavesValues) {
    const TriMesh m = unit_triangle();
    ConstrainedSolver s(assemble_stiffness(m, Mat2::identity()), {});
    std::vector<double> u{1.0, 2.0, 3.0};
    const std::vector<double> load{5.0, 5.0, 5.0};
    s.solve(load, u);
    EXPECT_EQ(u, (std::vector<double>{1.0, 2.0, 3.0}));
}
