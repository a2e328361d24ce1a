#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace aniso;

namespace
{

const double kPi2 = oracle::kPi * oracle::kPi;

Anisotropy2D y_plus() { return Anisotropy2D::asymmetric_linear(1.0, 0.0, kPi / 2); }

SolverOptions light(int resolution, double p = 2.0)
{
    SolverOptions o;
    o.p = p;
    o.resolution = resolution;
    return o;
}

/// The pyramid u(x, y) = distance to the boundary of the unit square, which
/// the crossed grid of even resolution represents exactly.
DiscreteField pyramid(const Mesh &m)
{
    DiscreteField u(m);
    for (std::size_t v = 0; v < m.nodes.size(); ++v)
    {
        const Vec2 &x = m.nodes[v];
        u.nodal_values[v] = std::max(0.0, std::min({x.x(), 1.0 - x.x(), x.y(), 1.0 - x.y()}));
    }
    return u;
}

} // namespace

// ---------------------------------------------------------------------------
// meshes

TEST(Mesh, SquareIsFullyCoveredByCrossedGrid)
{
    const Mesh m = build_mesh(unit_square(), 64);
    EXPECT_EQ(64u * 64u * 4u, m.triangles.size());
    EXPECT_EQ(65u * 65u + 64u * 64u, m.nodes.size());
    EXPECT_EQ(63u * 63u + 64u * 64u, m.free_count());
    EXPECT_NEAR(1.0, m.coverage_ratio(), 1e-12);
    EXPECT_NEAR(1.0 / 64, m.h, 1e-15);
    double area = 0.0;
    for (double a : m.cell_areas)
        area += a;
    EXPECT_NEAR(1.0, area, 1e-12);
}

TEST(Mesh, DiskCoverageApproachesOne)
{
    const Polygon disk = regular_polygon(64, 0.5, Vec2(0.5, 0.5));
    const Mesh m = build_mesh(disk, 64);
    EXPECT_GE(m.coverage_ratio(), 0.98);
    EXPECT_LE(m.coverage_ratio(), 1.0 + 1e-12);
}

TEST(Mesh, TrianglesLieInsideTheDomain)
{
    const Polygon l({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
    const Mesh m = build_mesh(l, 16);
    for (const auto &t : m.triangles)
    {
        const Vec2 c = (m.nodes[t[0]] + m.nodes[t[1]] + m.nodes[t[2]]) / 3.0;
        EXPECT_TRUE(oracle::inside(oracle::loops_of(l), c));
    }
    for (std::size_t v = 0; v < m.nodes.size(); ++v)
        if (!m.interior_mask[v])
            continue;
        else
            EXPECT_GT(l.boundary_distance(m.nodes[v]), 0.0);
}

TEST(Mesh, ThinRectangleStillHasUnknowns)
{
    const Mesh m = build_mesh(rectangle(0, 0, 8, 1.0 / 8), 64);
    EXPECT_GT(m.free_count(), 0u);
    EXPECT_FALSE(m.triangles.empty());
}

TEST(Mesh, RejectsEmptyMeshes)
{
    EXPECT_THROW(build_mesh(rectangle(0, 0, 1, 0.01), 8, false), EmptyMesh);
    EXPECT_THROW(build_mesh(unit_square(), 0), BadParams);
}

// ---------------------------------------------------------------------------
// discrete energy and mass

TEST(Energy, ZeroFieldHasZeroEnergyAndMass)
{
    const Mesh m = build_mesh(unit_square(), 8);
    const DiscreteField u(m);
    EXPECT_EQ(0.0, energy(y_plus(), 2.0, u));
    EXPECT_EQ(0.0, mass(2.0, u));
    EXPECT_THROW(rayleigh_2d(y_plus(), 2.0, u), ZeroProfile);
}

TEST(Energy, LinearFieldGivesGaugeToThePTimesArea)
{
    const Mesh m = build_mesh(unit_square(), 8);
    DiscreteField u(m);
    const Vec2 g(0.6, -1.3);
    for (std::size_t v = 0; v < m.nodes.size(); ++v)
        u.nodal_values[v] = g.dot(m.nodes[v]);
    for (double p : {1.5, 2.0, 3.0})
    {
        const auto e = Anisotropy2D::euclidean(1.0);
        EXPECT_NEAR(std::pow(g.norm(), p), energy(e, p, u), 1e-12);
        const auto h = Anisotropy2D::asymmetric_linear(2.0, 0.5, 0.4);
        EXPECT_NEAR(std::pow(h(g), p), energy(h, p, u), 1e-12);
    }
}

TEST(Energy, PyramidExamples)
{
    const Mesh m = build_mesh(unit_square(), 16);
    const DiscreteField u = pyramid(m);
    // |grad u| = 1 almost everywhere; d_y u = +1 exactly on the bottom quarter
    for (double p : {1.5, 2.0, 4.0})
    {
        EXPECT_NEAR(1.0, energy(Anisotropy2D::euclidean(1.0), p, u), 1e-12);
        EXPECT_NEAR(0.25, energy(y_plus(), p, u), 1e-12);
    }
    // integral of dist^2 over the unit square is 1/24
    EXPECT_NEAR(1.0 / 24.0, mass(2.0, u), 1e-14);
    EXPECT_NEAR(24.0, rayleigh_2d(Anisotropy2D::euclidean(1.0), 2.0, u), 1e-11);
}

TEST(Energy, MassMatchesMidpointOracle)
{
    const Mesh m = build_mesh(unit_square(), 8);
    const DiscreteField u = pyramid(m);
    const double p = 3.0;
    // fine midpoint rule on the pyramid itself
    const int n = 2000;
    double ref = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            const double x = (i + 0.5) / n, y = (j + 0.5) / n;
            ref += std::pow(std::min({x, 1 - x, y, 1 - y}), p);
        }
    ref /= double(n) * n;
    EXPECT_NEAR(ref, mass(p, u), 1e-7);
}

TEST(Rayleigh, ScaleInvariantInFieldAndHomogeneousInGauge)
{
    const Mesh m = build_mesh(unit_square(), 8);
    DiscreteField u = pyramid(m), w = pyramid(m);
    for (auto &v : w.nodal_values)
        v *= -3.0;
    const auto h = Anisotropy2D::asymmetric_linear(1.0, 1.0, 0.3);
    for (double p : {1.5, 2.0, 3.0})
    {
        EXPECT_NEAR(rayleigh_2d(h, p, u), rayleigh_2d(h, p, w), 1e-10 * rayleigh_2d(h, p, u));
        EXPECT_NEAR(std::pow(2.0, p) * rayleigh_2d(h, p, u), rayleigh_2d(scaled(h, 2.0), p, u),
                    1e-10 * rayleigh_2d(scaled(h, 2.0), p, u));
    }
}

// ---------------------------------------------------------------------------
// minimization

TEST(Minimize, EuclideanSquareIsAnUpperBoundNearTwoPiSquared)
{
    const auto r = minimize(Anisotropy2D::euclidean(1.0), unit_square(), light(32));
    EXPECT_TRUE(r.converged);
    EXPECT_GE(r.lambda_estimate, 2.0 * kPi2);
    EXPECT_NEAR(2.0 * kPi2, r.lambda_estimate, 0.02 * 2.0 * kPi2);
    EXPECT_EQ(32, r.resolution);
    EXPECT_EQ("solver", r.method);
}

TEST(Minimize, LineKernelMatchesOneDimensionalConstant)
{
    const auto abs_y = Anisotropy2D::asymmetric_linear(1.0, 1.0, kPi / 2);
    const auto r1 = minimize(abs_y, unit_square(), light(32));
    EXPECT_GE(r1.lambda_estimate, kPi2 * (1 - 1e-9));
    EXPECT_NEAR(kPi2, r1.lambda_estimate, 0.02 * kPi2);
    const auto asym = Anisotropy2D::asymmetric_linear(3.0, 1.0, kPi / 2);
    const auto r2 = minimize(asym, unit_square(), light(32));
    EXPECT_GE(r2.lambda_estimate, 4 * kPi2 * (1 - 1e-9));
    EXPECT_NEAR(4 * kPi2, r2.lambda_estimate, 0.02 * 4 * kPi2);
}

TEST(Minimize, NonQuadraticExponent)
{
    // |grad u|^p >= |d_x u|^p, so the 1D constant of the unit width bounds the
    // square's frequency from below; P1 estimates decrease under nesting
    const double lower = lambda_1p(3.0, Interval(0.0, 1.0));
    const auto coarse = minimize(Anisotropy2D::euclidean(1.0), unit_square(), light(12, 3.0));
    const auto fine = minimize(Anisotropy2D::euclidean(1.0), unit_square(), light(24, 3.0));
    EXPECT_TRUE(fine.converged);
    EXPECT_GT(fine.lambda_estimate, lower);
    EXPECT_LE(fine.lambda_estimate, coarse.lambda_estimate * (1.0 + 1e-9));
}

TEST(Minimize, ExactScalingWithNestedMeshes)
{
    // [0, 2]^2 at resolution 16 is the unit square at resolution 32, scaled
    const auto h = Anisotropy2D::asymmetric_linear(2.0, 0.5, 1.0);
    const double small = minimize(h, unit_square(), light(32)).lambda_estimate;
    const double big = minimize(h, rectangle(0, 0, 2, 2), light(16)).lambda_estimate;
    EXPECT_NEAR(0.25 * small, big, 1e-6 * big);
}

TEST(Minimize, DeterministicForSeedAndThreadCount)
{
    const auto h = Anisotropy2D::split_pnorm(1.0, 3.0, SplitVariant::E1);
    SolverOptions o = light(16);
    o.seed = 42;
    set_thread_count(1);
    const auto a = minimize(h, unit_square(), o);
    set_thread_count(3);
    const auto b = minimize(h, unit_square(), o);
    set_thread_count(0);
    EXPECT_EQ(a.lambda_estimate, b.lambda_estimate);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Minimize, HistoryIsNonincreasing)
{
    SolverOptions o = light(16);
    o.record_history = true;
    const auto r = minimize(Anisotropy2D::euclidean(1.0), unit_square(), o);
    ASSERT_FALSE(r.history.empty());
    for (std::size_t i = 1; i < r.history.size(); ++i)
        EXPECT_LE(r.history[i], r.history[i - 1] * (1.0 + 1e-12));
    EXPECT_NEAR(r.lambda_estimate, r.history.back(), 1e-12 * r.lambda_estimate);
}

TEST(Minimize, FieldHasUnitNormAndReproducesEstimate)
{
    Mesh mesh;
    const auto h = Anisotropy2D::asymmetric_linear(1.0, 0.0, 0.5);
    const auto res = minimize(h, unit_square(), light(16), mesh);
    EXPECT_NEAR(1.0, mass(2.0, res.field), 1e-9);
    EXPECT_NEAR(res.report.lambda_estimate, rayleigh_2d(h, 2.0, res.field), 1e-9 * res.report.lambda_estimate);
}

TEST(Minimize, IterationCapThrowsOrReturnsPartial)
{
    SolverOptions o = light(16);
    o.continuation.clear();
    o.max_iters = 2;
    try
    {
        minimize(Anisotropy2D::euclidean(1.0), unit_square(), o);
        FAIL() << "expected NonConvergence";
    }
    catch (const NonConvergence &e)
    {
        EXPECT_GT(e.partial_value(), 2.0 * kPi2);
    }
    o.allow_partial = true;
    const auto r = minimize(Anisotropy2D::euclidean(1.0), unit_square(), o);
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.lambda_estimate, 2.0 * kPi2);
}

TEST(Minimize, RejectsZeroAnisotropyAndBadExponent)
{
    EXPECT_THROW(minimize(Anisotropy2D::zero(), unit_square(), light(8)), ZeroAnisotropy);
    EXPECT_THROW(minimize(Anisotropy2D::asymmetric_linear(0.0, 0.0, 0.0), unit_square(), light(8)), ZeroAnisotropy);
    EXPECT_THROW(minimize(Anisotropy2D::euclidean(1.0), unit_square(), light(8, 1.0)), BadExponent);
}

// ---------------------------------------------------------------------------
// refinement

TEST(RefineStudy, EuclideanSquareDecreasesTowardTheLimit)
{
    const auto s = refine_study(Anisotropy2D::euclidean(1.0), unit_square(), light(8), {8, 16, 32});
    ASSERT_EQ(3u, s.reports.size());
    EXPECT_TRUE(s.monotone);
    const double finest = s.reports.back().lambda_estimate;
    EXPECT_LT(std::abs(s.extrapolated - 2 * kPi2), std::abs(finest - 2 * kPi2));
    EXPECT_NEAR(2.0, s.observed_order, 0.3);
}

TEST(RefineStudy, RejectsBadResolutionLists)
{
    EXPECT_THROW(refine_study(Anisotropy2D::euclidean(1.0), unit_square(), light(8), {8}), BadParams);
    EXPECT_THROW(refine_study(Anisotropy2D::euclidean(1.0), unit_square(), light(8), {16, 8}), BadParams);
}
