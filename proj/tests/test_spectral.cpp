#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace aniso;

namespace
{

const double kPi2 = oracle::kPi * oracle::kPi;

SolverOptions light(int resolution)
{
    SolverOptions o;
    o.resolution = resolution;
    return o;
}

} // namespace

// ---------------------------------------------------------------------------
// degenerate anisotropies

TEST(Degenerate, HalfPlaneOnTheSquare)
{
    const auto y_plus = Anisotropy2D::asymmetric_linear(1.0, 0.0, kPi / 2);
    EXPECT_NEAR(kPi2 / 4.0, lambda_degenerate(y_plus, 2.0, unit_square()), 1e-12);
    const auto r = reduce_degenerate(y_plus, 2.0, unit_square());
    EXPECT_NEAR(1.0, r.L, 1e-14);
    EXPECT_NEAR(1.0, r.normal_form.a, 1e-14);
    EXPECT_NEAR(0.0, r.normal_form.b, 1e-14);
}

TEST(Degenerate, LineKernelUsesTheChordAlongTheVaryingDirection)
{
    const Polygon rect = rectangle(0, 0, 2, 1);
    // H varies along x only: the relevant chord is the horizontal width 2
    const auto hx = Anisotropy2D::asymmetric_linear(3.0, 1.0, 0.0);
    EXPECT_NEAR(4.0 * kPi2 / 4.0, lambda_degenerate(hx, 2.0, rect), 1e-11);
    const auto hy = Anisotropy2D::asymmetric_linear(3.0, 1.0, kPi / 2);
    EXPECT_NEAR(4.0 * kPi2, lambda_degenerate(hy, 2.0, rect), 1e-11);
}

TEST(Degenerate, TiltedDirectionOnTheSquare)
{
    const double t = 0.3;
    const auto h = Anisotropy2D::asymmetric_linear(1.0, 1.0, t);
    // chord of the unit square in direction t is 1 / cos t
    const double L = 1.0 / std::cos(t);
    EXPECT_NEAR(kPi2 / (L * L), lambda_degenerate(h, 2.0, unit_square()), 1e-11);
    for (double p : {1.5, 3.0})
        EXPECT_NEAR(lambda_1p(p, Interval(0.0, L)), lambda_degenerate(h, p, unit_square()),
                    1e-11 * lambda_1p(p, Interval(0.0, L)));
}

TEST(Degenerate, AgreesWithTheSolver)
{
    const auto h = Anisotropy2D::asymmetric_linear(2.0, 0.5, kPi / 2);
    const double exact = lambda_degenerate(h, 2.0, rectangle(0, 0, 2, 1));
    const double solved = minimize(h, rectangle(0, 0, 2, 1), light(24)).lambda_estimate;
    EXPECT_GE(solved, exact * (1 - 1e-9));
    EXPECT_NEAR(exact, solved, 0.02 * exact);
}

TEST(Degenerate, RejectsNondegenerateAnisotropies)
{
    EXPECT_THROW(lambda_degenerate(Anisotropy2D::euclidean(1.0), 2.0, unit_square()), NotDegenerateLine);
}

// ---------------------------------------------------------------------------
// sharp constants

TEST(Bounds, SquareLowerConstant)
{
    const auto b = lambda_min_bound(2.0, unit_square());
    EXPECT_NEAR(kPi2 / 8.0, b.lambda_min, 1e-12);
    EXPECT_NEAR(std::sqrt(2.0), b.sup_width, 1e-12);
    EXPECT_NEAR(kPi / 4, b.argmin_theta, 1e-9);
    EXPECT_TRUE(b.design_attained);
}

TEST(Bounds, DiskLowerConstantApproachesQuarterPiSquared)
{
    const auto b = lambda_min_bound(2.0, regular_polygon(256, 0.5));
    EXPECT_NEAR(kPi2 / 4.0, b.lambda_min, 1e-4 * kPi2);
    EXPECT_GE(b.lambda_min, kPi2 / 4.0);
}

TEST(Bounds, ThinRectanglesFollowTheDiagonal)
{
    for (double k : {2.0, 4.0, 8.0})
    {
        const auto b = lambda_min_bound(2.0, rectangle(0, 0, k, 1.0 / k));
        const double d2 = k * k + 1.0 / (k * k);
        EXPECT_NEAR(kPi2 / (4.0 * d2), b.lambda_min, 1e-11) << "k = " << k;
    }
}

TEST(Bounds, GeneralExponentUsesTwiceTheLongestChord)
{
    for (double p : {1.5, 3.0})
    {
        const auto b = lambda_min_bound(p, unit_square());
        EXPECT_NEAR(lambda_1p(p, Interval(0.0, 2.0 * std::sqrt(2.0))), b.lambda_min, 1e-11);
    }
}

TEST(Bounds, UpperConstantIsTheEuclideanFrequency)
{
    const auto b = bounds(2.0, unit_square(), light(24));
    ASSERT_TRUE(b.lambda_max_report.has_value());
    EXPECT_EQ(b.lambda_max, b.lambda_max_report->lambda_estimate);
    EXPECT_GE(b.lambda_max, 2.0 * kPi2);
    EXPECT_NEAR(2.0 * kPi2, b.lambda_max, 0.03 * 2.0 * kPi2);
    EXPECT_LT(b.lambda_min, b.lambda_max);
}

TEST(Bounds, OneDimensionalAnalogue)
{
    const auto b = interval_bounds(2.0, Interval(0.0, 1.0));
    EXPECT_NEAR(kPi2 / 4.0, b.lambda_min, 1e-12);
    EXPECT_NEAR(kPi2, b.lambda_max, 1e-12);
    for (double a : {0.0, 0.3, 0.7, 1.0})
    {
        const double l = lambda_ab(2.0, Interval(0.0, 1.0), 1.0, a);
        EXPECT_GE(l, b.lambda_min * (1 - 1e-12));
        EXPECT_LE(l, b.lambda_max * (1 + 1e-12));
    }
}

TEST(Bounds, OptimalDesignIsOneSidedAlongTheLongestChord)
{
    const auto c = width_curve(rectangle(0, 0, 4, 1));
    const auto h = optimal_design_anisotropy(c);
    EXPECT_NEAR(1.0, norm_sup(h), 1e-14);
    EXPECT_NEAR(lambda_plus(2.0, Interval(0.0, std::sqrt(17.0))), lambda_degenerate(h, 2.0, rectangle(0, 0, 4, 1)),
                1e-9);
    EXPECT_NEAR(lambda_min_bound(2.0, rectangle(0, 0, 4, 1)).lambda_min,
                lambda_degenerate(h, 2.0, rectangle(0, 0, 4, 1)), 1e-9);
}

// ---------------------------------------------------------------------------
// sandwich check

TEST(Sandwich, ClosedFormHalfPlaneOnTheSquare)
{
    BoundsReport b = lambda_min_bound(2.0, unit_square());
    b.lambda_max = 2.0 * kPi2;
    const auto y_plus = Anisotropy2D::asymmetric_linear(5.0, 0.0, kPi / 2);
    const auto r = sandwich_check(y_plus, 2.0, unit_square(), b, light(16), true);
    EXPECT_EQ("closed_form", r.method);
    EXPECT_NEAR(5.0, r.norm, 1e-14);
    EXPECT_NEAR(kPi2 / 4.0, r.lambda, 1e-12);
}

TEST(Sandwich, SolverPathForRandomAnisotropy)
{
    std::mt19937_64 rng(8);
    const auto h = random_anisotropy(rng);
    const auto r = sandwich_check(scaled(h, 3.0), 2.0, unit_square(), light(16));
    EXPECT_EQ("solver", r.method);
    EXPECT_NEAR(3.0, r.norm, 1e-12);
    EXPECT_GE(r.lambda, 0.98 * r.lambda_min);
    EXPECT_LE(r.lambda, 1.02 * r.lambda_max);
}

TEST(Sandwich, ViolationCarriesAllThreeNumbers)
{
    BoundsReport b;
    b.lambda_min = 100.0;
    b.lambda_max = 200.0;
    const auto y_plus = Anisotropy2D::asymmetric_linear(1.0, 0.0, kPi / 2);
    try
    {
        sandwich_check(y_plus, 2.0, unit_square(), b, light(16), true);
        FAIL() << "expected SandwichViolation";
    }
    catch (const SandwichViolation &e)
    {
        EXPECT_EQ(100.0, e.lambda_min());
        EXPECT_EQ(200.0, e.lambda_max());
        EXPECT_NEAR(kPi2 / 4.0, e.lambda(), 1e-12);
        EXPECT_STREQ("SandwichViolation", e.kind());
    }
}

TEST(Sandwich, RejectsMissingBoundsAndZeroAnisotropy)
{
    BoundsReport empty;
    EXPECT_THROW(sandwich_check(Anisotropy2D::euclidean(1.0), 2.0, unit_square(), empty), BadParams);
    BoundsReport b;
    b.lambda_min = b.lambda_max = 1.0;
    EXPECT_THROW(sandwich_check(Anisotropy2D::zero(), 2.0, unit_square(), b), ZeroAnisotropy);
}

// ---------------------------------------------------------------------------
// random anisotropies and fixtures

TEST(RandomAnisotropy, UnitNormAndReproducible)
{
    std::mt19937_64 a(99), b(99);
    for (int i = 0; i < 20; ++i)
    {
        const auto h = random_anisotropy(a);
        const auto g = random_anisotropy(b);
        EXPECT_NEAR(1.0, oracle::sampled_norm([&](const Vec2 &v) { return h(v); }, 200000), 1e-6);
        for (double t : {0.1, 1.7, 4.0})
            EXPECT_EQ(h(unit_vector(t)), g(unit_vector(t)));
        // the origin lies inside the hull, so H is positive in every direction
        for (int k = 0; k < 16; ++k)
            EXPECT_GT(h(unit_vector(kTwoPi * k / 16)), 0.0);
    }
}

TEST(CampaignFixtures, LowerConstantsArePositive)
{
    for (const auto &f : campaign_fixtures())
    {
        const auto b = lambda_min_bound(2.0, f.domain);
        EXPECT_GT(b.lambda_min, 0.0) << f.id;
        EXPECT_NEAR(lambda_1p(2.0, Interval(0.0, 2.0 * b.sup_width)), b.lambda_min, 1e-12) << f.id;
    }
}

TEST(Campaign, SmallRunStaysInsideTheSandwich)
{
    const std::vector<Fixture> fx{{"square", unit_square()}};
    const auto r = sandwich_campaign(2.0, 3, 7, fx, light(12));
    ASSERT_EQ(3u, r.entries.size());
    ASSERT_EQ(1u, r.bounds.size());
    EXPECT_EQ(0u, r.violations);
    for (const auto &e : r.entries)
        EXPECT_TRUE(e.within);
}

// ---------------------------------------------------------------------------
// isoperimetric divergence

TEST(Divergence, ClosedFormRowsGrowLikeKSquared)
{
    const auto y_plus = Anisotropy2D::asymmetric_linear(1.0, 0.0, kPi / 2);
    const auto t = divergence_experiment(y_plus, 2.0, {1, 2, 4, 8});
    ASSERT_EQ(4u, t.rows.size());
    for (const auto &r : t.rows)
    {
        EXPECT_NEAR(1.0, r.area, 1e-12);
        EXPECT_NEAR(kPi2 * r.k * r.k / 4.0, r.closed_form_bound, 1e-9 * r.closed_form_bound);
    }
    EXPECT_EQ(0.0, t.rows[0].ratio);
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        EXPECT_NEAR(4.0, t.rows[i].ratio, 1e-12);
}

TEST(Divergence, RatioIsTwoToThePForOtherExponents)
{
    const auto h = Anisotropy2D::split_pnorm(2.0, 3.0, SplitVariant::E1);
    const auto t = divergence_experiment(h, 3.0, {1, 2});
    EXPECT_NEAR(8.0, t.rows[1].ratio, 1e-10);
    EXPECT_NEAR(std::pow(2.0, 3.0) * lambda_plus(3.0, Interval(0.0, 1.0)), t.rows[0].closed_form_bound, 1e-9);
}

TEST(Divergence, SolverEstimatesSitAboveTheBound)
{
    std::mt19937_64 rng(4);
    const auto h = random_anisotropy(rng);
    const auto t = divergence_experiment(h, 2.0, {1, 2}, {1, 2}, light(16));
    for (const auto &r : t.rows)
    {
        ASSERT_TRUE(r.solver_estimate.has_value());
        EXPECT_GE(*r.solver_estimate, r.closed_form_bound * (1 - 1e-9)) << "k = " << r.k;
    }
    EXPECT_GT(*t.rows[1].solver_estimate, *t.rows[0].solver_estimate);
}

TEST(Divergence, RejectsBadInput)
{
    EXPECT_THROW(divergence_domain(Rotation(0.0), 0), BadParams);
    EXPECT_THROW(divergence_experiment(Anisotropy2D::zero(), 2.0, {1}), ZeroAnisotropy);
}
