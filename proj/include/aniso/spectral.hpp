#pragma once

// Spectral optimization layer: closed-form frequencies of degenerate
// anisotropies, the sharp constants Lambda^min and Lambda^max of the sandwich
// inequality, the optimal-design anisotropy, and the isoperimetric divergence
// experiment on thin rectangles.

#include "anisotropy.hpp"
#include "geometry.hpp"
#include "oned.hpp"
#include "solver2d.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace aniso
{

// ---------------------------------------------------------------------------
// degenerate anisotropies

/// Reduction of a line- or half-plane-kernel anisotropy to one dimension:
/// lambda_p^H(Omega) = lambda_p^{a,b}(0, L) with L the longest chord of
/// Omega in the direction A (0, 1).
struct DegenerateReduction
{
    NormalForm normal_form;
    double L = 0.0;
    double lambda = 0.0;
};

inline DegenerateReduction reduce_degenerate(const Anisotropy2D &h, double p, const Polygon &domain)
{
    check_exponent(p);
    DegenerateReduction out;
    out.normal_form = rotation_normal_form(h);
    out.L = L_omega(domain, out.normal_form.rotation);
    out.lambda = lambda_ab(p, Interval(0.0, out.L), out.normal_form.a, out.normal_form.b);
    return out;
}

inline double lambda_degenerate(const Anisotropy2D &h, double p, const Polygon &domain)
{
    return reduce_degenerate(h, p, domain).lambda;
}

/// The lower-extremal anisotropy (x cos t + y sin t)^+ for the direction t
/// of the longest chord.
inline Anisotropy2D optimal_design_anisotropy(const WidthCurve &curve)
{
    return Anisotropy2D::asymmetric_linear(1.0, 0.0, curve.argmax_theta);
}

// ---------------------------------------------------------------------------
// sharp constants

struct BoundsReport
{
    double p = 2.0;
    std::string domain_id;
    /// lambda_{1,p}(Omega), the Euclidean frequency (0 until computed)
    double lambda_max = 0.0;
    /// inf over theta of lambda_{1,p}(0, 2 L_theta)
    double lambda_min = 0.0;
    /// direction of the longest chord, in [0, pi)
    double argmin_theta = 0.0;
    double sup_width = 0.0;
    bool design_attained = false;
    /// solver provenance of lambda_max
    std::optional<SpectralReport> lambda_max_report;
};

/// Lambda^max = lambda_{1,p}(Omega), estimated by the solver with H = |.|.
inline SpectralReport lambda_max_report(double p, const Polygon &domain, SolverOptions opt = {})
{
    opt.p = p;
    return minimize(Anisotropy2D::euclidean(1.0), domain, opt);
}

inline double lambda_max_bound(double p, const Polygon &domain, const SolverOptions &opt = {})
{
    return lambda_max_report(p, domain, opt).lambda_estimate;
}

/// Lambda^min from the width curve and the 1D closed form. Since
/// lambda_{1,p}(0, 2L) decreases in L, the infimum over theta sits at the
/// longest chord.
inline BoundsReport lambda_min_bound(double p, const Polygon &domain, int samples = 720)
{
    check_exponent(p);
    const WidthCurve curve = width_curve(domain, samples);
    BoundsReport rep;
    rep.p = p;
    rep.sup_width = curve.sup_value;
    rep.argmin_theta = curve.argmax_theta;
    rep.design_attained = curve.attained;
    rep.lambda_min = lambda_1p(p, Interval(0.0, 2.0 * curve.sup_value));
    return rep;
}

/// Both constants of the sandwich inequality.
inline BoundsReport bounds(double p, const Polygon &domain, const SolverOptions &opt = {}, int samples = 720)
{
    BoundsReport rep = lambda_min_bound(p, domain, samples);
    rep.lambda_max_report = lambda_max_report(p, domain, opt);
    rep.lambda_max = rep.lambda_max_report->lambda_estimate;
    return rep;
}

/// One-dimensional analogue on an interval: the extremes of lambda^{a,b}
/// over max(a, b) = 1 are lambda_{1,p} (a = b) and 2^{-p} lambda_{1,p}.
struct IntervalBounds
{
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

inline IntervalBounds interval_bounds(double p, const Interval &interval)
{
    return {lambda_plus(p, interval), lambda_1p(p, interval)};
}

// ---------------------------------------------------------------------------
// sandwich check

struct SandwichReport
{
    double norm = 0.0;        ///< ||H|| of the input
    double lambda = 0.0;      ///< estimate for H / ||H||
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::string method;       ///< "solver" or "closed_form"
    double tolerance = 0.02;
};

/// Estimate the frequency of H / ||H|| and check
/// (1 - tol) Lambda^min <= lambda <= (1 + tol) Lambda^max.
/// The closed form is used only when requested and H is degenerate.
/// Throws SandwichViolation with all three numbers on failure.
inline SandwichReport sandwich_check(const Anisotropy2D &h, double p, const Polygon &domain, const BoundsReport &b,
                                     SolverOptions opt = {}, bool closed_form = false, double tol = 0.02)
{
    const double n = norm_sup(h);
    if (!(n > 0.0))
        throw ZeroAnisotropy("sandwich_check needs a nonzero anisotropy");
    if (!(b.lambda_max > 0.0) || !(b.lambda_min > 0.0))
        throw BadParams("sandwich_check needs both bounds");
    const Anisotropy2D unit = scaled(h, 1.0 / n);
    SandwichReport rep;
    rep.norm = n;
    rep.lambda_min = b.lambda_min;
    rep.lambda_max = b.lambda_max;
    rep.tolerance = tol;
    using C = KernelClass::Category;
    const auto cat = kernel_classify(unit).category;
    if (closed_form && (cat == C::Line || cat == C::HalfPlane))
    {
        rep.lambda = lambda_degenerate(unit, p, domain);
        rep.method = "closed_form";
    }
    else
    {
        opt.p = p;
        rep.lambda = minimize(unit, domain, opt).lambda_estimate;
        rep.method = "solver";
    }
    if (rep.lambda < (1.0 - tol) * rep.lambda_min || rep.lambda > (1.0 + tol) * rep.lambda_max)
        throw SandwichViolation("frequency outside the sandwich bounds", rep.lambda_min, rep.lambda, rep.lambda_max);
    return rep;
}

inline SandwichReport sandwich_check(const Anisotropy2D &h, double p, const Polygon &domain,
                                     const SolverOptions &opt = {}, bool closed_form = false, double tol = 0.02)
{
    SolverOptions o = opt;
    o.p = p;
    return sandwich_check(h, p, domain, bounds(p, domain, o), o, closed_form, tol);
}

// ---------------------------------------------------------------------------
// random anisotropies and fixtures

namespace detail
{
inline double unit_uniform(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
} // namespace detail

/// Support function of the convex hull of 3-9 uniform points in the unit
/// disk, translated so that the vertex centroid of the hull is the origin,
/// scaled to ||H|| = 1.
inline Anisotropy2D random_anisotropy(std::mt19937_64 &rng)
{
    for (;;)
    {
        const int count = 3 + static_cast<int>(rng() % 7);
        std::vector<Vec2> pts;
        for (int i = 0; i < count; ++i)
        {
            const double r = std::sqrt(detail::unit_uniform(rng));
            const double t = kTwoPi * detail::unit_uniform(rng);
            pts.push_back(r * unit_vector(t));
        }
        const auto hull = convex_hull(pts, 1e-12);
        if (hull.size() < 3)
            continue;
        Vec2 c = Vec2::Zero();
        for (const auto &q : hull)
            c += q;
        c /= static_cast<double>(hull.size());
        for (auto &q : pts)
            q -= c;
        const Anisotropy2D h = Anisotropy2D::support_polygon(pts);
        return scaled(h, 1.0 / norm_sup(h));
    }
}

struct Fixture
{
    std::string id;
    Polygon domain;
};

/// Convex domains of the sandwich campaign.
inline std::vector<Fixture> campaign_fixtures()
{
    return {
        {"square", unit_square()},
        {"rectangle_2x1", rectangle(0.0, 0.0, 2.0, 1.0)},
        {"hexagon", regular_polygon(6, 0.6)},
        {"polygon_32", regular_polygon(32, 0.5)},
        {"pentagon", Polygon({{0.0, 0.0}, {1.2, 0.1}, {1.4, 0.8}, {0.6, 1.3}, {-0.1, 0.7}})},
    };
}

struct CampaignEntry
{
    std::size_t fixture = 0;
    std::size_t anisotropy = 0;
    double lambda = 0.0;
    bool within = true;
    int iterations = 0;
};

struct CampaignResult
{
    std::vector<BoundsReport> bounds; ///< per fixture
    std::vector<CampaignEntry> entries;
    std::size_t violations = 0;
};

/// Solve every (random anisotropy, fixture) pair and compare with the
/// bounds of the fixture. Lambda^max is computed on the same meshes, so the
/// upper comparison is between discrete values of equal resolution.
inline CampaignResult sandwich_campaign(double p, std::size_t anisotropies, std::uint64_t seed,
                                        const std::vector<Fixture> &fixtures, SolverOptions opt, double tol = 0.02)
{
    opt.p = p;
    CampaignResult out;
    std::mt19937_64 rng(seed);
    std::vector<Anisotropy2D> hs;
    for (std::size_t i = 0; i < anisotropies; ++i)
        hs.push_back(random_anisotropy(rng));
    for (std::size_t f = 0; f < fixtures.size(); ++f)
    {
        BoundsReport b = bounds(p, fixtures[f].domain, opt);
        b.domain_id = fixtures[f].id;
        for (std::size_t i = 0; i < hs.size(); ++i)
        {
            CampaignEntry e;
            e.fixture = f;
            e.anisotropy = i;
            const SpectralReport r = minimize(hs[i], fixtures[f].domain, opt);
            e.lambda = r.lambda_estimate;
            e.iterations = r.iterations;
            e.within = e.lambda >= (1.0 - tol) * b.lambda_min && e.lambda <= (1.0 + tol) * b.lambda_max;
            if (!e.within)
                ++out.violations;
            out.entries.push_back(e);
        }
        out.bounds.push_back(std::move(b));
    }
    return out;
}

// ---------------------------------------------------------------------------
// isoperimetric divergence

struct DivergenceRow
{
    int k = 1;
    double area = 0.0;
    /// ||H||^p lambda^{1,0}_p(0, 1/k), a lower bound for lambda_p^H(Omega_k)
    double closed_form_bound = 0.0;
    /// closed_form_bound(k) / closed_form_bound(previous k), 0 for the first row
    double ratio = 0.0;
    std::optional<double> solver_estimate;
};

struct DivergenceTable
{
    double norm = 0.0;
    double rotation_angle = 0.0;
    std::vector<DivergenceRow> rows;
};

/// Omega_k = A(R_k), R_k = (0, k) x (0, 1/k), A from lower_bound_rotation.
inline Polygon divergence_domain(const Rotation &a, int k)
{
    if (k < 1)
        throw BadParams("divergence rectangles need k >= 1");
    return rectangle(0.0, 0.0, static_cast<double>(k), 1.0 / k).rotated(a);
}

/// Closed-form lower bounds on unit-area rectangles of aspect k^2, and
/// solver estimates for the k listed in `solve_for`.
inline DivergenceTable divergence_experiment(const Anisotropy2D &h, double p, const std::vector<int> &ks,
                                             const std::vector<int> &solve_for = {}, SolverOptions opt = {})
{
    check_exponent(p);
    const double n = norm_sup(h);
    if (!(n > 0.0))
        throw ZeroAnisotropy("divergence_experiment needs a nonzero anisotropy");
    const Rotation a = lower_bound_rotation(h);
    opt.p = p;
    DivergenceTable table;
    table.norm = n;
    table.rotation_angle = a.angle();
    for (std::size_t i = 0; i < ks.size(); ++i)
    {
        DivergenceRow row;
        row.k = ks[i];
        const Polygon omega = divergence_domain(a, row.k);
        row.area = omega.area();
        row.closed_form_bound = std::pow(n, p) * lambda_ab(p, Interval(0.0, 1.0 / row.k), 1.0, 0.0);
        if (i > 0)
            row.ratio = row.closed_form_bound / table.rows.back().closed_form_bound;
        if (std::find(solve_for.begin(), solve_for.end(), row.k) != solve_for.end())
            row.solver_estimate = minimize(h, omega, opt).lambda_estimate;
        table.rows.push_back(row);
    }
    return table;
}

} // namespace aniso
