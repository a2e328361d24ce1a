#pragma once

// Acceptance suite: ten numbered criteria, each a list of named checks with
// the measured numbers. Shared by the acceptance test binary and the
// `verify` command of the CLI.

#include "anisotropy.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "oned.hpp"
#include "parallel.hpp"
#include "solver2d.hpp"
#include "spectral.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace aniso::acceptance
{

struct Check
{
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CriterionResult
{
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    double seconds = 0.0;

    bool passed() const
    {
        if (checks.empty())
            return false;
        for (const auto &c : checks)
            if (!c.passed)
                return false;
        return true;
    }
};

namespace detail
{

inline std::string fmt(const char *f, double a)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline std::string sci(double v) { return fmt("%.3e", v); }
inline std::string fix(double v) { return fmt("%.6g", v); }
inline std::string pct(double v) { return fmt("%.3f%%", 100.0 * v); }

inline double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

class Stopwatch
{
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double uniform(std::mt19937_64 &rng, double lo, double hi)
{
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Vec2 random_vector(std::mt19937_64 &rng, double r = 1.0)
{
    return {uniform(rng, -r, r), uniform(rng, -r, r)};
}

/// Append a check; `run` returns {passed, detail}. Exceptions fail the check.
inline void add(CriterionResult &out, const std::string &name, const std::function<std::pair<bool, std::string>()> &run)
{
    Check c;
    c.name = name;
    try
    {
        std::tie(c.passed, c.detail) = run();
    }
    catch (const std::exception &e)
    {
        c.passed = false;
        c.detail = std::string("exception: ") + e.what();
    }
    out.checks.push_back(std::move(c));
}

inline Polygon l_shape() { return Polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}); }

// sideways U: two horizontal arms, open to the right
inline Polygon u_shape() { return Polygon({{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 2}, {3, 2}, {3, 3}, {0, 3}}); }

/// Solver settings used by the 2D criteria unless stated otherwise.
inline SolverOptions solver_options(int resolution, double p = 2.0)
{
    SolverOptions o;
    o.p = p;
    o.resolution = resolution;
    o.seed = 1;
    return o;
}

} // namespace detail

// ---------------------------------------------------------------------------
// shared, lazily computed results

/// Results that several criteria use; computed on first request.
class Context
{
public:
    struct OracleRun
    {
        Oracle1DResult result;
        double seconds = 0.0;
    };

    const OracleRun &oracle(double p, double a, double b, int n)
    {
        const auto key = std::make_tuple(p, a, b, n);
        auto it = oracles_.find(key);
        if (it == oracles_.end())
        {
            detail::Stopwatch sw;
            OracleRun run;
            run.result = oracle_minimize_1d(p, Interval(-1.0, 1.0), a, b, n);
            run.seconds = sw.seconds();
            it = oracles_.emplace(key, std::move(run)).first;
        }
        return it->second;
    }

    static constexpr double kPs[3] = {1.5, 2.0, 3.0};
    static constexpr double kPairs[4][2] = {{1, 1}, {1, 0}, {3, 1}, {2, 5}};

private:
    std::map<std::tuple<double, double, double, int>, OracleRun> oracles_;
};

// ---------------------------------------------------------------------------
// criterion 1: closed form vs oracle

inline CriterionResult criterion_1(Context &ctx)
{
    CriterionResult out{1, "1D closed form vs discrete oracle", {}, 0.0};
    for (double p : Context::kPs)
        for (const auto &ab : Context::kPairs)
        {
            const double a = ab[0], b = ab[1];
            detail::add(out, "p=" + detail::fix(p) + " (a,b)=(" + detail::fix(a) + "," + detail::fix(b) + ")", [&] {
                const auto &run = ctx.oracle(p, a, b, 2000);
                const double closed = std::pow(0.5 * (a + b), p) * lambda_1p(p, Interval(-1.0, 1.0));
                const double gap = detail::rel(run.result.lambda, closed);
                const bool ok = gap <= 5e-3 && run.seconds < 5.0;
                return std::make_pair(ok, "oracle " + detail::fix(run.result.lambda) + " closed " + detail::fix(closed) +
                                              " gap " + detail::pct(gap) + " time " + detail::fmt("%.2f s", run.seconds));
            });
        }
    return out;
}

// ---------------------------------------------------------------------------
// criterion 2: halving law

inline CriterionResult criterion_2(Context &ctx)
{
    CriterionResult out{2, "one-sided constant is 2^-p lambda_1p", {}, 0.0};
    for (double p : Context::kPs)
    {
        detail::add(out, "formula p=" + detail::fix(p), [&] {
            const Interval I(-1.0, 1.0);
            const double plus = lambda_plus(p, I);
            const double halved = std::pow(2.0, -p) * lambda_1p(p, I);
            const double via_ab = lambda_ab(p, I, 1.0, 0.0);
            const bool ok = plus == halved && detail::rel(via_ab, plus) <= 1e-15;
            return std::make_pair(ok, "lambda_plus " + detail::fix(plus) + " exact match " + (plus == halved ? "yes" : "no") +
                                          ", lambda_ab(1,0) rel diff " + detail::sci(detail::rel(via_ab, plus)));
        });
        detail::add(out, "oracle p=" + detail::fix(p), [&] {
            const auto &run = ctx.oracle(p, 1.0, 0.0, 2000);
            const double plus = lambda_plus(p, Interval(-1.0, 1.0));
            const double gap = detail::rel(run.result.lambda, plus);
            return std::make_pair(gap <= 5e-3, "oracle " + detail::fix(run.result.lambda) + " gap " + detail::pct(gap));
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// criterion 3: extremizers

inline CriterionResult criterion_3(Context &)
{
    CriterionResult out{3, "extremizer quotient, breakpoint and Euler-Lagrange residual", {}, 0.0};
    const Interval I(-1.0, 1.0);
    for (double p : Context::kPs)
        for (const auto &ab : Context::kPairs)
        {
            const double a = ab[0], b = ab[1];
            detail::add(out, "p=" + detail::fix(p) + " (a,b)=(" + detail::fix(a) + "," + detail::fix(b) + ")", [&] {
                const auto u = extremizer_ab(p, I, a, b);
                const double closed = lambda_ab(p, I, a, b);
                const int n = 4000;
                const auto values = u.sample(n);
                const double q = rayleigh_1d(p, I, a, b, values);
                const double qgap = detail::rel(q, closed);
                std::size_t arg = 0;
                for (std::size_t i = 0; i < values.size(); ++i)
                    if (std::abs(values[i]) > std::abs(values[arg]))
                        arg = i;
                const double h = I.length() / (n - 1);
                const double t_arg = I.left + h * static_cast<double>(arg);
                const double t0 = (a - b) / (a + b) * I.half_length();
                const double off = std::abs(t_arg - t0) / h;
                const double res = euler_lagrange_residual_1d(p, I, a, b, closed, [&](double t) { return u(t); });
                const bool ok = qgap <= 1e-3 && off <= 1.0 && res <= 1e-4;
                return std::make_pair(ok, "quotient gap " + detail::pct(qgap) + ", argmax " + detail::fix(off) +
                                              " cells from t0=" + detail::fix(t0) + ", residual " + detail::sci(res));
            });
        }
    return out;
}

// ---------------------------------------------------------------------------
// criterion 4: Euclidean benchmark

inline CriterionResult criterion_4(Context &)
{
    CriterionResult out{4, "Euclidean benchmark on square and 2x1 rectangle", {}, 0.0};
    const double pi2 = kPi * kPi;
    const std::vector<std::tuple<std::string, Polygon, double>> cases{
        {"unit square", unit_square(), 2.0 * pi2}, {"rectangle 2x1", rectangle(0, 0, 2, 1), 1.25 * pi2}};
    for (const auto &[name, domain, exact] : cases)
        detail::add(out, name + " resolution 128", [&, name = name, exact = exact, domain = domain] {
            detail::Stopwatch sw;
            const auto r = minimize(Anisotropy2D::euclidean(), domain, detail::solver_options(128));
            const double t = sw.seconds();
            const double gap = detail::rel(r.lambda_estimate, exact);
            return std::make_pair(gap <= 0.02 && t < 60.0, "lambda " + detail::fix(r.lambda_estimate) + " exact " +
                                                               detail::fix(exact) + " gap " + detail::pct(gap) +
                                                               " time " + detail::fmt("%.2f s", t));
        });
    return out;
}

// ---------------------------------------------------------------------------
// criterion 5: degenerate anisotropies reduce to one dimension

struct LineFixture
{
    std::string name;
    Polygon domain;
    Anisotropy2D h;
    double p = 2.0;
};

inline std::vector<LineFixture> line_kernel_fixtures()
{
    return {
        {"axis rectangle 2x1, (2,1) vertical", rectangle(0, 0, 2, 1), Anisotropy2D::asymmetric_linear(2, 1, kPi / 2)},
        {"rectangle 2x1 rotated 30deg, aligned (2,1)", rectangle(0, 0, 2, 1).rotated(Rotation(kPi / 6)),
         Anisotropy2D::asymmetric_linear(2, 1, kPi / 6 + kPi / 2)},
        {"rectangle 1x3 rotated 0.4, oblique (1,3)", rectangle(0, 0, 1, 3).rotated(Rotation(0.4)),
         Anisotropy2D::asymmetric_linear(1, 3, 0.7)},
        {"square, (3,1) vertical", unit_square(), Anisotropy2D::asymmetric_linear(3, 1, kPi / 2)},
        {"square, segment polygon at 1.3 rad, p=3", unit_square(),
         Anisotropy2D::support_polygon({-0.5 * unit_vector(1.3), 1.5 * unit_vector(1.3)}), 3.0},
        {"L-shape, (1,1) vertical", detail::l_shape(), Anisotropy2D::asymmetric_linear(1, 1, kPi / 2)},
    };
}

inline CriterionResult criterion_5(Context &)
{
    CriterionResult out{5, "solver matches lambda_ab(0, L) for line kernels", {}, 0.0};
    for (const auto &f : line_kernel_fixtures())
        detail::add(out, f.name, [&] {
            const auto red = reduce_degenerate(f.h, f.p, f.domain);
            const auto r = minimize(f.h, f.domain, detail::solver_options(32, f.p));
            const double gap = detail::rel(r.lambda_estimate, red.lambda);
            return std::make_pair(gap <= 0.02, "L " + detail::fix(red.L) + " (a,b)=(" + detail::fix(red.normal_form.a) +
                                                   "," + detail::fix(red.normal_form.b) + ") closed " +
                                                   detail::fix(red.lambda) + " solver " +
                                                   detail::fix(r.lambda_estimate) + " gap " + detail::pct(gap));
        });
    return out;
}

// ---------------------------------------------------------------------------
// criterion 6: continuity in the anisotropy

inline CriterionResult criterion_6(Context &)
{
    CriterionResult out{6, "regularized frequencies decrease to the limit", {}, 0.0};
    const std::vector<std::pair<std::string, Anisotropy2D>> cases{
        {"y^+ on the square", Anisotropy2D::asymmetric_linear(1, 0, kPi / 2)},
        {"3y^+ + y^- on the square", Anisotropy2D::asymmetric_linear(3, 1, kPi / 2)}};
    for (const auto &[name, h] : cases)
        detail::add(out, name, [&, h = h] {
            const auto opt = detail::solver_options(32);
            std::vector<double> lam;
            for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
                lam.push_back(minimize(regularized(h, eps), unit_square(), opt).lambda_estimate);
            const double limit = minimize(h, unit_square(), opt).lambda_estimate;
            bool monotone = true;
            for (std::size_t k = 1; k < lam.size(); ++k)
                monotone = monotone && lam[k] <= lam[k - 1] * (1.0 + 1e-9);
            const double gap = detail::rel(lam.back(), limit);
            std::string seq;
            for (double l : lam)
                seq += detail::fix(l) + " ";
            return std::make_pair(monotone && gap <= 0.01,
                                  "sequence " + seq + "-> " + detail::fix(limit) + ", last gap " + detail::pct(gap));
        });
    return out;
}

// ---------------------------------------------------------------------------
// criterion 7: sandwich campaign and extremal anisotropies

inline CriterionResult criterion_7(Context &)
{
    CriterionResult out{7, "sandwich bounds on random anisotropies, extremal cases", {}, 0.0};
    const auto fixtures = campaign_fixtures();
    const auto opt = detail::solver_options(24);
    CampaignResult campaign;
    detail::add(out, "20 random anisotropies x 5 convex fixtures", [&] {
        campaign = sandwich_campaign(2.0, 20, 20240607, fixtures, opt);
        double lo = 1e300, hi = 0.0;
        for (const auto &e : campaign.entries)
        {
            const auto &b = campaign.bounds[e.fixture];
            lo = std::min(lo, e.lambda / b.lambda_min);
            hi = std::max(hi, e.lambda / b.lambda_max);
        }
        return std::make_pair(campaign.violations == 0 && campaign.entries.size() == 100,
                              std::to_string(campaign.entries.size()) + " solves, " +
                                  std::to_string(campaign.violations) + " violations; min lambda/Lambda_min " +
                                  detail::fix(lo) + ", max lambda/Lambda_max " + detail::fix(hi));
    });
    detail::add(out, "Euclidean is the largest frequency on every fixture", [&] {
        bool ok = !campaign.entries.empty();
        for (const auto &e : campaign.entries)
            ok = ok && e.lambda <= campaign.bounds[e.fixture].lambda_max * (1.0 + 1e-9);
        return std::make_pair(ok, "every random lambda <= Euclidean lambda on the same mesh");
    });
    detail::add(out, "Euclidean attains Lambda_max = 2 pi^2 on the square", [&] {
        const double exact = 2.0 * kPi * kPi;
        const double l = campaign.bounds.empty() ? 0.0 : campaign.bounds[0].lambda_max;
        const double gap = detail::rel(l, exact);
        return std::make_pair(gap <= 0.02, "lambda " + detail::fix(l) + " gap " + detail::pct(gap));
    });
    detail::add(out, "half-plane anisotropy along the longest chord attains Lambda_min on the square", [&] {
        const auto b = lambda_min_bound(2.0, unit_square());
        const auto h0 = optimal_design_anisotropy(width_curve(unit_square()));
        const auto study = refine_study(h0, unit_square(), detail::solver_options(16), {16, 32, 64});
        bool above = true;
        for (const auto &r : study.reports)
            above = above && r.lambda_estimate >= b.lambda_min;
        const double gap = detail::rel(study.extrapolated, b.lambda_min);
        std::string seq;
        for (const auto &r : study.reports)
            seq += detail::fix(r.lambda_estimate) + " ";
        return std::make_pair(above && study.monotone && gap <= 0.02,
                              "resolutions 16/32/64: " + seq + "(all >= Lambda_min " + detail::fix(b.lambda_min) +
                                  "), extrapolated " + detail::fix(study.extrapolated) + " with fitted order " +
                                  detail::fix(study.observed_order) + ", gap " + detail::pct(gap));
    });
    return out;
}

// ---------------------------------------------------------------------------
// criterion 8: bounds on the square

inline CriterionResult criterion_8(Context &)
{
    CriterionResult out{8, "Lambda_min of the unit square from the width curve", {}, 0.0};
    detail::add(out, "Lambda_min, argmax and design flag", [] {
        const auto b = lambda_min_bound(2.0, unit_square());
        const double exact = kPi * kPi / 8.0;
        const double gap = detail::rel(b.lambda_min, exact);
        const double dtheta = std::abs(b.argmin_theta - kPi / 4.0);
        const bool ok = gap <= 1e-3 && dtheta <= 1e-3 && b.design_attained;
        return std::make_pair(ok, "Lambda_min " + detail::fix(b.lambda_min) + " gap " + detail::sci(gap) + ", argmax " +
                                      detail::fix(b.argmin_theta) + " (off by " + detail::sci(dtheta) +
                                      "), attained " + (b.design_attained ? "yes" : "no"));
    });
    return out;
}

// ---------------------------------------------------------------------------
// criterion 9: divergence on thin rectangles

inline CriterionResult criterion_9(Context &)
{
    CriterionResult out{9, "frequencies grow on thin unit-area rectangles", {}, 0.0};
    DivergenceTable table;
    detail::add(out, "closed-form column, y^+, p = 2", [&] {
        table = divergence_experiment(Anisotropy2D::asymmetric_linear(1, 0, kPi / 2), 2.0, {1, 2, 4, 8}, {1, 2, 4},
                                      detail::solver_options(32));
        bool ok = true;
        std::string d;
        for (std::size_t i = 0; i < table.rows.size(); ++i)
        {
            const auto &r = table.rows[i];
            const double k = r.k;
            ok = ok && detail::rel(r.closed_form_bound, kPi * kPi * k * k / 4.0) <= 1e-14;
            ok = ok && std::abs(r.area - 1.0) <= 1e-12;
            if (i > 0)
                ok = ok && r.ratio == 4.0;
            d += "k=" + std::to_string(r.k) + ": " + detail::fix(r.closed_form_bound) +
                 (i > 0 ? " ratio " + detail::fmt("%.17g", r.ratio) : std::string()) + "; ";
        }
        return std::make_pair(ok, d);
    });
    detail::add(out, "solver column increases and respects the bound", [&] {
        bool ok = !table.rows.empty();
        double previous = 0.0;
        std::string d;
        for (const auto &r : table.rows)
        {
            if (!r.solver_estimate)
                continue;
            ok = ok && *r.solver_estimate > previous && *r.solver_estimate >= r.closed_form_bound;
            previous = *r.solver_estimate;
            d += "k=" + std::to_string(r.k) + ": " + detail::fix(*r.solver_estimate) + "; ";
        }
        return std::make_pair(ok, d);
    });
    detail::add(out, "ratio 2^p for p = 3 and a polygon anisotropy", [&] {
        std::mt19937_64 rng(99);
        const auto h = random_anisotropy(rng);
        const auto t = divergence_experiment(h, 3.0, {1, 2, 4, 8, 16});
        double worst = 0.0;
        for (std::size_t i = 1; i < t.rows.size(); ++i)
            worst = std::max(worst, detail::rel(t.rows[i].ratio, 8.0));
        return std::make_pair(worst <= 1e-14, "largest relative deviation " + detail::sci(worst));
    });
    return out;
}

// ---------------------------------------------------------------------------
// criterion 10: invariants and properties of every module

namespace props
{

inline std::vector<std::pair<std::string, Anisotropy2D>> anisotropy_zoo()
{
    std::mt19937_64 rng(5);
    const auto poly = random_anisotropy(rng);
    return {{"support polygon", poly},
            {"asymmetric linear", Anisotropy2D::asymmetric_linear(2.0, 0.5, 0.7)},
            {"half-plane", Anisotropy2D::asymmetric_linear(1.0, 0.0, 2.0)},
            {"euclidean", Anisotropy2D::euclidean(1.5)},
            {"split E1 q=3", Anisotropy2D::split_pnorm(1.0, 3.0, SplitVariant::E1)},
            {"split E1 q=1", Anisotropy2D::split_pnorm(1.0, 1.0, SplitVariant::E1)},
            {"split E3a", Anisotropy2D::split_pnorm(1.0, 2.0, SplitVariant::E3a, 0.5, 0.3)},
            {"split E3b q=1.5", Anisotropy2D::split_pnorm(2.0, 1.5, SplitVariant::E3b)},
            {"segment", Anisotropy2D::support_polygon({{0.0, -1.0}, {0.0, 2.0}})},
            {"regularized polygon", regularized(poly, 0.3)}};
}

inline void anisotropy_checks(CriterionResult &out)
{
    const auto zoo = anisotropy_zoo();
    detail::add(out, "anisotropy: nonnegative, convex, 1-homogeneous (1e4 trials per kind)", [&] {
        std::mt19937_64 rng(11);
        double worst_conv = 0.0, worst_hom = 0.0;
        bool nonneg = true;
        for (const auto &[name, h] : zoo)
        {
            const double n = norm_sup(h);
            for (int i = 0; i < 10000; ++i)
            {
                const Vec2 v = detail::random_vector(rng, 3.0), w = detail::random_vector(rng, 3.0);
                const double t = detail::uniform(rng, 0.0, 1.0), s = detail::uniform(rng, 0.01, 10.0);
                const double scale = n * (v.norm() + w.norm()) + 1e-300;
                worst_conv = std::max(worst_conv, (h(t * v + (1 - t) * w) - t * h(v) - (1 - t) * h(w)) / scale);
                worst_hom = std::max(worst_hom, std::abs(h(s * v) - s * h(v)) / (s * n * v.norm() + 1e-300));
                nonneg = nonneg && h(v) >= 0.0;
            }
        }
        return std::make_pair(nonneg && worst_conv <= 1e-12 && worst_hom <= 1e-12,
                              "worst convexity excess " + detail::sci(worst_conv) + ", homogeneity error " +
                                  detail::sci(worst_hom));
    });
    detail::add(out, "anisotropy: (P1) scaling", [&] {
        std::mt19937_64 rng(12);
        bool exact = true;
        double worst = 0.0;
        for (const auto &[name, h] : zoo)
            for (int i = 0; i < 1000; ++i)
            {
                const Vec2 v = detail::random_vector(rng, 3.0);
                const double two_k = std::ldexp(1.0, static_cast<int>(rng() % 9) - 4);
                exact = exact && scaled(h, two_k)(v) == two_k * h(v);
                const double alpha = detail::uniform(rng, 0.1, 10.0);
                const double ref = alpha * h(v);
                worst = std::max(worst, std::abs(scaled(h, alpha)(v) - ref) / (alpha * norm_sup(h) * v.norm()));
            }
        return std::make_pair(exact && worst <= 1e-15, std::string("bitwise exact for powers of two: ") +
                                                           (exact ? "yes" : "no") + "; general factors within " +
                                                           detail::sci(worst) + " relative");
    });
    detail::add(out, "anisotropy: rotation consistency H(Av) = (H o A)(v)", [&] {
        std::mt19937_64 rng(13);
        double worst = 0.0;
        for (const auto &[name, h] : zoo)
            for (int i = 0; i < 1000; ++i)
            {
                const Rotation a(detail::uniform(rng, -kPi, kPi));
                const auto ha = rotated(h, a);
                const Vec2 v = detail::random_vector(rng, 3.0);
                worst = std::max(worst, std::abs(ha(v) - h(a.apply(v))) / (norm_sup(h) * v.norm()));
            }
        return std::make_pair(worst <= 1e-12, "worst relative difference " + detail::sci(worst));
    });
    detail::add(out, "anisotropy: dual is an involution", [&] {
        std::mt19937_64 rng(14);
        double worst = 0.0;
        bool counts = true;
        for (int i = 0; i < 200; ++i)
        {
            const auto h = random_anisotropy(rng);
            const auto back = dual(dual(h));
            const auto &p = std::get<SupportPolygon>(h.representation()).vertices;
            const auto &q = std::get<SupportPolygon>(back.representation()).vertices;
            if (p.size() != q.size())
            {
                counts = false;
                continue;
            }
            for (const auto &x : p)
            {
                double best = 1e300;
                for (const auto &y : q)
                    best = std::min(best, (x - y).norm());
                worst = std::max(worst, best);
            }
        }
        return std::make_pair(counts && worst <= 1e-9, "200 random polygons, worst vertex distance " + detail::sci(worst));
    });
    detail::add(out, "anisotropy: normal form reproduces H", [&] {
        std::mt19937_64 rng(15);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i)
        {
            const double a = detail::uniform(rng, 0.1, 3.0), b = i % 3 == 0 ? 0.0 : detail::uniform(rng, 0.1, 3.0);
            const double th = detail::uniform(rng, 0.0, kTwoPi);
            const Vec2 n = unit_vector(th);
            const auto h = i % 2 ? Anisotropy2D::asymmetric_linear(a, b, th)
                                 : Anisotropy2D::support_polygon({a * n, -b * n});
            const auto nf = rotation_normal_form(h);
            for (int k = 0; k < 1000; ++k)
            {
                const Vec2 v = detail::random_vector(rng, 2.0);
                const double model = nf.a * std::max(v.y(), 0.0) + nf.b * std::max(-v.y(), 0.0);
                worst = std::max(worst, std::abs(h(nf.rotation.apply(v)) - model) / (std::max(a, b) * v.norm()));
            }
        }
        return std::make_pair(worst <= 1e-9, "1e5 samples over 100 anisotropies, worst " + detail::sci(worst));
    });
    detail::add(out, "anisotropy: regularization lies in [H, H + sqrt(eps)|v|]", [&] {
        std::mt19937_64 rng(16);
        bool ok = true;
        for (const auto &[name, h] : zoo)
            for (double eps : {1e-1, 1e-3, 1e-6})
            {
                const auto r = regularized(h, eps);
                for (int i = 0; i < 1000; ++i)
                {
                    const Vec2 v = detail::random_vector(rng, 3.0);
                    const double d = r(v) - h(v);
                    ok = ok && d >= 0.0 && d <= std::sqrt(eps) * v.norm() * (1.0 + 1e-12);
                }
            }
        return std::make_pair(ok, "3e4 samples");
    });
    detail::add(out, "anisotropy: kernel class matches the zero set", [&] {
        std::mt19937_64 rng(17);
        bool ok = true;
        std::string cats;
        for (const auto &[name, h] : zoo)
        {
            const auto k = kernel_classify(h);
            cats += std::string(category_name(k.category)) + " ";
            const double n = norm_sup(h);
            for (int i = 0; i < 2000; ++i)
            {
                const double ang = detail::uniform(rng, 0.0, kTwoPi);
                const double val = h(unit_vector(ang));
                if (k.contains_direction(ang))
                    ok = ok && val <= 1e-10 * n;
                if (!k.contains_direction(ang, 1e-6))
                    ok = ok && val > 0.0;
            }
            // the reported boundary rays themselves
            if (k.category != KernelClass::Category::ZeroOnly)
                ok = ok && h(unit_vector(k.first)) <= 1e-10 * n;
        }
        return std::make_pair(ok, "categories: " + cats);
    });
}

inline void oned_checks(CriterionResult &out, Context &ctx)
{
    const Interval I(-1.0, 1.0);
    detail::add(out, "1D: lambda_ab = ((a+b)/2)^p lambda_ab(1,1) and symmetric, bitwise", [&] {
        std::mt19937_64 rng(21);
        bool ok = true;
        for (int i = 0; i < 10000; ++i)
        {
            const double p = detail::uniform(rng, 1.1, 5.0), a = detail::uniform(rng, 0.0, 4.0),
                         b = detail::uniform(rng, 0.0, 4.0);
            ok = ok && lambda_ab(p, I, a, b) == std::pow(0.5 * (a + b), p) * lambda_ab(p, I, 1.0, 1.0);
            ok = ok && lambda_ab(p, I, a, b) == lambda_ab(p, I, b, a);
        }
        return std::make_pair(ok, "1e4 random (p, a, b)");
    });
    detail::add(out, "1D: extremizer for (b,a) is the reflection of the one for (a,b)", [&] {
        std::mt19937_64 rng(22);
        double worst_u = 0.0, worst_v = 0.0;
        for (double p : Context::kPs)
            for (const auto &ab : {std::pair{3.0, 1.0}, std::pair{2.0, 5.0}, std::pair{1.0, 1.0}})
            {
                const auto u = extremizer_ab(p, I, ab.first, ab.second);
                const auto w = extremizer_ab(p, I, ab.second, ab.first);
                const auto v = extremizer_ab(p, I, ab.first, ab.second, 1.0, Branch::V);
                for (int k = 0; k < 1200; ++k)
                {
                    const double t = detail::uniform(rng, -1.0, 1.0);
                    worst_u = std::max(worst_u, std::abs(w(t) - u(-t)));
                    worst_v = std::max(worst_v, std::abs(v(t) + u(-t)));
                }
            }
        return std::make_pair(worst_u <= 1e-9 && worst_v <= 1e-9,
                              "u_(b,a)(t) = u_(a,b)(-t) within " + detail::sci(worst_u) +
                                  "; v_(a,b)(t) = -u_(a,b)(-t) within " + detail::sci(worst_v));
    });
    detail::add(out, "1D: oracle never beats the closed form", [&] {
        bool ok = true;
        double tightest = 1e300;
        for (double p : Context::kPs)
            for (const auto &ab : Context::kPairs)
                for (int n : {64, 2000})
                {
                    const double closed = lambda_ab(p, I, ab[0], ab[1]);
                    const double l = ctx.oracle(p, ab[0], ab[1], n).result.lambda;
                    ok = ok && l >= closed * (1.0 - 5.0 / n) && l >= closed * (1.0 - 1e-9);
                    tightest = std::min(tightest, l / closed - 1.0);
                }
        return std::make_pair(ok, "smallest oracle/closed - 1 = " + detail::sci(tightest));
    });
    detail::add(out, "1D: extremizer quotient at 2000 nodes, breakpoint law", [&] {
        bool ok = true;
        double worst = 0.0;
        for (double p : Context::kPs)
            for (const auto &ab : Context::kPairs)
            {
                const double a = ab[0], b = ab[1];
                const auto u = extremizer_ab(p, I, a, b);
                const int n = 2000;
                const auto values = u.sample(n);
                worst = std::max(worst, detail::rel(rayleigh_1d(p, I, a, b, values), lambda_ab(p, I, a, b)));
                const double h = 2.0 / (n - 1), t0 = u.t0();
                std::size_t arg = 0;
                for (std::size_t i = 0; i < values.size(); ++i)
                    if (values[i] > values[arg])
                        arg = i;
                ok = ok && std::abs(-1.0 + h * static_cast<double>(arg) - t0) <= h;
                if (b > 0.0)
                    for (double s : {-0.999, -0.5, 0.0, 0.5, 0.999})
                    {
                        const double t = t0 + (s < 0 ? (t0 + 1.0) : (1.0 - t0)) * s;
                        if (std::abs(t - t0) > 1e-3)
                            ok = ok && (t < t0 ? u.derivative(t) > 0.0 : u.derivative(t) < 0.0);
                    }
            }
        return std::make_pair(ok && worst <= 1e-3, "worst quotient gap " + detail::pct(worst));
    });
    detail::add(out, "1D: monotone under interval inclusion", [&] {
        std::mt19937_64 rng(23);
        bool ok = true;
        for (int i = 0; i < 10000; ++i)
        {
            const double l = detail::uniform(rng, -2.0, 0.0), r = detail::uniform(rng, 0.1, 2.0);
            const double sl = detail::uniform(rng, l, 0.0), sr = detail::uniform(rng, 0.05, r);
            const double p = detail::uniform(rng, 1.2, 4.0), a = detail::uniform(rng, 0.1, 3.0),
                         b = detail::uniform(rng, 0.0, 3.0);
            ok = ok && lambda_ab(p, Interval(sl, sr), a, b) >= lambda_ab(p, Interval(l, r), a, b);
        }
        return std::make_pair(ok, "1e4 nested interval pairs");
    });
    detail::add(out, "1D: b = 0 extremizer and oracle boundary layer", [&] {
        const auto u = extremizer_ab(2.0, I, 1.0, 0.0);
        bool ok = u(1.0) > 0.0;
        std::string d = "u(T) = " + detail::fix(u(1.0)) + "; oracle u(T - h)/max:";
        for (int n : {250, 500, 1000})
        {
            const auto &prof = ctx.oracle(2.0, 1.0, 0.0, n).result.profile;
            double mx = 0.0;
            for (double v : prof)
                mx = std::max(mx, std::abs(v));
            const double ratio = prof[n - 2] / mx;
            ok = ok && ratio >= 0.99;
            d += " n=" + std::to_string(n) + " " + detail::fix(ratio);
        }
        return std::make_pair(ok, d);
    });
}

inline void geometry_checks(CriterionResult &out)
{
    const std::vector<std::pair<std::string, Polygon>> shapes{{"square", unit_square()},
                                                              {"pentagon", campaign_fixtures()[4].domain},
                                                              {"polygon_32", regular_polygon(32, 0.5)},
                                                              {"L-shape", detail::l_shape()},
                                                              {"U-shape", detail::u_shape()}};
    detail::add(out, "geometry: width is rotation equivariant (1e4 trials)", [&] {
        std::mt19937_64 rng(31);
        double worst = 0.0;
        for (const auto &[name, d] : shapes)
            for (int i = 0; i < 2000; ++i)
            {
                const double th = detail::uniform(rng, 0.0, kPi), ang = detail::uniform(rng, -kPi, kPi);
                const double w0 = width(d, th), w1 = width(d.rotated(Rotation(ang)), th + ang);
                worst = std::max(worst, std::abs(w0 - w1));
            }
        return std::make_pair(worst <= 1e-9, "worst difference " + detail::sci(worst));
    });
    detail::add(out, "geometry: width is monotone under inclusion", [&] {
        std::mt19937_64 rng(32);
        const std::vector<std::pair<Polygon, Polygon>> nested{
            {rectangle(0.2, 0.1, 0.9, 0.8), unit_square()},
            {regular_polygon(6, 0.45), regular_polygon(32, 0.5)},
            {detail::l_shape(), rectangle(0, 0, 2, 2)},
            {rectangle(0.1, 0.1, 0.9, 0.9), detail::u_shape()}};
        bool ok = true;
        for (const auto &[sub, super] : nested)
            for (int i = 0; i < 2500; ++i)
            {
                const double th = detail::uniform(rng, 0.0, kPi);
                ok = ok && width(sub, th) <= width(super, th) + 1e-12;
            }
        return std::make_pair(ok, "1e4 trials on 4 nested pairs");
    });
    detail::add(out, "geometry: width <= diameter, equality for convex domains", [&] {
        std::mt19937_64 rng(33);
        bool ok = true;
        for (const auto &[name, d] : shapes)
        {
            const double diam = d.diameter();
            for (int i = 0; i < 2000; ++i)
                ok = ok && width(d, detail::uniform(rng, 0.0, kPi)) <= diam + 1e-12;
        }
        for (const auto &f : campaign_fixtures())
            ok = ok && detail::rel(width_curve(f.domain).sup_value, f.domain.diameter()) <= 1e-9;
        return std::make_pair(ok, "1e4 trials; sup width = diameter on 5 convex fixtures");
    });
    detail::add(out, "geometry: vertical width equals the largest sampled slice", [&] {
        bool ok = true;
        double worst = 0.0;
        for (const auto &[name, d] : shapes)
        {
            const auto [lo, hi] = d.bounding_box();
            double best = 0.0;
            const int n = 20000;
            for (int i = 0; i < n; ++i)
                best = std::max(best, slice(d, lo.x() + (hi.x() - lo.x()) * (i + 0.5) / n).max_length());
            const double wv = width(d, kPi / 2);
            // slice lengths are Lipschitz in x; allow a few sampling steps of slack
            const double slack = 4.0 * (hi.x() - lo.x()) / n * (1.0 + d.diameter());
            ok = ok && best <= wv + 1e-12 && best >= wv - slack;
            worst = std::max(worst, std::abs(best - wv));
        }
        return std::make_pair(ok, "largest gap between sampled slices and width " + detail::sci(worst));
    });
    detail::add(out, "geometry: L(v) = L(-v) exactly", [&] {
        std::mt19937_64 rng(34);
        bool ok = true;
        for (const auto &[name, d] : shapes)
            for (int i = 0; i < 2000; ++i)
            {
                const Vec2 v = unit_vector(detail::uniform(rng, 0.0, kTwoPi));
                ok = ok && width(d, v) == width(d, Vec2(-v));
            }
        return std::make_pair(ok, "1e4 directions");
    });
}

inline void solver_checks(CriterionResult &out)
{
    std::mt19937_64 rng(41);
    const auto h = random_anisotropy(rng);
    const auto opt = detail::solver_options(24);
    const Polygon square = unit_square();
    detail::add(out, "solver: (P1) lambda(alpha H) = alpha^p lambda(H)", [&] {
        double worst = 0.0;
        for (double p : {2.0, 3.0})
        {
            auto o = opt;
            o.p = p;
            const double l1 = minimize(h, square, o).lambda_estimate;
            const double l2 = minimize(scaled(h, 2.5), square, o).lambda_estimate;
            worst = std::max(worst, detail::rel(l2, std::pow(2.5, p) * l1));
        }
        return std::make_pair(worst <= 1e-3, "worst deviation " + detail::pct(worst));
    });
    detail::add(out, "solver: (P2) smaller domain, larger frequency", [&] {
        const double inner = minimize(h, rectangle(0.1, 0.2, 0.9, 0.9), opt).lambda_estimate;
        const double outer = minimize(h, square, opt).lambda_estimate;
        return std::make_pair(inner >= outer * (1.0 - 5e-3),
                              "inner " + detail::fix(inner) + " >= outer " + detail::fix(outer));
    });
    detail::add(out, "solver: (P3) smaller anisotropy, smaller frequency", [&] {
        // G = support function of a subset of the vertices of H plus the origin
        auto verts = std::get<SupportPolygon>(h.representation()).vertices;
        verts.resize(std::max<std::size_t>(2, verts.size() - 1));
        verts.push_back(Vec2::Zero());
        const auto g = Anisotropy2D::support_polygon(verts);
        std::mt19937_64 r2(42);
        bool below = true;
        for (int i = 0; i < 10000; ++i)
        {
            const Vec2 v = detail::random_vector(r2, 2.0);
            below = below && g(v) <= h(v) + 1e-15;
        }
        const double lg = minimize(g, square, opt).lambda_estimate;
        const double lh = minimize(h, square, opt).lambda_estimate;
        return std::make_pair(below && lg <= lh * (1.0 + 5e-3),
                              "G <= H on 1e4 samples; lambda_G " + detail::fix(lg) + " <= lambda_H " + detail::fix(lh));
    });
    detail::add(out, "solver: (P4) lambda(H, Omega) = lambda(H o A, A^T Omega)", [&] {
        std::mt19937_64 r3(43);
        const Polygon omega = campaign_fixtures()[4].domain;
        const auto o = detail::solver_options(32);
        const double base = minimize(h, omega, o).lambda_estimate;
        double worst = 0.0;
        for (int i = 0; i < 3; ++i)
        {
            const Rotation a(detail::uniform(r3, -kPi, kPi));
            const double l = minimize(rotated(h, a), omega.rotated(a.inverse()), o).lambda_estimate;
            worst = std::max(worst, detail::rel(l, base));
        }
        return std::make_pair(worst <= 0.01, "3 random rotations of the pentagon, worst gap " + detail::pct(worst));
    });
    detail::add(out, "solver: descent record never increases", [&] {
        auto o = opt;
        o.record_history = true;
        Mesh mesh;
        const auto r = minimize(h, square, o, mesh).report;
        bool ok = !r.history.empty();
        for (std::size_t i = 1; i < r.history.size(); ++i)
            ok = ok && r.history[i] <= r.history[i - 1];
        return std::make_pair(ok, std::to_string(r.history.size()) + " recorded steps");
    });
    detail::add(out, "solver: estimates do not increase under refinement", [&] {
        const auto s = refine_study(h, square, opt, {12, 24, 48});
        std::string d;
        for (const auto &r : s.reports)
            d += detail::fix(r.lambda_estimate) + " ";
        return std::make_pair(s.monotone, d);
    });
    detail::add(out, "solver: identical output for 1 and 3 worker threads", [&] {
        const int saved = thread_count();
        set_thread_count(1);
        const std::string a = report_to_json(minimize(h, square, opt)).dump();
        set_thread_count(3);
        const std::string b = report_to_json(minimize(h, square, opt)).dump();
        set_thread_count(saved);
        return std::make_pair(a == b, a == b ? "byte-identical reports" : "reports differ");
    });
}

inline void spectral_checks(CriterionResult &out, Context &ctx)
{
    detail::add(out, "spectral: Lambda_min > 0 on every fixture", [&] {
        bool ok = true;
        std::string d;
        std::vector<Fixture> all = campaign_fixtures();
        all.push_back({"L-shape", detail::l_shape()});
        all.push_back({"U-shape", detail::u_shape()});
        for (const auto &f : all)
        {
            const double l = lambda_min_bound(2.0, f.domain).lambda_min;
            ok = ok && l > 0.0;
            d += f.id + " " + detail::fix(l) + "; ";
        }
        return std::make_pair(ok, d);
    });
    detail::add(out, "spectral: 1D extremes are lambda_1p and 2^-p lambda_1p", [&] {
        std::mt19937_64 rng(51);
        const Interval I(-1.0, 1.0);
        bool ok = true;
        for (int i = 0; i < 10000; ++i)
        {
            const double p = detail::uniform(rng, 1.2, 4.0);
            const double a = 1.0, b = detail::uniform(rng, 0.0, 1.0);
            const double l = i % 2 ? lambda_ab(p, I, a, b) : lambda_ab(p, I, b, a);
            const auto ib = interval_bounds(p, I);
            ok = ok && l >= ib.lambda_min && l <= ib.lambda_max;
        }
        for (double p : Context::kPs)
        {
            const auto ib = interval_bounds(p, I);
            ok = ok && detail::rel(ctx.oracle(p, 1, 1, 2000).result.lambda, ib.lambda_max) <= 5e-3;
            ok = ok && detail::rel(ctx.oracle(p, 1, 0, 2000).result.lambda, ib.lambda_min) <= 5e-3;
        }
        return std::make_pair(ok, "1e4 random pairs with max(a,b) = 1 inside the bounds; oracle attains both ends");
    });
}

} // namespace props

inline CriterionResult criterion_10(Context &ctx)
{
    CriterionResult out{10, "invariants and properties of every module", {}, 0.0};
    props::anisotropy_checks(out);
    props::oned_checks(out, ctx);
    props::geometry_checks(out);
    props::solver_checks(out);
    props::spectral_checks(out, ctx);
    return out;
}

// ---------------------------------------------------------------------------
// runner

inline CriterionResult run_criterion(int id, Context &ctx)
{
    detail::Stopwatch sw;
    CriterionResult r;
    switch (id)
    {
    case 1: r = criterion_1(ctx); break;
    case 2: r = criterion_2(ctx); break;
    case 3: r = criterion_3(ctx); break;
    case 4: r = criterion_4(ctx); break;
    case 5: r = criterion_5(ctx); break;
    case 6: r = criterion_6(ctx); break;
    case 7: r = criterion_7(ctx); break;
    case 8: r = criterion_8(ctx); break;
    case 9: r = criterion_9(ctx); break;
    case 10: r = criterion_10(ctx); break;
    default: throw BadParams("unknown acceptance criterion " + std::to_string(id));
    }
    r.seconds = sw.seconds();
    return r;
}

/// Criteria run by each named suite.
inline std::vector<int> suite_criteria(const std::string &suite)
{
    if (suite == "oned")
        return {1, 2, 3};
    if (suite == "twod")
        return {4, 5, 6};
    if (suite == "bounds")
        return {7, 8};
    if (suite == "divergence")
        return {9};
    if (suite == "properties")
        return {10};
    if (suite == "all")
        return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    throw InvalidInput("unknown suite \"" + suite + "\" (expected oned, twod, bounds, properties, divergence or all)");
}

/// Run the criteria, print one PASS/FAIL line per criterion (with indented
/// check details when `verbose`), and return whether all passed.
inline bool run_suite(const std::vector<int> &ids, std::ostream &os, bool verbose = true)
{
    Context ctx;
    bool all = true;
    for (int id : ids)
    {
        const auto r = run_criterion(id, ctx);
        all = all && r.passed();
        os << (r.passed() ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.title << " ("
           << detail::fmt("%.1f s", r.seconds) << ")\n";
        if (verbose)
            for (const auto &c : r.checks)
                os << "      [" << (c.passed ? "ok" : "FAILED") << "] " << c.name << " -- " << c.detail << "\n";
        os.flush();
    }
    return all;
}

} // namespace aniso::acceptance
