#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library routine it is used to check: widths come from a brute-force line
// sweep with its own point-in-polygon test, norms from dense angular
// sampling, pi_p from the Beta function, and so on.

#include <aniso.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle
{

using aniso::Vec2;
using Loop = std::vector<Vec2>;

constexpr double kPi = 3.14159265358979323846;

inline double uniform(std::mt19937_64 &rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec2 random_vector(std::mt19937_64 &rng, double r = 1.0) { return {uniform(rng, -r, r), uniform(rng, -r, r)}; }

/// max of h over `n` equally spaced unit vectors
inline double sampled_norm(const std::function<double(const Vec2 &)> &h, int n = 1000000)
{
    double best = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double t = 2.0 * kPi * i / n;
        best = std::max(best, h(Vec2(std::cos(t), std::sin(t))));
    }
    return best;
}

/// pi_p = 2 Gamma(1/p) Gamma(1 - 1/p) / p (Beta-function form of the
/// generalized half-period).
inline double pi_p_gamma(double p) { return 2.0 * std::tgamma(1.0 / p) * std::tgamma(1.0 - 1.0 / p) / p; }

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)> &f, double a, double b, int n = 20000)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Even-odd point-in-polygon test over all loops.
inline bool inside(const std::vector<Loop> &loops, const Vec2 &p)
{
    bool in = false;
    for (const auto &l : loops)
        for (std::size_t i = 0, j = l.size() - 1; i < l.size(); j = i++)
        {
            const Vec2 &a = l[i], &b = l[j];
            if ((a.y() > p.y()) != (b.y() > p.y()))
            {
                const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
                if (p.x() < x)
                    in = !in;
            }
        }
    return in;
}

inline std::vector<Loop> loops_of(const aniso::Polygon &poly)
{
    std::vector<Loop> out{poly.outer()};
    for (const auto &h : poly.holes())
        out.push_back(h);
    return out;
}

/// Longest connected chord on the horizontal line y = c of the given loops.
inline double horizontal_chord(const std::vector<Loop> &loops, double c)
{
    std::vector<double> xs;
    for (const auto &l : loops)
        for (std::size_t i = 0; i < l.size(); ++i)
        {
            const Vec2 &a = l[i], &b = l[(i + 1) % l.size()];
            if ((a.y() - c) * (b.y() - c) < 0.0)
                xs.push_back(a.x() + (c - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
        }
    std::sort(xs.begin(), xs.end());
    double best = 0.0, run = 0.0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k)
    {
        const double len = xs[k + 1] - xs[k];
        if (len <= 0.0)
            continue;
        if (inside(loops, Vec2(0.5 * (xs[k] + xs[k + 1]), c)))
            run += len;
        else
            run = 0.0;
        best = std::max(best, run);
    }
    return best;
}

/// Brute-force width: rotate so direction theta is horizontal and sweep
/// `n` offsets across the normal extent (plus offsets just beside every
/// vertex).
inline double sweep_width(const aniso::Polygon &poly, double theta, int n = 4000)
{
    const double c = std::cos(-theta), s = std::sin(-theta);
    std::vector<Loop> loops;
    double lo = 1e300, hi = -1e300;
    for (const auto &l : loops_of(poly))
    {
        Loop r;
        for (const auto &v : l)
        {
            r.emplace_back(c * v.x() - s * v.y(), s * v.x() + c * v.y());
            lo = std::min(lo, r.back().y());
            hi = std::max(hi, r.back().y());
        }
        loops.push_back(std::move(r));
    }
    std::vector<double> offsets;
    for (int i = 1; i < n; ++i)
        offsets.push_back(lo + (hi - lo) * i / n);
    const double eps = 1e-9 * (hi - lo);
    for (const auto &l : loops)
        for (const auto &v : l)
        {
            offsets.push_back(v.y() - eps);
            offsets.push_back(v.y() + eps);
        }
    double best = 0.0;
    for (double y : offsets)
        best = std::max(best, horizontal_chord(loops, y));
    return best;
}

/// Area of a simple loop by the shoelace formula (absolute value).
inline double loop_area(const Loop &l)
{
    double a = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i)
    {
        const Vec2 &p = l[i], &q = l[(i + 1) % l.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return std::abs(0.5 * a);
}

/// Support function of the unit ball {H <= 1} evaluated at w, from the
/// boundary points u / H(u) of `n` sampled directions.
inline double sampled_dual(const std::function<double(const Vec2 &)> &h, const Vec2 &w, int n = 200000)
{
    double best = -1e300;
    for (int i = 0; i < n; ++i)
    {
        const double t = 2.0 * kPi * i / n;
        const Vec2 u(std::cos(t), std::sin(t));
        best = std::max(best, w.dot(u) / h(u));
    }
    return best;
}

/// Central-difference gradient of h at v.
inline Vec2 numeric_gradient(const std::function<double(const Vec2 &)> &h, const Vec2 &v, double step = 1e-7)
{
    return {(h(v + Vec2(step, 0)) - h(v - Vec2(step, 0))) / (2 * step),
            (h(v + Vec2(0, step)) - h(v - Vec2(0, step))) / (2 * step)};
}

/// Discrete Dirichlet Laplacian eigenvalue on (0, L) with n interior nodes
/// and the linear-element mass matrix: lambda_1 from the closed-form
/// eigenvalues of the tridiagonal pencil.
inline double linear_fem_lambda(double L, int n)
{
    const double h = L / (n + 1);
    const double c = std::cos(kPi / (n + 1));
    return 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
}

} // namespace oracle
