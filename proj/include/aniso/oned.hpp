#pragma once

// One-dimensional theory: generalized half-period pi_p, the first Dirichlet
// eigenvalue of the p-Laplacian, asymmetric constants for a t^+ + b t^-,
// their extremizers, discrete Rayleigh quotients, Euler-Lagrange residuals and
// a brute-force minimization oracle.

#include "anisotropy.hpp"
#include "errors.hpp"
#include "lbfgs.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace aniso
{

struct Interval
{
    double left = 0.0;
    double right = 1.0;

    Interval() = default;
    Interval(double l, double r) : left(l), right(r)
    {
        if (!std::isfinite(l) || !std::isfinite(r) || !(l < r))
            throw EmptyInterval("interval requires finite left < right");
    }

    double length() const { return right - left; }
    double midpoint() const { return 0.5 * (left + right); }
    double half_length() const { return 0.5 * (right - left); }
};

inline void check_exponent(double p)
{
    if (!std::isfinite(p) || !(p > 1.0))
        throw BadExponent("exponent p must be a finite number > 1");
}

/// First generalized half-period pi_p = 2 pi / (p sin(pi / p)).
inline double pi_p(double p)
{
    check_exponent(p);
    return kTwoPi / (p * std::sin(kPi / p));
}

/// First Dirichlet eigenvalue of the p-Laplacian on an interval of length L:
/// (p - 1) (pi_p / L)^p.
inline double lambda_1p(double p, const Interval &interval)
{
    return (p - 1.0) * std::pow(pi_p(p) / interval.length(), p);
}

/// Optimal constant for the one-sided energy (u'^+)^p: 2^{-p} lambda_1p.
inline double lambda_plus(double p, const Interval &interval) { return std::pow(2.0, -p) * lambda_1p(p, interval); }

/// Optimal constant for the energy (a u'^+ + b u'^-)^p: ((a + b) / 2)^p lambda_1p.
inline double lambda_ab(double p, const Interval &interval, double a, double b)
{
    if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw BadParams("lambda_ab requires finite a >= 0 and b >= 0");
    if (a == 0.0 && b == 0.0)
        throw ZeroAnisotropy("lambda_ab requires a + b > 0");
    return std::pow(0.5 * (a + b), p) * lambda_1p(p, interval);
}

inline double lambda_ab(double p, const Interval &interval, const Anisotropy1D &h)
{
    return lambda_ab(p, interval, h.a, h.b);
}

// ---------------------------------------------------------------------------
// shooting

namespace detail
{

// State (u, w) with w = |u'|^{p-2} u'; the system u' = |w|^{p'-2} w,
// w' = -(p - 1) |u|^{p-2} u is the generalized sine equation.
struct ShootingSystem
{
    double p;
    double q; // conjugate exponent p' = p / (p - 1)

    explicit ShootingSystem(double p_) : p(p_), q(p_ / (p_ - 1.0)) {}

    static double signed_pow(double x, double e) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), e), x); }

    std::array<double, 2> rhs(const std::array<double, 2> &s) const
    {
        return {signed_pow(s[1], q - 1.0), -(p - 1.0) * signed_pow(s[0], p - 1.0)};
    }

    std::array<double, 2> step(const std::array<double, 2> &s, double h) const
    {
        auto add = [](const std::array<double, 2> &a, const std::array<double, 2> &b, double c) {
            return std::array<double, 2>{a[0] + c * b[0], a[1] + c * b[1]};
        };
        const auto k1 = rhs(s);
        const auto k2 = rhs(add(s, k1, 0.5 * h));
        const auto k3 = rhs(add(s, k2, 0.5 * h));
        const auto k4 = rhs(add(s, k3, h));
        return {s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
    }

    // series start near the origin: u = s - s^{p+1} / (p (p + 1)), w = 1 - (p - 1) s^p / p
    std::array<double, 2> start(double s0) const
    {
        return {s0 - std::pow(s0, p + 1.0) / (p * (p + 1.0)), 1.0 - (p - 1.0) * std::pow(s0, p) / p};
    }
};

} // namespace detail

struct ShootingResult
{
    double half_period = 0.0; ///< first zero of the generalized sine
    double eigenvalue = 0.0;  ///< implied lambda_1p on the requested interval
    int steps = 0;
};

/// Independent route to pi_p: integrate the generalized sine equation by RK4
/// from u(0) = 0, u'(0) = 1 until u' vanishes (bisection on the last step);
/// the half-period is twice that abscissa. Lambda follows by scaling.
inline ShootingResult shooting_lambda_1p(double p, const Interval &interval, int steps_per_unit = 20000)
{
    check_exponent(p);
    const detail::ShootingSystem sys(p);
    const double h = 1.0 / steps_per_unit;
    const double s0 = std::min(1e-3, h);
    double s = s0;
    auto state = sys.start(s0);
    int steps = 0;
    for (;;)
    {
        const auto next = sys.step(state, h);
        ++steps;
        if (next[1] <= 0.0)
        {
            double lo = 0.0, hi = h;
            for (int k = 0; k < 80; ++k)
            {
                const double mid = 0.5 * (lo + hi);
                if (sys.step(state, mid)[1] > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            s += 0.5 * (lo + hi);
            break;
        }
        state = next;
        s += h;
        if (steps > 100 * steps_per_unit)
            throw NonConvergence("shooting did not reach the maximum of the generalized sine", s);
    }
    ShootingResult out;
    out.half_period = 2.0 * s;
    out.steps = steps;
    out.eigenvalue = (p - 1.0) * std::pow(out.half_period / interval.length(), p);
    return out;
}

// ---------------------------------------------------------------------------
// principal eigenfunction

namespace detail
{

// Generalized sine on [0, pi_p / 2] tabulated by the shooting integration,
// with slopes, for cubic Hermite interpolation.
struct SinPTable
{
    double p = 2.0;
    double quarter = 0.0; // pi_p / 2
    double step = 0.0;
    std::vector<double> u;
    std::vector<double> du;

    double value(double s) const
    {
        // odd about 0, even about pi_p / 2, vanishing at pi_p
        s = std::clamp(s, 0.0, 2.0 * quarter);
        if (s > quarter)
            s = 2.0 * quarter - s;
        const double pos = s / step;
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= u.size() - 1)
            return u.back();
        const double t = pos - static_cast<double>(i);
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        return h00 * u[i] + h10 * step * du[i] + h01 * u[i + 1] + h11 * step * du[i + 1];
    }

    double slope(double s) const
    {
        s = std::clamp(s, 0.0, 2.0 * quarter);
        double sign = 1.0;
        if (s > quarter)
        {
            s = 2.0 * quarter - s;
            sign = -1.0;
        }
        const double pos = s / step;
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= u.size() - 1)
            return sign * du.back();
        const double t = pos - static_cast<double>(i);
        const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
        const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
        return sign * (d00 * u[i] / step + d10 * du[i] + d01 * u[i + 1] / step + d11 * du[i + 1]);
    }
};

inline std::shared_ptr<const SinPTable> build_sin_p_table(double p, int nodes = 200001)
{
    const ShootingSystem sys(p);
    auto table = std::make_shared<SinPTable>();
    table->p = p;
    table->quarter = 0.5 * pi_p(p);
    table->step = table->quarter / (nodes - 1);
    table->u.resize(nodes);
    table->du.resize(nodes);

    // integrate with substeps so the tabulated grid lands exactly on pi_p / 2
    const int sub = 8;
    const double h = table->step / sub;
    const double s0 = std::min(1e-4, h);
    auto state = sys.start(s0);
    double s = s0;
    table->u[0] = 0.0;
    table->du[0] = 1.0;
    for (int i = 1; i < nodes; ++i)
    {
        const double target = i * table->step;
        while (s < target - 1e-15)
        {
            const double dh = std::min(h, target - s);
            state = sys.step(state, dh);
            s += dh;
        }
        table->u[i] = state[0];
        table->du[i] = ShootingSystem::signed_pow(std::max(state[1], 0.0), sys.q - 1.0);
    }
    table->du[nodes - 1] = 0.0;
    return table;
}

inline std::shared_ptr<const SinPTable> sin_p_table(double p)
{
    static std::mutex mutex;
    static std::map<double, std::shared_ptr<const SinPTable>> cache;
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(p);
        if (it != cache.end())
            return it->second;
    }
    auto table = build_sin_p_table(p);
    std::lock_guard<std::mutex> lock(mutex);
    return cache.emplace(p, std::move(table)).first->second;
}

// Gauss-Legendre nodes and weights on [-1, 1].
template <int N>
struct Gauss;

template <>
struct Gauss<5>
{
    static constexpr std::array<double, 5> x{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                             0.9061798459386640};
    static constexpr std::array<double, 5> w{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                             0.4786286704993665, 0.2369268850561891};
};

template <class F>
double gauss_integrate(F &&f, double a, double b, int panels)
{
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k)
    {
        const double c = a + (k + 0.5) * h;
        for (int j = 0; j < 5; ++j)
            total += Gauss<5>::w[j] * f(c + 0.5 * h * Gauss<5>::x[j]);
    }
    return 0.5 * h * total;
}

} // namespace detail

/// Positive first Dirichlet eigenfunction of the p-Laplacian on an interval,
/// normalized in L^p.
class PrincipalEigenfunction
{
public:
    PrincipalEigenfunction(double p, const Interval &interval) : p_(p), interval_(interval)
    {
        check_exponent(p);
        table_ = detail::sin_p_table(p);
        const double pp = 2.0 * table_->quarter;
        // ||sin_p||_p^p over one half-period, by composite Gauss quadrature
        const double mass = detail::gauss_integrate(
            [&](double s) { return std::pow(table_->value(s), p); }, 0.0, pp, 2000);
        reference_mass_ = mass;
        scale_ = std::pow(pp / (interval.length() * mass), 1.0 / p);
    }

    double p() const { return p_; }
    const Interval &interval() const { return interval_; }

    /// Quadrature value of the integral of sin_p^p over (0, pi_p).
    double reference_mass() const { return reference_mass_; }

    double operator()(double t) const
    {
        if (t <= interval_.left || t >= interval_.right)
            return 0.0;
        return scale_ * table_->value(arg(t));
    }

    double derivative(double t) const
    {
        if (t < interval_.left || t > interval_.right)
            return 0.0;
        return scale_ * table_->slope(arg(t)) * 2.0 * table_->quarter / interval_.length();
    }

    double max_value() const { return scale_; }

private:
    double arg(double t) const { return (t - interval_.left) / interval_.length() * 2.0 * table_->quarter; }

    double p_;
    Interval interval_;
    std::shared_ptr<const detail::SinPTable> table_;
    double scale_ = 1.0;
    double reference_mass_ = 0.0;
};

inline PrincipalEigenfunction phi_p(double p, const Interval &interval) { return PrincipalEigenfunction(p, interval); }

// ---------------------------------------------------------------------------
// extremizers

enum class Branch
{
    U, ///< nonnegative extremizer
    V  ///< nonpositive extremizer
};

/// Extremizer of the asymmetric Poincare inequality for a t^+ + b t^- on an
/// interval: a rescaled, piecewise-dilated copy of phi_p with its extremum at
/// the breakpoint.
class PiecewiseEigenfunction
{
public:
    PiecewiseEigenfunction(double p, const Interval &interval, double a, double b, double c, Branch branch)
        : phi_(p, Interval(-interval.half_length(), interval.half_length())), interval_(interval), a_(a), b_(b),
          c_(c), branch_(branch)
    {
        if (!(a >= 0.0) || !(b >= 0.0) || !(a + b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
            throw BadParams("extremizer requires a, b >= 0 with a + b > 0");
        if (!(c > 0.0) || !std::isfinite(c))
            throw BadParams("extremizer amplitude c must be positive");
        const double T = interval.half_length();
        t0_ = (a - b) / (a + b) * T;
    }

    double p() const { return phi_.p(); }
    const Interval &interval() const { return interval_; }
    double scale() const { return c_; }
    Branch branch() const { return branch_; }
    int sign() const { return branch_ == Branch::U ? 1 : -1; }

    /// Breakpoint ((a - b) / (a + b)) T, relative to the interval midpoint.
    double t0() const { return t0_; }

    /// Absolute position of the extremum of |u|.
    double breakpoint() const
    {
        return interval_.midpoint() + (branch_ == Branch::U ? t0_ : -t0_);
    }

    double operator()(double t) const
    {
        if (t < interval_.left || t > interval_.right)
            return 0.0;
        const double T = interval_.half_length();
        const double s = t - interval_.midpoint();
        if (branch_ == Branch::U)
        {
            const double k = s < t0_ ? dilation(T, T + t0_) : dilation(T, T - t0_);
            return c_ * phi_(k * (s - t0_));
        }
        const double k = s < -t0_ ? dilation(T, T - t0_) : dilation(T, T + t0_);
        return -c_ * phi_(k * (s + t0_));
    }

    double derivative(double t) const
    {
        if (t < interval_.left || t > interval_.right)
            return 0.0;
        const double T = interval_.half_length();
        const double s = t - interval_.midpoint();
        if (branch_ == Branch::U)
        {
            const double k = s < t0_ ? dilation(T, T + t0_) : dilation(T, T - t0_);
            return c_ * k * phi_.derivative(k * (s - t0_));
        }
        const double k = s < -t0_ ? dilation(T, T - t0_) : dilation(T, T + t0_);
        return -c_ * k * phi_.derivative(k * (s + t0_));
    }

    /// Nodal samples on n equispaced nodes including both endpoints.
    std::vector<double> sample(int n) const
    {
        std::vector<double> out(static_cast<std::size_t>(n));
        const double h = interval_.length() / (n - 1);
        for (int i = 0; i < n; ++i)
            out[i] = (*this)(i == n - 1 ? interval_.right : interval_.left + i * h);
        return out;
    }

private:
    // piece scaling T / (T +- t0); a vanishing denominator only occurs at the
    // endpoint where the one-sided extremizers sit at the maximum of phi_p
    static double dilation(double T, double denom) { return denom > 0.0 ? T / denom : 0.0; }

    PrincipalEigenfunction phi_;
    Interval interval_;
    double a_, b_, c_;
    Branch branch_;
    double t0_ = 0.0;
};

inline PiecewiseEigenfunction extremizer_ab(double p, const Interval &interval, double a, double b, double c = 1.0,
                                            Branch branch = Branch::U)
{
    check_exponent(p);
    return PiecewiseEigenfunction(p, interval, a, b, c, branch);
}

// ---------------------------------------------------------------------------
// discrete quotients

namespace detail
{

// Integral of |u|^p over a cell of width h where u is linear from u0 to u1.
inline double linear_power_integral(double u0, double u1, double h, double p)
{
    const double a0 = std::abs(u0), a1 = std::abs(u1);
    if ((u0 < 0.0) != (u1 < 0.0) && u0 != 0.0 && u1 != 0.0)
        return h * (std::pow(a0, p + 1.0) + std::pow(a1, p + 1.0)) / ((p + 1.0) * (a0 + a1));
    const double hi = std::max(a0, a1), lo = std::min(a0, a1);
    if (hi == 0.0)
        return 0.0;
    if (hi - lo > 1e-3 * hi)
        return h * (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / ((p + 1.0) * (hi - lo));
    // nearly constant: the closed form cancels, use Gauss on the smooth integrand
    double total = 0.0;
    for (int j = 0; j < 5; ++j)
    {
        const double t = 0.5 * (1.0 + Gauss<5>::x[j]);
        total += Gauss<5>::w[j] * std::pow(a0 + t * (a1 - a0), p);
    }
    return 0.5 * h * total;
}

// d/du0 and d/du1 of the integral above.
inline void linear_power_gradient(double u0, double u1, double h, double p, double &g0, double &g1)
{
    g0 = g1 = 0.0;
    double zero = 1.0;
    const bool crossing = (u0 < 0.0) != (u1 < 0.0) && u0 != 0.0 && u1 != 0.0;
    if (crossing)
        zero = u0 / (u0 - u1);
    // split at the zero crossing; Gauss on each smooth part
    auto accumulate = [&](double ta, double tb) {
        for (int j = 0; j < 5; ++j)
        {
            const double t = ta + (tb - ta) * 0.5 * (1.0 + Gauss<5>::x[j]);
            const double u = u0 + t * (u1 - u0);
            const double f = p * std::pow(std::abs(u), p - 1.0) * (u < 0.0 ? -1.0 : 1.0);
            const double w = 0.5 * (tb - ta) * Gauss<5>::w[j] * h;
            g0 += w * f * (1.0 - t);
            g1 += w * f * t;
        }
    };
    if (crossing)
    {
        accumulate(0.0, zero);
        accumulate(zero, 1.0);
    }
    else
        accumulate(0.0, 1.0);
}

} // namespace detail

struct Quotient1D
{
    double energy = 0.0;
    double mass = 0.0;
    double value() const { return energy / mass; }
};

/// Energy and mass of the piecewise-linear interpolant of nodal values on a
/// uniform grid over the interval (values include both endpoints). The
/// energy integrand (a u'^+ + b u'^-)^p is constant per cell; the mass is
/// integrated exactly for the interpolant.
inline Quotient1D rayleigh_parts_1d(double p, const Interval &interval, double a, double b,
                                    const std::vector<double> &values)
{
    check_exponent(p);
    if (values.size() < 2)
        throw ZeroProfile("profile needs at least two nodes");
    const Anisotropy1D h1(a, b);
    const double h = interval.length() / static_cast<double>(values.size() - 1);
    Quotient1D q;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
    {
        const double slope = (values[i + 1] - values[i]) / h;
        q.energy += h * std::pow(h1(slope), p);
        q.mass += detail::linear_power_integral(values[i], values[i + 1], h, p);
    }
    return q;
}

/// Discrete asymmetric Rayleigh quotient of a nodal profile.
inline double rayleigh_1d(double p, const Interval &interval, double a, double b, const std::vector<double> &values)
{
    const auto q = rayleigh_parts_1d(p, interval, a, b, values);
    if (!(q.mass > 0.0))
        throw ZeroProfile("profile is identically zero");
    return q.value();
}

// ---------------------------------------------------------------------------
// Euler-Lagrange residual

namespace detail
{

struct WeakForm1D
{
    double p, a, b;

    // derivative of H_{a,b}(s)^p / p
    double flux(double s) const
    {
        return s > 0.0 ? std::pow(a, p) * std::pow(s, p - 1.0) : -std::pow(b, p) * std::pow(-s, p - 1.0);
    }
    double reaction(double v) const { return std::pow(std::abs(v), p - 1.0) * (v < 0.0 ? -1.0 : 1.0); }
};

} // namespace detail

/// Weak residual of -(a^p [(u')^+]^{p-1} - b^p [(u')^-]^{p-1})' = lambda |u|^{p-2} u
/// for a profile given as a function, after normalizing it to unit L^p norm:
/// the sum over the n - 2 interior hat functions of a uniform grid of
/// |integral F(u') phi_i' - lambda integral |u|^{p-2} u phi_i|.
/// u' is obtained by central differences; each cell is split where u'
/// changes sign so that Gauss quadrature only sees smooth pieces.
inline double euler_lagrange_residual_1d(double p, const Interval &interval, double a, double b, double lambda,
                                         const std::function<double(double)> &profile, int n = 2000)
{
    check_exponent(p);
    if (n < 4)
        throw BadParams("residual needs at least four nodes");
    const detail::WeakForm1D form{p, a, b};
    const double L = interval.length();
    const double h = L / (n - 1);
    const double fd = 1e-6 * L;
    auto value = [&](double t) { return profile(std::clamp(t, interval.left, interval.right)); };
    auto slope = [&](double t) {
        const double lo = std::max(t - fd, interval.left), hi = std::min(t + fd, interval.right);
        return (value(hi) - value(lo)) / (hi - lo);
    };
    auto cell_pieces = [&](double x0, double x1) {
        std::vector<double> cuts{x0};
        const int probes = 8;
        double prev_t = x0 + 1e-9 * h, prev = slope(prev_t);
        for (int j = 1; j <= probes; ++j)
        {
            const double t = j == probes ? x1 - 1e-9 * h : x0 + (x1 - x0) * j / probes;
            const double cur = slope(t);
            if ((cur > 0.0) != (prev > 0.0))
            {
                double lo = prev_t, hi = t;
                for (int k = 0; k < 60; ++k)
                {
                    const double mid = 0.5 * (lo + hi);
                    if ((slope(mid) > 0.0) == (prev > 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                cuts.push_back(0.5 * (lo + hi));
            }
            prev_t = t;
            prev = cur;
        }
        cuts.push_back(x1);
        return cuts;
    };

    std::vector<double> flux_avg(static_cast<std::size_t>(n - 1), 0.0), left(flux_avg), right(flux_avg);
    double mass = 0.0;
    for (int k = 0; k + 1 < n; ++k)
    {
        const double x0 = interval.left + k * h;
        const double x1 = k + 2 == n ? interval.right : x0 + h;
        const auto cuts = cell_pieces(x0, x1);
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
        {
            const double ta = cuts[c], tb = cuts[c + 1];
            for (int j = 0; j < 5; ++j)
            {
                const double t = ta + (tb - ta) * 0.5 * (1.0 + detail::Gauss<5>::x[j]);
                const double w = 0.5 * (tb - ta) * detail::Gauss<5>::w[j];
                const double v = value(t);
                const double rel = (t - x0) / (x1 - x0);
                flux_avg[k] += w * form.flux(slope(t)) / (x1 - x0);
                left[k] += w * form.reaction(v) * (1.0 - rel);
                right[k] += w * form.reaction(v) * rel;
                mass += w * std::pow(std::abs(v), p);
            }
        }
    }
    if (!(mass > 0.0))
        throw ZeroProfile("profile is identically zero");
    // F and the reaction are both (p - 1)-homogeneous: rescale to unit norm
    const double scale = std::pow(mass, -(p - 1.0) / p);
    double total = 0.0;
    for (int i = 1; i + 1 < n; ++i)
        total += std::abs(flux_avg[i - 1] - flux_avg[i] - lambda * (right[i - 1] + left[i]));
    return scale * total;
}

/// Same residual for nodal samples (both endpoints included): the flux uses
/// the exact cell slopes of the interpolant and the reaction term integrates
/// the interpolant. Consistent to second order where u' keeps its sign; a
/// cell where u' changes sign with a != b contributes a first-order error.
inline double euler_lagrange_residual_1d(double p, const Interval &interval, double a, double b, double lambda,
                                         const std::vector<double> &values)
{
    check_exponent(p);
    const std::size_t n = values.size();
    if (n < 4)
        throw ZeroProfile("profile needs at least four nodes");
    const detail::WeakForm1D form{p, a, b};
    const auto parts = rayleigh_parts_1d(p, interval, a, b, values);
    if (!(parts.mass > 0.0))
        throw ZeroProfile("profile is identically zero");
    const double scale = std::pow(parts.mass, -(p - 1.0) / p);
    const double h = interval.length() / static_cast<double>(n - 1);
    std::vector<double> left(n - 1, 0.0), right(n - 1, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k)
        for (int j = 0; j < 5; ++j)
        {
            const double t = 0.5 * (1.0 + detail::Gauss<5>::x[j]);
            const double w = 0.5 * h * detail::Gauss<5>::w[j];
            const double r = form.reaction(values[k] + t * (values[k + 1] - values[k]));
            left[k] += w * r * (1.0 - t);
            right[k] += w * r * t;
        }
    double total = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
        const double s_left = (values[i] - values[i - 1]) / h;
        const double s_right = (values[i + 1] - values[i]) / h;
        total += std::abs(form.flux(s_left) - form.flux(s_right) - lambda * (right[i - 1] + left[i]));
    }
    return scale * total;
}

// ---------------------------------------------------------------------------
// brute-force oracle

struct Oracle1DOptions
{
    /// continuation levels for smoothing t^+ (0 = exact stage, always last)
    std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    double stage_rel_tol = 1e-7;
    double final_rel_tol = 1e-10;
    int max_iters = 50000;
};

struct Oracle1DResult
{
    double lambda = 0.0;
    std::vector<double> profile; ///< nodal values including both endpoints, unit L^p norm
    int iterations = 0;
    bool converged = false;
};

/// Minimize the discrete quotient over nodal vectors vanishing at both ends.
/// Continuation on s_delta(t) = (t + sqrt(t^2 + delta^2)) / 2 for t^+, ending
/// with the exact energy. Throws NonConvergence when the exact stage hits its
/// iteration cap.
inline Oracle1DResult oracle_minimize_1d(double p, const Interval &interval, double a, double b, int n,
                                         const Oracle1DOptions &options = {})
{
    check_exponent(p);
    if (n < 16)
        throw BadParams("oracle needs at least 16 nodes");
    const Anisotropy1D h1(a, b);
    if (h1.is_zero())
        throw ZeroAnisotropy("oracle requires a + b > 0");

    const int m = n - 2; // interior unknowns
    const double h = interval.length() / (n - 1);
    Eigen::VectorXd x(m);
    for (int i = 0; i < m; ++i)
    {
        const double t = static_cast<double>(i + 1) / (n - 1);
        x[i] = std::sin(kPi * t);
    }

    std::vector<double> full(static_cast<std::size_t>(n), 0.0);
    auto expand = [&](const Eigen::VectorXd &v) {
        for (int i = 0; i < m; ++i)
            full[i + 1] = v[i];
    };

    double delta = 0.0;
    auto objective = [&](const Eigen::VectorXd &v, Eigen::VectorXd &grad) {
        expand(v);
        double energy = 0.0, mass = 0.0;
        Eigen::VectorXd ge = Eigen::VectorXd::Zero(m), gm = Eigen::VectorXd::Zero(m);
        for (int k = 0; k + 1 < n; ++k)
        {
            const double d = (full[k + 1] - full[k]) / h;
            double val, dval;
            if (delta > 0.0)
            {
                const double r = std::sqrt(d * d + delta * delta);
                const double sp = 0.5 * (d + r), sm = 0.5 * (-d + r);
                val = a * sp + b * sm;
                dval = 0.5 * a * (1.0 + d / r) - 0.5 * b * (1.0 - d / r);
            }
            else
            {
                val = h1(d);
                dval = d > 0.0 ? a : (d < 0.0 ? -b : 0.0);
            }
            const double e = std::pow(val, p);
            energy += h * e;
            const double de = val > 0.0 ? p * e / val * dval : 0.0; // d/dd of val^p
            if (k >= 1)
                ge[k - 1] -= de;
            if (k + 1 <= m)
                ge[k] += de;
            mass += detail::linear_power_integral(full[k], full[k + 1], h, p);
            double g0, g1;
            detail::linear_power_gradient(full[k], full[k + 1], h, p, g0, g1);
            if (k >= 1)
                gm[k - 1] += g0;
            if (k + 1 <= m)
                gm[k] += g1;
        }
        const double r = energy / mass;
        grad = (ge - r * gm) / mass;
        return r;
    };

    // tridiagonal (2, -1) preconditioner solved by the Thomas algorithm
    auto precondition = [&](const Eigen::VectorXd &g) {
        Eigen::VectorXd c(m), d(m);
        c[0] = -0.5;
        d[0] = g[0] / 2.0;
        for (int i = 1; i < m; ++i)
        {
            const double denom = 2.0 + c[i - 1];
            c[i] = -1.0 / denom;
            d[i] = (g[i] + d[i - 1]) / denom;
        }
        Eigen::VectorXd out(m);
        out[m - 1] = d[m - 1];
        for (int i = m - 2; i >= 0; --i)
            out[i] = d[i] - c[i] * out[i + 1];
        return Eigen::VectorXd(out * (h * h));
    };

    auto normalize = [&](Eigen::VectorXd &v) {
        expand(v);
        double mass = 0.0;
        for (int k = 0; k + 1 < n; ++k)
            mass += detail::linear_power_integral(full[k], full[k + 1], h, p);
        v /= std::pow(mass, 1.0 / p);
    };

    Oracle1DResult out;
    std::vector<double> schedule = options.deltas;
    schedule.push_back(0.0);
    LbfgsResult last;
    for (std::size_t s = 0; s < schedule.size(); ++s)
    {
        delta = schedule[s];
        LbfgsOptions lo;
        lo.max_iters = options.max_iters;
        lo.rel_tol = delta > 0.0 ? options.stage_rel_tol : options.final_rel_tol;
        last = lbfgs_minimize_quotient(x, objective, precondition, normalize, lo);
        out.iterations += last.iterations;
    }
    out.converged = last.converged;
    out.lambda = last.value;
    expand(x);
    out.profile = full;
    if (!out.converged)
        throw NonConvergence("1D oracle reached its iteration cap", out.lambda);
    return out;
}

} // namespace aniso
