#pragma once

// Limited-memory BFGS for scale-invariant quotients R(x) = E(x) / M(x).
// The iterate is renormalized after every accepted step; since R is
// 0-homogeneous this changes no objective value, only the working scale.

#include "errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace aniso
{

struct LbfgsOptions
{
    int memory = 10;
    int max_iters = 50000;
    /// stop when (R[k - window] - R[k]) <= rel_tol * R[k]
    double rel_tol = 1e-10;
    int window = 50;
    double armijo_c1 = 1e-4;
    int max_backtracks = 60;
    /// first trial step limited to this fraction of |x|
    double first_step_fraction = 0.1;
    /// keep the full per-iteration value record
    bool record_history = false;
};

struct LbfgsResult
{
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    /// line search could not decrease R any further (treated as converged)
    bool stalled = false;
    double final_relative_decrease = 0.0;
    std::vector<double> history;
};

/// Minimize a 0-homogeneous objective.
///
/// - `objective(x, grad)` returns R(x) and writes its gradient;
/// - `precondition(g)` returns an approximation of Hess^{-1} g (identity is fine);
/// - `normalize(x)` rescales x in place to the working normalization.
///
/// `x` holds the starting point on entry and the minimizer on exit.
template <class Objective, class Precondition, class Normalize>
LbfgsResult lbfgs_minimize_quotient(Eigen::VectorXd &x, Objective &&objective, Precondition &&precondition,
                                    Normalize &&normalize, const LbfgsOptions &opt = {})
{
    using Eigen::VectorXd;
    LbfgsResult res;
    const Eigen::Index n = x.size();
    if (n == 0)
        throw EmptyMesh("no free unknowns to optimize");

    normalize(x);
    VectorXd g(n);
    double f = objective(x, g);
    ++res.evaluations;
    if (!std::isfinite(f))
        throw ZeroProfile("objective is not finite at the starting point");

    std::deque<VectorXd> S, Y;
    std::deque<double> rho;
    std::vector<double> window_values{f};
    if (opt.record_history)
        res.history.push_back(f);

    VectorXd d(n), x_trial(n), g_trial(n);
    std::vector<double> alpha(static_cast<std::size_t>(opt.memory));
    bool fresh = true;

    for (int it = 0; it < opt.max_iters; ++it)
    {
        // two-loop recursion
        d = -g;
        const int m = static_cast<int>(S.size());
        for (int i = m - 1; i >= 0; --i)
        {
            alpha[i] = rho[i] * S[i].dot(d);
            d -= alpha[i] * Y[i];
        }
        d = precondition(d);
        if (m > 0)
        {
            const VectorXd py = precondition(Y[m - 1]);
            const double gamma = S[m - 1].dot(Y[m - 1]) / Y[m - 1].dot(py);
            d *= gamma;
        }
        for (int i = 0; i < m; ++i)
        {
            const double beta = rho[i] * Y[i].dot(d);
            d += (alpha[i] - beta) * S[i];
        }

        double slope = g.dot(d);
        if (!(slope < 0.0))
        {
            S.clear();
            Y.clear();
            rho.clear();
            d = -precondition(g);
            slope = g.dot(d);
            fresh = true;
            if (!(slope < 0.0))
            {
                res.stalled = true;
                res.converged = true;
                break;
            }
        }

        double t = 1.0;
        if (fresh)
        {
            const double ratio = opt.first_step_fraction * x.norm() / std::max(d.norm(), 1e-300);
            t = std::min(1.0, ratio);
        }

        bool accepted = false;
        double f_trial = f;
        for (int k = 0; k < opt.max_backtracks; ++k)
        {
            // the predicted decrease is below the resolution of R itself
            if (-slope * t <= 1e-15 * std::abs(f))
                break;
            x_trial = x + t * d;
            normalize(x_trial);
            f_trial = objective(x_trial, g_trial);
            ++res.evaluations;
            if (std::isfinite(f_trial) && f_trial <= f + opt.armijo_c1 * t * slope && f_trial < f)
            {
                accepted = true;
                break;
            }
            t *= 0.5;
        }

        if (!accepted)
        {
            if (!fresh)
            {
                // retry once from a steepest-descent direction
                S.clear();
                Y.clear();
                rho.clear();
                fresh = true;
                continue;
            }
            res.stalled = true;
            res.converged = true;
            break;
        }

        VectorXd s = x_trial - x;
        VectorXd y = g_trial - g;
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm() && sy > 0.0)
        {
            if (static_cast<int>(S.size()) == opt.memory)
            {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            rho.push_back(1.0 / sy);
        }
        fresh = false;
        x.swap(x_trial);
        g.swap(g_trial);
        f = f_trial;
        res.iterations = it + 1;
        window_values.push_back(f);
        if (opt.record_history)
            res.history.push_back(f);

        if (static_cast<int>(window_values.size()) > opt.window)
        {
            const double old = window_values[window_values.size() - 1 - opt.window];
            res.final_relative_decrease = (old - f) / std::abs(f);
            if (res.final_relative_decrease <= opt.rel_tol)
            {
                res.converged = true;
                break;
            }
            if (window_values.size() > static_cast<std::size_t>(4 * opt.window))
                window_values.erase(window_values.begin(), window_values.end() - opt.window - 1);
        }
    }
    res.value = f;
    return res;
}

} // namespace aniso
