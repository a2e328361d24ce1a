#pragma once

// Polygonal domains and their chord geometry: vertical slices, directional
// widths L_theta, the width curve, L_Omega for a rotation, and the slice
// conditions characterizing attained frequencies for line-kernel anisotropies.

#include "core.hpp"
#include "errors.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aniso
{

using Loop = std::vector<Vec2>;

inline double signed_area(const Loop &loop)
{
    double a = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
        a += cross(loop[i], loop[(i + 1) % loop.size()]);
    return 0.5 * a;
}

namespace detail
{

// Proper or touching intersection of closed segments [a, b] and [c, d].
inline bool segments_intersect(const Vec2 &a, const Vec2 &b, const Vec2 &c, const Vec2 &d, double eps)
{
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)))
        return true;
    auto on_segment = [&](const Vec2 &p, const Vec2 &q, const Vec2 &r) { return segment_distance(r, p, q) <= eps; };
    return on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b);
}

inline bool loop_is_simple(const Loop &loop, double eps)
{
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const Vec2 &a = loop[i], &b = loop[(i + 1) % n];
        if ((b - a).norm() <= eps)
            return false;
        for (std::size_t j = i + 1; j < n; ++j)
        {
            // adjacent edges share exactly one endpoint
            if (j == i + 1 || (i == 0 && j == n - 1))
                continue;
            if (segments_intersect(a, b, loop[j], loop[(j + 1) % n], eps))
                return false;
        }
    }
    return true;
}

// Even-odd point-in-loop test (boundary points are unspecified).
inline bool inside_loop(const Loop &loop, const Vec2 &p)
{
    bool in = false;
    const std::size_t n = loop.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    {
        const Vec2 &a = loop[i], &b = loop[j];
        if ((a.y() > p.y()) != (b.y() > p.y()))
        {
            const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < x)
                in = !in;
        }
    }
    return in;
}

} // namespace detail

/// A simple polygon (outer loop counterclockwise) with optional holes
/// (clockwise). Loops given with the opposite orientation are reversed.
class Polygon
{
public:
    Polygon() = default;

    explicit Polygon(Loop outer, std::vector<Loop> holes = {}) : outer_(std::move(outer)), holes_(std::move(holes))
    {
        validate_and_orient();
    }

    const Loop &outer() const { return outer_; }
    const std::vector<Loop> &holes() const { return holes_; }

    /// All loops (outer first).
    std::vector<const Loop *> loops() const
    {
        std::vector<const Loop *> out{&outer_};
        for (const auto &h : holes_)
            out.push_back(&h);
        return out;
    }

    std::vector<std::pair<Vec2, Vec2>> edges() const
    {
        std::vector<std::pair<Vec2, Vec2>> out;
        for (const Loop *l : loops())
            for (std::size_t i = 0; i < l->size(); ++i)
                out.emplace_back((*l)[i], (*l)[(i + 1) % l->size()]);
        return out;
    }

    std::vector<Vec2> vertices() const
    {
        std::vector<Vec2> out;
        for (const Loop *l : loops())
            out.insert(out.end(), l->begin(), l->end());
        return out;
    }

    double area() const
    {
        double a = signed_area(outer_);
        for (const auto &h : holes_)
            a += signed_area(h);
        return a;
    }

    /// Strict interior test up to boundary tolerance.
    bool contains(const Vec2 &p) const
    {
        if (!detail::inside_loop(outer_, p))
            return false;
        for (const auto &h : holes_)
            if (detail::inside_loop(h, p))
                return false;
        return true;
    }

    double boundary_distance(const Vec2 &p) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (const auto &[a, b] : edges())
            d = std::min(d, segment_distance(p, a, b));
        return d;
    }

    std::pair<Vec2, Vec2> bounding_box() const
    {
        Vec2 lo = outer_[0], hi = outer_[0];
        for (const auto &v : outer_)
        {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        return {lo, hi};
    }

    double diameter() const
    {
        double d = 0.0;
        for (std::size_t i = 0; i < outer_.size(); ++i)
            for (std::size_t j = i + 1; j < outer_.size(); ++j)
                d = std::max(d, (outer_[i] - outer_[j]).norm());
        return d;
    }

    /// The image of the polygon under a rotation.
    Polygon rotated(const Rotation &r) const
    {
        auto map = [&](const Loop &l) {
            Loop out;
            for (const auto &v : l)
                out.push_back(r.apply(v));
            return out;
        };
        std::vector<Loop> holes;
        for (const auto &h : holes_)
            holes.push_back(map(h));
        return Polygon(map(outer_), std::move(holes));
    }

    Polygon translated(const Vec2 &t) const
    {
        auto map = [&](const Loop &l) {
            Loop out;
            for (const auto &v : l)
                out.push_back(v + t);
            return out;
        };
        std::vector<Loop> holes;
        for (const auto &h : holes_)
            holes.push_back(map(h));
        return Polygon(map(outer_), std::move(holes));
    }

    /// Length scale used for relative tolerances.
    double scale() const
    {
        const auto [lo, hi] = bounding_box();
        return std::max({(hi - lo).norm(), 1e-300});
    }

private:
    void validate_and_orient()
    {
        auto check_loop = [](Loop &l, const char *what) {
            if (l.size() < 3)
                throw InvalidPolygon(std::string(what) + " needs at least 3 vertices");
            for (const auto &v : l)
                if (!std::isfinite(v.x()) || !std::isfinite(v.y()))
                    throw InvalidPolygon(std::string(what) + " has a non-finite coordinate");
        };
        check_loop(outer_, "outer loop");
        for (auto &h : holes_)
            check_loop(h, "hole");
        const double eps = kGeomEps * scale();
        if (!detail::loop_is_simple(outer_, eps))
            throw InvalidPolygon("outer loop is not simple");
        if (std::abs(signed_area(outer_)) <= eps * eps)
            throw InvalidPolygon("outer loop has zero area");
        if (signed_area(outer_) < 0.0)
            std::reverse(outer_.begin(), outer_.end());
        for (auto &h : holes_)
        {
            if (!detail::loop_is_simple(h, eps) || std::abs(signed_area(h)) <= eps * eps)
                throw InvalidPolygon("hole is not a simple loop with positive area");
            if (signed_area(h) > 0.0)
                std::reverse(h.begin(), h.end());
            for (const auto &v : h)
                if (!detail::inside_loop(outer_, v))
                    throw InvalidPolygon("hole vertex lies outside the outer loop");
        }
        // loops must not touch each other
        const auto loops_list = loops();
        for (std::size_t i = 0; i < loops_list.size(); ++i)
            for (std::size_t j = i + 1; j < loops_list.size(); ++j)
            {
                const Loop &A = *loops_list[i], &B = *loops_list[j];
                for (std::size_t a = 0; a < A.size(); ++a)
                    for (std::size_t b = 0; b < B.size(); ++b)
                        if (detail::segments_intersect(A[a], A[(a + 1) % A.size()], B[b], B[(b + 1) % B.size()], eps))
                            throw InvalidPolygon("polygon loops intersect");
            }
        if (!(area() > 0.0))
            throw InvalidPolygon("polygon has no interior");
    }

    Loop outer_;
    std::vector<Loop> holes_;
};

// ---------------------------------------------------------------------------
// fixtures

inline Polygon rectangle(double x0, double y0, double x1, double y1)
{
    return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

inline Polygon unit_square() { return rectangle(0.0, 0.0, 1.0, 1.0); }

inline Polygon regular_polygon(int sides, double radius, const Vec2 &center = Vec2::Zero(), double phase = 0.0)
{
    Loop l;
    for (int i = 0; i < sides; ++i)
        l.push_back(center + radius * unit_vector(phase + kTwoPi * i / sides));
    return Polygon(std::move(l));
}

// ---------------------------------------------------------------------------
// slices

/// Open intervals (y_low, y_high) of a vertical section.
struct SliceProfile
{
    double x = 0.0;
    std::vector<std::pair<double, double>> components;

    double max_length() const
    {
        double m = 0.0;
        for (const auto &[lo, hi] : components)
            m = std::max(m, hi - lo);
        return m;
    }
};

enum class SliceSide
{
    Exact, ///< the section at x (edges half-open on the right)
    Left,  ///< limit from x - 0
    Right  ///< limit from x + 0
};

/// Vertical section {y : (x, y) in Omega} as maximal open intervals. Edge
/// crossings use the half-open rule, so vertices on the line count once.
inline SliceProfile slice(const Polygon &domain, double x, SliceSide side = SliceSide::Exact)
{
    SliceProfile out;
    out.x = x;
    std::vector<double> ys;
    for (const auto &[a, b] : domain.edges())
    {
        const double xa = a.x(), xb = b.x();
        if (xa == xb)
            continue;
        const double lo = std::min(xa, xb), hi = std::max(xa, xb);
        const bool hit = side == SliceSide::Left ? (lo < x && x <= hi) : (lo <= x && x < hi);
        if (!hit)
            continue;
        const double t = (x - xa) / (xb - xa);
        ys.push_back(a.y() + t * (b.y() - a.y()));
    }
    std::sort(ys.begin(), ys.end());
    const double eps = kGeomEps * domain.scale();
    for (std::size_t i = 0; i + 1 < ys.size(); i += 2)
    {
        const double lo = ys[i], hi = ys[i + 1];
        if (hi - lo <= eps)
            continue;
        // touching intervals stay separate: the contact point is a boundary point
        out.components.emplace_back(lo, hi);
    }
    return out;
}

// ---------------------------------------------------------------------------
// widths

namespace detail
{

// Vertical chord supremum of a polygon: one-sided limits at every vertex
// abscissa plus midpoints between consecutive abscissae.
inline std::pair<double, double> vertical_width_with_witness(const Polygon &domain)
{
    std::vector<double> xs;
    for (const auto &v : domain.vertices())
        xs.push_back(v.x());
    std::sort(xs.begin(), xs.end());
    const double eps = kGeomEps * domain.scale();
    std::vector<double> events;
    for (double x : xs)
        if (events.empty() || x - events.back() > eps)
            events.push_back(x);
    double best = 0.0, witness = events.front();
    auto consider = [&](double x, SliceSide side) {
        const double len = slice(domain, x, side).max_length();
        if (len > best)
        {
            best = len;
            witness = x;
        }
    };
    for (std::size_t i = 0; i < events.size(); ++i)
    {
        if (i > 0)
        {
            consider(events[i], SliceSide::Left);
            consider(0.5 * (events[i - 1] + events[i]), SliceSide::Exact);
        }
        if (i + 1 < events.size())
            consider(events[i], SliceSide::Right);
    }
    return {best, witness};
}

} // namespace detail

/// L_theta: supremum of lengths of connected components of the intersection
/// of Omega with lines in direction theta.
inline double width(const Polygon &domain, double theta)
{
    // rotate so that direction theta becomes vertical
    const Polygon r = domain.rotated(Rotation(kPi / 2.0 - theta));
    return detail::vertical_width_with_witness(r).first;
}

/// Width along an undirected direction: v and -v give identical results.
inline double width(const Polygon &domain, const Vec2 &direction)
{
    Vec2 d = direction;
    if (d.y() < 0.0 || (d.y() == 0.0 && d.x() < 0.0))
        d = -d;
    if (!(d.norm() > 0.0))
        throw BadParams("width needs a nonzero direction");
    return width(domain, std::atan2(d.y(), d.x()));
}

struct WidthCurve
{
    std::vector<double> thetas;
    std::vector<double> values;
    double argmax_theta = 0.0;
    double sup_value = 0.0;
    bool attained = false;
    /// angles in [0, pi) where the sampled curve jumps (nonconvex domains)
    std::vector<double> discontinuities;
};

/// Sample theta -> L_theta over [0, pi), add every vertex-pair direction, and
/// refine the best sample by golden section. Ties go to the smallest theta.
inline WidthCurve width_curve(const Polygon &domain, int samples = 720, int refine_iters = 60)
{
    if (samples < 8)
        throw BadParams("width_curve needs at least 8 samples");
    WidthCurve curve;
    for (int i = 0; i < samples; ++i)
        curve.thetas.push_back(kPi * i / samples);
    curve.values.reserve(curve.thetas.size());
    for (double t : curve.thetas)
        curve.values.push_back(width(domain, t));

    const double tol = 1e-12 * domain.scale();
    struct Candidate
    {
        double theta, value;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < curve.thetas.size(); ++i)
        candidates.push_back({curve.thetas[i], curve.values[i]});
    // chords through vertex pairs realize the maximum of convex polygons
    // (many pairs share a direction, e.g. in regular polygons; each distinct
    // direction is evaluated once)
    const auto verts = domain.vertices();
    std::vector<double> pair_thetas;
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i + 1; j < verts.size(); ++j)
        {
            const Vec2 d = verts[j] - verts[i];
            if (d.norm() <= kGeomEps * domain.scale())
                continue;
            pair_thetas.push_back(wrap_half_angle(std::atan2(d.y(), d.x())));
        }
    std::sort(pair_thetas.begin(), pair_thetas.end());
    pair_thetas.erase(std::unique(pair_thetas.begin(), pair_thetas.end(),
                                  [](double a, double b) { return b - a <= 1e-14; }),
                      pair_thetas.end());
    for (double t : pair_thetas)
        candidates.push_back({t, width(domain, t)});

    auto best_of = [&](const std::vector<Candidate> &cs) {
        Candidate best{0.0, -1.0};
        for (const auto &c : cs)
            if (c.value > best.value + tol || (std::abs(c.value - best.value) <= tol && c.theta < best.theta))
                best = c;
        return best;
    };
    Candidate best = best_of(candidates);

    // golden-section refinement on the bracket around the best sample
    const double step = kPi / samples;
    double lo = best.theta - step, hi = best.theta + step;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto L = [&](double t) { return width(domain, wrap_half_angle(t)); };
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = L(x1), f2 = L(x2);
    double previous = best.value, last_change = std::numeric_limits<double>::infinity();
    for (int k = 0; k < refine_iters; ++k)
    {
        if (f1 < f2)
        {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = L(x2);
        }
        else
        {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = L(x1);
        }
        const double current = std::max({f1, f2, best.value});
        last_change = std::abs(current - previous);
        previous = current;
    }
    const double mid = wrap_half_angle(0.5 * (lo + hi));
    const double fm = L(mid);
    if (fm > best.value + tol)
        best = {mid, fm};
    curve.argmax_theta = best.theta;
    curve.sup_value = best.value;
    curve.attained = last_change < 1e-9;

    // A sampled jump is a discontinuity if it survives bisection: the width
    // curve of a convex domain can be steep (slope ~ diam^2 / min width) but
    // its increments vanish with the bracket, while a true jump does not.
    const double diam = domain.diameter();
    for (std::size_t i = 0; i < curve.values.size(); ++i)
    {
        const std::size_t j = (i + 1) % curve.values.size();
        double lo_t = curve.thetas[i], hi_t = j == 0 ? kPi : curve.thetas[j];
        double lo_v = curve.values[i], hi_v = curve.values[j];
        if (std::abs(hi_v - lo_v) <= 1e-3 * diam)
            continue;
        for (int k = 0; k < 40; ++k)
        {
            const double mid_t = 0.5 * (lo_t + hi_t);
            const double mid_v = L(mid_t);
            if (std::abs(mid_v - lo_v) >= std::abs(hi_v - mid_v))
            {
                hi_t = mid_t;
                hi_v = mid_v;
            }
            else
            {
                lo_t = mid_t;
                lo_v = mid_v;
            }
        }
        if (std::abs(hi_v - lo_v) > 1e-6 * diam)
            curve.discontinuities.push_back(wrap_half_angle(0.5 * (lo_t + hi_t)));
    }
    return curve;
}

/// L_Omega for the rotated domain A^T(Omega): the longest vertical chord of
/// A^T(Omega), i.e. the width of Omega in the direction A (0, 1).
inline double L_omega(const Polygon &domain, const Rotation &a)
{
    const Vec2 up = a.up();
    return width(domain, std::atan2(up.y(), up.x()));
}

// ---------------------------------------------------------------------------
// slice conditions

struct StripWitness
{
    double x_begin = 0.0;
    double x_end = 0.0;
    Polygon strip; ///< {(x, y) : x in I', y in the length-L component}, in rotated coordinates
};

struct T15Report
{
    double x_min = 0.0, x_max = 0.0; ///< the interval I (x-extent of A^T Omega)
    double L = 0.0;
    double witness_x = 0.0;          ///< abscissa realizing L
    bool condition_i = true;
    bool condition_ii = true;
    bool condition_iii = false;
    std::optional<StripWitness> strip;
    int strips_found = 0;
};

/// Check the slice conditions on Omega_A = A^T(Omega): (i) it lies in I x R
/// for its x-extent I; (ii) every vertical component has length <= L, with L
/// the longest vertical chord; (iii) some open I' carries a continuous family
/// of components of length L (within 1e-9 diameter). Scans `samples`
/// abscissae, then bisects the ends of the leftmost band.
inline T15Report check_T15_conditions(const Polygon &domain, const Rotation &a, int samples = 4096)
{
    T15Report rep;
    const Polygon r = domain.rotated(a.inverse());
    const auto [lo, hi] = r.bounding_box();
    rep.x_min = lo.x();
    rep.x_max = hi.x();
    const auto [L, wx] = detail::vertical_width_with_witness(r);
    rep.L = L;
    rep.witness_x = wx;
    rep.condition_i = true;
    rep.condition_ii = true;

    const double eps = 1e-9 * r.diameter();
    const double w = rep.x_max - rep.x_min;
    auto long_component = [&](double x) -> std::optional<std::pair<double, double>> {
        for (const auto &c : slice(r, x).components)
            if (c.second - c.first >= L - eps)
                return c;
        return std::nullopt;
    };
    auto overlaps = [](const std::pair<double, double> &p, const std::pair<double, double> &q) {
        return std::min(p.second, q.second) > std::max(p.first, q.first);
    };

    std::vector<std::pair<int, int>> runs;
    int start = -1;
    std::optional<std::pair<double, double>> prev;
    for (int j = 0; j < samples; ++j)
    {
        const double x = rep.x_min + (j + 0.5) * w / samples;
        const auto c = long_component(x);
        const bool continues = c && prev && overlaps(*c, *prev);
        if (c && start < 0)
            start = j;
        else if (start >= 0 && (!c || !continues))
        {
            if (j - start >= 2)
                runs.emplace_back(start, j - 1);
            start = c ? j : -1;
        }
        prev = c;
    }
    if (start >= 0 && samples - start >= 2)
        runs.emplace_back(start, samples - 1);
    rep.strips_found = static_cast<int>(runs.size());
    if (runs.empty())
        return rep;

    rep.condition_iii = true;
    const auto [j0, j1] = runs.front();
    auto xs = [&](int j) { return rep.x_min + (j + 0.5) * w / samples; };
    auto refine = [&](double inside, double outside) {
        for (int k = 0; k < 50; ++k)
        {
            const double mid = 0.5 * (inside + outside);
            if (long_component(mid))
                inside = mid;
            else
                outside = mid;
        }
        return inside;
    };
    StripWitness sw;
    sw.x_begin = j0 == 0 ? rep.x_min : refine(xs(j0), xs(j0 - 1));
    sw.x_end = j1 == samples - 1 ? rep.x_max : refine(xs(j1), xs(j1 + 1));

    // strip polygon: lower and upper component ends along the band
    Loop lower, upper;
    const int pieces = 64;
    for (int k = 0; k <= pieces; ++k)
    {
        double x = sw.x_begin + (sw.x_end - sw.x_begin) * k / pieces;
        x = std::clamp(x, sw.x_begin + 1e-12 * w, sw.x_end - 1e-12 * w);
        auto c = long_component(x);
        if (!c)
            continue;
        lower.emplace_back(x, c->first);
        upper.emplace_back(x, c->second);
    }
    Loop loop = lower;
    loop.insert(loop.end(), upper.rbegin(), upper.rend());
    // drop collinear vertices
    Loop simplified;
    for (std::size_t i = 0; i < loop.size(); ++i)
    {
        const Vec2 &p = loop[(i + loop.size() - 1) % loop.size()], &q = loop[i], &n = loop[(i + 1) % loop.size()];
        if (std::abs(cross(q - p, n - q)) > 1e-12 * r.scale() * r.scale())
            simplified.push_back(q);
    }
    try
    {
        sw.strip = Polygon(simplified.size() >= 3 ? simplified : loop);
        rep.strip = sw;
    }
    catch (const InvalidPolygon &)
    {
        // band too thin to form a valid polygon; keep the interval only
        sw.strip = Polygon();
        rep.strip = sw;
    }
    return rep;
}

} // namespace aniso
