#pragma once

// Asymmetric seminorms on the line and the plane: nonnegative, convex,
// positively 1-homogeneous functions. Every planar one is the support
// function of a compact convex set containing the origin; the analytic
// variants below cover the degenerate catalog exactly.

#include "core.hpp"
#include "errors.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace aniso
{

/// H_{a,b}(t) = a t^+ + b t^-.
struct Anisotropy1D
{
    double a = 1.0;
    double b = 1.0;

    Anisotropy1D() = default;
    Anisotropy1D(double a_, double b_) : a(a_), b(b_)
    {
        if (!(a >= 0.0) || !(b >= 0.0))
            throw BadParams("Anisotropy1D requires a >= 0 and b >= 0");
    }

    bool is_zero() const { return a == 0.0 && b == 0.0; }
    double operator()(double t) const { return t > 0.0 ? a * t : -b * t; }
    double norm() const { return std::max(a, b); }
};

class Anisotropy2D;

/// H(v) = max over vertices q of <v, q>. Vertices are the convex hull of the
/// input, counterclockwise.
struct SupportPolygon
{
    std::vector<Vec2> vertices;
};

/// H(v) = a s^+ + b s^-, s = <v, (cos theta, sin theta)>.
struct AsymmetricLinear
{
    double a = 1.0;
    double b = 0.0;
    double theta = kPi / 2.0;
};

/// H(v) = c |v|.
struct EuclideanScaled
{
    double c = 1.0;
};

enum class SplitVariant
{
    E1,  ///< a (|x|^q + (y^+)^q)^(1/q), kernel a half-line
    E3a, ///< a (kappa |x| + y)^+, kernel a sector
    E3b  ///< a ((x^+)^q + (y^+)^q)^(1/q), kernel a quadrant
};

/// Split q-norm family. The formula is applied to R(frame)^T v, so a nonzero
/// frame rotates the whole picture counterclockwise.
struct SplitPNorm
{
    double a = 1.0;
    double q = 2.0;
    double kappa = 1.0;
    SplitVariant variant = SplitVariant::E1;
    double frame = 0.0;
};

/// H(v) = sqrt(epsilon |v|^2 + base(v)^2).
struct Regularized
{
    double epsilon = 0.0;
    std::shared_ptr<const Anisotropy2D> base;
};

/// An asymmetric seminorm on the plane. Immutable.
class Anisotropy2D
{
public:
    using Representation = std::variant<SupportPolygon, AsymmetricLinear, EuclideanScaled, SplitPNorm, Regularized>;

    static Anisotropy2D support_polygon(std::vector<Vec2> points);
    static Anisotropy2D asymmetric_linear(double a, double b, double theta);
    static Anisotropy2D euclidean(double c = 1.0);
    static Anisotropy2D split_pnorm(double a, double q, SplitVariant variant, double kappa = 1.0, double frame = 0.0);
    static Anisotropy2D regularized(double epsilon, const Anisotropy2D &base);
    static Anisotropy2D zero() { return Anisotropy2D(SupportPolygon{{Vec2::Zero()}}); }

    const Representation &representation() const { return rep_; }

    double operator()(const Vec2 &v) const;

    /// Minimal-norm element of the subdifferential at v (zero at v = 0).
    Vec2 subgradient(const Vec2 &v) const;

    /// Vertices of a polygon whose support function equals this H exactly,
    /// when such a polygon exists.
    std::optional<std::vector<Vec2>> exact_support_points() const;

    bool is_zero() const;

    std::string kind_name() const;

private:
    explicit Anisotropy2D(Representation rep) : rep_(std::move(rep)) {}
    Representation rep_;
};

// ---------------------------------------------------------------------------
// construction

inline Anisotropy2D Anisotropy2D::support_polygon(std::vector<Vec2> points)
{
    if (points.empty())
        throw InvalidAnisotropy("support polygon needs at least one vertex");
    double scale = 0.0;
    for (const auto &p : points)
    {
        if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
            throw InvalidAnisotropy("support polygon vertex is not finite");
        scale = std::max(scale, p.norm());
    }
    const double eps = kGeomEps * std::max(scale, 1.0);
    auto hull = convex_hull(std::move(points), 0.0);

    // origin must lie in the hull, otherwise H takes negative values
    bool contains = false;
    if (hull.size() == 1)
        contains = hull[0].norm() <= eps;
    else if (hull.size() == 2)
        contains = segment_distance(Vec2::Zero(), hull[0], hull[1]) <= eps;
    else
    {
        contains = true;
        for (std::size_t i = 0; i < hull.size(); ++i)
        {
            const Vec2 &p = hull[i];
            const Vec2 &q = hull[(i + 1) % hull.size()];
            const double len = (q - p).norm();
            if (cross(q - p, -p) < -eps * len)
                contains = false;
        }
    }
    if (!contains)
        throw InvalidAnisotropy("origin is not inside the convex hull of the support polygon vertices");
    if (hull.size() == 1 && hull[0].norm() <= eps)
        hull[0] = Vec2::Zero();
    return Anisotropy2D(SupportPolygon{std::move(hull)});
}

inline Anisotropy2D Anisotropy2D::asymmetric_linear(double a, double b, double theta)
{
    if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(theta))
        throw InvalidAnisotropy("asymmetric_linear requires finite a >= 0, b >= 0");
    return Anisotropy2D(AsymmetricLinear{a, b, theta});
}

inline Anisotropy2D Anisotropy2D::euclidean(double c)
{
    if (!(c > 0.0) || !std::isfinite(c))
        throw InvalidAnisotropy("euclidean scale must be positive");
    return Anisotropy2D(EuclideanScaled{c});
}

inline Anisotropy2D Anisotropy2D::split_pnorm(double a, double q, SplitVariant variant, double kappa, double frame)
{
    if (!(a > 0.0) || !std::isfinite(a))
        throw InvalidAnisotropy("split_pnorm requires a > 0");
    if (variant != SplitVariant::E3a && (!(q >= 1.0) || !std::isfinite(q)))
        throw InvalidAnisotropy("split_pnorm requires a finite exponent q >= 1");
    if (variant == SplitVariant::E3a && (!(kappa > 0.0) || !std::isfinite(kappa)))
        throw InvalidAnisotropy("split_pnorm E3a requires kappa > 0");
    return Anisotropy2D(SplitPNorm{a, q, kappa, variant, frame});
}

inline Anisotropy2D Anisotropy2D::regularized(double epsilon, const Anisotropy2D &base)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidAnisotropy("regularization epsilon must be positive");
    return Anisotropy2D(Regularized{epsilon, std::make_shared<const Anisotropy2D>(base)});
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail
{

// (|x|^q + |y|^q)^(1/q) for nonnegative x, y without overflow.
inline double qnorm(double x, double y, double q)
{
    const double m = std::max(x, y);
    if (m <= 0.0)
        return 0.0;
    if (q == 1.0)
        return x + y;
    if (q == 2.0)
        return std::hypot(x, y);
    return m * std::pow(std::pow(x / m, q) + std::pow(y / m, q), 1.0 / q);
}

// Gradient of qnorm with respect to (x, y) at nonnegative arguments; entries
// at a zero argument use the minimal-norm choice 0 (only matters for q = 1).
inline Vec2 qnorm_gradient(double x, double y, double q)
{
    const double n = qnorm(x, y, q);
    if (n <= 0.0)
        return Vec2::Zero();
    if (q == 1.0)
        return {x > 0.0 ? 1.0 : 0.0, y > 0.0 ? 1.0 : 0.0};
    return {std::pow(x / n, q - 1.0), std::pow(y / n, q - 1.0)};
}

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline double split_value(const SplitPNorm &s, const Vec2 &v)
{
    const Vec2 w = Rotation(s.frame).apply_transpose(v);
    switch (s.variant)
    {
    case SplitVariant::E1:
        return s.a * qnorm(std::abs(w.x()), std::max(w.y(), 0.0), s.q);
    case SplitVariant::E3a:
        return s.a * std::max(s.kappa * std::abs(w.x()) + w.y(), 0.0);
    case SplitVariant::E3b:
        return s.a * qnorm(std::max(w.x(), 0.0), std::max(w.y(), 0.0), s.q);
    }
    return 0.0;
}

inline Vec2 split_gradient(const SplitPNorm &s, const Vec2 &v)
{
    const Rotation frame(s.frame);
    const Vec2 w = frame.apply_transpose(v);
    Vec2 g = Vec2::Zero();
    switch (s.variant)
    {
    case SplitVariant::E1:
    {
        const Vec2 d = qnorm_gradient(std::abs(w.x()), std::max(w.y(), 0.0), s.q);
        g = {d.x() * sign0(w.x()), d.y()};
        break;
    }
    case SplitVariant::E3a:
        if (s.kappa * std::abs(w.x()) + w.y() > 0.0)
            g = {s.kappa * sign0(w.x()), 1.0};
        break;
    case SplitVariant::E3b:
        g = qnorm_gradient(std::max(w.x(), 0.0), std::max(w.y(), 0.0), s.q);
        break;
    }
    return frame.apply(s.a * g);
}

} // namespace detail

inline double Anisotropy2D::operator()(const Vec2 &v) const
{
    return std::visit(
        [&](const auto &h) -> double {
            using T = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<T, SupportPolygon>)
            {
                double best = -std::numeric_limits<double>::infinity();
                for (const auto &q : h.vertices)
                    best = std::max(best, v.dot(q));
                return std::max(best, 0.0);
            }
            else if constexpr (std::is_same_v<T, AsymmetricLinear>)
            {
                const double s = v.x() * std::cos(h.theta) + v.y() * std::sin(h.theta);
                return s > 0.0 ? h.a * s : -h.b * s;
            }
            else if constexpr (std::is_same_v<T, EuclideanScaled>)
                return h.c * v.norm();
            else if constexpr (std::is_same_v<T, SplitPNorm>)
                return detail::split_value(h, v);
            else
            {
                const double b = (*h.base)(v);
                return std::sqrt(h.epsilon * v.squaredNorm() + b * b);
            }
        },
        rep_);
}

inline Vec2 Anisotropy2D::subgradient(const Vec2 &v) const
{
    return std::visit(
        [&](const auto &h) -> Vec2 {
            using T = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<T, SupportPolygon>)
            {
                const auto &q = h.vertices;
                double best = -std::numeric_limits<double>::infinity();
                for (const auto &p : q)
                    best = std::max(best, v.dot(p));
                double scale = 0.0;
                for (const auto &p : q)
                    scale = std::max(scale, p.norm());
                const double tol = 1e-12 * scale * v.norm();
                std::vector<Vec2> ties;
                for (const auto &p : q)
                    if (v.dot(p) >= best - tol)
                        ties.push_back(p);
                if (ties.size() == 1)
                    return ties[0];
                if (ties.size() == 2)
                {
                    // closest point to the origin on the tied edge
                    const Vec2 e = ties[1] - ties[0];
                    const double t = std::clamp(-ties[0].dot(e) / std::max(e.squaredNorm(), 1e-300), 0.0, 1.0);
                    return ties[0] + t * e;
                }
                return Vec2::Zero();
            }
            else if constexpr (std::is_same_v<T, AsymmetricLinear>)
            {
                const Vec2 n = unit_vector(h.theta);
                const double s = v.dot(n);
                if (s > 0.0)
                    return h.a * n;
                if (s < 0.0)
                    return -h.b * n;
                return Vec2::Zero();
            }
            else if constexpr (std::is_same_v<T, EuclideanScaled>)
            {
                const double n = v.norm();
                return n > 0.0 ? Vec2(h.c * v / n) : Vec2::Zero();
            }
            else if constexpr (std::is_same_v<T, SplitPNorm>)
                return detail::split_gradient(h, v);
            else
            {
                const double b = (*h.base)(v);
                const double value = std::sqrt(h.epsilon * v.squaredNorm() + b * b);
                if (value <= 0.0)
                    return Vec2::Zero();
                return (h.epsilon * v + b * h.base->subgradient(v)) / value;
            }
        },
        rep_);
}

inline std::optional<std::vector<Vec2>> Anisotropy2D::exact_support_points() const
{
    return std::visit(
        [&](const auto &h) -> std::optional<std::vector<Vec2>> {
            using T = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<T, SupportPolygon>)
                return h.vertices;
            else if constexpr (std::is_same_v<T, AsymmetricLinear>)
            {
                const Vec2 n = unit_vector(h.theta);
                return std::vector<Vec2>{h.a * n, -h.b * n};
            }
            else if constexpr (std::is_same_v<T, SplitPNorm>)
            {
                const Rotation frame(h.frame);
                std::vector<Vec2> pts;
                if (h.variant == SplitVariant::E3a)
                    pts = {Vec2::Zero(), Vec2(h.kappa, 1.0), Vec2(-h.kappa, 1.0)};
                else if (h.q == 1.0 && h.variant == SplitVariant::E1)
                    pts = {Vec2(-1.0, 0.0), Vec2(1.0, 0.0), Vec2(1.0, 1.0), Vec2(-1.0, 1.0)};
                else if (h.q == 1.0 && h.variant == SplitVariant::E3b)
                    pts = {Vec2::Zero(), Vec2(1.0, 0.0), Vec2(1.0, 1.0), Vec2(0.0, 1.0)};
                else
                    return std::nullopt;
                for (auto &p : pts)
                    p = frame.apply(h.a * p);
                return pts;
            }
            else
                return std::nullopt;
        },
        rep_);
}

inline bool Anisotropy2D::is_zero() const
{
    if (const auto *s = std::get_if<SupportPolygon>(&rep_))
    {
        for (const auto &q : s->vertices)
            if (q.norm() > 0.0)
                return false;
        return true;
    }
    if (const auto *l = std::get_if<AsymmetricLinear>(&rep_))
        return l->a == 0.0 && l->b == 0.0;
    return false;
}

inline std::string Anisotropy2D::kind_name() const
{
    static constexpr const char *names[] = {"support_polygon", "asymmetric_linear", "euclidean", "split_pnorm",
                                            "regularized"};
    return names[rep_.index()];
}

inline double evaluate(const Anisotropy2D &h, const Vec2 &v) { return h(v); }

// ---------------------------------------------------------------------------
// transforms

/// The composition H o A.
inline Anisotropy2D rotated(const Anisotropy2D &h, const Rotation &a)
{
    return std::visit(
        [&](const auto &r) -> Anisotropy2D {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, SupportPolygon>)
            {
                std::vector<Vec2> pts;
                for (const auto &q : r.vertices)
                    pts.push_back(a.apply_transpose(q));
                return Anisotropy2D::support_polygon(std::move(pts));
            }
            else if constexpr (std::is_same_v<T, AsymmetricLinear>)
                return Anisotropy2D::asymmetric_linear(r.a, r.b, r.theta - a.angle());
            else if constexpr (std::is_same_v<T, EuclideanScaled>)
                return h;
            else if constexpr (std::is_same_v<T, SplitPNorm>)
                return Anisotropy2D::split_pnorm(r.a, r.q, r.variant, r.kappa, r.frame - a.angle());
            else
                return Anisotropy2D::regularized(r.epsilon, rotated(*r.base, a));
        },
        h.representation());
}

/// alpha * H for alpha >= 0.
inline Anisotropy2D scaled(const Anisotropy2D &h, double alpha)
{
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw BadParams("scaling factor must be finite and nonnegative");
    if (alpha == 0.0)
        return Anisotropy2D::zero();
    return std::visit(
        [&](const auto &r) -> Anisotropy2D {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, SupportPolygon>)
            {
                std::vector<Vec2> pts;
                for (const auto &q : r.vertices)
                    pts.push_back(alpha * q);
                return Anisotropy2D::support_polygon(std::move(pts));
            }
            else if constexpr (std::is_same_v<T, AsymmetricLinear>)
                return Anisotropy2D::asymmetric_linear(alpha * r.a, alpha * r.b, r.theta);
            else if constexpr (std::is_same_v<T, EuclideanScaled>)
                return Anisotropy2D::euclidean(alpha * r.c);
            else if constexpr (std::is_same_v<T, SplitPNorm>)
                return Anisotropy2D::split_pnorm(alpha * r.a, r.q, r.variant, r.kappa, r.frame);
            else
                return Anisotropy2D::regularized(alpha * alpha * r.epsilon, scaled(*r.base, alpha));
        },
        h.representation());
}

inline Anisotropy2D regularized(const Anisotropy2D &h, double epsilon) { return Anisotropy2D::regularized(epsilon, h); }

/// Regular polygon with `sides` vertices at the given radius, first vertex at
/// angle `phase`. Handy for approximating c|v|.
inline Anisotropy2D regular_support_polygon(int sides, double radius = 1.0, double phase = 0.0)
{
    std::vector<Vec2> pts;
    for (int i = 0; i < sides; ++i)
        pts.push_back(radius * unit_vector(phase + kTwoPi * i / sides));
    return Anisotropy2D::support_polygon(std::move(pts));
}

// ---------------------------------------------------------------------------
// sup norm

struct CircleMaximum
{
    double angle = 0.0;
    double value = 0.0;
};

/// Maximum of a continuous function of the angle: dense sampling followed by
/// golden-section refinement around the best sample.
template <class F>
CircleMaximum maximize_on_circle(F &&f, int samples = 4096, double tol = 1e-12)
{
    CircleMaximum best{0.0, -std::numeric_limits<double>::infinity()};
    const double step = kTwoPi / samples;
    for (int i = 0; i < samples; ++i)
    {
        const double t = i * step;
        const double v = f(t);
        if (v > best.value + 1e-15 * std::abs(v))
            best = {t, v};
    }
    double lo = best.angle - step, hi = best.angle + step;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol)
    {
        if (f1 < f2)
        {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        else
        {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm > best.value)
        best = {wrap_angle(mid), fm};
    return best;
}

namespace detail
{

// Argmax of H over the unit circle with its value; ties go to the smallest
// angle in [0, 2 pi).
inline CircleMaximum circle_argmax(const Anisotropy2D &h)
{
    return std::visit(
        [&](const auto &r) -> CircleMaximum {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, SupportPolygon>)
            {
                CircleMaximum best{0.0, 0.0};
                double scale = 0.0;
                for (const auto &q : r.vertices)
                    scale = std::max(scale, q.norm());
                for (const auto &q : r.vertices)
                {
                    const double n = q.norm();
                    if (n <= 0.0)
                        continue;
                    const double ang = polar_angle(q);
                    if (n > best.value + 1e-14 * scale ||
                        (std::abs(n - best.value) <= 1e-14 * scale && ang < best.angle))
                        best = {ang, std::max(n, best.value)};
                }
                return best;
            }
            else if constexpr (std::is_same_v<T, AsymmetricLinear>)
            {
                if (r.a >= r.b)
                    return {wrap_angle(r.theta), r.a};
                return {wrap_angle(r.theta + kPi), r.b};
            }
            else if constexpr (std::is_same_v<T, EuclideanScaled>)
                return {0.0, r.c};
            else if constexpr (std::is_same_v<T, SplitPNorm>)
            {
                if (r.variant == SplitVariant::E3a)
                {
                    // piecewise linear: maximal along the frame directions (+-kappa, 1)
                    const double value = r.a * std::hypot(r.kappa, 1.0);
                    const double right = wrap_angle(r.frame + std::atan2(1.0, r.kappa));
                    const double left = wrap_angle(r.frame + std::atan2(1.0, -r.kappa));
                    return {std::min(right, left), value};
                }
                return maximize_on_circle([&](double t) { return h(unit_vector(t)); });
            }
            else
                return maximize_on_circle([&](double t) { return h(unit_vector(t)); });
        },
        h.representation());
}

} // namespace detail

/// ||H|| = max_{|v| = 1} H(v).
inline double norm_sup(const Anisotropy2D &h) { return detail::circle_argmax(h).value; }

// ---------------------------------------------------------------------------
// kernel

struct KernelClass
{
    enum class Category
    {
        ZeroOnly,  ///< ker H = {0}
        HalfLine,  ///< ray at angle `first`
        Line,      ///< line at angle `first` in [0, pi)
        Sector,    ///< rays with angles from `first` counterclockwise to `second`, opening < pi
        HalfPlane, ///< rays with angles from `first` counterclockwise to `first + pi`
        Plane      ///< H = 0
    };

    Category category = Category::ZeroOnly;
    double first = 0.0;
    double second = 0.0;

    /// Whether the unit direction at `angle` lies in the kernel cone,
    /// shrunk (margin < 0) or grown (margin > 0) by `margin` radians.
    bool contains_direction(double angle, double margin = 0.0) const
    {
        auto within = [&](double start, double opening) {
            const double d = wrap_angle(angle - start + margin);
            return d <= opening + 2.0 * margin || (margin > 0.0 && d >= kTwoPi - 1e-15);
        };
        switch (category)
        {
        case Category::ZeroOnly:
            return false;
        case Category::HalfLine:
            return within(first, 0.0);
        case Category::Line:
            return within(first, 0.0) || within(first + kPi, 0.0);
        case Category::Sector:
            return within(first, wrap_angle(second - first));
        case Category::HalfPlane:
            return within(first, kPi);
        case Category::Plane:
            return true;
        }
        return false;
    }

    double opening() const
    {
        switch (category)
        {
        case Category::Sector:
            return wrap_angle(second - first);
        case Category::HalfPlane:
            return kPi;
        case Category::Plane:
            return kTwoPi;
        default:
            return 0.0;
        }
    }
};

inline const char *category_name(KernelClass::Category c)
{
    switch (c)
    {
    case KernelClass::Category::ZeroOnly:
        return "zero_only";
    case KernelClass::Category::HalfLine:
        return "half_line";
    case KernelClass::Category::Line:
        return "line";
    case KernelClass::Category::Sector:
        return "sector";
    case KernelClass::Category::HalfPlane:
        return "half_plane";
    case KernelClass::Category::Plane:
        return "plane";
    }
    return "?";
}

namespace detail
{

// Kernel of the support function of conv(points), i.e. the polar cone of the
// cone generated by the points.
inline KernelClass polar_cone_kernel(const std::vector<Vec2> &points)
{
    using C = KernelClass::Category;
    double scale = 0.0;
    for (const auto &q : points)
        scale = std::max(scale, q.norm());
    std::vector<double> angles;
    for (const auto &q : points)
        if (q.norm() > kGeomEps * std::max(scale, 1.0))
            angles.push_back(polar_angle(q));
    if (angles.empty())
        return {C::Plane, 0.0, 0.0};

    std::sort(angles.begin(), angles.end());
    // merge directions that coincide up to the angular tolerance
    std::vector<double> dirs;
    for (double a : angles)
        if (dirs.empty() || a - dirs.back() > kGeomEps)
            dirs.push_back(a);
    if (dirs.size() > 1 && dirs.front() + kTwoPi - dirs.back() <= kGeomEps)
        dirs.pop_back();

    if (dirs.size() == 1)
        return {C::HalfPlane, wrap_angle(dirs[0] + kPi / 2.0), 0.0};

    // gap i runs counterclockwise from dirs[i] to dirs[i + 1]
    const std::size_t n = dirs.size();
    std::vector<double> gaps(n);
    for (std::size_t i = 0; i < n; ++i)
        gaps[i] = (i + 1 < n ? dirs[i + 1] : dirs[0] + kTwoPi) - dirs[i];
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (gaps[i] > gaps[imax] + kGeomEps)
            imax = i;
    const double gap = gaps[imax];

    if (gap < kPi - kGeomEps)
        return {C::ZeroOnly, 0.0, 0.0};

    if (gap <= kPi + kGeomEps)
    {
        int half_gaps = 0;
        for (double g : gaps)
            if (std::abs(g - kPi) <= kGeomEps)
                ++half_gaps;
        if (half_gaps == 2 && n == 2)
            return {C::Line, wrap_half_angle(dirs[0] + kPi / 2.0), 0.0};
        // the generated cone is a half-plane; the kernel is the inward ray of the gap
        return {C::HalfLine, wrap_angle(dirs[imax] + kPi / 2.0), 0.0};
    }

    // generated cone is a sector from dirs[imax + 1] to dirs[imax] (opening < pi)
    const double cone_open = kTwoPi - gap;
    const double start = wrap_angle(dirs[imax] + kPi / 2.0);
    return {C::Sector, start, wrap_angle(start + kPi - cone_open)};
}

} // namespace detail

/// Classify ker H = {v : H(v) = 0} as a closed convex cone.
inline KernelClass kernel_classify(const Anisotropy2D &h)
{
    using C = KernelClass::Category;
    if (auto pts = h.exact_support_points())
        return detail::polar_cone_kernel(*pts);
    return std::visit(
        [&](const auto &r) -> KernelClass {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, SplitPNorm>)
            {
                if (r.variant == SplitVariant::E1)
                    return {C::HalfLine, wrap_angle(1.5 * kPi + r.frame), 0.0};
                // E3b with q > 1: the closed third quadrant
                return {C::Sector, wrap_angle(kPi + r.frame), wrap_angle(1.5 * kPi + r.frame)};
            }
            else
                return {C::ZeroOnly, 0.0, 0.0};
        },
        h.representation());
}

// ---------------------------------------------------------------------------
// normal forms

struct NormalForm
{
    Rotation rotation;
    double a = 0.0;
    double b = 0.0;
};

/// For a kernel that is a line or a half-plane, the rotation A and constants
/// with H(A(x, y)) = a y^+ + b y^-.
inline NormalForm rotation_normal_form(const Anisotropy2D &h)
{
    using C = KernelClass::Category;
    const auto k = kernel_classify(h);
    Vec2 n;
    if (k.category == C::Line)
        n = unit_vector(k.first + kPi / 2.0);
    else if (k.category == C::HalfPlane)
        n = unit_vector(k.first - kPi / 2.0);
    else
        throw NotDegenerateLine(std::string("kernel is ") + category_name(k.category) +
                                ", expected a line or a half-plane");
    NormalForm out;
    out.rotation = Rotation::mapping_up_to(n);
    out.a = h(n);
    out.b = k.category == C::HalfPlane ? 0.0 : h(Vec2(-n));
    return out;
}

/// A rotation with H(A(x, y)) >= ||H|| y^+ everywhere: A maps (0, 1) to a
/// maximizer of H on the unit circle.
inline Rotation lower_bound_rotation(const Anisotropy2D &h)
{
    const auto m = detail::circle_argmax(h);
    if (!(m.value > 0.0))
        throw ZeroAnisotropy("lower_bound_rotation needs a nonzero anisotropy");
    return Rotation::mapping_up_to(unit_vector(m.angle));
}

// ---------------------------------------------------------------------------
// polarity and differentiability

/// Support function of the unit ball {H <= 1}, as a support polygon. Requires
/// a support polygon whose kernel is {0}.
inline Anisotropy2D dual(const Anisotropy2D &h)
{
    const auto *poly = std::get_if<SupportPolygon>(&h.representation());
    const auto k = kernel_classify(h);
    if (k.category != KernelClass::Category::ZeroOnly)
        throw DegenerateKernel(std::string("dual needs ker H = {0}, got ") + category_name(k.category));
    if (!poly)
        throw BadParams("dual is defined for support_polygon anisotropies");
    const auto &v = poly->vertices;
    std::vector<Vec2> polar;
    polar.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        const Vec2 e = v[(i + 1) % v.size()] - v[i];
        const Vec2 normal = Vec2(e.y(), -e.x()).normalized();
        const double offset = normal.dot(v[i]);
        polar.push_back(normal / offset);
    }
    return Anisotropy2D::support_polygon(std::move(polar));
}

/// Unit directions outside the kernel where the subdifferential of H is a
/// nondegenerate segment, sorted by angle in [0, 2 pi).
inline std::vector<Vec2> differentiability_scan(const Anisotropy2D &h)
{
    if (const auto *r = std::get_if<Regularized>(&h.representation()))
        return differentiability_scan(*r->base);

    std::vector<double> angles;
    if (auto pts = h.exact_support_points())
    {
        const auto hull = convex_hull(*pts, 0.0);
        double scale = 0.0;
        for (const auto &q : hull)
            scale = std::max(scale, q.norm());
        const std::size_t m = hull.size();
        // a segment has two "edges" (both sides), a polygon has m
        const std::size_t edges = m == 2 ? 2 : (m >= 3 ? m : 0);
        for (std::size_t i = 0; i < edges; ++i)
        {
            const Vec2 e = hull[(i + 1) % m] - hull[i];
            const Vec2 normal = Vec2(e.y(), -e.x()).normalized();
            if (h(normal) > kGeomEps * scale)
                angles.push_back(polar_angle(normal));
        }
    }
    std::sort(angles.begin(), angles.end());
    std::vector<Vec2> out;
    for (double a : angles)
        out.push_back(unit_vector(a));
    return out;
}

} // namespace aniso
