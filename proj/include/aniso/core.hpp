#pragma once

// Shared planar primitives: vectors, angles, rotations, convex hulls.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace aniso
{

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Geometric predicate tolerance on unit-scale data.
inline constexpr double kGeomEps = 1e-10;

inline double cross(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Angle in [0, 2*pi).
inline double wrap_angle(double angle)
{
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi)
        r -= kTwoPi;
    return r;
}

/// Undirected line angle in [0, pi).
inline double wrap_half_angle(double angle)
{
    double r = std::fmod(angle, kPi);
    if (r < 0.0)
        r += kPi;
    if (r >= kPi)
        r -= kPi;
    return r;
}

inline double polar_angle(const Vec2 &v) { return wrap_angle(std::atan2(v.y(), v.x())); }

/// Counterclockwise rotation of the plane by a fixed angle (radians).
class Rotation
{
public:
    Rotation() = default;
    explicit Rotation(double angle) : angle_(angle), c_(std::cos(angle)), s_(std::sin(angle)) {}

    /// The rotation A with A * (0, 1) = direction.
    static Rotation mapping_up_to(const Vec2 &direction)
    {
        return Rotation(std::atan2(direction.y(), direction.x()) - kPi / 2.0);
    }

    double angle() const { return angle_; }

    Mat2 matrix() const
    {
        Mat2 m;
        m << c_, -s_, s_, c_;
        return m;
    }

    Vec2 apply(const Vec2 &v) const { return {c_ * v.x() - s_ * v.y(), s_ * v.x() + c_ * v.y()}; }
    Vec2 apply_transpose(const Vec2 &v) const { return {c_ * v.x() + s_ * v.y(), -s_ * v.x() + c_ * v.y()}; }

    Rotation inverse() const { return Rotation(-angle_); }

    /// Image of the vertical unit vector, i.e. the direction A (0, 1).
    Vec2 up() const { return {-s_, c_}; }

private:
    double angle_ = 0.0;
    double c_ = 1.0;
    double s_ = 0.0;
};

/// Convex hull (Andrew's monotone chain), counterclockwise, collinear points
/// dropped. Degenerate inputs yield a segment (2 points) or a single point.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts, double eps = 0.0)
{
    std::sort(pts.begin(), pts.end(), [](const Vec2 &a, const Vec2 &b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(), [&](const Vec2 &a, const Vec2 &b) {
                  return (a - b).norm() <= eps;
              }),
              pts.end());
    if (pts.size() < 3)
        return pts;

    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto &p : pts)
    {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= eps)
            --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;)
    {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= eps)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() == 1 && pts.size() > 1)
        hull.push_back(pts.back());
    return hull;
}

/// Distance from a point to a segment.
inline double segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (a + t * ab - p).norm();
}

} // namespace aniso
