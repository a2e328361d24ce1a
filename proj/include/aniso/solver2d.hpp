#pragma once

// Piecewise-linear discretization of the anisotropic Rayleigh quotient
//   R(u) = sum_T H(grad u|_T)^p |T| / integral |u|^p
// on a crossed-triangle grid fitted inside a polygon, and its minimization
// by preconditioned L-BFGS with continuation over sqrt(delta |v|^2 + H(v)^2).

#include "anisotropy.hpp"
#include "geometry.hpp"
#include "lbfgs.hpp"
#include "oned.hpp"
#include "parallel.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace aniso
{

/// Crossed-triangle mesh of the part of a polygon covered by whole grid
/// triangles. Grid lines sit at bbox_min + k h with h = 1 / resolution, so
/// doubling the resolution nests the meshes.
struct Mesh
{
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<bool> interior_mask; ///< true = free, false = pinned to 0
    std::vector<double> cell_areas;
    std::vector<Eigen::Matrix<double, 2, 3>> gradient_maps;

    std::vector<int> free_nodes; ///< node ids of the unknowns
    std::vector<int> free_index; ///< node id -> unknown index or -1

    double h = 0.0;
    int resolution = 0;
    Vec2 origin = Vec2::Zero();
    int nx = 0, ny = 0;
    std::vector<int> cell_triangles; ///< 4 per grid cell: triangle id or -1
    double domain_area = 0.0;
    double covered_area = 0.0;

    double coverage_ratio() const { return covered_area / domain_area; }
    std::size_t free_count() const { return free_nodes.size(); }

    /// Value at a point of the piecewise-linear field with the given nodal values.
    double interpolate(const std::vector<double> &values, const Vec2 &x) const
    {
        const double fi = (x.x() - origin.x()) / h, fj = (x.y() - origin.y()) / h;
        const int ci = static_cast<int>(std::floor(fi)), cj = static_cast<int>(std::floor(fj));
        for (int dj : {0, -1, 1})
            for (int di : {0, -1, 1})
            {
                const int i = ci + di, j = cj + dj;
                if (i < 0 || j < 0 || i >= nx || j >= ny)
                    continue;
                for (int k = 0; k < 4; ++k)
                {
                    const int t = cell_triangles[4 * (j * nx + i) + k];
                    if (t < 0)
                        continue;
                    const auto &tri = triangles[t];
                    const Vec2 &a = nodes[tri[0]], &b = nodes[tri[1]], &c = nodes[tri[2]];
                    const double det = cross(b - a, c - a);
                    const double l1 = cross(x - a, c - a) / det, l2 = cross(b - a, x - a) / det;
                    const double l0 = 1.0 - l1 - l2;
                    const double tol = -1e-10;
                    if (l0 >= tol && l1 >= tol && l2 >= tol)
                        return l0 * values[tri[0]] + l1 * values[tri[1]] + l2 * values[tri[2]];
                }
            }
        return 0.0;
    }
};

namespace detail
{

inline bool proper_cross(const Vec2 &a, const Vec2 &b, const Vec2 &c, const Vec2 &d, double eps)
{
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps));
}

inline bool strictly_inside_triangle(const Vec2 &p, const Vec2 &a, const Vec2 &b, const Vec2 &c, double eps)
{
    return cross(b - a, p - a) > eps && cross(c - b, p - b) > eps && cross(a - c, p - c) > eps;
}

} // namespace detail

/// Build the inside-only crossed-triangle mesh. A grid triangle is kept when
/// its vertices lie in the closed domain, its centroid in the open domain, no
/// polygon edge crosses it and no polygon vertex lies inside it. Nodes on the
/// boundary of the kept region are pinned.
///
/// With `snap` set, grid nodes are first moved onto the boundary: the node
/// nearest to each polygon vertex goes to that vertex, and every other node
/// within 0.45 h of the boundary goes to its nearest boundary point. Triangles
/// that this flattens or inverts are dropped. Snapping removes most of the
/// staircase gap along slanted edges; without it, meshes of the same domain
/// at doubled resolution are nested.
inline Mesh build_mesh(const Polygon &domain, int resolution, bool snap = true)
{
    if (resolution < 1)
        throw BadParams("mesh resolution must be positive");
    if (resolution * domain.diameter() < 4.0)
        throw BadParams("mesh resolution must give at least 4 cells per diameter");
    Mesh m;
    m.resolution = resolution;
    m.h = 1.0 / resolution;
    const auto [lo, hi] = domain.bounding_box();
    m.origin = lo;
    m.nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / m.h - 1e-9)));
    m.ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / m.h - 1e-9)));
    const int gx = m.nx + 1, gy = m.ny + 1;
    const int grid_nodes = gx * gy;
    const int total = grid_nodes + m.nx * m.ny;

    std::vector<Vec2> all(static_cast<std::size_t>(total));
    for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i)
            all[j * gx + i] = lo + m.h * Vec2(i, j);
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
            all[grid_nodes + j * m.nx + i] = lo + m.h * Vec2(i + 0.5, j + 0.5);

    const double eps = kGeomEps * domain.scale();
    const auto edges = domain.edges();
    const auto poly_vertices = domain.vertices();

    if (snap)
    {
        std::vector<bool> fixed(static_cast<std::size_t>(total), false);
        for (const auto &v : poly_vertices)
        {
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            const int ci = static_cast<int>(std::floor((v.x() - lo.x()) / m.h));
            const int cj = static_cast<int>(std::floor((v.y() - lo.y()) / m.h));
            for (int j = cj - 1; j <= cj + 2; ++j)
                for (int i = ci - 1; i <= ci + 2; ++i)
                {
                    if (i < 0 || j < 0 || i >= gx || j >= gy)
                        continue;
                    std::array<int, 2> cand{j * gx + i, (i < m.nx && j < m.ny) ? grid_nodes + j * m.nx + i : -1};
                    for (int k : cand)
                        if (k >= 0 && !fixed[k] && (all[k] - v).norm() < best_d)
                        {
                            best_d = (all[k] - v).norm();
                            best = k;
                        }
                }
            if (best >= 0 && best_d <= 0.75 * m.h)
            {
                all[best] = v;
                fixed[best] = true;
            }
        }
        const double reach = 0.45 * m.h;
        for (int k = 0; k < total; ++k)
        {
            if (fixed[k])
                continue;
            const Vec2 p = all[k];
            double best_d = std::numeric_limits<double>::infinity();
            Vec2 best = p;
            for (const auto &[a, b] : edges)
            {
                const Vec2 e = b - a;
                const double t = std::clamp((p - a).dot(e) / std::max(e.squaredNorm(), 1e-300), 0.0, 1.0);
                const Vec2 q = a + t * e;
                const double d = (p - q).norm();
                if (d < best_d)
                {
                    best_d = d;
                    best = q;
                }
            }
            if (best_d > eps && best_d < reach)
                all[k] = best;
        }
    }

    // node status: 0 outside, 1 on boundary, 2 inside
    std::vector<std::uint8_t> status(static_cast<std::size_t>(total));
    for (int k = 0; k < total; ++k)
    {
        const Vec2 &p = all[k];
        if (p.x() < lo.x() - eps || p.x() > hi.x() + eps || p.y() < lo.y() - eps || p.y() > hi.y() + eps)
            status[k] = 0;
        else if (domain.boundary_distance(p) <= eps)
            status[k] = 1;
        else
            status[k] = domain.contains(p) ? 2 : 0;
    }

    std::vector<std::array<int, 3>> kept;
    m.cell_triangles.assign(static_cast<std::size_t>(4 * m.nx * m.ny), -1);
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
        {
            const int c00 = j * gx + i, c10 = c00 + 1, c01 = c00 + gx, c11 = c01 + 1;
            const int mid = grid_nodes + j * m.nx + i;
            const std::array<std::array<int, 3>, 4> cell{{{c00, c10, mid}, {c10, c11, mid}, {c11, c01, mid}, {c01, c00, mid}}};
            for (int k = 0; k < 4; ++k)
            {
                const auto &t = cell[k];
                if (status[t[0]] == 0 || status[t[1]] == 0 || status[t[2]] == 0)
                    continue;
                const Vec2 &a = all[t[0]], &b = all[t[1]], &c = all[t[2]];
                // reject triangles flattened or inverted by snapping
                if (cross(b - a, c - a) < 0.05 * m.h * m.h)
                    continue;
                const Vec2 centroid = (a + b + c) / 3.0;
                if (!domain.contains(centroid) || domain.boundary_distance(centroid) <= eps)
                    continue;
                bool ok = true;
                const Vec2 tlo = a.cwiseMin(b).cwiseMin(c), thi = a.cwiseMax(b).cwiseMax(c);
                for (const auto &[p, q] : edges)
                {
                    const Vec2 elo = p.cwiseMin(q), ehi = p.cwiseMax(q);
                    if (elo.x() > thi.x() + eps || ehi.x() < tlo.x() - eps || elo.y() > thi.y() + eps ||
                        ehi.y() < tlo.y() - eps)
                        continue;
                    if (detail::proper_cross(a, b, p, q, eps) || detail::proper_cross(b, c, p, q, eps) ||
                        detail::proper_cross(c, a, p, q, eps))
                    {
                        ok = false;
                        break;
                    }
                }
                if (ok)
                    for (const auto &v : poly_vertices)
                        if (detail::strictly_inside_triangle(v, a, b, c, eps * m.h))
                        {
                            ok = false;
                            break;
                        }
                if (!ok)
                    continue;
                m.cell_triangles[4 * (j * m.nx + i) + k] = static_cast<int>(kept.size());
                kept.push_back(t);
            }
        }
    if (kept.empty())
        throw EmptyMesh("no grid triangle fits inside the domain at this resolution");

    // boundary edges of the kept region: edges used by exactly one triangle
    std::vector<std::pair<std::int64_t, int>> edge_use;
    edge_use.reserve(kept.size() * 3);
    auto key = [&](int u, int v) {
        if (u > v)
            std::swap(u, v);
        return static_cast<std::int64_t>(u) * total + v;
    };
    for (const auto &t : kept)
        for (int e = 0; e < 3; ++e)
            edge_use.emplace_back(key(t[e], t[(e + 1) % 3]), 1);
    std::sort(edge_use.begin(), edge_use.end());
    std::vector<bool> pinned(static_cast<std::size_t>(total), false);
    for (std::size_t k = 0; k < edge_use.size();)
    {
        std::size_t r = k;
        while (r < edge_use.size() && edge_use[r].first == edge_use[k].first)
            ++r;
        if (r - k == 1)
        {
            pinned[edge_use[k].first / total] = true;
            pinned[edge_use[k].first % total] = true;
        }
        k = r;
    }

    // compact the node numbering to nodes used by kept triangles
    std::vector<int> remap(static_cast<std::size_t>(total), -1);
    for (const auto &t : kept)
        for (int v : t)
            if (remap[v] < 0)
            {
                remap[v] = static_cast<int>(m.nodes.size());
                m.nodes.push_back(all[v]);
                m.interior_mask.push_back(!pinned[v] && status[v] == 2);
            }
    m.triangles.reserve(kept.size());
    for (const auto &t : kept)
        m.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});

    m.free_index.assign(m.nodes.size(), -1);
    for (std::size_t v = 0; v < m.nodes.size(); ++v)
        if (m.interior_mask[v])
        {
            m.free_index[v] = static_cast<int>(m.free_nodes.size());
            m.free_nodes.push_back(static_cast<int>(v));
        }
    if (m.free_nodes.empty())
        throw EmptyMesh("the mesh has no interior node");

    for (const auto &t : m.triangles)
    {
        const Vec2 &a = m.nodes[t[0]], &b = m.nodes[t[1]], &c = m.nodes[t[2]];
        const double twice = cross(b - a, c - a);
        m.cell_areas.push_back(0.5 * twice);
        Eigen::Matrix<double, 2, 3> g;
        g.col(0) = Vec2(b.y() - c.y(), c.x() - b.x()) / twice;
        g.col(1) = Vec2(c.y() - a.y(), a.x() - c.x()) / twice;
        g.col(2) = Vec2(a.y() - b.y(), b.x() - a.x()) / twice;
        m.gradient_maps.push_back(g);
        m.covered_area += 0.5 * twice;
    }
    m.domain_area = domain.area();
    return m;
}

// ---------------------------------------------------------------------------
// discrete functionals

namespace detail
{

// Degree-5 seven-point rule on the reference triangle (barycentric, weights sum to 1).
struct Dunavant7
{
    static constexpr std::array<std::array<double, 3>, 7> points{{
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
        {0.059715871789770, 0.470142064105115, 0.470142064105115},
        {0.470142064105115, 0.059715871789770, 0.470142064105115},
        {0.470142064105115, 0.470142064105115, 0.059715871789770},
        {0.797426985353087, 0.101286507323456, 0.101286507323456},
        {0.101286507323456, 0.797426985353087, 0.101286507323456},
        {0.101286507323456, 0.101286507323456, 0.797426985353087},
    }};
    static constexpr std::array<double, 7> weights{0.225,
                                                   0.132394152788506,
                                                   0.132394152788506,
                                                   0.132394152788506,
                                                   0.125939180544827,
                                                   0.125939180544827,
                                                   0.125939180544827};
};

} // namespace detail

/// Nodal values of a piecewise-linear function on a mesh.
struct DiscreteField
{
    const Mesh *mesh = nullptr;
    std::vector<double> nodal_values;

    DiscreteField() = default;
    explicit DiscreteField(const Mesh &m) : mesh(&m), nodal_values(m.nodes.size(), 0.0) {}
    DiscreteField(const Mesh &m, std::vector<double> values) : mesh(&m), nodal_values(std::move(values))
    {
        if (nodal_values.size() != m.nodes.size())
            throw BadParams("field size does not match the mesh");
        for (std::size_t v = 0; v < nodal_values.size(); ++v)
            if (!m.interior_mask[v])
                nodal_values[v] = 0.0;
    }
};

/// Sum over triangles of H(grad u)^p |T|; exact for the interpolant.
inline double energy(const Anisotropy2D &h, double p, const DiscreteField &u)
{
    const Mesh &m = *u.mesh;
    std::vector<double> partial(chunk_count(m.triangles.size()), 0.0);
    for_each_chunk(m.triangles.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
        double sum = 0.0;
        for (std::size_t t = b; t < e; ++t)
        {
            const auto &tri = m.triangles[t];
            const Vec2 g = m.gradient_maps[t] *
                           Eigen::Vector3d(u.nodal_values[tri[0]], u.nodal_values[tri[1]], u.nodal_values[tri[2]]);
            const double v = h(g);
            sum += m.cell_areas[t] * (p == 2.0 ? v * v : std::pow(v, p));
        }
        partial[c] = sum;
    });
    double total = 0.0;
    for (double s : partial)
        total += s;
    return total;
}

/// Integral of |u|^p by the seven-point rule per triangle (exact for p = 2).
inline double mass(double p, const DiscreteField &u)
{
    const Mesh &m = *u.mesh;
    std::vector<double> partial(chunk_count(m.triangles.size()), 0.0);
    for_each_chunk(m.triangles.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
        double sum = 0.0;
        for (std::size_t t = b; t < e; ++t)
        {
            const auto &tri = m.triangles[t];
            const double u0 = u.nodal_values[tri[0]], u1 = u.nodal_values[tri[1]], u2 = u.nodal_values[tri[2]];
            double s = 0.0;
            for (int q = 0; q < 7; ++q)
            {
                const auto &l = detail::Dunavant7::points[q];
                const double v = std::abs(l[0] * u0 + l[1] * u1 + l[2] * u2);
                s += detail::Dunavant7::weights[q] * (p == 2.0 ? v * v : std::pow(v, p));
            }
            sum += m.cell_areas[t] * s;
        }
        partial[c] = sum;
    });
    double total = 0.0;
    for (double s : partial)
        total += s;
    return total;
}

/// Energy over mass.
inline double rayleigh_2d(const Anisotropy2D &h, double p, const DiscreteField &u)
{
    check_exponent(p);
    const double mm = mass(p, u);
    if (!(mm > 0.0))
        throw ZeroProfile("field is identically zero");
    return energy(h, p, u) / mm;
}

// ---------------------------------------------------------------------------
// minimization

struct SolverOptions
{
    double p = 2.0;
    int resolution = 64;
    std::uint64_t seed = 0;
    /// regularization levels delta, largest first; an exact stage always follows
    std::vector<double> continuation{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    int max_iters = 50000;
    double rel_tol = 1e-10;
    double stage_rel_tol = 1e-7;
    /// also smooth the vertex kinks of support-polygon anisotropies during
    /// the regularized stages
    bool smooth_kinks = true;
    /// move grid nodes near the boundary onto it (see build_mesh)
    bool snap_boundary = true;
    /// return the last iterate instead of throwing NonConvergence
    bool allow_partial = false;
    /// keep the descent record of the exact stage
    bool record_history = false;
};

struct SpectralReport
{
    double lambda_estimate = 0.0;
    std::string method = "solver"; ///< "solver" or "closed_form"
    double p = 2.0;
    double mesh_h = 0.0;
    int resolution = 0;
    std::size_t nodes = 0;
    std::size_t unknowns = 0;
    std::size_t triangles = 0;
    std::vector<double> continuation_schedule;
    int iterations = 0;
    double final_relative_decrease = 0.0;
    double coverage_ratio = 0.0;
    bool converged = true;
    std::uint64_t seed = 0;
    std::vector<double> history; ///< exact-stage quotient after each accepted step
};

struct SolveResult
{
    SpectralReport report;
    DiscreteField field; ///< unit L^p norm
};

namespace detail
{

// Average of g g^T over unit directions, g a subgradient of H: an
// anisotropic diffusion tensor whose stiffness matrix preconditions the
// Hessian of the energy.
inline Mat2 preconditioner_tensor(const Anisotropy2D &h)
{
    Mat2 m = Mat2::Zero();
    const int n = 256;
    for (int k = 0; k < n; ++k)
    {
        const Vec2 g = h.subgradient(unit_vector(kTwoPi * (k + 0.5) / n));
        m += g * g.transpose();
    }
    m /= n;
    const double tr = m.trace();
    if (!(tr > 0.0))
        return Mat2::Identity();
    return m + 1e-3 * tr * Mat2::Identity();
}

// The anisotropy seen by one continuation stage. At delta > 0 it is the
// regularization sqrt(delta |v|^2 + H(v)^2); when H is a support polygon the
// max over vertices is additionally replaced by the l^m-sum of the positive
// parts with m = 1/delta, which is smooth, convex, 1-homogeneous, and lies
// between H and k^(1/m) H for k vertices. At delta = 0 it is H itself.
class StageAnisotropy
{
public:
    StageAnisotropy(const Anisotropy2D &h, double delta, bool smooth_kinks) : h_(h), delta_(delta)
    {
        if (delta > 0.0 && smooth_kinks)
            if (const auto *poly = std::get_if<SupportPolygon>(&h.representation()))
            {
                vertices_ = poly->vertices;
                m_ = 1.0 / delta;
            }
    }

    /// H_stage(v); writes a gradient (minimal-norm subgradient at kinks).
    double operator()(const Vec2 &v, Vec2 &grad) const
    {
        double base;
        Vec2 g;
        if (m_ > 0.0)
            base = soft_max(v, g);
        else
        {
            base = h_(v);
            g = h_.subgradient(v);
        }
        if (delta_ <= 0.0)
        {
            grad = g;
            return base;
        }
        const double value = std::sqrt(delta_ * v.squaredNorm() + base * base);
        grad = value > 0.0 ? Vec2((delta_ * v + base * g) / value) : Vec2::Zero();
        return value;
    }

private:
    double soft_max(const Vec2 &v, Vec2 &grad) const
    {
        double top = 0.0;
        for (const auto &q : vertices_)
            top = std::max(top, v.dot(q));
        grad.setZero();
        if (!(top > 0.0))
            return 0.0;
        double sum = 0.0;
        for (const auto &q : vertices_)
        {
            const double r = v.dot(q) / top;
            if (r <= 0.0)
                continue;
            const double rm1 = std::pow(r, m_ - 1.0);
            sum += rm1 * r;
            grad += rm1 * q;
        }
        const double s = std::pow(sum, 1.0 / m_);
        grad *= s / sum;
        return top * s;
    }

    const Anisotropy2D &h_;
    double delta_;
    std::vector<Vec2> vertices_;
    double m_ = 0.0;
};

class QuotientProblem
{
public:
    QuotientProblem(const Mesh &mesh, double p) : mesh_(mesh), p_(p), full_(mesh.nodes.size(), 0.0)
    {
        elem_.resize(mesh.triangles.size());
    }

    void set_anisotropy(const StageAnisotropy *h) { h_ = h; }

    void expand(const Eigen::VectorXd &x)
    {
        for (std::size_t k = 0; k < mesh_.free_nodes.size(); ++k)
            full_[mesh_.free_nodes[k]] = x[static_cast<Eigen::Index>(k)];
    }

    const std::vector<double> &full() const { return full_; }

    double mass_of(const Eigen::VectorXd &x)
    {
        expand(x);
        return mass(p_, DiscreteField{mesh_, full_});
    }

    double operator()(const Eigen::VectorXd &x, Eigen::VectorXd &grad)
    {
        expand(x);
        const double p = p_;
        const bool quadratic = p == 2.0;
        std::vector<double> e_part(chunk_count(mesh_.triangles.size()), 0.0), m_part(e_part.size(), 0.0);
        for_each_chunk(mesh_.triangles.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
            double es = 0.0, ms = 0.0;
            for (std::size_t t = b; t < e; ++t)
            {
                const auto &tri = mesh_.triangles[t];
                const double area = mesh_.cell_areas[t];
                const Eigen::Vector3d uv(full_[tri[0]], full_[tri[1]], full_[tri[2]]);
                const auto &G = mesh_.gradient_maps[t];
                const Vec2 g = G * uv;
                Vec2 dh;
                const double hv = (*h_)(g, dh);
                ElementTerms &out = elem_[t];
                if (hv > 1e-300)
                {
                    const double hp1 = quadratic ? hv : std::pow(hv, p - 1.0);
                    es += area * hp1 * hv;
                    out.energy = (area * p * hp1) * (G.transpose() * dh);
                }
                else
                    out.energy.setZero();
                out.mass.setZero();
                double s = 0.0;
                for (int q = 0; q < 7; ++q)
                {
                    const auto &l = Dunavant7::points[q];
                    const double v = l[0] * uv[0] + l[1] * uv[1] + l[2] * uv[2];
                    const double av = std::abs(v);
                    const double w = Dunavant7::weights[q] * area;
                    const double pm1 = quadratic ? av : std::pow(av, p - 1.0);
                    s += w * pm1 * av;
                    const double d = w * p * pm1 * (v < 0.0 ? -1.0 : 1.0);
                    out.mass += d * Eigen::Vector3d(l[0], l[1], l[2]);
                }
                ms += s;
            }
            e_part[c] = es;
            m_part[c] = ms;
        });
        double E = 0.0, M = 0.0;
        for (std::size_t c = 0; c < e_part.size(); ++c)
        {
            E += e_part[c];
            M += m_part[c];
        }
        const double R = E / M;
        grad.setZero();
        for (std::size_t t = 0; t < mesh_.triangles.size(); ++t)
        {
            const auto &tri = mesh_.triangles[t];
            for (int k = 0; k < 3; ++k)
            {
                const int f = mesh_.free_index[tri[k]];
                if (f >= 0)
                    grad[f] += elem_[t].energy[k] - R * elem_[t].mass[k];
            }
        }
        grad /= M;
        return R;
    }

private:
    struct ElementTerms
    {
        Eigen::Vector3d energy = Eigen::Vector3d::Zero();
        Eigen::Vector3d mass = Eigen::Vector3d::Zero();
    };

    const Mesh &mesh_;
    double p_;
    const StageAnisotropy *h_ = nullptr;
    std::vector<double> full_;
    std::vector<ElementTerms> elem_;
};

inline Eigen::SparseMatrix<double> stiffness(const Mesh &mesh, const Mat2 &tensor)
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.triangles.size() * 9);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    {
        const auto &tri = mesh.triangles[t];
        const auto &G = mesh.gradient_maps[t];
        const Eigen::Matrix3d k = mesh.cell_areas[t] * G.transpose() * tensor * G;
        for (int i = 0; i < 3; ++i)
        {
            const int fi = mesh.free_index[tri[i]];
            if (fi < 0)
                continue;
            for (int j = 0; j < 3; ++j)
            {
                const int fj = mesh.free_index[tri[j]];
                if (fj >= 0)
                    trip.emplace_back(fi, fj, k(i, j));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.free_count());
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

} // namespace detail

/// Positive tent (distance to the boundary) times (1 + 0.01 U), U uniform in
/// [0, 1) from a seeded 64-bit Mersenne twister.
inline DiscreteField initial_field(const Mesh &mesh, const Polygon &domain, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    DiscreteField u(mesh);
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v)
    {
        const double noise = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (mesh.interior_mask[v])
            u.nodal_values[v] = domain.boundary_distance(mesh.nodes[v]) * (1.0 + 0.01 * noise);
    }
    return u;
}

/// Transfer a field to another mesh by piecewise-linear interpolation.
inline DiscreteField transfer_field(const DiscreteField &from, const Mesh &to)
{
    DiscreteField out(to);
    for (std::size_t v = 0; v < to.nodes.size(); ++v)
        if (to.interior_mask[v])
            out.nodal_values[v] = from.mesh->interpolate(from.nodal_values, to.nodes[v]);
    return out;
}

/// Minimize the discrete Rayleigh quotient on a prebuilt mesh, starting from
/// `start` (or the seeded tent). Throws NonConvergence when the exact stage
/// hits the iteration cap unless `allow_partial` is set.
inline SolveResult minimize_on_mesh(const Anisotropy2D &h, const Mesh &mesh, const Polygon &domain,
                                    const SolverOptions &opt, const DiscreteField *start = nullptr)
{
    check_exponent(opt.p);
    if (h.is_zero() || !(norm_sup(h) > 0.0))
        throw ZeroAnisotropy("the zero anisotropy has vanishing frequency");

    DiscreteField u0 = start ? *start : initial_field(mesh, domain, opt.seed);
    if (u0.mesh != &mesh)
        u0 = transfer_field(u0, mesh);
    Eigen::VectorXd x(static_cast<Eigen::Index>(mesh.free_count()));
    for (std::size_t k = 0; k < mesh.free_count(); ++k)
        x[static_cast<Eigen::Index>(k)] = u0.nodal_values[mesh.free_nodes[k]];
    if (!(x.cwiseAbs().maxCoeff() > 0.0))
        throw ZeroProfile("starting field vanishes on the free nodes");

    detail::QuotientProblem problem(mesh, opt.p);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(detail::stiffness(mesh, detail::preconditioner_tensor(h)));
    if (ldlt.info() != Eigen::Success)
        throw NonConvergence("preconditioner factorization failed", 0.0);
    auto precondition = [&](const Eigen::VectorXd &g) { return Eigen::VectorXd(ldlt.solve(g)); };
    auto normalize = [&](Eigen::VectorXd &v) { v /= std::pow(problem.mass_of(v), 1.0 / opt.p); };
    auto objective = [&](const Eigen::VectorXd &v, Eigen::VectorXd &g) { return problem(v, g); };

    SolveResult out;
    SpectralReport &rep = out.report;
    rep.p = opt.p;
    rep.mesh_h = mesh.h;
    rep.resolution = mesh.resolution;
    rep.nodes = mesh.nodes.size();
    rep.unknowns = mesh.free_count();
    rep.triangles = mesh.triangles.size();
    rep.coverage_ratio = mesh.coverage_ratio();
    rep.seed = opt.seed;
    rep.continuation_schedule = opt.continuation;

    LbfgsResult last;
    std::vector<double> stages = opt.continuation;
    stages.push_back(0.0);
    for (double delta : stages)
    {
        const detail::StageAnisotropy stage_h(h, delta, opt.smooth_kinks);
        problem.set_anisotropy(&stage_h);
        LbfgsOptions lo;
        lo.max_iters = opt.max_iters;
        lo.rel_tol = delta > 0.0 ? opt.stage_rel_tol : opt.rel_tol;
        lo.record_history = delta == 0.0 && opt.record_history;
        last = lbfgs_minimize_quotient(x, objective, precondition, normalize, lo);
        rep.iterations += last.iterations;
    }
    rep.lambda_estimate = last.value;
    rep.final_relative_decrease = last.final_relative_decrease;
    rep.converged = last.converged;
    rep.history = std::move(last.history);
    problem.expand(x);
    out.field = DiscreteField(mesh, problem.full());
    if (!rep.converged && !opt.allow_partial)
        throw NonConvergence("solver reached its iteration cap", rep.lambda_estimate);
    return out;
}

/// Estimate lambda_p^H(Omega) from above on a mesh at opt.resolution.
/// The returned field refers to `mesh_out`, which must outlive it.
inline SolveResult minimize(const Anisotropy2D &h, const Polygon &domain, const SolverOptions &opt, Mesh &mesh_out)
{
    mesh_out = build_mesh(domain, opt.resolution, opt.snap_boundary);
    return minimize_on_mesh(h, mesh_out, domain, opt);
}

inline SpectralReport minimize(const Anisotropy2D &h, const Polygon &domain, const SolverOptions &opt)
{
    Mesh mesh;
    return minimize(h, domain, opt, mesh).report;
}

struct RefinementStudy
{
    std::vector<SpectralReport> reports;
    bool monotone = true;
    /// Richardson estimate of the continuum value. With three or more levels
    /// and geometric convergence the order is fitted from the last three
    /// (Aitken); otherwise second order is assumed from the last two.
    double extrapolated = 0.0;
    /// fitted convergence order in h (0 when second order was assumed)
    double observed_order = 0.0;
};

/// Solve on increasing resolutions, each warm-started from the previous
/// minimizer; the estimates must not increase (within 1e-9 relative).
inline RefinementStudy refine_study(const Anisotropy2D &h, const Polygon &domain, SolverOptions opt,
                                    const std::vector<int> &resolutions)
{
    if (resolutions.size() < 2)
        throw BadParams("refine_study needs at least two resolutions");
    for (std::size_t k = 1; k < resolutions.size(); ++k)
        if (resolutions[k] <= resolutions[k - 1])
            throw BadParams("refine_study resolutions must increase");
    RefinementStudy study;
    std::vector<Mesh> meshes(resolutions.size());
    DiscreteField previous;
    for (std::size_t k = 0; k < resolutions.size(); ++k)
    {
        opt.resolution = resolutions[k];
        meshes[k] = build_mesh(domain, resolutions[k], opt.snap_boundary);
        auto res = minimize_on_mesh(h, meshes[k], domain, opt, k == 0 ? nullptr : &previous);
        if (k > 0 && res.report.lambda_estimate > study.reports.back().lambda_estimate * (1.0 + 1e-9))
            study.monotone = false;
        study.reports.push_back(res.report);
        previous = std::move(res.field);
    }
    const std::size_t n = study.reports.size();
    const double lf = study.reports[n - 1].lambda_estimate;
    const double lc = study.reports[n - 2].lambda_estimate;
    const double r = static_cast<double>(resolutions[n - 1]) / resolutions[n - 2];
    study.extrapolated = lf + (lf - lc) / (r * r - 1.0);
    if (n >= 3)
    {
        const double l0 = study.reports[n - 3].lambda_estimate;
        const double r0 = static_cast<double>(resolutions[n - 2]) / resolutions[n - 3];
        const double d1 = lc - l0, d2 = lf - lc;
        // equal refinement ratios and a contracting sequence of differences
        if (std::abs(r - r0) < 1e-12 && d1 != 0.0 && d2 / d1 > 0.0 && d2 / d1 < 1.0)
        {
            const double q = d2 / d1;
            study.observed_order = -std::log(q) / std::log(r);
            study.extrapolated = lf + d2 * q / (1.0 - q);
        }
    }
    return study;
}

} // namespace aniso
