#pragma once

// JSON and CSV input/output. Angles are radians throughout. Parsing errors
// are reported as InvalidInput with the offending field path (or the line
// and column for malformed JSON text).

#include "anisotropy.hpp"
#include "geometry.hpp"
#include "oned.hpp"
#include "solver2d.hpp"
#include "spectral.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace aniso
{

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// reading

/// Parse JSON text; syntax errors carry line and column.
inline Json parse_json(const std::string &text, const std::string &source = "input")
{
    try
    {
        return Json::parse(text);
    }
    catch (const Json::parse_error &e)
    {
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i)
        {
            if (text[i] == '\n')
            {
                ++line;
                column = 1;
            }
            else
                ++column;
        }
        throw InvalidInput(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                           ": malformed JSON (" + e.what() + ")");
    }
}

inline std::string read_text_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json read_json_file(const std::string &path) { return parse_json(read_text_file(path), path); }

namespace detail
{

inline const Json &require(const Json &j, const char *key, const std::string &where)
{
    if (!j.is_object())
        throw InvalidInput(where + ": expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        throw InvalidInput(where + "." + key + ": missing field");
    return *it;
}

inline double number(const Json &j, const std::string &where)
{
    if (!j.is_number())
        throw InvalidInput(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw InvalidInput(where + ": not finite");
    return v;
}

inline double number_field(const Json &j, const char *key, const std::string &where)
{
    return number(require(j, key, where), where + "." + key);
}

inline double number_field_or(const Json &j, const char *key, double fallback, const std::string &where)
{
    const auto it = j.find(key);
    return it == j.end() ? fallback : number(*it, where + "." + key);
}

inline Vec2 point(const Json &j, const std::string &where)
{
    if (!j.is_array() || j.size() != 2)
        throw InvalidInput(where + ": expected [x, y]");
    return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

inline std::vector<Vec2> points(const Json &j, const std::string &where)
{
    if (!j.is_array())
        throw InvalidInput(where + ": expected an array of [x, y] points");
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(point(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline Json points_json(const std::vector<Vec2> &pts)
{
    Json a = Json::array();
    for (const auto &p : pts)
        a.push_back({p.x(), p.y()});
    return a;
}

inline const char *variant_name(SplitVariant v)
{
    switch (v)
    {
    case SplitVariant::E1:
        return "E1";
    case SplitVariant::E3a:
        return "E3a";
    case SplitVariant::E3b:
        return "E3b";
    }
    return "E1";
}

} // namespace detail

/// {"outer": [[x, y], ...], "holes": [[[x, y], ...], ...]}
inline Polygon polygon_from_json(const Json &j, const std::string &where = "domain")
{
    auto outer = detail::points(detail::require(j, "outer", where), where + ".outer");
    std::vector<Loop> holes;
    if (const auto it = j.find("holes"); it != j.end())
    {
        if (!it->is_array())
            throw InvalidInput(where + ".holes: expected an array of loops");
        for (std::size_t i = 0; i < it->size(); ++i)
            holes.push_back(detail::points((*it)[i], where + ".holes[" + std::to_string(i) + "]"));
    }
    try
    {
        return Polygon(std::move(outer), std::move(holes));
    }
    catch (const InvalidPolygon &e)
    {
        throw InvalidInput(where + ": " + e.what());
    }
}

inline Json polygon_to_json(const Polygon &poly)
{
    Json j;
    j["outer"] = detail::points_json(poly.outer());
    Json holes = Json::array();
    for (const auto &h : poly.holes())
        holes.push_back(detail::points_json(h));
    j["holes"] = holes;
    return j;
}

/// {"kind": "support_polygon" | "asymmetric_linear" | "euclidean" |
/// "split_pnorm" | "regularized", ...variant fields}
inline Anisotropy2D anisotropy_from_json(const Json &j, const std::string &where = "anisotropy")
{
    const Json &kind_j = detail::require(j, "kind", where);
    if (!kind_j.is_string())
        throw InvalidInput(where + ".kind: expected a string");
    const std::string kind = kind_j.get<std::string>();
    try
    {
        if (kind == "support_polygon")
            return Anisotropy2D::support_polygon(detail::points(detail::require(j, "vertices", where), where + ".vertices"));
        if (kind == "asymmetric_linear")
            return Anisotropy2D::asymmetric_linear(detail::number_field(j, "a", where), detail::number_field(j, "b", where),
                                                   detail::number_field_or(j, "theta", kPi / 2.0, where));
        if (kind == "euclidean")
            return Anisotropy2D::euclidean(detail::number_field_or(j, "c", 1.0, where));
        if (kind == "split_pnorm")
        {
            const Json &v = detail::require(j, "variant", where);
            const std::string name = v.is_string() ? v.get<std::string>() : "";
            SplitVariant variant;
            if (name == "E1")
                variant = SplitVariant::E1;
            else if (name == "E3a")
                variant = SplitVariant::E3a;
            else if (name == "E3b")
                variant = SplitVariant::E3b;
            else
                throw InvalidInput(where + ".variant: expected \"E1\", \"E3a\" or \"E3b\"");
            return Anisotropy2D::split_pnorm(detail::number_field(j, "a", where),
                                             detail::number_field_or(j, "q", 2.0, where), variant,
                                             detail::number_field_or(j, "kappa", 1.0, where),
                                             detail::number_field_or(j, "frame", 0.0, where));
        }
        if (kind == "regularized")
            return Anisotropy2D::regularized(detail::number_field(j, "epsilon", where),
                                             anisotropy_from_json(detail::require(j, "base", where), where + ".base"));
    }
    catch (const InvalidAnisotropy &e)
    {
        throw InvalidInput(where + ": " + e.what());
    }
    throw InvalidInput(where + ".kind: unknown anisotropy kind \"" + kind + "\"");
}

inline Json anisotropy_to_json(const Anisotropy2D &h)
{
    return std::visit(
        [](const auto &r) -> Json {
            using T = std::decay_t<decltype(r)>;
            Json j;
            if constexpr (std::is_same_v<T, SupportPolygon>)
            {
                j["kind"] = "support_polygon";
                j["vertices"] = detail::points_json(r.vertices);
            }
            else if constexpr (std::is_same_v<T, AsymmetricLinear>)
            {
                j["kind"] = "asymmetric_linear";
                j["a"] = r.a;
                j["b"] = r.b;
                j["theta"] = r.theta;
            }
            else if constexpr (std::is_same_v<T, EuclideanScaled>)
            {
                j["kind"] = "euclidean";
                j["c"] = r.c;
            }
            else if constexpr (std::is_same_v<T, SplitPNorm>)
            {
                j["kind"] = "split_pnorm";
                j["a"] = r.a;
                j["q"] = r.q;
                j["variant"] = detail::variant_name(r.variant);
                j["kappa"] = r.kappa;
                j["frame"] = r.frame;
            }
            else
            {
                j["kind"] = "regularized";
                j["epsilon"] = r.epsilon;
                j["base"] = anisotropy_to_json(*r.base);
            }
            return j;
        },
        h.representation());
}

/// {"p", "resolution", "seed", "continuation", "max_iters"}; absent fields
/// keep the values of `base`.
inline SolverOptions solver_options_from_json(const Json &j, SolverOptions base = {}, const std::string &where = "config")
{
    if (!j.is_object())
        throw InvalidInput(where + ": expected an object");
    base.p = detail::number_field_or(j, "p", base.p, where);
    if (const auto it = j.find("resolution"); it != j.end())
    {
        if (!it->is_number_integer())
            throw InvalidInput(where + ".resolution: expected an integer");
        base.resolution = it->get<int>();
    }
    if (const auto it = j.find("seed"); it != j.end())
    {
        if (!it->is_number_unsigned())
            throw InvalidInput(where + ".seed: expected a nonnegative integer");
        base.seed = it->get<std::uint64_t>();
    }
    if (const auto it = j.find("continuation"); it != j.end())
    {
        if (!it->is_array())
            throw InvalidInput(where + ".continuation: expected an array");
        base.continuation.clear();
        for (std::size_t i = 0; i < it->size(); ++i)
        {
            const double d = detail::number((*it)[i], where + ".continuation[" + std::to_string(i) + "]");
            if (!(d > 0.0))
                throw InvalidInput(where + ".continuation: levels must be positive");
            base.continuation.push_back(d);
        }
    }
    if (const auto it = j.find("max_iters"); it != j.end())
    {
        if (!it->is_number_integer() || it->get<long long>() < 1)
            throw InvalidInput(where + ".max_iters: expected a positive integer");
        base.max_iters = it->get<int>();
    }
    return base;
}

inline Json solver_options_to_json(const SolverOptions &o)
{
    return {{"p", o.p},
            {"resolution", o.resolution},
            {"seed", o.seed},
            {"continuation", o.continuation},
            {"max_iters", o.max_iters}};
}

// ---------------------------------------------------------------------------
// reports

inline Json report_to_json(const SpectralReport &r)
{
    Json j;
    j["lambda"] = r.lambda_estimate;
    j["method"] = r.method;
    j["p"] = r.p;
    if (r.method == "solver")
    {
        j["mesh_h"] = r.mesh_h;
        j["resolution"] = r.resolution;
        j["nodes"] = r.nodes;
        j["unknowns"] = r.unknowns;
        j["triangles"] = r.triangles;
        j["continuation_schedule"] = r.continuation_schedule;
        j["iterations"] = r.iterations;
        j["final_relative_decrease"] = r.final_relative_decrease;
        j["coverage_ratio"] = r.coverage_ratio;
        j["seed"] = r.seed;
    }
    j["converged"] = r.converged;
    return j;
}

inline Json bounds_to_json(const BoundsReport &b)
{
    Json j;
    j["p"] = b.p;
    j["domain"] = b.domain_id;
    j["lambda_min"] = b.lambda_min;
    j["lambda_max"] = b.lambda_max;
    j["argmin_theta"] = b.argmin_theta;
    j["sup_width"] = b.sup_width;
    j["design_attained"] = b.design_attained;
    if (b.lambda_max_report)
        j["lambda_max_report"] = report_to_json(*b.lambda_max_report);
    return j;
}

inline Json width_summary_to_json(const WidthCurve &c)
{
    return {{"sup", c.sup_value},
            {"argmax", c.argmax_theta},
            {"attained", c.attained},
            {"samples", c.thetas.size()},
            {"discontinuities", c.discontinuities}};
}

inline Json kernel_to_json(const KernelClass &k)
{
    Json j;
    j["category"] = category_name(k.category);
    using C = KernelClass::Category;
    if (k.category == C::HalfLine || k.category == C::Line || k.category == C::HalfPlane)
        j["angle"] = k.first;
    if (k.category == C::Sector)
        j["angles"] = {k.first, k.second};
    return j;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail
{
inline std::ostream &csv_number(std::ostream &os, double v) { return os << std::setprecision(17) << v; }
} // namespace detail

/// theta,L_theta
inline void write_width_csv(std::ostream &os, const WidthCurve &c)
{
    os << "theta,L_theta\n";
    for (std::size_t i = 0; i < c.thetas.size(); ++i)
    {
        detail::csv_number(os, c.thetas[i]) << ',';
        detail::csv_number(os, c.values[i]) << '\n';
    }
}

/// x,y,u at every mesh node
inline void write_field_csv(std::ostream &os, const DiscreteField &u)
{
    os << "x,y,u\n";
    for (std::size_t v = 0; v < u.mesh->nodes.size(); ++v)
    {
        detail::csv_number(os, u.mesh->nodes[v].x()) << ',';
        detail::csv_number(os, u.mesh->nodes[v].y()) << ',';
        detail::csv_number(os, u.nodal_values[v]) << '\n';
    }
}

/// t,u for a 1D profile sampled at n + 1 uniform nodes
inline void write_profile_csv(std::ostream &os, const Interval &interval, const std::vector<double> &values)
{
    os << "t,u\n";
    const std::size_t n = values.size() - 1;
    for (std::size_t i = 0; i <= n; ++i)
    {
        detail::csv_number(os, interval.left + interval.length() * static_cast<double>(i) / static_cast<double>(n)) << ',';
        detail::csv_number(os, values[i]) << '\n';
    }
}

/// k,area,closed_form_bound,ratio,solver_estimate (empty when not solved)
inline void write_divergence_csv(std::ostream &os, const DivergenceTable &t)
{
    os << "k,area,closed_form_bound,ratio,solver_estimate\n";
    for (const auto &r : t.rows)
    {
        os << r.k << ',';
        detail::csv_number(os, r.area) << ',';
        detail::csv_number(os, r.closed_form_bound) << ',';
        detail::csv_number(os, r.ratio) << ',';
        if (r.solver_estimate)
            detail::csv_number(os, *r.solver_estimate);
        os << '\n';
    }
}

} // namespace aniso
