// aniso_spectra: command-line front end.
//
// Exit codes: 0 success, 1 acceptance failure, 2 input error,
// 3 numerical non-convergence. Structured output is JSON on stdout (and in
// --out when given); curves and fields go to CSV files.

#include <aniso.hpp>
#include <aniso/acceptance.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{

using aniso::Json;

constexpr int kExitOk = 0;
constexpr int kExitAcceptance = 1;
constexpr int kExitInput = 2;
constexpr int kExitNonConvergence = 3;

struct GlobalOptions
{
    int threads = 0;
    std::string manifest;
};

/// Everything a command produced; used for output and the run manifest.
struct Outcome
{
    Json result;
    Json inputs = Json::object();
    std::vector<std::string> outputs;
    std::optional<std::uint64_t> seed;
    int exit_code = kExitOk;
};

void write_file(const std::string &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw aniso::InvalidInput("cannot write " + path);
    out << content;
    if (!out)
        throw aniso::InvalidInput("failed writing " + path);
}

template <class Writer>
void write_csv(const std::string &path, Outcome &o, Writer &&writer)
{
    std::ostringstream ss;
    writer(ss);
    write_file(path, ss.str());
    o.outputs.push_back(path);
}

void emit_json(const Json &j, const std::string &out_path, Outcome &o)
{
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty())
    {
        write_file(out_path, text);
        o.outputs.push_back(out_path);
    }
}

/// Canonical record of an input file: its parsed content.
Json file_input(const std::string &path) { return {{"path", path}, {"content", aniso::read_json_file(path)}}; }

std::string stem(const std::string &path) { return std::filesystem::path(path).stem().string(); }

// ---------------------------------------------------------------------------
// commands

struct Freq1dArgs
{
    double p = 2.0;
    std::vector<double> interval{-1.0, 1.0};
    double a = 1.0, b = 1.0;
    int oracle = 0;
    std::string profile_csv, out;
};

Outcome cmd_freq1d(const Freq1dArgs &args)
{
    Outcome o;
    const aniso::Interval interval(args.interval.at(0), args.interval.at(1));
    const double lambda = aniso::lambda_ab(args.p, interval, args.a, args.b);
    const auto u = aniso::extremizer_ab(args.p, interval, args.a, args.b);
    o.inputs = {{"p", args.p}, {"interval", args.interval}, {"a", args.a}, {"b", args.b}, {"oracle", args.oracle}};

    const double residual = aniso::euler_lagrange_residual_1d(args.p, interval, args.a, args.b, lambda,
                                                             [&](double t) { return u(t); });
    Json j = {{"lambda", lambda},
              {"t0", u.t0()},
              {"formula", "closed_form"},
              {"residual", residual},
              {"p", args.p},
              {"interval", args.interval},
              {"a", args.a},
              {"b", args.b}};
    if (args.oracle > 0)
    {
        try
        {
            const auto r = aniso::oracle_minimize_1d(args.p, interval, args.a, args.b, args.oracle);
            j["oracle"] = {{"lambda", r.lambda},
                           {"nodes", args.oracle},
                           {"iterations", r.iterations},
                           {"relative_gap", (r.lambda - lambda) / lambda},
                           {"converged", r.converged}};
            if (!args.profile_csv.empty())
                write_csv(args.profile_csv, o, [&](std::ostream &os) { aniso::write_profile_csv(os, interval, r.profile); });
        }
        catch (const aniso::NonConvergence &e)
        {
            j["oracle"] = {{"lambda", e.partial_value()}, {"nodes", args.oracle}, {"converged", false}};
            o.exit_code = kExitNonConvergence;
        }
    }
    else if (!args.profile_csv.empty())
    {
        // the closed-form extremizer, normalized to unit maximum
        write_csv(args.profile_csv, o, [&](std::ostream &os) { aniso::write_profile_csv(os, interval, u.sample(2001)); });
    }
    emit_json(j, args.out, o);
    o.result = std::move(j);
    return o;
}

struct Freq2dArgs
{
    std::string domain, anisotropy, config;
    std::optional<double> p;
    std::optional<int> resolution;
    std::optional<std::uint64_t> seed;
    bool closed_form = false;
    std::string field_csv, out;
};

Outcome cmd_freq2d(const Freq2dArgs &args)
{
    Outcome o;
    const aniso::Polygon domain = aniso::polygon_from_json(aniso::read_json_file(args.domain));
    const aniso::Anisotropy2D h = aniso::anisotropy_from_json(aniso::read_json_file(args.anisotropy));
    aniso::SolverOptions opt;
    if (!args.config.empty())
        opt = aniso::solver_options_from_json(aniso::read_json_file(args.config), opt, args.config);
    if (args.p)
        opt.p = *args.p;
    if (args.resolution)
        opt.resolution = *args.resolution;
    if (args.seed)
        opt.seed = *args.seed;
    aniso::check_exponent(opt.p);
    if (opt.resolution < 2)
        throw aniso::BadParams("resolution must be at least 2");
    opt.allow_partial = true;

    o.inputs = {{"domain", file_input(args.domain)},
                {"anisotropy", file_input(args.anisotropy)},
                {"options", aniso::solver_options_to_json(opt)},
                {"closed_form", args.closed_form}};
    o.seed = opt.seed;

    Json j;
    if (args.closed_form)
    {
        const auto red = aniso::reduce_degenerate(h, opt.p, domain);
        aniso::SpectralReport rep;
        rep.lambda_estimate = red.lambda;
        rep.method = "closed_form";
        rep.p = opt.p;
        rep.converged = true;
        j = aniso::report_to_json(rep);
        j["width"] = red.L;
        j["a"] = red.normal_form.a;
        j["b"] = red.normal_form.b;
        j["rotation_angle"] = red.normal_form.rotation.angle();
        // with a half-plane kernel the infimum is approached, not attained
        j["attained"] = red.normal_form.b > 0.0;
        if (!args.field_csv.empty())
            throw aniso::BadParams("--field-csv needs the solver; drop --closed-form");
    }
    else
    {
        aniso::Mesh mesh;
        const auto solved = aniso::minimize(h, domain, opt, mesh);
        j = aniso::report_to_json(solved.report);
        if (!args.field_csv.empty())
            write_csv(args.field_csv, o, [&](std::ostream &os) { aniso::write_field_csv(os, solved.field); });
        if (!solved.report.converged)
            o.exit_code = kExitNonConvergence;
    }
    emit_json(j, args.out, o);
    o.result = std::move(j);
    return o;
}

struct WidthArgs
{
    std::string domain, csv, out;
    int samples = 720;
};

Outcome cmd_width(const WidthArgs &args)
{
    Outcome o;
    if (args.samples < 8)
        throw aniso::BadParams("--samples must be at least 8");
    const aniso::Polygon domain = aniso::polygon_from_json(aniso::read_json_file(args.domain));
    o.inputs = {{"domain", file_input(args.domain)}, {"samples", args.samples}};
    const auto curve = aniso::width_curve(domain, args.samples);
    if (!args.csv.empty())
        write_csv(args.csv, o, [&](std::ostream &os) { aniso::write_width_csv(os, curve); });
    Json j = aniso::width_summary_to_json(curve);
    emit_json(j, args.out, o);
    o.result = std::move(j);
    return o;
}

struct BoundsArgs
{
    std::string domain, out;
    double p = 2.0;
    int resolution = 64;
    int samples = 720;
};

Outcome cmd_bounds(const BoundsArgs &args)
{
    Outcome o;
    if (args.samples < 8)
        throw aniso::BadParams("--samples must be at least 8");
    if (args.resolution < 2)
        throw aniso::BadParams("resolution must be at least 2");
    const aniso::Polygon domain = aniso::polygon_from_json(aniso::read_json_file(args.domain));
    aniso::SolverOptions opt;
    opt.p = args.p;
    opt.resolution = args.resolution;
    o.inputs = {{"domain", file_input(args.domain)},
                {"p", args.p},
                {"resolution", args.resolution},
                {"samples", args.samples}};
    o.seed = opt.seed;
    auto rep = aniso::bounds(args.p, domain, opt, args.samples);
    rep.domain_id = stem(args.domain);
    Json j = aniso::bounds_to_json(rep);
    emit_json(j, args.out, o);
    o.result = std::move(j);
    return o;
}

struct ClassifyArgs
{
    std::string anisotropy, out;
};

Outcome cmd_classify(const ClassifyArgs &args)
{
    Outcome o;
    const auto h = aniso::anisotropy_from_json(aniso::read_json_file(args.anisotropy));
    o.inputs = {{"anisotropy", file_input(args.anisotropy)}};
    const auto k = aniso::kernel_classify(h);
    Json j;
    j["kernel"] = aniso::category_name(k.category);
    j["kernel_detail"] = aniso::kernel_to_json(k);
    j["norm"] = aniso::norm_sup(h);
    using C = aniso::KernelClass::Category;
    if (k.category == C::Line || k.category == C::HalfPlane)
    {
        const auto nf = aniso::rotation_normal_form(h);
        j["a"] = nf.a;
        j["b"] = nf.b;
        j["normal_form"] = {{"rotation_angle", nf.rotation.angle()}, {"a", nf.a}, {"b", nf.b}};
    }
    Json dirs = Json::array();
    for (const auto &v : aniso::differentiability_scan(h))
        dirs.push_back({v.x(), v.y()});
    j["non_c1_directions"] = dirs;
    emit_json(j, args.out, o);
    o.result = std::move(j);
    return o;
}

struct VerifyArgs
{
    std::string suite = "all";
    bool quiet = false;
};

Outcome cmd_verify(const VerifyArgs &args)
{
    Outcome o;
    const auto ids = aniso::acceptance::suite_criteria(args.suite);
    o.inputs = {{"suite", args.suite}};
    const bool ok = aniso::acceptance::run_suite(ids, std::cout, !args.quiet);
    o.result = {{"suite", args.suite}, {"passed", ok}};
    o.exit_code = ok ? kExitOk : kExitAcceptance;
    return o;
}

// ---------------------------------------------------------------------------
// manifests

int run(std::vector<std::string> args);

Json manifest_json(const std::string &command, const std::vector<std::string> &argv, const Outcome &o)
{
    Json m;
    m["command"] = command;
    m["argv"] = argv;
    m["inputs"] = o.inputs;
    m["seed"] = o.seed ? Json(*o.seed) : Json(nullptr);
    m["versions"] = {{"aniso_spectra", aniso::kVersion}};
    m["outputs"] = o.outputs;
    m["exit_code"] = o.exit_code;
    return m;
}

/// Re-run a recorded invocation after checking that its input files still
/// hold the recorded content.
int replay(const std::string &path)
{
    const Json m = aniso::read_json_file(path);
    if (!m.contains("argv") || !m["argv"].is_array())
        throw aniso::InvalidInput(path + ": manifest has no argv array");
    const Json inputs = m.value("inputs", Json::object());
    for (const auto &[key, value] : inputs.items())
        if (value.is_object() && value.contains("path") && value.contains("content"))
        {
            const std::string file = value["path"].get<std::string>();
            if (aniso::read_json_file(file) != value["content"])
                throw aniso::InvalidInput(path + ": input \"" + key + "\" (" + file + ") changed since the manifest was written");
        }
    return run(m["argv"].get<std::vector<std::string>>());
}

// ---------------------------------------------------------------------------

int run(std::vector<std::string> args)
{
    CLI::App app{"Fundamental frequencies of anisotropic p-Laplacians with asymmetric seminorms"};
    app.set_version_flag("--version", std::string("aniso_spectra ") + aniso::kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--threads", global.threads, "cap on worker threads (default: ANISO_SPECTRA_THREADS or 1)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--manifest", global.manifest, "write a run manifest (inputs, seed, version, outputs) here");

    Freq1dArgs f1;
    auto *freq1d = app.add_subcommand("freq1d", "closed-form 1D frequency of a t^+ + b t^- on an interval");
    freq1d->add_option("--p", f1.p, "exponent p > 1");
    freq1d->add_option("--interval", f1.interval, "interval endpoints")->expected(2)->allow_extra_args(false);
    freq1d->add_option("--a", f1.a, "weight of t^+")->check(CLI::NonNegativeNumber);
    freq1d->add_option("--b", f1.b, "weight of t^-")->check(CLI::NonNegativeNumber);
    freq1d->add_option("--oracle", f1.oracle, "also minimize the discrete quotient on n nodes")->check(CLI::Range(16, 1000000));
    freq1d->add_option("--profile-csv", f1.profile_csv, "write the extremizer (or oracle minimizer) as t,u CSV");
    freq1d->add_option("--out", f1.out, "also write the JSON result here");

    Freq2dArgs f2;
    auto *freq2d = app.add_subcommand("freq2d", "2D frequency on a polygon");
    freq2d->add_option("--domain", f2.domain, "polygon JSON")->required();
    freq2d->add_option("--anisotropy", f2.anisotropy, "anisotropy JSON")->required();
    freq2d->add_option("--config", f2.config, "solver options JSON");
    freq2d->add_option("--p", f2.p, "exponent p > 1");
    freq2d->add_option("--resolution", f2.resolution, "grid cells per unit length (mesh width h = 1 / resolution)");
    freq2d->add_option("--seed", f2.seed, "seed of the initial field");
    freq2d->add_flag("--closed-form", f2.closed_form, "use the 1D reduction (line or half-plane kernels only)");
    freq2d->add_option("--field-csv", f2.field_csv, "write the minimizer as x,y,u CSV");
    freq2d->add_option("--out", f2.out, "also write the JSON report here");

    WidthArgs w;
    auto *width = app.add_subcommand("width", "width function theta -> L_theta of a polygon");
    width->add_option("--domain", w.domain, "polygon JSON")->required();
    width->add_option("--samples", w.samples, "uniform samples of theta in [0, pi)");
    width->add_option("--csv", w.csv, "write theta,L_theta CSV");
    width->add_option("--out", w.out, "also write the JSON summary here");

    BoundsArgs bo;
    auto *bounds = app.add_subcommand("bounds", "sharp constants Lambda_min and Lambda_max of a polygon");
    bounds->add_option("--domain", bo.domain, "polygon JSON")->required();
    bounds->add_option("--p", bo.p, "exponent p > 1");
    bounds->add_option("--resolution", bo.resolution, "solver resolution for Lambda_max");
    bounds->add_option("--samples", bo.samples, "width-curve samples for Lambda_min");
    bounds->add_option("--out", bo.out, "also write the JSON report here");

    ClassifyArgs cl;
    auto *classify = app.add_subcommand("classify", "kernel class, norm, normal form and kinks of an anisotropy");
    classify->add_option("--anisotropy", cl.anisotropy, "anisotropy JSON")->required();
    classify->add_option("--out", cl.out, "also write the JSON result here");

    VerifyArgs ve;
    auto *verify = app.add_subcommand("verify", "run an acceptance suite");
    verify->add_option("suite", ve.suite, "oned, twod, bounds, properties, divergence or all");
    verify->add_flag("--quiet", ve.quiet, "one line per criterion only");

    std::string manifest_in;
    auto *rerun = app.add_subcommand("replay", "re-run the invocation recorded in a manifest");
    rerun->add_option("manifest", manifest_in, "manifest JSON")->required();

    const std::vector<std::string> recorded = args;
    std::reverse(args.begin(), args.end());
    try
    {
        app.parse(args);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return kExitInput;
    }

    if (global.threads > 0)
        aniso::set_thread_count(global.threads);

    try
    {
        Outcome o;
        std::string command;
        if (*freq1d)
            command = "freq1d", o = cmd_freq1d(f1);
        else if (*freq2d)
            command = "freq2d", o = cmd_freq2d(f2);
        else if (*width)
            command = "width", o = cmd_width(w);
        else if (*bounds)
            command = "bounds", o = cmd_bounds(bo);
        else if (*classify)
            command = "classify", o = cmd_classify(cl);
        else if (*verify)
            command = "verify", o = cmd_verify(ve);
        else
            return replay(manifest_in);

        if (!global.manifest.empty())
        {
            // the manifest path itself is not part of the replayed command
            std::vector<std::string> argv;
            for (std::size_t i = 0; i < recorded.size(); ++i)
            {
                if (recorded[i] == "--manifest")
                {
                    ++i;
                    continue;
                }
                if (recorded[i].rfind("--manifest=", 0) == 0)
                    continue;
                argv.push_back(recorded[i]);
            }
            write_file(global.manifest, manifest_json(command, argv, o).dump(2) + "\n");
        }
        return o.exit_code;
    }
    catch (const aniso::NonConvergence &e)
    {
        std::cerr << "error: " << e.kind() << ": " << e.what() << " (last value " << e.partial_value() << ")\n";
        return kExitNonConvergence;
    }
    catch (const aniso::SandwichViolation &e)
    {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return kExitNonConvergence;
    }
    catch (const aniso::Error &e)
    {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return kExitInput;
    }
}

} // namespace

int main(int argc, char **argv)
{
    try
    {
        return run(std::vector<std::string>(argv + 1, argv + argc));
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
