#include "commands.hpp"
#include "experiments.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace nutrans::cli {

namespace {

using json = nlohmann::ordered_json;
using lab::Mode;
using lab::RunParams;

struct Options {
    RunParams rp;
    std::string mode = "lr";
    std::string base = "freeze";
    std::string sign = "auto";
    std::string out = "-";
    std::string format;
    int grid = -1;  // -1: command default
    int times = -1; // -1: command default
    double t = 0.5;
    std::string x;
    double offset = 1e-6;
    double dt = 1e-4;
    std::string suite;
};

std::string num(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Mode parse_mode(const std::string& m)
{
    if (m == "l1")
        return Mode::L1;
    if (m == "block")
        return Mode::Block;
    return Mode::Lr;
}

void finalize(Options& o)
{
    o.rp.base = o.base == "drop" ? DensityBase::Drop : DensityBase::Freeze;
    // "literal" keeps the opposite sign on T1; "auto" uses the transporting sign
    o.rp.t1_sign = o.sign == "literal" ? 1.0 : -1.0;
    o.rp.workers = worker_count();
    o.rp.validate();
}

void add_construction(CLI::App* a, Options& o)
{
    a->add_option("--mode", o.mode, "construction: l1, lr or block")
        ->check(CLI::IsMember({"l1", "lr", "block"}))
        ->capture_default_str();
    a->add_option("--d", o.rp.d, "dimension (2 or 3)")->check(CLI::Range(2, 3))->capture_default_str();
    a->add_option("--beta", o.rp.beta, "time decay exponent in (0,1)")->capture_default_str();
    a->add_option("--nu", o.rp.nu, "self-similarity exponent")->capture_default_str();
    a->add_option("--eta", o.rp.eta, "cell generation of the L^r construction")->capture_default_str();
    a->add_option("--p", o.rp.p, "Sobolev exponent of the velocity")->capture_default_str();
    a->add_option("--r", o.rp.r, "Lebesgue exponent of the density")->capture_default_str();
    a->add_option("--q", o.rp.q, "negative Sobolev exponent")->capture_default_str();
    a->add_option("--alpha", o.rp.alpha, "Hoelder exponent (L^1 construction)")->capture_default_str();
    a->add_option("--depth", o.rp.depth, "recursion depth budget")->capture_default_str();
    a->add_option("--component,-i", o.rp.component, "component i of the L^r construction")->capture_default_str();
    a->add_option("--base", o.base, "density once the depth runs out: drop or freeze")
        ->check(CLI::IsMember({"drop", "freeze"}))
        ->capture_default_str();
    a->add_option("--sign", o.sign, "T1 velocity sign: auto (transporting) or literal (opposite)")
        ->check(CLI::IsMember({"auto", "literal"}))
        ->capture_default_str();
    a->add_option("--seed", o.rp.seed, "random seed")->capture_default_str();
}

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback)
    {
        if (path == "-")
            return;
        file_.open(path, std::ios::binary | std::ios::trunc);
        if (!file_)
            throw std::runtime_error("cannot write " + path);
        os_ = &file_;
    }
    std::ostream& operator*() { return *os_; }

    void close()
    {
        os_->flush();
        if (!*os_)
            throw std::runtime_error("write failed");
    }

private:
    std::ofstream file_;
    std::ostream* os_;
};

json config_json(const Options& o)
{
    json c;
    c["mode"] = o.mode;
    c["d"] = o.rp.d;
    c["beta"] = o.rp.beta;
    c["nu"] = o.rp.nu;
    c["eta"] = o.rp.eta;
    c["p"] = o.rp.p;
    c["r"] = o.rp.r;
    c["q"] = o.rp.q;
    c["depth"] = o.rp.depth;
    c["component"] = o.rp.component;
    c["base"] = o.base;
    c["sign"] = o.sign;
    c["seed"] = o.rp.seed;
    return c;
}

template <int D>
int norm_series(const Options& o, std::ostream& out)
{
    const Mode mode = parse_mode(o.mode);
    const int grid = o.grid < 0 ? (D == 2 ? 256 : 32) : o.grid;
    const auto n = static_cast<std::size_t>(o.times < 0 ? 200 : o.times);
    const auto times = lab::sample_times(n, lab::top_intervals(mode, o.rp), o.offset);
    const auto recs = lab::parallel_map<lab::SeriesRecord>(times.size(), o.rp.workers, [&](std::size_t j) {
        return lab::series_record<D>(mode, o.rp, times[j], grid);
    });
    Sink sink(o.out, out);
    if (o.format == "json") {
        json doc;
        doc["config"] = config_json(o);
        doc["config"]["grid"] = grid;
        json rows = json::array();
        for (const auto& r : recs)
            rows.push_back({{"t", r.t},
                            {"norm_exact", r.norm_exact},
                            {"norm_grid", grid > 0 ? json(r.norm_grid) : json(nullptr)},
                            {"mass", r.mass},
                            {"w1p", r.w1p},
                            {"depth", r.depth}});
        doc["records"] = rows;
        *sink << doc.dump(2) << '\n';
    } else {
        *sink << "t,norm_exact,norm_grid,mass,w1p,depth\n";
        for (const auto& r : recs)
            *sink << num(r.t) << ',' << num(r.norm_exact) << ',' << (grid > 0 ? num(r.norm_grid) : "") << ','
                  << num(r.mass) << ',' << num(r.w1p) << ',' << r.depth << '\n';
    }
    sink.close();
    return 0;
}

template <int D>
int snapshot(const Options& o, std::ostream& out)
{
    const std::string fmt = o.format.empty() ? (D == 2 ? "pgm" : "csv") : o.format;
    if (fmt == "pgm" && D != 2)
        throw DomainError("PGM snapshots need d = 2");
    if (!(o.t >= 0.0 && o.t <= 1.0))
        throw DomainError("time must lie in [0,1]");
    const int n = o.grid < 0 ? (D == 2 ? 256 : 32) : o.grid;
    if (n < 2)
        throw DomainError("grid resolution must be >= 2");
    const auto view = lab::make_view<D>(parse_mode(o.mode), o.rp, o.t);
    auto coord = [n](int j) { return -0.5 + (j + 0.5) / n; };

    // rows run from the top (largest x2) down, columns along x1; x3 is the slowest index
    const std::size_t planes = D == 2 ? 1 : static_cast<std::size_t>(n);
    const auto rows = lab::parallel_map<std::vector<double>>(planes * n, o.rp.workers, [&](std::size_t idx) {
        const int row = static_cast<int>(idx % n);
        std::vector<double> vals(n);
        Vec<D> x{};
        x[1] = -coord(row);
        if constexpr (D == 3)
            x[2] = coord(static_cast<int>(idx / n));
        for (int col = 0; col < n; ++col) {
            x[0] = coord(col);
            vals[col] = view.density(x);
        }
        return vals;
    });

    Sink sink(o.out, out);
    if (fmt == "pgm") {
        double vmax = 0.0;
        for (const auto& r : rows)
            for (double v : r)
                vmax = std::max(vmax, v);
        *sink << "P5\n" << n << ' ' << n << "\n255\n";
        const double den = std::log2(vmax + 1.0);
        for (const auto& r : rows)
            for (double v : r) {
                const double g = den > 0.0 ? 255.0 * std::log2(v + 1.0) / den : 0.0;
                (*sink).put(static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(g), 0L, 255L))));
            }
    } else if (fmt == "json") {
        json doc;
        doc["config"] = config_json(o);
        doc["t"] = o.t;
        doc["grid"] = n;
        doc["order"] = D == 2 ? "rows top to bottom (x2 descending), columns x1 ascending"
                              : "x3 ascending, then rows x2 descending, then x1 ascending";
        json vals = json::array();
        for (const auto& r : rows)
            for (double v : r)
                vals.push_back(v);
        doc["values"] = vals;
        *sink << doc.dump() << '\n';
    } else {
        *sink << (D == 2 ? "x1,x2,rho\n" : "x1,x2,x3,rho\n");
        for (std::size_t idx = 0; idx < rows.size(); ++idx) {
            const int row = static_cast<int>(idx % n);
            for (int col = 0; col < n; ++col) {
                *sink << num(coord(col)) << ',' << num(-coord(row));
                if (D == 3)
                    *sink << ',' << num(coord(static_cast<int>(idx / n)));
                *sink << ',' << num(rows[idx][col]) << '\n';
            }
        }
    }
    sink.close();
    return 0;
}

int feasibility_cmd(const Options& o, std::ostream& out)
{
    const auto rep = feasibility(o.rp.d, o.rp.p, o.rp.r);
    json doc;
    doc["d"] = rep.d;
    doc["p"] = rep.p;
    doc["r"] = rep.r;
    doc["margin"] = rep.margin;
    doc["feasible"] = rep.feasible;
    doc["beta"] = rep.beta;
    doc["lambda"] = rep.lambda;
    doc["p_bar"] = rep.p_bar;
    doc["r_bar"] = rep.r_bar;
    doc["eta_tilde"] = rep.eta_tilde;
    doc["nu_tilde"] = rep.nu_tilde;
    doc["eta"] = rep.eta;
    doc["nu"] = rep.nu;
    doc["q"] = rep.q;
    doc["gamma1"] = rep.gamma1;
    doc["gamma2"] = rep.gamma2;
    doc["gamma3"] = rep.gamma3;
    doc["nu0"] = rep.nu0;
    doc["checks"] = {{"sharp_range", rep.sharp_range}, {"extra_condition", rep.extra_condition},
                     {"nu_above_nu0", rep.nu_above_nu0}, {"p_range", rep.p_range},
                     {"r_range", rep.r_range},         {"q_range", rep.q_range}};
    if (!rep.note.empty())
        doc["note"] = rep.note;
    Sink sink(o.out, out);
    *sink << doc.dump(2) << '\n';
    sink.close();
    return rep.feasible ? 0 : 2;
}

template <int D>
std::vector<lab::Check> run_suite(const Options& o)
{
    const auto& rp = o.rp;
    auto count = [&](std::size_t def) { return o.times < 0 ? def : static_cast<std::size_t>(o.times); };
    if (o.suite == "divergence")
        return lab::divergence_suite<D>(rp, count(10000));
    if (o.suite == "mass")
        return lab::mass_suite<D>(rp, count(50));
    if (o.suite == "weakform") {
        lab::WeakFormSettings s;
        s.times = count(20);
        s.dt = o.dt;
        s.resolution = o.grid < 0 ? 1024 : o.grid;
        return lab::weakform_suite<D>(rp, parse_mode(o.mode), s);
    }
    if (o.suite == "scaling")
        return lab::scaling_suite<D>(rp);
    if (o.suite == "selfsimilar")
        return lab::selfsimilar_suite<D>(rp, count(500));
    if (o.suite == "contraction")
        return lab::contraction_suite(rp, count(200));
    if (o.suite == "bounds")
        return lab::bounds_suite<D>(rp, count(200), o.offset);
    throw std::invalid_argument("unknown suite '" + o.suite
                                + "' (divergence, mass, weakform, scaling, selfsimilar, contraction, bounds)");
}

int verify_cmd(const Options& o, std::ostream& out)
{
    const auto checks = o.rp.d == 2 ? run_suite<2>(o) : run_suite<3>(o);
    std::size_t passed = 0;
    for (const auto& c : checks)
        passed += c.passed() ? 1 : 0;
    Sink sink(o.out, out);
    if (o.format == "json") {
        json doc;
        doc["suite"] = o.suite;
        doc["config"] = config_json(o);
        json arr = json::array();
        for (const auto& c : checks)
            arr.push_back({{"check", c.name},
                           {"value", c.value},
                           {"limit", c.limit},
                           {"kind", c.upper ? "max" : "min"},
                           {"margin", c.margin()},
                           {"pass", c.passed()}});
        doc["checks"] = arr;
        doc["pass"] = passed == checks.size();
        *sink << doc.dump(2) << '\n';
    } else {
        for (const auto& c : checks)
            *sink << (c.passed() ? "PASS " : "FAIL ") << c.name << ": value " << num(c.value)
                  << (c.upper ? " <= " : " >= ") << num(c.limit) << " (margin " << num(c.margin()) << ")\n";
        *sink << "verify " << o.suite << ": " << passed << '/' << checks.size() << " checks passed\n";
    }
    sink.close();
    return passed == checks.size() ? 0 : 2;
}

template <int D>
int eval_cmd(const Options& o, std::ostream& out)
{
    Vec<D> x{};
    std::stringstream ss(o.x);
    std::string item;
    int l = 0;
    while (std::getline(ss, item, ',')) {
        if (l >= D)
            throw DomainError("--x has more than d coordinates");
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw DomainError("bad coordinate '" + item + "'");
        x[l++] = v;
    }
    if (l != D)
        throw DomainError("--x needs exactly d comma-separated coordinates");
    if (!(o.t >= 0.0 && o.t <= 1.0))
        throw DomainError("time must lie in [0,1]");
    const auto view = lab::make_view<D>(parse_mode(o.mode), o.rp, o.t);
    const auto f = view.velocity(x);
    json doc;
    doc["mode"] = o.mode;
    doc["t"] = o.t;
    doc["x"] = json(std::vector<double>(x.begin(), x.end()));
    doc["velocity"] = json(std::vector<double>(f.v.begin(), f.v.end()));
    json jac = json::array();
    for (const auto& row : f.J)
        jac.push_back(json(std::vector<double>(row.begin(), row.end())));
    doc["jacobian"] = jac;
    doc["divergence"] = f.trace();
    doc["density"] = view.density(x);
    json tr = json::array();
    for (const auto& s : view.trace)
        tr.push_back({{"k", s.k}, {"phase", s.phase}, {"i", s.i}});
    doc["phase_trace"] = tr;
    Sink sink(o.out, out);
    *sink << doc.dump(2) << '\n';
    sink.close();
    return 0;
}

} // namespace

int worker_count()
{
    const char* env = std::getenv("NUTRANS_WORKERS");
    if (!env || !*env)
        return 1;
    int n = 1;
    const auto res = std::from_chars(env, env + std::char_traits<char>::length(env), n);
    if (res.ec != std::errc() || n < 1)
        return 1;
    return std::min(n, 256);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Nonunique transport constructions: experiments and checks", "nutrans"};
    app.require_subcommand(1);
    Options o;

    auto* ns = app.add_subcommand("norm-series", "L^r norm, mass and W^{1,p} of the velocity over sampled times");
    add_construction(ns, o);
    ns->add_option("--grid", o.grid, "midpoint grid per axis for the grid norm (0 skips it)");
    ns->add_option("--times", o.times, "number of sampled times (default 200)");
    ns->add_option("--offset", o.offset, "distance kept from phase boundaries, relative to the phase length")
        ->capture_default_str();
    ns->add_option("--out", o.out, "output path, - for stdout")->capture_default_str();
    ns->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* sn = app.add_subcommand("snapshot", "raster of the density at one time");
    add_construction(sn, o);
    sn->add_option("--t", o.t, "time in [0,1]")->capture_default_str();
    sn->add_option("--grid", o.grid, "pixels per axis (default 256)");
    sn->add_option("--out", o.out, "output path, - for stdout")->capture_default_str();
    sn->add_option("--format", o.format, "pgm, csv or json")->check(CLI::IsMember({"pgm", "csv", "json"}));

    auto* fe = app.add_subcommand("feasibility", "parameter recipe for (d, p, r); exit 0 feasible, 2 infeasible");
    fe->add_option("--d", o.rp.d, "dimension")->capture_default_str();
    fe->add_option("--p", o.rp.p, "Sobolev exponent")->capture_default_str();
    fe->add_option("--r", o.rp.r, "Lebesgue exponent")->capture_default_str();
    fe->add_option("--out", o.out, "output path, - for stdout")->capture_default_str();
    fe->add_option("--format", o.format, "json")->check(CLI::IsMember({"json"}));

    auto* ve = app.add_subcommand("verify", "run an invariant suite; exit 2 when a check fails");
    ve->add_option("suite", o.suite, "divergence, mass, weakform, scaling, selfsimilar, contraction or bounds")
        ->required();
    add_construction(ve, o);
    ve->add_option("--grid", o.grid, "quadrature resolution for weakform (default 1024)");
    ve->add_option("--times", o.times, "samples or times, suite dependent");
    ve->add_option("--dt", o.dt, "time step of the weak-form difference quotient")->capture_default_str();
    ve->add_option("--offset", o.offset, "distance kept from phase boundaries (bounds)")->capture_default_str();
    ve->add_option("--out", o.out, "output path, - for stdout")->capture_default_str();
    ve->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* ev = app.add_subcommand("eval", "velocity, Jacobian, density and phase trace at one (t, x)");
    add_construction(ev, o);
    ev->add_option("--t", o.t, "time in [0,1]")->capture_default_str();
    ev->add_option("--x", o.x, "point, comma separated")->required();
    ev->add_option("--out", o.out, "output path, - for stdout")->capture_default_str();
    ev->add_option("--format", o.format, "json")->check(CLI::IsMember({"json"}));

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        if (fe->parsed()) {
            if (o.rp.d < 2)
                throw DomainError("dimension must be >= 2");
            return feasibility_cmd(o, out);
        }
        finalize(o);
        if (ns->parsed())
            return o.rp.d == 2 ? norm_series<2>(o, out) : norm_series<3>(o, out);
        if (sn->parsed())
            return o.rp.d == 2 ? snapshot<2>(o, out) : snapshot<3>(o, out);
        if (ve->parsed())
            return verify_cmd(o, out);
        if (ev->parsed())
            return o.rp.d == 2 ? eval_cmd<2>(o, out) : eval_cmd<3>(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace nutrans::cli
