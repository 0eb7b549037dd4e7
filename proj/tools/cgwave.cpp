#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cgw/config.hpp"
#include "cgw/error.hpp"
#include "cgw/evolve.hpp"
#include "cgw/kernel.hpp"
#include "cgw/resolvent.hpp"
#include "cgw/spectrum.hpp"
#include "cgw/symbols.hpp"
#include "json.hpp"

#ifndef CGW_VERSION
#define CGW_VERSION "0.0.0"
#endif

using namespace cgw;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitProperty = 2;
constexpr int kExitNumerical = 3;

struct Column {
    std::string name;
    std::string meaning;
};

json metadata(const RunConfig& cfg, const std::string& command) {
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    json modes = json::array();
    const MemoryKernel k = cfg.kernel();
    for (const auto& m : k.modes()) modes.push_back({m.a, m.b});
    return {{"command", command},
            {"cgwave", CGW_VERSION},
            {"eigen", eigen.str()},
            {"seed", cfg.seed},
            {"kernel_modes", modes},
            {"config", to_json(cfg)}};
}

// CSV with a commented header: metadata, then one line per column.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const json& meta, std::vector<Column> cols)
        : os_(path), cols_(std::move(cols)) {
        if (!os_) throw ConfigError("cannot write " + path.string());
        os_ << "# " << meta.dump() << '\n';
        for (const auto& c : cols_) os_ << "# column " << c.name << ": " << c.meaning << '\n';
        for (std::size_t i = 0; i < cols_.size(); ++i) os_ << (i ? "," : "") << cols_[i].name;
        os_ << '\n' << std::setprecision(12);
    }

    template <class... T>
    void row(const T&... v) {
        int i = 0;
        ((os_ << (i++ ? "," : "") << v), ...);
        os_ << '\n';
    }

private:
    std::ofstream os_;
    std::vector<Column> cols_;
};

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << std::setw(2) << j << '\n';
}

struct Context {
    RunConfig cfg;
    std::filesystem::path out;
    std::string command;
    json meta() const { return metadata(cfg, command); }
    std::filesystem::path file(const std::string& ext) const { return out / (command + ext); }
};

int kernel_check(const Context& c) {
    const MemoryKernel k(c.cfg.modes);
    const KernelReport r = check(k);
    json j = {{"mass_g", r.mass_g}, {"kappa", r.kappa}, {"delta", r.delta}, {"theta", r.theta}, {"valid", r.valid}};
    j["metadata"] = c.meta();
    write_json(c.file(".json"), j);
    std::cout << j.dump() << '\n';
    if (!r.valid) {
        std::cerr << "kernel-check: g does not have unit mass (mass_g = " << r.mass_g << ")\n";
        return kExitProperty;
    }
    return kExitOk;
}

int transfer_scan(const Context& c) {
    const MemoryKernel k = c.cfg.kernel();
    const auto& p = c.cfg.transfer_scan;
    if (!(p.s_max > 0.0) || p.n_samples < 1) throw ConfigError("bad value for config key: transfer_scan");
    CsvWriter csv(c.file(".csv"), c.meta(),
                  {{"s", "frequency, lambda = i s"},
                   {"re_ell", "Re ell(i s)"},
                   {"im_ell", "Im ell(i s)"},
                   {"re_p2", "Re p2(i s)"},
                   {"im_p2", "Im p2(i s)"},
                   {"c0", "(1 + sqrt|s|) Re p2(i s)"},
                   {"arg_p2", "arg p2(i s), radians"}});
    // the infimum of (1+√s) Re p2 includes the endpoint s = 0
    const double c0_at_zero = p2(k, 0.0).real();
    double c0_hat = c0_at_zero, c0_sampled = INFINITY, min_re_ell = INFINITY, max_abs_im_ell = 0.0, min_re_p2 = INFINITY;
    double min_arg = INFINITY, max_arg = -INFINITY;
    for (int i = 1; i <= p.n_samples; ++i) {
        const double s = p.s_max * i / p.n_samples;
        const cplx l = ell(k, cplx(0.0, s)), q = p2(k, cplx(0.0, s));
        const double c0 = (1.0 + std::sqrt(s)) * q.real();
        csv.row(s, l.real(), l.imag(), q.real(), q.imag(), c0, std::arg(q));
        c0_hat = std::min(c0_hat, c0);
        c0_sampled = std::min(c0_sampled, c0);
        min_re_ell = std::min(min_re_ell, l.real());
        max_abs_im_ell = std::max(max_abs_im_ell, std::abs(l.imag()));
        min_re_p2 = std::min(min_re_p2, q.real());
        min_arg = std::min(min_arg, std::arg(q));
        max_arg = std::max(max_arg, std::arg(q));
    }
    const bool ok = min_re_p2 > 0.0 && min_re_ell >= 1.0;
    write_json(c.file(".json"), {{"c0_hat", c0_hat},
                                 {"c0_sampled_min", c0_sampled},
                                 {"c0_at_zero", c0_at_zero},
                                 {"min_re_ell", min_re_ell},
                                 {"max_abs_im_ell", max_abs_im_ell},
                                 {"min_re_p2", min_re_p2},
                                 {"arg_p2_range", {min_arg, max_arg}},
                                 {"positive_real", ok},
                                 {"metadata", c.meta()}});
    if (!ok) {
        std::cerr << "transfer-scan: positive-real property violated (min Re p2 = " << min_re_p2 << ")\n";
        return kExitProperty;
    }
    return kExitOk;
}

int spectrum(const Context& c) {
    const MemoryKernel k = c.cfg.kernel();
    const auto& p = c.cfg.spectrum;
    Strip strip = Strip::inside(k, p.im_min, p.im_max);
    if (p.re_min) strip.re_min = *p.re_min;
    const RootList roots = sigma_find(k, strip, SeedGrid{p.n_re, p.n_im});
    const std::vector<cplx> zl = z_ell_find(k, strip);

    CsvWriter csv(c.file(".csv"), c.meta(),
                  {{"re", "Re lambda"},
                   {"im", "Im lambda"},
                   {"residual", "|chi| for sigma roots, |ell| for z_ell roots"},
                   {"class", "sigma: zero of chi; z_ell: zero of ell"}});
    bool ok = true;
    for (std::size_t i = 0; i < roots.sigma_roots.size(); ++i) {
        const cplx z = roots.sigma_roots[i];
        csv.row(z.real(), z.imag(), roots.sigma_residuals[i], "sigma");
        ok = ok && z.real() < 0.0;
    }
    for (const cplx z : zl) csv.row(z.real(), z.imag(), std::abs(ell(k, z)), "z_ell");
    write_json(c.file(".json"), {{"strip", {strip.re_min, strip.re_max, strip.im_min, strip.im_max}},
                                 {"sigma_roots", roots.sigma_roots.size()},
                                 {"z_ell_roots", zl.size()},
                                 {"seeds", roots.seeds},
                                 {"dropped", roots.dropped},
                                 {"all_in_left_half_plane", ok},
                                 {"metadata", c.meta()}});
    if (!ok) {
        std::cerr << "spectrum: a root with Re lambda >= 0\n";
        return kExitProperty;
    }
    return kExitOk;
}

std::vector<double> frequency_grid(const ResolventScanConfig& p) {
    if (!(p.s_min > 0.0 && p.s_max > p.s_min) || p.n_s < 2)
        throw ConfigError("bad value for config key: resolvent_scan (need 0 < s_min < s_max, n_s >= 2)");
    std::vector<double> s;
    for (int i = 0; i < p.n_s; ++i) {
        const double t = static_cast<double>(i) / (p.n_s - 1);
        s.push_back(p.log_spacing ? p.s_min * std::pow(p.s_max / p.s_min, t) : p.s_min + t * (p.s_max - p.s_min));
    }
    return s;
}

int resolvent_scan(const Context& c) {
    const MemoryKernel k = c.cfg.kernel();
    const auto& p = c.cfg.resolvent_scan;
    const Generator gen = assemble(k, p.grid);
    ResolventOptions opts;
    opts.dense_threshold = p.dense_threshold;
    opts.tol = p.tol;
    opts.seed = c.cfg.seed;
    const std::vector<double> grid = frequency_grid(p);

    CsvWriter csv(c.file(".csv"), c.meta(),
                  {{"s", "frequency, lambda = i s"},
                   {"norm", "W-norm of the resolvent R(i s, A_h)"},
                   {"method", "svd: dense smallest singular value; power_iteration: Lanczos on R^* R"}});
    std::vector<double> xs, ys;
    int failed = 0;
    if (p.peaks) {
        const auto peaks = resonance_peaks(gen, grid, opts, c.cfg.threads);
        std::set<long> seen;
        for (const auto& pk : peaks) {
            if (!seen.insert(std::lround(pk.s * 1e6)).second) continue;
            if (pk.s < p.s_min || pk.s > p.s_max) continue;
            csv.row(pk.s, pk.norm, "power_iteration");
            xs.push_back(pk.s);
            ys.push_back(pk.norm);
        }
    } else {
        const ScanResult r = scan(gen, grid, opts, c.cfg.threads);
        for (const auto& smp : r.samples) {
            if (!smp.error.empty()) {
                ++failed;
                std::cerr << "resolvent-scan: s = " << smp.s << ": " << smp.error << '\n';
                continue;
            }
            csv.row(smp.s, smp.norm, to_string(smp.method));
            xs.push_back(smp.s);
            ys.push_back(smp.norm);
        }
    }
    const double exponent = xs.size() >= 2 ? fit_loglog(xs, ys) : NAN;
    write_json(c.file(".json"), {{"exponent", exponent},
                                 {"points", xs.size()},
                                 {"failed", failed},
                                 {"mode", p.peaks ? "resonance_peaks" : "grid"},
                                 {"dim", gen.dim()},
                                 {"grid", to_json(p.grid)},
                                 {"metadata", c.meta()}});
    std::cout << "exponent " << exponent << " over " << xs.size() << " points\n";
    return failed ? kExitNumerical : kExitOk;
}

int lower_bound_cmd(const Context& c) {
    const MemoryKernel k = c.cfg.kernel();
    const auto& p = c.cfg.lower_bound;
    if (p.n_min < 1 || p.n_max < p.n_min) throw ConfigError("bad value for config key: lower_bound");
    CsvWriter csv(c.file(".csv"), c.meta(),
                  {{"n", "family index, lambda = 2 pi n i"},
                   {"re_alpha", "Re alpha_n = Re ell(2 pi n i)"},
                   {"im_alpha", "Im alpha_n"},
                   {"re_sigma", "Re sigma_n = Re sqrt(lambda / alpha_n)"},
                   {"im_sigma", "Im sigma_n"},
                   {"abs_u_plus", "|u_plus|"},
                   {"bound", "lower bound for the resolvent norm at 2 pi n i"},
                   {"pi_n_over_16", "pi n / 16, compared with bound^2"}});
    int violations = 0;
    for (int n = p.n_min; n <= p.n_max; ++n) {
        const LowerBoundSample s = lower_bound(k, n);
        const double ref = std::numbers::pi * n / 16.0;
        csv.row(n, s.alpha_n.real(), s.alpha_n.imag(), s.sigma_n.real(), s.sigma_n.imag(), std::abs(s.u_plus),
                s.bound, ref);
        if (s.bound * s.bound < ref) ++violations;
    }
    write_json(c.file(".json"), {{"n_min", p.n_min}, {"n_max", p.n_max}, {"violations", violations},
                                 {"metadata", c.meta()}});
    if (violations) {
        std::cerr << "lower-bound: bound^2 < pi n / 16 for " << violations << " values of n\n";
        return kExitProperty;
    }
    return kExitOk;
}

int evolve_cmd(const Context& c) {
    const MemoryKernel k = c.cfg.kernel();
    const auto& p = c.cfg.evolve;
    DatumKind kind;
    if (p.noise == "w_white") kind = DatumKind::w_white;
    else if (p.noise == "raw") kind = DatumKind::raw;
    else throw ConfigError("bad value for config key: evolve.noise");
    if (p.datum != "inverse_applied" && p.datum != "random") throw ConfigError("bad value for config key: evolve.datum");

    const Generator gen = assemble(k, p.grid);
    Vec z0 = random_state(gen, c.cfg.seed, kind);
    if (p.datum == "inverse_applied") z0 = inverse_applied(gen, z0);
    else z0 /= w_norm(gen, z0);
    DecayTrace tr = evolve_energy(gen, z0, p.t_max, p.dt);
    tr.tag = p.datum == "inverse_applied" ? DatumTag::inverse_applied : DatumTag::custom;

    CsvWriter csv(c.file(".csv"), c.meta(),
                  {{"t", "time"},
                   {"energy", "W-norm of S_h(t) z0 (square root of the energy)"},
                   {"local_slope", "sliding-window log-log slope ending at t, empty before the first window"}});
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        std::string slope;
        for (std::size_t j = 0; j < tr.slope_times.size(); ++j)
            if (tr.slope_times[j] == tr.times[i]) {
                std::ostringstream os;
                os << std::setprecision(12) << tr.slopes[j];
                slope = os.str();
            }
        csv.row(tr.times[i], tr.energies[i], slope);
    }
    const double slope = window_slope(tr, p.fit_lo, p.fit_hi);
    const bool ok = tr.max_increase <= 1e-10;
    write_json(c.file(".json"), {{"fitted_slope", slope},
                                 {"window", {p.fit_lo, p.fit_hi}},
                                 {"steps", tr.steps},
                                 {"max_relative_increase", tr.max_increase},
                                 {"dim", gen.dim()},
                                 {"grid", to_json(p.grid)},
                                 {"metadata", c.meta()}});
    std::cout << "slope " << slope << " on [" << p.fit_lo << ", " << p.fit_hi << "]\n";
    if (!ok) {
        std::cerr << "evolve: energy increased by " << tr.max_increase << " in one step\n";
        return kExitProperty;
    }
    return kExitOk;
}

int decay_report(const Context& c) {
    const MemoryKernel k = c.cfg.kernel();
    const auto& p = c.cfg.decay_report;
    const Generator gen = assemble(k, p.grid);
    const auto vals = semi_uniform_norm(gen, p.times, p.dt);
    CsvWriter csv(c.file(".csv"), c.meta(),
                  {{"t", "time"},
                   {"energy", "W-operator norm of S_h(t) A_h^-1"},
                   {"local_slope", "log-log slope from the previous row, empty on the first rows"}});
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const auto [t, v] = vals[i];
        std::string slope;
        if (i > 0 && vals[i - 1].first > 0.0) {
            std::ostringstream os;
            os << std::setprecision(12) << std::log(v / vals[i - 1].second) / std::log(t / vals[i - 1].first);
            slope = os.str();
        }
        csv.row(t, v, slope);
        if (t >= 10.0 && t <= 100.0) {
            lo = std::min(lo, t * t * v);
            hi = std::max(hi, t * t * v);
        }
    }
    std::vector<double> ts, vs;
    for (const auto& [t, v] : vals)
        if (t > 0.0) {
            ts.push_back(t);
            vs.push_back(v);
        }
    const double slope = ts.size() >= 2 ? fit_loglog(ts, vs) : NAN;
    write_json(c.file(".json"), {{"fitted_slope", slope},
                                 {"t2_band_decades", hi > 0.0 ? std::log10(hi / lo) : NAN},
                                 {"window", {10.0, 100.0}},
                                 {"dim", gen.dim()},
                                 {"grid", to_json(p.grid)},
                                 {"metadata", c.meta()}});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cgwave: coupled wave / Coleman-Gurtin analysis"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    int threads = 0;
    unsigned seed = 0;
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides config 'out')");
    auto* th = app.add_option("--threads", threads, "worker threads")->envname("CGWAVE_THREADS")->check(CLI::PositiveNumber);
    auto* sd = app.add_option("--seed", seed, "seed for random data");

    const std::vector<std::pair<std::string, std::function<int(const Context&)>>> commands{
        {"kernel-check", kernel_check},   {"transfer-scan", transfer_scan},   {"spectrum", spectrum},
        {"resolvent-scan", resolvent_scan}, {"lower-bound", lower_bound_cmd}, {"evolve", evolve_cmd},
        {"decay-report", decay_report}};
    app.fallthrough();  // global flags may follow the subcommand
    const std::map<std::string, std::string> about{
        {"kernel-check", "validate the memory kernel and report its constants"},
        {"transfer-scan", "ell and p2 along the imaginary axis"},
        {"spectrum", "roots of chi and ell in a strip"},
        {"resolvent-scan", "energy-norm resolvent norm along the imaginary axis"},
        {"lower-bound", "closed-form lower-bound family at s = 2 pi n"},
        {"evolve", "energy decay of S(t) A^-1 r"},
        {"decay-report", "t^2 ||S(t) A^-1|| on a small dense grid"}};
    for (const auto& [name, fn] : commands) app.add_subcommand(name, about.at(name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        Context ctx;
        ctx.cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (*th) ctx.cfg.threads = threads;
        if (*sd) ctx.cfg.seed = seed;
        ctx.out = out_dir.empty() ? ctx.cfg.out : out_dir;
        std::filesystem::create_directories(ctx.out);
        for (const auto& [name, fn] : commands)
            if (app.got_subcommand(name)) {
                ctx.command = name;
                return fn(ctx);
            }
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const PropertyViolation& e) {
        std::cerr << "property violation: " << e.what() << '\n';
        return kExitProperty;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}
