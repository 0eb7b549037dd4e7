// Acceptance suite: one PASS/FAIL line per criterion, with the measured numbers.
// Exit status is 0 once every criterion has been evaluated; --strict turns any FAIL
// into a non-zero exit.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cgw/config.hpp"
#include "cgw/evolve.hpp"
#include "cgw/resolvent.hpp"
#include "cgw/spectrum.hpp"
#include "cgw/symbols.hpp"
#include "oracles.hpp"

using namespace cgw;

namespace {

constexpr double pi = std::numbers::pi;
const MemoryKernel k11({{1.0, 1.0}});

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<std::string> notes;  // diagnostics printed under the line
};

std::string fmt(double x, int prec = 3) {
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

double rel_w(const Operator& op, const CVec& a, const CVec& ref) { return w_norm(op, CVec(a - ref)) / w_norm(op, ref); }

Outcome symbol_exactness() {
    const double e_ell = std::abs(ell(k11, 0.0) - 2.0), e_p2 = std::abs(p2(k11, 0.0) - 0.5);
    double worst = 0.0;
    int n = 0;
    for (double re : {0.0, 0.25, 0.5, 1.0})
        for (int i = 0; i < 50; ++i, ++n) {
            const cplx lam(re, -40.0 + 80.0 * i / 49.0);
            const cplx q = oracle::ell_quadrature([](double s) { return k11.g(s); }, lam, 40.0, 1000);
            worst = std::max(worst, std::abs(ell(k11, lam) - q));
        }
    Outcome o;
    o.pass = e_ell <= 1e-12 && e_p2 <= 1e-12 && worst <= 1e-8;
    o.detail = "|ell(0)-2| = " + fmt(e_ell) + ", |p2(0)-1/2| = " + fmt(e_p2) + ", max |ell - quadrature| = " +
               fmt(worst) + " over " + std::to_string(n) + " points";
    return o;
}

// Infimum over the samples and the endpoint s = 0, where (1+√s) Re p2(is) is continuous.
double c0_hat(int n, double s_max) {
    double c = p2(k11, 0.0).real();
    for (int i = 1; i <= n; ++i) {
        const double s = s_max * i / n;
        c = std::min(c, (1.0 + std::sqrt(s)) * p2(k11, cplx(0.0, s)).real());
    }
    return c;
}

Outcome positivity_scan() {
    const int n = 10000;
    double min_re_ell = INFINITY, max_im_ell = 0.0, min_re_p2 = INFINITY, min_arg = INFINITY, max_arg = -INFINITY;
    for (int i = 1; i <= n; ++i) {
        const double s = 1000.0 * i / n;
        const cplx l = ell(k11, cplx(0.0, s)), q = p2(k11, cplx(0.0, s));
        min_re_ell = std::min(min_re_ell, l.real());
        max_im_ell = std::max(max_im_ell, std::abs(l.imag()));
        min_re_p2 = std::min(min_re_p2, q.real());
        min_arg = std::min(min_arg, std::arg(q));
        max_arg = std::max(max_arg, std::arg(q));
    }
    const double c = c0_hat(n, 1000.0), c2 = c0_hat(2 * n, 1000.0);
    double sampled = INFINITY, interior = INFINITY;
    for (int i = 1; i <= n; ++i) {
        const double s = 1000.0 * i / n, v = (1.0 + std::sqrt(s)) * p2(k11, cplx(0.0, s)).real();
        sampled = std::min(sampled, v);
        if (s >= 1.0) interior = std::min(interior, v);
    }
    Outcome o;
    o.pass = min_re_ell >= 1.0 && max_im_ell < 1.0 && min_re_p2 > 0.0 && min_arg > -pi / 2 && max_arg < pi / 4 &&
             c > 0.3 && std::abs(c2 - c) <= 1e-3 * c;
    o.detail = "min Re ell = " + fmt(min_re_ell, 6) + ", max |Im ell| = " + fmt(max_im_ell) + ", min Re p2 = " +
               fmt(min_re_p2) + ", arg p2 in [" + fmt(min_arg) + ", " + fmt(max_arg) + "], c0_hat = " + fmt(c, 5) +
               " (2x samples: " + fmt(c2, 5) + ")";
    o.notes.push_back("sampled minimum " + fmt(sampled, 5) + " at the first sample, tending to Re p2(0) = 1/2 as the grid refines; min over s >= 1: " +
                      fmt(interior, 5));
    return o;
}

Outcome asymptote() {
    const cplx lim = cplx(1.0, -1.0) / std::sqrt(2.0);
    auto scaled_err = [&](double s) { return s * std::abs(std::sqrt(s) * p2(k11, cplx(0.0, s)) - lim); };
    // K fitted on the first decade, checked on the whole range
    double K = 0.0, worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double s = 100.0 * std::pow(100.0, i / 2000.0);
        const double e = scaled_err(s);
        if (s <= 1000.0) K = std::max(K, e);
        worst = std::max(worst, e / K);
    }
    Outcome o;
    o.pass = worst <= 1.05;
    o.detail = "K = " + fmt(K, 5) + " fitted on [100, 1000]; max |s| err / K over [100, 1e4] = " + fmt(worst, 5) +
               " (allowed 1.05)";
    return o;
}

Outcome lower_bound_family() {
    int bad = 0;
    double worst_margin = INFINITY;
    for (int n = 10; n <= 100; ++n) {
        const LowerBoundSample s = lower_bound(k11, n);
        const double r = s.bound * s.bound / (pi * n / 16.0);
        worst_margin = std::min(worst_margin, r);
        if (r < 1.0) ++bad;
    }
    const double ratio = std::abs(lower_bound(k11, 100).u_plus) * 4.0 / std::sqrt(2.0 * pi * 100);
    Outcome o;
    o.pass = bad == 0 && ratio >= 0.95 && ratio <= 1.05;
    o.detail = "min bound^2 / (pi n/16) over n in [10,100] = " + fmt(worst_margin, 5) + ", |u_plus| 4/sqrt(2 pi n) at n=100 = " +
               fmt(ratio, 5);
    return o;
}

std::vector<double> peak_targets() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back(22.0 * std::pow(395.0 / 22.0, i / 9.0));
    return t;
}

double peak_exponent(const GridSpec& gs, int* points, double* seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    const Generator g = assemble(k11, gs);
    const auto peaks = resonance_peaks(g, peak_targets());
    std::vector<double> x, y;
    for (const auto& p : peaks)
        if (p.s >= 20.0 && p.s <= 400.0) {
            x.push_back(p.s);
            y.push_back(p.norm);
        }
    *points = static_cast<int>(x.size());
    *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return fit_loglog(x, y);
}

Outcome resolvent_growth() {
    const GridSpec def = ResolventScanConfig{}.grid;
    GridSpec fine = def;
    fine.n_u *= 2;
    fine.n_w *= 2;
    int p0 = 0, p1 = 0;
    double t0 = 0, t1 = 0;
    const double e0 = peak_exponent(def, &p0, &t0), e1 = peak_exponent(fine, &p1, &t1);
    Outcome o;
    o.pass = std::abs(e0 - 0.5) <= 0.1 && std::abs(e1 - 0.5) < std::abs(e0 - 0.5);
    o.detail = "resonance-envelope exponent " + fmt(e0, 4) + " at (" + std::to_string(def.n_u) + "," +
               std::to_string(def.n_w) + "), " + fmt(e1, 4) + " at (" + std::to_string(fine.n_u) + "," +
               std::to_string(fine.n_w) + "), " + std::to_string(p0) + "/" + std::to_string(p1) + " peaks";

    // plain log grid, for reference
    const Generator g = assemble(k11, def);
    std::vector<double> s;
    for (int i = 0; i < 40; ++i) s.push_back(20.0 * std::pow(20.0, i / 39.0));
    std::vector<double> y;
    const ScanResult r = scan(g, s);
    for (const auto& smp : r.samples) y.push_back(smp.norm);
    o.notes.push_back("plain 40-point log grid on [20,400]: exponent " + fmt(fit_loglog(s, y), 3) +
                      " (samples fall between resonances)");
    return o;
}

Outcome cross_validation() {
    const GridSpec def = ResolventScanConfig{}.grid;
    GridSpec fine = def;
    fine.n_u *= 2;
    fine.n_w *= 2;
    const Generator g0 = assemble(k11, def), g1 = assemble(k11, fine);
    const ResolventNorm rn(g0);
    bool bound_ok = true, sa_ok = true;
    std::string bounds, sa, grid_mode;
    for (int n : {5, 10, 20}) {
        const double s = 2.0 * pi * n;
        const double nrm = rn.at(s).norm, lb = lower_bound(k11, n).bound;
        bound_ok = bound_ok && nrm >= 0.9 * lb;
        bounds += " n=" + std::to_string(n) + ": " + fmt(nrm, 4) + " >= 0.9*" + fmt(lb, 4) + ";";
        double err[2][2];
        int gi = 0;
        for (const Generator* g : {&g0, &g1}) {
            const CVec z = zhat_n(*g, n).cast<cplx>();
            const CVec direct = shifted_solve(*g, cplx(0.0, s), z);
            err[gi][0] = rel_w(*g, apply_semianalytic(*g, cplx(0.0, s), z, SemianalyticMemory::exact).z, direct);
            err[gi][1] = rel_w(*g, apply_semianalytic(*g, cplx(0.0, s), z, SemianalyticMemory::grid).z, direct);
            ++gi;
        }
        sa_ok = sa_ok && err[0][0] <= 1e-3 && err[0][0] / err[1][0] >= 3.0;
        sa += " n=" + std::to_string(n) + ": " + fmt(err[0][0], 2) + " -> " + fmt(err[1][0], 2) + ";";
        grid_mode += " n=" + std::to_string(n) + ": " + fmt(err[0][1], 2) + " -> " + fmt(err[1][1], 2) + ";";
    }
    Outcome o;
    o.pass = bound_ok && sa_ok;
    o.detail = std::string("norm vs bound ") + (bound_ok ? "ok" : "VIOLATED") + ", semianalytic " +
               (sa_ok ? "ok" : "outside 1e-3 / 3x");
    o.notes.push_back("norm_at(2 pi n) vs lower bound:" + bounds);
    o.notes.push_back("semianalytic (continuous memory) vs direct, W-relative, default -> refined:" + sa);
    o.notes.push_back("semianalytic (discrete history) vs direct, same grids:" + grid_mode);
    return o;
}

Outcome spectrum_consistency() {
    const Strip strip = Strip::inside(k11, 0.5, 150.0);
    const RootList up = sigma_find(k11, strip);
    const RootList down = sigma_find(k11, Strip::inside(k11, -150.0, -0.5));
    bool ok = !up.sigma_roots.empty() && up.sigma_roots.size() == down.sigma_roots.size();
    double max_res = 0.0, max_re = -INFINITY, min_abs = INFINITY, conj_err = 0.0;
    for (std::size_t i = 0; i < up.sigma_roots.size(); ++i) {
        const cplx z = up.sigma_roots[i];
        max_res = std::max(max_res, up.sigma_residuals[i]);
        max_re = std::max(max_re, z.real());
        min_abs = std::min(min_abs, std::abs(z));
        double best = INFINITY;
        for (const cplx w : down.sigma_roots) best = std::min(best, std::abs(w - std::conj(z)));
        conj_err = std::max(conj_err, best);
    }
    ok = ok && max_res < 1e-9 && max_re < 0.0 && min_abs > 1e-8 && conj_err < 1e-9;

    const bool zl_empty = z_ell_find(k11, strip).empty();
    Strip wide = strip;
    wide.re_min = -3.0;
    wide.im_min = -1.0;
    const auto zl_wide = z_ell_find(k11, wide);
    const bool zl_ok = zl_empty && zl_wide.size() == 1 && std::abs(zl_wide[0] + 2.0) < 1e-12;

    // eigenvalues of A_h nearest each root on two grids (h halved) plus a finer history grid
    const GridSpec coarse{512, 64, HistoryParams{}}, fine{1024, 128, HistoryParams{}},
        fine_hist{1024, 128, HistoryParams{1.07}};
    const Generator gc = assemble(k11, coarse), gf = assemble(k11, fine), gh = assemble(k11, fine_hist);
    int matched = 0;
    double worst_ratio = 0.0, worst_err = 0.0;
    std::set<std::pair<long, long>> used;
    bool distinct = true;
    for (const cplx z : up.sigma_roots) {
        const cplx ec = nearest_eigenvalue(gc, z), ef = nearest_eigenvalue(gf, z), eh = nearest_eigenvalue(gh, z);
        // spatial O(h^2): remaining error of the fine grid ≈ |ef − ec| / 3
        // history O(ratio − 1): error at 1.15 ≈ |ef − eh| · 0.15 / 0.08
        const double tol = 1.5 * (std::abs(ef - ec) / 3.0 + std::abs(ef - eh) * 0.15 / 0.08) + 1e-8;
        const double err = std::abs(ef - z);
        worst_ratio = std::max(worst_ratio, err / tol);
        worst_err = std::max(worst_err, err);
        if (err <= tol) ++matched;
        distinct = distinct && used.insert({std::lround(ef.real() * 1e6), std::lround(ef.imag() * 1e6)}).second;
    }
    Outcome o;
    o.pass = ok && zl_ok && distinct && matched == static_cast<int>(up.sigma_roots.size());
    o.detail = std::to_string(up.sigma_roots.size()) + " roots: max |chi| = " + fmt(max_res, 2) + ", max Re = " +
               fmt(max_re, 4) + ", conjugate mismatch = " + fmt(conj_err, 2) + "; Z_ell in strip: " +
               (zl_empty ? "none" : "PRESENT") + ", widened strip: " + (zl_wide.empty() ? "none" : fmt(zl_wide[0].real(), 6)) +
               "; eigenvalue match " + std::to_string(matched) + "/" + std::to_string(up.sigma_roots.size()) +
               " (max err " + fmt(worst_err, 2) + ", max err/tol " + fmt(worst_ratio, 3) + ")";
    return o;
}

Outcome a2_bound() {
    const Generator g = assemble(k11, ResolventScanConfig{}.grid);
    const Operator a2 = a2_block(g);
    const ResolventNorm rn(a2);
    double sup = 0.0, arg = 0.0;
    for (int i = 0; i < 400; ++i) {
        const double r = -200.0 + 400.0 * i / 399.0;
        const double v = rn.at(r).norm;
        if (v > sup) {
            sup = v;
            arg = r;
        }
    }
    const double theta = k11.check().theta, limit = 1.1 * (1.0 + 8.0 * theta);
    Outcome o;
    o.pass = sup <= limit;
    o.detail = "sup ||R(ir, A2_h)||_W = " + fmt(sup, 5) + " at r = " + fmt(arg, 4) + " (limit " + fmt(limit, 3) +
               ", dim " + std::to_string(a2.dim()) + ")";
    return o;
}

double decay_slope(const GridSpec& gs, unsigned seed) {
    const Generator g = assemble(k11, gs);
    const Vec z0 = inverse_applied(g, random_state(g, seed, DatumKind::w_white));
    return window_slope(evolve_energy(g, z0, 100.0, 0.01), 10.0, 100.0);
}

Outcome decay() {
    const EvolveConfig ev;
    const double slope = decay_slope(ev.grid, 1);
    GridSpec fine = ev.grid;
    fine.n_u *= 2;
    fine.n_w *= 2;
    const double slope_fine = decay_slope(fine, 1);

    const DecayReportConfig dr;
    const Generator g = assemble(k11, dr.grid);
    const auto vals = semi_uniform_norm(g, dr.times, dr.dt);
    double lo = INFINITY, hi = 0.0;
    std::string series;
    for (const auto& [t, v] : vals) {
        if (t >= 10.0 && t <= 100.0) {
            lo = std::min(lo, t * t * v);
            hi = std::max(hi, t * t * v);
        }
        series += " " + fmt(t, 3) + ":" + fmt(t * t * v, 3);
    }
    const double decades = std::log10(hi / lo);
    Outcome o;
    o.pass = slope >= -2.4 && slope <= -1.6 && decades <= 2.0;
    o.detail = "slope of ||S(t)A^-1 r||_W on [10,100] = " + fmt(slope, 4) + " (target [-2.4,-1.6]); t^2 ||S_h(t)A_h^-1||_W band = " +
               fmt(decades, 3) + " decades";
    o.notes.push_back("slope after one refinement (" + std::to_string(fine.n_u) + "," + std::to_string(fine.n_w) +
                      "): " + fmt(slope_fine, 4));
    o.notes.push_back("t^2 ||S_h(t)A_h^-1||_W on the reduced grid:" + series);
    return o;
}

Outcome structural() {
    const Generator g = assemble(k11, EvolveConfig{}.grid);
    const double defect = dissipativity_defect(g, 100, 2024);
    const DecayTrace tr = evolve_energy(g, random_state(g, 5), 100.0, 0.01);

    std::vector<double> err;
    double skew = 0.0;
    for (int n : {64, 128}) {
        const Generator gw = assemble(k11, GridSpec{n, 16, HistoryParams{}});
        const Operator w = decoupled_wave_block(gw);
        const Eigen::MatrixXd W = to_dense(w.W), A = to_dense(w.A), WA = W * A;
        skew = std::max(skew, (WA + WA.transpose()).norm() / WA.norm());
        std::vector<double> im;
        for (const auto& e : Eigen::EigenSolver<Eigen::MatrixXd>(A).eigenvalues())
            if (e.imag() > 1e-9) im.push_back(e.imag());
        std::sort(im.begin(), im.end());
        double m = 0.0;
        for (int k = 1; k <= 5; ++k) m = std::max(m, std::abs(im[k - 1] - k * pi));
        err.push_back(m);
    }
    const double order = std::log2(err[0] / err[1]);
    Outcome o;
    o.pass = defect <= 1e-10 && tr.steps >= 10000 && tr.max_increase <= 1e-10 && skew <= 1e-10 && order > 1.9;
    o.detail = "max Re<Az,z>_W/|z|^2 = " + fmt(defect, 3) + "; " + std::to_string(tr.steps) +
               " CN steps, max relative increase " + fmt(tr.max_increase, 3) + "; wave block skew " + fmt(skew, 2) +
               ", |lambda_k - ik pi| (k<=5) " + fmt(err[0], 3) + " -> " + fmt(err[1], 3) + " (order " + fmt(order, 3) + ")";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    bool strict = false;
    std::vector<int> only;
    app.add_flag("--strict", strict, "exit non-zero if any criterion fails");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "symbol exactness", 1.0, symbol_exactness},
        {2, "positivity scan", 5.0, positivity_scan},
        {3, "high-frequency asymptote", 5.0, asymptote},
        {4, "lower-bound family", 1.0, lower_bound_family},
        {5, "resolvent growth", 300.0, resolvent_growth},
        {6, "cross-validation", 120.0, cross_validation},
        {7, "spectrum consistency", 120.0, spectrum_consistency},
        {8, "A2 bound", 120.0, a2_bound},
        {9, "decay", 600.0, decay},
        {10, "structural invariants", 60.0, structural},
    };
    int failed = 0, ran = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = sec <= c.budget;
        const bool pass = o.pass && in_time;
        std::cout << (pass ? "PASS" : "FAIL") << "  [" << std::setw(2) << c.id << "] " << c.name << ": " << o.detail
                  << " (" << fmt(sec, 3) << " s of " << c.budget << " s" << (in_time ? "" : ", OVER BUDGET") << ")\n";
        for (const auto& n : o.notes) std::cout << "            " << n << '\n';
        std::cout.flush();
        ++ran;
        if (!pass) ++failed;
    }
    std::cout << (ran - failed) << "/" << ran << " criteria passed\n";
    return strict && failed ? 1 : 0;
}
