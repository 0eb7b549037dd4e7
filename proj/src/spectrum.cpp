#include "cgw/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cgw/error.hpp"
#include "cgw/symbols.hpp"

namespace cgw {

using cld = std::complex<long double>;

Strip Strip::inside(const MemoryKernel& k, double im_min, double im_max) {
    Strip s;
    s.re_min = -0.49 * k.delta();
    s.re_max = 0.0;
    s.im_min = im_min;
    s.im_max = im_max;
    return s;
}

bool Strip::contains(cplx z) const {
    return z.real() > re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
}

std::vector<cplx> z_ell_find(const MemoryKernel& k, const Strip& strip) {
    // ℓ(λ) Π_j (b_j + λ) = Π_j (b_j + λ) + Σ_k (a_k/b_k) Π_{j≠k} (b_j + λ)
    const auto& modes = k.modes();
    const int K = static_cast<int>(modes.size());
    auto poly_mul = [](const std::vector<double>& p, double c0) {
        // p(λ)·(c0 + λ), coefficients in increasing degree
        std::vector<double> r(p.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            r[i] += c0 * p[i];
            r[i + 1] += p[i];
        }
        return r;
    };
    std::vector<double> num{1.0};
    for (const auto& m : modes) num = poly_mul(num, m.b);
    for (int i = 0; i < K; ++i) {
        std::vector<double> p{modes[i].a / modes[i].b};
        for (int j = 0; j < K; ++j)
            if (j != i) p = poly_mul(p, modes[j].b);
        for (std::size_t d = 0; d < p.size(); ++d) num[d] += p[d];
    }
    // monic of degree K: companion matrix
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(K, K);
    for (int i = 0; i < K; ++i) C(i, K - 1) = -num[i] / num[K];
    for (int i = 1; i < K; ++i) C(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    std::vector<cplx> out;
    for (int i = 0; i < K; ++i) {
        cplx z = es.eigenvalues()[i];
        // Newton polish on ℓ itself; roots that coincide with poles (repeated b) are spurious
        for (int it = 0; it < 20; ++it) {
            cplx l = detail::ell_rational(k, z), dl = 0.0;
            for (const auto& m : modes) dl -= m.a / (m.b * (m.b + z) * (m.b + z));
            if (std::abs(dl) == 0.0) break;
            z -= l / dl;
        }
        if (!std::isfinite(z.real()) || std::abs(detail::ell_rational(k, z)) > 1e-10) continue;
        if (strip.contains(z)) out.push_back(z);
    }
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
    return out;
}

namespace {

struct NewtonResult {
    cld root;
    long double residual;
    bool converged;
};

NewtonResult damped_newton(const MemoryKernel& k, cld z) {
    cld f = chi_ld(k, z);
    for (int it = 0; it < 60; ++it) {
        const long double h = 1e-7L * (1.0L + std::abs(z));
        const cld df = (chi_ld(k, z + h) - chi_ld(k, z - h)) / (2.0L * h);
        if (std::abs(df) == 0.0L) break;
        const cld step = f / df;
        long double damp = 1.0L;
        cld trial = z - step, ft = chi_ld(k, trial);
        while (std::abs(ft) > std::abs(f) && damp > 1.0L / 1024.0L) {
            damp *= 0.5L;
            trial = z - damp * step;
            ft = chi_ld(k, trial);
        }
        if (std::abs(ft) > std::abs(f)) break;
        z = trial;
        f = ft;
        if (std::abs(damp * step) <= 1e-18L * (1.0L + std::abs(z))) break;
    }
    return {z, std::abs(f), std::abs(f) < 1e-9L};
}

}  // namespace

RootList sigma_find(const MemoryKernel& k, const Strip& strip, SeedGrid seeds) {
    if (!(strip.re_min > -0.5 * k.delta())) throw ConfigError("sigma_find: strip leaves Pi_delta");
    if (!(strip.re_min < strip.re_max) || !(strip.im_min < strip.im_max))
        throw ConfigError("sigma_find: empty strip");
    const int nre = std::max(seeds.n_re, 3);
    const int nim = seeds.n_im > 0 ? seeds.n_im
                                   : std::max(8, static_cast<int>(std::ceil((strip.im_max - strip.im_min) /
                                                                             (std::numbers::pi / 8))));
    RootList out;
    out.z_ell_roots = z_ell_find(k, strip);
    for (const auto& z : out.z_ell_roots) out.z_ell_residuals.push_back(std::abs(detail::ell_rational(k, z)));

    Eigen::MatrixXd logabs(nre, nim);
    auto node = [&](int i, int j) {
        return cplx(strip.re_min + (strip.re_max - strip.re_min) * i / (nre - 1),
                    strip.im_min + (strip.im_max - strip.im_min) * j / (nim - 1));
    };
    for (int i = 0; i < nre; ++i)
        for (int j = 0; j < nim; ++j) logabs(i, j) = std::log(std::abs(detail::chi_impl(k, node(i, j))) + 1e-300);

    std::vector<cld> found;
    for (int i = 0; i < nre; ++i)
        for (int j = 0; j < nim; ++j) {
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if ((di || dj) && a >= 0 && a < nre && b >= 0 && b < nim && logabs(a, b) < logabs(i, j)) {
                        is_min = false;
                        break;
                    }
                }
            if (!is_min) continue;
            ++out.seeds;
            const cplx z0 = node(i, j);
            const NewtonResult nr = damped_newton(k, cld(z0.real(), z0.imag()));
            const cplx z(static_cast<double>(nr.root.real()), static_cast<double>(nr.root.imag()));
            bool keep = nr.converged && strip.contains(z) && std::abs(z) > 1e-8;
            for (const auto& r : out.z_ell_roots) keep = keep && std::abs(z - r) > 1e-8;
            if (!keep) {
                ++out.dropped;
                continue;
            }
            bool dup = false;
            for (std::size_t m = 0; m < found.size(); ++m)
                if (std::abs(nr.root - found[m]) < 1e-6L) {
                    dup = true;
                    if (nr.residual < out.sigma_residuals[m]) {
                        found[m] = nr.root;
                        out.sigma_roots[m] = z;
                        out.sigma_residuals[m] = static_cast<double>(nr.residual);
                    }
                }
            if (dup) continue;
            found.push_back(nr.root);
            out.sigma_roots.push_back(z);
            out.sigma_residuals.push_back(static_cast<double>(nr.residual));
        }
    std::vector<std::size_t> idx(out.sigma_roots.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return out.sigma_roots[a].imag() < out.sigma_roots[b].imag(); });
    RootList sorted = out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        sorted.sigma_roots[i] = out.sigma_roots[idx[i]];
        sorted.sigma_residuals[i] = out.sigma_residuals[idx[i]];
    }
    return sorted;
}

ConsistencyReport resolvent_spectrum_consistency(const RootList& roots, const Operator& op,
                                                 const std::vector<double>& s_samples, double tol,
                                                 const ResolventOptions& opts) {
    ConsistencyReport rep;
    const ResolventNorm rn(op, opts);
    std::vector<cplx> all = roots.sigma_roots;
    all.insert(all.end(), roots.z_ell_roots.begin(), roots.z_ell_roots.end());
    for (const auto& z : roots.sigma_roots) all.push_back(std::conj(z));
    for (double s : s_samples) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& z : all) d = std::min(d, std::abs(cplx(0.0, s) - z));
        const double nrm = rn.at(s).norm;
        rep.s.push_back(s);
        rep.norm.push_back(nrm);
        rep.inverse_distance.push_back(1.0 / d);
        if (nrm < (1.0 - tol) / d) rep.violations.push_back(s);
    }
    return rep;
}

}  // namespace cgw
