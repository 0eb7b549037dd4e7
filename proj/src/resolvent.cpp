#include "cgw/resolvent.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <atomic>
#include <functional>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "cgw/error.hpp"
#include "cgw/shifted.hpp"

namespace cgw {

using CSpMat = Eigen::SparseMatrix<cplx>;
using std::numbers::pi;

const char* to_string(NormMethod m) { return m == NormMethod::svd ? "svd" : "power_iteration"; }

namespace {

using ShiftedLU = ShiftedSolver<cplx>;

// Real triangular solves applied to real and imaginary parts separately.
CVec apply_real(const std::function<Vec(const Vec&)>& f, const CVec& x) {
    const Vec re = f(x.real()), im = f(x.imag());
    CVec y(re.size());
    y.real() = re;
    y.imag() = im;
    return y;
}

cplx expm1c(cplx x) {
    if (std::abs(x) < 1e-5) return x * (1.0 + x * (0.5 + x / 6.0));
    return std::exp(x) - 1.0;
}

// F_i = ∫_{x_0}^{x_i} f on a uniform grid: Simpson on pairs, a third-order
// one-interval rule for the odd remainder.
CVec cumulative_simpson(const CVec& f, double h) {
    const int n = static_cast<int>(f.size()) - 1;
    if (n < 3) throw ConfigError("cumulative_simpson: need at least 4 points");
    CVec F(n + 1);
    F[0] = 0.0;
    for (int i = 2; i <= n; i += 2) F[i] = F[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    for (int i = 1; i <= n; i += 2) {
        if (i < n)
            F[i] = F[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
        else
            F[i] = F[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
    }
    return F;
}

// G_i = ∫_{x_i}^{x_n} f
CVec reverse_cumulative_simpson(const CVec& f, double h) {
    const CVec r = f.reverse();
    return CVec(cumulative_simpson(r, h).reverse());
}

cplx extrapolate_end(cplx f1, cplx f2, cplx f3) { return 3.0 * f1 - 3.0 * f2 + f3; }

}  // namespace

// ---- norms ------------------------------------------------------------------

ResolventNorm::ResolventNorm(const Operator& op, ResolventOptions opts) : op_(op), opts_(opts) {
    if (op_.dim() > opts_.dense_threshold) {
        llt_ = std::make_shared<Eigen::SimplicialLLT<SpMat>>(op_.W);
        if (llt_->info() != Eigen::Success) throw NumericalError("resolvent: W is not SPD");
    }
}

double ResolventNorm::dense_norm(cplx lambda) const {
    const int n = op_.dim();
    const Eigen::MatrixXd W = to_dense(op_.W);
    Eigen::LLT<Eigen::MatrixXd> llt(W);
    if (llt.info() != Eigen::Success) throw NumericalError("resolvent: W is not SPD");
    // B = Lᵀ (λ − A) L^{-T}
    Eigen::MatrixXcd M = -to_dense(op_.A).cast<cplx>();
    M.diagonal().array() += lambda;
    const Eigen::MatrixXd Lt = llt.matrixU();
    Eigen::MatrixXcd B = Lt.cast<cplx>() * M;
    // right-multiply by L^{-T}: solve X Lᵀ = B  ⇔  L Xᵀ = Bᵀ
    Eigen::MatrixXcd Bt = B.transpose();
    const Eigen::MatrixXcd Lc = Eigen::MatrixXd(llt.matrixL()).cast<cplx>();
    Lc.triangularView<Eigen::Lower>().solveInPlace(Bt);
    B = Bt.transpose();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(B);
    const double smin = svd.singularValues()[n - 1];
    if (!(smin > 0.0) || smin < 1e-14 * svd.singularValues()[0])
        throw NumericalError("resolvent: shift hits the spectrum");
    return 1.0 / smin;
}

double ResolventNorm::sparse_norm(cplx lambda, int* iters) const {
    const auto& llt = *llt_;
    const ShiftedLU S(op_, lambda);
    const auto& P = llt.permutationP();
    // W = GᵀG with G = Lᵀ P
    auto Ginv = [&](const Vec& y) -> Vec {
        Vec t = llt.matrixU().solve(y);
        return P.inverse() * t;
    };
    auto GinvT = [&](const Vec& x) -> Vec {
        Vec t = P * x;
        return llt.matrixL().solve(t);
    };
    const CSpMat Wc = op_.W.cast<cplx>();
    auto apply = [&](const CVec& y) -> CVec {
        const CVec x = apply_real(Ginv, y);
        const CVec r1 = S.solve(x);
        const CVec r2 = Wc * r1;
        const CVec r3 = S.solve_adjoint(r2);
        return apply_real(GinvT, r3);
    };

    const int n = op_.dim();
    const int kmax = std::min(opts_.max_iter, n);
    std::mt19937_64 rng(opts_.seed);
    std::normal_distribution<double> nd;
    CVec q(n);
    for (int i = 0; i < n; ++i) q[i] = cplx(nd(rng), nd(rng));
    q.normalize();

    Eigen::MatrixXcd Q(n, std::min(kmax + 1, n));
    Q.col(0) = q;
    std::vector<double> alpha, beta;
    double theta_prev = 0.0, theta = 0.0;
    for (int j = 0; j < kmax; ++j) {
        CVec w = apply(Q.col(j));
        const double a = Q.col(j).dot(w).real();
        alpha.push_back(a);
        const auto Qj = Q.leftCols(j + 1);
        for (int pass = 0; pass < 2; ++pass) w.noalias() -= Qj * (Qj.adjoint() * w);
        const double b = w.norm();

        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        theta = es.eigenvalues()[m - 1];
        const double resid = b * std::abs(es.eigenvectors()(m - 1, m - 1));
        if (iters) *iters = j + 1;
        if ((j > 0 && resid <= opts_.tol * theta && std::abs(theta - theta_prev) <= opts_.tol * theta) ||
            b <= 1e-14 * theta)
            break;
        theta_prev = theta;
        if (j + 1 >= Q.cols()) break;
        beta.push_back(b);
        Q.col(j + 1) = w / b;
    }
    if (!(theta > 0.0) || !std::isfinite(theta)) throw NumericalError("resolvent: Lanczos breakdown");
    return std::sqrt(theta);
}

double ResolventNorm::at_lambda(cplx lambda, NormMethod* used, int* iters) const {
    if (op_.dim() <= opts_.dense_threshold) {
        if (used) *used = NormMethod::svd;
        if (iters) *iters = 0;
        return dense_norm(lambda);
    }
    if (used) *used = NormMethod::power_iteration;
    return sparse_norm(lambda, iters);
}

ResolventSample ResolventNorm::at(double s) const {
    ResolventSample r;
    r.s = s;
    r.norm = at_lambda(cplx(0.0, s), &r.method, &r.iterations);
    return r;
}

ResolventSample norm_at(const Operator& op, double s, const ResolventOptions& opts) {
    return ResolventNorm(op, opts).at(s);
}

// ---- lower bound family -----------------------------------------------------

LowerBoundSample lower_bound(const MemoryKernel& k, int n) {
    if (n < 1) throw ConfigError("lower_bound: n must be >= 1");
    LowerBoundSample r;
    r.n = n;
    const cplx lam(0.0, 2.0 * pi * n);
    r.alpha_n = ell(k, lam);
    r.sigma_n = std::sqrt(lam / r.alpha_n);
    const cplx t = std::tanh(r.sigma_n);
    if (std::abs(t) < 1e-300) throw DomainError("lower_bound: tanh(sigma_n) = 0");
    r.u_plus = 0.25 + r.alpha_n * r.sigma_n / (4.0 * t);
    r.bound = std::sqrt(std::max(std::norm(r.u_plus) - 1.0 / 3.0, 0.0));
    return r;
}

Vec zhat_n(const Generator& gen, int n) {
    const Layout& L = gen.layout;
    const double k = 2.0 * pi * n;
    Vec z = Vec::Zero(L.dim());
    for (int i = 0; i < L.n_u; ++i) {
        const double x = -1.0 + (i + 1) * L.h_u();
        z[i] = std::sin(k * x) / k;
        z[L.off_theta() + i] = std::cos(k * x);
    }
    return z;
}

// ---- semi-analytic resolvent ------------------------------------------------

SemianalyticResult apply_semianalytic(const Generator& gen, cplx lambda, const CVec& zhat,
                                      SemianalyticMemory memory) {
    if (!gen.history) throw ConfigError("apply_semianalytic: requires history-grid memory");
    const Layout& L = gen.layout;
    if (zhat.size() != L.dim()) throw ConfigError("apply_semianalytic: wrong state dimension");
    if (std::abs(lambda) < 1e-12) throw DomainError("apply_semianalytic: lambda = 0 is excluded");
    const MemoryKernel& k = gen.kernel;
    const HistoryGrid& hg = *gen.history;
    const int nu = L.n_u, nw = L.n_w, J = hg.J();
    const double hu = L.h_u(), hw = L.h_w();

    // memory response to a unit constant w: η = c(s) w, and φ = ℓ w + ∫μ ξ̂
    std::vector<cplx> c_node(J);
    cplx ell_lam;
    if (memory == SemianalyticMemory::exact) {
        ell_lam = detail::ell_rational(k, lambda);
        for (int j = 0; j < J; ++j) c_node[j] = -expm1c(-lambda * hg.s[j + 1]) / lambda;
    } else {
        cplx c = 0.0;
        ell_lam = 1.0;
        for (int j = 0; j < J; ++j) {
            const double d = hg.delta(j);
            c = (c / d + 1.0) / (lambda + 1.0 / d);
            c_node[j] = c;
            ell_lam += hg.weights[j] * c;
        }
    }
    if (std::abs(ell_lam) < 1e-14) throw DomainError("apply_semianalytic: ell(lambda) = 0");
    const cplx q = std::sqrt(lambda / ell_lam);

    // ξ̂ at history nodes and M = ∫ μ ξ̂ ds per heat node (x = 1 has η̂ = 0)
    Eigen::MatrixXcd xi(J, nw);
    CVec mem_int = CVec::Zero(nw + 1);
    for (int j = 0; j < nw; ++j) {
        cplx x = 0.0, acc = 0.0;
        for (int c = 0; c < J; ++c) {
            const double d = hg.delta(c);
            const cplx e = zhat[L.mem(c, j)];
            if (memory == SemianalyticMemory::exact) {
                const double s0 = hg.s[c];
                for (const auto& m : k.modes()) {
                    const cplx bl = m.b + lambda;
                    const cplx E = -expm1c(-bl * d) / bl;
                    const double Mm = -std::expm1(-m.b * d) / m.b;
                    acc += m.a * std::exp(-m.b * s0) * (x * E + e * (Mm - E) / lambda);
                }
                x = std::exp(-lambda * d) * x - e * expm1c(-lambda * d) / lambda;
            } else {
                x = (x / d + e) / (lambda + 1.0 / d);
                acc += hg.weights[c] * x;
            }
            xi(c, j) = x;
        }
        if (memory == SemianalyticMemory::exact) {
            const double S = hg.s[J];
            for (const auto& m : k.modes()) acc += x * m.a * std::exp(-m.b * S) / (m.b + lambda);
        }
        mem_int[j] = acc;
    }
    const CVec rho = (lambda / ell_lam) * mem_int;  // ϱ̂ on heat nodes 0..n_w

    // wave side: nodes x_i = −1 + i h_u, i = 0..n_u
    CVec uh(nu + 1), g(nu + 1);
    uh[0] = 0.0;
    for (int i = 1; i <= nu; ++i) {
        uh[i] = zhat[i - 1];
        g[i] = zhat[L.off_theta() + i - 1] + lambda * uh[i];
    }
    g[0] = extrapolate_end(g[1], g[2], g[3]);
    CVec fm(nu + 1), fp(nu + 1), xs(nu + 1);
    for (int i = 0; i <= nu; ++i) {
        const double x = -1.0 + i * hu;
        xs[i] = x;
        fm[i] = std::exp(-lambda * x) * g[i];
        fp[i] = std::exp(lambda * x) * g[i];
    }
    const CVec Cm = cumulative_simpson(fm, hu), Cp = cumulative_simpson(fp, hu);
    CVec U(nu + 1);
    for (int i = 0; i <= nu; ++i) {
        const double x = xs[i].real();
        U[i] = (std::exp(lambda * x) * Cm[i] - std::exp(-lambda * x) * Cp[i]) / (2.0 * lambda);
    }
    const cplx U0 = U[nu];
    const cplx Ux0 = 0.5 * (Cm[nu] + Cp[nu]);

    // heat side: nodes y_j = j h_w, j = 0..n_w; ŵ(0) from the heat side
    CVec f(nw + 1);
    for (int j = 1; j < nw; ++j) f[j] = zhat[L.heat(j)] + rho[j];
    f[0] = extrapolate_end(zhat[L.heat(1)], zhat[L.heat(2)], zhat[L.heat(3)]) + rho[0];
    f[nw] = extrapolate_end(zhat[L.heat(nw - 1)], zhat[L.heat(nw - 2)], zhat[L.heat(nw - 3)]);
    CVec gp(nw + 1), gm(nw + 1);
    for (int j = 0; j <= nw; ++j) {
        const double y = j * hw;
        gp[j] = std::exp(q * y) * f[j];
        gm[j] = std::exp(-q * y) * f[j];
    }
    const CVec Dp = reverse_cumulative_simpson(gp, hw), Dm = reverse_cumulative_simpson(gm, hw);
    CVec Phi(nw + 1);
    for (int j = 0; j <= nw; ++j) {
        const double y = j * hw;
        Phi[j] = (std::exp(-q * y) * Dp[j] - std::exp(q * y) * Dm[j]) / (2.0 * q);
    }
    const cplx Phix0 = -0.5 * (Dp[0] + Dm[0]);

    // interface: v(0) = w(0), u'(0) = φ'(0)
    Eigen::Matrix2cd M;
    M << ell_lam * lambda * std::sinh(lambda), std::sinh(q),
        ell_lam * lambda * std::cosh(lambda), -ell_lam * q * std::cosh(q);
    Eigen::Vector2cd rhs;
    rhs << ell_lam * (uh[nu] + lambda * U0 - rho[0] / lambda) - Phi[0], ell_lam * (Ux0 - Phix0);
    SemianalyticResult res;
    res.det = M.determinant();
    const double scale = std::abs(M(0, 0) * M(1, 1)) + std::abs(M(0, 1) * M(1, 0));
    if (!(std::abs(res.det) > 1e-12 * scale))
        throw NumericalError("apply_semianalytic: lambda is (numerically) in the spectrum");
    const Eigen::Vector2cd ab = M.partialPivLu().solve(rhs);
    res.a = ab[0];
    res.b = ab[1];

    res.z = CVec::Zero(L.dim());
    for (int i = 1; i <= nu; ++i) {
        const cplx u = res.a * std::sinh(lambda * (xs[i] + 1.0)) - U[i];
        res.z[i - 1] = u;
        res.z[L.off_theta() + i - 1] = lambda * u - uh[i];
    }
    CVec w(nw);
    for (int j = 0; j < nw; ++j) {
        const cplx phi = -res.b * std::sinh(q * (1.0 - j * hw)) - Phi[j];
        w[j] = phi / ell_lam - rho[j] / lambda;
    }
    res.interface_gap = std::abs(res.z[L.interface()] - w[0]);
    for (int j = 1; j < nw; ++j) res.z[L.heat(j)] = w[j];
    for (int c = 0; c < J; ++c)
        for (int j = 0; j < nw; ++j) res.z[L.mem(c, j)] = c_node[c] * w[j] + xi(c, j);
    return res;
}

CVec shifted_solve(const Operator& op, cplx lambda, const CVec& zhat) {
    return ShiftedLU(op, lambda).solve(zhat);
}

// ---- scans ------------------------------------------------------------------

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

double fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return std::nan("");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ScanResult scan(const Operator& op, const std::vector<double>& s_grid, const ResolventOptions& opts,
                int threads) {
    ScanResult out;
    out.samples.resize(s_grid.size());
    if (s_grid.empty()) return out;
    const ResolventNorm rn(op, opts);
    parallel_for(static_cast<int>(s_grid.size()), threads, [&](int i) {
        try {
            out.samples[i] = rn.at(s_grid[i]);
        } catch (const std::exception& e) {
            out.samples[i].s = s_grid[i];
            out.samples[i].norm = std::nan("");
            out.samples[i].error = e.what();
        }
    });
    double smax = 0.0;
    for (double s : s_grid) smax = std::max(smax, std::abs(s));
    std::vector<double> xs, ys;
    for (const auto& r : out.samples)
        if (r.error.empty() && std::abs(r.s) >= 0.1 * smax && r.s != 0.0) {
            xs.push_back(std::abs(r.s));
            ys.push_back(r.norm);
        }
    out.fit_points = static_cast<int>(xs.size());
    out.exponent = fit_loglog(xs, ys);
    return out;
}

cplx nearest_eigenvalue(const Operator& op, cplx shift, double tol, int max_iter) {
    const ShiftedLU S(op, shift);  // factors (shift − A)
    const int n = op.dim();
    CVec x(n);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int i = 0; i < n; ++i) x[i] = cplx(nd(rng), nd(rng));
    x.normalize();
    cplx lam = shift, prev = shift;
    for (int it = 0; it < max_iter; ++it) {
        const CVec y = S.solve(x);  // (shift − A)^{-1} x
        const cplx mu = x.dot(y);      // ≈ 1/(shift − λ)
        lam = shift - 1.0 / mu;
        x = y / y.norm();
        if (it > 2 && std::abs(lam - prev) <= tol * (1.0 + std::abs(lam))) break;
        prev = lam;
    }
    return lam;
}

std::vector<PeakSample> resonance_peaks(const Operator& op, const std::vector<double>& targets,
                                        const ResolventOptions& opts, int threads) {
    std::vector<PeakSample> out(targets.size());
    const ResolventNorm rn(op, opts);
    parallel_for(static_cast<int>(targets.size()), threads, [&](int i) {
        PeakSample& p = out[i];
        p.target = targets[i];
        p.eigenvalue = nearest_eigenvalue(op, cplx(0.0, targets[i]));
        const double c = p.eigenvalue.imag();
        const double w = std::max(4.0 * std::abs(p.eigenvalue.real()), 1e-6);
        // golden-section search for the maximum on [c − w, c + w]
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = c - w, b = c + w;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = rn.at(x1).norm, f2 = rn.at(x2).norm;
        for (int it = 0; it < 14; ++it) {
            if (f1 > f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = rn.at(x1).norm;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = rn.at(x2).norm;
            }
        }
        p.s = f1 > f2 ? x1 : x2;
        p.norm = std::max(f1, f2);
    });
    return out;
}

}  // namespace cgw
