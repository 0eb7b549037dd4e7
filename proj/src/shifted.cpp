#include "cgw/shifted.hpp"

#include <cmath>

#include "cgw/error.hpp"

namespace cgw {

template <class Scalar>
ShiftedSolver<Scalar>::ShiftedSolver(const Operator& op, Scalar lambda) : lambda_(lambda) {
    const auto& s = op.structure;
    const bool ok = s && s->n_theta() > 0 && s->J() > 0 &&
                    op.dim() == s->n_u + s->n_theta() + s->J() * s->n_w;
    if (ok && (s->n_u == 0 || std::abs(lambda) > 1e-8)) {
        hs_ = s;
        factor_structured();
    } else {
        factor_general(op);
    }
}

template <class Scalar>
Scalar ShiftedSolver<Scalar>::conj(Scalar x) const {
    if constexpr (std::is_same_v<Scalar, double>) return x;
    else return std::conj(x);
}

template <class Scalar>
void ShiftedSolver<Scalar>::factor_general(const Operator& op) {
    SpS M = -op.A.cast<Scalar>();
    SpS I(op.dim(), op.dim());
    I.setIdentity();
    M += lambda_ * I;
    M.makeCompressed();
    lu_.analyzePattern(M);
    lu_.factorize(M);
    if (lu_.info() != Eigen::Success)
        throw NumericalError("shift is (numerically) an eigenvalue: factorization failed");
}

template <class Scalar>
void ShiftedSolver<Scalar>::factor_structured() {
    const HistoryStructure& s = *hs_;
    const int J = s.J(), nt = s.n_theta(), nu = s.n_u, nw = s.n_w, h0 = s.heat0();
    c_.assign(J, Scalar(0));
    d_.assign(J, Scalar(0));
    Scalar c(0);
    ell_ = Scalar(1);
    for (int k = 0; k < J; ++k) {
        const double id = 1.0 / s.deltas[k];
        c = (c * id + Scalar(1)) / (lambda_ + id);
        c_[k] = c;
        ell_ += s.weights[k] * c;
    }
    const Scalar mu = conj(lambda_);
    Scalar d(0);
    for (int k = J - 1; k >= 0; --k) {
        const double next = k + 1 < J ? 1.0 / s.deltas[k + 1] : 0.0;
        d = (s.weights[k] + d * next) / (mu + 1.0 / s.deltas[k]);
        d_[k] = d;
    }

    // λ M + K̃_u / λ + ℓ_h K̃_w on θ
    std::vector<Eigen::Triplet<Scalar>> t;
    t.reserve(3 * nt + 8);
    for (int i = 0; i < nt; ++i) t.emplace_back(i, i, lambda_ * s.theta_mass[i]);
    if (nu > 0) {
        const Scalar f = Scalar(1) / (lambda_ * s.h_u);
        for (int i = 0; i < nu; ++i) {
            t.emplace_back(i, i, f * (i == nu - 1 ? 1.0 : 2.0));
            if (i > 0) t.emplace_back(i, i - 1, -f);
            if (i < nu - 1) t.emplace_back(i, i + 1, -f);
        }
    }
    const Scalar f = ell_ / s.h_w;
    for (int j = 0; j < nw; ++j) {
        t.emplace_back(h0 + j, h0 + j, f * (j == 0 ? 1.0 : 2.0));
        if (j > 0) t.emplace_back(h0 + j, h0 + j - 1, -f);
        if (j < nw - 1) t.emplace_back(h0 + j, h0 + j + 1, -f);
    }
    SpS T(nt, nt);
    T.setFromTriplets(t.begin(), t.end());
    T.makeCompressed();
    tri_.analyzePattern(T);
    tri_.factorize(T);
    if (tri_.info() != Eigen::Success)
        throw NumericalError("shift is (numerically) an eigenvalue: factorization failed");
}

namespace {

// y = K x for P1 stiffness with a free end (first or last), n nodes.
template <class V>
V stiffness_apply(const V& x, double h, bool free_last) {
    const int n = static_cast<int>(x.size());
    V y(n);
    for (int i = 0; i < n; ++i) {
        const bool fe = free_last ? i == n - 1 : i == 0;
        auto v = x[i] * (fe ? 1.0 : 2.0);
        if (i > 0) v -= x[i - 1];
        if (i < n - 1) v -= x[i + 1];
        y[i] = v / h;
    }
    return y;
}

}  // namespace

template <class Scalar>
typename ShiftedSolver<Scalar>::VecS ShiftedSolver<Scalar>::solve(const VecS& f) const {
    if (!hs_) return lu_.solve(f);
    const HistoryStructure& s = *hs_;
    const int J = s.J(), nt = s.n_theta(), nu = s.n_u, nw = s.n_w, h0 = s.heat0();
    const int th = nu, mem = nu + nt;

    // ξ_k: memory response to the data alone
    VecS xi = VecS::Zero(nw), sxi = VecS::Zero(nw);
    std::vector<VecS> xis(J);
    for (int k = 0; k < J; ++k) {
        const double id = 1.0 / s.deltas[k];
        xi = (xi * id + f.segment(mem + k * nw, nw)) / (lambda_ + id);
        xis[k] = xi;
        sxi += s.weights[k] * xi;
    }
    VecS rhs(nt);
    for (int i = 0; i < nt; ++i) rhs[i] = s.theta_mass[i] * f[th + i];
    if (nu > 0) {
        const VecS ku = stiffness_apply<VecS>(f.head(nu), s.h_u, true);
        rhs.head(nu) -= ku / lambda_;
    }
    rhs.segment(h0, nw) -= stiffness_apply<VecS>(sxi, s.h_w, false);
    const VecS theta = tri_.solve(rhs);

    VecS z(f.size());
    if (nu > 0) z.head(nu) = (f.head(nu) + theta.head(nu)) / lambda_;
    z.segment(th, nt) = theta;
    const VecS tw = theta.segment(h0, nw);
    for (int k = 0; k < J; ++k) z.segment(mem + k * nw, nw) = c_[k] * tw + xis[k];
    return z;
}

template <class Scalar>
typename ShiftedSolver<Scalar>::VecS ShiftedSolver<Scalar>::solve_adjoint(const VecS& g) const {
    if (!hs_) {
        if constexpr (std::is_same_v<Scalar, double>) return lu_.transpose().solve(g);
        else return lu_.adjoint().solve(g);
    }
    const HistoryStructure& s = *hs_;
    const int J = s.J(), nt = s.n_theta(), nu = s.n_u, nw = s.n_w, h0 = s.heat0();
    const int th = nu, mem = nu + nt;
    const Scalar mu = conj(lambda_);

    // ζ_k: backward recursion on the data alone
    std::vector<VecS> zeta(J);
    VecS zsum = VecS::Zero(nw), z = VecS::Zero(nw);
    for (int k = J - 1; k >= 0; --k) {
        const double next = k + 1 < J ? 1.0 / s.deltas[k + 1] : 0.0;
        z = (g.segment(mem + k * nw, nw) + z * next) / (mu + 1.0 / s.deltas[k]);
        zeta[k] = z;
        zsum += z;
    }
    // [μ M + K̃_u/μ + (1 + D) K̃_w] t = g_θ + g_u/μ + Σζ, with T(μ) = conj(T(λ))
    VecS rhs = g.segment(th, nt);
    if (nu > 0) rhs.head(nu) += g.head(nu) / mu;
    rhs.segment(h0, nw) += zsum;
    VecS t;
    if constexpr (std::is_same_v<Scalar, double>) t = tri_.solve(rhs);
    else t = tri_.solve(rhs.conjugate()).conjugate();

    VecS y(g.size());
    if (nu > 0) y.head(nu) = (g.head(nu) - stiffness_apply<VecS>(t.head(nu), s.h_u, true)) / mu;
    for (int i = 0; i < nt; ++i) y[th + i] = s.theta_mass[i] * t[i];
    const VecS v = stiffness_apply<VecS>(t.segment(h0, nw), s.h_w, false);
    for (int k = 0; k < J; ++k) y.segment(mem + k * nw, nw) = zeta[k] - d_[k] * v;
    return y;
}

template class ShiftedSolver<double>;
template class ShiftedSolver<std::complex<double>>;

}  // namespace cgw
