#include "cgw/evolve.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <map>
#include <random>

#include "cgw/error.hpp"
#include "cgw/resolvent.hpp"

namespace cgw {

Stepper::Stepper(const Operator& op, double dt)
    : dt_(dt), solver_(op, dt > 0.0 ? 2.0 / dt : 1.0) {
    if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
    SpMat I(op.dim(), op.dim());
    I.setIdentity();
    plus_ = I + 0.5 * dt * op.A;
}

// (I − dt/2 A) = (dt/2)(2/dt − A)
Vec Stepper::step(const Vec& z) const { return (2.0 / dt_) * solver_.solve(plus_ * z); }

Vec step_cn(const Operator& op, const Vec& z, double dt) { return Stepper(op, dt).step(z); }

DecayTrace evolve_energy(const Operator& op, const Vec& z0, double t_max, double dt, const DecayOptions& opts) {
    if (!(t_max > 0.0)) throw ConfigError("evolve: t_max must be positive");
    if (z0.size() != op.dim()) throw ConfigError("evolve: wrong state dimension");
    const Stepper st(op, dt);

    std::vector<long> marks{0};
    for (double t = opts.t_first; t <= t_max * (1 + 1e-12); t *= opts.ratio) {
        const long n = std::lround(t / dt);
        if (n > marks.back()) marks.push_back(n);
    }
    if (const long n = std::lround(t_max / dt); n > marks.back()) marks.push_back(n);
    DecayTrace tr;
    Vec z = z0;
    double e = w_norm(op, z);
    tr.times.push_back(0.0);
    tr.energies.push_back(e);
    std::size_t next = 1;
    for (long n = 1; next < marks.size(); ++n) {
        z = st.step(z);
        const double e1 = w_norm(op, z);
        if (!std::isfinite(e1))
            throw NumericalError("evolve: non-finite state at t = " + std::to_string(n * dt));
        if (e > 0.0) tr.max_increase = std::max(tr.max_increase, (e1 - e) / e);
        e = e1;
        if (n == marks[next]) {
            tr.times.push_back(n * dt);
            tr.energies.push_back(e);
            ++next;
        }
        tr.steps = static_cast<int>(n);
    }
    const int w = opts.window;
    for (std::size_t i = 1; i + w <= tr.times.size(); ++i) {
        std::vector<double> t(tr.times.begin() + i, tr.times.begin() + i + w);
        std::vector<double> y(tr.energies.begin() + i, tr.energies.begin() + i + w);
        tr.slope_times.push_back(std::sqrt(t.front() * t.back()));
        tr.slopes.push_back(fit_loglog(t, y));
    }
    return tr;
}

double window_slope(const DecayTrace& tr, double t_lo, double t_hi) {
    std::vector<double> t, y;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        if (tr.times[i] >= t_lo * (1 - 1e-9) && tr.times[i] <= t_hi * (1 + 1e-9)) {
            t.push_back(tr.times[i]);
            y.push_back(tr.energies[i]);
        }
    return fit_loglog(t, y);
}

Vec random_state(const Operator& op, unsigned seed, DatumKind kind) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Vec xi(op.dim());
    for (int i = 0; i < xi.size(); ++i) xi[i] = nd(rng);
    if (kind == DatumKind::raw) return xi;
    Eigen::SimplicialLLT<SpMat> llt(op.W);
    if (llt.info() != Eigen::Success) throw NumericalError("random_state: W is not SPD");
    // W = GᵀG, G = Lᵀ P; r = G^{-1} ξ
    const Vec t = llt.matrixU().solve(xi);
    return llt.permutationP().inverse() * t;
}

Vec inverse_applied(const Operator& op, const Vec& r) {
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(op.A);
    lu.factorize(op.A);
    if (lu.info() != Eigen::Success) throw NumericalError("inverse_applied: A is singular");
    Vec z = lu.solve(r);
    return z / w_norm(op, z);
}

std::vector<std::pair<double, double>> semi_uniform_norm(const Operator& op, const std::vector<double>& times,
                                                         double dt, int max_dim) {
    const int n = op.dim();
    if (n > max_dim)
        throw ConfigError("semi_uniform_norm: dimension " + std::to_string(n) + " exceeds " +
                          std::to_string(max_dim) + "; use a smaller grid");
    if (!(dt > 0.0)) throw ConfigError("semi_uniform_norm: dt must be positive");
    using Mat = Eigen::MatrixXd;
    const Mat W = to_dense(op.W), A = to_dense(op.A);
    Eigen::LLT<Mat> llt(W);
    if (llt.info() != Eigen::Success) throw NumericalError("semi_uniform_norm: W is not SPD");
    const Mat Lt = llt.matrixU();
    auto similar = [&](const Mat& M) {  // Lᵀ M L^{-T}
        Mat X = (Lt * M).transpose();
        llt.matrixL().solveInPlace(X);
        return Mat(X.transpose());
    };
    const Mat At = similar(A);
    const Mat I = Mat::Identity(n, n);
    const Mat C = (I - 0.5 * dt * At).partialPivLu().solve(I + 0.5 * dt * At);
    const Mat Ainv = At.partialPivLu().inverse();

    std::map<long, Mat> pow2;  // C^{2^k}
    pow2[1] = C;
    auto power = [&](long m) {
        Mat P = I;
        for (long bit = 1; bit <= m; bit <<= 1) {
            if (!pow2.count(bit)) pow2[bit] = pow2[bit >> 1] * pow2[bit >> 1];
            if (m & bit) P = pow2[bit] * P;
        }
        return P;
    };

    std::vector<std::pair<double, double>> out;
    Mat S = Ainv;
    long done = 0;
    for (double t : times) {
        const long m = std::lround(t / dt);
        if (m < done) throw ConfigError("semi_uniform_norm: times must be non-decreasing");
        if (m > done) S = power(m - done) * S;
        done = m;
        Eigen::BDCSVD<Mat> svd(S);
        out.emplace_back(m * dt, svd.singularValues()[0]);
    }
    return out;
}

}  // namespace cgw
