#pragma once

#include <Eigen/SparseCholesky>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cgw/operator.hpp"
#include "cgw/symbols.hpp"

namespace cgw {

enum class NormMethod { svd, power_iteration };
const char* to_string(NormMethod m);

struct ResolventOptions {
    int dense_threshold = 800;  // dense SVD at or below this dimension
    double tol = 1e-8;          // relative tolerance on the largest eigenvalue of R^*R
    int max_iter = 300;
    unsigned seed = 7;
};

struct ResolventSample {
    double s = 0.0;
    double norm = 0.0;
    NormMethod method = NormMethod::svd;
    int iterations = 0;
    std::string error;  // non-empty if the sample failed (scan keeps going)
};

/// ‖R(λ, A)‖_W for an operator with Gram matrix W = GᵀG.
/// Holds the factorization of W so that repeated evaluations share it.
class ResolventNorm {
public:
    explicit ResolventNorm(const Operator& op, ResolventOptions opts = {});
    ResolventSample at(double s) const;
    double at_lambda(cplx lambda, NormMethod* used = nullptr, int* iters = nullptr) const;
    const Operator& op() const { return op_; }
    const ResolventOptions& options() const { return opts_; }

private:
    double dense_norm(cplx lambda) const;
    double sparse_norm(cplx lambda, int* iters) const;

    Operator op_;
    ResolventOptions opts_;
    std::shared_ptr<Eigen::SimplicialLLT<SpMat>> llt_;
};

ResolventSample norm_at(const Operator& op, double s, const ResolventOptions& opts = {});

struct LowerBoundSample {
    int n = 0;
    cplx alpha_n;
    cplx sigma_n;
    cplx u_plus;
    double bound = 0.0;
};

/// Closed-form lower bound for ‖R(2πni, 𝔸)‖ from the explicit family ẑ_n.
LowerBoundSample lower_bound(const MemoryKernel& k, int n);

/// The unit-energy datum ẑ_n sampled on the grid: û = sin(2πnx)/(2πn), v̂ = cos(2πnx).
Vec zhat_n(const Generator& gen, int n);

enum class SemianalyticMemory {
    exact,  // continuous memory variable: ℓ(λ), ξ̂ by exact convolution in s
    grid    // memory variable discretized by the generator's upwind history grid
};

struct SemianalyticResult {
    CVec z;                 // generator layout
    cplx a, b, det;         // coefficients of the 2×2 interface system
    double interface_gap;   // |v(0) − w(0)| of the reconstruction
};

/// Resolvent (λ − 𝔸)^{-1} ẑ from the explicit solution formulas: U and Φ by
/// composite Simpson on the generator's x-grids, 2×2 system for the interface.
SemianalyticResult apply_semianalytic(const Generator& gen, cplx lambda, const CVec& zhat,
                                      SemianalyticMemory memory = SemianalyticMemory::exact);

/// Direct sparse solve of (λ − A_h) z = ẑ.
CVec shifted_solve(const Operator& op, cplx lambda, const CVec& zhat);

struct ScanResult {
    std::vector<ResolventSample> samples;
    double exponent = 0.0;  // least-squares log-log slope over the top decade of |s|
    int fit_points = 0;
};

ScanResult scan(const Operator& op, const std::vector<double>& s_grid,
                const ResolventOptions& opts = {}, int threads = 1);

/// Least-squares slope of log y against log x.
double fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Eigenvalue of A nearest to the shift, by inverse iteration.
cplx nearest_eigenvalue(const Operator& op, cplx shift, double tol = 1e-12, int max_iter = 200);

struct PeakSample {
    double target = 0.0;  // requested frequency
    cplx eigenvalue;      // nearest eigenvalue of A_h
    double s = 0.0;       // location of the local maximum of ‖R(is)‖
    double norm = 0.0;
};

/// Local maxima of s ↦ ‖R(is)‖ at the resonances nearest to each target.
std::vector<PeakSample> resonance_peaks(const Operator& op, const std::vector<double>& targets,
                                        const ResolventOptions& opts = {}, int threads = 1);

/// Run f(i) for i in [0, n) on up to `threads` worker threads.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

}  // namespace cgw
