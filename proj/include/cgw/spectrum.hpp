#pragma once

#include <complex>
#include <string>
#include <vector>

#include "cgw/kernel.hpp"
#include "cgw/operator.hpp"
#include "cgw/resolvent.hpp"

namespace cgw {

/// re_min < Re λ ≤ re_max, im_min ≤ Im λ ≤ im_max.
struct Strip {
    double re_min = -0.49;
    double re_max = 0.0;
    double im_min = 0.5;
    double im_max = 50.0 * 3.141592653589793;

    /// Default strip inside Π_δ: re_min = −0.49 δ.
    static Strip inside(const MemoryKernel& k, double im_min, double im_max);
    bool contains(cplx z) const;
};

struct RootList {
    std::vector<cplx> z_ell_roots;
    std::vector<double> z_ell_residuals;  // |ℓ(root)|
    std::vector<cplx> sigma_roots;        // sorted by imaginary part
    std::vector<double> sigma_residuals;  // |χ(root)|, extended precision
    int seeds = 0;
    int dropped = 0;  // seeds whose Newton iteration failed or left the strip
};

struct SeedGrid {
    int n_re = 8;
    int n_im = 0;  // 0: spacing of about π/8 along the imaginary axis
};

/// Zeros of ℓ inside the strip, from the numerator polynomial of the rational ℓ.
std::vector<cplx> z_ell_find(const MemoryKernel& k, const Strip& strip);

/// Zeros of χ in the strip by grid scan and damped Newton.
RootList sigma_find(const MemoryKernel& k, const Strip& strip, SeedGrid seeds = {});

struct ConsistencyReport {
    std::vector<double> s;
    std::vector<double> norm;
    std::vector<double> inverse_distance;  // 1/dist(is, roots)
    std::vector<double> violations;        // s values where norm < (1 − tol)/dist
    bool ok() const { return violations.empty(); }
};

/// ‖R(is, A_h)‖ ≥ (1 − tol) / dist(is, roots ∪ Z_ℓ) for each sampled s.
ConsistencyReport resolvent_spectrum_consistency(const RootList& roots, const Operator& op,
                                                 const std::vector<double>& s_samples, double tol,
                                                 const ResolventOptions& opts = {});

}  // namespace cgw
