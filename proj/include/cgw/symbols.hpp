#pragma once

#include <cmath>
#include <complex>
#include <optional>

#include "cgw/error.hpp"
#include "cgw/kernel.hpp"

namespace cgw {

using cplx = std::complex<double>;

struct SymbolValue {
    cplx lambda;
    cplx ell;
    std::optional<cplx> p1;  // empty at poles of coth
    cplx p2;
    cplx chi;
};

namespace detail {

// ℓ(λ) = 1 + Σ a_k / (b_k (b_k + λ)), the rational continuation (no domain check).
template <class T>
std::complex<T> ell_rational(const MemoryKernel& k, std::complex<T> lam) {
    std::complex<T> acc(1);
    for (const auto& m : k.modes()) {
        const T a = static_cast<T>(m.a), b = static_cast<T>(m.b);
        acc += a / (b * (b + lam));
    }
    return acc;
}

// c(z) = cosh √z and h(z) = sinh √z / √z, both entire.
template <class T>
void entire_ch(std::complex<T> z, std::complex<T>& c, std::complex<T>& h) {
    if (std::abs(z) < T(0.25)) {
        // c = Σ z^n/(2n)!, h = Σ z^n/(2n+1)!
        std::complex<T> tc(1), th(1);
        c = tc;
        h = th;
        for (int n = 1; n < 40; ++n) {
            tc *= z / T((2 * n - 1) * (2 * n));
            th *= z / T((2 * n) * (2 * n + 1));
            c += tc;
            h += th;
            if (std::abs(tc) < std::numeric_limits<T>::epsilon() * T(1e-3)) break;
        }
        return;
    }
    const std::complex<T> r = std::sqrt(z);
    c = std::cosh(r);
    h = std::sinh(r) / r;
}

template <class T>
std::complex<T> chi_impl(const MemoryKernel& k, std::complex<T> lam) {
    const std::complex<T> l = ell_rational(k, lam);
    if (std::abs(l) == T(0)) throw DomainError("chi: ell(lambda) = 0");
    const std::complex<T> z = lam / l;
    std::complex<T> c, h;
    entire_ch(z, c, h);
    return std::sqrt(l * lam) * std::sinh(lam) * c + std::cosh(lam) * std::sqrt(z) * h;
}

}  // namespace detail

/// Series path (|z| < 1/4) and closed-form path of c, h, exposed for cross-checks.
cplx entire_c(cplx z);
cplx entire_h(cplx z);
cplx entire_c_closed(cplx z);
cplx entire_h_closed(cplx z);
cplx entire_c_series(cplx z);
cplx entire_h_series(cplx z);

/// ℓ(λ); requires Re λ > −δ and λ ≠ −b_k.
cplx ell(const MemoryKernel& k, cplx lambda);
/// coth λ; throws DomainError at λ ∈ iπℤ.
cplx p1(cplx lambda);
/// h(λ/ℓ) / (ℓ c(λ/ℓ)).
cplx p2(const MemoryKernel& k, cplx lambda);
/// √(ℓλ) sinh λ c(λ/ℓ) + cosh λ √(λ/ℓ) h(λ/ℓ); requires Re λ > −δ/2.
cplx chi(const MemoryKernel& k, cplx lambda);
/// χ in extended precision, no strip check. Used by root polishing.
std::complex<long double> chi_ld(const MemoryKernel& k, std::complex<long double> lambda);

SymbolValue evaluate(const MemoryKernel& k, cplx lambda);

/// min over s ∈ [−s_max, s_max] (n uniform samples) of (1+√|s|) Re p2(is).
/// Throws PropertyViolation if some sample has Re p2 ≤ 0.
double re_p2_floor(const MemoryKernel& k, double s_max, int n_samples);

}  // namespace cgw
