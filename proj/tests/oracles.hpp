#pragma once

// Independent reference computations used by the tests.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Gauss–Legendre nodes and weights on [-1, 1] by Newton on P_n.
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) : x(n), w(n) {
        for (int i = 0; i < n; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

// Composite Gauss–Legendre on [a, b] with `panels` equal panels.
template <class F>
auto integrate(F f, double a, double b, int panels, int order = 10) {
    static thread_local GaussLegendre gl(order);
    if (static_cast<int>(gl.x.size()) != order) gl = GaussLegendre(order);
    using R = decltype(f(a));
    R acc{};
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < gl.x.size(); ++i) acc += (0.5 * h * gl.w[i]) * f(c + 0.5 * h * gl.x[i]);
    }
    return acc;
}

// ℓ(λ) = 1 + ∫_0^∞ g(s) e^{-λs} ds by quadrature on [0, S] (Re λ ≥ 0, tail below e^{-δS}).
template <class G>
std::complex<double> ell_quadrature(G g, std::complex<double> lam, double S, int panels) {
    return 1.0 + integrate([&](double s) { return g(s) * std::exp(-lam * s); }, 0.0, S, panels);
}

}  // namespace oracle
