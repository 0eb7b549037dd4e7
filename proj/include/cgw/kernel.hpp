#pragma once

#include <vector>

namespace cgw {

struct Mode {
    double a;  // amplitude
    double b;  // decay rate
};

struct KernelReport {
    double mass_g = 0.0;
    double kappa = 0.0;
    double delta = 0.0;
    double theta = 0.0;
    bool valid = false;
};

/// μ(s) = Σ a_k e^{-b_k s},  g(s) = ∫_s^∞ μ = Σ (a_k/b_k) e^{-b_k s}.
class MemoryKernel {
public:
    static constexpr double kMassTol = 1e-12;

    explicit MemoryKernel(std::vector<Mode> modes);

    const std::vector<Mode>& modes() const { return modes_; }

    double mu(double s) const;
    double g(double s) const;
    // ∫_{s0}^{s1} μ, closed form
    double mu_integral(double s0, double s1) const;
    // ∫_s^∞ μ = g(s)
    double tail_mass(double s) const { return g(s); }

    KernelReport check() const;
    double delta() const;
    double kappa() const;

private:
    std::vector<Mode> modes_;
};

KernelReport check(const MemoryKernel& k);

/// Rescale amplitudes so that Σ a_k/b_k² = 1.
MemoryKernel normalize(std::vector<Mode> modes);

}  // namespace cgw
