#include "cgw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgw/error.hpp"

namespace cgw {

namespace {

void validate_modes(const std::vector<Mode>& modes) {
    if (modes.empty()) throw ConfigError("kernel: empty mode list");
    for (const auto& m : modes) {
        if (!(m.a > 0.0) || !(m.b > 0.0) || !std::isfinite(m.a) || !std::isfinite(m.b))
            throw ConfigError("kernel: modes need a > 0 and b > 0");
    }
}

}  // namespace

MemoryKernel::MemoryKernel(std::vector<Mode> modes) : modes_(std::move(modes)) {
    validate_modes(modes_);
}

double MemoryKernel::mu(double s) const {
    if (s < 0.0) throw DomainError("mu: s must be non-negative");
    double acc = 0.0;
    for (const auto& m : modes_) acc += m.a * std::exp(-m.b * s);
    return acc;
}

double MemoryKernel::g(double s) const {
    if (s < 0.0) throw DomainError("g: s must be non-negative");
    double acc = 0.0;
    for (const auto& m : modes_) acc += m.a / m.b * std::exp(-m.b * s);
    return acc;
}

double MemoryKernel::mu_integral(double s0, double s1) const {
    double acc = 0.0;
    // e^{-b s0} - e^{-b s1} = e^{-b s0} (1 - e^{-b (s1-s0)}), expm1 keeps small cells accurate
    for (const auto& m : modes_)
        acc += m.a / m.b * std::exp(-m.b * s0) * -std::expm1(-m.b * (s1 - s0));
    return acc;
}

double MemoryKernel::delta() const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& m : modes_) d = std::min(d, m.b);
    return d;
}

double MemoryKernel::kappa() const {
    double k = 0.0;
    for (const auto& m : modes_) k += m.a / m.b;
    return k;
}

KernelReport MemoryKernel::check() const {
    KernelReport r;
    for (const auto& m : modes_) r.mass_g += m.a / (m.b * m.b);
    r.kappa = kappa();
    r.delta = delta();
    r.theta = 1.0 / r.delta;
    r.valid = std::abs(r.mass_g - 1.0) <= kMassTol;
    return r;
}

KernelReport check(const MemoryKernel& k) { return k.check(); }

MemoryKernel normalize(std::vector<Mode> modes) {
    validate_modes(modes);
    double mass = 0.0;
    for (const auto& m : modes) mass += m.a / (m.b * m.b);
    for (auto& m : modes) m.a /= mass;
    return MemoryKernel(std::move(modes));
}

}  // namespace cgw
