#include "cgw/symbols.hpp"

#include <limits>
#include <string>

namespace cgw {

namespace {

void check_strip(const MemoryKernel& k, cplx lambda, double factor, const char* who) {
    if (!(lambda.real() > -factor * k.delta()))
        throw DomainError(std::string(who) + ": Re lambda outside the admissible half-plane");
    for (const auto& m : k.modes())
        if (std::abs(lambda + m.b) == 0.0) throw DomainError(std::string(who) + ": pole of ell");
}

}  // namespace

cplx entire_c(cplx z) {
    cplx c, h;
    detail::entire_ch(z, c, h);
    return c;
}

cplx entire_h(cplx z) {
    cplx c, h;
    detail::entire_ch(z, c, h);
    return h;
}

cplx entire_c_closed(cplx z) { return std::cosh(std::sqrt(z)); }

cplx entire_h_closed(cplx z) {
    const cplx r = std::sqrt(z);
    return std::sinh(r) / r;
}

cplx entire_c_series(cplx z) {
    cplx t(1), acc(1);
    for (int n = 1; n < 60; ++n) {
        t *= z / double((2 * n - 1) * (2 * n));
        acc += t;
    }
    return acc;
}

cplx entire_h_series(cplx z) {
    cplx t(1), acc(1);
    for (int n = 1; n < 60; ++n) {
        t *= z / double((2 * n) * (2 * n + 1));
        acc += t;
    }
    return acc;
}

cplx ell(const MemoryKernel& k, cplx lambda) {
    check_strip(k, lambda, 1.0, "ell");
    return detail::ell_rational(k, lambda);
}

cplx p1(cplx lambda) {
    const cplx sh = std::sinh(lambda);
    if (std::abs(sh) < 1e-14 * std::cosh(std::abs(lambda.real())))
        throw DomainError("p1: pole of coth");
    return std::cosh(lambda) / sh;
}

cplx p2(const MemoryKernel& k, cplx lambda) {
    const cplx l = ell(k, lambda);
    if (std::abs(l) == 0.0) throw DomainError("p2: ell(lambda) = 0");
    cplx c, h;
    detail::entire_ch(lambda / l, c, h);
    if (std::abs(c) == 0.0) throw DomainError("p2: pole, c(lambda/ell) = 0");
    return h / (l * c);
}

cplx chi(const MemoryKernel& k, cplx lambda) {
    check_strip(k, lambda, 0.5, "chi");
    return detail::chi_impl(k, lambda);
}

std::complex<long double> chi_ld(const MemoryKernel& k, std::complex<long double> lambda) {
    return detail::chi_impl(k, lambda);
}

SymbolValue evaluate(const MemoryKernel& k, cplx lambda) {
    SymbolValue v;
    v.lambda = lambda;
    v.ell = ell(k, lambda);
    try {
        v.p1 = p1(lambda);
    } catch (const DomainError&) {
        v.p1.reset();
    }
    v.p2 = p2(k, lambda);
    v.chi = detail::chi_impl(k, lambda);
    return v;
}

double re_p2_floor(const MemoryKernel& k, double s_max, int n_samples) {
    if (!(s_max > 0.0) || n_samples < 2) throw ConfigError("re_p2_floor: need s_max > 0, n >= 2");
    double floor = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_samples; ++j) {
        const double s = -s_max + 2.0 * s_max * j / (n_samples - 1);
        const double re = p2(k, cplx(0.0, s)).real();
        if (!(re > 0.0))
            throw PropertyViolation("Re p2(is) <= 0 at s = " + std::to_string(s));
        floor = std::min(floor, (1.0 + std::sqrt(std::abs(s))) * re);
    }
    return floor;
}

}  // namespace cgw
