#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "cgw/error.hpp"
#include "cgw/spectrum.hpp"
#include "cgw/symbols.hpp"

using namespace cgw;

namespace {

const MemoryKernel k11({{1.0, 1.0}});

// χ/√(λ/ℓ), written with even functions of √z only, so no branch cuts.
cplx chi_reduced(const MemoryKernel& k, cplx lam) {
    cplx l = 1.0;
    for (const auto& m : k.modes()) l += m.a / (m.b * (m.b + lam));
    const cplx z = lam / l, r = std::sqrt(z);
    const cplx h = std::abs(r) < 1e-8 ? cplx(1.0) : std::sinh(r) / r;
    return l * std::sinh(lam) * std::cosh(r) + std::cosh(lam) * h;
}

// Argument principle on the rectangle boundary.
int winding_number(const MemoryKernel& k, double re0, double re1, double im0, double im1, int n_side) {
    const cplx corners[5] = {{re0, im0}, {re1, im0}, {re1, im1}, {re0, im1}, {re0, im0}};
    double total = 0.0;
    cplx prev = chi_reduced(k, corners[0]);
    for (int e = 0; e < 4; ++e)
        for (int i = 1; i <= n_side; ++i) {
            const cplx z = corners[e] + (corners[e + 1] - corners[e]) * (double(i) / n_side);
            const cplx f = chi_reduced(k, z);
            total += std::arg(f / prev);
            prev = f;
        }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace

TEST_CASE("Z_ell: the zero of ell is -2 and lies outside the default strip") {
    Strip wide = Strip::inside(k11, -10.0, 10.0);
    wide.re_min = -3.0;
    const auto z = z_ell_find(k11, wide);
    REQUIRE(z.size() == 1);
    CHECK(std::abs(z[0] - cplx(-2.0, 0.0)) < 1e-12);
    CHECK(z_ell_find(k11, Strip::inside(k11, -10.0, 10.0)).empty());
}

TEST_CASE("Z_ell for two modes: roots of the numerator polynomial") {
    const MemoryKernel k = normalize({{1.0, 1.0}, {1.0, 4.0}});
    Strip wide{-50.0, 1.0, -50.0, 50.0};
    const auto z = z_ell_find(k, wide);
    CHECK(z.size() == 2);
    for (const cplx r : z) CHECK(std::abs(detail::ell_rational(k, r)) < 1e-10);
}

TEST_CASE("sigma roots: residual, sign, exclusion of zero") {
    const RootList r = sigma_find(k11, Strip::inside(k11, 0.5, 60.0));
    REQUIRE(r.sigma_roots.size() > 10);
    for (std::size_t i = 0; i < r.sigma_roots.size(); ++i) {
        const cplx z = r.sigma_roots[i];
        CHECK(z.real() < 0.0);
        CHECK(z.real() > -0.49);
        CHECK(std::abs(z) > 1e-8);
        CHECK(r.sigma_residuals[i] < 1e-9);
        CHECK(std::abs(chi_reduced(k11, z)) < 1e-8 * std::abs(std::cosh(z)));
        if (i > 0) CHECK(z.imag() >= r.sigma_roots[i - 1].imag());
    }
}

TEST_CASE("root count agrees with the argument principle") {
    const double re0 = -0.49, re1 = 0.0;
    for (const auto& [im0, im1] : {std::pair{0.5, 20.0}, std::pair{20.0, 60.0}}) {
        const RootList r = sigma_find(k11, Strip{re0, re1, im0, im1});
        CHECK(static_cast<int>(r.sigma_roots.size()) == winding_number(k11, re0, re1, im0, im1, 20000));
    }
}

TEST_CASE("conjugate symmetry of the root set") {
    const RootList up = sigma_find(k11, Strip::inside(k11, 0.5, 40.0));
    const RootList down = sigma_find(k11, Strip::inside(k11, -40.0, -0.5));
    REQUIRE(up.sigma_roots.size() == down.sigma_roots.size());
    for (const cplx z : up.sigma_roots) {
        double best = 1e300;
        for (const cplx w : down.sigma_roots) best = std::min(best, std::abs(w - std::conj(z)));
        CHECK(best < 1e-9);
    }
}

TEST_CASE("root set is stable under seed refinement") {
    const Strip s = Strip::inside(k11, 0.5, 50.0);
    const RootList a = sigma_find(k11, s);
    const RootList b = sigma_find(k11, s, SeedGrid{16, 800});
    REQUIRE(a.sigma_roots.size() == b.sigma_roots.size());
    for (std::size_t i = 0; i < a.sigma_roots.size(); ++i)
        CHECK(std::abs(a.sigma_roots[i] - b.sigma_roots[i]) < 1e-9);
}

TEST_CASE("strip must stay inside the half-plane where chi is defined") {
    CHECK_THROWS_AS(sigma_find(k11, Strip{-0.6, 0.0, 0.5, 10.0}), ConfigError);
}

TEST_CASE("resolvent norm dominates the inverse distance to the roots") {
    const Generator gen = assemble(k11, GridSpec{256, 64, HistoryParams{}});
    const RootList r = sigma_find(k11, Strip::inside(k11, 0.5, 20.0));
    std::vector<double> s;
    for (int i = 0; i < 12; ++i) s.push_back(1.0 + 1.5 * i);
    const ConsistencyReport rep = resolvent_spectrum_consistency(r, gen, s, 0.05);
    CHECK(rep.ok());
    CHECK(rep.s.size() == s.size());
}
