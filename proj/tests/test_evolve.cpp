#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "cgw/error.hpp"
#include "cgw/evolve.hpp"
#include "cgw/resolvent.hpp"

using namespace cgw;

namespace {

const MemoryKernel k11({{1.0, 1.0}});

// exp(tA) z by eigendecomposition of the dense generator.
Vec exact_flow(const Operator& op, const Vec& z, double t) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_dense(op.A));
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::VectorXcd c = V.partialPivLu().solve(z.cast<cplx>());
    const Eigen::VectorXcd e = (es.eigenvalues() * t).array().exp();
    return (V * (e.array() * c.array()).matrix()).real();
}

}  // namespace

TEST_CASE("implicit midpoint conserves energy on the decoupled wave block") {
    const Generator g = assemble(k11, GridSpec{64, 16, HistoryParams{}});
    const Operator w = decoupled_wave_block(g);
    Vec z = random_state(w, 4);
    const double e0 = w_norm(w, z);
    const Stepper st(w, 0.01);
    for (int i = 0; i < 1000; ++i) z = st.step(z);
    CHECK(w_norm(w, z) == doctest::Approx(e0).epsilon(1e-11));
}

TEST_CASE("energy never increases for the coupled generator") {
    const Generator g = assemble(k11, GridSpec{32, 32, HistoryParams{1.15, std::nullopt, 1e-8, 16}});
    const DecayTrace tr = evolve_energy(g, random_state(g, 2), 20.0, 0.01);
    CHECK(tr.steps == 2000);
    CHECK(tr.max_increase <= 1e-12);
    for (std::size_t i = 1; i < tr.energies.size(); ++i) CHECK(tr.energies[i] <= tr.energies[i - 1] * (1 + 1e-12));
}

TEST_CASE("second order in dt against the exact flow") {
    const Generator g = assemble(k11, GridSpec{12, 8, HistoryParams{1.15, std::nullopt, 1e-8, 6}});
    const Vec z0 = inverse_applied(g, random_state(g, 8));
    const Vec ref = exact_flow(g, z0, 1.0);
    std::vector<double> err;
    for (double dt : {0.02, 0.01, 0.005}) {
        const Stepper st(g, dt);
        Vec z = z0;
        for (long i = 0, n = std::lround(1.0 / dt); i < n; ++i) z = st.step(z);
        err.push_back(w_norm(g, Vec(z - ref)));
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));
    CHECK((step_cn(g, z0, 0.01) - Stepper(g, 0.01).step(z0)).norm() == 0.0);
}

TEST_CASE("heat-memory block decays exponentially") {
    const Generator g = assemble(k11, GridSpec{16, 32, HistoryParams{1.15, std::nullopt, 1e-8, 16}});
    const Operator a2 = a2_block(g);
    const DecayTrace tr = evolve_energy(a2, random_state(a2, 6), 30.0, 0.01, DecayOptions{1.0, 1.2, 4});
    // log E is close to linear in t once the fast transients are gone
    std::vector<double> t, y;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        if (tr.times[i] >= 5.0) {
            t.push_back(tr.times[i]);
            y.push_back(std::log(tr.energies[i]));
        }
    const double n = t.size();
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double rate = (n * sty - st * sy) / (n * stt - st * st), icpt = (sy - rate * st) / n;
    CHECK(rate < -0.05);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(y[i] - (icpt + rate * t[i])) < 0.3);
}

TEST_CASE("checkpoints and window slopes") {
    DecayTrace tr;
    for (double t : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        tr.times.push_back(t);
        tr.energies.push_back(t == 0.0 ? 1.0 : 3.0 * std::pow(t, -2.0));
    }
    CHECK(window_slope(tr, 2.0, 32.0) == doctest::Approx(-2.0).epsilon(1e-12));

    const Generator g = assemble(k11, GridSpec{16, 16, HistoryParams{1.15, std::nullopt, 1e-8, 8}});
    const DecayTrace d = evolve_energy(g, random_state(g, 1), 10.0, 0.01);
    CHECK(d.times.front() == 0.0);
    CHECK(d.times[1] == doctest::Approx(1.0));
    CHECK(d.times[2] == doctest::Approx(1.2));
    CHECK(d.slopes.size() + 7 == d.times.size() - 1);
    CHECK_THROWS_AS(evolve_energy(g, Vec::Zero(3), 1.0, 0.01), ConfigError);
    CHECK_THROWS_AS(Stepper(g, 0.0), ConfigError);
}

TEST_CASE("random data and the inverse-applied datum") {
    const Generator g = assemble(k11, GridSpec{16, 16, HistoryParams{1.15, std::nullopt, 1e-8, 8}});
    const Vec r = random_state(g, 3), r2 = random_state(g, 3);
    CHECK((r - r2).norm() == 0.0);
    // W-white: ‖r‖²_W is a chi-square with dim degrees of freedom
    CHECK(std::abs(w_norm(g, r) * w_norm(g, r) - g.dim()) < 5.0 * std::sqrt(2.0 * g.dim()));
    const Vec z = inverse_applied(g, r);
    CHECK(w_norm(g, z) == doctest::Approx(1.0));
    const Vec Az = g.A * z;
    CHECK((Az / Az.norm() - r / r.norm()).norm() < 1e-10);
}

TEST_CASE("semi-uniform norm: value at t = 0 and monotone decay") {
    const Generator g = assemble(k11, GridSpec{12, 12, HistoryParams{1.15, std::nullopt, 1e-8, 6}});
    const auto v = semi_uniform_norm(g, {0.0, 1.0, 2.0, 5.0}, 0.01);
    REQUIRE(v.size() == 4);
    // ‖A^{-1}‖_W = 1 / σ_min at λ = 0
    const double ainv = ResolventNorm(g).at(0.0).norm;
    CHECK(v[0].second == doctest::Approx(ainv).epsilon(1e-9));
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i].second <= v[i - 1].second * (1 + 1e-12));
    CHECK_THROWS_AS(semi_uniform_norm(g, {0.0}, 0.01, 10), ConfigError);
    CHECK_THROWS_AS(semi_uniform_norm(g, {1.0, 0.5}, 0.01), ConfigError);
}
