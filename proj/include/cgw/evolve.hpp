#pragma once

#include <Eigen/SparseLU>
#include <utility>
#include <vector>

#include "cgw/operator.hpp"
#include "cgw/shifted.hpp"

namespace cgw {

/// Implicit midpoint (I − dt/2 A) z⁺ = (I + dt/2 A) z with a cached factorization.
class Stepper {
public:
    Stepper(const Operator& op, double dt);
    Vec step(const Vec& z) const;
    double dt() const { return dt_; }

private:
    double dt_;
    SpMat plus_;
    ShiftedSolver<double> solver_;  // 2/dt − A
};

Vec step_cn(const Operator& op, const Vec& z, double dt);

enum class DatumTag { inverse_applied, custom };

struct DecayOptions {
    double t_first = 1.0;  // first checkpoint after t = 0
    double ratio = 1.2;    // geometric checkpoint ratio
    int window = 8;        // checkpoints per sliding slope window
};

struct DecayTrace {
    std::vector<double> times;     // times[0] = 0
    std::vector<double> energies;  // ‖z(t)‖_W
    std::vector<double> slope_times;
    std::vector<double> slopes;    // sliding-window log-log slopes
    DatumTag tag = DatumTag::custom;
    double max_increase = 0.0;     // max over steps of (‖z⁺‖ − ‖z‖)/‖z‖
    int steps = 0;
};

DecayTrace evolve_energy(const Operator& op, const Vec& z0, double t_max, double dt,
                         const DecayOptions& opts = {});

/// Least-squares log-log slope over checkpoints with t in [t_lo, t_hi].
double window_slope(const DecayTrace& tr, double t_lo, double t_hi);

enum class DatumKind {
    w_white,  // standard normal in energy coordinates: r = G^{-1} ξ with W = GᵀG
    raw       // standard normal in the raw coordinates
};

Vec random_state(const Operator& op, unsigned seed, DatumKind kind = DatumKind::w_white);
/// A^{-1} r, normalized to unit W-norm.
Vec inverse_applied(const Operator& op, const Vec& r);

/// (t, ‖S_h(t) A_h^{-1}‖_W) with S_h(t) the implicit-midpoint propagator at step dt.
/// Dense; dimension at most max_dim.
std::vector<std::pair<double, double>> semi_uniform_norm(const Operator& op, const std::vector<double>& times,
                                                         double dt, int max_dim = 2000);

}  // namespace cgw
