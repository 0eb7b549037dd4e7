#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "cgw/kernel.hpp"

namespace cgw {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

struct HistoryParams {
    double ratio = 1.15;
    std::optional<double> s1;  // default 0.01/δ
    double tail_tol = 1e-8;
    std::optional<int> J;      // if set, ratio is derived from J
};

/// s[0] = 0 < s[1] < ... < s[J]; weights[k] = ∫_{s[k]}^{s[k+1]} μ.
struct HistoryGrid {
    std::vector<double> s;
    std::vector<double> weights;
    double ratio = 0.0;
    int J() const { return static_cast<int>(weights.size()); }
    double delta(int k) const { return s[k + 1] - s[k]; }
};

HistoryGrid make_history_grid(const MemoryKernel& k, const HistoryParams& p);

/// Auxiliary ζ_k variables, exact for exponential sums. Trajectories only.
struct ModeReduction {};

/// n_u cells on (−1,0) and n_w cells on (0,1). Unknowns: u at the n_u wave nodes
/// right of −1, one shared velocity/temperature θ on all nodes of (−1,1), memory on
/// the n_w heat nodes left of 1.
struct GridSpec {
    int n_u = 128;
    int n_w = 128;
    std::variant<HistoryParams, ModeReduction> memory = HistoryParams{};
};

struct Layout {
    int n_u = 0, n_w = 0, n_mem = 0;  // n_mem: J (history) or K (modes)
    int n_theta() const { return n_u + n_w - 1; }
    int off_theta() const { return n_u; }
    int off_mem() const { return n_u + n_theta(); }
    int dim() const { return off_mem() + n_mem * n_w; }
    // θ index of heat node j (j = 0 is the interface)
    int heat(int j) const { return off_theta() + n_u - 1 + j; }
    int interface() const { return heat(0); }
    int mem(int k, int j) const { return off_mem() + k * n_w + j; }
    double h_u() const { return 1.0 / n_u; }
    double h_w() const { return 1.0 / n_w; }
};

/// Block structure of a generator with history-grid memory, used by fast shifted solves.
/// Unknowns [u (n_u) | θ | η_1..η_J (n_w each)]; n_u = 0 for the heat–memory block.
struct HistoryStructure {
    int n_u = 0;
    int n_w = 0;
    double h_u = 0.0;
    double h_w = 0.0;
    std::vector<double> theta_mass;
    std::vector<double> weights;
    std::vector<double> deltas;
    int J() const { return static_cast<int>(weights.size()); }
    int n_theta() const { return static_cast<int>(theta_mass.size()); }
    int heat0() const { return n_u > 0 ? n_u - 1 : 0; }  // θ index of heat node 0
};

/// A pair (A, W): ż = A z with energy ‖z‖² = zᵀ W z.
struct Operator {
    SpMat A;
    SpMat W;
    std::shared_ptr<const HistoryStructure> structure;  // optional
    int dim() const { return static_cast<int>(A.rows()); }
};

struct Generator : Operator {
    MemoryKernel kernel;
    GridSpec grid;
    Layout layout;
    std::optional<HistoryGrid> history;  // empty for ModeReduction

    Generator(const MemoryKernel& k, const GridSpec& g) : kernel(k), grid(g) {}
};

/// Discrete generator and its Gram matrix. Checks W > 0 and dissipativity
/// on a few random states; throws NumericalError / PropertyViolation.
Generator assemble(const MemoryKernel& k, const GridSpec& grid);

/// Wave part with the coupling removed: u(−1)=0, v(0)=0.
/// Unknowns: u at the n_u wave nodes, v at the n_u−1 interior wave nodes.
Operator decoupled_wave_block(const Generator& gen);

/// Heat–memory part with φ'(0)=0. Unknowns: w at the n_w heat nodes, η.
Operator a2_block(const Generator& gen);

/// State with separate interface traces v(0) and w(0), as produced by sampling
/// functions on each subdomain.
struct RawState {
    Vec u;    // n_u
    Vec v;    // n_u, last entry is v(0)
    Vec w;    // n_w, first entry is w(0)
    Vec mem;  // n_mem * n_w
};

/// W-nearest state satisfying v(0)=w(0) and the one-sided second-order flux
/// condition u'(0)=φ'(0). Returned in generator layout.
Vec domain_project(const Generator& gen, const RawState& raw);
RawState to_raw(const Generator& gen, const Vec& z);
/// Residuals of the two interface constraints for a raw state.
Eigen::Vector2d interface_residuals(const Generator& gen, const RawState& raw);

Eigen::MatrixXd to_dense(const SpMat& m);
/// One "row col re im" line per stored entry, preceded by a '#' header.
void export_triplets(const SpMat& m, std::ostream& os, const char* name);

double w_inner(const Operator& op, const Vec& x, const Vec& y);
double w_norm(const Operator& op, const Vec& x);
double w_norm(const Operator& op, const CVec& x);

/// max Re⟨Az,z⟩_W / ‖z‖²_W over n random states.
double dissipativity_defect(const Operator& op, int n_samples, unsigned seed);

}  // namespace cgw
