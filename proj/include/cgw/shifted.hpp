#pragma once

#include <Eigen/SparseLU>
#include <complex>
#include <memory>
#include <vector>

#include "cgw/operator.hpp"

namespace cgw {

/// Solves (λ − A) z = f and (λ − A)ᴴ y = g.
/// Operators carrying a HistoryStructure are solved by eliminating the memory
/// recursion and the displacement, leaving a tridiagonal system for θ.
/// Anything else, or λ = 0, falls back to a sparse LU of λ − A.
template <class Scalar>
class ShiftedSolver {
public:
    using VecS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using SpS = Eigen::SparseMatrix<Scalar>;

    ShiftedSolver(const Operator& op, Scalar lambda);
    VecS solve(const VecS& f) const;
    VecS solve_adjoint(const VecS& g) const;
    bool structured() const { return hs_ != nullptr; }

private:
    void factor_general(const Operator& op);
    void factor_structured();
    Scalar conj(Scalar x) const;

    Scalar lambda_;
    std::shared_ptr<const HistoryStructure> hs_;
    // general path
    mutable Eigen::SparseLU<SpS> lu_;
    // structured path
    std::vector<Scalar> c_;         // forward memory response to a unit θ_w
    std::vector<Scalar> d_;         // backward (adjoint) response
    Scalar ell_ = Scalar(1);
    mutable Eigen::SparseLU<SpS> tri_;  // θ system at λ
};

extern template class ShiftedSolver<double>;
extern template class ShiftedSolver<std::complex<double>>;

}  // namespace cgw
