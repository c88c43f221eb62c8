#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <vector>

#include "nfp/errors.hpp"
#include "nfp/tensor.hpp"

namespace nfp {

// Eigen usage is confined to this header: symmetric eigensolves for
// condition numbers and the Shampoo factor roots. Tensors are row-major.
using EigenRowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline EigenRowMat to_eigen(const Tensor& t) {
    if (t.shape().size() != 2) throw ConfigError("to_eigen: expected a rank-2 tensor");
    return Eigen::Map<const EigenRowMat>(t.data(), t.rows(), t.cols());
}

inline Tensor from_eigen(const EigenRowMat& m) {
    Tensor t({m.rows(), m.cols()});
    Eigen::Map<EigenRowMat>(t.data(), m.rows(), m.cols()) = m;
    return t;
}

// Eigenvalues of a symmetric matrix, ascending.
inline std::vector<double> sym_eigenvalues(const Tensor& h) {
    if (h.rows() != h.cols()) throw ConfigError("sym_eigenvalues: matrix must be square");
    if (!h.all_finite()) throw NumericError("sym_eigenvalues: non-finite input");
    Eigen::SelfAdjointEigenSolver<EigenRowMat> solver(to_eigen(h), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("symmetric eigendecomposition failed to converge");
    std::vector<double> out(static_cast<std::size_t>(h.rows()));
    for (std::int64_t i = 0; i < h.rows(); ++i)
        out[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
    return out;
}

// (M + eps I)^{-1/4} for symmetric positive semidefinite M, by
// eigendecomposition with eigenvalues clamped below eps to eps.
inline Tensor inv_fourth_root(const Tensor& m, double eps) {
    if (m.rows() != m.cols()) throw ConfigError("inv_fourth_root: matrix must be square");
    if (!(eps > 0.0)) throw ConfigError("inv_fourth_root: eps must be > 0");
    if (!m.all_finite()) throw NumericError("inv_fourth_root: non-finite factor matrix");
    Eigen::SelfAdjointEigenSolver<EigenRowMat> solver(to_eigen(m));
    if (solver.info() != Eigen::Success)
        throw NumericError("symmetric eigendecomposition failed to converge");
    Eigen::VectorXd lam = solver.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        lam[i] = std::pow(std::max(lam[i] + eps, eps), -0.25);
    const EigenRowMat out =
        solver.eigenvectors() * lam.asDiagonal() * solver.eigenvectors().transpose();
    return from_eigen(out);
}

}  // namespace nfp
