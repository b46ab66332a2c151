#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "lcm/errors.hpp"

namespace lcm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenvalues below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline bool isSymmetric(const Matrix& a, double tol = 0.0) {
  if (a.rows() != a.cols()) return false;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Inverse of a symmetric positive-definite matrix; the result is exactly symmetric.
inline Matrix spdInverse(const Matrix& a, const std::string& what = "matrix") {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError(what + " must be square and non-empty");
  }
  if (!isSymmetric(a, 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()))) {
    throw NotPositiveDefiniteError(what + " is not symmetric", 0);
  }
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError(what + " is not positive definite", 0);
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (!(llt.matrixL()(i, i) > 0.0)) {
      throw NotPositiveDefiniteError(what + " is not positive definite", 0);
    }
  }
  return symmetrize(llt.solve(Matrix::Identity(a.rows(), a.cols())));
}

inline double logDetSpd(const Matrix& a, const std::string& what = "matrix") {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError(what + " is not positive definite", 0);
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

/// Moore-Penrose inverse of a symmetric matrix via its eigen-decomposition.
inline Matrix pseudoInverseSymmetric(const Matrix& a, double relTol = kRankTolerance) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a));
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = relTol * lambda.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) > cutoff) inv(i) = 1.0 / lambda(i);
  }
  return symmetrize(eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose());
}

struct PseudoDeterminant {
  double logValue = 0.0;
  int rank = 0;
};

/// Sum of log-eigenvalues above the relative rank tolerance.
inline PseudoDeterminant logPseudoDeterminant(const Matrix& a, double relTol = kRankTolerance) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a), Eigen::EigenvaluesOnly);
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = relTol * lambda.cwiseAbs().maxCoeff();
  PseudoDeterminant out;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff) {
      out.logValue += std::log(lambda(i));
      ++out.rank;
    }
  }
  return out;
}

inline double spectralRadius(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(a, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

/// Solves X = A X A' + C by vectorization; intended for small state dimensions.
inline Matrix solveDiscreteLyapunov(const Matrix& a, const Matrix& c) {
  const Eigen::Index n = a.rows();
  const Eigen::Index n2 = n * n;
  Matrix system = Matrix::Identity(n2, n2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // Kronecker product A (x) A, column-major vec convention.
      system.block(i * n, j * n, n, n) -= a(i, j) * a;
    }
  }
  Eigen::Map<const Vector> rhs(c.data(), n2);
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw NumericError("Lyapunov system is singular");
  Vector x = lu.solve(Vector(rhs));
  Matrix out = Eigen::Map<Matrix>(x.data(), n, n);
  return symmetrize(out);
}

/// First block row [M_1 ... M_p], identity on the block sub-diagonal.
inline Matrix companionMatrix(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) return Matrix();
  const Eigen::Index m = blocks.front().rows();
  const Eigen::Index p = static_cast<Eigen::Index>(blocks.size());
  Matrix out = Matrix::Zero(m * p, m * p);
  for (Eigen::Index h = 0; h < p; ++h) out.block(0, h * m, m, m) = blocks[h];
  if (p > 1) out.block(m, 0, m * (p - 1), m * (p - 1)).setIdentity();
  return out;
}

}  // namespace lcm
