#pragma once

// Joint precision matrices of latent VAR(1), VAR(p) and VARMA(p,q) Gaussian
// processes, their block Cholesky factorization, and log-densities.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/linalg.hpp"

namespace lcm {

/// Default precision of the diffuse initial state, x_1 ~ N(0, I / kappa).
inline constexpr double kDefaultKappa = 0.01;
/// A process counts as stationary when its companion spectral radius is below 1 - margin.
inline constexpr double kStationarityMargin = 1e-8;

/// Transition matrices Phi_1..Phi_p of a VAR(p), all m x m.
class VarCoefficients {
 public:
  VarCoefficients() = default;
  explicit VarCoefficients(std::vector<Matrix> phis) : phis_(std::move(phis)) {
    if (phis_.empty()) throw DimensionError("VAR order must be at least 1");
    const auto m = phis_.front().rows();
    if (m < 1) throw DimensionError("VAR dimension must be at least 1");
    for (const auto& phi : phis_) {
      if (phi.rows() != m || phi.cols() != m) {
        throw DimensionError("VAR coefficient matrices must all be m x m");
      }
    }
  }

  int order() const { return static_cast<int>(phis_.size()); }
  int dim() const { return phis_.empty() ? 0 : static_cast<int>(phis_.front().rows()); }
  const std::vector<Matrix>& phis() const { return phis_; }
  const Matrix& operator[](int lag) const { return phis_.at(static_cast<std::size_t>(lag)); }

 private:
  std::vector<Matrix> phis_;
};

/// Phi(B) x_t = Theta(B) w_t with Phi(B) = I - sum Phi_h B^h and Theta(B) = I - sum Theta_h B^h.
class VarmaCoefficients {
 public:
  VarmaCoefficients(std::vector<Matrix> phis, std::vector<Matrix> thetas, Matrix sigmaW)
      : phis_(std::move(phis)), thetas_(std::move(thetas)), sigmaW_(std::move(sigmaW)) {
    if (phis_.empty() && thetas_.empty()) {
      throw DimensionError("VARMA needs p + q >= 1");
    }
    const auto m = sigmaW_.rows();
    if (m < 1 || sigmaW_.cols() != m) throw DimensionError("innovation covariance must be m x m");
    for (const auto* list : {&phis_, &thetas_}) {
      for (const auto& block : *list) {
        if (block.rows() != m || block.cols() != m) {
          throw DimensionError("VARMA coefficient blocks must all be m x m");
        }
      }
    }
    if (!isSymmetric(sigmaW_, 1e-12 * (1.0 + sigmaW_.cwiseAbs().maxCoeff()))) {
      throw NotPositiveDefiniteError("innovation covariance is not symmetric", 0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigmaW_, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
      throw NotPositiveDefiniteError("innovation covariance is not positive definite", 0);
    }
  }

  int p() const { return static_cast<int>(phis_.size()); }
  int q() const { return static_cast<int>(thetas_.size()); }
  int dim() const { return static_cast<int>(sigmaW_.rows()); }
  const std::vector<Matrix>& phis() const { return phis_; }
  const std::vector<Matrix>& thetas() const { return thetas_; }
  const Matrix& sigmaW() const { return sigmaW_; }

 private:
  std::vector<Matrix> phis_;
  std::vector<Matrix> thetas_;
  Matrix sigmaW_;
};

/// Symmetric block-tridiagonal matrix; stores diagonal and super-diagonal blocks only.
class BlockPrecision {
 public:
  BlockPrecision(std::vector<Matrix> diag, std::vector<Matrix> superDiag)
      : diag_(std::move(diag)), super_(std::move(superDiag)) {
    if (diag_.empty()) throw DimensionError("block precision needs at least one block");
    if (super_.size() + 1 != diag_.size()) {
      throw DimensionError("block precision needs numBlocks - 1 off-diagonal blocks");
    }
    const auto k = diag_.front().rows();
    for (const auto& b : diag_) {
      if (b.rows() != k || b.cols() != k) throw DimensionError("diagonal blocks must be k x k");
    }
    for (const auto& b : super_) {
      if (b.rows() != k || b.cols() != k) throw DimensionError("off-diagonal blocks must be k x k");
    }
  }

  int blockDim() const { return static_cast<int>(diag_.front().rows()); }
  int numBlocks() const { return static_cast<int>(diag_.size()); }
  int dim() const { return blockDim() * numBlocks(); }
  const Matrix& diagBlock(int t) const { return diag_.at(static_cast<std::size_t>(t)); }
  /// Block (t, t+1); block (t+1, t) is its transpose.
  const Matrix& offDiagBlock(int t) const { return super_.at(static_cast<std::size_t>(t)); }

  Matrix toDense() const {
    const int k = blockDim();
    Matrix out = Matrix::Zero(dim(), dim());
    for (int t = 0; t < numBlocks(); ++t) {
      out.block(t * k, t * k, k, k) = diag_[t];
      if (t + 1 < numBlocks()) {
        out.block(t * k, (t + 1) * k, k, k) = super_[t];
        out.block((t + 1) * k, t * k, k, k) = super_[t].transpose();
      }
    }
    return out;
  }

  /// Appends entries (full symmetric pattern) shifted by `offset`.
  void appendTriplets(std::vector<Eigen::Triplet<double>>& out, int offset = 0) const {
    const int k = blockDim();
    for (int t = 0; t < numBlocks(); ++t) {
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          out.emplace_back(offset + t * k + a, offset + t * k + b, diag_[t](a, b));
          if (t + 1 < numBlocks()) {
            out.emplace_back(offset + t * k + a, offset + (t + 1) * k + b, super_[t](a, b));
            out.emplace_back(offset + (t + 1) * k + b, offset + t * k + a, super_[t](a, b));
          }
        }
      }
    }
  }

  Vector multiply(const Vector& x) const {
    if (x.size() != dim()) throw DimensionError("vector length does not match precision");
    const int k = blockDim();
    Vector out = Vector::Zero(dim());
    for (int t = 0; t < numBlocks(); ++t) {
      out.segment(t * k, k) += diag_[t] * x.segment(t * k, k);
      if (t + 1 < numBlocks()) {
        out.segment(t * k, k) += super_[t] * x.segment((t + 1) * k, k);
        out.segment((t + 1) * k, k) += super_[t].transpose() * x.segment(t * k, k);
      }
    }
    return out;
  }

  double quadraticForm(const Vector& x) const { return x.dot(multiply(x)); }

 private:
  std::vector<Matrix> diag_;
  std::vector<Matrix> super_;
};

/// Companion (stacked) VAR(1) representation of a VAR(p).
struct CompanionForm {
  Matrix phiStar;    ///< pm x pm transition
  Matrix wStar;      ///< pm x pm innovation covariance, W in the top-left block
  Matrix wStarPlus;  ///< Moore-Penrose inverse of wStar
};

namespace detail {

// Shared block layout: [A + kappa I, B; B', A + C, B; ...; B', C] with
// A = F' P F, B = -F' P, C = P for transition F and innovation precision P.
inline BlockPrecision assembleMarkovPrecision(const Matrix& transition,
                                              const Matrix& innovationPrecision, int T,
                                              double kappa) {
  if (T < 2) throw DimensionError("need at least two time points");
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  const auto k = transition.rows();
  const Matrix a = symmetrize(transition.transpose() * innovationPrecision * transition);
  const Matrix b = -transition.transpose() * innovationPrecision;
  const Matrix& c = innovationPrecision;
  std::vector<Matrix> diag(static_cast<std::size_t>(T));
  diag[0] = a + kappa * Matrix::Identity(k, k);
  for (int t = 1; t + 1 < T; ++t) diag[t] = a + c;
  diag[T - 1] = c;
  std::vector<Matrix> super(static_cast<std::size_t>(T - 1), b);
  return BlockPrecision(std::move(diag), std::move(super));
}

}  // namespace detail

/// Precision of (x_1', ..., x_T')' for x_t = Phi x_{t-1} + w_t, w_t ~ N(0, W),
/// with diffuse start x_1 ~ N(0, I / kappa).
inline BlockPrecision buildVar1Precision(const Matrix& phi, const Matrix& w, int T,
                                         double kappa = kDefaultKappa) {
  if (phi.rows() != phi.cols() || w.rows() != phi.rows() || w.cols() != phi.cols()) {
    throw DimensionError("Phi and W must both be m x m");
  }
  if (T < 2) throw DimensionError("need at least two time points");
  const Matrix wInv = spdInverse(w, "state covariance W");
  return detail::assembleMarkovPrecision(phi, wInv, T, kappa);
}

inline CompanionForm buildCompanionForm(const VarCoefficients& coeffs, const Matrix& w) {
  const int m = coeffs.dim();
  const int p = coeffs.order();
  if (p < 1) throw DimensionError("VAR order must be at least 1");
  if (w.rows() != m || w.cols() != m) throw DimensionError("W must match the VAR dimension");
  CompanionForm out;
  out.phiStar = companionMatrix(coeffs.phis());
  out.wStar = Matrix::Zero(p * m, p * m);
  out.wStar.topLeftCorner(m, m) = w;
  // W is SPD, so the pseudo-inverse of blockdiag(W, 0) is blockdiag(W^-1, 0).
  out.wStarPlus = Matrix::Zero(p * m, p * m);
  out.wStarPlus.topLeftCorner(m, m) = spdInverse(w, "state covariance W");
  return out;
}

/// Companion-form precision over the stacked states (x*_1', ..., x*_T')'; positive
/// semi-definite for p > 1 because W* is singular.
inline BlockPrecision buildVarPPrecision(const VarCoefficients& coeffs, const Matrix& w, int T,
                                         double kappaStar = kDefaultKappa) {
  if (T < 2) throw DimensionError("need at least two time points");
  const CompanionForm cf = buildCompanionForm(coeffs, w);
  return detail::assembleMarkovPrecision(cf.phiStar, cf.wStarPlus, T, kappaStar);
}

/// Restricts a companion-form precision to the support of the stacked process.
///
/// The stacked vector repeats each x_s in up to p blocks. On the subspace where
/// those copies agree the companion density is the exact VAR(p) density of
/// z = (x_{2-p}, ..., x_0, x_1, ..., x_T), where (x_1, x_0, ..., x_{2-p}) = x*_1 is
/// the diffuse start. Returns U' Q* U for the 0/1 embedding U: z -> x*.
inline Eigen::SparseMatrix<double> restrictToSupport(const BlockPrecision& qStar, int m, int p) {
  if (qStar.blockDim() != m * p) throw DimensionError("block size must equal m * p");
  const int T = qStar.numBlocks();
  const int n = m * (T + p - 1);
  std::vector<Eigen::Triplet<double>> trips;
  auto zBlock = [p](int t, int h) { return t - h + p - 1; };
  auto addBlock = [&](const Matrix& block, int t1, int t2) {
    for (int h1 = 0; h1 < p; ++h1) {
      for (int h2 = 0; h2 < p; ++h2) {
        const int r = zBlock(t1, h1) * m;
        const int c = zBlock(t2, h2) * m;
        for (int a = 0; a < m; ++a) {
          for (int b = 0; b < m; ++b) {
            const double v = block(h1 * m + a, h2 * m + b);
            trips.emplace_back(r + a, c + b, v);
          }
        }
      }
    }
  };
  for (int t = 0; t < T; ++t) {
    addBlock(qStar.diagBlock(t), t, t);
    if (t + 1 < T) {
      addBlock(qStar.offDiagBlock(t), t, t + 1);
      addBlock(qStar.offDiagBlock(t).transpose(), t + 1, t);
    }
  }
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

/// Log-determinant of the support precision: pm log(kappa*) + (T - 1) log|W^-1|.
inline double supportPrecisionLogDeterminant(const Matrix& w, int p, int T, double kappaStar) {
  const auto m = w.rows();
  return static_cast<double>(p * m) * std::log(kappaStar) -
         static_cast<double>(T - 1) * logDetSpd(w, "state covariance W");
}

struct StationarityReport {
  bool stationary = false;
  double spectralRadius = 0.0;
};

/// Stationary iff the companion spectral radius is below 1 (equivalently all roots of
/// det Phi(z) lie outside the unit circle).
inline StationarityReport checkStationarity(const VarCoefficients& coeffs) {
  StationarityReport out;
  out.spectralRadius = spectralRadius(companionMatrix(coeffs.phis()));
  out.stationary = out.spectralRadius < 1.0 - kStationarityMargin;
  return out;
}

/// Stationary covariance of the companion state (x_t, ..., x_{t-p+1}).
inline Matrix stationaryCompanionCovariance(const VarCoefficients& coeffs, const Matrix& w) {
  if (!checkStationarity(coeffs).stationary) {
    throw StationarityError("VAR coefficients are not stationary");
  }
  const CompanionForm cf = buildCompanionForm(coeffs, w);
  return solveDiscreteLyapunov(cf.phiStar, cf.wStar);
}

namespace detail {

inline Matrix blockToeplitzLower(const std::vector<Matrix>& lags, int m, int T) {
  // Identity on the diagonal, -lags[h-1] on block sub-diagonal h.
  Matrix out = Matrix::Identity(m * T, m * T);
  for (int h = 1; h <= static_cast<int>(lags.size()); ++h) {
    for (int t = h; t < T; ++t) out.block(t * m, (t - h) * m, m, m) = -lags[h - 1];
  }
  return out;
}

// Covariance of the presample vector u = (x_{-p+1},...,x_0, w_{-q+1},...,w_0).
inline Matrix presampleCovariance(const VarmaCoefficients& c) {
  const int m = c.dim(), p = c.p(), q = c.q();
  const int k = m * (p + q);
  // State s_t = (x_t, ..., x_{t-p+1}, w_t, ..., w_{t-q+1}).
  Matrix a = Matrix::Zero(k, k);
  Matrix b = Matrix::Zero(k, m);
  if (p > 0) {
    for (int h = 0; h < p; ++h) a.block(0, h * m, m, m) = c.phis()[h];
    for (int h = 0; h < q; ++h) a.block(0, (p + h) * m, m, m) = -c.thetas()[h];
    for (int h = 1; h < p; ++h) a.block(h * m, (h - 1) * m, m, m).setIdentity();
    b.topRows(m).setIdentity();
  }
  if (q > 0) {
    for (int h = 1; h < q; ++h) a.block((p + h) * m, (p + h - 1) * m, m, m).setIdentity();
    b.block(p * m, 0, m, m).setIdentity();
  }
  const Matrix state = solveDiscreteLyapunov(a, b * c.sigmaW() * b.transpose());
  // Reverse time order within each group to match u.
  std::vector<int> perm(static_cast<std::size_t>(p + q));
  for (int i = 0; i < p; ++i) perm[i] = p - 1 - i;
  for (int i = 0; i < q; ++i) perm[p + i] = p + q - 1 - i;
  Matrix out(k, k);
  for (int i = 0; i < p + q; ++i) {
    for (int j = 0; j < p + q; ++j) {
      out.block(i * m, j * m, m, m) = state.block(perm[i] * m, perm[j] * m, m, m);
    }
  }
  return symmetrize(out);
}

}  // namespace detail

inline StationarityReport checkInvertibility(const VarmaCoefficients& c) {
  StationarityReport out;
  out.spectralRadius = spectralRadius(companionMatrix(c.thetas()));
  out.stationary = out.spectralRadius < 1.0 - kStationarityMargin;
  return out;
}

struct VarmaPrecision {
  Matrix innovation;  ///< precision of w0 = Theta^-1 Phi x (the exact-likelihood residuals)
  Matrix state;       ///< precision of x = (x_1', ..., x_T')'
};

/// Exact-likelihood precision of a stationary, invertible VARMA(p,q) sample.
///
/// The residual precision follows the Woodbury form
///   S0^-1 = Iw - Iw Theta^-1 G F (Z'Z)^-1 F' G' Theta'^-1 Iw,
///   Z'Z = Su^-1 + F' G' Theta'^-1 Iw Theta^-1 G F,  Iw = I_T (x) Sw^-1,
/// and the state precision is Phi' Theta'^-1 S0^-1 Theta^-1 Phi (unit Jacobian).
inline VarmaPrecision buildVarmaPrecisions(const VarmaCoefficients& c, int T) {
  if (T < 1) throw DimensionError("need at least one time point");
  const int m = c.dim(), p = c.p(), q = c.q();
  const int r = std::max(p, q);
  if (p > 0 && !checkStationarity(VarCoefficients(c.phis())).stationary) {
    throw StationarityError("VARMA autoregressive part is not stationary");
  }
  if (q > 0 && !checkInvertibility(c).stationary) {
    throw StationarityError("VARMA moving-average part is not invertible");
  }
  const int n = m * T;
  const Matrix phiBig = detail::blockToeplitzLower(c.phis(), m, T);
  const Matrix thetaBig = detail::blockToeplitzLower(c.thetas(), m, T);

  // F maps u onto the first r sample equations: equation t (1-based) picks up
  // Phi_h x_{t-h} and -Theta_h w_{t-h} for every presample time t - h <= 0.
  Matrix f = Matrix::Zero(m * r, m * (p + q));
  for (int t = 1; t <= r; ++t) {
    for (int a = 0; a < p; ++a) {
      const int h = t - (a - p + 1);
      if (h <= p) f.block((t - 1) * m, a * m, m, m) = c.phis()[h - 1];
    }
    for (int b = 0; b < q; ++b) {
      const int h = t - (b - q + 1);
      if (h <= q) f.block((t - 1) * m, (p + b) * m, m, m) = -c.thetas()[h - 1];
    }
  }
  Matrix gf = Matrix::Zero(n, m * (p + q));
  const int rows = std::min(m * r, n);
  gf.topRows(rows) = f.topRows(rows);

  const auto thetaLower = thetaBig.triangularView<Eigen::Lower>();
  const Matrix mMat = thetaLower.solve(gf);  // Theta^-1 G F
  const Matrix sigmaWInv = spdInverse(c.sigmaW(), "innovation covariance");
  Matrix iw = Matrix::Zero(n, n);
  for (int t = 0; t < T; ++t) iw.block(t * m, t * m, m, m) = sigmaWInv;

  const Matrix su = detail::presampleCovariance(c);
  const PseudoDeterminant suDet = logPseudoDeterminant(su);
  if (suDet.rank < su.rows()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(su, Eigen::EigenvaluesOnly);
    throw NumericError("presample covariance is singular (rank " + std::to_string(suDet.rank) +
                       " of " + std::to_string(su.rows()) + ", smallest eigenvalue " +
                       std::to_string(eig.eigenvalues().minCoeff()) +
                       "); AR and MA factors may cancel");
  }
  const Matrix suInv = spdInverse(su, "presample covariance");
  const Matrix iwM = iw * mMat;
  const Matrix ztz = symmetrize(suInv + mMat.transpose() * iwM);
  Eigen::LLT<Matrix> ztzLlt(ztz);
  if (ztzLlt.info() != Eigen::Success) throw NumericError("Z'Z is not positive definite");

  VarmaPrecision out;
  out.innovation = symmetrize(iw - iwM * ztzLlt.solve(iwM.transpose()));
  const Matrix nMat = thetaLower.solve(phiBig);  // Theta^-1 Phi
  out.state = symmetrize(nMat.transpose() * out.innovation * nMat);
  return out;
}

/// Precision of (x_1', ..., x_T')' under the stationary VARMA(p,q); dense.
inline Matrix buildVarmaPrecision(const VarmaCoefficients& c, int T) {
  return buildVarmaPrecisions(c, T).state;
}

/// Cholesky factor L L' = Q of a block-tridiagonal precision; L is lower block-bidiagonal.
class BlockCholesky {
 public:
  explicit BlockCholesky(const BlockPrecision& q) : k_(q.blockDim()) {
    const int T = q.numBlocks();
    diag_.reserve(static_cast<std::size_t>(T));
    sub_.reserve(static_cast<std::size_t>(T > 0 ? T - 1 : 0));
    Matrix schur = q.diagBlock(0);
    for (int t = 0; t < T; ++t) {
      if (t > 0) {
        // L_{t,t-1} = Q_{t-1,t}' L_{t-1,t-1}^{-T}
        const Matrix lt = diag_[t - 1]
                              .triangularView<Eigen::Lower>()
                              .solve(q.offDiagBlock(t - 1))
                              .transpose();
        schur = q.diagBlock(t) - lt * lt.transpose();
        sub_.push_back(lt);
      }
      Eigen::LLT<Matrix> llt(symmetrize(schur));
      if (llt.info() != Eigen::Success) {
        throw NotPositiveDefiniteError("non-positive pivot in block Cholesky", t);
      }
      Matrix l = llt.matrixL();
      for (int i = 0; i < k_; ++i) {
        if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
          throw NotPositiveDefiniteError("non-positive pivot in block Cholesky", t);
        }
      }
      diag_.push_back(std::move(l));
    }
  }

  int blockDim() const { return k_; }
  int numBlocks() const { return static_cast<int>(diag_.size()); }
  const Matrix& diagFactor(int t) const { return diag_.at(static_cast<std::size_t>(t)); }
  const Matrix& subFactor(int t) const { return sub_.at(static_cast<std::size_t>(t)); }

  double logDeterminant() const {
    double out = 0.0;
    for (const auto& l : diag_) out += l.diagonal().array().log().sum();
    return 2.0 * out;
  }

  double minPivot() const {
    double out = std::numeric_limits<double>::infinity();
    for (const auto& l : diag_) out = std::min(out, l.diagonal().minCoeff());
    return out;
  }

  /// Solves L y = b.
  Vector solveLower(const Vector& b) const {
    checkLength(b);
    Vector y(b.size());
    for (int t = 0; t < numBlocks(); ++t) {
      Vector rhs = b.segment(t * k_, k_);
      if (t > 0) rhs -= sub_[t - 1] * y.segment((t - 1) * k_, k_);
      y.segment(t * k_, k_) = diag_[t].triangularView<Eigen::Lower>().solve(rhs);
    }
    return y;
  }

  /// Solves L' x = y.
  Vector solveUpper(const Vector& y) const {
    checkLength(y);
    Vector x(y.size());
    for (int t = numBlocks() - 1; t >= 0; --t) {
      Vector rhs = y.segment(t * k_, k_);
      if (t + 1 < numBlocks()) rhs -= sub_[t].transpose() * x.segment((t + 1) * k_, k_);
      x.segment(t * k_, k_) = diag_[t].transpose().triangularView<Eigen::Upper>().solve(rhs);
    }
    return x;
  }

  /// Solves Q x = b in O(T k^3).
  Vector solve(const Vector& b) const { return solveUpper(solveLower(b)); }

  Matrix toDenseFactor() const {
    const int n = k_ * numBlocks();
    Matrix out = Matrix::Zero(n, n);
    for (int t = 0; t < numBlocks(); ++t) {
      out.block(t * k_, t * k_, k_, k_) = diag_[t];
      if (t > 0) out.block(t * k_, (t - 1) * k_, k_, k_) = sub_[t - 1];
    }
    return out;
  }

 private:
  void checkLength(const Vector& b) const {
    if (b.size() != k_ * numBlocks()) throw DimensionError("right-hand side has wrong length");
  }

  int k_;
  std::vector<Matrix> diag_;
  std::vector<Matrix> sub_;
};

inline BlockCholesky sparseCholesky(const BlockPrecision& q) { return BlockCholesky(q); }

/// log f(x) = -(k/2) log 2 pi + (1/2) log pdet(Q) - (1/2) x'Qx with k = rank(Q).
inline double logDensityLatent(const Vector& x, const BlockPrecision& q) {
  if (x.size() != q.dim()) throw DimensionError("latent vector length does not match precision");
  const double quad = q.quadraticForm(x);
  // Well-conditioned precisions use the block factorization; otherwise the eigenvalue
  // pseudo-determinant handles rank deficiency (e.g. singular W*).
  try {
    const BlockCholesky chol(q);
    double maxDiag = 0.0;
    for (int t = 0; t < q.numBlocks(); ++t) {
      maxDiag = std::max(maxDiag, q.diagBlock(t).diagonal().maxCoeff());
    }
    const double piv = chol.minPivot();
    if (piv * piv > kRankTolerance * maxDiag) {
      return -0.5 * q.dim() * std::log(2.0 * std::numbers::pi) + 0.5 * chol.logDeterminant() -
             0.5 * quad;
    }
  } catch (const NotPositiveDefiniteError&) {
  }
  const PseudoDeterminant pd = logPseudoDeterminant(q.toDense());
  return -0.5 * pd.rank * std::log(2.0 * std::numbers::pi) + 0.5 * pd.logValue - 0.5 * quad;
}

}  // namespace lcm
