#pragma once

// Inner Newton solve for the latent mode and the Laplace approximation of the
// hyperparameter log posterior.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/model.hpp"

namespace lcm {

/// Gamma(tau, tau / theta) with log link eta = log theta.
struct GammaFamily {
  static double logLik(double y, double eta, double tau) {
    return tau * std::log(tau) - std::lgamma(tau) - tau * eta + (tau - 1.0) * std::log(y) -
           tau * y * std::exp(-eta);
  }
  static double gradient(double y, double eta, double tau) { return tau * (y * std::exp(-eta) - 1.0); }
  static double observedCurvature(double y, double eta, double tau) { return tau * y * std::exp(-eta); }
  static double expectedCurvature(double, double, double tau) { return tau; }
};

/// y ~ N(eta, 1 / tau); gives a linear-Gaussian model for exactness checks.
struct GaussianFamily {
  static double logLik(double y, double eta, double tau) {
    const double r = y - eta;
    return 0.5 * std::log(tau / (2.0 * std::numbers::pi)) - 0.5 * tau * r * r;
  }
  static double gradient(double y, double eta, double tau) { return tau * (y - eta); }
  static double observedCurvature(double, double, double tau) { return tau; }
  static double expectedCurvature(double, double, double tau) { return tau; }
};

enum class Curvature { Observed, Expected };

struct LaplaceOptions {
  double tol = 1e-8;
  int maxIter = 50;
  /// Curvature used for Newton steps; the Laplace determinant always uses the
  /// observed curvature at the mode.
  Curvature curvature = Curvature::Observed;
};

struct GaussianApprox {
  Vector mode;
  double logDetQStar = 0.0;
  double logLik = 0.0;
  double logPriorLatent = 0.0;  ///< -x'Qx / 2 + log|Q| / 2, without the 2 pi term
  int iterations = 0;
  double gradNorm = 0.0;
};

template <class Family>
class LaplaceEngine {
 public:
  using Solver = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

  LaplaceEngine(LcmSpec spec, const PanelData& data, LaplaceOptions options = {})
      : spec_(std::move(spec)), data_(data), options_(options),
        layout_(spec_, data.n, data.m, data.T) {
    data_.validate();
    spec_.validate(data_.m);
    if (!(options_.tol > 0.0)) throw ConfigError("Newton tolerance must be positive");
    if (options_.maxIter < 1) throw ConfigError("Newton iteration limit must be positive");
    design_ = buildDesignMatrix(spec_, layout_, data_);
    designT_ = design_.transpose();
  }

  const LcmSpec& spec() const { return spec_; }
  const PanelData& data() const { return data_; }
  const LatentLayout& layout() const { return layout_; }
  const LaplaceOptions& options() const { return options_; }
  const SparseMatrix& design() const { return design_; }

  /// Newton iteration with step halving; starts from `start`, the last mode found, or 0.
  GaussianApprox findLatentMode(const HyperParams& h, const Vector* start = nullptr) {
    const double tau = std::exp(h.logTau);
    const SparseMatrix q = buildJointPriorPrecision(h, spec_, layout_);
    Vector x = start ? *start : (warm_ ? *warm_ : Vector::Zero(layout_.dim()));
    if (x.size() != layout_.dim()) throw DimensionError("start vector does not match layout");
    Vector eta = design_ * x;
    double scale = 0.0;
    double f = objective(x, eta, q, tau, &scale);
    if (!std::isfinite(f)) {
      x.setZero();
      eta.setZero();
      f = objective(x, eta, q, tau, &scale);
    }
    Vector d(eta.size()), c(eta.size());
    GaussianApprox out;
    bool converged = false;
    int iter = 0;
    double gn = 0.0;
    for (;; ++iter) {
      derivatives(eta, tau, options_.curvature, d, c);
      const Vector g = designT_ * d - q * x;
      gn = g.cwiseAbs().maxCoeff();
      if (gn < options_.tol) {
        converged = true;
        break;
      }
      if (iter >= options_.maxIter) break;
      factorize(q, c);
      const Vector delta = solver_.solve(g);
      double step = 1.0;
      bool accepted = false;
      // Differences below the rounding level of the summed terms count as non-decrease.
      const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + scale);
      for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
        const Vector xn = x + step * delta;
        const Vector en = design_ * xn;
        double scaleN = 0.0;
        const double fn = objective(xn, en, q, tau, &scaleN);
        if (std::isfinite(fn) && fn >= f - slack) {
          x = xn;
          eta = en;
          f = fn;
          scale = scaleN;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // No representable ascent left: accept if the gradient is at rounding level.
        if (gn < 1e-6 * (1.0 + maxAbsCoeff(q))) converged = true;
        break;
      }
    }
    if (!converged) {
      throw NonConvergenceError("latent mode search did not converge (gradient norm " +
                                    std::to_string(gn) + ")",
                                gn);
    }
    derivatives(eta, tau, Curvature::Observed, d, c);
    factorize(q, c);
    out.mode = x;
    out.logDetQStar = factorLogDeterminant();
    out.logLik = logLikelihood(eta, tau);
    out.logPriorLatent = -0.5 * x.dot(q * x) + 0.5 * jointPriorLogDeterminant(h, spec_, layout_);
    out.iterations = iter;
    out.gradNorm = gn;
    warm_ = x;
    return out;
  }

  /// log p(y | x*) + log p(x* | theta) - log|Q*| / 2 + log pi(theta); constants shared
  /// across theta are dropped.
  double logMarginalHyper(const HyperParams& h, GaussianApprox* approxOut = nullptr) {
    const double prior = logPriorHyper(h, spec_.priors);
    if (!std::isfinite(prior)) return -std::numeric_limits<double>::infinity();
    const GaussianApprox a = findLatentMode(h);
    if (approxOut) *approxOut = a;
    return a.logLik + a.logPriorLatent - 0.5 * a.logDetQStar + prior;
  }

  /// Version of logMarginalHyper for optimizers: failures map to -inf.
  double safeLogMarginalHyper(const Vector& theta) {
    try {
      return logMarginalHyper(HyperParams::unpack(theta, spec_, data_.m));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

  /// Diagonal of Q*^-1 at `approx` for the given latent indices.
  Vector marginalVariances(const HyperParams& h, const GaussianApprox& approx,
                           const std::vector<int>& indices) {
    const double tau = std::exp(h.logTau);
    const SparseMatrix q = buildJointPriorPrecision(h, spec_, layout_);
    const Vector eta = design_ * approx.mode;
    Vector d(eta.size()), c(eta.size());
    derivatives(eta, tau, Curvature::Observed, d, c);
    factorize(q, c);
    Vector out(static_cast<Eigen::Index>(indices.size()));
    const int batch = 64;
    const int dim = layout_.dim();
    for (std::size_t start = 0; start < indices.size(); start += batch) {
      const int cols = static_cast<int>(std::min<std::size_t>(batch, indices.size() - start));
      Matrix rhs = Matrix::Zero(dim, cols);
      for (int k = 0; k < cols; ++k) rhs(indices[start + k], k) = 1.0;
      const Matrix sol = solver_.solve(rhs);
      for (int k = 0; k < cols; ++k) out(start + k) = sol(indices[start + k], k);
    }
    return out;
  }

  void resetWarmStart() { warm_.reset(); }
  void setWarmStart(const Vector& x) { warm_ = x; }

 private:
  static double maxAbsCoeff(const SparseMatrix& q) {
    double out = 0.0;
    for (int k = 0; k < q.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(q, k); it; ++it) out = std::max(out, std::abs(it.value()));
    return out;
  }

  double logLikelihood(const Vector& eta, double tau) const {
    double out = 0.0;
    for (Eigen::Index o = 0; o < eta.size(); ++o) out += Family::logLik(data_.y[o], eta(o), tau);
    return out;
  }

  /// `scale` receives the sum of absolute term sizes, which sets the rounding level.
  double objective(const Vector& x, const Vector& eta, const SparseMatrix& q, double tau,
                   double* scale = nullptr) const {
    double ll = 0.0, abs = 0.0;
    for (Eigen::Index o = 0; o < eta.size(); ++o) {
      const double v = Family::logLik(data_.y[o], eta(o), tau);
      ll += v;
      abs += std::abs(v);
    }
    const double quad = 0.5 * x.dot(q * x);
    if (scale) *scale = abs + std::abs(quad);
    return ll - quad;
  }

  void derivatives(const Vector& eta, double tau, Curvature kind, Vector& d, Vector& c) const {
    for (Eigen::Index o = 0; o < eta.size(); ++o) {
      const double y = data_.y[o];
      d(o) = Family::gradient(y, eta(o), tau);
      c(o) = kind == Curvature::Observed ? Family::observedCurvature(y, eta(o), tau)
                                         : Family::expectedCurvature(y, eta(o), tau);
    }
  }

  void factorize(const SparseMatrix& q, const Vector& c) {
    const SparseMatrix h = q + SparseMatrix(designT_ * c.asDiagonal() * design_);
    // The sparsity pattern depends only on the layout, so the ordering is reused.
    if (h.nonZeros() != analyzedNonZeros_) {
      solver_.analyzePattern(h);
      analyzedNonZeros_ = h.nonZeros();
    }
    solver_.factorize(h);
    if (solver_.info() != Eigen::Success) {
      throw NumericError("posterior precision is not positive definite (indefinite curvature)");
    }
  }

  double factorLogDeterminant() const {
    const auto& l = solver_.matrixL().nestedExpression();
    double out = 0.0;
    for (int k = 0; k < l.outerSize(); ++k) {
      SparseMatrix::InnerIterator it(l, k);
      out += std::log(it.value());  // diagonal entry leads each column
    }
    return 2.0 * out;
  }

  LcmSpec spec_;
  PanelData data_;
  LaplaceOptions options_;
  LatentLayout layout_;
  SparseMatrix design_;
  SparseMatrix designT_;
  Solver solver_;
  Eigen::Index analyzedNonZeros_ = -1;
  std::optional<Vector> warm_;
};

}  // namespace lcm
