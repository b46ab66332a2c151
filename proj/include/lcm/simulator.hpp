#pragma once

// Synthetic panels from the LCM-AR / LCM-VAR data-generating processes.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/latent_precision.hpp"
#include "lcm/model.hpp"
#include "lcm/random.hpp"

namespace lcm {

enum class StateInit { Zero, Stationary };

struct SimulationTruth {
  double tau = 300.0;
  double beta = 0.2;
  std::vector<Matrix> phis;  ///< diagonal for the AR variant
  Vector stateVariances;     ///< W diagonal
  Matrix sigma;              ///< level covariance
  int n = 30, m = 3, T = 500;
  std::uint64_t seed = 1;
  StateInit init = StateInit::Stationary;

  void validate() const {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (n < 1 || m < 1 || T < 2) throw ConfigError("simulation needs n, m >= 1 and T >= 2");
    if (phis.empty()) throw ConfigError("need at least one transition matrix");
    for (const auto& phi : phis)
      if (phi.rows() != m || phi.cols() != m) throw ConfigError("transition matrices must be m x m");
    if (stateVariances.size() != m || !(stateVariances.array() > 0.0).all()) {
      throw ConfigError("state variances must be m positive values");
    }
    if (sigma.rows() != m || sigma.cols() != m || !isPositiveDefinite(sigma) ||
        !isSymmetric(sigma, 1e-12)) {
      throw ConfigError("level covariance must be m x m symmetric positive definite");
    }
  }
};

inline Matrix covarianceFromCorrelations(const Vector& variances, const Vector& rho) {
  const int m = static_cast<int>(variances.size());
  const Vector sd = variances.cwiseSqrt();
  return sd.asDiagonal() * correlationMatrix(rho, m) * sd.asDiagonal();
}

/// Table-1 truth: m = 3 AR states with phi = 0.8, W = (0.3, 0.2, 0.5), sigma^2 = 0.5,
/// rho = (0.8, 0.7, 0.5), beta = 0.2, tau = 300.
inline SimulationTruth table1Truth(int n = 30, int T = 500, std::uint64_t seed = 1) {
  SimulationTruth t;
  t.tau = 300.0;
  t.beta = 0.2;
  t.m = 3;
  t.n = n;
  t.T = T;
  t.seed = seed;
  t.phis = {0.8 * Matrix::Identity(3, 3)};
  t.stateVariances = Vector(3);
  t.stateVariances << 0.3, 0.2, 0.5;
  Vector rho(3);
  rho << 0.8, 0.7, 0.5;
  t.sigma = covarianceFromCorrelations(Vector::Constant(3, 0.5), rho);
  return t;
}

/// Table-2 truth: full VAR(1) transition, tau = 100.
inline SimulationTruth table2Truth(int n = 30, int T = 500, std::uint64_t seed = 1) {
  SimulationTruth t;
  t.tau = 100.0;
  t.beta = 0.2;
  t.m = 3;
  t.n = n;
  t.T = T;
  t.seed = seed;
  Matrix phi(3, 3);
  phi << 0.5, 0.0, 0.3, 0.6, 0.1, 0.5, 0.1, 0.0, 0.8;
  t.phis = {phi};
  t.stateVariances = Vector(3);
  t.stateVariances << 0.5, 0.25, 0.5;
  Vector var(3), rho(3);
  var << 1.0 / 3.0, 0.5, 1.0 / 3.0;
  rho << 0.6, 0.8, 0.8;
  t.sigma = covarianceFromCorrelations(var, rho);
  return t;
}

/// Lower Cholesky factor of an SPD matrix.
inline Matrix choleskyFactor(const Matrix& a, const std::string& what) {
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError(what + " is not positive definite", 0);
  return llt.matrixL();
}

/// T x m path of x_t = sum_h Phi_h x_{t-h} + w_t.
inline Matrix simulateVarPath(const VarCoefficients& coeffs, const Vector& stateVariances, int T, Rng& rng,
                              StateInit init = StateInit::Stationary) {
  const int m = coeffs.dim();
  const int p = coeffs.order();
  if (stateVariances.size() != m || !(stateVariances.array() > 0.0).all()) {
    throw DomainError("state variances must be m positive values");
  }
  if (T < 1) throw DimensionError("path length must be positive");
  const Matrix w = stateVariances.asDiagonal();
  // Presample (x_0, x_{-1}, ..., x_{1-p}).
  Vector pre = Vector::Zero(m * p);
  if (init == StateInit::Stationary) {
    const Matrix cov = stationaryCompanionCovariance(coeffs, w);
    const Matrix l = choleskyFactor(cov, "stationary state covariance");
    Vector z(m * p);
    for (int k = 0; k < m * p; ++k) z(k) = rng.normal();
    pre = l * z;
  }
  const Vector sd = stateVariances.cwiseSqrt();
  Matrix path(T, m);
  std::vector<Vector> recent;  // recent[h] = x_{t-1-h}
  for (int h = 0; h < p; ++h) recent.push_back(pre.segment(h * m, m));
  for (int t = 0; t < T; ++t) {
    Vector x = Vector::Zero(m);
    for (int h = 0; h < p; ++h) x += coeffs[h] * recent[static_cast<std::size_t>(h)];
    for (int j = 0; j < m; ++j) x(j) += sd(j) * rng.normal();
    path.row(t) = x.transpose();
    recent.insert(recent.begin(), x);
    recent.pop_back();
  }
  return path;
}

/// count x m draws of N(0, Sigma) via the Cholesky factor.
inline Matrix sampleLevelEffects(const Matrix& sigma, int count, Rng& rng) {
  const int m = static_cast<int>(sigma.rows());
  if (sigma.cols() != m) throw DimensionError("level covariance must be square");
  const Matrix l = choleskyFactor(sigma, "level covariance");
  Matrix out(count, m);
  Vector z(m);
  for (int r = 0; r < count; ++r) {
    for (int j = 0; j < m; ++j) z(j) = rng.normal();
    out.row(r) = (l * z).transpose();
  }
  return out;
}

struct SimulatedPanel {
  PanelData data;
  Matrix states;  ///< T x m shared state path
  Matrix alphas;  ///< (n T) x m level effects, row i * T + t
  SimulationTruth truth;
};

/// log theta_{j,it} = x_{j,t} + alpha_{j,it} + beta S_{j,it}; y ~ Gamma(tau, tau / theta).
/// One state path is shared by all subjects. Streams: 1 states, 2 levels, 3 S, 4 y.
inline SimulatedPanel simulateLcm(const SimulationTruth& truth) {
  truth.validate();
  const int n = truth.n, m = truth.m, T = truth.T;
  Rng root(truth.seed);
  Rng stateRng = root.child(1), levelRng = root.child(2), covRng = root.child(3), yRng = root.child(4);
  SimulatedPanel out;
  out.truth = truth;
  out.states = simulateVarPath(VarCoefficients(truth.phis), truth.stateVariances, T, stateRng, truth.init);
  out.alphas = sampleLevelEffects(truth.sigma, n * T, levelRng);
  out.data = PanelData::zeros(n, m, T);
  std::vector<double> s(out.data.size());
  for (double& v : s) v = covRng.normal();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int t = 0; t < T; ++t) {
        const std::size_t o = out.data.index(i, j, t);
        const double eta = out.states(t, j) + out.alphas(i * T + t, j) + truth.beta * s[o];
        const double theta = std::exp(eta);
        out.data.y[o] = yRng.gamma(truth.tau, truth.tau / theta);
      }
    }
  }
  out.data.addCovariate("S", std::move(s));
  return out;
}

}  // namespace lcm
