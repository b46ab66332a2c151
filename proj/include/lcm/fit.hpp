#pragma once

// Hyperparameter mode search, grid exploration around the mode, and posterior
// summaries built from the per-point Gaussian approximations.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lcm/laplace.hpp"
#include "lcm/model.hpp"
#include "lcm/optimize.hpp"

namespace lcm {

enum class HyperOptimizer { QuasiNewton, NelderMead };

struct FitOptions {
  LaplaceOptions laplace;
  HyperOptimizer method = HyperOptimizer::QuasiNewton;
  QuasiNewtonOptions quasiNewton;
  NelderMeadOptions optimizer;
  double gridStep = 0.75;      ///< in standardized coordinates
  double hessianStep = 1e-2;   ///< finite-difference step on the internal scale
  bool stateSummaries = true;
};

struct GridPoint {
  Vector theta;
  double logPosterior = 0.0;
  double weight = 0.0;
};

struct HyperGrid {
  std::vector<GridPoint> points;
  Vector mode;
  bool standardized = true;
  Matrix negHessian;  ///< finite-difference -d2 log pi(theta | y) at the mode
};

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
};

struct FitDiagnostics {
  int optimizerEvaluations = 0;
  bool optimizerConverged = false;
  int newtonIterations = 0;
  double gradientNorm = 0.0;
  double logPosteriorAtMode = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct FitResult {
  LcmSpec spec;
  int n = 0, m = 0, T = 0;
  std::vector<std::string> subjects;
  std::vector<std::string> components;
  HyperGrid grid;
  std::vector<ParameterSummary> hyper;  ///< natural scale, pack() order
  std::vector<ParameterSummary> fixed;  ///< intercepts then coefficients
  Vector stateMean;                     ///< layout order, x_{2-p}..x_T
  Vector stateSd;
  FitDiagnostics diagnostics;

  const ParameterSummary& hyperSummary(const std::string& name) const {
    for (const auto& s : hyper)
      if (s.name == name) return s;
    throw DimensionError("no hyperparameter named '" + name + "'");
  }
  const ParameterSummary& fixedSummary(const std::string& name) const {
    for (const auto& s : fixed)
      if (s.name == name) return s;
    throw DimensionError("no fixed effect named '" + name + "'");
  }

  /// Natural-scale posterior means as a HyperParams-compatible NaturalParams.
  NaturalParams posteriorMeanNatural() const {
    Vector v(static_cast<Eigen::Index>(hyper.size()));
    for (std::size_t k = 0; k < hyper.size(); ++k) v(k) = hyper[k].mean;
    NaturalParams nat;
    int k = 0;
    nat.tau = v(k++);
    HyperParams tmp;
    tmp.varCoeffs = v.segment(k, spec.numVarCoeffs(m));
    k += spec.numVarCoeffs(m);
    nat.phis = varMatrices(tmp, spec, m);
    nat.stateVariances = v.segment(k, m).cwiseInverse();
    k += m;
    nat.levelVariances = v.segment(k, m).cwiseInverse();
    k += m;
    nat.correlations = v.segment(k, spec.numCorrelations(m));
    return nat;
  }
};

template <class Family>
OptimizeResult optimizeHyper(LaplaceEngine<Family>& engine, const HyperParams& init,
                             const FitOptions& options = {}) {
  const auto f = [&](const Vector& theta) { return engine.safeLogMarginalHyper(theta); };
  if (options.method == HyperOptimizer::NelderMead) return nelderMeadMaximize(f, init.pack(), options.optimizer);
  OptimizeResult qn = bfgsMaximize(f, init.pack(), options.quasiNewton);
  if (qn.converged || !std::isfinite(qn.value)) return qn;
  // Polish with the simplex method from where BFGS stopped.
  NelderMeadOptions nm = options.optimizer;
  nm.initialStep = 0.1;
  OptimizeResult polished = nelderMeadMaximize(f, qn.x, nm);
  polished.evaluations += qn.evaluations;
  return polished;
}

/// Central finite-difference Hessian of f at x.
inline Matrix finiteDifferenceHessian(const std::function<double(const Vector&)>& f, const Vector& x,
                                      double h) {
  const int d = static_cast<int>(x.size());
  const double f0 = f(x);
  Vector fp(d), fm(d);
  for (int i = 0; i < d; ++i) {
    Vector a = x, b = x;
    a(i) += h;
    b(i) -= h;
    fp(i) = f(a);
    fm(i) = f(b);
  }
  Matrix out(d, d);
  for (int i = 0; i < d; ++i) {
    out(i, i) = (fp(i) - 2.0 * f0 + fm(i)) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      Vector a = x, b = x;
      a(i) += h;
      a(j) += h;
      b(i) -= h;
      b(j) -= h;
      const double fpp = f(a), fmm = f(b);
      out(i, j) = out(j, i) = (fpp - fp(i) - fp(j) + 2.0 * f0 - fm(i) - fm(j) + fmm) / (2.0 * h * h);
    }
  }
  return out;
}

/// Normalizes weights proportional to exp(logPosterior - max).
inline void normalizeGridWeights(HyperGrid& grid) {
  double maxLp = -std::numeric_limits<double>::infinity();
  for (const auto& p : grid.points) maxLp = std::max(maxLp, p.logPosterior);
  double total = 0.0;
  for (auto& p : grid.points) {
    p.weight = std::isfinite(p.logPosterior) ? std::exp(p.logPosterior - maxLp) : 0.0;
    total += p.weight;
  }
  for (auto& p : grid.points) p.weight /= total;
}

/// Mode plus +-step along each eigen-standardized axis of the negative Hessian
/// (2d + 1 points). `logPost` evaluates the unnormalized log posterior.
inline HyperGrid buildHyperGrid(const std::function<double(const Vector&)>& logPost, const Vector& mode,
                                double step, double hessianStep, std::vector<std::string>* warnings = nullptr) {
  const int d = static_cast<int>(mode.size());
  HyperGrid grid;
  grid.mode = mode;
  grid.negHessian = -finiteDifferenceHessian(logPost, mode, hessianStep);
  Matrix axes = Matrix::Identity(d, d);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(grid.negHessian));
  const Vector& lambda = eig.eigenvalues();
  if (d > 0 && lambda.allFinite() && lambda.minCoeff() > kRankTolerance * lambda.cwiseAbs().maxCoeff() &&
      lambda.minCoeff() > 0.0) {
    axes = eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
  } else {
    grid.standardized = false;
    if (warnings) warnings->push_back("hyperparameter Hessian is singular; using unstandardized grid axes");
  }
  grid.points.push_back({mode, logPost(mode), 0.0});
  for (int k = 0; k < d; ++k) {
    for (double sign : {1.0, -1.0}) {
      const Vector theta = mode + sign * step * axes.col(k);
      grid.points.push_back({theta, logPost(theta), 0.0});
    }
  }
  normalizeGridWeights(grid);
  return grid;
}

template <class Family>
HyperGrid exploreHyperGrid(LaplaceEngine<Family>& engine, const Vector& mode, double step = 0.75,
                           double hessianStep = 1e-2, std::vector<std::string>* warnings = nullptr) {
  const auto f = [&](const Vector& theta) { return engine.safeLogMarginalHyper(theta); };
  return buildHyperGrid(f, mode, step, hessianStep, warnings);
}

struct MixtureMoments {
  Vector mean;
  Vector variance;
};

/// Weighted mixture of Gaussians: mean and law-of-total-variance.
inline MixtureMoments mixtureMoments(const std::vector<double>& weights, const std::vector<Vector>& means,
                                     const std::vector<Vector>& variances) {
  if (weights.empty() || weights.size() != means.size() || means.size() != variances.size()) {
    throw DimensionError("mixture needs matching, non-empty weights, means and variances");
  }
  MixtureMoments out;
  out.mean = Vector::Zero(means.front().size());
  for (std::size_t k = 0; k < weights.size(); ++k) out.mean += weights[k] * means[k];
  out.variance = Vector::Zero(out.mean.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    out.variance += weights[k] * (variances[k].array() + (means[k] - out.mean).array().square()).matrix();
  }
  out.variance = out.variance.cwiseMax(0.0);
  return out;
}

/// Gauss-Hermite nodes and weights for E[f(Z)], Z ~ N(0, 1) (Golub-Welsch).
inline std::pair<Vector, Vector> gaussHermiteStandard(int nodes) {
  Matrix j = Matrix::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(j);
  Vector w = eig.eigenvectors().row(0).transpose().array().square();
  return {eig.eigenvalues(), w};
}

struct PointLatent {
  Vector mean;
  Vector variance;
};

/// Natural-scale hyper summaries: weighted grid means; sds from the Gaussian
/// approximation at the mode when the grid is standardized, else grid moments.
inline std::vector<ParameterSummary> hyperSummaries(const HyperGrid& grid, const LcmSpec& spec, int m) {
  const int d = static_cast<int>(grid.mode.size());
  const auto names = naturalHyperNames(spec, m);
  std::vector<ParameterSummary> out;
  Matrix cov;
  if (grid.standardized) cov = spdInverse(symmetrize(grid.negHessian), "hyperparameter Hessian");
  const auto [nodes, ghw] = gaussHermiteStandard(40);
  for (int k = 0; k < d; ++k) {
    ParameterSummary s;
    s.name = names[static_cast<std::size_t>(k)];
    double mean = 0.0, second = 0.0;
    for (const auto& p : grid.points) {
      const double g = naturalTransform(spec, m, k, p.theta(k));
      mean += p.weight * g;
      second += p.weight * g * g;
    }
    s.mean = mean;
    double var = second - mean * mean;
    if (grid.standardized) {
      const double sdInternal = std::sqrt(std::max(cov(k, k), 0.0));
      double gm = 0.0, g2 = 0.0;
      for (int q = 0; q < nodes.size(); ++q) {
        const double g = naturalTransform(spec, m, k, grid.mode(k) + sdInternal * nodes(q));
        gm += ghw(q) * g;
        g2 += ghw(q) * g * g;
      }
      var = g2 - gm * gm;
    }
    s.sd = std::sqrt(std::max(var, 0.0));
    out.push_back(s);
  }
  return out;
}

template <class Family>
FitResult fitLcm(const LcmSpec& spec, const PanelData& data, const FitOptions& options = {},
                 const HyperParams* init = nullptr) {
  LaplaceEngine<Family> engine(spec, data, options.laplace);
  const LatentLayout& layout = engine.layout();
  FitResult fit;
  fit.spec = spec;
  fit.n = data.n;
  fit.m = data.m;
  fit.T = data.T;
  fit.subjects = data.subjects;
  fit.components = data.components;

  const HyperParams start = init ? *init : HyperParams::initial(spec, data.m);
  const OptimizeResult opt = optimizeHyper(engine, start, options);
  fit.diagnostics.optimizerEvaluations = opt.evaluations;
  fit.diagnostics.optimizerConverged = opt.converged;
  if (!std::isfinite(opt.value)) throw NumericError("log posterior is not finite anywhere the optimizer looked");
  if (!opt.converged) fit.diagnostics.warnings.push_back("hyperparameter optimizer did not converge");

  // Re-solve at the mode from scratch so the result does not depend on warm starts.
  engine.resetWarmStart();
  const HyperParams modeH = HyperParams::unpack(opt.x, spec, data.m);
  GaussianApprox modeApprox;
  fit.diagnostics.logPosteriorAtMode = engine.logMarginalHyper(modeH, &modeApprox);
  fit.diagnostics.newtonIterations = modeApprox.iterations;
  fit.diagnostics.gradientNorm = modeApprox.gradNorm;

  fit.grid = exploreHyperGrid(engine, opt.x, options.gridStep, options.hessianStep, &fit.diagnostics.warnings);

  std::vector<int> indices;
  for (int k = layout.interceptOffset; k < layout.dim(); ++k) indices.push_back(k);
  if (options.stateSummaries) {
    for (int k = 0; k < layout.stateDim; ++k) indices.push_back(layout.stateOffset + k);
  }
  std::vector<double> weights;
  std::vector<Vector> means, vars;
  for (const auto& p : fit.grid.points) {
    if (!(p.weight > 0.0)) continue;
    const HyperParams h = HyperParams::unpack(p.theta, spec, data.m);
    engine.setWarmStart(modeApprox.mode);
    const GaussianApprox a = engine.findLatentMode(h);
    Vector mean(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) mean(k) = a.mode(indices[k]);
    weights.push_back(p.weight);
    means.push_back(mean);
    vars.push_back(engine.marginalVariances(h, a, indices));
  }
  const MixtureMoments mix = mixtureMoments(weights, means, vars);
  const auto fixedNames = fixedEffectNames(spec, layout, data);
  for (int k = 0; k < layout.fixedDim(); ++k) {
    fit.fixed.push_back({fixedNames[static_cast<std::size_t>(k)], mix.mean(k), std::sqrt(mix.variance(k))});
  }
  if (options.stateSummaries) {
    fit.stateMean = mix.mean.segment(layout.fixedDim(), layout.stateDim);
    fit.stateSd = mix.variance.segment(layout.fixedDim(), layout.stateDim).cwiseSqrt();
  }
  fit.hyper = hyperSummaries(fit.grid, spec, data.m);
  fit.diagnostics.converged = opt.converged;
  return fit;
}

}  // namespace lcm
