#pragma once

// Verification sampler for the LCM posterior (lag order 1).
//
// Metropolis-within-Gibbs in the centered parameterization nu_{j,it} = x_{j,t} +
// alpha_{j,it}, which removes the ridge between the shared states and the level
// effects. Random-walk Metropolis (scales adapted during burn-in only) updates nu,
// the fixed effects and log tau; the conditionally conjugate blocks (state path,
// Sigma^-1, state precisions, transition coefficients) are drawn exactly.
// A joint move trades noise variance for level-effect variance along the
// tau / Sigma ridge, which single-site updates cross very slowly.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/latent_precision.hpp"
#include "lcm/model.hpp"
#include "lcm/random.hpp"

namespace lcm {

struct McmcOptions {
  int iterations = 20000;  ///< retained sweeps
  int burnIn = 5000;
  int thin = 1;
  std::uint64_t seed = 1;
  int tauStepsPerSweep = 5;
};

struct McmcParameter {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ess = 0.0;
};

struct McmcResult {
  std::vector<McmcParameter> hyper;  ///< natural scale, same names and order as the fit
  std::vector<McmcParameter> fixed;
  Vector stateMean;                  ///< layout order x_1..x_T
  int draws = 0;
  double nuAcceptance = 0.0;
  double fixedAcceptance = 0.0;
  double tauAcceptance = 0.0;
  double ridgeAcceptance = 0.0;

  const McmcParameter& find(const std::string& name) const {
    for (const auto* list : {&hyper, &fixed})
      for (const auto& p : *list)
        if (p.name == name) return p;
    throw DimensionError("no sampled parameter named '" + name + "'");
  }
};

/// Effective sample size with Geyer's initial monotone sequence estimator.
inline double effectiveSampleSize(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = lag; t < n; ++t) s += (x[t] - mean) * (x[t - lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return static_cast<double>(n);
  double sum = 0.0;
  double prevPair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = autocov(2 * k) + autocov(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prevPair);
    prevPair = pair;
    sum += pair;
  }
  const double tau = (2.0 * sum - c0) / c0;
  return static_cast<double>(n) / std::max(tau, 1e-12);
}

namespace detail {

/// Wishart(df, scale) draw by the Bartlett decomposition.
inline Matrix sampleWishart(double df, const Matrix& scale, Rng& rng) {
  const int m = static_cast<int>(scale.rows());
  Eigen::LLT<Matrix> llt(symmetrize(scale));
  if (llt.info() != Eigen::Success) throw NumericError("Wishart scale is not positive definite");
  const Matrix l = llt.matrixL();
  Matrix a = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    a(i, i) = std::sqrt(rng.chiSquared(df - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix la = l * a;
  return symmetrize(la * la.transpose());
}

struct Adaptive {
  double logScale = 0.0;
  long accepted = 0;
  long proposed = 0;
  long windowAccepted = 0;
  long windowProposed = 0;

  double scale() const { return std::exp(logScale); }
  void record(bool ok) {
    ++proposed;
    ++windowProposed;
    if (ok) {
      ++accepted;
      ++windowAccepted;
    }
  }
  // Robbins-Monro step towards acceptance 0.44 once per adaptation window.
  void adapt(int round) {
    if (windowProposed == 0) return;
    const double rate = static_cast<double>(windowAccepted) / windowProposed;
    logScale += (rate - 0.44) / std::sqrt(1.0 + round);
    windowAccepted = windowProposed = 0;
  }
  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

}  // namespace detail

/// Runs the sampler on the gamma-likelihood LCM; supports every variant with p = 1.
inline McmcResult mcmcOracle(const LcmSpec& spec, const PanelData& data, const McmcOptions& opt = {}) {
  data.validate();
  spec.validate(data.m);
  if (spec.p != 1) throw ConfigError("the MCMC oracle supports lag order 1 only");
  if (opt.iterations < 1 || opt.burnIn < 0 || opt.thin < 1) throw ConfigError("invalid MCMC run length");
  const int n = data.n, m = data.m, T = data.T;
  const LatentLayout layout(spec, n, m, T);
  const PriorConfig& pr = spec.priors;
  const int fixedDim = layout.fixedDim();
  const int K = static_cast<int>(spec.predictorNames.size());
  std::vector<const std::vector<double>*> cov;
  for (const auto& name : spec.predictorNames) cov.push_back(&data.covariate(name));
  Rng rng(opt.seed);

  // Observations touched by each fixed effect.
  std::vector<std::vector<int>> fixedObs(static_cast<std::size_t>(fixedDim));
  std::vector<std::vector<double>> fixedDesign(static_cast<std::size_t>(fixedDim));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      for (int t = 0; t < T; ++t) {
        const int o = static_cast<int>(data.index(i, j, t));
        if (layout.interceptDim > 0) {
          const int f = layout.intercept(i, j) - layout.interceptOffset;
          fixedObs[f].push_back(o);
          fixedDesign[f].push_back(1.0);
        }
        for (int k = 0; k < K; ++k) {
          const int f = layout.coefficient(k, j) - layout.interceptOffset;
          fixedObs[f].push_back(o);
          fixedDesign[f].push_back((*cov[k])[o]);
        }
      }

  const std::size_t N = data.size();
  std::vector<double> logY(N);
  double sumLogY = 0.0;
  for (std::size_t o = 0; o < N; ++o) {
    logY[o] = std::log(data.y[o]);
    sumLogY += logY[o];
  }

  // State of the chain.
  Matrix nu(n * T, m);  // row i * T + t
  Matrix x = Matrix::Zero(T, m);
  Vector fixed = Vector::Zero(fixedDim);
  std::vector<double> offset(N, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      for (int t = 0; t < T; ++t) nu(i * T + t, j) = logY[data.index(i, j, t)];
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) x.row(t) += nu.row(i * T + t);
    x.row(t) /= n;
  }
  Matrix phi = 0.5 * Matrix::Identity(m, m);
  Vector lambda = Vector::Ones(m);
  Matrix qLevel = Matrix::Identity(m, m);
  double logTau = std::log(10.0);

  auto etaOf = [&](int i, int j, int t) { return nu(i * T + t, j) + offset[data.index(i, j, t)]; };
  const auto gammaLl = [](double y, double ly, double eta, double tau) {
    return tau * std::log(tau) - std::lgamma(tau) - tau * eta + (tau - 1.0) * ly - tau * y * std::exp(-eta);
  };

  std::vector<detail::Adaptive> nuAdapt(static_cast<std::size_t>(m));
  std::vector<detail::Adaptive> fixedAdapt(static_cast<std::size_t>(fixedDim));
  for (auto& a : fixedAdapt) a.logScale = std::log(0.05);
  detail::Adaptive tauAdapt;
  tauAdapt.logScale = std::log(0.2);
  detail::Adaptive ridgeAdapt;
  ridgeAdapt.logScale = std::log(0.02);

  const std::vector<std::string> hyperNames = naturalHyperNames(spec, m);
  const std::vector<std::string> fixedNames = fixedEffectNames(spec, layout, data);
  const int nHyper = spec.numHyper(m);
  std::vector<std::vector<double>> hyperTrace(static_cast<std::size_t>(nHyper));
  std::vector<std::vector<double>> fixedTrace(static_cast<std::size_t>(fixedDim));
  Vector stateSum = Vector::Zero(m * T);
  int draws = 0;

  // log p(alpha) with Sigma^-1 ~ Wishart(r, I) integrated out, up to a constant.
  const double levelDf = pr.wishartDegrees(m);
  auto collapsedLevelLogDensity = [&](const Matrix& v) {
    Matrix s = Matrix::Identity(m, m);
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < T; ++t) {
        const Vector a = (v.row(i * T + t) - x.row(t)).transpose();
        s += a * a.transpose();
      }
    return -0.5 * (levelDf + n * T) * logDetSpd(s);
  };

  const int totalSweeps = opt.burnIn + opt.iterations * opt.thin;
  const int adaptWindow = 50;
  for (int sweep = 0; sweep < totalSweeps; ++sweep) {
    const bool burning = sweep < opt.burnIn;
    const double tau = std::exp(logTau);

    // 1. nu_{j,it}: RWM with proposal sd scale / sqrt(tau + Q_jj).
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < T; ++t) {
        const int r = i * T + t;
        for (int j = 0; j < m; ++j) {
          const std::size_t o = data.index(i, j, t);
          const double sd = nuAdapt[j].scale() / std::sqrt(tau + qLevel(j, j));
          const double cur = nu(r, j);
          const double prop = cur + sd * rng.normal();
          double cross = 0.0;
          for (int k = 0; k < m; ++k) {
            if (k != j) cross += qLevel(j, k) * (nu(r, k) - x(t, k));
          }
          auto logTarget = [&](double v) {
            const double dv = v - x(t, j);
            return gammaLl(data.y[o], logY[o], v + offset[o], tau) - 0.5 * qLevel(j, j) * dv * dv - dv * cross;
          };
          const bool ok = std::log(rng.uniform()) < logTarget(prop) - logTarget(cur);
          if (ok) nu(r, j) = prop;
          nuAdapt[j].record(ok);
        }
      }
    }

    // 2. State path: Gaussian given nu with block-tridiagonal precision.
    {
      const Matrix w = lambda.cwiseInverse().asDiagonal();
      const BlockPrecision prior = buildVar1Precision(phi, w, T, pr.kappa);
      std::vector<Matrix> diag, super;
      for (int t = 0; t < T; ++t) diag.push_back(prior.diagBlock(t) + n * qLevel);
      for (int t = 0; t + 1 < T; ++t) super.push_back(prior.offDiagBlock(t));
      const BlockPrecision post(std::move(diag), std::move(super));
      const BlockCholesky chol(post);
      Vector b(m * T);
      for (int t = 0; t < T; ++t) {
        Vector s = Vector::Zero(m);
        for (int i = 0; i < n; ++i) s += nu.row(i * T + t).transpose();
        b.segment(t * m, m) = qLevel * s;
      }
      Vector z(m * T);
      for (int k = 0; k < m * T; ++k) z(k) = rng.normal();
      const Vector draw = chol.solve(b) + chol.solveUpper(z);
      for (int t = 0; t < T; ++t) x.row(t) = draw.segment(t * m, m).transpose();
    }

    // 3. Fixed effects: RWM per coordinate.
    for (int f = 0; f < fixedDim; ++f) {
      const auto& obs = fixedObs[f];
      const auto& des = fixedDesign[f];
      const double step = fixedAdapt[f].scale() * rng.normal();
      double delta = -0.5 * pr.fixedEffectPrecision * ((fixed(f) + step) * (fixed(f) + step) - fixed(f) * fixed(f));
      for (std::size_t k = 0; k < obs.size(); ++k) {
        const int o = obs[k];
        const int i = o / (m * T), j = (o / T) % m, t = o % T;
        const double eta = etaOf(i, j, t);
        delta += gammaLl(data.y[o], logY[o], eta + step * des[k], tau) - gammaLl(data.y[o], logY[o], eta, tau);
      }
      const bool ok = std::log(rng.uniform()) < delta;
      if (ok) {
        fixed(f) += step;
        for (std::size_t k = 0; k < obs.size(); ++k) offset[obs[k]] += step * des[k];
      }
      fixedAdapt[f].record(ok);
    }

    // 4. log tau: RWM on sufficient statistics.
    {
      double sumEta = 0.0, sumYe = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          for (int t = 0; t < T; ++t) {
            const double eta = etaOf(i, j, t);
            sumEta += eta;
            sumYe += data.y[data.index(i, j, t)] * std::exp(-eta);
          }
      const double nObs = static_cast<double>(N);
      auto logTarget = [&](double lt) {
        const double tv = std::exp(lt);
        return nObs * (tv * lt - std::lgamma(tv)) - tv * sumEta + (tv - 1.0) * sumLogY - tv * sumYe +
               logGammaLogDensity(lt, pr.tauShape, pr.tauRate);
      };
      double cur = logTarget(logTau);
      for (int s = 0; s < opt.tauStepsPerSweep; ++s) {
        const double prop = logTau + tauAdapt.scale() * rng.normal();
        const double val = logTarget(prop);
        const bool ok = std::log(rng.uniform()) < val - cur;
        if (ok) {
          logTau = prop;
          cur = val;
        }
        tauAdapt.record(ok);
      }
    }

    // 4b. Ridge move, with Sigma^-1 integrated out (it is redrawn right after):
    // residuals e = log y - offset - nu shrink by exp(-delta) while log tau grows by
    // 2 delta, moving variance between the noise and the level effects.
    for (int s = 0; s < opt.tauStepsPerSweep; ++s) {
      const double delta = ridgeAdapt.scale() * rng.normal();
      const double lt = logTau + 2.0 * delta + 0.25 * ridgeAdapt.scale() * rng.normal();
      const double shrink = std::exp(-delta);
      const double tauOld = std::exp(logTau), tauNew = std::exp(lt);
      Matrix nuNew(n * T, m);
      double dll = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          for (int t = 0; t < T; ++t) {
            const std::size_t o = data.index(i, j, t);
            const double target = logY[o] - offset[o];
            const double v = target - shrink * (target - nu(i * T + t, j));
            nuNew(i * T + t, j) = v;
            dll += gammaLl(data.y[o], logY[o], v + offset[o], tauNew) -
                   gammaLl(data.y[o], logY[o], nu(i * T + t, j) + offset[o], tauOld);
          }
      const double logRatio = dll + collapsedLevelLogDensity(nuNew) - collapsedLevelLogDensity(nu) +
                              logGammaLogDensity(lt, pr.tauShape, pr.tauRate) -
                              logGammaLogDensity(logTau, pr.tauShape, pr.tauRate) -
                              static_cast<double>(N) * delta;
      const bool ok = std::log(rng.uniform()) < logRatio;
      if (ok) {
        nu = nuNew;
        logTau = lt;
      }
      ridgeAdapt.record(ok);
    }

    // 5. Sigma^-1 | alpha ~ Wishart(r + nT, (I + S)^-1).
    {
      Matrix s = Matrix::Identity(m, m);
      for (int i = 0; i < n; ++i)
        for (int t = 0; t < T; ++t) {
          const Vector a = (nu.row(i * T + t) - x.row(t)).transpose();
          s += a * a.transpose();
        }
      qLevel = detail::sampleWishart(pr.wishartDegrees(m) + n * T, spdInverse(symmetrize(s), "Wishart scale"), rng);
    }

    // 6. State precisions and transition coefficients.
    {
      const Matrix xPrev = x.topRows(T - 1);
      const Matrix xNext = x.bottomRows(T - 1);
      for (int j = 0; j < m; ++j) {
        const Vector resid = xNext.col(j) - xPrev * phi.row(j).transpose();
        lambda(j) = rng.gamma(pr.statePrecisionShape + 0.5 * (T - 1), pr.statePrecisionRate + 0.5 * resid.squaredNorm());
      }
      for (int j = 0; j < m; ++j) {
        if (spec.isVar()) {
          const Matrix prec = Matrix::Identity(m, m) / pr.varCoeffVariance + lambda(j) * xPrev.transpose() * xPrev;
          const Vector rhs = Vector::Constant(m, pr.varCoeffMean / pr.varCoeffVariance) +
                             lambda(j) * xPrev.transpose() * xNext.col(j);
          Eigen::LLT<Matrix> llt(prec);
          const Vector mean = llt.solve(rhs);
          Vector z(m);
          for (int k = 0; k < m; ++k) z(k) = rng.normal();
          const Matrix lt = llt.matrixU();
          phi.row(j) = (mean + lt.triangularView<Eigen::Upper>().solve(z)).transpose();
        } else {
          const double prec = 1.0 / pr.varCoeffVariance + lambda(j) * xPrev.col(j).squaredNorm();
          const double mean = (pr.varCoeffMean / pr.varCoeffVariance + lambda(j) * xPrev.col(j).dot(xNext.col(j))) / prec;
          phi(j, j) = mean + rng.normal() / std::sqrt(prec);
        }
      }
    }

    if (burning) {
      if ((sweep + 1) % adaptWindow == 0) {
        const int round = (sweep + 1) / adaptWindow;
        for (auto& a : nuAdapt) a.adapt(round);
        for (auto& a : fixedAdapt) a.adapt(round);
        tauAdapt.adapt(round);
        ridgeAdapt.adapt(round);
      }
      if (sweep + 1 == opt.burnIn) {
        for (auto* list : {&nuAdapt, &fixedAdapt}) for (auto& a : *list) a.accepted = a.proposed = 0;
        tauAdapt.accepted = tauAdapt.proposed = 0;
        ridgeAdapt.accepted = ridgeAdapt.proposed = 0;
      }
      continue;
    }
    if ((sweep - opt.burnIn) % opt.thin != 0) continue;

    // Record on the natural scale, in the fit's order.
    ++draws;
    const Matrix sigma = spdInverse(qLevel, "level precision");
    int k = 0;
    hyperTrace[k++].push_back(std::exp(logTau));
    if (spec.isVar()) {
      for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) hyperTrace[k++].push_back(phi(r, c));
    } else {
      for (int j = 0; j < m; ++j) hyperTrace[k++].push_back(phi(j, j));
    }
    for (int j = 0; j < m; ++j) hyperTrace[k++].push_back(lambda(j));
    for (int j = 0; j < m; ++j) hyperTrace[k++].push_back(1.0 / sigma(j, j));
    for (int j = 0; j < m; ++j)
      for (int l = j + 1; l < m; ++l) hyperTrace[k++].push_back(sigma(j, l) / std::sqrt(sigma(j, j) * sigma(l, l)));
    for (int f = 0; f < fixedDim; ++f) fixedTrace[f].push_back(fixed(f));
    for (int t = 0; t < T; ++t) stateSum.segment(t * m, m) += x.row(t).transpose();
  }

  auto summarize = [](const std::string& name, const std::vector<double>& trace) {
    McmcParameter p;
    p.name = name;
    for (double v : trace) p.mean += v;
    p.mean /= static_cast<double>(trace.size());
    double ss = 0.0;
    for (double v : trace) ss += (v - p.mean) * (v - p.mean);
    p.sd = trace.size() > 1 ? std::sqrt(ss / static_cast<double>(trace.size() - 1)) : 0.0;
    p.ess = effectiveSampleSize(trace);
    return p;
  };
  McmcResult out;
  out.draws = draws;
  for (int k = 0; k < nHyper; ++k) out.hyper.push_back(summarize(hyperNames[k], hyperTrace[k]));
  for (int f = 0; f < fixedDim; ++f) out.fixed.push_back(summarize(fixedNames[f], fixedTrace[f]));
  out.stateMean = stateSum / draws;
  double acc = 0.0;
  for (const auto& a : nuAdapt) acc += a.rate();
  out.nuAcceptance = acc / m;
  acc = 0.0;
  for (const auto& a : fixedAdapt) acc += a.rate();
  out.fixedAcceptance = fixedDim ? acc / fixedDim : 0.0;
  out.tauAcceptance = tauAdapt.rate();
  out.ridgeAcceptance = ridgeAdapt.rate();
  return out;
}

}  // namespace lcm
