#pragma once

// Plug-in multi-step forecasts from a fitted LCM and MAPE / MAE scoring.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/fit.hpp"
#include "lcm/laplace.hpp"
#include "lcm/model.hpp"

namespace lcm {

/// Covariate recognised as the log of the lagged response; filled recursively.
inline const std::string kLagResponseCovariate = "logLagY";

struct ForecastSet {
  int origin = 0;  ///< number of observed times used
  int horizon = 0;
  int n = 0, m = 0;
  std::vector<double> values;  ///< (i * m + j) * horizon + (l - 1)

  double at(int i, int j, int l) const {
    if (l < 1 || l > horizon) throw DimensionError("forecast step out of range");
    return values[static_cast<std::size_t>((i * m + j) * horizon + (l - 1))];
  }
};

inline double mape(const std::vector<double>& actual, const std::vector<double>& forecast) {
  if (actual.size() != forecast.size() || actual.empty()) throw DimensionError("MAPE needs equal non-empty inputs");
  double s = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    if (actual[k] == 0.0) throw DomainError("MAPE is undefined for a zero actual");
    s += std::abs((actual[k] - forecast[k]) / actual[k]);
  }
  return s / static_cast<double>(actual.size());
}

inline double mae(const std::vector<double>& actual, const std::vector<double>& forecast) {
  if (actual.size() != forecast.size() || actual.empty()) throw DimensionError("MAE needs equal non-empty inputs");
  double s = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k) s += std::abs(actual[k] - forecast[k]);
  return s / static_cast<double>(actual.size());
}

namespace detail {

inline void requireSameSchema(const FitResult& fit, const PanelData& data) {
  if (data.n != fit.n || data.m != fit.m) throw DimensionError("panel dimensions do not match the fit");
  if (!fit.subjects.empty() && data.subjects != fit.subjects) throw DimensionError("panel subjects do not match the fit");
  if (!fit.components.empty() && data.components != fit.components) {
    throw DimensionError("panel components do not match the fit");
  }
  for (const auto& name : fit.spec.predictorNames) {
    if (data.covariateIndex(name) < 0) throw DimensionError("panel lacks predictor '" + name + "'");
  }
}

inline double fixedMean(const FitResult& fit, const LatentLayout& layout, int index) {
  return fit.fixed[static_cast<std::size_t>(index - layout.interceptOffset)].mean;
}

}  // namespace detail

/// Forecast means for steps 1..horizon after the last time of `history`.
///
/// States follow the posterior-mean transition with zero innovations from the
/// terminal state means; future level effects are at their prior mean 0; the lagged
/// response covariate is fed the previous step's forecast and every other covariate
/// is held at its last observed value.
inline ForecastSet forecast(const FitResult& fit, const PanelData& history, int horizon) {
  if (horizon < 1) throw ConfigError("forecast horizon must be at least 1");
  if (!fit.diagnostics.converged) throw NonConvergenceError("refusing to forecast from a non-converged fit", 0.0);
  detail::requireSameSchema(fit, history);
  if (history.T != fit.T) throw DimensionError("history length does not match the fit");
  const int n = fit.n, m = fit.m, T = fit.T, p = fit.spec.p;
  const LatentLayout layout(fit.spec, n, m, T);
  if (fit.stateMean.size() != layout.stateDim) throw DimensionError("fit carries no state summaries");
  const std::vector<Matrix> phis = fit.posteriorMeanNatural().phis;

  // Lagged states, most recent first.
  std::vector<Vector> lags;
  for (int h = 0; h < p; ++h) lags.push_back(fit.stateMean.segment((T - 1 - h + p - 1) * m, m));
  std::vector<Vector> path;
  for (int l = 1; l <= horizon; ++l) {
    Vector next = Vector::Zero(m);
    for (int h = 0; h < p; ++h) next += phis[h] * lags[h];
    path.push_back(next);
    lags.insert(lags.begin(), next);
    lags.pop_back();
  }

  ForecastSet out;
  out.origin = T;
  out.horizon = horizon;
  out.n = n;
  out.m = m;
  out.values.assign(static_cast<std::size_t>(n) * m * horizon, 0.0);
  const auto& names = fit.spec.predictorNames;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const std::size_t last = history.index(i, j, T - 1);
      double base = 0.0;
      if (layout.interceptDim > 0) base += detail::fixedMean(fit, layout, layout.intercept(i, j));
      double prev = history.y[last];
      for (int l = 1; l <= horizon; ++l) {
        double eta = base + path[l - 1](j);
        for (std::size_t k = 0; k < names.size(); ++k) {
          const double x = names[k] == kLagResponseCovariate ? std::log(prev) : history.covariate(names[k])[last];
          eta += detail::fixedMean(fit, layout, layout.coefficient(static_cast<int>(k), j)) * x;
        }
        const double yhat = std::exp(eta);
        out.values[static_cast<std::size_t>((i * m + j) * horizon + (l - 1))] = yhat;
        prev = yhat;
      }
    }
  }
  return out;
}

/// FitResult at a single hyperparameter point: the latent mode and its Gaussian
/// marginals at theta, with natural-scale hyperparameters set from theta.
inline FitResult fitAtHyper(const LcmSpec& spec, const PanelData& data, const Vector& theta,
                            const LaplaceOptions& options = {}) {
  LaplaceEngine<GammaFamily> engine(spec, data, options);
  const HyperParams h = HyperParams::unpack(theta, spec, data.m);
  GaussianApprox a;
  const double lp = engine.logMarginalHyper(h, &a);
  const LatentLayout& layout = engine.layout();
  FitResult fit;
  fit.spec = spec;
  fit.n = data.n;
  fit.m = data.m;
  fit.T = data.T;
  fit.subjects = data.subjects;
  fit.components = data.components;
  fit.grid.points.push_back({theta, lp, 1.0});
  fit.grid.mode = theta;
  fit.grid.standardized = false;
  std::vector<int> indices;
  for (int k = layout.interceptOffset; k < layout.dim(); ++k) indices.push_back(k);
  for (int k = 0; k < layout.stateDim; ++k) indices.push_back(layout.stateOffset + k);
  const Vector var = engine.marginalVariances(h, a, indices);
  const auto fixedNames = fixedEffectNames(spec, layout, data);
  for (int k = 0; k < layout.fixedDim(); ++k) {
    fit.fixed.push_back({fixedNames[static_cast<std::size_t>(k)], a.mode(layout.interceptOffset + k), std::sqrt(var(k))});
  }
  fit.stateMean = a.mode.segment(layout.stateOffset, layout.stateDim);
  fit.stateSd = var.segment(layout.fixedDim(), layout.stateDim).cwiseSqrt();
  fit.hyper = hyperSummaries(fit.grid, spec, data.m);
  fit.diagnostics.converged = true;
  fit.diagnostics.logPosteriorAtMode = lp;
  fit.diagnostics.newtonIterations = a.iterations;
  fit.diagnostics.gradientNorm = a.gradNorm;
  return fit;
}

struct ForecastScore {
  double mape = 0.0;
  double mae = 0.0;
};

/// Scores steps 1..horizon of `f` against `future` times [offset, offset + horizon):
/// per series over the horizon, then a plain mean across subjects and components.
inline ForecastScore scoreForecast(const ForecastSet& f, const PanelData& future, int horizon, int offset = 0) {
  if (horizon < 1 || horizon > f.horizon) throw DimensionError("score horizon exceeds forecast horizon");
  if (future.n != f.n || future.m != f.m) throw DimensionError("holdout dimensions do not match the forecast");
  if (offset < 0 || offset + horizon > future.T) throw DimensionError("holdout is shorter than the horizon");
  ForecastScore s;
  for (int i = 0; i < f.n; ++i) {
    for (int j = 0; j < f.m; ++j) {
      std::vector<double> a, b;
      for (int l = 1; l <= horizon; ++l) {
        a.push_back(future.value(i, j, offset + l - 1));
        b.push_back(f.at(i, j, l));
      }
      s.mape += mape(a, b);
      s.mae += mae(a, b);
    }
  }
  s.mape /= f.n * f.m;
  s.mae /= f.n * f.m;
  return s;
}

struct NamedFit {
  std::string name;
  FitResult fit;
};

struct ComparisonRow {
  std::string model;
  int horizon = 0;
  double mape = 0.0;
  double mae = 0.0;
  std::string best;  ///< "", "mape", "mae" or "mape+mae"; empty for a single model
};

struct CompareOptions {
  std::vector<int> horizons{1, 5, 10};
  /// Rolling origins: forecasts from every origin in [holdoutStart, T - h], each with
  /// the latent field re-solved at the fit's hyperparameter mode on data up to the origin.
  bool rolling = false;
};

/// `data` holds the full series; the fits were estimated on times [0, holdoutStart).
inline std::vector<ComparisonRow> compareModels(const std::vector<NamedFit>& fits, const PanelData& data,
                                                int holdoutStart, const CompareOptions& opt = {}) {
  if (fits.empty()) throw ConfigError("need at least one fit to compare");
  if (opt.horizons.empty()) throw ConfigError("need at least one horizon");
  const int maxH = *std::max_element(opt.horizons.begin(), opt.horizons.end());
  if (*std::min_element(opt.horizons.begin(), opt.horizons.end()) < 1) throw ConfigError("horizons must be positive");
  if (holdoutStart < 2 || holdoutStart + maxH > data.T) {
    throw DimensionError("holdout window does not fit the panel for the requested horizons");
  }
  for (const auto& nf : fits) {
    detail::requireSameSchema(nf.fit, data);
    if (nf.fit.T != holdoutStart) throw DimensionError("fit '" + nf.name + "' was not estimated on the training window");
  }
  const PanelData training = data.slice(0, holdoutStart);
  const PanelData holdout = data.slice(holdoutStart, data.T);
  std::vector<ComparisonRow> rows;
  for (const auto& nf : fits) {
    const ForecastSet base = forecast(nf.fit, training, maxH);
    for (int h : opt.horizons) {
      ComparisonRow row;
      row.model = nf.name;
      row.horizon = h;
      if (!opt.rolling) {
        const ForecastScore s = scoreForecast(base, holdout, h);
        row.mape = s.mape;
        row.mae = s.mae;
      } else {
        int count = 0;
        for (int origin = holdoutStart; origin + h <= data.T; ++origin) {
          const PanelData hist = data.slice(0, origin);
          const ForecastSet f = origin == holdoutStart
                                    ? base
                                    : forecast(fitAtHyper(nf.fit.spec, hist, nf.fit.grid.mode), hist, h);
          const ForecastScore s = scoreForecast(f, data.slice(origin, data.T), h);
          row.mape += s.mape;
          row.mae += s.mae;
          ++count;
        }
        row.mape /= count;
        row.mae /= count;
      }
      rows.push_back(row);
    }
  }
  if (fits.size() > 1) {
    for (int h : opt.horizons) {
      double bestMape = std::numeric_limits<double>::infinity(), bestMae = bestMape;
      for (const auto& r : rows) {
        if (r.horizon != h) continue;
        bestMape = std::min(bestMape, r.mape);
        bestMae = std::min(bestMae, r.mae);
      }
      for (auto& r : rows) {
        if (r.horizon != h) continue;
        const bool a = r.mape == bestMape, b = r.mae == bestMae;
        r.best = a && b ? "mape+mae" : a ? "mape" : b ? "mae" : "";
      }
    }
  }
  return rows;
}

}  // namespace lcm
