#pragma once

// Level correlated model: panel data, variant descriptors, latent layout, the joint
// latent prior precision, and the hyperparameter parameterization with its prior.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/latent_precision.hpp"
#include "lcm/linalg.hpp"

namespace lcm {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// n subjects x m components x T times. y and every covariate use the flat index
/// (i * m + j) * T + t.
struct PanelData {
  int n = 0;
  int m = 0;
  int T = 0;
  std::vector<std::string> subjects;
  std::vector<std::string> components;
  std::vector<double> y;
  std::vector<std::string> covariateNames;
  std::vector<std::vector<double>> covariates;

  static PanelData zeros(int n, int m, int T) {
    if (n < 1 || m < 1 || T < 1) throw DimensionError("panel dimensions must be positive");
    PanelData d;
    d.n = n;
    d.m = m;
    d.T = T;
    for (int i = 0; i < n; ++i) d.subjects.push_back("s" + std::to_string(i + 1));
    for (int j = 0; j < m; ++j) d.components.push_back("c" + std::to_string(j + 1));
    d.y.assign(static_cast<std::size_t>(n) * m * T, 1.0);
    return d;
  }

  std::size_t size() const { return y.size(); }

  std::size_t index(int i, int j, int t) const {
    if (i < 0 || i >= n || j < 0 || j >= m || t < 0 || t >= T) {
      throw DimensionError("panel index out of range");
    }
    return (static_cast<std::size_t>(i) * m + j) * T + t;
  }

  double value(int i, int j, int t) const { return y[index(i, j, t)]; }
  double& value(int i, int j, int t) { return y[index(i, j, t)]; }

  int covariateIndex(const std::string& name) const {
    for (std::size_t k = 0; k < covariateNames.size(); ++k) {
      if (covariateNames[k] == name) return static_cast<int>(k);
    }
    return -1;
  }

  const std::vector<double>& covariate(const std::string& name) const {
    const int k = covariateIndex(name);
    if (k < 0) throw DimensionError("unknown covariate '" + name + "'");
    return covariates[static_cast<std::size_t>(k)];
  }

  void addCovariate(const std::string& name, std::vector<double> values) {
    if (covariateIndex(name) >= 0) throw DimensionError("duplicate covariate '" + name + "'");
    if (values.size() != y.size()) throw DimensionError("covariate '" + name + "' is misaligned");
    covariateNames.push_back(name);
    covariates.push_back(std::move(values));
  }

  void validate() const {
    if (n < 1 || m < 1 || T < 1) throw DimensionError("panel dimensions must be positive");
    if (y.size() != static_cast<std::size_t>(n) * m * T) throw DimensionError("y has wrong size");
    if (subjects.size() != static_cast<std::size_t>(n) ||
        components.size() != static_cast<std::size_t>(m)) {
      throw DimensionError("label count does not match panel dimensions");
    }
    for (double v : y) {
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("responses must be finite and > 0");
    }
    if (covariateNames.size() != covariates.size()) throw DimensionError("covariate names misaligned");
    for (std::size_t k = 0; k < covariates.size(); ++k) {
      if (covariates[k].size() != y.size()) {
        throw DimensionError("covariate '" + covariateNames[k] + "' is misaligned");
      }
      for (double v : covariates[k]) {
        if (!std::isfinite(v)) {
          throw DomainError("covariate '" + covariateNames[k] + "' has a missing value");
        }
      }
    }
  }

  /// Time slice [t0, t1) of every subject and component.
  PanelData slice(int t0, int t1) const {
    if (t0 < 0 || t1 > T || t1 <= t0) throw DimensionError("invalid time slice");
    PanelData out;
    out.n = n;
    out.m = m;
    out.T = t1 - t0;
    out.subjects = subjects;
    out.components = components;
    out.covariateNames = covariateNames;
    out.covariates.assign(covariates.size(), {});
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int t = t0; t < t1; ++t) {
          const std::size_t o = index(i, j, t);
          out.y.push_back(y[o]);
          for (std::size_t k = 0; k < covariates.size(); ++k) out.covariates[k].push_back(covariates[k][o]);
        }
      }
    }
    return out;
  }
};

enum class Variant { LcmAr, LcmVar, Lcm1Ar, Lcm1Var, Lcm2Ar, Lcm2Var };
/// None is used by the simulation-study models, whose predictor has no intercept.
enum class InterceptScope { None, PerSubjectComponent, PerComponent };
enum class CoefficientScope { Shared, PerComponent };

inline std::string variantName(Variant v) {
  switch (v) {
    case Variant::LcmAr: return "lcm-ar";
    case Variant::LcmVar: return "lcm-var";
    case Variant::Lcm1Ar: return "lcm1-ar";
    case Variant::Lcm1Var: return "lcm1-var";
    case Variant::Lcm2Ar: return "lcm2-ar";
    case Variant::Lcm2Var: return "lcm2-var";
  }
  return "?";
}

inline Variant parseVariant(const std::string& s) {
  for (Variant v : {Variant::LcmAr, Variant::LcmVar, Variant::Lcm1Ar, Variant::Lcm1Var,
                    Variant::Lcm2Ar, Variant::Lcm2Var}) {
    if (variantName(v) == s) return v;
  }
  throw ConfigError("unknown model variant '" + s + "'");
}

inline std::string interceptScopeName(InterceptScope s) {
  switch (s) {
    case InterceptScope::None: return "none";
    case InterceptScope::PerSubjectComponent: return "subject-component";
    case InterceptScope::PerComponent: return "component";
  }
  return "?";
}

inline InterceptScope parseInterceptScope(const std::string& s) {
  for (auto v : {InterceptScope::None, InterceptScope::PerSubjectComponent, InterceptScope::PerComponent}) {
    if (interceptScopeName(v) == s) return v;
  }
  throw ConfigError("unknown intercept scope '" + s + "'");
}

struct PriorConfig {
  double tauShape = 0.01;
  double tauRate = 0.01;
  double wishartDf = 0.0;  ///< 0 means the default 2m + 1
  double fixedEffectPrecision = 0.001;
  double varCoeffMean = 0.0;
  double varCoeffVariance = 1.0;
  double statePrecisionShape = 1.0;
  double statePrecisionRate = 5e-5;
  double kappa = kDefaultKappa;

  double wishartDegrees(int m) const { return wishartDf > 0.0 ? wishartDf : 2.0 * m + 1.0; }

  void validate(int m) const {
    for (double v : {tauShape, tauRate, fixedEffectPrecision, varCoeffVariance,
                     statePrecisionShape, statePrecisionRate, kappa}) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("prior parameters must be positive");
    }
    if (!(wishartDegrees(m) > m - 1.0)) throw ConfigError("Wishart degrees of freedom must exceed m - 1");
  }

  /// tau ~ gamma(1, 0.1), used for the realized-volatility application.
  static PriorConfig volatility() {
    PriorConfig c;
    c.tauShape = 1.0;
    c.tauRate = 0.1;
    return c;
  }
};

struct LcmSpec {
  Variant variant = Variant::LcmAr;
  int p = 1;
  InterceptScope interceptScope = InterceptScope::None;
  CoefficientScope coefficientScope = CoefficientScope::Shared;
  std::vector<std::string> predictorNames;
  PriorConfig priors;

  static LcmSpec make(Variant v, int p = 1, std::vector<std::string> predictors = {}) {
    LcmSpec s;
    s.variant = v;
    s.p = p;
    s.predictorNames = std::move(predictors);
    switch (v) {
      case Variant::LcmAr:
      case Variant::LcmVar:
        s.interceptScope = InterceptScope::None;
        s.coefficientScope = CoefficientScope::Shared;
        break;
      case Variant::Lcm1Ar:
      case Variant::Lcm1Var:
        s.interceptScope = InterceptScope::PerSubjectComponent;
        s.coefficientScope = CoefficientScope::PerComponent;
        break;
      case Variant::Lcm2Ar:
      case Variant::Lcm2Var:
        s.interceptScope = InterceptScope::PerComponent;
        s.coefficientScope = CoefficientScope::PerComponent;
        break;
    }
    return s;
  }

  bool isVar() const {
    return variant == Variant::LcmVar || variant == Variant::Lcm1Var || variant == Variant::Lcm2Var;
  }

  void validate(int m) const {
    if (p < 1) throw ConfigError("lag order p must be at least 1");
    if ((variant == Variant::Lcm1Ar || variant == Variant::Lcm1Var) &&
        interceptScope != InterceptScope::PerSubjectComponent) {
      throw ConfigError("LCM1 variants need subject-and-component intercepts");
    }
    if ((variant == Variant::Lcm2Ar || variant == Variant::Lcm2Var) &&
        interceptScope != InterceptScope::PerComponent) {
      throw ConfigError("LCM2 variants need component intercepts");
    }
    priors.validate(m);
  }

  int numVarCoeffs(int m) const { return isVar() ? m * m * p : m * p; }
  int numCorrelations(int m) const { return m * (m - 1) / 2; }
  int numHyper(int m) const { return 1 + numVarCoeffs(m) + 2 * m + numCorrelations(m); }
};

/// Index map of the latent vector: [states | level effects | intercepts | coefficients].
///
/// For lag order p the state block holds x_{2-p}, ..., x_T (time-major), i.e. the
/// distinct coordinates of the stacked companion process.
struct LatentLayout {
  int n = 0, m = 0, T = 0, p = 1, numPredictors = 0;
  InterceptScope interceptScope = InterceptScope::None;
  CoefficientScope coefficientScope = CoefficientScope::Shared;
  int stateOffset = 0, stateDim = 0;
  int alphaOffset = 0, alphaDim = 0;
  int interceptOffset = 0, interceptDim = 0;
  int coefOffset = 0, coefDim = 0;

  LatentLayout() = default;
  LatentLayout(const LcmSpec& spec, int n_, int m_, int T_)
      : n(n_), m(m_), T(T_), p(spec.p), numPredictors(static_cast<int>(spec.predictorNames.size())),
        interceptScope(spec.interceptScope), coefficientScope(spec.coefficientScope) {
    if (n < 1 || m < 1 || T < 2) throw DimensionError("model needs n, m >= 1 and T >= 2");
    stateDim = m * (T + p - 1);
    alphaOffset = stateOffset + stateDim;
    alphaDim = n * m * T;
    interceptOffset = alphaOffset + alphaDim;
    interceptDim = interceptScope == InterceptScope::None ? 0
                   : interceptScope == InterceptScope::PerComponent ? m
                                                                   : n * m;
    coefOffset = interceptOffset + interceptDim;
    coefDim = coefficientScope == CoefficientScope::Shared ? numPredictors : numPredictors * m;
  }

  int dim() const { return coefOffset + coefDim; }
  int fixedDim() const { return interceptDim + coefDim; }

  /// State x_{j,t} for observed time t in [0, T); lags t in [1-p, 0) address the presample.
  int state(int j, int t) const { return stateOffset + (t + p - 1) * m + j; }
  int alpha(int i, int j, int t) const { return alphaOffset + (i * T + t) * m + j; }
  int intercept(int i, int j) const {
    switch (interceptScope) {
      case InterceptScope::None: return -1;
      case InterceptScope::PerComponent: return interceptOffset + j;
      case InterceptScope::PerSubjectComponent: return interceptOffset + i * m + j;
    }
    return -1;
  }
  int coefficient(int k, int j) const {
    return coefficientScope == CoefficientScope::Shared ? coefOffset + k : coefOffset + k * m + j;
  }
};

/// Internal (unconstrained) hyperparameters.
///
/// varCoeffs lists vec(Phi_h) column-major for h = 1..p (VAR), or the diagonals of
/// Phi_h (AR). zLevelCorrelations lists pairs (1,2), (1,3), ..., (m-1,m).
struct HyperParams {
  double logTau = 0.0;
  Vector varCoeffs;
  Vector logStatePrecisions;
  Vector logLevelPrecisions;
  Vector zLevelCorrelations;

  int size() const {
    return static_cast<int>(1 + varCoeffs.size() + logStatePrecisions.size() +
                            logLevelPrecisions.size() + zLevelCorrelations.size());
  }

  Vector pack() const {
    Vector out(size());
    int k = 0;
    out(k++) = logTau;
    for (const Vector* v : {&varCoeffs, &logStatePrecisions, &logLevelPrecisions, &zLevelCorrelations}) {
      out.segment(k, v->size()) = *v;
      k += static_cast<int>(v->size());
    }
    return out;
  }

  static HyperParams unpack(const Vector& v, const LcmSpec& spec, int m) {
    if (v.size() != spec.numHyper(m)) throw DimensionError("hyperparameter vector has wrong length");
    HyperParams h;
    int k = 0;
    h.logTau = v(k++);
    h.varCoeffs = v.segment(k, spec.numVarCoeffs(m));
    k += spec.numVarCoeffs(m);
    h.logStatePrecisions = v.segment(k, m);
    k += m;
    h.logLevelPrecisions = v.segment(k, m);
    k += m;
    h.zLevelCorrelations = v.segment(k, spec.numCorrelations(m));
    return h;
  }

  /// Appendix defaults: Phi entries 0.1, precisions 1, correlations 0, tau 1.
  static HyperParams initial(const LcmSpec& spec, int m) {
    HyperParams h;
    h.logTau = 0.0;
    h.varCoeffs = Vector::Constant(spec.numVarCoeffs(m), 0.1);
    h.logStatePrecisions = Vector::Zero(m);
    h.logLevelPrecisions = Vector::Zero(m);
    h.zLevelCorrelations = Vector::Zero(spec.numCorrelations(m));
    return h;
  }
};

/// Hyperparameters on the natural scale.
struct NaturalParams {
  double tau = 1.0;
  std::vector<Matrix> phis;
  Vector stateVariances;
  Vector levelVariances;
  Vector correlations;
};

inline int correlationIndex(int m, int j, int k) {
  if (j > k) std::swap(j, k);
  // Pairs in lexical order (0,1), (0,2), ..., (0,m-1), (1,2), ...
  return j * m - j * (j + 1) / 2 + (k - j - 1);
}

inline std::vector<Matrix> varMatrices(const HyperParams& h, const LcmSpec& spec, int m) {
  std::vector<Matrix> phis;
  int k = 0;
  for (int lag = 0; lag < spec.p; ++lag) {
    Matrix phi = Matrix::Zero(m, m);
    if (spec.isVar()) {
      for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) phi(r, c) = h.varCoeffs(k++);
    } else {
      for (int j = 0; j < m; ++j) phi(j, j) = h.varCoeffs(k++);
    }
    phis.push_back(std::move(phi));
  }
  return phis;
}

inline Matrix stateCovariance(const HyperParams& h) {
  return (-h.logStatePrecisions.array()).exp().matrix().asDiagonal();
}

inline Matrix correlationMatrix(const Vector& rho, int m) {
  Matrix r = Matrix::Identity(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) r(j, k) = r(k, j) = rho(correlationIndex(m, j, k));
  return r;
}

inline Matrix levelCovariance(const HyperParams& h) {
  const int m = static_cast<int>(h.logLevelPrecisions.size());
  const Vector sd = (-0.5 * h.logLevelPrecisions.array()).exp();
  const Vector rho = h.zLevelCorrelations.array().tanh();
  return sd.asDiagonal() * correlationMatrix(rho, m) * sd.asDiagonal();
}

inline bool isPositiveDefinite(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixLLT().diagonal().array() > 0.0).all();
}

inline bool isAdmissible(const HyperParams& h) {
  if (!h.pack().allFinite()) return false;
  return isPositiveDefinite(correlationMatrix(h.zLevelCorrelations.array().tanh(),
                                              static_cast<int>(h.logLevelPrecisions.size())));
}

inline NaturalParams fromInternalScale(const HyperParams& h, const LcmSpec& spec, int m) {
  NaturalParams out;
  out.tau = std::exp(h.logTau);
  out.phis = varMatrices(h, spec, m);
  out.stateVariances = (-h.logStatePrecisions.array()).exp();
  out.levelVariances = (-h.logLevelPrecisions.array()).exp();
  out.correlations = h.zLevelCorrelations.array().tanh();
  return out;
}

inline HyperParams toInternalScale(const NaturalParams& nat, const LcmSpec& spec, int m) {
  if (!(nat.tau > 0.0)) throw DomainError("tau must be positive");
  if (static_cast<int>(nat.phis.size()) != spec.p) throw DimensionError("need p transition matrices");
  if (nat.stateVariances.size() != m || nat.levelVariances.size() != m ||
      nat.correlations.size() != spec.numCorrelations(m)) {
    throw DimensionError("natural parameter sizes do not match m");
  }
  HyperParams h;
  h.logTau = std::log(nat.tau);
  h.varCoeffs.resize(spec.numVarCoeffs(m));
  int k = 0;
  for (const Matrix& phi : nat.phis) {
    if (phi.rows() != m || phi.cols() != m) throw DimensionError("transition must be m x m");
    if (spec.isVar()) {
      for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) h.varCoeffs(k++) = phi(r, c);
    } else {
      for (int j = 0; j < m; ++j) h.varCoeffs(k++) = phi(j, j);
    }
  }
  for (const Vector* v : {&nat.stateVariances, &nat.levelVariances}) {
    if (!((v->array() > 0.0).all())) throw DomainError("variances must be positive");
  }
  h.logStatePrecisions = -nat.stateVariances.array().log();
  h.logLevelPrecisions = -nat.levelVariances.array().log();
  h.zLevelCorrelations.resize(nat.correlations.size());
  for (int c = 0; c < nat.correlations.size(); ++c) {
    const double r = nat.correlations(c);
    if (!(std::abs(r) < 1.0)) throw DomainError("correlations must lie in (-1, 1)");
    h.zLevelCorrelations(c) = std::atanh(r);
  }
  return h;
}

/// Gamma(tau, tau / theta) log-density: mean theta, variance theta^2 / tau.
inline double gammaLogLikelihood(double y, double theta, double tau) {
  if (!(y > 0.0) || !(theta > 0.0) || !(tau > 0.0)) {
    throw DomainError("gamma log-likelihood needs y, theta, tau > 0");
  }
  return tau * std::log(tau) - std::lgamma(tau) - tau * std::log(theta) + (tau - 1.0) * std::log(y) -
         tau * y / theta;
}

/// Sparse map from the latent vector to the linear predictor of every observation.
inline SparseMatrix buildDesignMatrix(const LcmSpec& spec, const LatentLayout& layout,
                                      const PanelData& data) {
  std::vector<const std::vector<double>*> cov;
  for (const auto& name : spec.predictorNames) cov.push_back(&data.covariate(name));
  std::vector<Triplet> trips;
  trips.reserve(data.size() * (3 + cov.size()));
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.m; ++j) {
      for (int t = 0; t < data.T; ++t) {
        const int o = static_cast<int>(data.index(i, j, t));
        trips.emplace_back(o, layout.state(j, t), 1.0);
        trips.emplace_back(o, layout.alpha(i, j, t), 1.0);
        if (layout.interceptDim > 0) trips.emplace_back(o, layout.intercept(i, j), 1.0);
        for (std::size_t k = 0; k < cov.size(); ++k) {
          trips.emplace_back(o, layout.coefficient(static_cast<int>(k), j), (*cov[k])[o]);
        }
      }
    }
  }
  SparseMatrix a(static_cast<Eigen::Index>(data.size()), layout.dim());
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

inline double assembleLinearPredictor(const LcmSpec& spec, const Vector& latent,
                                      const LatentLayout& layout, const PanelData& data, int i,
                                      int j, int t) {
  if (latent.size() != layout.dim()) throw DimensionError("latent vector does not match layout");
  const std::size_t o = data.index(i, j, t);
  double eta = latent(layout.state(j, t)) + latent(layout.alpha(i, j, t));
  if (layout.interceptDim > 0) eta += latent(layout.intercept(i, j));
  for (std::size_t k = 0; k < spec.predictorNames.size(); ++k) {
    eta += latent(layout.coefficient(static_cast<int>(k), j)) * data.covariate(spec.predictorNames[k])[o];
  }
  return std::exp(eta);
}

/// Prior precision of the state block (x_{2-p}, ..., x_T).
inline SparseMatrix buildStatePrecision(const HyperParams& h, const LcmSpec& spec, int m, int T) {
  const Matrix w = stateCovariance(h);
  const auto phis = varMatrices(h, spec, m);
  if (spec.p == 1) {
    const BlockPrecision q = buildVar1Precision(phis[0], w, T, spec.priors.kappa);
    std::vector<Triplet> trips;
    q.appendTriplets(trips);
    SparseMatrix out(q.dim(), q.dim());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
  }
  return restrictToSupport(buildVarPPrecision(VarCoefficients(phis), w, T, spec.priors.kappa), m, spec.p);
}

inline double stateLogDeterminant(const HyperParams& h, const LcmSpec& spec, int m, int T) {
  return spec.p * m * std::log(spec.priors.kappa) + (T - 1) * h.logStatePrecisions.sum();
}

/// Block-diagonal joint prior precision over the latent layout (full symmetric pattern).
inline SparseMatrix buildJointPriorPrecision(const HyperParams& h, const LcmSpec& spec,
                                             const LatentLayout& layout) {
  const Matrix sigma = levelCovariance(h);
  if (!isPositiveDefinite(sigma)) throw NotPositiveDefiniteError("level covariance is not positive definite", 0);
  const Matrix sigmaInv = spdInverse(sigma, "level covariance");
  const SparseMatrix qs = buildStatePrecision(h, spec, layout.m, layout.T);
  std::vector<Triplet> trips;
  trips.reserve(qs.nonZeros() + static_cast<std::size_t>(layout.alphaDim) * layout.m + layout.fixedDim());
  for (int k = 0; k < qs.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(qs, k); it; ++it) {
      trips.emplace_back(layout.stateOffset + it.row(), layout.stateOffset + it.col(), it.value());
    }
  }
  const int m = layout.m;
  for (int b = 0; b < layout.n * layout.T; ++b) {
    const int base = layout.alphaOffset + b * m;
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) trips.emplace_back(base + r, base + c, sigmaInv(r, c));
  }
  for (int k = layout.interceptOffset; k < layout.dim(); ++k) {
    trips.emplace_back(k, k, spec.priors.fixedEffectPrecision);
  }
  SparseMatrix out(layout.dim(), layout.dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

/// log det of buildJointPriorPrecision, in closed form.
inline double jointPriorLogDeterminant(const HyperParams& h, const LcmSpec& spec,
                                       const LatentLayout& layout) {
  const Matrix sigma = levelCovariance(h);
  return stateLogDeterminant(h, spec, layout.m, layout.T) -
         static_cast<double>(layout.n) * layout.T * logDetSpd(sigma, "level covariance") +
         layout.fixedDim() * std::log(spec.priors.fixedEffectPrecision);
}

namespace detail {

inline double logMultivariateGamma(double a, int m) {
  double out = 0.25 * m * (m - 1) * std::log(std::numbers::pi);
  for (int j = 0; j < m; ++j) out += std::lgamma(a - 0.5 * j);
  return out;
}

}  // namespace detail

/// Wishart_m(r, I) log-density of a precision matrix Q.
inline double wishartLogDensity(const Matrix& q, double r) {
  const int m = static_cast<int>(q.rows());
  const double logDet = logDetSpd(q, "Wishart argument");
  return 0.5 * (r - m - 1.0) * logDet - 0.5 * q.trace() - 0.5 * r * m * std::log(2.0) -
         detail::logMultivariateGamma(0.5 * r, m);
}

/// log density of theta = log(lambda) when lambda ~ gamma(shape, rate).
inline double logGammaLogDensity(double theta, double shape, double rate) {
  return shape * theta - rate * std::exp(theta) + shape * std::log(rate) - std::lgamma(shape);
}

/// Jacobian log|dQ / d(log precisions, z)| for Q = Sigma^-1, Sigma = D R(tanh z) D.
inline double levelJacobianLogDeterminant(const HyperParams& h) {
  const int m = static_cast<int>(h.logLevelPrecisions.size());
  const Matrix sigma = levelCovariance(h);
  double out = -(m + 1.0) * logDetSpd(sigma, "level covariance");
  for (int j = 0; j < m; ++j) {
    const double logSd = -0.5 * h.logLevelPrecisions(j);
    out += (m - 1.0) * logSd + 2.0 * logSd;
  }
  for (int c = 0; c < h.zLevelCorrelations.size(); ++c) {
    const double rho = std::tanh(h.zLevelCorrelations(c));
    out += std::log1p(-rho * rho);
  }
  return out;
}

/// Log prior density of the internal hyperparameters, Jacobians included; -inf if Sigma
/// is not positive definite.
inline double logPriorHyper(const HyperParams& h, const PriorConfig& cfg) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!isAdmissible(h)) return kNegInf;
  const int m = static_cast<int>(h.logLevelPrecisions.size());
  double out = logGammaLogDensity(h.logTau, cfg.tauShape, cfg.tauRate);
  for (int c = 0; c < h.varCoeffs.size(); ++c) {
    const double d = h.varCoeffs(c) - cfg.varCoeffMean;
    out += -0.5 * std::log(2.0 * std::numbers::pi * cfg.varCoeffVariance) - 0.5 * d * d / cfg.varCoeffVariance;
  }
  for (int j = 0; j < h.logStatePrecisions.size(); ++j) {
    out += logGammaLogDensity(h.logStatePrecisions(j), cfg.statePrecisionShape, cfg.statePrecisionRate);
  }
  const Matrix sigma = levelCovariance(h);
  if (!isPositiveDefinite(sigma)) return kNegInf;
  out += wishartLogDensity(spdInverse(sigma, "level covariance"), cfg.wishartDegrees(m));
  out += levelJacobianLogDeterminant(h);
  return std::isfinite(out) ? out : kNegInf;
}

/// Parameter labels of the internal vector, in pack() order.
inline std::vector<std::string> hyperNames(const LcmSpec& spec, int m) {
  std::vector<std::string> names{"log_tau"};
  for (int lag = 1; lag <= spec.p; ++lag) {
    const std::string suffix = spec.p > 1 ? "_lag" + std::to_string(lag) : "";
    if (spec.isVar()) {
      for (int c = 1; c <= m; ++c)
        for (int r = 1; r <= m; ++r)
          names.push_back("phi_" + std::to_string(r) + std::to_string(c) + suffix);
    } else {
      for (int j = 1; j <= m; ++j) names.push_back("phi_" + std::to_string(j) + std::to_string(j) + suffix);
    }
  }
  for (int j = 1; j <= m; ++j) names.push_back("log_state_prec_" + std::to_string(j));
  for (int j = 1; j <= m; ++j) names.push_back("log_level_prec_" + std::to_string(j));
  for (int j = 1; j <= m; ++j)
    for (int k = j + 1; k <= m; ++k) names.push_back("z_rho_" + std::to_string(j) + std::to_string(k));
  return names;
}

/// Natural-scale labels in pack() order: tau, phi, state precisions, level precisions, rho.
inline std::vector<std::string> naturalHyperNames(const LcmSpec& spec, int m) {
  std::vector<std::string> names = hyperNames(spec, m);
  for (auto& s : names) {
    if (s == "log_tau") s = "tau";
    else if (s.rfind("log_", 0) == 0) s = s.substr(4);
    else if (s.rfind("z_", 0) == 0) s = s.substr(2);
  }
  return names;
}

/// Maps internal coordinate k of pack() to its natural scale.
inline double naturalTransform(const LcmSpec& spec, int m, int k, double v) {
  const int nPhi = spec.numVarCoeffs(m);
  if (k == 0) return std::exp(v);
  if (k <= nPhi) return v;
  if (k <= nPhi + 2 * m) return std::exp(v);
  return std::tanh(v);
}

inline std::vector<std::string> fixedEffectNames(const LcmSpec& spec, const LatentLayout& layout,
                                                 const PanelData& data) {
  std::vector<std::string> names(static_cast<std::size_t>(layout.fixedDim()));
  auto set = [&](int idx, std::string s) { names[static_cast<std::size_t>(idx - layout.interceptOffset)] = std::move(s); };
  if (layout.interceptScope == InterceptScope::PerComponent) {
    for (int j = 0; j < layout.m; ++j) set(layout.intercept(0, j), "intercept[" + data.components[j] + "]");
  } else if (layout.interceptScope == InterceptScope::PerSubjectComponent) {
    for (int i = 0; i < layout.n; ++i)
      for (int j = 0; j < layout.m; ++j)
        set(layout.intercept(i, j), "intercept[" + data.subjects[i] + "," + data.components[j] + "]");
  }
  for (std::size_t k = 0; k < spec.predictorNames.size(); ++k) {
    if (layout.coefficientScope == CoefficientScope::Shared) {
      set(layout.coefficient(static_cast<int>(k), 0), "beta[" + spec.predictorNames[k] + "]");
    } else {
      for (int j = 0; j < layout.m; ++j)
        set(layout.coefficient(static_cast<int>(k), j),
            "beta[" + spec.predictorNames[k] + "," + data.components[j] + "]");
    }
  }
  return names;
}

}  // namespace lcm
