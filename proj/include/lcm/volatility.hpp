#pragma once

// Realized-volatility measures from intraday returns and summary statistics of
// daily series.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lcm/errors.hpp"

namespace lcm {

inline std::vector<double> intradayReturns(const std::vector<double>& prices) {
  if (prices.size() < 2) throw DimensionError("need at least two prices");
  for (double p : prices) {
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("prices must be finite and positive");
  }
  std::vector<double> out(prices.size() - 1);
  for (std::size_t j = 1; j < prices.size(); ++j) out[j - 1] = std::log(prices[j]) - std::log(prices[j - 1]);
  return out;
}

inline double realizedVariance(const std::vector<double>& r) {
  if (r.empty()) throw DimensionError("need at least one return");
  double out = 0.0;
  for (double v : r) out += v * v;
  return out;
}

/// Sum of |r_j| |r_{j-1}|; its expectation is (2 / pi) times the integrated variance.
inline double bipowerVariationRaw(const std::vector<double>& r) {
  if (r.size() < 2) throw DimensionError("bipower variation needs at least two returns");
  double out = 0.0;
  for (std::size_t j = 1; j < r.size(); ++j) out += std::abs(r[j]) * std::abs(r[j - 1]);
  return out;
}

/// (pi / 2) times the raw sum, so that it estimates the integrated variance.
inline double bipowerVariation(const std::vector<double>& r) {
  return 0.5 * std::numbers::pi * bipowerVariationRaw(r);
}

/// pi / (6 - 4 sqrt 3 + pi), about 1.41944.
inline double medRvConstant() {
  return std::numbers::pi / (6.0 - 4.0 * std::sqrt(3.0) + std::numbers::pi);
}

inline double medRV(const std::vector<double>& r) {
  const std::size_t M = r.size();
  if (M < 3) throw DimensionError("MedRV needs at least three returns");
  double sum = 0.0;
  for (std::size_t j = 1; j + 1 < M; ++j) {
    double a = std::abs(r[j - 1]), b = std::abs(r[j]), c = std::abs(r[j + 1]);
    const double med = std::max(std::min(a, b), std::min(std::max(a, b), c));
    sum += med * med;
  }
  return medRvConstant() * static_cast<double>(M) / static_cast<double>(M - 2) * sum;
}

inline double parzenKernel(double x) {
  x = std::abs(x);
  if (x <= 0.5) return 1.0 - 6.0 * x * x + 6.0 * x * x * x;
  if (x <= 1.0) return 2.0 * (1.0 - x) * (1.0 - x) * (1.0 - x);
  return 0.0;
}

/// ceil(sqrt(M)); a convention, the bandwidth is configurable.
inline int defaultBandwidth(std::size_t M) {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(M))));
}

inline double realizedAutocovariance(const std::vector<double>& r, int h) {
  double out = 0.0;
  for (std::size_t i = static_cast<std::size_t>(h); i < r.size(); ++i) out += r[i] * r[i - h];
  return out;
}

/// sum_{h=-H..H} k(h / (H + 1)) gamma_h with Parzen weights.
inline double realizedKernel(const std::vector<double>& r, int H) {
  if (r.empty()) throw DimensionError("need at least one return");
  if (H < 0 || static_cast<std::size_t>(H) >= r.size()) {
    throw DimensionError("realized kernel bandwidth must satisfy 0 <= H < M");
  }
  double out = realizedAutocovariance(r, 0);
  for (int h = 1; h <= H; ++h) {
    out += 2.0 * parzenKernel(static_cast<double>(h) / (H + 1)) * realizedAutocovariance(r, h);
  }
  return out;
}

struct JumpSplit {
  double jump = 0.0;
  double continuous = 0.0;
};

inline JumpSplit jumpAndContinuous(double rv, double bpv) {
  if (rv < 0.0 || bpv < 0.0) throw DomainError("rv and bpv must be non-negative");
  JumpSplit out;
  out.jump = std::max(rv - bpv, 0.0);
  out.continuous = rv - out.jump;
  return out;
}

struct DailyMeasures {
  std::string symbol;
  std::string date;
  double medrv = 0.0, rk = 0.0, bpv = 0.0, rv = 0.0, jump = 0.0, cont = 0.0;
  bool negativeKernel = false;
};

/// H < 0 selects the default bandwidth.
inline DailyMeasures computeDailyMeasures(const std::vector<double>& returns, std::string symbol,
                                          std::string date, int H = -1) {
  DailyMeasures d;
  d.symbol = std::move(symbol);
  d.date = std::move(date);
  const int bw = H < 0 ? std::min<int>(defaultBandwidth(returns.size()), static_cast<int>(returns.size()) - 1) : H;
  d.medrv = medRV(returns);
  d.rk = realizedKernel(returns, bw);
  d.bpv = bipowerVariation(returns);
  d.rv = realizedVariance(returns);
  const JumpSplit js = jumpAndContinuous(d.rv, d.bpv);
  d.jump = js.jump;
  d.cont = js.continuous;
  d.negativeKernel = d.rk < 0.0;
  return d;
}

/// Kendall tau-b: (C - D) / sqrt((n0 - tx)(n0 - ty)); equals (C - D) / C(n, 2) without ties.
inline double kendallTau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("Kendall tau needs equal lengths");
  if (x.size() < 2) throw DimensionError("Kendall tau needs at least two points");
  const std::size_t n = x.size();
  double concordant = 0.0, discordant = 0.0, tiesX = 0.0, tiesY = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) tiesX += 1.0;
      if (dy == 0.0) tiesY += 1.0;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0)) concordant += 1.0;
      else discordant += 1.0;
    }
  }
  const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double denom = std::sqrt((n0 - tiesX) * (n0 - tiesY));
  if (denom == 0.0) throw DomainError("Kendall tau undefined for a constant series");
  return (concordant - discordant) / denom;
}

struct DescriptiveStats {
  double mean = 0.0;
  double sd = 0.0;        ///< n - 1 denominator
  double skewness = 0.0;  ///< m3 / m2^1.5
  double kurtosis = 0.0;  ///< m4 / m2^2, not excess
  double acf1 = 0.0;
};

inline DescriptiveStats descriptiveStats(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) throw DimensionError("descriptive statistics need at least two values");
  DescriptiveStats s;
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, lag = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = x[t] - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    if (t + 1 < n) lag += d * (x[t + 1] - s.mean);
  }
  s.sd = std::sqrt(m2 / static_cast<double>(n - 1));
  if (m2 == 0.0) throw DomainError("skewness and kurtosis are undefined for a constant series");
  const double c2 = m2 / n, c3 = m3 / n, c4 = m4 / n;
  s.skewness = c3 / std::pow(c2, 1.5);
  s.kurtosis = c4 / (c2 * c2);
  s.acf1 = lag / m2;
  return s;
}

}  // namespace lcm
