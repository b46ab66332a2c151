#pragma once

// Maximization of noisy-free smooth objectives: BFGS on central-difference
// gradients, adaptive Nelder-Mead with restarts, and golden-section search.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "lcm/linalg.hpp"

namespace lcm {

struct NelderMeadOptions {
  double initialStep = 0.5;
  int maxEvaluations = 4000;
  double fTol = 1e-7;   ///< spread of simplex values
  double xTol = 1e-5;   ///< simplex diameter (infinity norm)
  int restarts = 2;     ///< fresh simplices built around the incumbent
};

struct OptimizeResult {
  Vector x;
  double value = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

/// Maximizes f; dimension-adaptive coefficients (reflection 1, expansion 1 + 2/d,
/// contraction 3/4 - 1/(2d), shrink 1 - 1/d).
inline OptimizeResult nelderMeadMaximize(const std::function<double(const Vector&)>& f,
                                         const Vector& x0, const NelderMeadOptions& opt = {}) {
  const int d = static_cast<int>(x0.size());
  OptimizeResult best;
  best.x = x0;
  auto eval = [&](const Vector& x) {
    ++best.evaluations;
    const double v = f(x);
    const double out = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    if (out > best.value) {
      best.value = out;
      best.x = x;
    }
    return out;
  };
  if (d == 0) {
    eval(x0);
    best.converged = true;
    return best;
  }
  const double alpha = 1.0;
  const double gamma = 1.0 + 2.0 / d;
  const double rho = 0.75 - 0.5 / d;
  const double sigma = 1.0 - 1.0 / d;

  eval(x0);
  for (int round = 0; round <= opt.restarts; ++round) {
    const double step = opt.initialStep / (1 << std::min(round, 4));
    std::vector<Vector> xs{best.x};
    std::vector<double> fs{best.value};
    for (int k = 0; k < d; ++k) {
      Vector v = best.x;
      v(k) += step;
      xs.push_back(v);
      fs.push_back(eval(v));
    }
    bool converged = false;
    while (best.evaluations < opt.maxEvaluations) {
      std::vector<int> order(d + 1);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] > fs[b]; });
      std::vector<Vector> sx;
      std::vector<double> sf;
      for (int i : order) {
        sx.push_back(xs[i]);
        sf.push_back(fs[i]);
      }
      xs.swap(sx);
      fs.swap(sf);
      double diameter = 0.0;
      for (int k = 1; k <= d; ++k) diameter = std::max(diameter, (xs[k] - xs[0]).cwiseAbs().maxCoeff());
      if (std::isfinite(fs[d]) && fs[0] - fs[d] <= opt.fTol * (1.0 + std::abs(fs[0])) &&
          diameter <= opt.xTol * 10.0) {
        converged = true;
        break;
      }
      if (diameter <= opt.xTol) {
        converged = std::isfinite(fs[d]);
        break;
      }
      Vector centroid = Vector::Zero(d);
      for (int k = 0; k < d; ++k) centroid += xs[k];
      centroid /= d;
      const Vector xr = centroid + alpha * (centroid - xs[d]);
      const double fr = eval(xr);
      if (fr > fs[0]) {
        const Vector xe = centroid + gamma * (xr - centroid);
        const double fe = eval(xe);
        if (fe > fr) {
          xs[d] = xe;
          fs[d] = fe;
        } else {
          xs[d] = xr;
          fs[d] = fr;
        }
      } else if (fr > fs[d - 1]) {
        xs[d] = xr;
        fs[d] = fr;
      } else {
        const bool outside = fr > fs[d];
        const Vector xc = outside ? Vector(centroid + rho * (xr - centroid))
                                  : Vector(centroid + rho * (xs[d] - centroid));
        const double fc = eval(xc);
        if (fc > (outside ? fr : fs[d])) {
          xs[d] = xc;
          fs[d] = fc;
        } else {
          for (int k = 1; k <= d; ++k) {
            xs[k] = xs[0] + sigma * (xs[k] - xs[0]);
            fs[k] = eval(xs[k]);
          }
        }
      }
    }
    best.converged = converged;
    if (best.evaluations >= opt.maxEvaluations) break;
  }
  return best;
}

struct QuasiNewtonOptions {
  double gradientStep = 1e-4;  ///< central-difference step
  double gradientTol = 1e-7;   ///< on max |g|, relative to 1 + |f|
  double maxStep = 1.0;        ///< cap on the infinity norm of a trial step
  int maxIterations = 200;
  int maxEvaluations = 20000;
};

/// BFGS maximization with an Armijo backtracking line search.
inline OptimizeResult bfgsMaximize(const std::function<double(const Vector&)>& f, const Vector& x0,
                                   const QuasiNewtonOptions& opt = {}) {
  const int d = static_cast<int>(x0.size());
  OptimizeResult out;
  auto phi = [&](const Vector& x) {
    ++out.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };
  auto gradient = [&](const Vector& x) {
    Vector g(d);
    for (int i = 0; i < d; ++i) {
      Vector a = x, b = x;
      a(i) += opt.gradientStep;
      b(i) -= opt.gradientStep;
      g(i) = (phi(a) - phi(b)) / (2.0 * opt.gradientStep);
    }
    return g;
  };
  Vector x = x0;
  double fx = phi(x);
  out.x = x;
  out.value = -fx;
  if (!std::isfinite(fx)) return out;
  if (d == 0) {
    out.converged = true;
    return out;
  }
  Vector g = gradient(x);
  Matrix hinv = Matrix::Identity(d, d);
  bool scaled = false;
  for (int iter = 0; iter < opt.maxIterations && out.evaluations < opt.maxEvaluations; ++iter) {
    if (!g.allFinite()) break;
    if (g.cwiseAbs().maxCoeff() <= opt.gradientTol * (1.0 + std::abs(fx))) {
      out.converged = true;
      break;
    }
    Vector p = -hinv * g;
    if (g.dot(p) >= 0.0) {
      hinv.setIdentity();
      p = -g;
    }
    const double pmax = p.cwiseAbs().maxCoeff();
    if (pmax > opt.maxStep) p *= opt.maxStep / pmax;
    const double slope = g.dot(p);
    double t = 1.0;
    bool accepted = false;
    Vector xn;
    double fn = 0.0;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      xn = x + t * p;
      fn = phi(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Line search exhausted: the gradient is at its noise floor.
      out.converged = g.cwiseAbs().maxCoeff() <= 1e3 * opt.gradientTol * (1.0 + std::abs(fx));
      break;
    }
    const Vector gn = gradient(xn);
    const Vector s = xn - x;
    const Vector y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double r = 1.0 / sy;
      const Vector hy = hinv * y;
      hinv += (r * r * y.dot(hy) + r) * s * s.transpose() - r * (hy * s.transpose() + s * hy.transpose());
      hinv = symmetrize(hinv);
    }
    x = xn;
    fx = fn;
    g = gn;
  }
  out.x = x;
  out.value = -fx;
  return out;
}

/// Golden-section maximization of a unimodal function on [a, b].
inline double goldenSectionMaximize(const std::function<double(double)>& f, double a, double b,
                                    double tol = 1e-9) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace lcm
