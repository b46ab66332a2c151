#include <gtest/gtest.h>

#include <cmath>

#include "lcm/optimize.hpp"

using namespace lcm;

namespace {

// Concave quadratic with maximum at c.
double quadratic(const Vector& x, const Vector& c, const Matrix& A) {
  const Vector d = x - c;
  return -0.5 * d.dot(A * d) + 3.0;
}

Matrix spd3() {
  Matrix a(3, 3);
  a << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  return a;
}

}  // namespace

TEST(NelderMead, FindsQuadraticMaximum) {
  Vector c(3);
  c << 1.0, -2.0, 0.5;
  const Matrix a = spd3();
  const auto r = nelderMeadMaximize([&](const Vector& x) { return quadratic(x, c, a); }, Vector::Zero(3));
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.x - c).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_NEAR(r.value, 3.0, 1e-6);
}

TEST(NelderMead, RosenbrockWithinBudget) {
  auto rosen = [](const Vector& x) { return -(100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2)); };
  NelderMeadOptions o;
  o.fTol = 1e-12;
  o.xTol = 1e-8;
  const auto r = nelderMeadMaximize(rosen, Vector::Constant(2, -1.2), o);
  EXPECT_LT((r.x - Vector::Ones(2)).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LE(r.evaluations, o.maxEvaluations);
}

TEST(NelderMead, IgnoresInfeasibleRegion) {
  // -inf outside x > 0; maximum at x = 2
  auto f = [](const Vector& x) {
    return x(0) > 0 ? -std::pow(std::log(x(0)) - std::log(2.0), 2) : -std::numeric_limits<double>::infinity();
  };
  const auto r = nelderMeadMaximize(f, Vector::Constant(1, 0.3));
  EXPECT_NEAR(r.x(0), 2.0, 1e-3);
}

TEST(Bfgs, FindsQuadraticMaximum) {
  Vector c(3);
  c << 0.3, 2.0, -1.0;
  const Matrix a = spd3();
  const auto r = bfgsMaximize([&](const Vector& x) { return quadratic(x, c, a); }, Vector::Zero(3));
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.x - c).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Bfgs, Rosenbrock) {
  auto rosen = [](const Vector& x) { return -(100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2)); };
  const auto r = bfgsMaximize(rosen, Vector::Constant(2, -1.2));
  EXPECT_LT((r.x - Vector::Ones(2)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Bfgs, RespectsEvaluationBudget) {
  auto rosen = [](const Vector& x) { return -(100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2)); };
  QuasiNewtonOptions o;
  o.maxEvaluations = 30;
  const auto r = bfgsMaximize(rosen, Vector::Constant(2, -1.2), o);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evaluations, 30 + 50);
}

TEST(Bfgs, Deterministic) {
  auto f = [](const Vector& x) { return -std::cosh(x(0) - 1) - x(1) * x(1) + 0.1 * std::sin(x(0) * x(1)); };
  const auto a = bfgsMaximize(f, Vector::Constant(2, 2.0));
  const auto b = bfgsMaximize(f, Vector::Constant(2, 2.0));
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(GoldenSection, OneDimensional) {
  EXPECT_NEAR(goldenSectionMaximize([](double x) { return -(x - 0.7) * (x - 0.7); }, -3, 5), 0.7, 1e-8);
  EXPECT_NEAR(goldenSectionMaximize([](double x) { return std::log(x) - x / 3.0; }, 0.1, 10), 3.0, 1e-7);
}
