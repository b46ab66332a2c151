#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lcm/latent_precision.hpp"

using namespace lcm;

namespace {

Matrix randomMatrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = u(rng);
  return a;
}

Matrix randomStationary(std::mt19937_64& rng, int m, double maxRadius = 0.9) {
  Matrix phi = randomMatrix(rng, m, m, 0.8);
  const double r = spectralRadius(phi);
  if (r > maxRadius) phi *= maxRadius / r;
  return phi;
}

Matrix randomSpd(std::mt19937_64& rng, int m) {
  Matrix a = randomMatrix(rng, m, m, 1.0);
  return a * a.transpose() + 0.5 * Matrix::Identity(m, m);
}

// Covariance of (x_1..x_T) from x_1 ~ N(0, I/kappa), x_t = Phi x_{t-1} + w_t.
Matrix var1RecursionCovariance(const Matrix& phi, const Matrix& w, int T, double kappa) {
  const int m = static_cast<int>(phi.rows());
  std::vector<Matrix> v(T);
  v[0] = Matrix::Identity(m, m) / kappa;
  for (int t = 1; t < T; ++t) v[t] = phi * v[t - 1] * phi.transpose() + w;
  Matrix cov(m * T, m * T);
  for (int s = 0; s < T; ++s) {
    Matrix power = Matrix::Identity(m, m);
    for (int t = s; t < T; ++t) {
      cov.block(t * m, s * m, m, m) = power * v[s];
      cov.block(s * m, t * m, m, m) = (power * v[s]).transpose();
      power = phi * power;
    }
  }
  return cov;
}

// Covariance of z = (x_{2-p}, ..., x_T) by writing z as a linear map of
// (x*_1, w_2, ..., w_T), with x*_1 ~ N(0, I/kappa).
Matrix stackedVarCovariance(const std::vector<Matrix>& phis, const Matrix& w, int T,
                            double kappa) {
  const int m = static_cast<int>(w.rows());
  const int p = static_cast<int>(phis.size());
  const int nz = m * (T + p - 1);
  const int ne = m * p + m * (T - 1);
  Matrix map = Matrix::Zero(nz, ne);
  // z block s corresponds to time s + 2 - p; x*_1 lists x_1, x_0, ..., x_{2-p}.
  for (int h = 0; h < p; ++h) {
    const int s = p - 1 - h;
    map.block(s * m, h * m, m, m).setIdentity();
  }
  for (int s = p; s < T + p - 1; ++s) {
    for (int h = 1; h <= p; ++h) {
      map.block(s * m, 0, m, ne) += phis[h - 1] * map.block((s - h) * m, 0, m, ne);
    }
    map.block(s * m, m * p + (s - p) * m, m, m) += Matrix::Identity(m, m);
  }
  Matrix d = Matrix::Zero(ne, ne);
  d.topLeftCorner(m * p, m * p) = Matrix::Identity(m * p, m * p) / kappa;
  for (int t = 0; t < T - 1; ++t) d.block(m * p + t * m, m * p + t * m, m, m) = w;
  return map * d * map.transpose();
}

// Stationary autocovariances of a VARMA through its truncated MA(infinity) weights.
Matrix varmaCovarianceByPsiWeights(const VarmaCoefficients& c, int T, int terms = 4000) {
  const int m = c.dim();
  std::vector<Matrix> psi(terms, Matrix::Zero(m, m));
  psi[0].setIdentity();
  for (int j = 1; j < terms; ++j) {
    for (int h = 1; h <= c.p() && h <= j; ++h) psi[j] += c.phis()[h - 1] * psi[j - h];
    if (j <= c.q()) psi[j] -= c.thetas()[j - 1];
  }
  std::vector<Matrix> gamma(T, Matrix::Zero(m, m));
  for (int h = 0; h < T; ++h) {
    for (int j = 0; j + h < terms; ++j) gamma[h] += psi[j + h] * c.sigmaW() * psi[j].transpose();
  }
  Matrix cov(m * T, m * T);
  for (int s = 0; s < T; ++s)
    for (int t = 0; t < T; ++t) {
      cov.block(t * m, s * m, m, m) = t >= s ? gamma[t - s] : Matrix(gamma[s - t].transpose());
    }
  return cov;
}

double maxAbs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Var1Precision, ZeroTransitionDecouples) {
  const BlockPrecision q =
      buildVar1Precision(Matrix::Zero(1, 1), Matrix::Identity(1, 1), 2, 0.01);
  Matrix expected(2, 2);
  expected << 0.01, 0.0, 0.0, 1.0;
  EXPECT_LT(maxAbs(q.toDense() - expected), 1e-15);
}

TEST(Var1Precision, UnitTransitionTwoSteps) {
  const BlockPrecision q =
      buildVar1Precision(Matrix::Ones(1, 1), Matrix::Identity(1, 1), 2, 0.01);
  Matrix expected(2, 2);
  expected << 1.01, -1.0, -1.0, 1.0;
  EXPECT_LT(maxAbs(q.toDense() - expected), 1e-15);
}

TEST(Var1Precision, MatchesRecursionCovarianceInverse) {
  std::mt19937_64 rng(11);
  for (int m : {1, 2, 3}) {
    for (int T : {2, 3, 5, 10}) {
      const Matrix phi = randomStationary(rng, m);
      const Matrix w = randomSpd(rng, m);
      const Matrix q = buildVar1Precision(phi, w, T, 0.01).toDense();
      const Matrix oracle = var1RecursionCovariance(phi, w, T, 0.01).inverse();
      EXPECT_LT(maxAbs(q - oracle), 1e-8) << "m=" << m << " T=" << T;
    }
  }
}

TEST(Var1Precision, ExactlySymmetricAndBanded) {
  std::mt19937_64 rng(3);
  const Matrix q = buildVar1Precision(randomStationary(rng, 3), randomSpd(rng, 3), 6).toDense();
  EXPECT_EQ(maxAbs(q - q.transpose()), 0.0);
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j)
      if (std::abs(i / 3 - j / 3) > 1) EXPECT_EQ(q(i, j), 0.0);
}

TEST(Var1Precision, Errors) {
  Matrix badW(1, 1);
  badW << -1.0;
  EXPECT_THROW(buildVar1Precision(Matrix::Zero(1, 1), badW, 3), NotPositiveDefiniteError);
  EXPECT_THROW(buildVar1Precision(Matrix::Zero(1, 1), Matrix::Identity(1, 1), 1),
               DimensionError);
  EXPECT_THROW(buildVar1Precision(Matrix::Zero(2, 2), Matrix::Identity(1, 1), 3),
               DimensionError);
}

TEST(CompanionForm, DepthOne) {
  std::mt19937_64 rng(5);
  const Matrix phi = randomStationary(rng, 2);
  const Matrix w = randomSpd(rng, 2);
  const CompanionForm cf = buildCompanionForm(VarCoefficients({phi}), w);
  EXPECT_EQ(maxAbs(cf.phiStar - phi), 0.0);
  EXPECT_EQ(maxAbs(cf.wStar - w), 0.0);
  EXPECT_LT(maxAbs(cf.wStarPlus - w.inverse()), 1e-12);
}

TEST(CompanionForm, ScalarVar2Layout) {
  Matrix p1(1, 1), p2(1, 1), w(1, 1);
  p1 << 0.5;
  p2 << 0.2;
  w << 2.0;
  const CompanionForm cf = buildCompanionForm(VarCoefficients({p1, p2}), w);
  Matrix phiStar(2, 2), wStar(2, 2), wPlus(2, 2);
  phiStar << 0.5, 0.2, 1.0, 0.0;
  wStar << 2.0, 0.0, 0.0, 0.0;
  wPlus << 0.5, 0.0, 0.0, 0.0;
  EXPECT_EQ(maxAbs(cf.phiStar - phiStar), 0.0);
  EXPECT_EQ(maxAbs(cf.wStar - wStar), 0.0);
  EXPECT_LT(maxAbs(cf.wStarPlus - wPlus), 1e-15);
}

TEST(CompanionForm, PenroseConditions) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 1 + trial % 3;
    const int p = 1 + trial % 4;
    std::vector<Matrix> phis;
    for (int h = 0; h < p; ++h) phis.push_back(randomMatrix(rng, m, m, 0.3));
    const CompanionForm cf = buildCompanionForm(VarCoefficients(phis), randomSpd(rng, m));
    const Matrix& a = cf.wStar;
    const Matrix& g = cf.wStarPlus;
    EXPECT_LT(maxAbs(a * g * a - a), 1e-10);
    EXPECT_LT(maxAbs(g * a * g - g), 1e-10);
    EXPECT_LT(maxAbs((a * g).transpose() - a * g), 1e-10);
    EXPECT_LT(maxAbs((g * a).transpose() - g * a), 1e-10);
    // Agrees with an eigen-decomposition pseudo-inverse.
    EXPECT_LT(maxAbs(g - pseudoInverseSymmetric(a)), 1e-10);
  }
}

TEST(CompanionForm, MismatchedBlocks) {
  EXPECT_THROW(VarCoefficients({Matrix::Zero(2, 2), Matrix::Zero(1, 1)}), DimensionError);
  EXPECT_THROW(VarCoefficients(std::vector<Matrix>{}), DimensionError);
  EXPECT_THROW(buildCompanionForm(VarCoefficients({Matrix::Zero(2, 2)}), Matrix::Identity(3, 3)),
               DimensionError);
}

TEST(VarPPrecision, DepthOneIsBitIdentical) {
  std::mt19937_64 rng(21);
  for (int m : {1, 2, 3}) {
    const Matrix phi = randomStationary(rng, m);
    const Matrix w = randomSpd(rng, m);
    const Matrix a = buildVar1Precision(phi, w, 7, 0.01).toDense();
    const Matrix b = buildVarPPrecision(VarCoefficients({phi}), w, 7, 0.01).toDense();
    EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * a.size()));
  }
}

TEST(VarPPrecision, SupportPrecisionMatchesStackedCovariance) {
  std::mt19937_64 rng(4);
  Matrix p1(1, 1), p2(1, 1);
  p1 << 0.5;
  p2 << 0.2;
  const VarCoefficients scalar({p1, p2});
  const Matrix w1 = Matrix::Identity(1, 1);
  const Matrix q1 = Matrix(restrictToSupport(buildVarPPrecision(scalar, w1, 4, 0.01), 1, 2));
  EXPECT_LT(maxAbs(q1 - stackedVarCovariance(scalar.phis(), w1, 4, 0.01).inverse()), 1e-8);

  for (int m : {1, 2}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Matrix> phis{randomMatrix(rng, m, m, 0.4), randomMatrix(rng, m, m, 0.3)};
      const Matrix w = randomSpd(rng, m);
      const VarCoefficients c(phis);
      const BlockPrecision qStar = buildVarPPrecision(c, w, 5, 0.01);
      const Matrix q = Matrix(restrictToSupport(qStar, m, 2));
      const Matrix oracle = stackedVarCovariance(phis, w, 5, 0.01).inverse();
      EXPECT_LT(maxAbs(q - oracle), 1e-6);
      const double logDet = supportPrecisionLogDeterminant(w, 2, 5, 0.01);
      EXPECT_NEAR(logDet, std::log(oracle.determinant()), 1e-8);
    }
  }
}

TEST(VarPPrecision, PositiveSemiDefinite) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 1 + trial % 2;
    std::vector<Matrix> phis{randomMatrix(rng, m, m, 0.4), randomMatrix(rng, m, m, 0.3),
                              randomMatrix(rng, m, m, 0.2)};
    const Matrix q = buildVarPPrecision(VarCoefficients(phis), randomSpd(rng, m), 6).toDense();
    EXPECT_EQ(maxAbs(q - q.transpose()), 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * eig.eigenvalues().maxCoeff());
  }
}

TEST(Stationarity, ScalarCases) {
  Matrix a(1, 1);
  a << 0.8;
  auto r = checkStationarity(VarCoefficients({a}));
  EXPECT_TRUE(r.stationary);
  EXPECT_NEAR(r.spectralRadius, 0.8, 1e-14);
  a << 1.0;
  r = checkStationarity(VarCoefficients({a}));
  EXPECT_FALSE(r.stationary);
  EXPECT_NEAR(r.spectralRadius, 1.0, 1e-14);
}

TEST(Stationarity, TableTwoTransition) {
  Matrix phi(3, 3);
  phi << 0.5, 0, 0.3, 0.6, 0.1, 0.5, 0.1, 0, 0.8;
  const auto r = checkStationarity(VarCoefficients({phi}));
  EXPECT_TRUE(r.stationary);
  // Column 2 is zero apart from the diagonal, so 0.1 is an eigenvalue; the other two
  // solve l^2 - 1.3 l + 0.37 = 0.
  const double disc = std::sqrt(1.3 * 1.3 - 4 * 0.37);
  EXPECT_NEAR(r.spectralRadius, (1.3 + disc) / 2.0, 1e-12);
}

TEST(Stationarity, AgreesWithDeterminantRoots) {
  std::mt19937_64 rng(99);
  auto rootsOutside = [](double c0, double c1, double c2) {
    // c0 + c1 z + c2 z^2 = 0; all roots must lie outside the unit circle.
    if (std::abs(c2) < 1e-300) return std::abs(c1) < 1e-300 || std::abs(c0 / c1) > 1.0;
    const std::complex<double> disc = std::sqrt(std::complex<double>(c1 * c1 - 4 * c0 * c2));
    const std::complex<double> z1 = (-c1 + disc) / (2 * c2);
    const std::complex<double> z2 = (-c1 - disc) / (2 * c2);
    return std::abs(z1) > 1.0 && std::abs(z2) > 1.0;
  };
  auto minRootModulus = [](double c0, double c1, double c2) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(c1 * c1 - 4 * c0 * c2));
    return std::min(std::abs((-c1 + disc) / (2 * c2)), std::abs((-c1 - disc) / (2 * c2)));
  };
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    // Scalar AR(2): 1 - phi1 z - phi2 z^2.
    const Matrix p1 = randomMatrix(rng, 1, 1, 1.5);
    const Matrix p2 = randomMatrix(rng, 1, 1, 1.0);
    if (std::abs(minRootModulus(1.0, -p1(0, 0), -p2(0, 0)) - 1.0) > 1e-6) {
      EXPECT_EQ(checkStationarity(VarCoefficients({p1, p2})).stationary,
                rootsOutside(1.0, -p1(0, 0), -p2(0, 0)));
      ++checked;
    }
    // Bivariate VAR(1): det(I - Phi z) = 1 - tr(Phi) z + det(Phi) z^2.
    const Matrix phi = randomMatrix(rng, 2, 2, 1.0);
    const double tr = phi.trace(), det = phi.determinant();
    if (std::abs(det) > 1e-9 && std::abs(minRootModulus(1.0, -tr, det) - 1.0) > 1e-6) {
      EXPECT_EQ(checkStationarity(VarCoefficients({phi})).stationary,
                rootsOutside(1.0, -tr, det));
      ++checked;
    }
  }
  EXPECT_GT(checked, 150);
}

TEST(VarmaPrecision, PureVar1MatchesStationaryCovariance) {
  Matrix phi(1, 1), s(1, 1);
  phi << 0.6;
  s << 0.7;
  const VarmaCoefficients c({phi}, {}, s);
  const Matrix q = buildVarmaPrecision(c, 3);
  const double g0 = 0.7 / (1 - 0.36);
  Matrix cov(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov(i, j) = g0 * std::pow(0.6, std::abs(i - j));
  EXPECT_LT(maxAbs(q - cov.inverse()), 1e-8);
}

TEST(VarmaPrecision, Ma1Toeplitz) {
  for (double theta : {0.4, -0.7}) {
    for (int T : {1, 2, 3, 5}) {
      Matrix th(1, 1), s(1, 1);
      th << theta;
      s << 1.3;
      const Matrix q = buildVarmaPrecision(VarmaCoefficients({}, {th}, s), T);
      Matrix cov = Matrix::Zero(T, T);
      for (int i = 0; i < T; ++i) {
        cov(i, i) = 1.3 * (1 + theta * theta);
        if (i + 1 < T) cov(i, i + 1) = cov(i + 1, i) = -1.3 * theta;
      }
      const Matrix oracle = cov.inverse();
      EXPECT_LT(maxAbs(q - oracle) / maxAbs(oracle), 1e-10) << theta << " " << T;
    }
  }
}

TEST(VarmaPrecision, Arma11ClosedForm) {
  for (auto [phi, theta] : {std::pair{0.5, 0.3}, std::pair{-0.4, 0.6}, std::pair{0.8, -0.5}}) {
    Matrix ph(1, 1), th(1, 1), s(1, 1);
    ph << phi;
    th << theta;
    s << 0.9;
    const int T = 5;
    const double g0 = 0.9 * (1 - 2 * phi * theta + theta * theta) / (1 - phi * phi);
    const double g1 = 0.9 * (1 - phi * theta) * (phi - theta) / (1 - phi * phi);
    Matrix cov(T, T);
    for (int i = 0; i < T; ++i)
      for (int j = 0; j < T; ++j) {
        const int h = std::abs(i - j);
        cov(i, j) = h == 0 ? g0 : g1 * std::pow(phi, h - 1);
      }
    const Matrix q = buildVarmaPrecision(VarmaCoefficients({ph}, {th}, s), T);
    const Matrix oracle = cov.inverse();
    EXPECT_LT(maxAbs(q - oracle) / maxAbs(oracle), 1e-10);
  }
}

TEST(VarmaPrecision, MultivariateMatchesPsiWeightCovariance) {
  std::mt19937_64 rng(17);
  for (auto [p, q] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 2}, std::pair{0, 2}}) {
    std::vector<Matrix> phis, thetas;
    for (int h = 0; h < p; ++h) phis.push_back(randomMatrix(rng, 2, 2, 0.3));
    for (int h = 0; h < q; ++h) thetas.push_back(randomMatrix(rng, 2, 2, 0.3));
    const VarmaCoefficients c(phis, thetas, randomSpd(rng, 2));
    const int T = 4;
    const Matrix oracle = varmaCovarianceByPsiWeights(c, T).inverse();
    const Matrix prec = buildVarmaPrecision(c, T);
    EXPECT_LT(maxAbs(prec - oracle) / maxAbs(oracle), 1e-8) << p << "," << q;
    EXPECT_EQ(maxAbs(prec - prec.transpose()), 0.0);
  }
}

TEST(VarmaPrecision, Errors) {
  Matrix one(1, 1), s(1, 1);
  one << 1.0;
  s << 1.0;
  EXPECT_THROW(buildVarmaPrecision(VarmaCoefficients({one}, {}, s), 3), StationarityError);
  EXPECT_THROW(buildVarmaPrecision(VarmaCoefficients({}, {one}, s), 3), StationarityError);
  Matrix half(1, 1);
  half << 0.5;
  // Common AR and MA factor: the presample covariance is singular.
  EXPECT_THROW(buildVarmaPrecision(VarmaCoefficients({half}, {half}, s), 3), NumericError);
  EXPECT_THROW(VarmaCoefficients({}, {}, s), DimensionError);
  Matrix neg(1, 1);
  neg << -1.0;
  EXPECT_THROW(VarmaCoefficients({half}, {}, neg), NotPositiveDefiniteError);
}

TEST(BlockCholesky, IdentityAndDiagonal) {
  const BlockPrecision eye({Matrix::Identity(2, 2)}, {});
  const BlockCholesky c1(eye);
  EXPECT_EQ(maxAbs(c1.toDenseFactor() - Matrix::Identity(2, 2)), 0.0);
  EXPECT_EQ(c1.logDeterminant(), 0.0);
  Matrix d(2, 2);
  d << 4, 0, 0, 9;
  const BlockCholesky c2(BlockPrecision({d}, {}));
  Matrix l(2, 2);
  l << 2, 0, 0, 3;
  EXPECT_LT(maxAbs(c2.toDenseFactor() - l), 1e-15);
  EXPECT_NEAR(c2.logDeterminant(), std::log(36.0), 1e-14);
}

TEST(BlockCholesky, ReconstructsAndSolves) {
  std::mt19937_64 rng(31);
  for (int k : {1, 2, 4}) {
    const BlockPrecision q = buildVar1Precision(randomStationary(rng, k), randomSpd(rng, k), 9, 0.3);
    const BlockCholesky chol(q);
    const Matrix dense = q.toDense();
    const Matrix l = chol.toDenseFactor();
    EXPECT_LT((l * l.transpose() - dense).norm() / dense.norm(), 1e-10);
    const Vector b = Vector::LinSpaced(dense.rows(), -1.0, 2.0);
    EXPECT_LT((chol.solve(b) - dense.ldlt().solve(b)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(chol.logDeterminant(), std::log(dense.determinant()), 1e-9);
  }
}

TEST(BlockCholesky, ReportsFailingBlock) {
  Matrix neg(1, 1);
  neg << -1.0;
  const BlockPrecision q({Matrix::Identity(1, 1), Matrix::Identity(1, 1), neg},
                         {Matrix::Zero(1, 1), Matrix::Zero(1, 1)});
  try {
    BlockCholesky chol(q);
    FAIL();
  } catch (const NotPositiveDefiniteError& e) {
    EXPECT_EQ(e.block(), 2);
  }
}

TEST(LogDensityLatent, Examples) {
  const BlockPrecision eye({Matrix::Identity(3, 3)}, {});
  EXPECT_NEAR(logDensityLatent(Vector::Zero(3), eye), -1.5 * std::log(2 * std::numbers::pi),
              1e-14);
  Matrix four(1, 1);
  four << 4.0;
  Vector x(1);
  x << 1.0;
  EXPECT_NEAR(logDensityLatent(x, BlockPrecision({four}, {})),
              -0.5 * std::log(2 * std::numbers::pi) + 0.5 * std::log(4.0) - 2.0, 1e-14);
  EXPECT_THROW(logDensityLatent(Vector::Zero(2), eye), DimensionError);
}

TEST(LogDensityLatent, MatchesDenseEvaluation) {
  std::mt19937_64 rng(41);
  const BlockPrecision q = buildVar1Precision(randomStationary(rng, 2), randomSpd(rng, 2), 5, 0.5);
  const Matrix dense = q.toDense();
  const Vector x = randomMatrix(rng, 10, 1, 1.0);
  const double expected = -5.0 * std::log(2 * std::numbers::pi) +
                          0.5 * std::log(dense.determinant()) - 0.5 * x.dot(dense * x);
  EXPECT_NEAR(logDensityLatent(x, q), expected, 1e-10);
}

TEST(LogDensityLatent, SingularCompanionUsesPseudoDeterminant) {
  Matrix p1(1, 1), p2(1, 1);
  p1 << 0.5;
  p2 << 0.2;
  const BlockPrecision q = buildVarPPrecision(VarCoefficients({p1, p2}), Matrix::Identity(1, 1), 4);
  const Matrix dense = q.toDense();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(dense);
  double logPdet = 0.0;
  int rank = 0;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()(i) > 1e-10 * eig.eigenvalues().maxCoeff()) {
      logPdet += std::log(eig.eigenvalues()(i));
      ++rank;
    }
  }
  EXPECT_EQ(rank, 5);  // 2 * 4 stacked coordinates, 3 redundant copies
  const Vector x = Vector::LinSpaced(8, -1.0, 1.0);
  EXPECT_NEAR(logDensityLatent(x, q),
              -0.5 * rank * std::log(2 * std::numbers::pi) + 0.5 * logPdet - 0.5 * x.dot(dense * x),
              1e-9);
}

TEST(LogDensityLatent, MonteCarloEntropy) {
  std::mt19937_64 rng(52);
  const BlockPrecision q = buildVar1Precision(randomStationary(rng, 2), randomSpd(rng, 2), 3, 1.0);
  const Matrix cov = q.toDense().inverse();
  const Matrix l = cov.llt().matrixL();
  std::normal_distribution<double> z;
  const int draws = 20000;
  double sum = 0.0, sumSq = 0.0;
  for (int d = 0; d < draws; ++d) {
    Vector e(6);
    for (int i = 0; i < 6; ++i) e(i) = z(rng);
    const double v = logDensityLatent(l * e, q);
    sum += v;
    sumSq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sumSq / draws - mean * mean) / draws);
  const double negEntropy = -3.0 * std::log(2 * std::numbers::pi) +
                            0.5 * std::log(q.toDense().determinant()) - 3.0;
  EXPECT_LT(std::abs(mean - negEntropy), 3.0 * se);
}
