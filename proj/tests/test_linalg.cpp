#include <gtest/gtest.h>

#include "infogeo/linalg.hpp"

using infogeo::Matrix;

TEST(Linalg, SolveAndInverseRoundTrip) {
  Matrix a(2, 2);
  a(0, 0) = 4.0;
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 3.0;
  const std::vector<double> x = infogeo::solve(a, {1.0, 2.0});
  EXPECT_NEAR(4.0 * x[0] + x[1], 1.0, 1e-14);
  EXPECT_NEAR(x[0] + 3.0 * x[1], 2.0, 1e-14);

  const Matrix inv = infogeo::inverse(a);
  const Matrix id = a * inv;
  EXPECT_NEAR(id(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(id(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(id(1, 1), 1.0, 1e-14);
}

TEST(Linalg, SingularMatrixThrows) {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = 2.0;
  a(1, 1) = 4.0;
  EXPECT_THROW(infogeo::solve(a, {1.0, 1.0}), infogeo::DomainError);
  EXPECT_EQ(infogeo::determinant(a), 0.0);
}

TEST(Linalg, SymmetricEigenvalues) {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 2.0;
  const auto ev = infogeo::symmetric_eigenvalues(a);
  EXPECT_NEAR(ev[0], 1.0, 1e-12);
  EXPECT_NEAR(ev[1], 3.0, 1e-12);

  Matrix b(3, 3);
  b(0, 0) = 5.0;
  b(1, 1) = -2.0;
  b(2, 2) = 0.5;
  const auto evb = infogeo::symmetric_eigenvalues(b);
  EXPECT_NEAR(evb[0], -2.0, 1e-12);
  EXPECT_NEAR(evb[1], 0.5, 1e-12);
  EXPECT_NEAR(evb[2], 5.0, 1e-12);
}

TEST(Linalg, Determinant) {
  Matrix a(3, 3);
  a(0, 0) = 2.0;
  a(0, 1) = 0.0;
  a(0, 2) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 3.0;
  a(1, 2) = 0.0;
  a(2, 0) = 0.0;
  a(2, 1) = 1.0;
  a(2, 2) = 4.0;
  // Cofactor expansion: 2*(12-0) - 0 + 1*(1-0) = 25.
  EXPECT_NEAR(infogeo::determinant(a), 25.0, 1e-12);
}
