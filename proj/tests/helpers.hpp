#pragma once

#include "ssf/common.hpp"
#include "ssf/ifs.hpp"
#include "ssf/numerics.hpp"

#include <cmath>
#include <initializer_list>
#include <numbers>

namespace testing {

using ssf::Mat;
using ssf::Vec;

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vec scalar(double x) { return Vec::Constant(1, x); }

inline Mat rotation2(double angle) {
  Mat m(2, 2);
  m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return m;
}

/// Rotation by `angle` about the z axis of R^3.
inline Mat rotation_z(double angle) {
  Mat m = Mat::Identity(3, 3);
  m.topLeftCorner(2, 2) = rotation2(angle);
  return m;
}

/// Haar-ish random orthogonal matrix from the QR factorisation of a Gaussian matrix.
inline Mat random_orthogonal(ssf::Rng& rng, int k) {
  Eigen::MatrixXd g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  for (int j = 0; j < k; ++j)
    if (qr.matrixQR()(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

inline Vec random_unit(ssf::Rng& rng, int k) {
  Vec v(k);
  for (int i = 0; i < k; ++i) v(i) = rng.normal();
  return v / v.norm();
}

}  // namespace testing
