#pragma once

#include "twograph/twograph.hpp"

#include <gtest/gtest.h>

namespace twograph::testing {

inline Vec v(std::initializer_list<double> xs) { return vec_of(xs); }

inline Vec random_vec(Rng& rng, int d, double scale = 1.0) {
  Vec x(d);
  for (int i = 0; i < d; ++i) x(i) = scale * rng.uniform(-1, 1);
  return x;
}

/// Haar-ish random rotation from a QR of a Gaussian matrix, determinant +1.
inline Eigen::MatrixXd random_rotation(Rng& rng, int d) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline Eigen::MatrixXd mat(int rows, int cols, std::initializer_list<double> xs) {
  Eigen::MatrixXd m(rows, cols);
  auto it = xs.begin();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = *it++;
  return m;
}

}  // namespace twograph::testing
