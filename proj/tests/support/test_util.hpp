#pragma once

// Shared test helpers: deterministic random draws (independent of libstdc++
// distribution internals) and random SPD/symmetric matrix factories.

#include <Eigen/Dense>
#include <random>

namespace testutil {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng), u2 = uniform01(rng);
  while (u1 <= 1e-300) u1 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int d) {
  Eigen::MatrixXd m = random_matrix(rng, d, d);
  return 0.5 * (m + m.transpose());
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int d) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, d, d));
  return qr.householderQ();
}

// SPD matrix with eigenvalues log-spaced between lambda_min and lambda_max.
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d, double lambda_min = 0.5,
                                  double lambda_max = 2.0) {
  Eigen::MatrixXd q = random_orthogonal(rng, d);
  Eigen::VectorXd lambda(d);
  for (int i = 0; i < d; ++i) {
    const double t = d == 1 ? 0.0 : static_cast<double>(i) / (d - 1);
    lambda[i] = lambda_min * std::pow(lambda_max / lambda_min, t);
  }
  Eigen::MatrixXd m = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

}  // namespace testutil
