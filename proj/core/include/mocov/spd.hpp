#pragma once

// SPD-manifold linear algebra: eigendecomposition-based matrix log/exp,
// log-Euclidean vectorization, the Burg (LogDET) divergence, and query
// whitening for tensor sparse coding. All eigen work goes through the
// symmetric solver; inputs are validated for symmetry, never symmetrized
// silently.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mocov {

// Vectorized matrix-log descriptor of one clip, length (d^2+d)/2.
struct LogDescriptor {
  Eigen::VectorXd v;
  int d = 0;
  std::string label;
  std::string video_id;
  std::string group_id;
  int clip_index = 0;
};

struct WhitenedAtom {
  Eigen::MatrixXd mat;  // Q^{-1/2} D Q^{-1/2}
  double trace = 0.0;
};

// log(C) = V diag(log lambda) V^T. Throws std::domain_error if any eigenvalue
// is <= 0; callers regularize first.
Eigen::MatrixXd matrix_log(const Eigen::MatrixXd& C);
// exp(L) for symmetric L; the inverse map.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& L);

// Row-major upper triangle with off-diagonal entries scaled by sqrt(2), so the
// Euclidean inner product of two vectorizations equals the Frobenius inner
// product of the matrices. weighted=false gives the plain triangle.
Eigen::VectorXd vectorize_sym(const Eigen::MatrixXd& L, bool weighted = true);
Eigen::MatrixXd unvectorize_sym(const Eigen::VectorXd& v, int d, bool weighted = true);

// Burg / LogDET divergence tr(Qhat Q^-1) - log det(Qhat Q^-1) - d, evaluated
// through Cholesky factorizations of both arguments.
double logdet_divergence(const Eigen::MatrixXd& Qhat, const Eigen::MatrixXd& Q);

// log det via Cholesky; throws std::domain_error on non-PD input.
double logdet_spd(const Eigen::MatrixXd& A);

// Q^{-1/2} via the symmetric eigendecomposition, eigenvalues clamped below at
// eig_floor.
Eigen::MatrixXd inv_sqrt_spd(const Eigen::MatrixXd& Q, double eig_floor = 1e-12);

// Congruence transform Dhat_i = Q^{-1/2} D_i Q^{-1/2} of every atom.
std::vector<WhitenedAtom> whiten(const Eigen::MatrixXd& Q,
                                 const std::vector<Eigen::MatrixXd>& atoms,
                                 double eig_floor = 1e-12);

}  // namespace mocov
