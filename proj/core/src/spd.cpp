#include "mocov/spd.hpp"

#include <cmath>
#include <stdexcept>

namespace mocov {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2 = 0.7071067811865476;

void check_symmetric(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix not symmetric");
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_sym(const Eigen::MatrixXd& m,
                                                       const char* who) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string(who) + ": eigendecomposition failed");
  return es;
}

}  // namespace

Eigen::MatrixXd matrix_log(const Eigen::MatrixXd& C) {
  check_symmetric(C, "matrix_log");
  auto es = eig_sym(C, "matrix_log");
  Eigen::VectorXd lambda = es.eigenvalues();
  if (lambda.minCoeff() <= 0.0)
    throw std::domain_error("matrix_log: input not positive definite");
  Eigen::VectorXd logl = lambda.array().log();
  Eigen::MatrixXd m =
      es.eigenvectors() * logl.asDiagonal() * es.eigenvectors().transpose();
  return Eigen::MatrixXd(0.5 * (m + m.transpose()));
}

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& L) {
  check_symmetric(L, "matrix_exp");
  auto es = eig_sym(L, "matrix_exp");
  Eigen::VectorXd expl = es.eigenvalues().array().exp();
  Eigen::MatrixXd m =
      es.eigenvectors() * expl.asDiagonal() * es.eigenvectors().transpose();
  return Eigen::MatrixXd(0.5 * (m + m.transpose()));
}

Eigen::VectorXd vectorize_sym(const Eigen::MatrixXd& L, bool weighted) {
  check_symmetric(L, "vectorize_sym");
  const int d = static_cast<int>(L.rows());
  Eigen::VectorXd v((d * d + d) / 2);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      v[k++] = (i == j || !weighted) ? L(i, j) : kSqrt2 * L(i, j);
  return v;
}

Eigen::MatrixXd unvectorize_sym(const Eigen::VectorXd& v, int d, bool weighted) {
  if (v.size() != (d * d + d) / 2)
    throw std::invalid_argument("unvectorize_sym: length inconsistent with dimension");
  Eigen::MatrixXd m(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double val = (i == j || !weighted) ? v[k] : kInvSqrt2 * v[k];
      m(i, j) = val;
      m(j, i) = val;
      ++k;
    }
  return m;
}

double logdet_spd(const Eigen::MatrixXd& A) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("logdet_spd: matrix not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double logdet_divergence(const Eigen::MatrixXd& Qhat, const Eigen::MatrixXd& Q) {
  check_symmetric(Qhat, "logdet_divergence");
  check_symmetric(Q, "logdet_divergence");
  if (Qhat.rows() != Q.rows())
    throw std::invalid_argument("logdet_divergence: dimension mismatch");
  const int d = static_cast<int>(Q.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("logdet_divergence: Q not positive definite");
  const double trace_term = llt.solve(Qhat).trace();
  const double logdet_q = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_qhat = logdet_spd(Qhat);
  return trace_term - (logdet_qhat - logdet_q) - static_cast<double>(d);
}

Eigen::MatrixXd inv_sqrt_spd(const Eigen::MatrixXd& Q, double eig_floor) {
  check_symmetric(Q, "inv_sqrt_spd");
  auto es = eig_sym(Q, "inv_sqrt_spd");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::domain_error("inv_sqrt_spd: input not positive definite");
  Eigen::VectorXd w = es.eigenvalues().cwiseMax(eig_floor).array().rsqrt();
  Eigen::MatrixXd m = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
  return Eigen::MatrixXd(0.5 * (m + m.transpose()));
}

std::vector<WhitenedAtom> whiten(const Eigen::MatrixXd& Q,
                                 const std::vector<Eigen::MatrixXd>& atoms,
                                 double eig_floor) {
  Eigen::MatrixXd w = inv_sqrt_spd(Q, eig_floor);
  std::vector<WhitenedAtom> out;
  out.reserve(atoms.size());
  for (const auto& d : atoms) {
    if (d.rows() != Q.rows() || d.cols() != Q.cols())
      throw std::invalid_argument("whiten: atom dimension mismatch");
    Eigen::MatrixXd m = w * d * w;
    m = 0.5 * (m + m.transpose());
    out.push_back({m, m.trace()});
  }
  return out;
}

}  // namespace mocov
