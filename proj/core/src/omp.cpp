#include "mocov/omp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mocov {

std::vector<std::string> VectorDictionary::classes() const {
  std::vector<std::string> out;
  for (const auto& m : meta)
    if (std::find(out.begin(), out.end(), m.label) == out.end()) out.push_back(m.label);
  return out;
}

VectorDictionary build_dictionary(const std::vector<LogDescriptor>& descriptors) {
  if (descriptors.empty())
    throw std::invalid_argument("build_dictionary: empty descriptor set");
  const long l = descriptors[0].v.size();
  const int p = static_cast<int>(descriptors.size());

  VectorDictionary dict;
  dict.atoms.resize(l, p);
  dict.original_norms.resize(p);
  dict.meta.resize(p);
  for (int j = 0; j < p; ++j) {
    const auto& desc = descriptors[j];
    if (desc.v.size() != l)
      throw std::invalid_argument("build_dictionary: inconsistent descriptor lengths");
    const double norm = desc.v.norm();
    if (norm == 0.0)
      throw std::invalid_argument("build_dictionary: zero-norm descriptor at index " +
                                  std::to_string(j));
    dict.atoms.col(j) = desc.v / norm;
    dict.original_norms[j] = norm;
    dict.meta[j] = {desc.label, desc.video_id, desc.group_id, desc.clip_index};
  }
  dict.gram = dict.atoms.transpose() * dict.atoms;
  dict.gram = 0.5 * (dict.gram + dict.gram.transpose());
  return dict;
}

SparseCode batch_omp_single(const VectorDictionary& dict, const Eigen::VectorXd& query,
                            const OmpParams& params) {
  if (query.size() != dict.atoms.rows())
    throw std::invalid_argument("batch_omp: query length mismatch");
  const int p = dict.size();
  if (params.sparsity < 1 || params.sparsity > p)
    throw std::invalid_argument("batch_omp: sparsity must be in [1, atom count]");

  SparseCode code;
  const double ynorm = query.norm();
  if (ynorm == 0.0) {
    code.residual_norm = 0.0;
    return code;
  }
  const Eigen::VectorXd yhat = query / ynorm;

  // Rubinstein-style batch iteration: correlations are updated through the
  // Gram matrix, the residual norm through the delta recurrence; the query
  // itself is never touched after alpha0.
  const Eigen::VectorXd alpha0 = dict.atoms.transpose() * yhat;
  Eigen::VectorXd alpha = alpha0;
  std::vector<char> in_support(p, 0);

  Eigen::MatrixXd chol;  // growing lower-triangular factor of gram(I, I)
  Eigen::VectorXd x;     // solution on the support
  double eps = 1.0;      // ||residual||^2 for the unit-norm query
  double delta_prev = 0.0;

  for (int iter = 0; iter < params.sparsity; ++iter) {
    int best = -1;
    double best_val = -1.0;
    for (int k = 0; k < p; ++k) {
      if (in_support[k]) continue;
      const double a = std::abs(alpha[k]);
      if (a > best_val) {
        best_val = a;
        best = k;
      }
    }
    if (best < 0) break;

    const int m = static_cast<int>(code.support.size());
    if (m == 0) {
      chol.resize(1, 1);
      chol(0, 0) = 1.0;  // atoms are unit norm
    } else {
      Eigen::VectorXd g(m);
      for (int i = 0; i < m; ++i) g[i] = dict.gram(code.support[i], best);
      Eigen::VectorXd w =
          chol.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(g);
      const double d2 = dict.gram(best, best) - w.squaredNorm();
      if (d2 <= 1e-12) {
        code.degenerate = true;
        break;
      }
      Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(m + 1, m + 1);
      grown.topLeftCorner(m, m) = chol.topLeftCorner(m, m);
      grown.block(m, 0, 1, m) = w.transpose();
      grown(m, m) = std::sqrt(d2);
      chol = std::move(grown);
    }
    code.support.push_back(best);
    in_support[best] = 1;
    const int ms = static_cast<int>(code.support.size());

    Eigen::VectorXd alpha0_I(ms);
    for (int i = 0; i < ms; ++i) alpha0_I[i] = alpha0[code.support[i]];
    Eigen::VectorXd tmp =
        chol.topLeftCorner(ms, ms).triangularView<Eigen::Lower>().solve(alpha0_I);
    x = chol.topLeftCorner(ms, ms)
            .triangularView<Eigen::Lower>()
            .transpose()
            .solve(tmp);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < ms; ++i) beta += x[i] * dict.gram.col(code.support[i]);
    alpha = alpha0 - beta;

    double delta = 0.0;
    for (int i = 0; i < ms; ++i) delta += x[i] * beta[code.support[i]];
    eps = eps - delta + delta_prev;
    delta_prev = delta;

    if (std::sqrt(std::max(eps, 0.0)) < params.residual_tol) break;
  }

  // The eps recurrence is only a stopping indicator (its noise floor is about
  // sqrt(machine epsilon)); the reported residual is recomputed exactly.
  const int ms = static_cast<int>(code.support.size());
  code.coefficients = ms > 0 ? Eigen::VectorXd(ynorm * x.head(ms)) : Eigen::VectorXd();
  Eigen::VectorXd recon = Eigen::VectorXd::Zero(dict.atoms.rows());
  for (int i = 0; i < ms; ++i) recon += x[i] * dict.atoms.col(code.support[i]);
  code.residual_norm = (yhat - recon).norm() * ynorm;
  code.per_class_residual = class_residuals(dict, query, code);
  return code;
}

std::vector<SparseCode> batch_omp(const VectorDictionary& dict,
                                  const std::vector<Eigen::VectorXd>& queries,
                                  const OmpParams& params) {
  std::vector<SparseCode> codes;
  codes.reserve(queries.size());
  for (const auto& y : queries) codes.push_back(batch_omp_single(dict, y, params));
  return codes;
}

std::map<std::string, double> class_residuals(const VectorDictionary& dict,
                                              const Eigen::VectorXd& query,
                                              const SparseCode& code) {
  std::map<std::string, double> out;
  const double ynorm = query.norm();
  for (const auto& cls : dict.classes()) {
    Eigen::VectorXd recon = Eigen::VectorXd::Zero(dict.atoms.rows());
    bool present = false;
    for (size_t i = 0; i < code.support.size(); ++i) {
      const int atom = code.support[i];
      if (dict.label(atom) != cls) continue;
      recon += code.coefficients[static_cast<long>(i)] * dict.atoms.col(atom);
      present = true;
    }
    out[cls] = present ? (query - recon).norm() : ynorm;
  }
  return out;
}

}  // namespace mocov
