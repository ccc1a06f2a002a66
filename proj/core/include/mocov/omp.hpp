#pragma once

// Batch Orthogonal Matching Pursuit over a dictionary of matrix-log
// descriptors. The Gram matrix is precomputed once per dictionary; per-query
// work runs on correlations only, with the support system solved through a
// progressively extended Cholesky factor.

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "mocov/spd.hpp"

namespace mocov {

struct AtomMeta {
  std::string label;
  std::string video_id;
  std::string group_id;
  int clip_index = 0;
};

struct VectorDictionary {
  Eigen::MatrixXd atoms;            // l x p, unit-norm columns
  Eigen::VectorXd original_norms;   // pre-normalization column norms
  Eigen::MatrixXd gram;             // p x p, atoms^T atoms
  std::vector<AtomMeta> meta;       // one entry per atom

  int dim() const { return static_cast<int>(atoms.rows()); }
  int size() const { return static_cast<int>(atoms.cols()); }
  const std::string& label(int i) const { return meta[i].label; }
  // Distinct labels in first-appearance order.
  std::vector<std::string> classes() const;
};

struct SparseCode {
  std::vector<int> support;        // atom indices in selection order
  Eigen::VectorXd coefficients;    // aligned with support, original query scale
  double residual_norm = 0.0;
  std::map<std::string, double> per_class_residual;
  bool degenerate = false;         // stopped early on a singular support system
};

struct OmpParams {
  int sparsity = 10;          // max atoms per code (P)
  double residual_tol = 1e-6; // stop when residual < tol * ||y||
};

// Stacks descriptors as columns, L2-normalizes, precomputes the Gram matrix.
// Throws on zero-norm or inconsistent-length descriptors.
VectorDictionary build_dictionary(const std::vector<LogDescriptor>& descriptors);

// Greedy OMP for each query: select the atom with max |correlation| to the
// residual (ties to the lowest index), re-solve least squares on the support,
// stop at P atoms or when the residual drops below tolerance.
std::vector<SparseCode> batch_omp(const VectorDictionary& dict,
                                  const std::vector<Eigen::VectorXd>& queries,
                                  const OmpParams& params = {});
SparseCode batch_omp_single(const VectorDictionary& dict, const Eigen::VectorXd& query,
                            const OmpParams& params = {});

// Class-restricted reconstruction residuals ||y - A x_c||: coefficients of
// atoms outside class c are zeroed. Classes absent from the support score
// ||y||. Computed by explicit reconstruction, not through the Gram matrix.
std::map<std::string, double> class_residuals(const VectorDictionary& dict,
                                              const Eigen::VectorXd& query,
                                              const SparseCode& code);

}  // namespace mocov
