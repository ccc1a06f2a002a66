#pragma once

// Tensor sparse coding of SPD descriptors. A query covariance is expressed as
// a nonnegative combination of dictionary covariances by solving, after
// whitening the atoms against the query,
//
//   min_x  sum_i x_i tr(Dhat_i) - log det(sum_i x_i Dhat_i) + delta ||x||_1
//   s.t.   x >= 0,  sum_i x_i Dhat_i <= I   (PSD ordering)
//
// with a projected interior-point iteration: elementwise projection onto
// x >= 0, a logarithmic barrier -mu*logdet(I - M(x)) driven to zero by
// continuation for the upper constraint, Newton directions on the free
// coordinates (gradient fallback), and Armijo backtracking that also rejects
// any step leaving the strict interior (both M(x) and I - M(x) must stay
// Cholesky-factorizable). The PSD lower bound is implied by the log-det
// domain. Whitened instances are solved in trace-scaled variables.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mocov/omp.hpp"
#include "mocov/spd.hpp"

namespace mocov {

struct TensorDictionary {
  std::vector<Eigen::MatrixXd> atoms;  // SPD matrices, common dimension
  std::vector<AtomMeta> meta;

  int size() const { return static_cast<int>(atoms.size()); }
  int dim() const { return atoms.empty() ? 0 : static_cast<int>(atoms[0].rows()); }
  std::vector<std::string> classes() const;
};

struct MaxdetOptions {
  double stationarity_tol = 1e-6;  // on ||x - proj(x - grad f(x))||_inf
  int max_iterations = 2000;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-18;
  // Optional per-iteration diagnostics sink (iteration, objective, step,
  // stationarity) as a structured text line.
  std::function<void(const std::string&)> diagnostics;
};

struct MaxdetSolution {
  Eigen::VectorXd x;
  double objective = 0.0;      // barrier-free objective at the returned x
  // ||x - proj(x - grad f(x))||_inf, barrier-free, original coordinates. The
  // converged flag itself is decided in the trace-scaled coordinates the
  // solver works in, relative to the gradient scale above 1.
  double stationarity = 0.0;
  int iterations = 0;
  bool converged = false;
  bool feasible_psd = false;           // M(x) > 0 (or x == 0)
  bool feasible_leq_identity = false;  // eigenvalues of M(x) <= 1 + 1e-8
  // Accepted merit values (objective + barrier); non-increasing both within a
  // barrier stage (Armijo) and across stages (the barrier term only shrinks).
  std::vector<double> objective_trace;
};

// Minimizes the whitened objective above. Atoms must be symmetric positive
// definite. Returns the best iterate with converged=false when the iteration
// budget runs out; throws std::invalid_argument on structurally bad input.
MaxdetSolution maxdet_solve(const std::vector<WhitenedAtom>& atoms, double delta,
                            const MaxdetOptions& opts = {});

struct TscParams {
  double delta = 1e-3;
  MaxdetOptions solver;
  double reg_rel = 1e-5;
  double reg_floor = 1e-8;
  double coeff_floor = 1e-12;  // class considered absent below this total weight
};

// Whitens the dictionary against Q, solves the program, reconstructs each
// class from its unwhitened atoms and scores it by the Burg divergence to Q.
// Returns the arg-min class and the full score map (+inf for absent classes).
std::pair<std::string, std::map<std::string, double>> tsc_classify_clip(
    const Eigen::MatrixXd& Q, const TensorDictionary& dict, const TscParams& params = {});

}  // namespace mocov
