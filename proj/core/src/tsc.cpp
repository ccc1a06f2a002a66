#include "mocov/tsc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mocov/covariance.hpp"
#include "mocov/textio.hpp"

namespace mocov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Barrier continuation schedule for the M <= I constraint.
constexpr double kBarrierStart = 1e-2;
constexpr double kBarrierEnd = 1e-11;
constexpr double kBarrierShrink = 0.1;

Eigen::MatrixXd combine(const std::vector<WhitenedAtom>& atoms, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(atoms[0].mat.rows());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (size_t i = 0; i < atoms.size(); ++i)
    if (x[static_cast<long>(i)] != 0.0) m += x[static_cast<long>(i)] * atoms[i].mat;
  return m;
}

struct Factors {
  Eigen::LLT<Eigen::MatrixXd> m;      // Cholesky of M(x)
  Eigen::LLT<Eigen::MatrixXd> slack;  // Cholesky of I - M(x)
};

// Merit F_mu(x) = <lin_coeff, x> - logdet(M) - mu*logdet(I - M); +inf outside
// the strict interior. lin_coeff carries both the trace and the l1 terms.
double merit(const std::vector<WhitenedAtom>& atoms, const Eigen::VectorXd& x,
             const Eigen::VectorXd& lin_coeff, double mu, Factors* out) {
  const int d = static_cast<int>(atoms[0].mat.rows());
  Eigen::MatrixXd m = combine(atoms, x);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return kInf;
  Eigen::LLT<Eigen::MatrixXd> slack(
      Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d) - m));
  if (slack.info() != Eigen::Success) return kInf;
  const double lin = lin_coeff.dot(x);
  const double logdet_m =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_s =
      2.0 * slack.matrixL().toDenseMatrix().diagonal().array().log().sum();
  if (out) {
    out->m = llt;
    out->slack = slack;
  }
  return lin - logdet_m - mu * logdet_s;
}

// grad F_mu,i = lin_coeff_i - tr(M^-1 A_i) + mu*tr((I-M)^-1 A_i)
// hess F_mu,ij = tr(M^-1 A_i M^-1 A_j) + mu*tr(S^-1 A_i S^-1 A_j)
struct Derivatives {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

Derivatives merit_derivatives(const std::vector<WhitenedAtom>& atoms,
                              const Factors& factors,
                              const Eigen::VectorXd& lin_coeff, double mu) {
  const int p = static_cast<int>(atoms.size());
  const int d = static_cast<int>(atoms[0].mat.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd minv = factors.m.solve(id);
  Eigen::MatrixXd sinv = factors.slack.solve(id);

  std::vector<Eigen::MatrixXd> bm(p), bs(p);
  Derivatives out;
  out.gradient.resize(p);
  for (int i = 0; i < p; ++i) {
    bm[i] = minv * atoms[i].mat;
    bs[i] = sinv * atoms[i].mat;
    out.gradient[i] = lin_coeff[i] - bm[i].trace() + mu * bs[i].trace();
  }
  out.hessian.resize(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double h = bm[i].cwiseProduct(bm[j].transpose()).sum() +
                       mu * bs[i].cwiseProduct(bs[j].transpose()).sum();
      out.hessian(i, j) = h;
      out.hessian(j, i) = h;
    }
  return out;
}

// Barrier-free gradient <lin_coeff> - tr(M^-1 A_i) for stationarity reports.
Eigen::VectorXd objective_gradient(const std::vector<WhitenedAtom>& atoms,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& lin_coeff) {
  const int d = static_cast<int>(atoms[0].mat.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(combine(atoms, x));
  Eigen::VectorXd g(atoms.size());
  if (llt.info() != Eigen::Success) {
    g.setConstant(kInf);
    return g;
  }
  Eigen::MatrixXd minv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  for (size_t i = 0; i < atoms.size(); ++i)
    g[static_cast<long>(i)] =
        lin_coeff[static_cast<long>(i)] - minv.cwiseProduct(atoms[i].mat).sum();
  return g;
}

double pg_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
  return (x - (x - g).cwiseMax(0.0)).cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<std::string> TensorDictionary::classes() const {
  std::vector<std::string> out;
  for (const auto& m : meta)
    if (std::find(out.begin(), out.end(), m.label) == out.end()) out.push_back(m.label);
  return out;
}

MaxdetSolution maxdet_solve(const std::vector<WhitenedAtom>& atoms, double delta,
                            const MaxdetOptions& opts) {
  if (atoms.empty()) throw std::invalid_argument("maxdet_solve: empty atom set");
  if (delta < 0.0) throw std::invalid_argument("maxdet_solve: delta must be >= 0");
  const int p = static_cast<int>(atoms.size());
  const int d = static_cast<int>(atoms[0].mat.rows());
  for (const auto& a : atoms)
    if (a.mat.rows() != d || a.mat.cols() != d)
      throw std::invalid_argument("maxdet_solve: atom dimension mismatch");

  MaxdetSolution sol;
  sol.x = Eigen::VectorXd::Zero(p);

  // Whitening against ill-conditioned queries leaves atom traces spread over
  // orders of magnitude, which cripples first-order steps. Solve in
  // trace-scaled variables x' = tr(Dhat_i) * x_i (an exact reparametrization:
  // the linear term becomes uniformly 1) and map back at the end.
  std::vector<WhitenedAtom> scaled(p);
  Eigen::VectorXd trace_scale(p);
  for (int i = 0; i < p; ++i) {
    if (!(atoms[i].trace > 0.0))
      throw std::invalid_argument("maxdet_solve: atoms must be positive definite");
    trace_scale[i] = atoms[i].trace;
    scaled[i].mat = atoms[i].mat / atoms[i].trace;
    scaled[i].trace = 1.0;
  }
  const Eigen::VectorXd lin_coeff =
      Eigen::VectorXd::Ones(p) + delta * trace_scale.cwiseInverse();

  double max_lambda = 0.0;
  for (const auto& a : scaled) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat, Eigen::EigenvaluesOnly);
    max_lambda = std::max(max_lambda, es.eigenvalues().maxCoeff());
  }
  if (!(max_lambda > 0.0))
    throw std::invalid_argument("maxdet_solve: atoms must be positive definite");

  // Strictly feasible start below the combined spectral budget.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(p, 1.0 / (p * max_lambda));
  double mu = kBarrierStart;
  Factors factors;
  double f = merit(scaled, x, lin_coeff, mu, &factors);
  int shrink = 0;
  while (!std::isfinite(f) && shrink < 64) {
    x *= 0.5;
    f = merit(scaled, x, lin_coeff, mu, &factors);
    ++shrink;
  }
  if (!std::isfinite(f)) {
    // Atoms numerically singular: no strictly feasible interior found.
    sol.objective = kInf;
    return sol;
  }

  Derivatives der = merit_derivatives(scaled, factors, lin_coeff, mu);
  sol.objective_trace.push_back(f);

  // Each barrier stage gets a bounded share of the iteration budget (the
  // schedule has 10 stages and must fit inside max_iterations); a stage also
  // ends when accepted steps stop moving the merit beyond the floating point
  // noise floor.
  const int stage_budget = std::max(20, opts.max_iterations / 12);
  int stage_iters = 0;
  int stalled_steps = 0;

  int iter = 0;
  while (iter < opts.max_iterations) {
    // The final stage solves below the reported tolerance so the barrier-free
    // residual lands strictly inside it.
    const double inner_tol = std::max(0.5 * opts.stationarity_tol, mu);
    const bool stage_done = pg_residual(x, der.gradient) < inner_tol ||
                            stage_iters >= stage_budget || stalled_steps >= 6;
    if (stage_done) {
      if (mu <= kBarrierEnd) break;
      mu = std::max(mu * kBarrierShrink, kBarrierEnd);
      if (mu <= kBarrierEnd * (1.0 + 1e-12)) mu = kBarrierEnd;
      f = merit(scaled, x, lin_coeff, mu, &factors);  // drops: barrier term shrinks
      der = merit_derivatives(scaled, factors, lin_coeff, mu);
      sol.objective_trace.push_back(f);
      stage_iters = 0;
      stalled_steps = 0;
      continue;
    }

    // Projected Newton direction on the free set (coordinates pinned at zero
    // with an inward-pointing gradient stay fixed); gradient direction as a
    // safeguarded fallback.
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(p);
    std::vector<int> free_set;
    for (int i = 0; i < p; ++i)
      if (x[i] > 0.0 || der.gradient[i] < 0.0) free_set.push_back(i);
    bool newton_ok = false;
    if (!free_set.empty()) {
      const int m = static_cast<int>(free_set.size());
      Eigen::MatrixXd h(m, m);
      Eigen::VectorXd gf(m);
      for (int a = 0; a < m; ++a) {
        gf[a] = der.gradient[free_set[a]];
        for (int b = 0; b < m; ++b) h(a, b) = der.hessian(free_set[a], free_set[b]);
      }
      h.diagonal().array() += 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd dn = -ldlt.solve(gf);
        if (dn.allFinite() && gf.dot(dn) < 0.0) {
          for (int a = 0; a < m; ++a) direction[free_set[a]] = dn[a];
          newton_ok = true;
        }
      }
    }
    double s_start = 1.0;
    if (!newton_ok) {
      direction = -der.gradient;
      s_start = 1.0 / std::max(1.0, der.gradient.cwiseAbs().maxCoeff());
    }

    double s_try = s_start;
    bool accepted = false;
    Eigen::VectorXd xn;
    Factors factors_n;
    double fn = kInf;
    while (s_try >= opts.min_step) {
      xn = (x + s_try * direction).cwiseMax(0.0);
      if ((xn - x).cwiseAbs().maxCoeff() == 0.0) break;
      fn = merit(scaled, xn, lin_coeff, mu, &factors_n);
      if (std::isfinite(fn) &&
          fn <= f + opts.armijo_c * der.gradient.dot(xn - x)) {
        accepted = true;
        break;
      }
      s_try *= opts.backtrack;
    }

    ++iter;
    ++stage_iters;
    if (opts.diagnostics) {
      std::ostringstream line;
      line << "maxdet iter=" << iter << " mu=" << fmt_g17(mu) << " f=" << fmt_g17(f)
           << " newton=" << (newton_ok ? 1 : 0)
           << " step=" << fmt_g17(accepted ? s_try : 0.0)
           << " stat=" << fmt_g17(pg_residual(x, der.gradient));
      opts.diagnostics(line.str());
    }
    if (!accepted) {
      // No descent at this barrier weight; tighten the schedule or stop.
      if (mu <= kBarrierEnd) break;
      mu = std::max(mu * kBarrierShrink, kBarrierEnd);
      f = merit(scaled, x, lin_coeff, mu, &factors);
      der = merit_derivatives(scaled, factors, lin_coeff, mu);
      sol.objective_trace.push_back(f);
      stage_iters = 0;
      stalled_steps = 0;
      continue;
    }

    stalled_steps = (f - fn <= 1e-13 * std::max(1.0, std::abs(f))) ? stalled_steps + 1 : 0;
    x = xn;
    f = fn;
    factors = factors_n;
    der = merit_derivatives(scaled, factors, lin_coeff, mu);
    sol.objective_trace.push_back(f);
  }

  sol.x = x.cwiseQuotient(trace_scale);  // back to the unscaled coefficients
  sol.iterations = iter;

  // The convergence decision lives in the trace-scaled coordinates actually
  // being solved, relative to the gradient scale above 1; the reported
  // stationarity is the barrier-free residual in the original coordinates.
  sol.objective = merit(scaled, x, lin_coeff, 0.0, nullptr);
  Eigen::VectorXd gs = objective_gradient(scaled, x, lin_coeff);
  sol.converged = gs.allFinite() &&
                  pg_residual(x, gs) <
                      opts.stationarity_tol * std::max(1.0, gs.cwiseAbs().maxCoeff());
  Eigen::VectorXd lin_orig = trace_scale.array() + delta;
  Eigen::VectorXd gf = objective_gradient(atoms, sol.x, lin_orig);
  sol.stationarity = gf.allFinite() ? pg_residual(sol.x, gf) : kInf;

  Eigen::MatrixXd m = combine(atoms, sol.x);
  Eigen::LLT<Eigen::MatrixXd> check(m);
  sol.feasible_psd = x.maxCoeff() == 0.0 || check.info() == Eigen::Success;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  sol.feasible_leq_identity = es.eigenvalues().maxCoeff() <= 1.0 + 1e-8;
  return sol;
}

std::pair<std::string, std::map<std::string, double>> tsc_classify_clip(
    const Eigen::MatrixXd& Q, const TensorDictionary& dict, const TscParams& params) {
  if (dict.size() == 0)
    throw std::invalid_argument("tsc_classify_clip: empty dictionary");
  if (Q.rows() != dict.dim())
    throw std::invalid_argument("tsc_classify_clip: query dimension mismatch");

  std::vector<WhitenedAtom> whitened = whiten(Q, dict.atoms);
  MaxdetSolution sol = maxdet_solve(whitened, params.delta, params.solver);

  std::map<std::string, double> scores;
  const auto classes = dict.classes();
  for (const auto& cls : classes) {
    Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(dict.dim(), dict.dim());
    double total = 0.0;
    for (int i = 0; i < dict.size(); ++i) {
      if (dict.meta[i].label != cls) continue;
      const double xi = sol.x[i];
      if (xi <= 0.0) continue;
      recon += xi * dict.atoms[i];
      total += xi;
    }
    if (total <= params.coeff_floor) {
      scores[cls] = kInf;
      continue;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(recon);
    if (llt.info() != Eigen::Success)
      recon = regularize(recon, {params.reg_rel, params.reg_floor});
    scores[cls] = logdet_divergence(recon, Q);
  }

  // Arg-min over finite scores; fall back to the first class when the solver
  // returned an all-absent solution.
  std::string best = classes.front();
  double best_score = kInf;
  for (const auto& cls : classes) {
    const double s = scores.at(cls);
    if (s < best_score) {
      best_score = s;
      best = cls;
    }
  }
  return {best, scores};
}

}  // namespace mocov
