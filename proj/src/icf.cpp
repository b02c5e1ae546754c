#include "covfit/icf.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "covfit/errors.hpp"
#include "covfit/instances.hpp"
#include "covfit/log.hpp"

namespace covfit {

const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged:
      return "converged";
    case FitStatus::max_sweeps_reached:
      return "max_sweeps_reached";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
    }
  }
  return out;
}

Eigen::RowVectorXd subrow(const Eigen::MatrixXd& m, int row, const std::vector<int>& cols) {
  Eigen::RowVectorXd out(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out(static_cast<Eigen::Index>(c)) = m(row, cols[c]);
  }
  return out;
}

struct StepPieces {
  std::vector<int> sp;
  std::vector<int> nsp;
  Eigen::MatrixXd b_sp_nsp;  // regression of spouse block on non-spouse block
  Eigen::MatrixXd gram_z;
  Eigen::RowVectorXd cross_yz;
};

StepPieces pseudo_pieces(const Eigen::MatrixXd& s, const Eigen::MatrixXd& sigma,
                         const BidirectedGraph& g, int i) {
  StepPieces p;
  p.sp = g.spouses(i);
  p.nsp = g.nonspouses(i);
  if (p.sp.empty()) {
    throw InputError("vertex '" + g.label(i) + "' has no spouses; nothing to regress on");
  }
  if (p.nsp.empty()) {
    p.b_sp_nsp.resize(p.sp.size(), 0);
    p.gram_z = submatrix(s, p.sp, p.sp);
    p.cross_yz = subrow(s, i, p.sp);
    return p;
  }
  const Eigen::MatrixXd sigma_nn = submatrix(sigma, p.nsp, p.nsp);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_nn);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("non-spouse block of the current iterate is not positive definite at '" +
                         g.label(i) + "'");
  }
  // B = sigma_{sp,nsp} sigma_{nsp,nsp}^-1, solved as (sigma_nn \ sigma_{nsp,sp})'.
  p.b_sp_nsp = llt.solve(submatrix(sigma, p.nsp, p.sp)).transpose();
  const Eigen::MatrixXd s_nsp_sp = submatrix(s, p.nsp, p.sp);
  const Eigen::MatrixXd s_nn = submatrix(s, p.nsp, p.nsp);
  p.gram_z = submatrix(s, p.sp, p.sp) - p.b_sp_nsp * s_nsp_sp -
             s_nsp_sp.transpose() * p.b_sp_nsp.transpose() +
             p.b_sp_nsp * s_nn * p.b_sp_nsp.transpose();
  p.gram_z = ((p.gram_z + p.gram_z.transpose()) / 2.0).eval();
  p.cross_yz = subrow(s, i, p.sp) - subrow(s, i, p.nsp) * p.b_sp_nsp.transpose();
  return p;
}

RegressionEstimate estimate_from_pieces(const Eigen::MatrixXd& s, StepPieces pieces, int i,
                                        const BidirectedGraph& g) {
  RegressionEstimate est;
  est.spouse_index = std::move(pieces.sp);
  est.nonspouse_index = std::move(pieces.nsp);
  est.gram_z = std::move(pieces.gram_z);
  est.cross_yz = std::move(pieces.cross_yz);
  Eigen::LLT<Eigen::MatrixXd> llt(est.gram_z);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("pseudo-variable Gram matrix is not positive definite at '" +
                         g.label(i) + "'");
  }
  est.spouse_coefficients = llt.solve(est.cross_yz.transpose()).transpose();
  est.lambda = s(i, i) - est.spouse_coefficients.dot(est.cross_yz);
  if (!(est.lambda > 0.0) || !std::isfinite(est.lambda)) {
    throw NumericalError("conditional variance came out non-positive at '" + g.label(i) + "'");
  }
  est.nonspouse_coefficients = -est.spouse_coefficients * pieces.b_sp_nsp;
  return est;
}

/// In-place row/column update of sigma for vertex i.
void icf_step_inplace(const Eigen::MatrixXd& s, Eigen::MatrixXd& sigma, const BidirectedGraph& g,
                      int i) {
  const std::vector<int>& sp = g.spouses(i);
  if (sp.empty()) {
    // Empty regression: the row is all zeros and the variance is the
    // empirical one.
    for (int j = 0; j < sigma.rows(); ++j) {
      if (j != i) sigma(i, j) = sigma(j, i) = 0.0;
    }
    sigma(i, i) = s(i, i);
    return;
  }
  const RegressionEstimate est = estimate_from_pieces(s, pseudo_pieces(s, sigma, g, i), i, g);
  // New row over the spouse columns; non-spouse entries are zero by the
  // coefficient constraint, so they are written as exact zeros.
  Eigen::RowVectorXd new_row(sp.size());
  for (std::size_t c = 0; c < sp.size(); ++c) {
    double v = 0.0;
    for (std::size_t k = 0; k < est.spouse_index.size(); ++k) {
      v += est.spouse_coefficients(static_cast<Eigen::Index>(k)) *
           sigma(est.spouse_index[k], sp[c]);
    }
    for (std::size_t k = 0; k < est.nonspouse_index.size(); ++k) {
      v += est.nonspouse_coefficients(static_cast<Eigen::Index>(k)) *
           sigma(est.nonspouse_index[k], sp[c]);
    }
    new_row(static_cast<Eigen::Index>(c)) = v;
  }
  for (int j = 0; j < sigma.rows(); ++j) {
    if (j != i) sigma(i, j) = sigma(j, i) = 0.0;
  }
  double sii = est.lambda;
  for (std::size_t c = 0; c < sp.size(); ++c) {
    sigma(i, sp[c]) = sigma(sp[c], i) = new_row(static_cast<Eigen::Index>(c));
    sii += est.spouse_coefficients(static_cast<Eigen::Index>(c)) *
           new_row(static_cast<Eigen::Index>(c));
  }
  sigma(i, i) = sii;
}

void check_step_inputs(const SampleSummary& summary, const CovarianceMatrix& sigma,
                       const BidirectedGraph& g, int i) {
  if (sigma.dim() != summary.cov.dim() || sigma.dim() != g.size()) {
    throw DimensionError("sigma, summary and graph dimensions do not agree");
  }
  if (i < 0 || i >= g.size()) {
    throw InputError("vertex index " + std::to_string(i) + " out of range");
  }
}

Eigen::MatrixXd starting_point(const SampleSummary& summary, const BidirectedGraph& g,
                               const IcfOptions& opts) {
  const int p = g.size();
  switch (opts.start) {
    case StartPoint::identity:
      return Eigen::MatrixXd::Identity(p, p);
    case StartPoint::diagonal_of_s:
      return summary.cov.entries().diagonal().asDiagonal();
    case StartPoint::user_supplied: {
      if (!opts.user_start.has_value()) {
        throw InputError("user_supplied start selected but no matrix given");
      }
      CovarianceMatrix start(g.labels(), *opts.user_start);
      if (!in_model(start, g, 0.0)) {
        throw ModelError(
            "user-supplied start is not a positive definite matrix with exact zeros at "
            "non-adjacent pairs");
      }
      return start.entries();
    }
  }
  throw InputError("unknown starting point");
}

std::vector<int> sweep_order(const BidirectedGraph& g, const IcfOptions& opts) {
  if (opts.sweep_order.empty()) {
    std::vector<int> order(g.size());
    for (int i = 0; i < g.size(); ++i) order[i] = i;
    return order;
  }
  std::vector<bool> seen(g.size(), false);
  for (int v : opts.sweep_order) {
    if (v < 0 || v >= g.size() || seen[v]) {
      throw InputError("sweep order must be a permutation of the vertex indices");
    }
    seen[v] = true;
  }
  if (static_cast<int>(opts.sweep_order.size()) != g.size()) {
    throw InputError("sweep order must list every vertex exactly once");
  }
  return opts.sweep_order;
}

FitResult fit_single(const SampleSummary& summary, const BidirectedGraph& g,
                     const IcfOptions& opts, const Eigen::MatrixXd& start) {
  const Eigen::MatrixXd& s = summary.cov.entries();
  const std::vector<int> order = sweep_order(g, opts);
  const double tol_abs = opts.tol_sigma * s.cwiseAbs().maxCoeff();

  Eigen::MatrixXd sigma = start;
  FitResult result;
  result.loglik_trace.push_back(
      log_likelihood(CovarianceMatrix(g.labels(), sigma), summary));
  Eigen::MatrixXd prev(sigma.rows(), sigma.cols());
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    prev = sigma;
    for (int i : order) {
      icf_step_inplace(s, sigma, g, i);
    }
    CovarianceMatrix current(g.labels(), sigma);
    const double ll = log_likelihood(current, summary);
    result.loglik_trace.push_back(ll);
    const double delta = (sigma - prev).cwiseAbs().maxCoeff();
    const double resid = likelihood_residual(current, summary, g, 0.0);
    log_line(LogLevel::trace, "icf sweep %d: loglik=%.10g delta=%.3e residual=%.3e", sweep, ll,
             delta, resid);
    result.sweeps_used = sweep;
    result.residual = resid;
    if (delta <= tol_abs && resid <= opts.tol_residual) {
      result.converged = true;
      result.status = FitStatus::converged;
      result.sigma_hat = std::move(current);
      return result;
    }
  }
  result.converged = false;
  result.status = FitStatus::max_sweeps_reached;
  result.sigma_hat = CovarianceMatrix(g.labels(), sigma);
  return result;
}

/// Random feasible starting point: a random correlation matrix rescaled to
/// the empirical variances with non-edges zeroed, shrunk toward its diagonal
/// until positive definite.
Eigen::MatrixXd random_feasible_start(const SampleSummary& summary, const BidirectedGraph& g,
                                      Rng& rng) {
  const int p = g.size();
  const Eigen::VectorXd sd = summary.cov.entries().diagonal().cwiseSqrt();
  Eigen::MatrixXd a(p, p + 1);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p + 1; ++j) a(i, j) = rng.normal();
  }
  Eigen::MatrixXd gram = a * a.transpose();
  Eigen::VectorXd d = gram.diagonal().cwiseSqrt();
  Eigen::MatrixXd corr = gram.array() / (d * d.transpose()).array();
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::MatrixXd candidate = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      candidate(i, i) = sd(i) * sd(i);
      for (int j = 0; j < i; ++j) {
        if (g.adjacent(i, j)) {
          candidate(i, j) = candidate(j, i) = corr(i, j) * sd(i) * sd(j);
        }
      }
    }
    if (Eigen::LLT<Eigen::MatrixXd>(candidate).info() == Eigen::Success) {
      return candidate;
    }
    corr *= 0.5;  // shrink off-diagonals toward the identity and retry
    corr.diagonal().setOnes();
  }
  return summary.cov.entries().diagonal().asDiagonal();
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::RowVectorXd> pseudo_gram(const SampleSummary& summary,
                                                           const CovarianceMatrix& sigma,
                                                           const BidirectedGraph& g, int i) {
  check_step_inputs(summary, sigma, g, i);
  StepPieces p = pseudo_pieces(summary.cov.entries(), sigma.entries(), g, i);
  return {std::move(p.gram_z), std::move(p.cross_yz)};
}

RegressionEstimate regression_estimate(const SampleSummary& summary, const CovarianceMatrix& sigma,
                                       const BidirectedGraph& g, int i) {
  check_step_inputs(summary, sigma, g, i);
  const Eigen::MatrixXd& s = summary.cov.entries();
  return estimate_from_pieces(s, pseudo_pieces(s, sigma.entries(), g, i), i, g);
}

CovarianceMatrix icf_step(const SampleSummary& summary, const CovarianceMatrix& sigma,
                          const BidirectedGraph& g, int i) {
  check_step_inputs(summary, sigma, g, i);
  Eigen::MatrixXd next = sigma.entries();
  icf_step_inplace(summary.cov.entries(), next, g, i);
  return CovarianceMatrix(sigma.labels(), std::move(next));
}

FitResult fit_icf(const SampleSummary& summary, const BidirectedGraph& g, const IcfOptions& opts) {
  if (opts.max_sweeps < 1) {
    throw InputError("max_sweeps must be positive");
  }
  if (opts.tol_sigma < 0.0 || opts.tol_residual < 0.0 || opts.restarts < 0) {
    throw InputError("tolerances and restart count must be non-negative");
  }
  if (summary.cov.dim() != g.size()) {
    throw DimensionError("summary dimension " + std::to_string(summary.cov.dim()) +
                         " does not match graph size " + std::to_string(g.size()));
  }
  if (summary.cov.labels() != g.labels()) {
    throw InputError("summary labels do not match graph vertices");
  }
  if (const auto check = summary.cov.pd_check(); !check.ok) {
    throw InputError("empirical covariance is not positive definite (pivot " +
                     std::to_string(check.pivot) + ")");
  }

  FitResult best = fit_single(summary, g, opts, starting_point(summary, g, opts));
  log_line(LogLevel::info, "icf: %s after %d sweeps, loglik=%.10g residual=%.3e",
           to_string(best.status), best.sweeps_used, best.loglik_trace.back(), best.residual);
  if (opts.restarts > 0) {
    Rng rng(opts.seed);
    for (int r = 0; r < opts.restarts; ++r) {
      const FitResult candidate =
          fit_single(summary, g, opts, random_feasible_start(summary, g, rng));
      log_line(LogLevel::info, "icf restart %d: %s loglik=%.10g", r + 1,
               to_string(candidate.status), candidate.loglik_trace.back());
      if (candidate.loglik_trace.back() > best.loglik_trace.back()) {
        best = candidate;
      }
    }
  }
  return best;
}

}  // namespace covfit
