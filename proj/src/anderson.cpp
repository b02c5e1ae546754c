#include "covfit/anderson.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <limits>

#include "covfit/errors.hpp"
#include "covfit/log.hpp"

namespace covfit {

const char* to_string(AndersonStatus s) {
  switch (s) {
    case AndersonStatus::converged:
      return "converged";
    case AndersonStatus::max_iters_reached:
      return "max_iters_reached";
    case AndersonStatus::non_pd_iterate:
      return "non_pd_iterate";
    case AndersonStatus::singular_system:
      return "singular_system";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd embed(const std::vector<std::pair<int, int>>& index_set,
                      const Eigen::VectorXd& values, int p) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t k = 0; k < index_set.size(); ++k) {
    const auto [i, j] = index_set[k];
    out(i, j) = out(j, i) = values(static_cast<Eigen::Index>(k));
  }
  return out;
}

}  // namespace

AndersonSystem build_system(const CovarianceMatrix& sigma, const SampleSummary& summary,
                            const BidirectedGraph& g) {
  if (sigma.labels() != g.labels() || summary.cov.dim() != g.size()) {
    throw InputError("sigma, summary and graph must agree on the variables");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.entries());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("current iterate is not positive definite; cannot form its inverse");
  }
  const int p = g.size();
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd isi = inv * summary.cov.entries() * inv;

  AndersonSystem sys;
  sys.index_set = g.free_pairs();
  const int m = static_cast<int>(sys.index_set.size());
  sys.a_matrix.resize(m, m);
  sys.b_vector.resize(m);
  for (int r = 0; r < m; ++r) {
    const auto [i, j] = sys.index_set[r];
    sys.b_vector(r) = isi(i, j);
    for (int c = 0; c < m; ++c) {
      const auto [k, l] = sys.index_set[c];
      sys.a_matrix(r, c) =
          (k == l) ? inv(i, k) * inv(j, k) : inv(i, k) * inv(j, l) + inv(j, k) * inv(i, l);
    }
  }
  return sys;
}

std::pair<Eigen::MatrixXd, bool> anderson_step(const CovarianceMatrix& sigma,
                                               const SampleSummary& summary,
                                               const BidirectedGraph& g) {
  const AndersonSystem sys = build_system(sigma, summary, g);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.a_matrix);
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double pivot_max = pivots.maxCoeff();
  const double pivot_min = pivots.minCoeff();
  const double threshold = 1e3 * std::numeric_limits<double>::epsilon() *
                           static_cast<double>(sys.index_set.size());
  if (!(pivot_max > 0.0) || pivot_min / pivot_max < threshold) {
    throw NumericalError("update system is numerically singular (pivot ratio " +
                         std::to_string(pivot_max > 0.0 ? pivot_min / pivot_max : 0.0) + ")");
  }
  const Eigen::VectorXd solution = lu.solve(sys.b_vector);
  Eigen::MatrixXd next = embed(sys.index_set, solution, g.size());
  const bool pd = Eigen::LLT<Eigen::MatrixXd>(next).info() == Eigen::Success;
  return {std::move(next), pd};
}

std::pair<AndersonResult, AndersonTrace> fit_anderson(const SampleSummary& summary,
                                                      const BidirectedGraph& g,
                                                      const AndersonOptions& opts) {
  if (opts.max_iters < 1) {
    throw InputError("max_iters must be positive");
  }
  if (opts.tol < 0.0) {
    throw InputError("tolerance must be non-negative");
  }
  if (summary.cov.labels() != g.labels()) {
    throw InputError("summary labels do not match graph vertices");
  }
  if (const auto check = summary.cov.pd_check(); !check.ok) {
    throw InputError("empirical covariance is not positive definite (pivot " +
                     std::to_string(check.pivot) + ")");
  }
  const int p = g.size();
  const double tol_abs = opts.tol * summary.cov.entries().cwiseAbs().maxCoeff();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto free_set = g.free_pairs();

  AndersonResult result;
  AndersonTrace trace;
  CovarianceMatrix current(g.labels(), Eigen::MatrixXd::Identity(p, p));
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    Eigen::MatrixXd next;
    bool pd = false;
    try {
      std::tie(next, pd) = anderson_step(current, summary, g);
    } catch (const NumericalError&) {
      result.status = AndersonStatus::singular_system;
      result.sigma_hat = current;
      result.iterations = iter - 1;
      result.final_pd = true;  // the seed of the failed step was PD
      result.residual = nan;
      result.loglik = log_likelihood(current, summary);
      return {result, trace};
    }

    AndersonRecord rec;
    rec.sigma.resize(static_cast<Eigen::Index>(free_set.size()));
    for (std::size_t k = 0; k < free_set.size(); ++k) {
      rec.sigma(static_cast<Eigen::Index>(k)) = next(free_set[k].first, free_set[k].second);
    }
    rec.pd = pd;
    rec.step_norm = (next - current.entries()).cwiseAbs().maxCoeff();
    CovarianceMatrix candidate(g.labels(), next);
    if (pd) {
      rec.loglik = log_likelihood(candidate, summary);
    }
    log_line(LogLevel::trace, "anderson iter %d: pd=%d step=%.3e loglik=%s", iter, pd ? 1 : 0,
             rec.step_norm, rec.loglik ? std::to_string(*rec.loglik).c_str() : "n/a");
    trace.push_back(rec);

    current = std::move(candidate);
    result.iterations = iter;
    if (!pd) {
      result.status = AndersonStatus::non_pd_iterate;
      result.sigma_hat = current;
      result.final_pd = false;
      result.residual = nan;
      result.loglik = nan;
      return {result, trace};
    }
    if (rec.step_norm <= tol_abs) {
      result.status = AndersonStatus::converged;
      result.sigma_hat = current;
      result.final_pd = true;
      result.residual = likelihood_residual(result.sigma_hat, summary, g, kMembershipTol);
      result.loglik = *rec.loglik;
      return {result, trace};
    }
  }
  result.status = AndersonStatus::max_iters_reached;
  result.sigma_hat = current;
  result.final_pd = true;
  result.residual = likelihood_residual(result.sigma_hat, summary, g, kMembershipTol);
  result.loglik = log_likelihood(result.sigma_hat, summary);
  return {result, trace};
}

}  // namespace covfit
