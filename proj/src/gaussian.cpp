#include "covfit/gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "covfit/errors.hpp"

namespace covfit {

namespace {

void check_labels_match(const CovarianceMatrix& sigma, const BidirectedGraph& g) {
  if (sigma.labels() != g.labels()) {
    throw InputError("covariance labels do not match graph vertices");
  }
}

void check_in_model(const CovarianceMatrix& sigma, const BidirectedGraph& g, double tol) {
  check_labels_match(sigma, g);
  std::ostringstream bad;
  int count = 0;
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      if (!g.adjacent(i, j) && std::abs(sigma(i, j)) > tol) {
        if (count++) bad << ", ";
        bad << "(" << g.label(i) << "," << g.label(j) << ")=" << sigma(i, j);
      }
    }
  }
  if (count > 0) {
    throw ModelError("matrix violates the zero pattern at " + bad.str());
  }
}

Eigen::LLT<Eigen::MatrixXd> factorize(const CovarianceMatrix& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.entries());
  if (llt.info() != Eigen::Success) {
    const auto check = sigma.pd_check();
    throw NumericalError("matrix is not positive definite (pivot " +
                         std::to_string(check.pivot) + ")");
  }
  return llt;
}

}  // namespace

CovarianceMatrix::CovarianceMatrix(std::vector<std::string> labels, Eigen::MatrixXd entries)
    : labels_(std::move(labels)), m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) {
    throw DimensionError("covariance matrix must be square, got " + std::to_string(m_.rows()) +
                         "x" + std::to_string(m_.cols()));
  }
  if (static_cast<int>(labels_.size()) != m_.rows()) {
    throw DimensionError("label count " + std::to_string(labels_.size()) +
                         " does not match matrix dimension " + std::to_string(m_.rows()));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    for (std::size_t j = i + 1; j < labels_.size(); ++j) {
      if (labels_[i] == labels_[j]) {
        throw InputError("duplicate variable label '" + labels_[i] + "'");
      }
    }
  }
  if (!m_.allFinite()) {
    throw InputError("covariance matrix contains non-finite entries");
  }
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  for (int i = 0; i < m_.rows(); ++i) {
    for (int j = i + 1; j < m_.cols(); ++j) {
      if (std::abs(m_(i, j) - m_(j, i)) > 1e-8 * scale) {
        throw InputError("matrix is not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
      m_(i, j) = m_(j, i);  // mirror so symmetry is exact
    }
  }
}

CovarianceMatrix::PdCheck CovarianceMatrix::pd_check() const {
  // Plain Cholesky, kept explicit so the failing pivot index is available.
  const int p = dim();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    double d = m_(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) {
      return {false, j};
    }
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < p; ++i) {
      double s = m_(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return {true, -1};
}

Eigen::MatrixXd CovarianceMatrix::correlations() const {
  const Eigen::VectorXd sd = standard_deviations();
  for (int i = 0; i < dim(); ++i) {
    if (!(sd(i) > 0.0)) {
      throw NumericalError("non-positive variance at '" + labels_.at(i) + "'");
    }
  }
  return m_.array() / (sd * sd.transpose()).array();
}

SampleSummary empirical_covariance(const Eigen::MatrixXd& data, std::vector<std::string> labels,
                                   bool centered) {
  const int p = static_cast<int>(data.rows());
  const int n = static_cast<int>(data.cols());
  if (!data.allFinite()) {
    throw InputError("data matrix contains non-finite entries");
  }
  const int need = centered ? p : p + 1;
  if (n < need) {
    throw DimensionError("sample size n=" + std::to_string(n) + " is below the minimum " +
                         std::to_string(need) + " for p=" + std::to_string(p) +
                         (centered ? " variables (n >= p required"
                                   : " variables with mean estimation (n >= p+1 required") +
                         " for an almost-surely positive definite empirical covariance)");
  }
  Eigen::MatrixXd s;
  if (centered) {
    s = data * data.transpose() / static_cast<double>(n);
  } else {
    const Eigen::VectorXd mean = data.rowwise().mean();
    const Eigen::MatrixXd dev = data.colwise() - mean;
    s = dev * dev.transpose() / static_cast<double>(n);
  }
  s = ((s + s.transpose()) / 2.0).eval();  // exact symmetry regardless of product order
  return SampleSummary{CovarianceMatrix(std::move(labels), std::move(s)), n, centered};
}

CovarianceMatrix from_correlation_table(const std::vector<std::vector<double>>& correlations,
                                        const std::vector<double>& sds,
                                        std::vector<std::string> labels) {
  const int p = static_cast<int>(sds.size());
  if (static_cast<int>(correlations.size()) != p) {
    throw DimensionError("expected " + std::to_string(p) + " correlation rows, got " +
                         std::to_string(correlations.size()));
  }
  for (int i = 0; i < p; ++i) {
    if (static_cast<int>(correlations[i].size()) != i) {
      throw DimensionError("correlation row " + std::to_string(i + 1) + " must hold " +
                           std::to_string(i) + " entries, got " +
                           std::to_string(correlations[i].size()));
    }
    if (!(sds[i] > 0.0) || !std::isfinite(sds[i])) {
      throw InputError("standard deviation for '" + labels.at(i) + "' must be positive");
    }
  }
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i) {
    m(i, i) = sds[i] * sds[i];
    for (int j = 0; j < i; ++j) {
      const double r = correlations[i][j];
      if (!(std::abs(r) <= 1.0)) {
        throw InputError("correlation (" + labels.at(i) + "," + labels.at(j) +
                         ") = " + std::to_string(r) + " is outside [-1, 1]");
      }
      m(i, j) = m(j, i) = r * sds[i] * sds[j];
    }
  }
  CovarianceMatrix cov(std::move(labels), std::move(m));
  if (!cov.is_pd()) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.entries());
    throw ModelError("reconstructed covariance is not positive definite (smallest eigenvalue " +
                     std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
  return cov;
}

SampleSummary summary_from_covariance(CovarianceMatrix cov, int n, bool centered) {
  if (n < cov.dim()) {
    throw DimensionError("sample size n=" + std::to_string(n) + " is smaller than p=" +
                         std::to_string(cov.dim()) +
                         "; the likelihood is unbounded below this size (n >= p required)");
  }
  return SampleSummary{std::move(cov), n, centered};
}

double log_likelihood(const CovarianceMatrix& sigma, const SampleSummary& summary) {
  const int p = sigma.dim();
  if (p != summary.cov.dim()) {
    throw DimensionError("dimension mismatch between sigma (" + std::to_string(p) +
                         ") and summary (" + std::to_string(summary.cov.dim()) + ")");
  }
  const auto llt = factorize(sigma);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double tr = llt.solve(summary.cov.entries()).trace();
  const double n = summary.n;
  return -n * p / 2.0 * std::log(2.0 * std::numbers::pi) - n / 2.0 * logdet - n / 2.0 * tr;
}

double likelihood_residual(const CovarianceMatrix& sigma, const SampleSummary& summary,
                           const BidirectedGraph& g, double tol) {
  check_in_model(sigma, g, tol);
  const auto llt = factorize(sigma);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(sigma.dim(), sigma.dim()));
  const Eigen::MatrixXd isi = inv * summary.cov.entries() * inv;
  double r = 0.0;
  for (const auto& [i, j] : g.free_pairs()) {
    r = std::max(r, std::abs(inv(i, j) - isi(i, j)));
  }
  return r;
}

ModelScore score(const CovarianceMatrix& sigma, const SampleSummary& summary,
                 const BidirectedGraph& g, double tol) {
  check_in_model(sigma, g, tol);
  const auto llt = factorize(sigma);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(sigma.dim(), sigma.dim()));
  const Eigen::MatrixXd isi = inv * summary.cov.entries() * inv;
  auto pairs = g.free_pairs();
  Eigen::VectorXd values(pairs.size());
  const double n = summary.n;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const double factor = (i == j) ? n / 2.0 : n;  // mirrored pairs move together
    values(static_cast<Eigen::Index>(k)) = factor * (isi(i, j) - inv(i, j));
  }
  return ModelScore(std::move(pairs), std::move(values));
}

bool in_model(const CovarianceMatrix& sigma, const BidirectedGraph& g, double tol) {
  check_labels_match(sigma, g);
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      if (!g.adjacent(i, j) && std::abs(sigma(i, j)) > tol) return false;
    }
  }
  return sigma.is_pd();
}

CovarianceMatrix reordered(const CovarianceMatrix& cov, const std::vector<std::string>& order) {
  if (order.size() != cov.labels().size()) {
    throw InputError("label mismatch: expected " + std::to_string(cov.labels().size()) +
                     " variables, got " + std::to_string(order.size()));
  }
  std::vector<int> perm(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto it = std::find(cov.labels().begin(), cov.labels().end(), order[k]);
    if (it == cov.labels().end()) {
      throw InputError("label mismatch: variable '" + order[k] + "' not present in the data");
    }
    perm[k] = static_cast<int>(it - cov.labels().begin());
  }
  const int p = cov.dim();
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) m(i, j) = cov(perm[i], perm[j]);
  }
  return CovarianceMatrix(order, std::move(m));
}

}  // namespace covfit
