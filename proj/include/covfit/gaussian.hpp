#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "covfit/graph.hpp"

namespace covfit {

/// Zero-entry tolerance used by default for model-membership checks. Matrices
/// produced by the fitting code have exact zeros; external inputs need slack.
inline constexpr double kMembershipTol = 1e-12;

/// Symmetric labelled covariance matrix. Symmetry is exact by construction
/// (the lower triangle is mirrored on write); positive definiteness is
/// verifiable on demand.
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;
  /// Validates squareness, finiteness and near-symmetry, then mirrors the
  /// lower triangle so the stored matrix is exactly symmetric.
  CovarianceMatrix(std::vector<std::string> labels, Eigen::MatrixXd entries);

  int dim() const { return static_cast<int>(m_.rows()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Eigen::MatrixXd& entries() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  struct PdCheck {
    bool ok = false;
    int pivot = -1;  // first non-positive pivot when !ok
  };
  /// Cholesky-based definiteness test reporting the failing pivot index.
  PdCheck pd_check() const;
  bool is_pd() const { return pd_check().ok; }

  Eigen::VectorXd standard_deviations() const { return m_.diagonal().cwiseSqrt(); }
  /// Entrywise correlations sigma_ij / (sd_i sd_j); requires positive diagonal.
  Eigen::MatrixXd correlations() const;

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd m_;
};

/// Empirical covariance together with the sample size that produced it.
struct SampleSummary {
  CovarianceMatrix cov;
  int n = 0;
  /// true: zero-mean form (1/n) sum y y'; false: mean subtracted first.
  bool centered = true;
};

/// Empirical covariance of a p x n data matrix (rows = variables, columns =
/// subjects). centered=true divides the raw outer-product sum by n and
/// requires n >= p; centered=false subtracts the row means first and requires
/// n >= p + 1. Either bound makes the result positive definite with
/// probability one for continuous data.
SampleSummary empirical_covariance(const Eigen::MatrixXd& data, std::vector<std::string> labels,
                                   bool centered);

/// Covariance assembled from marginal correlations (strict lower triangle,
/// row i holding i entries) and per-variable standard deviations. The result
/// must be positive definite; failures report the smallest eigenvalue.
CovarianceMatrix from_correlation_table(const std::vector<std::vector<double>>& correlations,
                                        const std::vector<double>& sds,
                                        std::vector<std::string> labels);

/// Summary wrapping an externally supplied covariance matrix with its sample
/// size. Requires n >= dim.
SampleSummary summary_from_covariance(CovarianceMatrix cov, int n, bool centered = true);

/// Gaussian log-likelihood of sigma against the summary, constant term
/// included: -(n p / 2) log(2 pi) - (n/2) log det(sigma) - (n/2) tr(sigma^-1 S).
double log_likelihood(const CovarianceMatrix& sigma, const SampleSummary& summary);

/// Max-abs defect of the likelihood equations over the free pairs:
/// max_{(i,j) in F} | (sigma^-1)_ij - (sigma^-1 S sigma^-1)_ij |.
/// Zero exactly at solutions of the likelihood equations.
double likelihood_residual(const CovarianceMatrix& sigma, const SampleSummary& summary,
                           const BidirectedGraph& g, double tol = kMembershipTol);

/// Partial derivatives of the log-likelihood with respect to the free
/// entries of sigma. Off-diagonal entries move in mirrored pairs, so their
/// components carry a factor n while diagonal ones carry n/2.
class ModelScore {
 public:
  ModelScore(std::vector<std::pair<int, int>> pairs, Eigen::VectorXd values)
      : pairs_(std::move(pairs)), values_(std::move(values)) {}

  /// Free pairs in canonical order (diagonals in vertex order, then edges).
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  const Eigen::VectorXd& values() const { return values_; }
  double max_abs() const { return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff(); }

 private:
  std::vector<std::pair<int, int>> pairs_;
  Eigen::VectorXd values_;
};

ModelScore score(const CovarianceMatrix& sigma, const SampleSummary& summary,
                 const BidirectedGraph& g, double tol = kMembershipTol);

/// True iff sigma is positive definite and |sigma_ij| <= tol at every
/// non-adjacent pair.
bool in_model(const CovarianceMatrix& sigma, const BidirectedGraph& g,
              double tol = kMembershipTol);

/// The same matrix with variables permuted into the given label order.
/// The label sets must be equal.
CovarianceMatrix reordered(const CovarianceMatrix& cov, const std::vector<std::string>& order);

}  // namespace covfit
