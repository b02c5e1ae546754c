#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "covfit/gaussian.hpp"
#include "covfit/graph.hpp"

namespace covfit {

enum class StartPoint { identity, diagonal_of_s, user_supplied };
enum class FitStatus { converged, max_sweeps_reached };

const char* to_string(FitStatus s);

struct IcfOptions {
  int max_sweeps = 5000;
  /// Max-abs entry change per full sweep, relative to the largest |S| entry.
  double tol_sigma = 1e-10;
  /// Absolute target for the likelihood-equation residual.
  double tol_residual = 1e-8;
  StartPoint start = StartPoint::identity;
  /// Required when start == user_supplied; must respect the zero pattern
  /// exactly and be positive definite.
  std::optional<Eigen::MatrixXd> user_start;
  /// Vertex visiting order within a sweep; empty means declaration order.
  std::vector<int> sweep_order;
  /// Extra runs from random feasible starting points; the best final
  /// log-likelihood wins. Guards against multiple local maxima.
  int restarts = 0;
  std::uint64_t seed = 0;
};

/// One pseudo-variable regression worked out for vertex i: the spouse-block
/// coefficients estimated on the pseudo-variable Gram blocks, the conditional
/// variance, and the non-spouse coefficients they induce.
struct RegressionEstimate {
  std::vector<int> spouse_index;
  std::vector<int> nonspouse_index;
  Eigen::RowVectorXd spouse_coefficients;
  Eigen::RowVectorXd nonspouse_coefficients;
  double lambda = 0.0;
  Eigen::MatrixXd gram_z;       // (1/n) Z Z'
  Eigen::RowVectorXd cross_yz;  // (1/n) Y_i Z'
};

struct FitResult {
  CovarianceMatrix sigma_hat;
  /// Log-likelihood of the starting point followed by one value per sweep.
  std::vector<double> loglik_trace;
  int sweeps_used = 0;
  bool converged = false;
  double residual = 0.0;
  FitStatus status = FitStatus::max_sweeps_reached;
};

/// Gram blocks of the pseudo-variable regression for vertex i, computed from
/// the empirical covariance and the current iterate only. With
/// B = sigma_{sp,nsp} sigma_{nsp,nsp}^-1:
///   gram_z  = S_{sp,sp} - B S_{nsp,sp} - S_{sp,nsp} B' + B S_{nsp,nsp} B'
///   cross_yz = S_{i,sp} - S_{i,nsp} B'
/// Requires sp(i) non-empty.
std::pair<Eigen::MatrixXd, Eigen::RowVectorXd> pseudo_gram(const SampleSummary& summary,
                                                           const CovarianceMatrix& sigma,
                                                           const BidirectedGraph& g, int i);

/// Full regression solve for vertex i at the current iterate.
RegressionEstimate regression_estimate(const SampleSummary& summary, const CovarianceMatrix& sigma,
                                       const BidirectedGraph& g, int i);

/// One update of row/column i: holds sigma_{-i,-i} fixed, re-estimates the
/// i-th row from the pseudo-variable regression, and rebuilds sigma_{i,i}.
/// Non-adjacent entries of the new row are exact zeros by construction and
/// the log-likelihood never decreases.
CovarianceMatrix icf_step(const SampleSummary& summary, const CovarianceMatrix& sigma,
                          const BidirectedGraph& g, int i);

/// Iterative conditional fitting: cycles icf_step over all vertices until the
/// sweep-to-sweep change and the likelihood-equation residual both fall below
/// their tolerances, or max_sweeps is reached. Every iterate stays inside the
/// model with exact zeros, so the result is valid even without convergence.
FitResult fit_icf(const SampleSummary& summary, const BidirectedGraph& g,
                  const IcfOptions& opts = {});

}  // namespace covfit
