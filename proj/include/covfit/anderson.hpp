#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "covfit/gaussian.hpp"
#include "covfit/graph.hpp"

namespace covfit {

/// The linear system A sigma = b whose solution updates the free covariance
/// entries. Rows and columns are indexed by the free pairs in canonical
/// order (diagonals in vertex order, then edges lexicographic); each
/// unordered edge contributes a single column with symmetrized coefficients.
/// With k = sigma^-1:
///   A[(i,j),(k,k)] = k_ik k_jk
///   A[(i,j),(k,l)] = k_ik k_jl + k_jk k_il      (k <-> l, one column per edge)
///   b[(i,j)]       = (k S k)_ij
/// A is generally not symmetric: doubling its edge rows yields the symmetric
/// scoring form, which the tests verify instead.
struct AndersonSystem {
  std::vector<std::pair<int, int>> index_set;
  Eigen::MatrixXd a_matrix;
  Eigen::VectorXd b_vector;
};

enum class AndersonStatus { converged, max_iters_reached, non_pd_iterate, singular_system };

const char* to_string(AndersonStatus s);

struct AndersonOptions {
  int max_iters = 5000;
  /// Max-abs step tolerance, relative to the largest |S| entry.
  double tol = 1e-10;
};

/// One iteration record. The free-entry vector follows the system's
/// index_set order; loglik is present only when the iterate is positive
/// definite.
struct AndersonRecord {
  Eigen::VectorXd sigma;
  bool pd = false;
  std::optional<double> loglik;
  double step_norm = 0.0;
};

/// Chronological iterate records, starting with the first update of the
/// identity starting value.
using AndersonTrace = std::vector<AndersonRecord>;

struct AndersonResult {
  /// Last iterate, embedded with zeros at non-edges. May not be positive
  /// definite when the run aborted.
  CovarianceMatrix sigma_hat;
  int iterations = 0;
  AndersonStatus status = AndersonStatus::max_iters_reached;
  bool final_pd = false;
  /// Likelihood-equation residual at the final iterate; NaN unless final_pd.
  double residual = 0.0;
  /// Log-likelihood at the final iterate; NaN unless final_pd.
  double loglik = 0.0;
};

AndersonSystem build_system(const CovarianceMatrix& sigma, const SampleSummary& summary,
                            const BidirectedGraph& g);

/// Solves the system at the current iterate and embeds the solution into a
/// symmetric matrix with zeros at non-edges. The result may legitimately
/// fail to be positive definite; the flag reports which.
std::pair<Eigen::MatrixXd, bool> anderson_step(const CovarianceMatrix& sigma,
                                               const SampleSummary& summary,
                                               const BidirectedGraph& g);

/// Iterates anderson_step from the identity. All failure modes are statuses,
/// never exceptions: a non-positive-definite iterate ends the run (the next
/// system needs sigma^-1), a numerically singular system is reported as
/// such, and the trace always records every iterate produced.
std::pair<AndersonResult, AndersonTrace> fit_anderson(const SampleSummary& summary,
                                                      const BidirectedGraph& g,
                                                      const AndersonOptions& opts = {});

}  // namespace covfit
