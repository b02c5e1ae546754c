#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covfit/gaussian.hpp"
#include "covfit/graph.hpp"

namespace covfit {

/// Result record for one fit as surfaced by the command line. Correlations
/// and standard deviations are derived from the fitted matrix, never copied
/// from the input. Machine serialization is deterministic: fixed key order
/// and 12-significant-digit numbers; wall_time_ms is the one field excluded
/// from it so identical inputs produce byte-identical reports.
struct FitReport {
  std::string algorithm;  // "icf" | "anderson"
  std::string status;
  bool converged = false;
  int iterations = 0;
  double loglik = 0.0;
  double residual = 0.0;
  std::vector<std::string> labels;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd correlations;
  Eigen::VectorXd sds;
  int n = 0;
  int p = 0;
  std::uint64_t graph_digest = 0;
  std::uint64_t data_digest = 0;
  double wall_time_ms = 0.0;
};

/// One comparison instance. Reproducible from the recorded seed and shape
/// parameters alone.
struct BenchRecord {
  std::uint64_t seed = 0;
  int p = 0;
  int edge_count = 0;
  double edge_prob = 0.0;
  int n = 0;
  std::string icf_status;
  double icf_loglik = 0.0;
  int icf_sweeps = 0;
  double icf_residual = 0.0;
  std::string anderson_status;
  std::optional<double> anderson_loglik;
  int anderson_iterations = 0;
  /// Entrywise agreement within 1e-6; empty unless both runs converged.
  std::optional<bool> agree;
};

struct BenchSummary {
  int instances = 0;
  int both_converged = 0;
  int agreements = 0;
  int icf_converged = 0;
  int anderson_non_pd = 0;
  int anderson_max_iters = 0;
  int anderson_singular = 0;
};

/// FNV-1a over a canonical text rendering; used for input digests.
std::uint64_t digest_graph(const BidirectedGraph& g);
std::uint64_t digest_summary(const SampleSummary& summary);

std::string to_json(const FitReport& report);
std::string to_json(const BenchRecord& record);
std::string to_json(const BenchSummary& summary);

/// Aligned human-readable table: lower-triangular correlations plus an SD row.
std::string to_human_table(const FitReport& report);

}  // namespace covfit
