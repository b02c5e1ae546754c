#pragma once

#include <string>
#include <utility>
#include <vector>

#include "covfit/gaussian.hpp"
#include "covfit/graph.hpp"

namespace covfit {

/// Parsed graph text. The format keeps bi-directed graphs and DAGs in one
/// syntax; which one a file denotes is decided by the edge kinds present.
///
///   # comment                (also allowed after any declaration)
///   vertex <label>
///   latent <label>           declares the vertex and marks it latent
///   <a> <-> <b>              bi-directed edge
///   <a> -> <b>               directed edge
///
/// Edge endpoints not declared earlier are declared implicitly in order of
/// first appearance.
struct GraphFile {
  std::vector<std::string> vertices;
  std::vector<std::pair<std::string, std::string>> bidirected_edges;
  std::vector<std::pair<std::string, std::string>> directed_edges;
  std::vector<std::string> latents;

  bool has_directed_content() const { return !directed_edges.empty() || !latents.empty(); }
  bool has_bidirected_content() const { return !bidirected_edges.empty(); }

  /// Realize as a bi-directed graph; rejects files with directed content.
  BidirectedGraph to_bidirected() const;
  /// Realize as a DAG; rejects files with bi-directed edges.
  Dag to_dag() const;
};

GraphFile parse_graph_text(const std::string& text, const std::string& name);
GraphFile parse_graph_file(const std::string& path);

/// Graph text for a bi-directed graph: vertex lines in declaration order,
/// then edge lines in lexicographic index order. Re-parses to an equal graph.
std::string to_graph_text(const BidirectedGraph& g);

/// Square covariance CSV: a header row of labels, then p numeric rows.
CovarianceMatrix read_covariance_csv(const std::string& path);

/// Correlation-table file: p rows `label, r, ...` where row k holds k-1
/// correlations (the first row is a bare label), then `SD, s1, ..., sp`.
CovarianceMatrix read_correlation_table(const std::string& path);

/// Data CSV. Default orientation: one row per variable, `label, v1, ..., vn`.
/// transpose=true expects a header row of labels and one row per subject.
SampleSummary read_data_csv(const std::string& path, bool centered, bool transpose);

}  // namespace covfit
