#pragma once

// Test-side reference computations, deliberately kept on different algebraic
// routes than the library code they check (path enumeration instead of
// reachability, LU determinants instead of Cholesky, data-matrix regressions
// instead of covariance-block algebra).

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "covfit/gaussian.hpp"
#include "covfit/graph.hpp"
#include "covfit/instances.hpp"

namespace oracle {

struct QueryTriple {
  std::vector<int> a;
  std::vector<int> b;
  std::vector<int> given;
};

covfit::SeparationQuery to_query(const std::vector<std::string>& labels, const QueryTriple& t);

/// m-separation by explicit simple-path enumeration: connected iff some
/// simple path has all interior vertices inside `given`.
bool m_separated(const covfit::BidirectedGraph& g, const QueryTriple& t);

/// d-separation by explicit simple-path enumeration over the skeleton with
/// the collider / non-collider blocking rules applied per path.
bool d_separated(const covfit::Dag& d, const QueryTriple& t);

/// Log-likelihood via LU determinant and explicit inverse.
double log_likelihood(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s, int n);

/// Likelihood-equation defect via explicit inverse.
double likelihood_residual(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s,
                           const covfit::BidirectedGraph& g);

/// The update of row/column i computed the data-space way: pseudo-variables
/// assembled as residual rows of the data matrix, then ordinary least
/// squares, exactly as written for the regression formulation.
Eigen::MatrixXd icf_step_on_data(const Eigen::MatrixXd& y, const Eigen::MatrixXd& sigma,
                                 const covfit::BidirectedGraph& g, int i);

/// Argmax over sigma_ii of the log-likelihood with the rest of the matrix
/// fixed, by golden-section search.
double best_variance(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s, int n, int i,
                     double lo, double hi);

/// Central finite difference of covfit::log_likelihood with respect to the
/// free pair (i, j); off-diagonal entries are perturbed as mirrored pairs.
double fd_score_component(const covfit::CovarianceMatrix& sigma,
                          const covfit::SampleSummary& summary, int i, int j, double h);

/// Literal pattern scan over all orderings of all 4-subsets.
bool dag_equivalent_exists(const covfit::BidirectedGraph& g);

/// Literal unshielded-non-collider scan over all ordered triples.
bool bidirected_equivalent_exists(const covfit::Dag& d);

std::vector<std::string> index_labels(int p);

/// Calls fn with every bi-directed graph on p labelled vertices.
void for_all_bidirected_graphs(int p, const std::function<void(const covfit::BidirectedGraph&)>& fn);

/// Calls fn with every DAG on p labelled vertices (some repeated: generated
/// as topological order times upper-triangular edge subsets).
void for_all_dags(int p, const std::function<void(const covfit::Dag&)>& fn);

/// All query triples with non-empty disjoint a and b over vertices 0..p-1.
std::vector<QueryTriple> all_disjoint_triples(int p);

/// Random triple over 0..p-1 (may reject and retry internally).
QueryTriple random_triple(covfit::Rng& rng, int p);

/// Random DAG whose observed vertices are childless: latent -> latent edges
/// respect index order, latent -> observed edges are free.
covfit::Dag random_admissible_dag(covfit::Rng& rng, int n_obs, int n_latent, double q);

}  // namespace oracle
