#include "covfit/instances.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <string>

#include "covfit/errors.hpp"
#include "covfit/icf.hpp"

namespace covfit {

double Rng::normal() {
  if (cached_.has_value()) {
    const double v = *cached_;
    cached_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t k) {
  SplitMix64 sm{base ^ (0xA0761D6478BD642FULL * (k + 1))};
  return sm.next();
}

RandomInstance make_instance(std::uint64_t seed, int p, double edge_prob, int n) {
  if (p < 1) {
    throw InputError("instance needs at least one variable");
  }
  if (n < p) {
    throw InputError("instance needs n >= p for a positive definite summary");
  }
  Rng rng(seed);

  std::vector<std::string> labels;
  labels.reserve(p);
  for (int i = 0; i < p; ++i) labels.push_back("v" + std::to_string(i + 1));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (rng.uniform() < edge_prob) edges.emplace_back(i, j);
    }
  }
  BidirectedGraph graph = BidirectedGraph::from_index_edges(labels, edges);

  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  }
  Eigen::MatrixXd gram = a * a.transpose();
  gram = ((gram + gram.transpose()) / 2.0).eval();

  // Project the Gram matrix into the model by fitting the graph to it.
  Eigen::MatrixXd sigma_true;
  bool projected = false;
  if (Eigen::LLT<Eigen::MatrixXd>(gram).info() == Eigen::Success) {
    try {
      IcfOptions opts;
      opts.max_sweeps = 2000;
      opts.tol_residual = 1e-9;
      const FitResult fit =
          fit_icf(summary_from_covariance(CovarianceMatrix(labels, gram), 10 * p), graph, opts);
      if (fit.converged) {
        sigma_true = fit.sigma_hat.entries();
        projected = true;
      }
    } catch (const std::runtime_error&) {
      projected = false;
    }
  }
  if (!projected) {
    sigma_true = gram;
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        if (i != j && !graph.adjacent(i, j)) sigma_true(i, j) = 0.0;
      }
    }
    while (Eigen::LLT<Eigen::MatrixXd>(sigma_true).info() != Eigen::Success) {
      sigma_true.diagonal() *= 1.1;
    }
  }

  // Zero-mean draws; the summary uses the raw outer-product form.
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(sigma_true).matrixL();
  Eigen::MatrixXd z(p, n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < p; ++i) z(i, k) = rng.normal();
  }
  const Eigen::MatrixXd y = chol * z;

  RandomInstance inst;
  inst.seed = seed;
  inst.p = p;
  inst.edge_prob = edge_prob;
  inst.n = n;
  inst.graph = std::move(graph);
  inst.sigma_true = std::move(sigma_true);
  inst.summary = empirical_covariance(y, labels, /*centered=*/true);
  return inst;
}

}  // namespace covfit
