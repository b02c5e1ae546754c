#include "covfit/gaussian.hpp"

#include <doctest.h>

#include <cmath>

#include "covfit/errors.hpp"
#include "covfit/icf.hpp"
#include "covfit/instances.hpp"
#include "oracles.hpp"
#include "example_fixture.hpp"

using covfit::BidirectedGraph;
using covfit::CovarianceMatrix;
using covfit::SampleSummary;

TEST_CASE("covariance matrix construction") {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.5, 0.5, 1.0;
  const CovarianceMatrix cov({"a", "b"}, m);
  CHECK(cov.dim() == 2);
  CHECK(cov(0, 1) == cov(1, 0));
  CHECK(cov.is_pd());

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(CovarianceMatrix({"a", "b"}, asym), covfit::InputError);

  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(CovarianceMatrix({"a", "b"}, rect), covfit::DimensionError);
  CHECK_THROWS_AS(CovarianceMatrix({"a"}, m), covfit::DimensionError);
  CHECK_THROWS_AS(CovarianceMatrix({"a", "a"}, m), covfit::InputError);
}

TEST_CASE("pd check reports the failing pivot") {
  Eigen::MatrixXd m(3, 3);
  m << 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0;
  const auto check = CovarianceMatrix({"a", "b", "c"}, m).pd_check();
  CHECK_FALSE(check.ok);
  CHECK(check.pivot == 1);
  CHECK(CovarianceMatrix({"a", "b", "c"}, Eigen::MatrixXd::Identity(3, 3)).pd_check().ok);
}

TEST_CASE("empirical covariance, both centerings") {
  Eigen::MatrixXd one_pm(1, 2);
  one_pm << 1.0, -1.0;
  const SampleSummary s1 = covfit::empirical_covariance(one_pm, {"x"}, true);
  CHECK(s1.cov(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s1.n == 2);
  CHECK(s1.centered);

  Eigen::MatrixXd one_odd(1, 2);
  one_odd << 1.0, 3.0;
  const SampleSummary s2 = covfit::empirical_covariance(one_odd, {"x"}, false);
  CHECK(s2.cov(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(s2.centered);

  Eigen::MatrixXd two(2, 3);
  two << 1.0, 2.0, 3.0, 2.0, 1.0, 0.0;
  const SampleSummary s3 = covfit::empirical_covariance(two, {"x", "y"}, false);
  // two-pass reference: means (2, 1), deviations (-1,0,1) and (1,0,-1)
  Eigen::MatrixXd dev(2, 3);
  dev << -1.0, 0.0, 1.0, 1.0, 0.0, -1.0;
  const Eigen::MatrixXd expected = dev * dev.transpose() / 3.0;
  CHECK((s3.cov.entries() - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(s3.cov(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(s3.cov(0, 1) == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("empirical covariance enforces the sample-size floor") {
  Eigen::MatrixXd d(3, 3);
  d.setRandom();
  CHECK_NOTHROW(covfit::empirical_covariance(d, {"a", "b", "c"}, true));
  CHECK_THROWS_AS(covfit::empirical_covariance(d, {"a", "b", "c"}, false),
                  covfit::DimensionError);
  Eigen::MatrixXd tiny(3, 2);
  tiny.setRandom();
  CHECK_THROWS_AS(covfit::empirical_covariance(tiny, {"a", "b", "c"}, true),
                  covfit::DimensionError);
  Eigen::MatrixXd bad(2, 4);
  bad.setZero();
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(covfit::empirical_covariance(bad, {"a", "b"}, true), covfit::InputError);
}

TEST_CASE("empirical covariance of continuous data is positive definite") {
  covfit::Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const int p = 1 + static_cast<int>(rng.next_u64() % 5);
    const bool centered = (rng.next_u64() & 1) != 0;
    const int n = p + (centered ? 0 : 1) + static_cast<int>(rng.next_u64() % 4);
    Eigen::MatrixXd data(p, n);
    for (int i = 0; i < p; ++i) {
      for (int k = 0; k < n; ++k) data(i, k) = rng.normal();
    }
    CHECK(covfit::empirical_covariance(data, oracle::index_labels(p), centered).cov.is_pd());
  }
}

TEST_CASE("correlation-table reconstruction") {
  const CovarianceMatrix s = fixture::observed_covariance();
  CHECK(s(0, 2) == doctest::Approx(-0.460 * 5.72 * 7.86).epsilon(1e-15));
  CHECK(s(0, 2) == doctest::Approx(-20.681232).epsilon(1e-12));
  CHECK(s(0, 0) == doctest::Approx(5.72 * 5.72).epsilon(1e-15));
  CHECK(s(1, 1) == doctest::Approx(8464.0).epsilon(1e-15));
  CHECK(s.is_pd());

  const CovarianceMatrix diag =
      covfit::from_correlation_table({{}, {0.0}}, {2.0, 3.0}, {"a", "b"});
  CHECK(diag(0, 1) == 0.0);
  CHECK(diag(0, 0) == 4.0);
  CHECK(diag(1, 1) == 9.0);

  CHECK_THROWS_AS(covfit::from_correlation_table({{}, {1.0}}, {1.0, 1.0}, {"a", "b"}),
                  covfit::ModelError);  // rank one
  CHECK_THROWS_AS(covfit::from_correlation_table({{}, {1.5}}, {1.0, 1.0}, {"a", "b"}),
                  covfit::InputError);
  CHECK_THROWS_AS(covfit::from_correlation_table({{}, {0.2}}, {1.0, -1.0}, {"a", "b"}),
                  covfit::InputError);
  CHECK_THROWS_AS(covfit::from_correlation_table({{}, {0.2}, {0.1, 0.3}}, {1.0, 1.0}, {"a", "b"}),
                  covfit::DimensionError);
}

TEST_CASE("correlation round-trip is the identity") {
  covfit::Rng rng(808);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 5);
    const auto inst = covfit::make_instance(rng.next_u64(), p, 0.8, 2 * p);
    const CovarianceMatrix& cov = inst.summary.cov;
    const Eigen::MatrixXd corr = cov.correlations();
    const Eigen::VectorXd sd = cov.standard_deviations();
    std::vector<std::vector<double>> lower(p);
    std::vector<double> sds(p);
    for (int i = 0; i < p; ++i) {
      sds[i] = sd(i);
      for (int j = 0; j < i; ++j) lower[i].push_back(corr(i, j));
    }
    const CovarianceMatrix back = covfit::from_correlation_table(lower, sds, cov.labels());
    CHECK((back.entries() - cov.entries()).cwiseAbs().maxCoeff() <=
          1e-12 * cov.entries().cwiseAbs().maxCoeff());
  }
}

TEST_CASE("log-likelihood closed forms and golden value") {
  // identity sigma and summary: -log(2 pi) - 1
  const CovarianceMatrix eye({"a", "b"}, Eigen::MatrixXd::Identity(2, 2));
  const SampleSummary unit{CovarianceMatrix({"a", "b"}, Eigen::MatrixXd::Identity(2, 2)), 1, true};
  CHECK(covfit::log_likelihood(eye, unit) ==
        doctest::Approx(-std::log(2.0 * M_PI) - 1.0).epsilon(1e-14));

  // sigma = S forces tr = p
  covfit::Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 4);
    const auto inst = covfit::make_instance(rng.next_u64(), p, 0.5, 3 * p);
    const int n = inst.summary.n;
    const double direct = covfit::log_likelihood(inst.summary.cov, inst.summary);
    const double expected = oracle::log_likelihood(inst.summary.cov.entries(),
                                                   inst.summary.cov.entries(), n);
    CHECK(direct == doctest::Approx(expected).epsilon(1e-12));
  }

  // published fitted matrix against the observed summary
  const double value = covfit::log_likelihood(fixture::published_fit(), fixture::observed_summary());
  CHECK(value == doctest::Approx(-562.63414410034125).epsilon(1e-12));
  CHECK(value == doctest::Approx(oracle::log_likelihood(fixture::published_fit().entries(),
                                                        fixture::observed_covariance().entries(),
                                                        39))
                     .epsilon(1e-12));

  Eigen::MatrixXd notpd(2, 2);
  notpd << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(
      (void)covfit::log_likelihood(CovarianceMatrix({"a", "b"}, notpd), unit),
      covfit::NumericalError);
}

TEST_CASE("saturated matrix maximizes the log-likelihood") {
  covfit::Rng rng(1234);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 4);
    const auto inst = covfit::make_instance(rng.next_u64(), p, 0.5, 3 * p);
    const auto other = covfit::make_instance(rng.next_u64(), p, 0.9, 3 * p);
    CHECK(covfit::log_likelihood(inst.summary.cov, inst.summary) >=
          covfit::log_likelihood(
              CovarianceMatrix(inst.summary.cov.labels(), other.summary.cov.entries()),
              inst.summary));
  }
}

TEST_CASE("likelihood residual: saturated zero, golden diagonal value, oracle agreement") {
  covfit::Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 4);
    const auto inst = covfit::make_instance(rng.next_u64(), p, 1.1, 3 * p);  // complete graph
    REQUIRE(inst.graph.edge_count() == p * (p - 1) / 2);
    const double r = covfit::likelihood_residual(inst.summary.cov, inst.summary, inst.graph);
    CHECK(r <= 1e-10);
  }

  const BidirectedGraph g = fixture::wvxy_graph();
  const SampleSummary summary = fixture::observed_summary();
  const Eigen::MatrixXd diag = summary.cov.entries().diagonal().asDiagonal();
  const CovarianceMatrix sigma_diag(g.labels(), diag);
  const double resid = covfit::likelihood_residual(sigma_diag, summary, g);
  CHECK(resid == doctest::Approx(0.020528327863210041).epsilon(1e-10));
  CHECK(resid ==
        doctest::Approx(oracle::likelihood_residual(diag, summary.cov.entries(), g)).epsilon(1e-10));

  // zero-pattern violations are rejected with the offending entries named
  try {
    (void)covfit::likelihood_residual(summary.cov, summary, g);
    FAIL("expected a model-membership error");
  } catch (const covfit::ModelError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(W,V)") != std::string::npos);
    CHECK(msg.find("(W,Y)") != std::string::npos);
    CHECK(msg.find("(V,X)") != std::string::npos);
    CHECK(msg.find("(W,X)") == std::string::npos);  // free entries are not offenders
  }
}

TEST_CASE("score vanishes at closed-form optima and matches finite differences") {
  covfit::Rng rng(62);
  for (int trial = 0; trial < 8; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 4);
    const auto saturated = covfit::make_instance(rng.next_u64(), p, 1.1, 3 * p);
    CHECK(covfit::score(saturated.summary.cov, saturated.summary, saturated.graph).max_abs() <=
          1e-8);

    const auto empty = covfit::make_instance(rng.next_u64(), p, -0.1, 3 * p);
    REQUIRE(empty.graph.edge_count() == 0);
    const Eigen::MatrixXd diag = empty.summary.cov.entries().diagonal().asDiagonal();
    CHECK(covfit::score(CovarianceMatrix(empty.graph.labels(), diag), empty.summary, empty.graph)
              .max_abs() <= 1e-8);
  }

  for (int trial = 0; trial < 12; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 4);
    const auto inst = covfit::make_instance(rng.next_u64(), p, 0.5, 3 * p);
    // keep the point comfortably inside the cone so the finite-difference
    // truncation error stays below the comparison tolerance
    const double ridge = 0.25 * inst.sigma_true.diagonal().mean();
    const Eigen::MatrixXd conditioned =
        inst.sigma_true + ridge * Eigen::MatrixXd::Identity(p, p);
    const CovarianceMatrix point(inst.graph.labels(), conditioned);
    const auto sc = covfit::score(point, inst.summary, inst.graph);
    for (std::size_t k = 0; k < sc.pairs().size(); ++k) {
      const auto [i, j] = sc.pairs()[k];
      const double fd = oracle::fd_score_component(point, inst.summary, i, j, 1e-5);
      const double got = sc.values()(static_cast<Eigen::Index>(k));
      CHECK(std::abs(got - fd) <= 1e-5 * std::max({std::abs(got), std::abs(fd), 1.0}));
    }
  }
}

TEST_CASE("in-model membership") {
  const BidirectedGraph g = fixture::wvxy_graph();
  const CovarianceMatrix eye(g.labels(), Eigen::MatrixXd::Identity(4, 4));
  CHECK(covfit::in_model(eye, g, 0.0));
  CHECK_FALSE(covfit::in_model(fixture::observed_covariance(), g, 0.0));
  CHECK_FALSE(covfit::in_model(fixture::observed_covariance(), g));

  Eigen::MatrixXd nearly = Eigen::MatrixXd::Identity(4, 4);
  nearly(0, 1) = nearly(1, 0) = 5e-13;
  CHECK(covfit::in_model(CovarianceMatrix(g.labels(), nearly), g));
  CHECK_FALSE(covfit::in_model(CovarianceMatrix(g.labels(), nearly), g, 0.0));

  const CovarianceMatrix wrong(std::vector<std::string>{"a", "b", "c", "d"},
                               Eigen::MatrixXd::Identity(4, 4));
  CHECK_THROWS_AS((void)covfit::in_model(wrong, g), covfit::InputError);
}

TEST_CASE("score and residual vanish together at fitted points") {
  covfit::Rng rng(1717);
  for (int trial = 0; trial < 6; ++trial) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 3);
    const auto inst = covfit::make_instance(rng.next_u64(), p, 0.4, 4 * p);
    covfit::IcfOptions opts;
    opts.tol_residual = 1e-11;
    opts.tol_sigma = 1e-13;
    const auto fit = covfit::fit_icf(inst.summary, inst.graph, opts);
    REQUIRE(fit.converged);
    CHECK(covfit::likelihood_residual(fit.sigma_hat, inst.summary, inst.graph) <= 1e-10);
    CHECK(covfit::score(fit.sigma_hat, inst.summary, inst.graph).max_abs() <=
          1e-10 * inst.summary.n * std::max(1.0, inst.summary.cov.entries().cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("reordering permutes consistently") {
  const CovarianceMatrix s = fixture::observed_covariance();
  const CovarianceMatrix r = covfit::reordered(s, {"Y", "W", "X", "V"});
  CHECK(r(0, 0) == s(3, 3));
  CHECK(r(1, 2) == s(0, 2));
  const CovarianceMatrix back = covfit::reordered(r, s.labels());
  CHECK((back.entries() - s.entries()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(covfit::reordered(s, {"W", "V", "X", "Z"}), covfit::InputError);
  CHECK_THROWS_AS(covfit::reordered(s, {"W", "V", "X"}), covfit::InputError);
}
