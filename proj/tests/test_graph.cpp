#include "covfit/graph.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

#include "covfit/errors.hpp"
#include "covfit/instances.hpp"
#include "oracles.hpp"
#include "example_fixture.hpp"

using covfit::BidirectedGraph;
using covfit::Dag;
using covfit::SeparationQuery;

namespace {

SeparationQuery query(std::vector<std::string> a, std::vector<std::string> b,
                      std::vector<std::string> given = {}) {
  return SeparationQuery{std::move(a), std::move(b), std::move(given)};
}

bool same_graph(const BidirectedGraph& x, const BidirectedGraph& y) {
  return x.labels() == y.labels() && x.edges() == y.edges();
}

}  // namespace

TEST_CASE("spouse and non-spouse sets") {
  const BidirectedGraph g = fixture::numbered_graph();
  CHECK(g.spouses(g.index_of("1")) == std::vector<int>{2});       // {3}
  CHECK(g.nonspouses(g.index_of("1")) == std::vector<int>{1, 3});  // {2, 4}
  CHECK(g.spouses(g.index_of("3")) == std::vector<int>{0, 3});     // {1, 4}
  CHECK(g.nonspouses(g.index_of("3")) == std::vector<int>{1});     // {2}

  const BidirectedGraph lonely({"a", "b", "c"}, {{"a", "b"}});
  CHECK(lonely.spouses(2).empty());
  CHECK(lonely.nonspouses(2) == std::vector<int>{0, 1});

  CHECK_THROWS_AS((void)g.index_of("zz"), covfit::InputError);
  CHECK_THROWS_WITH_AS((void)g.index_of("zz"), "unknown vertex 'zz'", covfit::InputError);
}

TEST_CASE("graph construction rejects bad input") {
  CHECK_THROWS_AS(BidirectedGraph({"a", "a"}, {}), covfit::InputError);
  CHECK_THROWS_AS(BidirectedGraph({"a"}, {{"a", "a"}}), covfit::InputError);
  CHECK_THROWS_AS(BidirectedGraph({"a"}, {{"a", "b"}}), covfit::InputError);
  // duplicate edges collapse instead of erroring
  const BidirectedGraph g({"a", "b"}, {{"a", "b"}, {"b", "a"}});
  CHECK(g.edge_count() == 1);
}

TEST_CASE("m-separation on the four-variable example") {
  const BidirectedGraph g = fixture::numbered_graph();
  CHECK_FALSE(covfit::m_separated(g, query({"1"}, {"2"}, {"3", "4"})));
  CHECK(covfit::m_separated(g, query({"1"}, {"2"}, {"3"})));
  CHECK(covfit::m_separated(g, query({"1"}, {"2"}, {"4"})));
  CHECK(covfit::m_separated(g, query({"1"}, {"2"})));
  CHECK(covfit::m_separated(g, query({"1"}, {"2", "4"})));
  CHECK_FALSE(covfit::m_separated(g, query({"1"}, {"3", "2"})));  // adjacent pair present

  const auto path = covfit::m_connecting_path(g, query({"1"}, {"2"}, {"3", "4"}));
  REQUIRE(path.has_value());
  std::vector<std::string> labels;
  for (int v : *path) labels.push_back(g.label(v));
  CHECK(labels == std::vector<std::string>{"1", "3", "4", "2"});
}

TEST_CASE("m-separation validates its query") {
  const BidirectedGraph g = fixture::numbered_graph();
  CHECK_THROWS_AS((void)covfit::m_separated(g, query({"1"}, {"1", "2"})), covfit::InputError);
  CHECK_THROWS_AS((void)covfit::m_separated(g, query({"1"}, {"2"}, {"2"})), covfit::InputError);
  CHECK_THROWS_AS((void)covfit::m_separated(g, query({}, {"2"})), covfit::InputError);
  CHECK_THROWS_AS((void)covfit::m_separated(g, query({"1"}, {"nope"})), covfit::InputError);
}

TEST_CASE("d-separation basics") {
  const Dag chain({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  CHECK(covfit::d_separated(chain, query({"a"}, {"c"}, {"b"})));
  CHECK_FALSE(covfit::d_separated(chain, query({"a"}, {"c"})));

  const Dag collider({"a", "b", "c"}, {{"a", "b"}, {"c", "b"}});
  CHECK(covfit::d_separated(collider, query({"a"}, {"c"})));
  CHECK_FALSE(covfit::d_separated(collider, query({"a"}, {"c"}, {"b"})));

  // descendant of a collider opens it too
  const Dag desc({"a", "b", "c", "d"}, {{"a", "b"}, {"c", "b"}, {"b", "d"}});
  CHECK_FALSE(covfit::d_separated(desc, query({"a"}, {"c"}, {"d"})));

  const Dag hidden_dag({"1", "2", "3", "4", "u13", "u34", "u24"},
                  {{"u13", "1"}, {"u13", "3"}, {"u34", "3"}, {"u34", "4"}, {"u24", "2"},
                   {"u24", "4"}},
                  {"u13", "u34", "u24"});
  CHECK(covfit::d_separated(hidden_dag, query({"1"}, {"2", "4"})));
  CHECK(covfit::d_separated(hidden_dag, query({"2"}, {"1", "3"})));
  CHECK_FALSE(covfit::d_separated(hidden_dag, query({"1"}, {"2"}, {"3", "4"})));
}

TEST_CASE("dag construction rejects cycles") {
  CHECK_THROWS_AS(Dag({"a", "b"}, {{"a", "b"}, {"b", "a"}}), covfit::InputError);
  CHECK_THROWS_AS(Dag({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}}),
                  covfit::InputError);
}

TEST_CASE("latent projection of the hidden-variable DAG") {
  const Dag hidden_dag({"1", "2", "3", "4", "u13", "u34", "u24"},
                  {{"u13", "1"}, {"u13", "3"}, {"u34", "3"}, {"u34", "4"}, {"u24", "2"},
                   {"u24", "4"}},
                  {"u13", "u34", "u24"});
  CHECK(same_graph(covfit::latent_projection(hidden_dag), fixture::numbered_graph()));

  const Dag bare({"a", "b"}, {});
  const BidirectedGraph empty = covfit::latent_projection(bare);
  CHECK(empty.edge_count() == 0);
  CHECK(empty.labels() == std::vector<std::string>{"a", "b"});

  const Dag star({"1", "2", "3", "u"}, {{"u", "1"}, {"u", "2"}, {"u", "3"}}, {"u"});
  const BidirectedGraph complete = covfit::latent_projection(star);
  CHECK(complete.edge_count() == 3);

  const Dag bad({"a", "b", "u"}, {{"a", "b"}, {"u", "b"}}, {"u"});
  CHECK_THROWS_WITH_AS((void)covfit::latent_projection(bad),
                       "observed vertex 'a' has children; latent projection requires all "
                       "observed vertices to be childless",
                       covfit::InputError);
}

TEST_CASE("latent-to-latent chains still create shared ancestors") {
  const Dag d({"a", "b", "u1", "u2"}, {{"u1", "u2"}, {"u1", "a"}, {"u2", "b"}}, {"u1", "u2"});
  // u1 is an ancestor of both a and b through u2
  const BidirectedGraph g = covfit::latent_projection(d);
  CHECK(g.adjacent(g.index_of("a"), g.index_of("b")));
}

TEST_CASE("DAG-equivalence predicate and witnesses") {
  const BidirectedGraph chain4 = fixture::numbered_graph();
  CHECK_FALSE(covfit::dag_equivalent_exists(chain4));
  const auto witness = covfit::find_forbidden_induced_subgraph(chain4);
  REQUIRE(witness.has_value());
  CHECK(witness->kind == covfit::ForbiddenSubgraph::Kind::path4);
  std::vector<std::string> labels;
  for (int v : witness->vertices) labels.push_back(chain4.label(v));
  CHECK(labels == std::vector<std::string>{"1", "3", "4", "2"});

  CHECK(covfit::dag_equivalent_exists(BidirectedGraph({"a", "b"}, {{"a", "b"}})));

  const BidirectedGraph complete4(
      {"a", "b", "c", "d"},
      {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}, {"c", "d"}});
  CHECK(covfit::dag_equivalent_exists(complete4));

  const BidirectedGraph cycle4({"a", "b", "c", "d"},
                               {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}});
  const auto cyc = covfit::find_forbidden_induced_subgraph(cycle4);
  REQUIRE(cyc.has_value());
  CHECK(cyc->kind == covfit::ForbiddenSubgraph::Kind::cycle4);
}

TEST_CASE("bi-directed-equivalence predicate and witnesses") {
  const Dag collider({"a", "b", "c"}, {{"a", "b"}, {"c", "b"}});
  CHECK(covfit::bidirected_equivalent_exists(collider));

  const Dag chain({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  CHECK_FALSE(covfit::bidirected_equivalent_exists(chain));
  const auto witness = covfit::find_unshielded_noncollider(chain);
  REQUIRE(witness.has_value());
  std::set<std::string> labels{chain.label((*witness)[0]), chain.label((*witness)[1]),
                               chain.label((*witness)[2])};
  CHECK(labels == std::set<std::string>{"a", "b", "c"});
  CHECK(chain.label((*witness)[1]) == "b");

  const Dag complete({"a", "b", "c"}, {{"a", "b"}, {"a", "c"}, {"b", "c"}});
  CHECK(covfit::bidirected_equivalent_exists(complete));

  const Dag with_latent({"a", "u"}, {{"u", "a"}}, {"u"});
  CHECK_THROWS_AS((void)covfit::bidirected_equivalent_exists(with_latent), covfit::InputError);
}

TEST_CASE("pairwise independences") {
  using Pair = std::pair<std::string, std::string>;
  const auto pairs = covfit::pairwise_independences(fixture::numbered_graph());
  CHECK(pairs == std::vector<Pair>{{"1", "2"}, {"1", "4"}, {"2", "3"}});

  const BidirectedGraph complete({"a", "b", "c"}, {{"a", "b"}, {"a", "c"}, {"b", "c"}});
  CHECK(covfit::pairwise_independences(complete).empty());

  const BidirectedGraph none({"a", "b", "c"}, {});
  CHECK(covfit::pairwise_independences(none).size() == 3);
}

TEST_CASE("pairwise independence count matches the edge count") {
  covfit::Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 6);
    const auto inst = covfit::make_instance(rng.next_u64(), p, rng.uniform(), p);
    const auto& g = inst.graph;
    CHECK(static_cast<int>(covfit::pairwise_independences(g).size()) ==
          p * (p - 1) / 2 - g.edge_count());
  }
}

TEST_CASE("m-separation agrees with path enumeration on every small graph") {
  for (int p = 2; p <= 5; ++p) {
    const auto triples = oracle::all_disjoint_triples(p);
    long checks = 0;
    long mismatches = 0;
    oracle::for_all_bidirected_graphs(p, [&](const BidirectedGraph& g) {
      for (const auto& t : triples) {
        ++checks;
        const auto q = oracle::to_query(g.labels(), t);
        if (covfit::m_separated(g, q) != oracle::m_separated(g, t)) ++mismatches;
      }
    });
    CAPTURE(p);
    CAPTURE(checks);
    CHECK(mismatches == 0);
  }
}

TEST_CASE("m-separation symmetry and empty-conditioning characterization") {
  covfit::Rng rng(4242);
  for (int trial = 0; trial < 60; ++trial) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 4);
    const auto inst = covfit::make_instance(rng.next_u64(), p, 0.45, p);
    const auto& g = inst.graph;
    const auto t = oracle::random_triple(rng, p);
    const auto q = oracle::to_query(g.labels(), t);
    SeparationQuery swapped{q.set_b, q.set_a, q.given};
    CHECK(covfit::m_separated(g, q) == covfit::m_separated(g, swapped));

    // With nothing conditioned, only single edges connect.
    SeparationQuery marginal{q.set_a, q.set_b, {}};
    bool any_adjacent = false;
    for (int a : t.a) {
      for (int b : t.b) any_adjacent = any_adjacent || g.adjacent(a, b);
    }
    CHECK(covfit::m_separated(g, marginal) == !any_adjacent);
  }
}

TEST_CASE("d-separation agrees with path enumeration on random DAGs") {
  covfit::Rng rng(9001);
  for (int trial = 0; trial < 60; ++trial) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 3);
    // arbitrary DAG: orient random edges along a random vertex order
    std::vector<int> order(p);
    for (int i = 0; i < p; ++i) order[i] = i;
    for (int i = p - 1; i > 0; --i) {
      std::swap(order[i], order[rng.next_u64() % (i + 1)]);
    }
    const auto labels = oracle::index_labels(p);
    std::vector<std::pair<std::string, std::string>> edges;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        if (rng.uniform() < 0.5) edges.emplace_back(labels[order[i]], labels[order[j]]);
      }
    }
    const Dag d(labels, edges);
    for (const auto& t : oracle::all_disjoint_triples(p)) {
      const auto q = oracle::to_query(labels, t);
      CHECK(covfit::d_separated(d, q) == oracle::d_separated(d, t));
      SeparationQuery swapped{q.set_b, q.set_a, q.given};
      CHECK(covfit::d_separated(d, q) == covfit::d_separated(d, swapped));
    }
  }
}

TEST_CASE("projection preserves separation structure") {
  covfit::Rng rng(777);
  for (int trial = 0; trial < 120; ++trial) {
    const int n_obs = 2 + static_cast<int>(rng.next_u64() % 3);
    const int n_lat = static_cast<int>(rng.next_u64() % 4);
    const Dag d = oracle::random_admissible_dag(rng, n_obs, n_lat, 0.5);
    const BidirectedGraph g = covfit::latent_projection(d);
    for (const auto& t : oracle::all_disjoint_triples(n_obs)) {
      const auto qd = oracle::to_query(d.labels(), t);  // observed labels lead in d
      const auto qg = oracle::to_query(g.labels(), t);
      CHECK(covfit::d_separated(d, qd) == covfit::m_separated(g, qg));
    }
  }
}

TEST_CASE("equivalence predicates match literal scans on every small graph") {
  for (int p = 2; p <= 4; ++p) {
    oracle::for_all_bidirected_graphs(p, [&](const BidirectedGraph& g) {
      CHECK(covfit::dag_equivalent_exists(g) == oracle::dag_equivalent_exists(g));
    });
    oracle::for_all_dags(p, [&](const Dag& d) {
      CHECK(covfit::bidirected_equivalent_exists(d) == oracle::bidirected_equivalent_exists(d));
    });
  }
}

TEST_CASE("DAG-equivalence verdict is invariant under relabelling") {
  covfit::Rng rng(318);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 4 + static_cast<int>(rng.next_u64() % 3);
    const auto inst = covfit::make_instance(rng.next_u64(), p, 0.4, p);
    const auto& g = inst.graph;
    std::vector<int> perm(p);
    for (int i = 0; i < p; ++i) perm[i] = i;
    for (int i = p - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& [i, j] : g.edges()) edges.emplace_back(perm[i], perm[j]);
    const BidirectedGraph relabelled =
        BidirectedGraph::from_index_edges(oracle::index_labels(p), edges);
    CHECK(covfit::dag_equivalent_exists(g) == covfit::dag_equivalent_exists(relabelled));
  }
}

TEST_CASE("free pairs are diagonals then edges") {
  const BidirectedGraph g = fixture::wvxy_graph();
  const std::vector<std::pair<int, int>> expected{{0, 0}, {1, 1}, {2, 2}, {3, 3},
                                                  {0, 2}, {1, 3}, {2, 3}};
  CHECK(g.free_pairs() == expected);
}
