#pragma once

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace covfit {

/// Query sets for separation tests. Sets must be pairwise disjoint and
/// set_a, set_b non-empty; `given` may be empty.
struct SeparationQuery {
  std::vector<std::string> set_a;
  std::vector<std::string> set_b;
  std::vector<std::string> given;
};

/// Graph whose every edge is bi-directed; missing edges encode marginal
/// independences. Vertex declaration order is stable and defines the index
/// order used by all matrix-facing code. Immutable after construction.
class BidirectedGraph {
 public:
  BidirectedGraph() = default;
  BidirectedGraph(std::vector<std::string> vertices,
                  const std::vector<std::pair<std::string, std::string>>& edges);

  /// Same graph built from index pairs (testing and generators).
  static BidirectedGraph from_index_edges(std::vector<std::string> vertices,
                                          const std::vector<std::pair<int, int>>& edges);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int i) const { return labels_.at(i); }
  int index_of(const std::string& label) const;  // throws InputError for unknown labels
  bool has_vertex(const std::string& label) const;

  bool adjacent(int i, int j) const;
  int edge_count() const { return edge_count_; }
  /// Edges as index pairs (i, j), i < j, lexicographic.
  std::vector<std::pair<int, int>> edges() const;

  /// sp(i): vertices joined to i by an edge, sorted by index.
  const std::vector<int>& spouses(int i) const;
  /// nsp(i): everything except i and its spouses, sorted by index.
  std::vector<int> nonspouses(int i) const;

  /// Free index pairs of the covariance parameterization: diagonals (i,i) in
  /// vertex order, then edges (i,j), i<j, lexicographic. This is the canonical
  /// ordering used everywhere a free-parameter vector appears.
  std::vector<std::pair<int, int>> free_pairs() const;

 private:
  void check_vertex(int i) const;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<bool>> adj_;
  std::vector<std::vector<int>> spouse_;
  int edge_count_ = 0;
};

/// Directed acyclic graph with an observed/latent vertex partition.
/// Immutable after construction; the constructor rejects cycles.
class Dag {
 public:
  Dag() = default;
  Dag(std::vector<std::string> vertices,
      const std::vector<std::pair<std::string, std::string>>& directed_edges,
      const std::vector<std::string>& latent = {});

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int i) const { return labels_.at(i); }
  int index_of(const std::string& label) const;
  bool has_vertex(const std::string& label) const;

  bool has_edge(int from, int to) const;
  bool adjacent(int i, int j) const;  // ignoring direction
  const std::vector<int>& parents(int i) const;
  const std::vector<int>& children(int i) const;
  bool is_latent(int i) const { return latent_.at(i); }
  std::vector<int> observed() const;
  std::vector<int> latents() const;
  int latent_count() const;

  /// an(i): vertices with a directed path to i, including i itself.
  std::vector<int> ancestors(int i) const;

 private:
  void check_vertex(int i) const;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<bool> latent_;
};

/// True iff no path between the sets has all of its interior vertices inside
/// `given` (every interior vertex of a bi-directed path is a collider, so a
/// path connects exactly when its interior lies in the conditioning set).
bool m_separated(const BidirectedGraph& g, const SeparationQuery& q);

/// A witnessing path (vertex indices from set_a to set_b) when the sets are
/// m-connected; nullopt when separated.
std::optional<std::vector<int>> m_connecting_path(const BidirectedGraph& g,
                                                  const SeparationQuery& q);

/// Standard d-separation: colliders block unless they or a descendant are in
/// `given`; non-colliders block when in `given`.
bool d_separated(const Dag& d, const SeparationQuery& q);

/// Bi-directed graph over the observed vertices with an edge i <-> j exactly
/// when i and j share an ancestor. Requires every observed vertex childless.
BidirectedGraph latent_projection(const Dag& d);

/// An induced subgraph certifying that no Markov-equivalent DAG exists:
/// either a 4-path a<->b<->c<->d or a 4-cycle a<->b<->c<->d<->a.
struct ForbiddenSubgraph {
  enum class Kind { path4, cycle4 };
  Kind kind = Kind::path4;
  std::array<int, 4> vertices{};  // in path / cycle order
};

std::optional<ForbiddenSubgraph> find_forbidden_induced_subgraph(const BidirectedGraph& g);

/// True iff some DAG on the same vertex set is Markov equivalent to g.
bool dag_equivalent_exists(const BidirectedGraph& g);

/// A triple (a, b, c) with a-b, b-c adjacent, a,c non-adjacent and not
/// oriented a -> b <- c; nullopt when none exists. Requires a latent-free DAG.
std::optional<std::array<int, 3>> find_unshielded_noncollider(const Dag& d);

/// True iff some bi-directed graph on the same vertex set is Markov
/// equivalent to d. Requires a latent-free DAG.
bool bidirected_equivalent_exists(const Dag& d);

/// All non-adjacent unordered label pairs, lexicographic in vertex-index order.
std::vector<std::pair<std::string, std::string>> pairwise_independences(const BidirectedGraph& g);

}  // namespace covfit
