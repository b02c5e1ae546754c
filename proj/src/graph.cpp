#include "covfit/graph.hpp"

#include <algorithm>
#include <deque>
#include <queue>

#include "covfit/errors.hpp"

namespace covfit {

namespace {

std::unordered_map<std::string, int> build_index(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, int> index;
  index.reserve(labels.size());
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (labels[i].empty()) {
      throw InputError("empty vertex label");
    }
    if (!index.emplace(labels[i], i).second) {
      throw InputError("duplicate vertex label '" + labels[i] + "'");
    }
  }
  return index;
}

}  // namespace

BidirectedGraph::BidirectedGraph(std::vector<std::string> vertices,
                                 const std::vector<std::pair<std::string, std::string>>& edges)
    : labels_(std::move(vertices)), index_(build_index(labels_)) {
  const int p = size();
  adj_.assign(p, std::vector<bool>(p, false));
  spouse_.assign(p, {});
  for (const auto& [a, b] : edges) {
    const int i = index_of(a);
    const int j = index_of(b);
    if (i == j) {
      throw InputError("self-loop at vertex '" + a + "'");
    }
    if (!adj_[i][j]) {
      adj_[i][j] = adj_[j][i] = true;
      spouse_[i].push_back(j);
      spouse_[j].push_back(i);
      ++edge_count_;
    }
  }
  for (auto& sp : spouse_) {
    std::sort(sp.begin(), sp.end());
  }
}

BidirectedGraph BidirectedGraph::from_index_edges(std::vector<std::string> vertices,
                                                  const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::pair<std::string, std::string>> named;
  named.reserve(edges.size());
  for (const auto& [i, j] : edges) {
    named.emplace_back(vertices.at(i), vertices.at(j));
  }
  return BidirectedGraph(std::move(vertices), named);
}

int BidirectedGraph::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw InputError("unknown vertex '" + label + "'");
  }
  return it->second;
}

bool BidirectedGraph::has_vertex(const std::string& label) const {
  return index_.count(label) != 0;
}

void BidirectedGraph::check_vertex(int i) const {
  if (i < 0 || i >= size()) {
    throw InputError("vertex index " + std::to_string(i) + " out of range");
  }
}

bool BidirectedGraph::adjacent(int i, int j) const {
  check_vertex(i);
  check_vertex(j);
  return adj_[i][j];
}

std::vector<std::pair<int, int>> BidirectedGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count_);
  for (int i = 0; i < size(); ++i) {
    for (int j : spouse_[i]) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

const std::vector<int>& BidirectedGraph::spouses(int i) const {
  check_vertex(i);
  return spouse_[i];
}

std::vector<int> BidirectedGraph::nonspouses(int i) const {
  check_vertex(i);
  std::vector<int> out;
  out.reserve(size() - 1 - spouse_[i].size());
  for (int j = 0; j < size(); ++j) {
    if (j != i && !adj_[i][j]) out.push_back(j);
  }
  return out;
}

std::vector<std::pair<int, int>> BidirectedGraph::free_pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(size() + edge_count_);
  for (int i = 0; i < size(); ++i) out.emplace_back(i, i);
  for (const auto& e : edges()) out.push_back(e);
  return out;
}

Dag::Dag(std::vector<std::string> vertices,
         const std::vector<std::pair<std::string, std::string>>& directed_edges,
         const std::vector<std::string>& latent)
    : labels_(std::move(vertices)), index_(build_index(labels_)) {
  const int p = size();
  parents_.assign(p, {});
  children_.assign(p, {});
  latent_.assign(p, false);
  std::vector<std::vector<bool>> seen(p, std::vector<bool>(p, false));
  for (const auto& [a, b] : directed_edges) {
    const int i = index_of(a);
    const int j = index_of(b);
    if (i == j) {
      throw InputError("self-loop at vertex '" + a + "'");
    }
    if (!seen[i][j]) {
      seen[i][j] = true;
      children_[i].push_back(j);
      parents_[j].push_back(i);
    }
  }
  for (const auto& l : latent) {
    latent_[index_of(l)] = true;
  }
  for (int i = 0; i < p; ++i) {
    std::sort(parents_[i].begin(), parents_[i].end());
    std::sort(children_[i].begin(), children_[i].end());
  }

  // Kahn's algorithm; leftovers mean a directed cycle.
  std::vector<int> indeg(p);
  for (int i = 0; i < p; ++i) indeg[i] = static_cast<int>(parents_[i].size());
  std::queue<int> ready;
  for (int i = 0; i < p; ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  int done = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop();
    ++done;
    for (int c : children_[v]) {
      if (--indeg[c] == 0) ready.push(c);
    }
  }
  if (done != p) {
    throw InputError("directed edges contain a cycle");
  }
}

int Dag::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw InputError("unknown vertex '" + label + "'");
  }
  return it->second;
}

bool Dag::has_vertex(const std::string& label) const { return index_.count(label) != 0; }

void Dag::check_vertex(int i) const {
  if (i < 0 || i >= size()) {
    throw InputError("vertex index " + std::to_string(i) + " out of range");
  }
}

bool Dag::has_edge(int from, int to) const {
  check_vertex(from);
  check_vertex(to);
  return std::binary_search(children_[from].begin(), children_[from].end(), to);
}

bool Dag::adjacent(int i, int j) const { return has_edge(i, j) || has_edge(j, i); }

const std::vector<int>& Dag::parents(int i) const {
  check_vertex(i);
  return parents_[i];
}

const std::vector<int>& Dag::children(int i) const {
  check_vertex(i);
  return children_[i];
}

std::vector<int> Dag::observed() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (!latent_[i]) out.push_back(i);
  }
  return out;
}

std::vector<int> Dag::latents() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (latent_[i]) out.push_back(i);
  }
  return out;
}

int Dag::latent_count() const {
  return static_cast<int>(std::count(latent_.begin(), latent_.end(), true));
}

std::vector<int> Dag::ancestors(int i) const {
  check_vertex(i);
  std::vector<bool> mark(size(), false);
  std::vector<int> stack{i};
  mark[i] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int par : parents_[v]) {
      if (!mark[par]) {
        mark[par] = true;
        stack.push_back(par);
      }
    }
  }
  std::vector<int> out;
  for (int v = 0; v < size(); ++v) {
    if (mark[v]) out.push_back(v);
  }
  return out;
}

namespace {

struct ResolvedQuery {
  std::vector<int> a;
  std::vector<int> b;
  std::vector<int> given;
};

template <typename Graph>
std::vector<int> resolve_set(const Graph& g, const std::vector<std::string>& labels,
                             const char* name, bool allow_empty) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    out.push_back(g.index_of(l));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (!allow_empty && out.empty()) {
    throw InputError(std::string(name) + " must be non-empty");
  }
  return out;
}

template <typename Graph>
ResolvedQuery resolve_query(const Graph& g, const SeparationQuery& q) {
  ResolvedQuery r;
  r.a = resolve_set(g, q.set_a, "set A", false);
  r.b = resolve_set(g, q.set_b, "set B", false);
  r.given = resolve_set(g, q.given, "conditioning set", true);
  auto overlaps = [](const std::vector<int>& x, const std::vector<int>& y) {
    for (int v : x) {
      if (std::binary_search(y.begin(), y.end(), v)) return true;
    }
    return false;
  };
  if (overlaps(r.a, r.b) || overlaps(r.a, r.given) || overlaps(r.b, r.given)) {
    throw InputError("query sets must be pairwise disjoint");
  }
  return r;
}

}  // namespace

std::optional<std::vector<int>> m_connecting_path(const BidirectedGraph& g,
                                                  const SeparationQuery& q) {
  const ResolvedQuery r = resolve_query(g, q);
  const int p = g.size();
  std::vector<bool> in_b(p, false), in_given(p, false);
  for (int v : r.b) in_b[v] = true;
  for (int v : r.given) in_given[v] = true;

  // A path m-connects iff all interior vertices lie in `given`, so search the
  // graph expanding only through conditioning vertices.
  std::vector<int> parent(p, -1);
  std::vector<bool> visited(p, false);
  std::deque<int> frontier;
  for (int a : r.a) {
    visited[a] = true;
    frontier.push_back(a);
  }
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (int w : g.spouses(u)) {
      if (visited[w]) continue;
      if (in_b[w]) {
        std::vector<int> path{w};
        for (int v = u; v != -1; v = parent[v]) path.push_back(v);
        std::reverse(path.begin(), path.end());
        return path;
      }
      if (in_given[w]) {
        visited[w] = true;
        parent[w] = u;
        frontier.push_back(w);
      }
    }
  }
  return std::nullopt;
}

bool m_separated(const BidirectedGraph& g, const SeparationQuery& q) {
  return !m_connecting_path(g, q).has_value();
}

bool d_separated(const Dag& d, const SeparationQuery& q) {
  const ResolvedQuery r = resolve_query(d, q);
  const int p = d.size();
  std::vector<bool> in_given(p, false), in_b(p, false);
  for (int v : r.given) in_given[v] = true;
  for (int v : r.b) in_b[v] = true;

  // Vertices with a descendant in the conditioning set (themselves included):
  // exactly the vertices at which a collider is open.
  std::vector<bool> anc_given(p, false);
  {
    std::vector<int> stack(r.given);
    for (int v : r.given) anc_given[v] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int par : d.parents(v)) {
        if (!anc_given[par]) {
          anc_given[par] = true;
          stack.push_back(par);
        }
      }
    }
  }

  // Reachability over (vertex, arrival direction) states.
  constexpr int kFromChild = 0;   // arrived moving upward (v <- child)
  constexpr int kFromParent = 1;  // arrived moving downward (parent -> v)
  std::vector<std::array<bool, 2>> seen(p, {false, false});
  std::deque<std::pair<int, int>> frontier;
  auto push = [&](int v, int dir) {
    if (!seen[v][dir]) {
      seen[v][dir] = true;
      frontier.emplace_back(v, dir);
    }
  };
  for (int a : r.a) push(a, kFromChild);
  while (!frontier.empty()) {
    const auto [v, dir] = frontier.front();
    frontier.pop_front();
    if (in_b[v]) return false;
    if (dir == kFromChild) {
      if (!in_given[v]) {
        for (int par : d.parents(v)) push(par, kFromChild);
        for (int ch : d.children(v)) push(ch, kFromParent);
      }
    } else {
      if (!in_given[v]) {
        for (int ch : d.children(v)) push(ch, kFromParent);
      }
      if (anc_given[v]) {
        for (int par : d.parents(v)) push(par, kFromChild);
      }
    }
  }
  return true;
}

BidirectedGraph latent_projection(const Dag& d) {
  for (int i = 0; i < d.size(); ++i) {
    if (!d.is_latent(i) && !d.children(i).empty()) {
      throw InputError("observed vertex '" + d.label(i) +
                       "' has children; latent projection requires all observed vertices "
                       "to be childless");
    }
  }
  const std::vector<int> obs = d.observed();
  std::vector<std::string> labels;
  labels.reserve(obs.size());
  for (int v : obs) labels.push_back(d.label(v));

  std::vector<std::vector<bool>> anc(obs.size(), std::vector<bool>(d.size(), false));
  for (std::size_t k = 0; k < obs.size(); ++k) {
    for (int v : d.ancestors(obs[k])) anc[k][v] = true;
  }
  std::vector<std::pair<int, int>> edges;
  for (std::size_t a = 0; a < obs.size(); ++a) {
    for (std::size_t b = a + 1; b < obs.size(); ++b) {
      bool shared = false;
      for (int v = 0; v < d.size() && !shared; ++v) {
        shared = anc[a][v] && anc[b][v];
      }
      if (shared) edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }
  return BidirectedGraph::from_index_edges(std::move(labels), edges);
}

std::optional<ForbiddenSubgraph> find_forbidden_induced_subgraph(const BidirectedGraph& g) {
  const int p = g.size();
  std::array<int, 4> v{};
  for (v[0] = 0; v[0] < p; ++v[0]) {
    for (v[1] = v[0] + 1; v[1] < p; ++v[1]) {
      for (v[2] = v[1] + 1; v[2] < p; ++v[2]) {
        for (v[3] = v[2] + 1; v[3] < p; ++v[3]) {
          int deg[4] = {0, 0, 0, 0};
          int edge_total = 0;
          for (int a = 0; a < 4; ++a) {
            for (int b = a + 1; b < 4; ++b) {
              if (g.adjacent(v[a], v[b])) {
                ++deg[a];
                ++deg[b];
                ++edge_total;
              }
            }
          }
          if (edge_total == 3) {
            // Degree profile {1,1,2,2} with 3 edges is exactly a 4-path.
            int ones = 0, twos = 0;
            for (int d : deg) {
              ones += d == 1;
              twos += d == 2;
            }
            if (ones == 2 && twos == 2) {
              ForbiddenSubgraph f;
              f.kind = ForbiddenSubgraph::Kind::path4;
              // Order along the path: endpoint, then follow adjacency.
              int start = 0;
              while (deg[start] != 1) ++start;
              std::array<bool, 4> used{};
              f.vertices[0] = v[start];
              used[start] = true;
              for (int k = 1; k < 4; ++k) {
                for (int c = 0; c < 4; ++c) {
                  if (!used[c] && g.adjacent(f.vertices[k - 1], v[c])) {
                    f.vertices[k] = v[c];
                    used[c] = true;
                    break;
                  }
                }
              }
              return f;
            }
          } else if (edge_total == 4) {
            // Degree profile all-2 with 4 edges is exactly a 4-cycle.
            if (deg[0] == 2 && deg[1] == 2 && deg[2] == 2 && deg[3] == 2) {
              ForbiddenSubgraph f;
              f.kind = ForbiddenSubgraph::Kind::cycle4;
              f.vertices[0] = v[0];
              int prev = 0, cur = -1;
              for (int c = 1; c < 4; ++c) {
                if (g.adjacent(v[0], v[c])) {
                  cur = c;
                  break;
                }
              }
              f.vertices[1] = v[cur];
              for (int k = 2; k < 4; ++k) {
                for (int c = 0; c < 4; ++c) {
                  if (c != prev && c != cur && g.adjacent(v[cur], v[c])) {
                    prev = cur;
                    cur = c;
                    break;
                  }
                }
                f.vertices[k] = v[cur];
              }
              return f;
            }
          }
        }
      }
    }
  }
  return std::nullopt;
}

bool dag_equivalent_exists(const BidirectedGraph& g) {
  return !find_forbidden_induced_subgraph(g).has_value();
}

std::optional<std::array<int, 3>> find_unshielded_noncollider(const Dag& d) {
  if (d.latent_count() > 0) {
    throw InputError("equivalence test requires a DAG without latent vertices");
  }
  const int p = d.size();
  for (int b = 0; b < p; ++b) {
    for (int a = 0; a < p; ++a) {
      if (a == b || !d.adjacent(a, b)) continue;
      for (int c = a + 1; c < p; ++c) {
        if (c == b || !d.adjacent(b, c) || d.adjacent(a, c)) continue;
        if (!(d.has_edge(a, b) && d.has_edge(c, b))) {
          return std::array<int, 3>{a, b, c};
        }
      }
    }
  }
  return std::nullopt;
}

bool bidirected_equivalent_exists(const Dag& d) {
  return !find_unshielded_noncollider(d).has_value();
}

std::vector<std::pair<std::string, std::string>> pairwise_independences(const BidirectedGraph& g) {
  std::vector<std::pair<std::string, std::string>> out;
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      if (!g.adjacent(i, j)) out.emplace_back(g.label(i), g.label(j));
    }
  }
  return out;
}

}  // namespace covfit
