#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "fedmod/core.hpp"

namespace fedmod {

// Weighted conflict graph: vertices are candidate assignments/transmissions,
// edges are mutual exclusions. Vertex ids are dense indices.
template <typename Payload>
class ConflictGraph {
 public:
  struct Vertex {
    int id;
    Payload payload;
    double weight;
  };

  int add_vertex(Payload payload, double weight) {
    if (!std::isfinite(weight)) fail("conflict graph: non-finite vertex weight");
    int id = static_cast<int>(vertices_.size());
    vertices_.push_back(Vertex{id, std::move(payload), weight});
    adj_.emplace_back(vertices_.size(), 0);
    for (auto& row : adj_) row.resize(vertices_.size(), 0);
    return id;
  }

  void add_edge(int a, int b) {
    check_id(a);
    check_id(b);
    if (a == b) fail("conflict graph: self-loop on vertex ", a);
    adj_[a][b] = adj_[b][a] = 1;
  }

  bool adjacent(int a, int b) const {
    check_id(a);
    check_id(b);
    return adj_[a][b] != 0;
  }

  int size() const { return static_cast<int>(vertices_.size()); }
  bool empty() const { return vertices_.empty(); }
  const Vertex& vertex(int id) const {
    check_id(id);
    return vertices_[id];
  }
  const std::vector<Vertex>& vertices() const { return vertices_; }

  int degree(int id) const {
    check_id(id);
    int d = 0;
    for (int j = 0; j < size(); ++j) d += adj_[id][j];
    return d;
  }

  // Plain edge-list dump for external inspection: "n m" header, then one
  // "a b" line per edge, then "v <id> <weight>" lines.
  void dump_edge_list(std::ostream& os) const {
    int m = 0;
    for (int a = 0; a < size(); ++a)
      for (int b = a + 1; b < size(); ++b) m += adj_[a][b];
    os << size() << " " << m << "\n";
    for (int a = 0; a < size(); ++a)
      for (int b = a + 1; b < size(); ++b)
        if (adj_[a][b]) os << a << " " << b << "\n";
    for (const auto& v : vertices_) os << "v " << v.id << " " << v.weight << "\n";
  }

 private:
  void check_id(int id) const {
    if (id < 0 || id >= size()) fail("conflict graph: vertex id ", id, " out of range");
  }

  std::vector<Vertex> vertices_;
  std::vector<std::vector<char>> adj_;
};

struct IndependentSet {
  std::vector<int> ids;  // sorted ascending
  double total_weight = 0.0;
};

template <typename P>
bool is_independent(const ConflictGraph<P>& g, const std::vector<int>& ids) {
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j)
      if (g.adjacent(ids[i], ids[j])) return false;
  return true;
}

template <typename P>
bool is_maximal(const ConflictGraph<P>& g, const std::vector<int>& ids) {
  if (!is_independent(g, ids)) return false;
  std::vector<char> in(g.size(), 0);
  for (int id : ids) in[id] = 1;
  for (int v = 0; v < g.size(); ++v) {
    if (in[v]) continue;
    bool clash = false;
    for (int id : ids)
      if (g.adjacent(v, id)) {
        clash = true;
        break;
      }
    if (!clash) return false;
  }
  return true;
}

enum class Objective { max_weight, min_weight_maximal };

namespace detail {

template <typename P>
double set_weight(const ConflictGraph<P>& g, const std::vector<int>& ids) {
  double w = 0.0;
  for (int id : ids) w += g.vertex(id).weight;
  return w;
}

}  // namespace detail

// Exhaustive oracle. Ties broken by lexicographically smallest id set.
template <typename P>
IndependentSet brute_force_best(const ConflictGraph<P>& g, Objective objective) {
  const int n = g.size();
  if (n > 25) fail("brute_force_best: graph too large (", n, " > 25)");
  std::vector<int> best;
  double best_w = 0.0;
  bool have = false;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> ids;
    for (int v = 0; v < n; ++v)
      if (mask & (1u << v)) ids.push_back(v);
    if (!is_independent(g, ids)) continue;
    if (objective == Objective::min_weight_maximal && !is_maximal(g, ids)) continue;
    double w = detail::set_weight(g, ids);
    bool better;
    if (!have) {
      better = true;
    } else if (objective == Objective::max_weight) {
      better = w > best_w || (w == best_w && ids < best);
    } else {
      better = w < best_w || (w == best_w && ids < best);
    }
    if (better) {
      best = ids;
      best_w = w;
      have = true;
    }
  }
  return IndependentSet{best, best_w};
}

// Greedy maximum-weight independent set: repeatedly take the heaviest
// non-conflicting vertex; ties by lowest id. Result is maximal.
template <typename P>
IndependentSet greedy_mwis(const ConflictGraph<P>& g) {
  const int n = g.size();
  std::vector<char> blocked(n, 0);
  std::vector<int> picked;
  for (;;) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (blocked[v]) continue;
      if (best < 0 || g.vertex(v).weight > g.vertex(best).weight) best = v;
    }
    if (best < 0) break;
    picked.push_back(best);
    blocked[best] = 1;
    for (int v = 0; v < n; ++v)
      if (!blocked[v] && g.adjacent(best, v)) blocked[v] = 1;
  }
  std::sort(picked.begin(), picked.end());
  return IndependentSet{picked, detail::set_weight(g, picked)};
}

// Greedy minimum-weight selection, grown until maximal (or until max_size):
// the scheduling reading of the minimum independent set weighting-search.
template <typename P>
IndependentSet greedy_min_wis(const ConflictGraph<P>& g, int max_size) {
  if (max_size < 1) fail("greedy_min_wis: max_size must be >= 1");
  const int n = g.size();
  std::vector<char> blocked(n, 0);
  std::vector<int> picked;
  while (static_cast<int>(picked.size()) < max_size) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (blocked[v]) continue;
      if (best < 0 || g.vertex(v).weight < g.vertex(best).weight) best = v;
    }
    if (best < 0) break;
    picked.push_back(best);
    blocked[best] = 1;
    for (int v = 0; v < n; ++v)
      if (!blocked[v] && g.adjacent(best, v)) blocked[v] = 1;
  }
  std::sort(picked.begin(), picked.end());
  return IndependentSet{picked, detail::set_weight(g, picked)};
}

}  // namespace fedmod
