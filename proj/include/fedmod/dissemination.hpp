#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fedmod/core.hpp"
#include "fedmod/graphs.hpp"
#include "fedmod/radio.hpp"
#include "fedmod/scenario.hpp"

namespace fedmod {

// UAV-to-UAV connectivity plus directed link rates. Decoupled from Scenario
// so fixtures can state arbitrary topologies and rate tables directly.
struct UavTopology {
  int num_uavs = 0;
  std::vector<std::pair<int, int>> edges;              // undirected, first < second
  std::map<std::pair<int, int>, double> rate_bps;      // directed

  bool adjacent(int a, int b) const {
    auto e = std::minmax(a, b);
    return std::find(edges.begin(), edges.end(), std::make_pair(e.first, e.second)) != edges.end();
  }

  std::vector<int> neighbors(int k) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges) {
      if (a == k) out.push_back(b);
      if (b == k) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  double rate(int tx, int rx) const {
    auto it = rate_bps.find({tx, rx});
    if (it == rate_bps.end())
      fail<config_error>("uav topology: no rate for link ", tx, " -> ", rx);
    return it->second;
  }

  void validate() const {
    for (const auto& [a, b] : edges) {
      if (a == b) fail<config_error>("uav topology: self-loop on ", a);
      if (a < 0 || b < 0 || a >= num_uavs || b >= num_uavs)
        fail<config_error>("uav topology: edge (", a, ",", b, ") out of range");
      if (!rate_bps.count({a, b}) || !rate_bps.count({b, a}))
        fail<config_error>("uav topology: missing rate for edge (", a, ",", b, ")");
      if (rate_bps.at({a, b}) <= 0 || rate_bps.at({b, a}) <= 0)
        fail<config_error>("uav topology: rates must be positive on edge (", a, ",", b, ")");
    }
  }

  // UAVs unreachable from UAV 0 (empty means connected).
  std::vector<int> unreachable() const {
    if (num_uavs == 0) return {};
    std::vector<char> seen(num_uavs, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int k = stack.back();
      stack.pop_back();
      for (int n : neighbors(k))
        if (!seen[n]) {
          seen[n] = 1;
          stack.push_back(n);
        }
    }
    std::vector<int> out;
    for (int k = 0; k < num_uavs; ++k)
      if (!seen[k]) out.push_back(k);
    return out;
  }

  static UavTopology from_scenario(const Scenario& s, PairRateMode mode) {
    UavTopology t;
    t.num_uavs = s.num_uavs();
    t.edges = s.uav_edges;
    for (const auto& [a, b] : t.edges) {
      t.rate_bps[{a, b}] = uav_pair_rate_bps(a, b, s, mode);
      t.rate_bps[{b, a}] = uav_pair_rate_bps(b, a, s, mode);
    }
    t.validate();
    return t;
  }

  static UavTopology fully_connected(int k, double rate) {
    UavTopology t;
    t.num_uavs = k;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) {
        t.edges.emplace_back(a, b);
        t.rate_bps[{a, b}] = rate;
        t.rate_bps[{b, a}] = rate;
      }
    return t;
  }
};

// Per-UAV Known/Unknown cluster-model id sets.
struct SideInformation {
  std::vector<std::set<int>> known;
  std::vector<std::set<int>> unknown;

  static SideInformation initial(int num_uavs) {
    SideInformation s;
    s.known.resize(num_uavs);
    s.unknown.resize(num_uavs);
    for (int k = 0; k < num_uavs; ++k) {
      s.known[k].insert(k);
      for (int m = 0; m < num_uavs; ++m)
        if (m != k) s.unknown[k].insert(m);
    }
    return s;
  }

  int num_uavs() const { return static_cast<int>(known.size()); }

  bool complete(int k) const { return unknown[k].empty(); }

  int first_complete() const {
    for (int k = 0; k < num_uavs(); ++k)
      if (complete(k)) return k;
    return -1;
  }

  void validate() const {
    const int n = num_uavs();
    for (int k = 0; k < n; ++k) {
      if (!known[k].count(k)) fail("side information: uav ", k, " must know its own model");
      for (int m = 0; m < n; ++m) {
        bool in_known = known[k].count(m) > 0;
        bool in_unknown = unknown[k].count(m) > 0;
        if (in_known == in_unknown)
          fail("side information: model ", m, " must be in exactly one set of uav ", k);
      }
    }
  }
};

// One XOR-coded transmission: every target decodes exactly one new model.
struct CodedPacket {
  int tx_uav = -1;
  std::set<int> payload_ids;
  std::set<int> targets;
  double rate_bps = 0.0;                 // adopted common rate of the round
  std::map<int, double> link_rate_bps;   // per-target raw link rate
};

struct DisseminationVertex {
  int tx = -1, rx = -1, model = -1;
  double rate_bps = 0.0;
};

struct RoundRecord {
  int index = 0;  // 1-based
  std::vector<CodedPacket> packets;
  double common_rate_bps = 0.0;
  double time_s = 0.0;
};

struct BroadcastHop {
  int tx = -1;
  std::set<int> targets;
  double rate_bps = 0.0;
  double time_s = 0.0;
};

struct DisseminationTrace {
  SideInformation initial;
  std::vector<RoundRecord> rounds;
  std::vector<BroadcastHop> broadcast_hops;
  double t_diss_s = 0.0;
  int complete_uav = -1;
  int rounds_to_consensus = 0;
};

// Instant-decodability: two same-transmitter vertices can share one XOR
// payload iff each receiver already knows the other receiver's missing model.
inline bool xor_compatible(const SideInformation& side, const DisseminationVertex& a,
                           const DisseminationVertex& b) {
  if (a.model == b.model) return true;
  return side.known[a.rx].count(b.model) > 0 && side.known[b.rx].count(a.model) > 0;
}

// Number of neighbors the transmitter can currently serve (the N_k factor of
// the vertex utility).
inline int servable_neighbors(const SideInformation& side, const UavTopology& topo, int k) {
  int n = 0;
  for (int i : topo.neighbors(k)) {
    for (int m : side.known[k])
      if (side.unknown[i].count(m)) {
        ++n;
        break;
      }
  }
  return n;
}

// Full conflict graph over candidate transmissions, with encoding (CC1),
// transmission (CC3) and half-duplex (CC4) conflict edges. The rate conflict
// (CC2) is not an edge here: links carry a single deterministic rate, and a
// round adopts the minimum over everything it schedules.
inline ConflictGraph<DisseminationVertex> build_fedmod_graph(const SideInformation& side,
                                                             const UavTopology& topo) {
  ConflictGraph<DisseminationVertex> g;
  for (int k = 0; k < topo.num_uavs; ++k) {
    int nk = servable_neighbors(side, topo, k);
    if (nk == 0) continue;
    for (int i : topo.neighbors(k)) {
      for (int m : side.known[k]) {
        if (!side.unknown[i].count(m)) continue;
        DisseminationVertex v{k, i, m, topo.rate(k, i)};
        g.add_vertex(v, v.rate_bps * nk);
      }
    }
  }
  for (int a = 0; a < g.size(); ++a) {
    for (int b = a + 1; b < g.size(); ++b) {
      const auto& va = g.vertex(a).payload;
      const auto& vb = g.vertex(b).payload;
      bool conflict = false;
      if (va.tx == vb.tx) {
        conflict = !xor_compatible(side, va, vb);  // encoding conflict
      } else {
        if (va.rx == vb.rx) conflict = true;                    // shared receiver
        if (va.tx == vb.rx || vb.tx == va.rx) conflict = true;  // half duplex
      }
      if (conflict) g.add_edge(a, b);
    }
  }
  return g;
}

namespace detail {

struct LocalPlan {
  std::vector<DisseminationVertex> verts;  // creation order: rx asc, model asc
  std::vector<double> weight;
  std::vector<char> alive;
  std::vector<int> selected;  // indices into verts
};

inline double plan_weight(const LocalPlan& p) {
  double w = 0.0;
  for (int v : p.selected) w += p.weight[v];
  return w;
}

// Greedy MWIS over one transmitter's alive vertices under the CC1 rule.
// Ties by creation order.
inline void solve_local(const SideInformation& side, LocalPlan& p) {
  p.selected.clear();
  std::vector<char> blocked(p.verts.size(), 0);
  for (;;) {
    int best = -1;
    for (std::size_t v = 0; v < p.verts.size(); ++v) {
      if (!p.alive[v] || blocked[v]) continue;
      if (best < 0 || p.weight[v] > p.weight[best]) best = static_cast<int>(v);
    }
    if (best < 0) break;
    p.selected.push_back(best);
    blocked[best] = 1;
    for (std::size_t v = 0; v < p.verts.size(); ++v)
      if (p.alive[v] && !blocked[v] && !xor_compatible(side, p.verts[best], p.verts[v]))
        blocked[v] = 1;
  }
  std::sort(p.selected.begin(), p.selected.end());
}

inline std::set<int> claimed_receivers(const LocalPlan& p) {
  std::set<int> out;
  for (int v : p.selected) out.insert(p.verts[v].rx);
  return out;
}

}  // namespace detail

// One synchronous scheduling round. Initial phase: every UAV solves a local
// MWIS over its own candidate transmissions. Conflict solution phase:
// receivers claimed by several transmitters are assigned to the claimant
// that maximizes the total of its kept weight plus everyone else's fallback
// weight; the losers drop the receiver and re-solve.
// Finally transmitters are committed one by one (half-duplex enforced);
// commitment order prefers a transmission that completes a UAV, then a
// sole-supply leaf transmitter (its model can only ever leave through one
// link, so its window is scarce), then total claim weight.
inline std::vector<CodedPacket> schedule_round(const SideInformation& side,
                                               const UavTopology& topo) {
  const int K = topo.num_uavs;
  std::vector<detail::LocalPlan> plans(K);

  for (int k = 0; k < K; ++k) {
    int nk = servable_neighbors(side, topo, k);
    if (nk == 0) continue;
    auto& p = plans[k];
    for (int i : topo.neighbors(k)) {
      for (int m : side.known[k]) {
        if (!side.unknown[i].count(m)) continue;
        p.verts.push_back(DisseminationVertex{k, i, m, topo.rate(k, i)});
        p.weight.push_back(topo.rate(k, i) * nk);
      }
    }
    p.alive.assign(p.verts.size(), 1);
    detail::solve_local(side, p);
  }

  // Conflict solution: resolve doubly-claimed receivers. Every resolution
  // permanently kills at least one loser vertex, so the vertex count bounds
  // the loop; anything beyond that is a genuine non-convergence.
  int total_vertices = 0;
  for (const auto& p : plans) total_vertices += static_cast<int>(p.verts.size());
  int guard = 0;
  const int guard_max = K * K + total_vertices + 8;
  for (;;) {
    if (++guard > guard_max)
      fail<protocol_error>("conflict solution phase did not converge within ", guard_max,
                           " iterations");
    int contested = -1;
    std::vector<int> claimants;
    for (int j = 0; j < K && contested < 0; ++j) {
      claimants.clear();
      for (int k = 0; k < K; ++k)
        if (!plans[k].selected.empty() && detail::claimed_receivers(plans[k]).count(j))
          claimants.push_back(k);
      if (claimants.size() >= 2) contested = j;
    }
    if (contested < 0) break;

    // For each claimant: current weight M and fallback weight M~ without j.
    std::vector<double> m(claimants.size()), m_tilde(claimants.size());
    std::vector<detail::LocalPlan> fallback(claimants.size());
    for (std::size_t c = 0; c < claimants.size(); ++c) {
      const auto& p = plans[claimants[c]];
      m[c] = detail::plan_weight(p);
      fallback[c] = p;
      for (std::size_t v = 0; v < fallback[c].verts.size(); ++v)
        if (fallback[c].verts[v].rx == contested) fallback[c].alive[v] = 0;
      detail::solve_local(side, fallback[c]);
      m_tilde[c] = detail::plan_weight(fallback[c]);
    }
    std::size_t winner = 0;
    double best_score = -1.0;
    for (std::size_t c = 0; c < claimants.size(); ++c) {
      double score = m[c];
      for (std::size_t o = 0; o < claimants.size(); ++o)
        if (o != c) score += m_tilde[o];
      if (score > best_score) {
        best_score = score;
        winner = c;
      }
    }
    for (std::size_t c = 0; c < claimants.size(); ++c)
      if (c != winner) plans[claimants[c]] = fallback[c];
  }

  // Commit transmitters under the half-duplex constraint.
  struct Candidate {
    int k;
    double weight;
    bool completing;
    bool scarce_leaf;
  };
  std::vector<Candidate> candidates;
  auto supply = [&](int m) {
    int c = 0;
    for (int k = 0; k < K; ++k) c += side.known[k].count(m);
    return c;
  };
  for (int k = 0; k < K; ++k) {
    if (plans[k].selected.empty()) continue;
    Candidate c{k, detail::plan_weight(plans[k]), false, false};
    for (int v : plans[k].selected) {
      const auto& vert = plans[k].verts[v];
      if (side.unknown[vert.rx].size() == 1) c.completing = true;
      if (supply(vert.model) == 1 && topo.neighbors(k).size() == 1) c.scarce_leaf = true;
    }
    candidates.push_back(c);
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.completing != b.completing) return a.completing;
    if (a.scarce_leaf != b.scarce_leaf) return a.scarce_leaf;
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.k < b.k;
  });

  std::set<int> committed_tx;
  std::set<int> busy_rx;
  std::vector<CodedPacket> packets;
  for (const auto& c : candidates) {
    if (busy_rx.count(c.k)) continue;  // already scheduled to receive
    std::vector<DisseminationVertex> chosen;
    for (int v : plans[c.k].selected) {
      const auto& vert = plans[c.k].verts[v];
      if (committed_tx.count(vert.rx)) continue;  // target is transmitting
      if (busy_rx.count(vert.rx)) continue;       // target already served
      chosen.push_back(vert);
    }
    if (chosen.empty()) continue;
    // Maximality refill: extend the packet with any still-free receiver this
    // transmitter holds a compatible vertex for, including vertices dropped
    // during contention whose winner never got committed.
    for (const auto& vert : plans[c.k].verts) {
      if (committed_tx.count(vert.rx) || busy_rx.count(vert.rx)) continue;
      bool taken = false, compat = true;
      for (const auto& have : chosen) {
        taken |= have.rx == vert.rx;
        compat &= xor_compatible(side, have, vert);
      }
      if (!taken && compat) chosen.push_back(vert);
    }
    CodedPacket pkt;
    pkt.tx_uav = c.k;
    for (const auto& vert : chosen) {
      pkt.targets.insert(vert.rx);
      pkt.payload_ids.insert(vert.model);
      pkt.link_rate_bps[vert.rx] = vert.rate_bps;
    }
    committed_tx.insert(c.k);
    for (int rx : pkt.targets) busy_rx.insert(rx);
    packets.push_back(std::move(pkt));
  }

  // Rate conflict rule: one common transmission rate per round.
  double common = std::numeric_limits<double>::infinity();
  for (const auto& pkt : packets)
    for (const auto& [rx, r] : pkt.link_rate_bps) common = std::min(common, r);
  for (auto& pkt : packets) pkt.rate_bps = common;

  std::sort(packets.begin(), packets.end(),
            [](const CodedPacket& a, const CodedPacket& b) { return a.tx_uav < b.tx_uav; });
  return packets;
}

// Decode one round into the side information. Every packet must be decodable
// (exactly one unknown model) for every target; anything else is a protocol
// bug, not a recoverable condition.
inline void apply_round(SideInformation& side, const std::vector<CodedPacket>& packets,
                        std::vector<std::vector<int>>* hops = nullptr) {
  for (const auto& pkt : packets) {
    for (int m : pkt.payload_ids)
      if (!side.known[pkt.tx_uav].count(m))
        fail<protocol_error>("uav ", pkt.tx_uav, " cannot encode model ", m,
                             " it does not hold");
    for (int target : pkt.targets) {
      std::vector<int> news;
      for (int m : pkt.payload_ids)
        if (side.unknown[target].count(m)) news.push_back(m);
      if (news.empty())
        fail<protocol_error>("NIM packet: nothing new for uav ", target);
      if (news.size() > 1)
        fail<protocol_error>("packet not instantly decodable for uav ", target, " (", news.size(),
                             " unknown models)");
      side.unknown[target].erase(news[0]);
      side.known[target].insert(news[0]);
      if (hops) (*hops)[news[0]][target] = (*hops)[news[0]][pkt.tx_uav] + 1;
    }
  }
}

namespace detail {

// BFS flood of the global model from the complete UAV; one multicast hop per
// tree parent, children at the parent's minimum link rate.
inline std::vector<BroadcastHop> flood_hops(const UavTopology& topo, int root,
                                            long long model_size_bits) {
  std::vector<int> parent(topo.num_uavs, -1);
  std::vector<char> seen(topo.num_uavs, 0);
  std::vector<int> order{root};
  seen[root] = 1;
  for (std::size_t h = 0; h < order.size(); ++h) {
    for (int n : topo.neighbors(order[h]))
      if (!seen[n]) {
        seen[n] = 1;
        parent[n] = order[h];
        order.push_back(n);
      }
  }
  std::vector<BroadcastHop> hops;
  for (int p : order) {
    BroadcastHop hop;
    hop.tx = p;
    double r = std::numeric_limits<double>::infinity();
    for (int k = 0; k < topo.num_uavs; ++k)
      if (parent[k] == p) {
        hop.targets.insert(k);
        r = std::min(r, topo.rate(p, k));
      }
    if (hop.targets.empty()) continue;
    hop.rate_bps = r;
    hop.time_s = static_cast<double>(model_size_bits) / r;
    hops.push_back(std::move(hop));
  }
  return hops;
}

}  // namespace detail

// Run coded dissemination rounds until some UAV holds every cluster model,
// then flood the aggregated global model back over a BFS tree. t_diss is the
// sum of s/rate over every round and broadcast hop.
inline DisseminationTrace run_dissemination(const SideInformation& initial,
                                            const UavTopology& topo,
                                            long long model_size_bits) {
  if (topo.num_uavs < 1) fail<config_error>("run_dissemination: need at least one UAV");
  topo.validate();
  initial.validate();
  auto cut = topo.unreachable();
  if (!cut.empty()) {
    std::string who;
    for (int k : cut) who += concat(" ", k);
    fail<config_error>("uav graph disconnected; unreachable from uav 0:", who);
  }

  DisseminationTrace trace;
  trace.initial = initial;
  SideInformation side = initial;

  int round = 0;
  while (side.first_complete() < 0) {
    if (++round > 4 * topo.num_uavs * topo.num_uavs + 8)
      fail<protocol_error>("dissemination did not reach consensus (protocol stall)");
    auto packets = schedule_round(side, topo);
    if (packets.empty())
      fail<protocol_error>("protocol stall: no schedulable transmission while incomplete");
    apply_round(side, packets);
    RoundRecord rec;
    rec.index = round;
    rec.common_rate_bps = packets.front().rate_bps;
    rec.time_s = static_cast<double>(model_size_bits) / rec.common_rate_bps;
    rec.packets = std::move(packets);
    trace.rounds.push_back(std::move(rec));
    trace.t_diss_s += trace.rounds.back().time_s;
  }

  trace.rounds_to_consensus = static_cast<int>(trace.rounds.size());
  trace.complete_uav = side.first_complete();
  trace.broadcast_hops = detail::flood_hops(topo, trace.complete_uav, model_size_bits);
  for (const auto& hop : trace.broadcast_hops) trace.t_diss_s += hop.time_s;
  return trace;
}

// Scripted replay: validates a hand-specified schedule against the protocol
// rules (payload ownership, decodability, one transmitter per receiver,
// half-duplex) and prices it with the adopted common rates.
struct ScriptedPacket {
  int tx = -1;
  std::set<int> payload;
  std::set<int> targets;
};
struct ScriptedRound {
  std::vector<ScriptedPacket> packets;
};

inline DisseminationTrace replay_schedule(const SideInformation& initial, const UavTopology& topo,
                                          const std::vector<ScriptedRound>& rounds,
                                          long long model_size_bits) {
  topo.validate();
  initial.validate();
  DisseminationTrace trace;
  trace.initial = initial;
  SideInformation side = initial;

  int index = 0;
  for (const auto& sr : rounds) {
    ++index;
    std::set<int> tx_set, rx_set;
    std::vector<CodedPacket> packets;
    double common = std::numeric_limits<double>::infinity();
    for (const auto& sp : sr.packets) {
      if (!tx_set.insert(sp.tx).second)
        fail<protocol_error>("round ", index, ": uav ", sp.tx, " transmits twice");
      CodedPacket pkt;
      pkt.tx_uav = sp.tx;
      pkt.payload_ids = sp.payload;
      pkt.targets = sp.targets;
      for (int t : sp.targets) {
        if (!topo.adjacent(sp.tx, t))
          fail<protocol_error>("round ", index, ": ", sp.tx, " -> ", t, " not an A2A link");
        if (!rx_set.insert(t).second)
          fail<protocol_error>("round ", index, ": uav ", t,
                               " scheduled to two transmitters (CC3)");
        pkt.link_rate_bps[t] = topo.rate(sp.tx, t);
        common = std::min(common, topo.rate(sp.tx, t));
      }
      packets.push_back(std::move(pkt));
    }
    for (int t : tx_set)
      if (rx_set.count(t))
        fail<protocol_error>("round ", index, ": uav ", t, " both transmits and receives (CC4)");
    for (auto& pkt : packets) pkt.rate_bps = common;
    apply_round(side, packets);  // enforces ownership and decodability
    RoundRecord rec;
    rec.index = index;
    rec.packets = std::move(packets);
    rec.common_rate_bps = common;
    rec.time_s = static_cast<double>(model_size_bits) / common;
    trace.rounds.push_back(std::move(rec));
    trace.t_diss_s += trace.rounds.back().time_s;
  }

  trace.complete_uav = side.first_complete();
  if (trace.complete_uav < 0)
    fail<protocol_error>("scripted schedule ends with no complete uav");
  trace.rounds_to_consensus = static_cast<int>(trace.rounds.size());
  trace.broadcast_hops = detail::flood_hops(topo, trace.complete_uav, model_size_bits);
  for (const auto& hop : trace.broadcast_hops) trace.t_diss_s += hop.time_s;
  return trace;
}

// delta[j][k]: transmissions it took model j to reach UAV k (0 on the
// diagonal). The global-model flood counts as dissemination steps for
// whatever a UAV was still missing.
struct DisseminationGap {
  std::vector<std::vector<int>> delta;  // [model][uav]
  std::vector<int> delta_per_uav;       // max over models
  int delta_max = 0;
};

inline DisseminationGap dissemination_gap(const DisseminationTrace& trace) {
  const int K = trace.initial.num_uavs();
  DisseminationGap gap;
  gap.delta.assign(K, std::vector<int>(K, 0));
  SideInformation side = trace.initial;

  std::vector<std::vector<int>> hops(K, std::vector<int>(K, 0));
  for (const auto& rec : trace.rounds) apply_round(side, rec.packets, &hops);
  for (const auto& hop : trace.broadcast_hops) {
    for (int t : hop.targets) {
      std::vector<int> missing(side.unknown[t].begin(), side.unknown[t].end());
      for (int m : missing) {
        hops[m][t] = hops[m][hop.tx] + 1;
        side.unknown[t].erase(m);
        side.known[t].insert(m);
      }
    }
  }
  gap.delta = hops;
  gap.delta_per_uav.assign(K, 0);
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < K; ++m) gap.delta_per_uav[k] = std::max(gap.delta_per_uav[k], hops[m][k]);
    gap.delta_max = std::max(gap.delta_max, gap.delta_per_uav[k]);
  }
  return gap;
}

// Line-per-round text log; the replay fixtures diff this exactly.
inline std::string render_trace(const DisseminationTrace& trace) {
  std::ostringstream os;
  char buf[64];
  double t = 0.0;
  auto join = [](const std::set<int>& ids) {
    std::string s;
    for (int id : ids) s += (s.empty() ? "" : ",") + std::to_string(id);
    return s;
  };
  for (const auto& rec : trace.rounds) {
    t += rec.time_s;
    for (const auto& pkt : rec.packets) {
      std::snprintf(buf, sizeof buf, "%.17g", pkt.rate_bps);
      os << "round " << rec.index << " tx " << pkt.tx_uav << " payload " << join(pkt.payload_ids)
         << " targets " << join(pkt.targets) << " rate_bps " << buf;
      std::snprintf(buf, sizeof buf, "%.9f", t);
      os << " t_s " << buf << "\n";
    }
  }
  int hop_no = 0;
  for (const auto& hop : trace.broadcast_hops) {
    t += hop.time_s;
    std::snprintf(buf, sizeof buf, "%.17g", hop.rate_bps);
    os << "flood " << ++hop_no << " tx " << hop.tx << " targets " << join(hop.targets)
       << " rate_bps " << buf;
    std::snprintf(buf, sizeof buf, "%.9f", t);
    os << " t_s " << buf << "\n";
  }
  std::snprintf(buf, sizeof buf, "%.9f", trace.t_diss_s);
  os << "complete_uav " << trace.complete_uav << " rounds " << trace.rounds_to_consensus
     << " t_diss_s " << buf << "\n";
  return os.str();
}

}  // namespace fedmod
