#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fedmod/core.hpp"
#include "fedmod/graphs.hpp"
#include "fedmod/radio.hpp"
#include "fedmod/rng.hpp"
#include "fedmod/scenario.hpp"

namespace fedmod {

// One scheduled uplink: UD -> (UAV, RRB) at an adopted rate.
struct Assignment {
  int ud = -1, uav = -1, rrb = -1;
  double rate_bps = 0.0;
  double upload_time_s = 0.0;
};

// One relayed non-LOS UD: two-hop D2D + forward inside the relay's idle time.
struct RelayAssignment {
  int nlos_ud = -1, relay_ud = -1, uav = -1, rrb = -1;
  double d2d_rate_bps = 0.0;
  double forward_rate_bps = 0.0;  // the relay's own assigned uplink rate
  double two_hop_time_s = 0.0;
};

struct Schedule {
  std::vector<Assignment> assignments;
  std::vector<RelayAssignment> relays;
  double r_min_bps = 0.0;
  std::map<int, double> idle_time_s;  // per scheduled UD
  int local_iters = 1;                // energy weights were built with this

  const Assignment* assignment_of(int ud) const {
    for (const auto& a : assignments)
      if (a.ud == ud) return &a;
    return nullptr;
  }

  // Directly scheduled UDs of a UAV (LOS uplinks).
  std::vector<int> cluster_uds(int uav) const {
    std::vector<int> out;
    for (const auto& a : assignments)
      if (a.uav == uav) out.push_back(a.ud);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Cluster membership for aggregation: scheduled UDs plus relayed-in UDs.
  std::vector<int> cluster_members(int uav) const {
    std::vector<int> out = cluster_uds(uav);
    for (const auto& r : relays)
      if (r.uav == uav) out.push_back(r.nlos_ud);
    std::sort(out.begin(), out.end());
    return out;
  }

  // All UDs whose local model reaches some UAV this iteration.
  std::vector<int> delivered_uds() const {
    std::vector<int> out;
    for (const auto& a : assignments) out.push_back(a.ud);
    for (const auto& r : relays) out.push_back(r.nlos_ud);
    std::sort(out.begin(), out.end());
    return out;
  }
};

struct P1Params {
  int local_iters = 1;
};

namespace detail {

// Clustering vertex weight: local computation energy plus upload energy at
// the vertex's rate.
inline double p1_vertex_weight(const NodeParams& n, double rate_bps, long long s_bits,
                               int local_iters) {
  double e_comp = local_iters * n.cycles_per_sample * n.num_samples * n.capacitance_coeff *
                  n.cpu_freq_hz * n.cpu_freq_hz;
  double e_com = n.transmit_power_w * (static_cast<double>(s_bits) / rate_bps);
  return e_comp + e_com;
}

}  // namespace detail

// Conflict clustering graph: one vertex per feasible (UAV, RRB, UD)
// association. Edges: same UD in two vertices, or same (UAV, RRB) slot
// claimed by two UDs. An RRB is an orthogonal slot of one UAV, so the slot
// identity is the (uav, rrb) pair; this is what keeps a maximal selection at
// or below Z*K vertices.
inline ConflictGraph<Assignment> build_p1_graph(const Scenario& s, const LinkRateTable& rates,
                                                const P1Params& params = {}) {
  ConflictGraph<Assignment> g;
  const double s_bits = static_cast<double>(s.model_size_bits);
  for (const auto& [link, rate] : rates.ud_uav_rate) {
    auto [ud, uav] = link;
    if (rate < s.rate_threshold_bps) continue;
    const auto& node = s.uds[ud].node;
    double w = detail::p1_vertex_weight(node, rate, s.model_size_bits, params.local_iters);
    if (w > node.energy_budget_j) continue;  // UDs without enough energy get no vertex
    for (int z = 0; z < s.rrbs_per_uav; ++z) {
      Assignment a{ud, uav, z, rate, s_bits / rate};
      g.add_vertex(a, w);
    }
  }
  for (int v1 = 0; v1 < g.size(); ++v1) {
    for (int v2 = v1 + 1; v2 < g.size(); ++v2) {
      const auto& a = g.vertex(v1).payload;
      const auto& b = g.vertex(v2).payload;
      bool same_ud = a.ud == b.ud;
      bool same_slot = a.uav == b.uav && a.rrb == b.rrb && a.ud != b.ud;
      if (same_ud || same_slot) g.add_edge(v1, v2);
    }
  }
  return g;
}

inline std::vector<Assignment> solve_p1(const ConflictGraph<Assignment>& g, int z_times_k_cap) {
  if (g.empty()) return {};
  IndependentSet sel = greedy_min_wis(g, z_times_k_cap);
  std::vector<Assignment> out;
  for (int id : sel.ids) out.push_back(g.vertex(id).payload);
  std::sort(out.begin(), out.end(),
            [](const Assignment& x, const Assignment& y) { return x.ud < y.ud; });
  return out;
}

inline double min_rate(const std::vector<Assignment>& assignments) {
  double r = 0.0;
  for (const auto& a : assignments) r = (r == 0.0) ? a.rate_bps : std::min(r, a.rate_bps);
  return r;
}

// Idle time of each scheduled UD: the slack it has until the slowest UD
// finishes uploading, s/R_min - s/R_u. The slowest UD gets exactly zero.
inline std::map<int, double> compute_idle_times(const std::vector<Assignment>& assignments,
                                                long long model_size_bits) {
  std::map<int, double> idle;
  if (assignments.empty()) return idle;
  double r_min = min_rate(assignments);
  double slowest = static_cast<double>(model_size_bits) / r_min;
  for (const auto& a : assignments) {
    double t = slowest - static_cast<double>(model_size_bits) / a.rate_bps;
    idle[a.ud] = std::max(0.0, t);
  }
  return idle;
}

// D2D conflict graph: one vertex per (relay, non-LOS UD) pair that fits in
// the relay's idle window. Conflicts: one non-LOS UD claimed by two relays,
// or one relay claimed by two non-LOS UDs. Vertex weight is the bottleneck
// rate of the two-hop path.
inline ConflictGraph<RelayAssignment> build_p2_graph(const Scenario& s, const Schedule& partial,
                                                     const LinkRateTable& rates) {
  ConflictGraph<RelayAssignment> g;
  const double s_bits = static_cast<double>(s.model_size_bits);
  auto [los_set, non_set] = classify_los(s);
  for (const auto& a : partial.assignments) {
    auto idle_it = partial.idle_time_s.find(a.ud);
    double idle = idle_it == partial.idle_time_s.end() ? 0.0 : idle_it->second;
    if (idle <= 0.0) continue;
    for (int nlos : non_set) {
      auto it = rates.d2d_rate.find({nlos, a.ud});
      if (it == rates.d2d_rate.end()) continue;  // outside the coverage zone
      double two_hop = s_bits / it->second + s_bits / a.rate_bps;
      if (two_hop > idle) continue;
      RelayAssignment r{nlos, a.ud, a.uav, a.rrb, it->second, a.rate_bps, two_hop};
      g.add_vertex(r, std::min(it->second, a.rate_bps));
    }
  }
  for (int v1 = 0; v1 < g.size(); ++v1) {
    for (int v2 = v1 + 1; v2 < g.size(); ++v2) {
      const auto& a = g.vertex(v1).payload;
      const auto& b = g.vertex(v2).payload;
      bool same_nlos = a.nlos_ud == b.nlos_ud;
      bool same_relay = a.relay_ud == b.relay_ud;
      if (same_nlos || same_relay) g.add_edge(v1, v2);
    }
  }
  return g;
}

inline std::vector<RelayAssignment> solve_p2(const ConflictGraph<RelayAssignment>& g) {
  if (g.empty()) return {};
  IndependentSet sel = greedy_mwis(g);
  std::vector<RelayAssignment> out;
  for (int id : sel.ids) out.push_back(g.vertex(id).payload);
  std::sort(out.begin(), out.end(),
            [](const RelayAssignment& x, const RelayAssignment& y) {
              return x.nlos_ud < y.nlos_ud;
            });
  return out;
}

// Full P1 + P2 pipeline.
inline Schedule schedule_p1p2(const Scenario& s, const LinkRateTable& rates,
                              const P1Params& params = {}) {
  Schedule sched;
  sched.local_iters = params.local_iters;
  auto g1 = build_p1_graph(s, rates, params);
  sched.assignments = solve_p1(g1, s.rrbs_per_uav * s.num_uavs());
  sched.r_min_bps = min_rate(sched.assignments);
  sched.idle_time_s = compute_idle_times(sched.assignments, s.model_size_bits);
  auto g2 = build_p2_graph(s, sched, rates);
  sched.relays = solve_p2(g2);
  return sched;
}

// Feasible-but-random baseline: every choice that the P1/P2 solvers optimize
// is drawn uniformly among the feasible options instead.
inline Schedule random_schedule(const Scenario& s, const LinkRateTable& rates, Rng& rng,
                                const P1Params& params = {}) {
  Schedule sched;
  sched.local_iters = params.local_iters;
  const double s_bits = static_cast<double>(s.model_size_bits);

  std::vector<int> order;
  auto [los_set, non_set] = classify_los(s);
  for (int u : los_set) order.push_back(u);
  rng.shuffle(order);
  std::set<std::pair<int, int>> used_slots;
  for (int u : order) {
    std::vector<std::pair<int, int>> options;
    for (int k : s.los[u]) {
      auto it = rates.ud_uav_rate.find({u, k});
      if (it == rates.ud_uav_rate.end()) continue;
      for (int z = 0; z < s.rrbs_per_uav; ++z)
        if (!used_slots.count({k, z})) options.emplace_back(k, z);
    }
    if (options.empty()) continue;
    auto [k, z] = options[rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1)];
    double rate = rates.ud_uav_rate.at({u, k});
    used_slots.insert({k, z});
    sched.assignments.push_back(Assignment{u, k, z, rate, s_bits / rate});
  }
  std::sort(sched.assignments.begin(), sched.assignments.end(),
            [](const Assignment& a, const Assignment& b) { return a.ud < b.ud; });
  sched.r_min_bps = min_rate(sched.assignments);
  sched.idle_time_s = compute_idle_times(sched.assignments, s.model_size_bits);

  std::vector<int> nlos_order(non_set.begin(), non_set.end());
  rng.shuffle(nlos_order);
  std::set<int> used_relays;
  for (int nlos : nlos_order) {
    std::vector<const Assignment*> options;
    for (const auto& a : sched.assignments) {
      if (used_relays.count(a.ud)) continue;
      auto it = rates.d2d_rate.find({nlos, a.ud});
      if (it == rates.d2d_rate.end()) continue;
      double two_hop = s_bits / it->second + s_bits / a.rate_bps;
      if (two_hop > sched.idle_time_s.at(a.ud)) continue;
      options.push_back(&a);
    }
    if (options.empty()) continue;
    const Assignment* a =
        options[rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1)];
    double d2d = rates.d2d_rate.at({nlos, a->ud});
    used_relays.insert(a->ud);
    sched.relays.push_back(RelayAssignment{nlos, a->ud, a->uav, a->rrb, d2d, a->rate_bps,
                                           s_bits / d2d + s_bits / a->rate_bps});
  }
  std::sort(sched.relays.begin(), sched.relays.end(),
            [](const RelayAssignment& a, const RelayAssignment& b) {
              return a.nlos_ud < b.nlos_ud;
            });
  return sched;
}

// Post-schedule common downlink rates, one per UAV with a nonempty cluster;
// this is what fills LinkRateTable::downlink_rate.
inline std::map<int, double> downlink_rates(const Schedule& sched, const Scenario& s) {
  std::map<int, double> out;
  for (int k = 0; k < s.num_uavs(); ++k) {
    auto cluster = sched.cluster_uds(k);
    if (!cluster.empty()) out[k] = common_downlink_rate_bps(k, cluster, s);
  }
  return out;
}

struct Violation {
  std::string code;
  std::string message;
};

// C1..C8 checker. C7 is checked for a single iteration with no dissemination
// term; multi-iteration budgets are the ledger's job.
inline std::vector<Violation> validate(const Schedule& sched, const Scenario& s) {
  std::vector<Violation> out;
  auto add = [&](const char* code, std::string msg) { out.push_back({code, std::move(msg)}); };
  const double s_bits = static_cast<double>(s.model_size_bits);
  auto [los_set, non_set] = classify_los(s);

  std::set<int> scheduled_uds;
  std::set<std::pair<int, int>> slots;
  for (const auto& a : sched.assignments) {
    if (!scheduled_uds.insert(a.ud).second)
      add("C1", concat("ud ", a.ud, " scheduled more than once"));
    if (!slots.insert({a.uav, a.rrb}).second)
      add("C1", concat("slot (uav ", a.uav, ", rrb ", a.rrb, ") double-booked"));
    if (a.rate_bps < s.rate_threshold_bps)
      add("C4", concat("ud ", a.ud, " adopted rate below threshold"));
    if (!s.los.at(a.ud).count(a.uav))
      add("C4", concat("ud ", a.ud, " scheduled to uav ", a.uav, " without LOS"));
  }

  std::set<int> relayed;
  std::set<int> used_relays;
  for (const auto& r : sched.relays) {
    if (!relayed.insert(r.nlos_ud).second)
      add("C2", concat("non-LOS ud ", r.nlos_ud, " scheduled to two relays"));
    if (!used_relays.insert(r.relay_ud).second)
      add("C3", concat("relay ", r.relay_ud, " serves two non-LOS uds"));
    if (scheduled_uds.count(r.nlos_ud))
      add("C3", concat("ud ", r.nlos_ud, " scheduled to both a relay and a uav"));
    if (!scheduled_uds.count(r.relay_ud))
      add("C6", concat("relay ", r.relay_ud, " is not a scheduled LOS ud"));
    if (sched.r_min_bps > 0 && r.two_hop_time_s > s_bits / sched.r_min_bps + 1e-12)
      add("C5", concat("non-LOS ud ", r.nlos_ud, " not delivered within s/R_min"));
    auto idle = sched.idle_time_s.find(r.relay_ud);
    double idle_s = idle == sched.idle_time_s.end() ? 0.0 : idle->second;
    if (r.two_hop_time_s > idle_s + 1e-12)
      add("C6", concat("relay ", r.relay_ud, " idle time too short for ud ", r.nlos_ud));
    if (!non_set.count(r.nlos_ud))
      add("C8", concat("ud ", r.nlos_ud, " relayed although it belongs to the LOS set"));
  }

  if (!sched.assignments.empty()) {
    double r_min_direct = min_rate(sched.assignments);
    if (sched.r_min_bps != r_min_direct) add("C1", "stored r_min does not match assignments");
    double t_comp = 0.0, t_down = 0.0;
    for (const auto& a : sched.assignments) {
      const auto& n = s.uds[a.ud].node;
      t_comp = std::max(t_comp, sched.local_iters * n.cycles_per_sample * n.num_samples /
                                    n.cpu_freq_hz);
    }
    for (int k = 0; k < s.num_uavs(); ++k) {
      auto cluster = sched.cluster_uds(k);
      if (cluster.empty()) continue;
      t_down = std::max(t_down, s_bits / common_downlink_rate_bps(k, cluster, s));
    }
    double tau = t_comp + s_bits / sched.r_min_bps + t_down;
    if (tau > s.t_max_s)
      add("C7", concat("single-iteration FL time ", tau, " s exceeds T_max ", s.t_max_s, " s"));
  }
  return out;
}

inline void write_schedule_csv(const Schedule& sched, std::ostream& os) {
  os << "kind,ud,uav,rrb,rate_bps,upload_time_s,relay_ud,d2d_rate_bps,two_hop_time_s,idle_time_s"
     << "\r\n";
  char buf[256];
  for (const auto& a : sched.assignments) {
    auto idle = sched.idle_time_s.find(a.ud);
    std::snprintf(buf, sizeof buf, "uplink,%d,%d,%d,%.9g,%.9g,,,,%.9g\r\n", a.ud, a.uav, a.rrb,
                  a.rate_bps, a.upload_time_s,
                  idle == sched.idle_time_s.end() ? 0.0 : idle->second);
    os << buf;
  }
  for (const auto& r : sched.relays) {
    std::snprintf(buf, sizeof buf, "relay,%d,%d,%d,%.9g,,%d,%.9g,%.9g,\r\n", r.nlos_ud, r.uav,
                  r.rrb, r.forward_rate_bps, r.relay_ud, r.d2d_rate_bps, r.two_hop_time_s);
    os << buf;
  }
}

}  // namespace fedmod
