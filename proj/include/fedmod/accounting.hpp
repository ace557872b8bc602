#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <vector>

#include "fedmod/core.hpp"
#include "fedmod/dissemination.hpp"
#include "fedmod/radio.hpp"
#include "fedmod/scenario.hpp"
#include "fedmod/scheduling.hpp"

namespace fedmod {

// T_comp = T_l * Q_u * D_u / f_u
inline double compute_time_s(const NodeParams& node, int local_iters) {
  if (node.cpu_freq_hz <= 0) fail<domain_error>("compute_time_s: cpu frequency must be > 0");
  return local_iters * node.cycles_per_sample * node.num_samples / node.cpu_freq_hz;
}

// E_com = p * T_com
inline double comm_energy_j(double power_w, double duration_s) {
  if (power_w < 0 || duration_s < 0) fail<domain_error>("comm_energy_j: negative input");
  return power_w * duration_s;
}

// E_comp = T_l * C_u * D_u * alpha * f_u^2
inline double compute_energy_j(const NodeParams& node, int local_iters) {
  return local_iters * node.cycles_per_sample * node.num_samples * node.capacitance_coeff *
         node.cpu_freq_hz * node.cpu_freq_hz;
}

// p_hov = sqrt((m g)^3 / (2 pi r_p^2 n_p rho))
inline double hover_power_w(const UavParams& uav) {
  double mg = uav.mass_kg * uav.gravity;
  double denom = 2.0 * M_PI * uav.propeller_radius_m * uav.propeller_radius_m *
                 uav.num_propellers * uav.air_density;
  return std::sqrt(mg * mg * mg / denom);
}

struct IterationCosts {
  double t_comp_s = 0.0;
  double t_uplink_s = 0.0;
  double t_diss_s = 0.0;
  double t_downlink_s = 0.0;
  double tau_s = 0.0;  // one global iteration

  std::map<int, double> ud_energy_j;   // per participating UD
  std::map<int, double> uav_energy_j;  // per UAV
  double energy_ud_j = 0.0;
  double energy_uav_j = 0.0;
  double total_energy_j = 0.0;

  bool t_max_ok = true;       // T * tau <= T_max
  double tau_total_s = 0.0;   // T * tau
};

// Per-iteration fold of the time/energy model over a schedule and an
// optional dissemination trace. The relay pays for two uplink legs (its own
// model and the forwarded one); the non-LOS UD pays for its D2D leg;
// reception energy is not modeled. Hovering is charged for the full tau to
// every UAV. Downlink is priced at each UAV's common rate over its directly
// scheduled UDs.
inline IterationCosts iteration_costs(const Schedule& sched, const DisseminationTrace* trace,
                                      int local_iters, int global_iters, const Scenario& s,
                                      double t_diss_fallback_s = 0.0) {
  IterationCosts c;
  const double s_bits = static_cast<double>(s.model_size_bits);
  c.t_diss_s = trace ? trace->t_diss_s : t_diss_fallback_s;

  for (const auto& a : sched.assignments)
    c.t_comp_s = std::max(c.t_comp_s, compute_time_s(s.uds[a.ud].node, local_iters));
  for (const auto& r : sched.relays)
    c.t_comp_s = std::max(c.t_comp_s, compute_time_s(s.uds[r.nlos_ud].node, local_iters));

  if (sched.r_min_bps > 0) c.t_uplink_s = s_bits / sched.r_min_bps;

  std::map<int, double> downlink_rate = downlink_rates(sched, s);
  for (const auto& [k, rk] : downlink_rate)
    c.t_downlink_s = std::max(c.t_downlink_s, s_bits / rk);

  c.tau_s = c.t_comp_s + c.t_uplink_s + c.t_downlink_s + c.t_diss_s;
  c.tau_total_s = global_iters * c.tau_s;
  c.t_max_ok = c.tau_total_s <= s.t_max_s;

  for (const auto& a : sched.assignments) {
    const auto& n = s.uds[a.ud].node;
    c.ud_energy_j[a.ud] = compute_energy_j(n, local_iters) +
                          comm_energy_j(n.transmit_power_w, s_bits / a.rate_bps);
  }
  for (const auto& r : sched.relays) {
    const auto& relay_node = s.uds[r.relay_ud].node;
    c.ud_energy_j[r.relay_ud] +=
        comm_energy_j(relay_node.transmit_power_w, s_bits / r.forward_rate_bps);
    const auto& nlos_node = s.uds[r.nlos_ud].node;
    c.ud_energy_j[r.nlos_ud] = compute_energy_j(nlos_node, local_iters) +
                               comm_energy_j(nlos_node.transmit_power_w, s_bits / r.d2d_rate_bps);
  }
  for (int k = 0; k < s.num_uavs(); ++k) {
    double e = comm_energy_j(hover_power_w(s.uavs[k]), c.tau_s);
    auto it = downlink_rate.find(k);
    if (it != downlink_rate.end())
      e += comm_energy_j(s.uavs[k].transmit_power_w, s_bits / it->second);
    c.uav_energy_j[k] = e;
  }

  for (const auto& [ud, e] : c.ud_energy_j) c.energy_ud_j += e;
  for (const auto& [k, e] : c.uav_energy_j) c.energy_uav_j += e;
  c.total_energy_j = c.energy_ud_j + c.energy_uav_j;
  return c;
}

// Simplified cost model of the star and hierarchical baselines: same
// computation and learning algebra, different communication structure.
// star: UD -> CPS directly, CPS broadcasts back; no UAVs involved.
// hfl:  UD -> UAV as scheduled, UAV -> CPS extra hop, CPS aggregate comes
//       back down the same two hops; UAVs hover for the whole iteration.
struct BaselineCosts {
  double tau_s = 0.0;
  double energy_ud_j = 0.0;
  double energy_uav_j = 0.0;  // includes CPS transmit energy
  double total_energy_j = 0.0;
};

inline BaselineCosts baseline_costs(bool star, const std::vector<int>& uinv,
                                    const Schedule* sched, int local_iters, const Scenario& s) {
  BaselineCosts c;
  if (uinv.empty()) return c;
  const double s_bits = static_cast<double>(s.model_size_bits);

  double t_comp = 0.0;
  for (int u : uinv) t_comp = std::max(t_comp, compute_time_s(s.uds[u].node, local_iters));

  if (star) {
    double r_min = std::numeric_limits<double>::infinity();
    double r_down = std::numeric_limits<double>::infinity();
    for (int u : uinv) {
      double up = ud_cps_rate_bps(u, s);
      r_min = std::min(r_min, up);
      r_down = std::min(r_down, cps_ud_rate_bps(u, s));
      c.energy_ud_j += compute_energy_j(s.uds[u].node, local_iters) +
                       comm_energy_j(s.uds[u].node.transmit_power_w, s_bits / up);
    }
    c.tau_s = t_comp + s_bits / r_min + s_bits / r_down;
    c.energy_uav_j = comm_energy_j(s.cps_power_w, s_bits / r_down);  // CPS broadcast
    c.total_energy_j = c.energy_ud_j + c.energy_uav_j;
    return c;
  }

  if (!sched) fail<config_error>("baseline_costs: hfl needs a schedule");
  double t_up = sched->r_min_bps > 0 ? s_bits / sched->r_min_bps : 0.0;
  double t_uav_cps = 0.0, t_down = 0.0;
  for (int k = 0; k < s.num_uavs(); ++k) {
    auto cluster = sched->cluster_uds(k);
    if (cluster.empty()) continue;
    t_uav_cps = std::max(t_uav_cps, s_bits / uav_cps_rate_bps(k, s));
    t_down = std::max(t_down, s_bits / common_downlink_rate_bps(k, cluster, s));
  }
  c.tau_s = t_comp + t_up + 2.0 * t_uav_cps + t_down;

  for (const auto& a : sched->assignments) {
    const auto& n = s.uds[a.ud].node;
    c.energy_ud_j += compute_energy_j(n, local_iters) +
                     comm_energy_j(n.transmit_power_w, s_bits / a.rate_bps);
  }
  for (const auto& r : sched->relays) {
    const auto& relay_node = s.uds[r.relay_ud].node;
    const auto& nlos_node = s.uds[r.nlos_ud].node;
    c.energy_ud_j += comm_energy_j(relay_node.transmit_power_w, s_bits / r.forward_rate_bps);
    c.energy_ud_j += compute_energy_j(nlos_node, local_iters) +
                     comm_energy_j(nlos_node.transmit_power_w, s_bits / r.d2d_rate_bps);
  }
  for (int k = 0; k < s.num_uavs(); ++k) {
    double e = comm_energy_j(hover_power_w(s.uavs[k]), c.tau_s);
    auto cluster = sched->cluster_uds(k);
    if (!cluster.empty()) {
      e += comm_energy_j(s.uavs[k].transmit_power_w, s_bits / uav_cps_rate_bps(k, s));
      e += comm_energy_j(s.uavs[k].transmit_power_w,
                         s_bits / common_downlink_rate_bps(k, cluster, s));
    }
    c.energy_uav_j += e;
  }
  c.total_energy_j = c.energy_ud_j + c.energy_uav_j;
  return c;
}

inline void write_node_energy_csv(const IterationCosts& c, std::ostream& os) {
  os << "node_kind,node_id,energy_j\r\n";
  char buf[96];
  for (const auto& [ud, e] : c.ud_energy_j) {
    std::snprintf(buf, sizeof buf, "ud,%d,%.9g\r\n", ud, e);
    os << buf;
  }
  for (const auto& [uav, e] : c.uav_energy_j) {
    std::snprintf(buf, sizeof buf, "uav,%d,%.9g\r\n", uav, e);
    os << buf;
  }
}

inline void write_costs_csv_header(std::ostream& os) {
  os << "iteration,t_comp_s,t_uplink_s,t_diss_s,t_downlink_s,tau_s,energy_ud_j,energy_uav_j,"
        "energy_total_j\r\n";
}

inline void write_costs_csv_row(std::ostream& os, int iteration, const IterationCosts& c) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\r\n", iteration,
                c.t_comp_s, c.t_uplink_s, c.t_diss_s, c.t_downlink_s, c.tau_s, c.energy_ud_j,
                c.energy_uav_j, c.total_energy_j);
  os << buf;
}

}  // namespace fedmod
