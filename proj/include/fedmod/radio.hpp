#pragma once

#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "fedmod/core.hpp"
#include "fedmod/rng.hpp"
#include "fedmod/scenario.hpp"

namespace fedmod {

constexpr double kSpeedOfLight = 3.0e8;

// Free-space form: PL = 20 log10(4 pi f d / c), in dB.
inline double path_loss_db(double distance_m, double carrier_hz) {
  if (distance_m <= 0) fail<domain_error>("path_loss_db: distance must be > 0");
  if (carrier_hz <= 0) fail<domain_error>("path_loss_db: carrier must be > 0");
  return 20.0 * std::log10(4.0 * M_PI * carrier_hz * distance_m / kSpeedOfLight);
}

// Linear power gain corresponding to a path loss in dB.
inline double channel_gain(double pl_db) { return std::pow(10.0, -pl_db / 10.0); }

// PSD in dBm/Hz integrated over the band, in watts.
inline double noise_power_w(double noise_psd_dbm_hz, double bandwidth_hz) {
  return std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
}

inline double shannon_rate_bps(double bandwidth_hz, double tx_power_w, double gain,
                               double noise_w) {
  return bandwidth_hz * std::log2(1.0 + tx_power_w * gain / noise_w);
}

// Uplink rate of a LOS UD to a UAV on one RRB. The RRB index only selects the
// orthogonal slot; it does not change the link budget.
inline double access_rate_bps(int ud, int uav, int rrb, const Scenario& s) {
  if (rrb < 0 || rrb >= s.rrbs_per_uav) fail<domain_error>("access_rate_bps: rrb out of range");
  if (!s.los.at(ud).count(uav))
    fail<domain_error>("access_rate_bps: ud ", ud, " has no LOS to uav ", uav,
                       " (use the D2D path)");
  double pl = path_loss_db(s.ud_uav_distance_m(ud, uav), s.carrier_hz);
  double n = noise_power_w(s.noise_psd_dbm_hz, s.rrb_bandwidth_hz);
  return shannon_rate_bps(s.rrb_bandwidth_hz, s.uds.at(ud).node.transmit_power_w, channel_gain(pl),
                          n);
}

// Downlink rate from a UAV to one of its UDs (UAV transmit power).
inline double downlink_rate_bps(int ud, int uav, const Scenario& s) {
  double pl = path_loss_db(s.ud_uav_distance_m(ud, uav), s.carrier_hz);
  double n = noise_power_w(s.noise_psd_dbm_hz, s.rrb_bandwidth_hz);
  return shannon_rate_bps(s.rrb_bandwidth_hz, s.uavs.at(uav).transmit_power_w, channel_gain(pl),
                          n);
}

// Side-link rate between two UDs. Overlay D2D: same Shannon form, no
// cross-D2D interference term.
inline double d2d_rate_bps(int tx_ud, int rx_ud, const Scenario& s) {
  double d = s.ud_ud_distance_m(tx_ud, rx_ud);
  if (d > s.d2d_zone_radius_m)
    fail<domain_error>("d2d_rate_bps: ud ", rx_ud, " outside coverage zone of ud ", tx_ud);
  double pl = path_loss_db(d, s.carrier_hz);
  double n = noise_power_w(s.noise_psd_dbm_hz, s.rrb_bandwidth_hz);
  return shannon_rate_bps(s.rrb_bandwidth_hz, s.uds.at(tx_ud).node.transmit_power_w,
                          channel_gain(pl), n);
}

inline double ud_cps_rate_bps(int ud, const Scenario& s) {
  double pl = path_loss_db(s.ud_cps_distance_m(ud), s.carrier_hz);
  double n = noise_power_w(s.noise_psd_dbm_hz, s.rrb_bandwidth_hz);
  return shannon_rate_bps(s.rrb_bandwidth_hz, s.uds.at(ud).node.transmit_power_w, channel_gain(pl),
                          n);
}

inline double cps_ud_rate_bps(int ud, const Scenario& s) {
  double pl = path_loss_db(s.ud_cps_distance_m(ud), s.carrier_hz);
  double n = noise_power_w(s.noise_psd_dbm_hz, s.rrb_bandwidth_hz);
  return shannon_rate_bps(s.rrb_bandwidth_hz, s.cps_power_w, channel_gain(pl), n);
}

inline double uav_cps_rate_bps(int uav, const Scenario& s) {
  double pl = path_loss_db(s.uav_cps_distance_m(uav), s.carrier_hz);
  double n = noise_power_w(s.noise_psd_dbm_hz, s.rrb_bandwidth_hz);
  return shannon_rate_bps(s.rrb_bandwidth_hz, s.uavs.at(uav).transmit_power_w, channel_gain(pl),
                          n);
}

// Air-to-air stochastic channel (sectorized antennas, Nakagami fading).
struct A2AStochasticParams {
  double excess_loss = 1.0;     // zeta_A
  double nakagami_m = 3.0;      // m_A, > 0
  double pathloss_exp = 2.0;    // alpha_A
  double mainlobe_prob = 0.5;   // q_A in [0, 1]
  double noise_power_w = 0.0;   // sigma^2

  void validate() const {
    if (nakagami_m <= 0) fail<config_error>("a2a params: nakagami_m must be > 0");
    if (mainlobe_prob < 0 || mainlobe_prob > 1)
      fail<config_error>("a2a params: mainlobe_prob must be in [0, 1]");
    if (noise_power_w <= 0) fail<config_error>("a2a params: noise power must be > 0");
    if (excess_loss <= 0 || pathloss_exp <= 0)
      fail<config_error>("a2a params: excess loss and pathloss exponent must be > 0");
  }
};

inline A2AStochasticParams default_a2a_params(const Scenario& s) {
  A2AStochasticParams p;
  p.noise_power_w = noise_power_w(s.noise_psd_dbm_hz, s.rrb_bandwidth_hz);
  return p;
}

// SINR at the receiving UAV. The desired link uses the mainlobe gain; every
// other active transmitter interferes with mainlobe gain w.p. q_A, else
// sidelobe. Fading for the desired link is drawn first so fixing the seed and
// growing the interferer set keeps the signal term unchanged.
inline double a2a_sinr(int receiver_uav, int tx_uav, const std::vector<int>& active_tx_set,
                       const A2AStochasticParams& params, const Scenario& s, Rng& rng) {
  params.validate();
  if (!s.uavs_adjacent(receiver_uav, tx_uav))
    fail<domain_error>("a2a_sinr: uavs ", tx_uav, " and ", receiver_uav, " not adjacent");
  bool tx_active = false;
  for (int t : active_tx_set) tx_active |= (t == tx_uav);
  if (!tx_active) fail<domain_error>("a2a_sinr: tx_uav must be in the active transmitter set");

  const double p = s.uavs.at(tx_uav).transmit_power_w;
  const double mu = p * s.uavs.at(tx_uav).mainlobe_gain * params.excess_loss;
  double h = rng.gamma(params.nakagami_m, 1.0 / params.nakagami_m);
  double d = s.uav_uav_distance_m(receiver_uav, tx_uav);
  double signal = mu * h * std::pow(d, -params.pathloss_exp);

  double interference = 0.0;
  for (int j : active_tx_set) {
    if (j == tx_uav || j == receiver_uav) continue;
    const auto& u = s.uavs.at(j);
    double gain = rng.bernoulli(params.mainlobe_prob) ? u.mainlobe_gain : u.sidelobe_gain;
    double hj = rng.gamma(params.nakagami_m, 1.0 / params.nakagami_m);
    double dj = s.uav_uav_distance_m(receiver_uav, j);
    interference += u.transmit_power_w * gain * params.excess_loss * hj *
                    std::pow(dj, -params.pathloss_exp);
  }
  return signal / (interference + params.noise_power_w);
}

enum class PairRateMode { matrix, sinr };

// UAV-to-UAV link rate. matrix mode replays explicit per-pair rates from the
// scenario file; sinr mode evaluates the stochastic model at its expected
// fading (H = 1) with interference off.
inline double uav_pair_rate_bps(int k, int i, const Scenario& s, PairRateMode mode) {
  if (!s.uavs_adjacent(k, i)) fail<domain_error>("uav_pair_rate_bps: (", k, ",", i, ") not adjacent");
  if (mode == PairRateMode::matrix) {
    auto it = s.uav_rate_bps.find({k, i});
    if (it == s.uav_rate_bps.end())
      fail<config_error>("uav_pair_rate_bps: no rate matrix entry for (", k, ",", i, ")");
    return it->second;
  }
  A2AStochasticParams params = default_a2a_params(s);
  double mu = s.uavs.at(k).transmit_power_w * s.uavs.at(k).mainlobe_gain * params.excess_loss;
  double d = s.uav_uav_distance_m(k, i);
  double gamma = mu * std::pow(d, -params.pathloss_exp) / params.noise_power_w;
  return s.rrb_bandwidth_hz * std::log2(1.0 + gamma);
}

// Common downlink rate of a UAV: the minimum rate over its scheduled UDs.
inline double common_downlink_rate_bps(int uav, const std::vector<int>& scheduled_uds,
                                       const Scenario& s) {
  if (scheduled_uds.empty()) fail<domain_error>("common_downlink_rate_bps: empty cluster");
  double r = std::numeric_limits<double>::infinity();
  for (int u : scheduled_uds) r = std::min(r, downlink_rate_bps(u, uav, s));
  return r;
}

// Best achievable uplink rate of a UD over its LOS UAVs (0 if none).
inline double best_access_rate_bps(int ud, const Scenario& s) {
  double best = 0.0;
  for (int k : s.los.at(ud)) best = std::max(best, access_rate_bps(ud, k, 0, s));
  return best;
}

// Partition of the UDs: LOS members need a line-of-sight flag to some UAV
// and a best rate meeting the threshold; everything else relies on relays.
inline std::pair<std::set<int>, std::set<int>> classify_los(const Scenario& s) {
  std::set<int> los_set, non_set;
  for (int u = 0; u < s.num_uds(); ++u) {
    if (!s.los[u].empty() && best_access_rate_bps(u, s) >= s.rate_threshold_bps)
      los_set.insert(u);
    else
      non_set.insert(u);
  }
  return {los_set, non_set};
}

// Cached link-rate view used by the schedulers.
struct LinkRateTable {
  std::map<std::pair<int, int>, double> ud_uav_rate;   // (ud, uav) -> bps, LOS & above threshold
  std::map<std::pair<int, int>, double> d2d_rate;      // (tx, rx) -> bps, within zone
  std::map<std::pair<int, int>, double> uav_uav_rate;  // directed, adjacency only
  std::map<int, double> downlink_rate;                 // uav -> common rate (set post-schedule)
};

inline LinkRateTable build_rate_table(const Scenario& s, PairRateMode mode) {
  LinkRateTable t;
  auto [los_set, non_set] = classify_los(s);
  for (int u : los_set)
    for (int k : s.los[u]) {
      double r = access_rate_bps(u, k, 0, s);
      if (r >= s.rate_threshold_bps) t.ud_uav_rate[{u, k}] = r;
    }
  for (int relay : los_set)
    for (int nlos : non_set)
      if (s.ud_ud_distance_m(nlos, relay) <= s.d2d_zone_radius_m)
        t.d2d_rate[{nlos, relay}] = d2d_rate_bps(nlos, relay, s);
  for (const auto& [a, b] : s.uav_edges) {
    t.uav_uav_rate[{a, b}] = uav_pair_rate_bps(a, b, s, mode);
    t.uav_uav_rate[{b, a}] = uav_pair_rate_bps(b, a, s, mode);
  }
  return t;
}

}  // namespace fedmod
