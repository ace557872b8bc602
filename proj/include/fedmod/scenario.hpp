#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fedmod/core.hpp"
#include "fedmod/rng.hpp"

namespace fedmod {

// Per-UD compute/energy parameters.
struct NodeParams {
  double transmit_power_w = 3.0;
  double cpu_freq_hz = 1e9;
  double cycles_per_sample = 500.0;
  int num_samples = 200;
  double capacitance_coeff = 1e-28;
  double energy_budget_j = std::numeric_limits<double>::infinity();  // infinity = no budget

  void validate(int ud) const {
    if (transmit_power_w <= 0 || cpu_freq_hz <= 0 || cycles_per_sample <= 0 ||
        capacitance_coeff <= 0)
      fail<config_error>("ud ", ud, ": node parameters must be strictly positive");
    if (num_samples < 1) fail<config_error>("ud ", ud, ": num_samples must be >= 1");
  }
};

struct UavParams {
  double x = 0, y = 0, altitude_m = 100.0;
  double mass_kg = 0.5;
  double gravity = 9.81;
  double propeller_radius_m = 0.25;
  int num_propellers = 4;
  double air_density = 1.225;
  double beamwidth_deg = 30.0;
  double mainlobe_gain = 10.0;
  double sidelobe_gain = 1.0;
  double transmit_power_w = 1.0;

  void validate(int k) const {
    if (altitude_m <= 0) fail<config_error>("uav ", k, ": altitude must be positive");
    if (mass_kg <= 0 || gravity <= 0 || propeller_radius_m <= 0 || num_propellers <= 0 ||
        air_density <= 0 || transmit_power_w <= 0)
      fail<config_error>("uav ", k, ": physical constants must be positive");
    if (beamwidth_deg < 0 || beamwidth_deg > 180)
      fail<config_error>("uav ", k, ": beamwidth must be in [0, 180] degrees");
  }
};

struct UdSite {
  double x = 0, y = 0;
  NodeParams node;
};

// Immutable world description. Construct, validate, then share read-only.
struct Scenario {
  std::vector<UavParams> uavs;
  std::vector<UdSite> uds;
  std::vector<std::set<int>> los;                 // per-UD: UAV indices with LOS
  std::vector<std::pair<int, int>> uav_edges;     // undirected, stored with first < second
  std::map<std::pair<int, int>, double> uav_rate_bps;  // optional explicit A2A rates, directed

  int rrbs_per_uav = 7;
  double rrb_bandwidth_hz = 2e6;
  double carrier_hz = 1e9;
  double noise_psd_dbm_hz = -174.0;
  double rate_threshold_bps = 1e6;
  long long model_size_bits = 9098;
  double d2d_zone_radius_m = 100.0;
  double t_max_s = 1.0;

  double cps_x = 0.0, cps_y = 0.0, cps_height_m = 10.0, cps_power_w = 5.0;

  // Accepted from config for completeness; not used by any implemented equation.
  double prop_param_a = 9.6, prop_param_b = 0.28;
  double atten_los_db = 1.0, atten_nlos_db = 20.0;

  std::uint64_t seed = 0;

  int num_uavs() const { return static_cast<int>(uavs.size()); }
  int num_uds() const { return static_cast<int>(uds.size()); }

  bool uavs_adjacent(int k, int i) const {
    auto e = std::minmax(k, i);
    return std::find(uav_edges.begin(), uav_edges.end(), std::make_pair(e.first, e.second)) !=
           uav_edges.end();
  }

  std::vector<int> uav_neighbors(int k) const {
    std::vector<int> out;
    for (const auto& [a, b] : uav_edges) {
      if (a == k) out.push_back(b);
      if (b == k) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  double ud_uav_distance_m(int u, int k) const {
    const auto& s = uds.at(u);
    const auto& a = uavs.at(k);
    double dx = s.x - a.x, dy = s.y - a.y, dz = a.altitude_m;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }

  double uav_uav_distance_m(int k, int i) const {
    const auto& a = uavs.at(k);
    const auto& b = uavs.at(i);
    double dx = a.x - b.x, dy = a.y - b.y, dz = a.altitude_m - b.altitude_m;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }

  double ud_ud_distance_m(int a, int b) const {
    const auto& p = uds.at(a);
    const auto& q = uds.at(b);
    return std::hypot(p.x - q.x, p.y - q.y);
  }

  double ud_cps_distance_m(int u) const {
    const auto& s = uds.at(u);
    double dx = s.x - cps_x, dy = s.y - cps_y;
    return std::sqrt(dx * dx + dy * dy + cps_height_m * cps_height_m);
  }

  double uav_cps_distance_m(int k) const {
    const auto& a = uavs.at(k);
    double dx = a.x - cps_x, dy = a.y - cps_y, dz = a.altitude_m - cps_height_m;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }

  void validate() const {
    if (model_size_bits <= 0) fail<config_error>("model_size_bits must be positive");
    if (rrbs_per_uav < 1) fail<config_error>("rrbs_per_uav must be >= 1");
    if (rrb_bandwidth_hz <= 0 || carrier_hz <= 0)
      fail<config_error>("bandwidth and carrier frequency must be positive");
    for (int k = 0; k < num_uavs(); ++k) uavs[k].validate(k);
    for (int u = 0; u < num_uds(); ++u) uds[u].node.validate(u);
    for (int k = 1; k < num_uavs(); ++k)
      if (uavs[k].altitude_m != uavs[0].altitude_m)
        fail<config_error>("all UAVs must share one altitude");
    if (static_cast<int>(los.size()) != num_uds())
      fail<config_error>("los table must have one row per UD");
    for (int u = 0; u < num_uds(); ++u)
      for (int k : los[u])
        if (k < 0 || k >= num_uavs())
          fail<config_error>("los entry for ud ", u, " names unknown uav ", k);
    for (const auto& [a, b] : uav_edges) {
      if (a == b) fail<config_error>("uav adjacency must have no self-loops");
      if (a < 0 || b < 0 || a >= num_uavs() || b >= num_uavs())
        fail<config_error>("uav edge (", a, ",", b, ") out of range");
      if (a > b) fail<config_error>("uav edges must be stored with first < second");
    }
    for (const auto& [pair, rate] : uav_rate_bps) {
      if (rate < 0) fail<config_error>("uav rate for (", pair.first, ",", pair.second, ") negative");
      if (!uavs_adjacent(pair.first, pair.second))
        fail<config_error>("uav rate given for non-adjacent pair (", pair.first, ",", pair.second,
                           ")");
    }
  }
};

inline bool operator==(const NodeParams& a, const NodeParams& b) {
  return a.transmit_power_w == b.transmit_power_w && a.cpu_freq_hz == b.cpu_freq_hz &&
         a.cycles_per_sample == b.cycles_per_sample && a.num_samples == b.num_samples &&
         a.capacitance_coeff == b.capacitance_coeff && a.energy_budget_j == b.energy_budget_j;
}

inline bool operator==(const UavParams& a, const UavParams& b) {
  return a.x == b.x && a.y == b.y && a.altitude_m == b.altitude_m && a.mass_kg == b.mass_kg &&
         a.gravity == b.gravity && a.propeller_radius_m == b.propeller_radius_m &&
         a.num_propellers == b.num_propellers && a.air_density == b.air_density &&
         a.beamwidth_deg == b.beamwidth_deg && a.mainlobe_gain == b.mainlobe_gain &&
         a.sidelobe_gain == b.sidelobe_gain && a.transmit_power_w == b.transmit_power_w;
}

inline bool operator==(const UdSite& a, const UdSite& b) {
  return a.x == b.x && a.y == b.y && a.node == b.node;
}

inline bool operator==(const Scenario& a, const Scenario& b) {
  return a.uavs == b.uavs && a.uds == b.uds && a.los == b.los && a.uav_edges == b.uav_edges &&
         a.uav_rate_bps == b.uav_rate_bps && a.rrbs_per_uav == b.rrbs_per_uav &&
         a.rrb_bandwidth_hz == b.rrb_bandwidth_hz && a.carrier_hz == b.carrier_hz &&
         a.noise_psd_dbm_hz == b.noise_psd_dbm_hz &&
         a.rate_threshold_bps == b.rate_threshold_bps && a.model_size_bits == b.model_size_bits &&
         a.d2d_zone_radius_m == b.d2d_zone_radius_m && a.t_max_s == b.t_max_s &&
         a.cps_x == b.cps_x && a.cps_y == b.cps_y && a.cps_height_m == b.cps_height_m &&
         a.cps_power_w == b.cps_power_w && a.prop_param_a == b.prop_param_a &&
         a.prop_param_b == b.prop_param_b && a.atten_los_db == b.atten_los_db &&
         a.atten_nlos_db == b.atten_nlos_db && a.seed == b.seed;
}

struct GenerationConfig {
  int num_uds = 20;
  int num_uavs = 5;
  double area_radius_m = 400.0;
  double uav_altitude_m = 100.0;
  double uav_ring_radius_m = 200.0;
  double p_los = 0.7;
  double adjacency_threshold_m = 500.0;

  double ud_power_w_min = 3.0;  // per-UD transmit power range, sampled log-uniformly
  double ud_power_w_max = 3.0;  // when min < max; the disparity is what relaying feeds on
  double uav_power_w = 1.0;
  double cpu_freq_hz_min = 1e8, cpu_freq_hz_max = 1e9;
  double cycles_min = 400.0, cycles_max = 600.0;
  int samples_per_ud = 200;
  double capacitance = 1e-28;

  int rrbs_per_uav = 7;
  double rrb_bandwidth_hz = 2e6;
  double carrier_hz = 1e9;
  double noise_psd_dbm_hz = -174.0;
  double rate_threshold_bps = 1e6;
  long long model_size_bits = 9098;
  double d2d_zone_radius_m = 100.0;
  double t_max_s = 1.0;
};

// Pure function of (config, seed): same inputs, bit-identical Scenario.
inline Scenario generate(const GenerationConfig& cfg, std::uint64_t seed) {
  if (cfg.num_uds < 1) fail<config_error>("generate: need at least one UD");
  if (cfg.num_uavs < 1) fail<config_error>("generate: need at least one UAV");
  if (cfg.area_radius_m <= 0 || cfg.uav_altitude_m <= 0)
    fail<config_error>("generate: radii and altitude must be positive");

  Scenario s;
  s.seed = seed;
  s.rrbs_per_uav = cfg.rrbs_per_uav;
  s.rrb_bandwidth_hz = cfg.rrb_bandwidth_hz;
  s.carrier_hz = cfg.carrier_hz;
  s.noise_psd_dbm_hz = cfg.noise_psd_dbm_hz;
  s.rate_threshold_bps = cfg.rate_threshold_bps;
  s.model_size_bits = cfg.model_size_bits;
  s.d2d_zone_radius_m = cfg.d2d_zone_radius_m;
  s.t_max_s = cfg.t_max_s;

  Rng root(seed);
  Rng pos_rng = root.fork(1);
  Rng node_rng = root.fork(2);
  Rng los_rng = root.fork(3);

  // One UAV per angular sub-region of the disc, at fixed altitude.
  for (int k = 0; k < cfg.num_uavs; ++k) {
    UavParams a;
    double angle = 2.0 * M_PI * (k + 0.5) / cfg.num_uavs;
    a.x = cfg.uav_ring_radius_m * std::cos(angle);
    a.y = cfg.uav_ring_radius_m * std::sin(angle);
    a.altitude_m = cfg.uav_altitude_m;
    a.transmit_power_w = cfg.uav_power_w;
    s.uavs.push_back(a);
  }

  for (int u = 0; u < cfg.num_uds; ++u) {
    UdSite site;
    double r = cfg.area_radius_m * std::sqrt(pos_rng.uniform());
    double th = pos_rng.uniform(0.0, 2.0 * M_PI);
    site.x = r * std::cos(th);
    site.y = r * std::sin(th);
    site.node.transmit_power_w =
        cfg.ud_power_w_min == cfg.ud_power_w_max
            ? cfg.ud_power_w_min
            : std::pow(10.0, node_rng.uniform(std::log10(cfg.ud_power_w_min),
                                              std::log10(cfg.ud_power_w_max)));
    site.node.cpu_freq_hz = node_rng.uniform(cfg.cpu_freq_hz_min, cfg.cpu_freq_hz_max);
    site.node.cycles_per_sample = node_rng.uniform(cfg.cycles_min, cfg.cycles_max);
    site.node.num_samples = cfg.samples_per_ud;
    site.node.capacitance_coeff = cfg.capacitance;
    s.uds.push_back(site);
  }

  s.los.resize(cfg.num_uds);
  for (int u = 0; u < cfg.num_uds; ++u)
    for (int k = 0; k < cfg.num_uavs; ++k)
      if (los_rng.bernoulli(cfg.p_los)) s.los[u].insert(k);

  for (int a = 0; a < cfg.num_uavs; ++a)
    for (int b = a + 1; b < cfg.num_uavs; ++b)
      if (s.uav_uav_distance_m(a, b) <= cfg.adjacency_threshold_m) s.uav_edges.emplace_back(a, b);

  s.validate();
  return s;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LineReader {
  std::istringstream in;
  int line_no = 0;
  std::string line;

  explicit LineReader(const std::string& text) : in(text) {}

  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
        line.pop_back();
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      line = line.substr(start);
      return true;
    }
    return false;
  }
};

}  // namespace detail

inline std::string to_text(const Scenario& s) {
  std::ostringstream os;
  auto d = detail::fmt_double;
  os << "fedmod-scenario v1\n";
  os << "[params]\n";
  os << "seed = " << s.seed << "\n";
  os << "rrbs_per_uav = " << s.rrbs_per_uav << "\n";
  os << "rrb_bandwidth_hz = " << d(s.rrb_bandwidth_hz) << "\n";
  os << "carrier_hz = " << d(s.carrier_hz) << "\n";
  os << "noise_psd_dbm_hz = " << d(s.noise_psd_dbm_hz) << "\n";
  os << "rate_threshold_bps = " << d(s.rate_threshold_bps) << "\n";
  os << "model_size_bits = " << s.model_size_bits << "\n";
  os << "d2d_zone_radius_m = " << d(s.d2d_zone_radius_m) << "\n";
  os << "t_max_s = " << d(s.t_max_s) << "\n";
  os << "cps = " << d(s.cps_x) << " " << d(s.cps_y) << " " << d(s.cps_height_m) << " "
     << d(s.cps_power_w) << "\n";
  os << "prop_params_ab = " << d(s.prop_param_a) << " " << d(s.prop_param_b) << "\n";
  os << "attenuation_db = " << d(s.atten_los_db) << " " << d(s.atten_nlos_db) << "\n";
  os << "[uavs]\n";
  for (int k = 0; k < s.num_uavs(); ++k) {
    const auto& a = s.uavs[k];
    os << k << " " << d(a.x) << " " << d(a.y) << " " << d(a.altitude_m) << " " << d(a.mass_kg)
       << " " << d(a.gravity) << " " << d(a.propeller_radius_m) << " " << a.num_propellers << " "
       << d(a.air_density) << " " << d(a.beamwidth_deg) << " " << d(a.mainlobe_gain) << " "
       << d(a.sidelobe_gain) << " " << d(a.transmit_power_w) << "\n";
  }
  os << "[uds]\n";
  for (int u = 0; u < s.num_uds(); ++u) {
    const auto& t = s.uds[u];
    os << u << " " << d(t.x) << " " << d(t.y) << " " << d(t.node.transmit_power_w) << " "
       << d(t.node.cpu_freq_hz) << " " << d(t.node.cycles_per_sample) << " " << t.node.num_samples
       << " " << d(t.node.capacitance_coeff);
    if (std::isfinite(t.node.energy_budget_j)) os << " " << d(t.node.energy_budget_j);
    os << "\n";
  }
  os << "[los]\n";
  for (int u = 0; u < s.num_uds(); ++u) {
    os << u << ":";
    for (int k : s.los[u]) os << " " << k;
    os << "\n";
  }
  os << "[uav_edges]\n";
  for (const auto& [a, b] : s.uav_edges) os << a << " " << b << "\n";
  os << "[uav_rates]\n";
  for (const auto& [pair, rate] : s.uav_rate_bps)
    os << pair.first << " " << pair.second << " " << d(rate) << "\n";
  return os.str();
}

inline Scenario from_text(const std::string& text) {
  detail::LineReader rd(text);
  if (!rd.next() || rd.line != "fedmod-scenario v1")
    fail<parse_error>("line ", rd.line_no, ": expected header 'fedmod-scenario v1'");

  Scenario s;
  s.t_max_s = 0;  // required-field tracking below
  std::set<std::string> seen;
  std::string section;

  auto parse_doubles = [&](const std::string& str, int expect) {
    std::istringstream is(str);
    std::vector<double> vals;
    double v;
    while (is >> v) vals.push_back(v);
    if (expect >= 0 && static_cast<int>(vals.size()) != expect)
      fail<parse_error>("line ", rd.line_no, ": expected ", expect, " numeric fields, got ",
                        vals.size());
    return vals;
  };

  while (rd.next()) {
    if (rd.line.front() == '[') {
      if (rd.line.back() != ']') fail<parse_error>("line ", rd.line_no, ": malformed section");
      section = rd.line.substr(1, rd.line.size() - 2);
      if (section != "params" && section != "uavs" && section != "uds" && section != "los" &&
          section != "uav_edges" && section != "uav_rates")
        fail<parse_error>("line ", rd.line_no, ": unknown section '", section, "'");
      continue;
    }
    if (section == "params") {
      auto eq = rd.line.find('=');
      if (eq == std::string::npos)
        fail<parse_error>("line ", rd.line_no, ": expected 'key = value'");
      std::string key = rd.line.substr(0, eq);
      while (!key.empty() && key.back() == ' ') key.pop_back();
      std::string val = rd.line.substr(eq + 1);
      seen.insert(key);
      if (key == "seed") {
        s.seed = std::stoull(val);
      } else if (key == "rrbs_per_uav") {
        s.rrbs_per_uav = std::stoi(val);
      } else if (key == "rrb_bandwidth_hz") {
        s.rrb_bandwidth_hz = std::stod(val);
      } else if (key == "carrier_hz") {
        s.carrier_hz = std::stod(val);
      } else if (key == "noise_psd_dbm_hz") {
        s.noise_psd_dbm_hz = std::stod(val);
      } else if (key == "rate_threshold_bps") {
        s.rate_threshold_bps = std::stod(val);
      } else if (key == "model_size_bits") {
        s.model_size_bits = std::stoll(val);
      } else if (key == "d2d_zone_radius_m") {
        s.d2d_zone_radius_m = std::stod(val);
      } else if (key == "t_max_s") {
        s.t_max_s = std::stod(val);
      } else if (key == "cps") {
        auto v = parse_doubles(val, 4);
        s.cps_x = v[0];
        s.cps_y = v[1];
        s.cps_height_m = v[2];
        s.cps_power_w = v[3];
      } else if (key == "prop_params_ab") {
        auto v = parse_doubles(val, 2);
        s.prop_param_a = v[0];
        s.prop_param_b = v[1];
      } else if (key == "attenuation_db") {
        auto v = parse_doubles(val, 2);
        s.atten_los_db = v[0];
        s.atten_nlos_db = v[1];
      } else {
        fail<parse_error>("line ", rd.line_no, ": unknown key '", key, "'");
      }
    } else if (section == "uavs") {
      auto v = parse_doubles(rd.line, 13);
      int k = static_cast<int>(v[0]);
      if (k != static_cast<int>(s.uavs.size()))
        fail<parse_error>("line ", rd.line_no, ": uav ids must be dense ascending");
      UavParams a;
      a.x = v[1];
      a.y = v[2];
      a.altitude_m = v[3];
      a.mass_kg = v[4];
      a.gravity = v[5];
      a.propeller_radius_m = v[6];
      a.num_propellers = static_cast<int>(v[7]);
      a.air_density = v[8];
      a.beamwidth_deg = v[9];
      a.mainlobe_gain = v[10];
      a.sidelobe_gain = v[11];
      a.transmit_power_w = v[12];
      s.uavs.push_back(a);
    } else if (section == "uds") {
      auto v = parse_doubles(rd.line, -1);
      if (v.size() != 8 && v.size() != 9)
        fail<parse_error>("line ", rd.line_no, ": ud row needs 8 or 9 fields, got ", v.size());
      int u = static_cast<int>(v[0]);
      if (u != static_cast<int>(s.uds.size()))
        fail<parse_error>("line ", rd.line_no, ": ud ids must be dense ascending");
      UdSite t;
      t.x = v[1];
      t.y = v[2];
      t.node.transmit_power_w = v[3];
      t.node.cpu_freq_hz = v[4];
      t.node.cycles_per_sample = v[5];
      t.node.num_samples = static_cast<int>(v[6]);
      t.node.capacitance_coeff = v[7];
      if (v.size() == 9) t.node.energy_budget_j = v[8];
      s.uds.push_back(t);
    } else if (section == "los") {
      auto colon = rd.line.find(':');
      if (colon == std::string::npos)
        fail<parse_error>("line ", rd.line_no, ": expected 'ud: uav uav ...'");
      int u = std::stoi(rd.line.substr(0, colon));
      if (u != static_cast<int>(s.los.size()))
        fail<parse_error>("line ", rd.line_no, ": los rows must be dense ascending");
      std::istringstream is(rd.line.substr(colon + 1));
      std::set<int> row;
      int k;
      while (is >> k) row.insert(k);
      s.los.push_back(row);
    } else if (section == "uav_edges") {
      auto v = parse_doubles(rd.line, 2);
      s.uav_edges.emplace_back(static_cast<int>(v[0]), static_cast<int>(v[1]));
    } else if (section == "uav_rates") {
      auto v = parse_doubles(rd.line, 3);
      s.uav_rate_bps[{static_cast<int>(v[0]), static_cast<int>(v[1])}] = v[2];
    } else {
      fail<parse_error>("line ", rd.line_no, ": content before any section");
    }
  }

  for (const char* req : {"seed", "rrbs_per_uav", "rrb_bandwidth_hz", "carrier_hz",
                          "noise_psd_dbm_hz", "rate_threshold_bps", "model_size_bits",
                          "d2d_zone_radius_m", "t_max_s"})
    if (!seen.count(req)) fail<parse_error>("missing required field '", req, "'");
  if (s.los.size() != s.uds.size())
    fail<parse_error>("los table has ", s.los.size(), " rows for ", s.uds.size(), " uds");
  s.validate();
  return s;
}

inline void save(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open '", path, "' for writing");
  out << to_text(s);
  if (!out) fail("write to '", path, "' failed");
}

inline Scenario load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '", path, "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

}  // namespace fedmod
