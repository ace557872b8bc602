#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedmod/accounting.hpp"
#include "fedmod/core.hpp"
#include "fedmod/dissemination.hpp"
#include "fedmod/learning.hpp"
#include "fedmod/radio.hpp"
#include "fedmod/scenario.hpp"
#include "fedmod/scheduling.hpp"

namespace fedmod {

struct ExperimentConfig {
  std::string preset;
  std::string scenario_path;  // optional; otherwise generated per seed
  GenerationConfig gen;
  std::string algorithm = "fedmod";  // fedmod | star | hfl
  std::string scheduler = "p1p2";    // p1p2 | random
  std::string uinv_mode = "delivered";  // delivered | all
  TrainConfig train;
  SyntheticConfig data;
  int labels_per_ud = 2;
  int labels_per_cluster = 6;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "out";
  bool dissemination_only = false;  // replay/autonomous fixtures
  bool scripted_replay = false;
};

// The five-UAV dissemination fixture: explicit adjacency, explicit directed
// rate matrix, initial side information = own model only.
inline Scenario fig3_scenario() {
  Scenario s;
  for (int k = 0; k < 5; ++k) {
    UavParams a;
    a.x = 150.0 * k;
    a.y = (k % 2) * 120.0;
    a.altitude_m = 100.0;
    s.uavs.push_back(a);
  }
  s.uav_edges = {{0, 1}, {0, 3}, {1, 2}, {1, 3}, {2, 4}};
  auto mbps = [](double m) { return m * 1e6; };
  s.uav_rate_bps[{1, 0}] = mbps(12);
  s.uav_rate_bps[{1, 2}] = mbps(9);
  s.uav_rate_bps[{1, 3}] = mbps(11);
  s.uav_rate_bps[{0, 1}] = mbps(14);
  s.uav_rate_bps[{0, 3}] = mbps(10);
  s.uav_rate_bps[{3, 0}] = mbps(13);
  s.uav_rate_bps[{3, 1}] = mbps(15);
  s.uav_rate_bps[{2, 1}] = mbps(11);
  s.uav_rate_bps[{2, 4}] = mbps(15);
  s.uav_rate_bps[{4, 2}] = mbps(16);
  s.model_size_bits = 9098;
  s.seed = 0;
  s.validate();
  return s;
}

// The hand-worked five-round schedule on the fixture, plus its two-hop
// global-model broadcast (computed by the BFS flood in the replay).
inline std::vector<ScriptedRound> fig3_script() {
  std::vector<ScriptedRound> rounds(5);
  rounds[0].packets = {{1, {1}, {0, 2, 3}}};
  rounds[1].packets = {{3, {3}, {0, 1}}, {4, {4}, {2}}};
  rounds[2].packets = {{0, {0}, {1, 3}}};
  rounds[3].packets = {{2, {4, 1}, {1, 4}}};
  rounds[4].packets = {{2, {2}, {1, 4}}};
  return rounds;
}

// Five-UAV training topologies: fully connected, and the partial variant
// with the 0-3 link removed.
inline UavTopology fig6_topology(bool fully_connected, double rate_bps = 12e6) {
  UavTopology t = UavTopology::fully_connected(5, rate_bps);
  if (!fully_connected) {
    t.edges.erase(std::remove(t.edges.begin(), t.edges.end(), std::make_pair(0, 3)),
                  t.edges.end());
    t.rate_bps.erase({0, 3});
    t.rate_bps.erase({3, 0});
  }
  return t;
}

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  if (name == "fig3-replay") {
    cfg.dissemination_only = true;
    cfg.scripted_replay = true;
    return cfg;
  }
  if (name == "fig3-auto") {
    cfg.dissemination_only = true;
    cfg.scripted_replay = false;
    return cfg;
  }
  if (name == "train20" || name == "fig6-full" || name == "fig6-partial") {
    cfg.gen.num_uds = 20;
    cfg.gen.num_uavs = 5;
    cfg.gen.rrbs_per_uav = 7;
    cfg.train.global_iters = 60;
    cfg.train.local_iters = 1;
    cfg.train.learning_rate = 0.5;
    cfg.data.num_classes = 10;
    cfg.data.feature_dim = 20;
    cfg.data.train_samples = 13000;
    cfg.data.test_samples = 1000;
    cfg.train.model.feature_dim = cfg.data.feature_dim;
    cfg.train.model.num_classes = cfg.data.num_classes;
    if (name == "fig6-partial") cfg.train.dissemination_period = 1;
    return cfg;
  }
  fail<config_error>("unknown preset '", name,
                     "' (known: fig3-replay, fig3-auto, train20, fig6-full, fig6-partial)");
}

namespace detail {

inline int nearest_uav(const Scenario& s, int ud) {
  int best = 0;
  for (int k = 1; k < s.num_uavs(); ++k)
    if (s.ud_uav_distance_m(ud, k) < s.ud_uav_distance_m(ud, best)) best = k;
  return best;
}

}  // namespace detail

// Builds everything run_fl needs for one seeded scenario.
inline FlContext make_context(const Scenario& scenario, const Schedule& schedule,
                              const ExperimentConfig& cfg, std::uint64_t seed,
                              Dataset train, Dataset test) {
  FlContext ctx;
  ctx.scenario = &scenario;
  ctx.schedule = &schedule;
  ctx.train = std::move(train);
  ctx.test = std::move(test);
  ctx.model_size_bits = scenario.model_size_bits;

  ctx.uav_of_ud.assign(scenario.num_uds(), -1);
  for (const auto& a : schedule.assignments) ctx.uav_of_ud[a.ud] = a.uav;
  for (const auto& r : schedule.relays) ctx.uav_of_ud[r.nlos_ud] = r.uav;

  if (cfg.uinv_mode == "all") {
    for (int u = 0; u < scenario.num_uds(); ++u) {
      ctx.uinv.push_back(u);
      if (ctx.uav_of_ud[u] < 0) ctx.uav_of_ud[u] = detail::nearest_uav(scenario, u);
    }
  } else {
    ctx.uinv = schedule.delivered_uds();
    for (int u = 0; u < scenario.num_uds(); ++u)
      if (ctx.uav_of_ud[u] < 0)
        log_debug("ud ", u, " has no uplink nor relay this round; dropped from training");
  }
  if (ctx.uinv.empty()) fail<config_error>("no participating UDs (schedule delivered nothing)");

  // Data partition uses the geographic clusters so it is independent of the
  // radio schedule.
  std::vector<int> geo_cluster(scenario.num_uds());
  for (int u = 0; u < scenario.num_uds(); ++u) geo_cluster[u] = detail::nearest_uav(scenario, u);
  std::vector<int> samples(scenario.num_uds());
  for (int u = 0; u < scenario.num_uds(); ++u) samples[u] = scenario.uds[u].node.num_samples;
  // Scale demand down if the dataset is smaller than the nominal counts.
  long long demand = 0;
  for (int u : ctx.uinv) demand += samples[u];
  if (demand > ctx.train.size()) {
    int per = std::max(1, ctx.train.size() / std::max(1, scenario.num_uds()));
    for (auto& v : samples) v = per;
  }
  ctx.partition =
      partition_noniid(ctx.train, scenario.num_uds(), cfg.labels_per_ud, geo_cluster,
                       scenario.num_uavs(), cfg.labels_per_cluster, samples, seed);

  // Replay explicit A2A rates when the scenario carries a complete matrix.
  bool full_matrix = !scenario.uav_edges.empty();
  for (const auto& [a, b] : scenario.uav_edges)
    full_matrix &= scenario.uav_rate_bps.count({a, b}) && scenario.uav_rate_bps.count({b, a});
  ctx.topo = UavTopology::from_scenario(scenario,
                                        full_matrix ? PairRateMode::matrix : PairRateMode::sinr);
  return ctx;
}

struct SeedResult {
  std::uint64_t seed = 0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  double total_energy_j = 0.0;
  double mean_t_diss_s = 0.0;
  double mean_alpha_rounds = 0.0;
  double t_diss_s = 0.0;  // dissemination-only runs
  int rounds = 0;
};

struct RunResult {
  std::vector<SeedResult> per_seed;
  std::string out_dir;
};

inline void write_history_csv(const History& hist, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail("cannot open '", path, "' for writing");
  os << "iteration,loss,accuracy,t_diss_s,tau_s,energy_total_j,energy_ud_j,energy_uav_j,"
        "diss_rounds,grad_norm_sq\r\n";
  char buf[400];
  for (const auto& r : hist.records) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%.9g\r\n", r.iter,
                  r.loss, r.accuracy, r.t_diss_s, r.tau_s, r.energy_total_j, r.energy_ud_j,
                  r.energy_uav_j, r.diss_rounds, r.grad_norm_sq);
    os << buf;
  }
}

inline RunResult run(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  RunResult result;
  result.out_dir = cfg.out_dir;
  fs::create_directories(cfg.out_dir);

  nlohmann::ordered_json summary;
  summary["preset"] = cfg.preset.empty() ? "custom" : cfg.preset;
  summary["algorithm"] = cfg.algorithm;
  summary["scheduler"] = cfg.scheduler;
  summary["dissemination_period"] = cfg.train.dissemination_period;
  summary["seeds"] = cfg.seeds;
  auto& per_seed_json = summary["per_seed"];

  for (std::uint64_t seed : cfg.seeds) {
    SeedResult sr;
    sr.seed = seed;

    if (cfg.dissemination_only) {
      Scenario scenario = cfg.scenario_path.empty() ? fig3_scenario() : load(cfg.scenario_path);
      UavTopology topo = UavTopology::from_scenario(scenario, PairRateMode::matrix);
      DisseminationTrace trace;
      if (cfg.scripted_replay) {
        trace = replay_schedule(SideInformation::initial(scenario.num_uavs()), topo,
                                fig3_script(), scenario.model_size_bits);
      } else {
        trace = run_dissemination(SideInformation::initial(scenario.num_uavs()), topo,
                                  scenario.model_size_bits);
      }
      sr.t_diss_s = trace.t_diss_s;
      sr.rounds = trace.rounds_to_consensus;
      std::ofstream tf(cfg.out_dir + "/trace_seed_" + std::to_string(seed) + ".txt",
                       std::ios::binary);
      tf << render_trace(trace);
      nlohmann::ordered_json js;
      js["seed"] = seed;
      js["t_diss_s"] = sr.t_diss_s;
      js["rounds"] = sr.rounds;
      js["complete_uav"] = trace.complete_uav;
      per_seed_json.push_back(js);
      result.per_seed.push_back(sr);
      log_info("seed ", seed, ": t_diss=", sr.t_diss_s, " s, rounds=", sr.rounds);
      continue;
    }

    Scenario scenario = cfg.scenario_path.empty() ? generate(cfg.gen, seed) : load(cfg.scenario_path);
    if (cfg.preset == "fig6-full" || cfg.preset == "fig6-partial") {
      scenario.uav_edges.clear();
      for (int a = 0; a < scenario.num_uavs(); ++a)
        for (int b = a + 1; b < scenario.num_uavs(); ++b) scenario.uav_edges.emplace_back(a, b);
      if (cfg.preset == "fig6-partial")
        scenario.uav_edges.erase(
            std::remove(scenario.uav_edges.begin(), scenario.uav_edges.end(),
                        std::make_pair(0, 3)),
            scenario.uav_edges.end());
    }
    LinkRateTable rates = build_rate_table(scenario, PairRateMode::sinr);
    P1Params p1{cfg.train.local_iters};
    Schedule schedule;
    if (cfg.scheduler == "random") {
      Rng rng = Rng(seed).fork(0x5eed);
      schedule = random_schedule(scenario, rates, rng, p1);
    } else {
      schedule = schedule_p1p2(scenario, rates, p1);
    }

    auto [train, test] = make_synthetic(cfg.data, seed);
    FlContext ctx = make_context(scenario, schedule, cfg, seed, std::move(train), std::move(test));

    TrainConfig tc = cfg.train;
    tc.seed = seed;
    FlTopology topo = FlTopology::fedmod;
    if (cfg.algorithm == "star") topo = FlTopology::star;
    else if (cfg.algorithm == "hfl") topo = FlTopology::hfl;
    else if (cfg.algorithm != "fedmod") fail<config_error>("unknown algorithm '", cfg.algorithm, "'");

    History hist = run_fl(topo, ctx, tc);
    write_history_csv(hist, cfg.out_dir + "/seed_" + std::to_string(seed) + ".csv");

    const auto& last = hist.records.back();
    sr.final_accuracy = last.accuracy;
    sr.final_loss = last.loss;
    for (const auto& r : hist.records) {
      sr.total_energy_j += r.energy_total_j;
      sr.mean_t_diss_s += r.t_diss_s;
      sr.mean_alpha_rounds += r.diss_rounds;
    }
    sr.mean_t_diss_s /= hist.records.size();
    sr.mean_alpha_rounds /= hist.records.size();

    nlohmann::ordered_json js;
    js["seed"] = seed;
    js["final_accuracy"] = sr.final_accuracy;
    js["final_loss"] = sr.final_loss;
    js["total_energy_j"] = sr.total_energy_j;
    js["mean_t_diss_s"] = sr.mean_t_diss_s;
    js["mean_alpha_rounds"] = sr.mean_alpha_rounds;
    per_seed_json.push_back(js);
    result.per_seed.push_back(sr);
    log_info("seed ", seed, ": final acc=", sr.final_accuracy, ", energy=", sr.total_energy_j,
             " J");
  }

  if (!cfg.dissemination_only) {
    double mean = 0.0, var = 0.0, energy = 0.0, alpha = 0.0;
    for (const auto& sr : result.per_seed) {
      mean += sr.final_accuracy;
      energy += sr.total_energy_j;
      alpha += sr.mean_alpha_rounds;
    }
    mean /= result.per_seed.size();
    energy /= result.per_seed.size();
    alpha /= result.per_seed.size();
    for (const auto& sr : result.per_seed) var += (sr.final_accuracy - mean) * (sr.final_accuracy - mean);
    var = result.per_seed.size() > 1 ? var / (result.per_seed.size() - 1) : 0.0;
    summary["final_accuracy_mean"] = mean;
    summary["final_accuracy_sd"] = std::sqrt(var);
    summary["total_energy_j_mean"] = energy;
    summary["alpha_rounds_mean"] = alpha;
  }

  std::ofstream js(cfg.out_dir + "/summary.json", std::ios::binary);
  js << summary.dump(2) << "\n";
  return result;
}

// Aligns result directories and reports deltas against the first one.
// Returns the number of (directory, metric) pairs where the first directory
// is strictly worse: accuracy lower, or energy higher. Comparing a directory
// with itself therefore returns 0.
inline int compare(const std::vector<std::string>& dirs, std::ostream& os) {
  if (dirs.size() < 2) fail<config_error>("compare: need at least two result directories");
  std::vector<nlohmann::json> sums;
  for (const auto& d : dirs) {
    std::ifstream in(d + "/summary.json");
    if (!in) fail("compare: cannot open '", d, "/summary.json'");
    nlohmann::json j;
    in >> j;
    if (!j.contains("final_accuracy_mean"))
      fail<config_error>("compare: '", d, "' has no training summary (schema mismatch)");
    sums.push_back(j);
  }
  os << "dir,final_accuracy_mean,total_energy_j_mean,accuracy_delta,energy_delta\n";
  int losses = 0;
  double acc0 = sums[0]["final_accuracy_mean"].get<double>();
  double en0 = sums[0]["total_energy_j_mean"].get<double>();
  char buf[320];
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    double acc = sums[i]["final_accuracy_mean"].get<double>();
    double en = sums[i]["total_energy_j_mean"].get<double>();
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g\n", dirs[i].c_str(), acc, en,
                  acc - acc0, en - en0);
    os << buf;
    if (i > 0) {
      if (acc0 < acc) ++losses;
      if (en0 > en) ++losses;
    }
  }
  return losses;
}

}  // namespace fedmod
