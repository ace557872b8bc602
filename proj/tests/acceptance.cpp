// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <vector>

#include "fedmod/accounting.hpp"
#include "fedmod/dissemination.hpp"
#include "fedmod/graphs.hpp"
#include "fedmod/harness.hpp"
#include "fedmod/learning.hpp"
#include "fedmod/radio.hpp"
#include "fedmod/scheduling.hpp"

using namespace fedmod;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %2d [%s] %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++g_failures;
}

double now_s() {
  using clock = std::chrono::steady_clock;
  static auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

UavTopology random_connected(int k, Rng& rng) {
  UavTopology t;
  t.num_uavs = k;
  std::set<std::pair<int, int>> edges;
  for (int v = 1; v < k; ++v) {
    int p = static_cast<int>(rng.uniform_int(0, v - 1));
    edges.insert({std::min(p, v), std::max(p, v)});
  }
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (rng.bernoulli(0.25)) edges.insert({a, b});
  for (auto [a, b] : edges) {
    t.edges.emplace_back(a, b);
    t.rate_bps[{a, b}] = rng.uniform(5e6, 20e6);
    t.rate_bps[{b, a}] = rng.uniform(5e6, 20e6);
  }
  return t;
}

bool round_protocol_ok(const RoundRecord& rec) {
  std::set<int> txs, rxs;
  for (const auto& pkt : rec.packets) {
    if (pkt.rate_bps != rec.common_rate_bps) return false;  // common rate
    if (!txs.insert(pkt.tx_uav).second) return false;
    for (int t : pkt.targets)
      if (!rxs.insert(t).second) return false;  // one transmitter per receiver
  }
  for (int t : txs)
    if (rxs.count(t)) return false;  // half duplex
  return true;
}

// ---- criterion 1 & 2 ------------------------------------------------------

void criterion_1_2() {
  Scenario fig = fig3_scenario();
  UavTopology topo = UavTopology::from_scenario(fig, PairRateMode::matrix);

  double t0 = now_s();
  bool ok = true;
  std::string detail;
  try {
    auto trace = replay_schedule(SideInformation::initial(5), topo, fig3_script(), 9098);
    double dt = now_s() - t0;
    double err = std::abs(trace.t_diss_s - 0.00590);
    ok = err <= 1e-5 && trace.rounds.size() == 5 && trace.broadcast_hops.size() == 2 && dt < 1.0;
    for (const auto& r : trace.rounds) ok &= round_protocol_ok(r);
    detail = concat("fig3-replay fixture: t_diss=", trace.t_diss_s, " s (|err|=", err,
                    " <= 1e-5), 5 rounds + 2 hops, ", dt, " s runtime");
  } catch (const std::exception& e) {
    ok = false;
    detail = concat("fig3-replay fixture threw: ", e.what());
  }
  report(1, ok, detail);

  t0 = now_s();
  ok = true;
  try {
    auto trace = run_dissemination(SideInformation::initial(5), topo, 9098);
    double dt = now_s() - t0;
    ok = trace.t_diss_s <= 0.0062 && trace.rounds_to_consensus <= 6 && dt < 1.0;
    for (const auto& r : trace.rounds) ok &= round_protocol_ok(r);
    detail = concat("autonomous run: t_diss=", trace.t_diss_s, " s <= 0.0062, ",
                    trace.rounds_to_consensus, " rounds <= 6, ", dt, " s runtime");
  } catch (const std::exception& e) {
    ok = false;
    detail = concat("autonomous fig3 run threw: ", e.what());
  }
  report(2, ok, detail);
}

// ---- criterion 3: complete graphs finish within K rounds -------------------

void criterion_3() {
  int worst = 0;
  bool ok = true;
  for (int k = 2; k <= 8 && ok; ++k) {
    for (int seed = 0; seed < 50 && ok; ++seed) {
      UavTopology t = UavTopology::fully_connected(k, 10e6);
      Rng rng(1000 * k + seed);
      for (auto& [key, r] : t.rate_bps) {
        (void)key;
        r = rng.uniform(5e6, 20e6);
      }
      auto trace = run_dissemination(SideInformation::initial(k), t, 9098);
      worst = std::max(worst, trace.rounds_to_consensus - k);
      ok &= trace.rounds_to_consensus <= k;
    }
  }
  report(3, ok, concat("complete graphs K=2..8, 50 seeds each: rounds <= K (worst slack ",
                       -worst, ")"));
}

// ---- criterion 4: liveness and safety on random connected graphs ----------

void criterion_4() {
  bool ok = true;
  for (int seed = 0; seed < 100 && ok; ++seed) {
    Rng rng(seed);
    int k = static_cast<int>(rng.uniform_int(2, 8));
    UavTopology t = random_connected(k, rng);
    try {
      auto trace = run_dissemination(SideInformation::initial(k), t, 9098);
      for (const auto& r : trace.rounds) ok &= round_protocol_ok(r);
      // replay the rounds (apply_round rejects any NIM or undecodable packet)
      SideInformation side = trace.initial;
      for (const auto& r : trace.rounds) apply_round(side, r.packets);
      ok &= side.complete(trace.complete_uav);
      std::set<int> reached{trace.complete_uav};
      for (const auto& hop : trace.broadcast_hops) {
        ok &= reached.count(hop.tx) == 1;
        for (int target : hop.targets) reached.insert(target);
      }
      ok &= reached.size() == static_cast<std::size_t>(k);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "  seed %d: %s\n", seed, e.what());
      ok = false;
    }
  }
  report(4, ok,
         "random connected graphs (K <= 8, 100 seeds): consensus + flood reach everyone, "
         "every packet decodable, rate/receiver/half-duplex rules hold every round");
}

// ---- criterion 5: solver oracle parity -------------------------------------

void criterion_5() {
  struct Tag {
    int v;
  };
  bool ok = true;
  Rng rng(2024);
  for (int trial = 0; trial < 200 && ok; ++trial) {
    int n = static_cast<int>(rng.uniform_int(1, 12));
    ConflictGraph<Tag> g;
    for (int i = 0; i < n; ++i) g.add_vertex(Tag{i}, rng.uniform(0.1, 10.0));
    double p = rng.uniform(0.1, 0.8);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (rng.bernoulli(p)) g.add_edge(a, b);
    auto mx = greedy_mwis(g);
    ok &= is_independent(g, mx.ids) && is_maximal(g, mx.ids);
    auto mn = greedy_min_wis(g, n);
    ok &= is_independent(g, mn.ids) && is_maximal(g, mn.ids);
  }
  // exact parity on the structured families
  for (int trial = 0; trial < 60 && ok; ++trial) {
    int n = static_cast<int>(rng.uniform_int(2, 12));
    std::vector<double> w;
    for (int i = 0; i < n; ++i) w.push_back(rng.uniform(0.5, 9.5));

    ConflictGraph<Tag> star;
    star.add_vertex(Tag{0}, 200.0);  // dominant center
    for (int i = 1; i < n; ++i) star.add_vertex(Tag{i}, w[i]);
    for (int i = 1; i < n; ++i) star.add_edge(0, i);
    ok &= greedy_mwis(star).total_weight ==
          brute_force_best(star, Objective::max_weight).total_weight;

    ConflictGraph<Tag> clique, edgeless;
    for (int i = 0; i < n; ++i) {
      clique.add_vertex(Tag{i}, w[i]);
      edgeless.add_vertex(Tag{i}, w[i]);
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) clique.add_edge(a, b);
    ok &= greedy_mwis(clique).total_weight ==
          brute_force_best(clique, Objective::max_weight).total_weight;
    ok &= greedy_mwis(edgeless).total_weight ==
          brute_force_best(edgeless, Objective::max_weight).total_weight;
  }
  report(5, ok,
         "greedy solvers: feasible + maximal on 200 random graphs; exact optimum on "
         "star/clique/edgeless families");
}

// ---- criterion 6: C1..C8 constraint suite ----------------------------------

void criterion_6() {
  bool ok = true;
  int with_relays = 0;
  for (std::uint64_t seed = 0; seed < 100 && ok; ++seed) {
    GenerationConfig gen;
    gen.num_uds = 16;
    gen.num_uavs = 3;
    gen.rrbs_per_uav = 6;
    gen.p_los = 0.5;
    gen.area_radius_m = 250.0;
    gen.ud_power_w_min = 1e-5;
    gen.ud_power_w_max = 3.0;
    Scenario s = generate(gen, seed);
    auto rates = build_rate_table(s, PairRateMode::sinr);
    Schedule sched = schedule_p1p2(s, rates);
    auto violations = validate(sched, s);
    if (!violations.empty()) {
      std::fprintf(stderr, "  seed %llu: %s %s\n", static_cast<unsigned long long>(seed),
                   violations[0].code.c_str(), violations[0].message.c_str());
      ok = false;
    }
    with_relays += sched.relays.empty() ? 0 : 1;
  }
  report(6, ok, concat("P1+P2 pipeline passes the C1..C8 validator on 100 seeded scenarios (",
                       with_relays, " scenarios exercised D2D relays)"));
}

// ---- criterion 7: aggregation algebra ---------------------------------------

void criterion_7() {
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    int clusters = static_cast<int>(rng.uniform_int(1, 5));
    std::vector<ModelVector> all_uds;
    std::vector<ModelVector> cluster_models;
    for (int c = 0; c < clusters; ++c) {
      int uds = static_cast<int>(rng.uniform_int(1, 5));
      std::vector<ModelVector> members;
      for (int u = 0; u < uds; ++u) {
        ModelVector m;
        m.sample_count = rng.uniform_int(1, 1000);
        for (int j = 0; j < 16; ++j) m.params.push_back(rng.uniform(-10, 10));
        members.push_back(m);
        all_uds.push_back(m);
      }
      cluster_models.push_back(cluster_aggregate(members));
    }
    auto nested = global_aggregate(cluster_models);
    auto direct = cluster_aggregate(all_uds);
    for (int j = 0; j < 16; ++j)
      worst = std::max(worst, std::abs(nested.params[j] - direct.params[j]));
  }
  report(7, worst <= 1e-12,
         concat("global(cluster(.)) equals the direct data-weighted mean; max abs err ", worst,
                " <= 1e-12 over 50 random model sets"));
}

// ---- criterion 8: gradient check --------------------------------------------

void criterion_8() {
  SyntheticConfig data_cfg;
  data_cfg.num_classes = 5;
  data_cfg.feature_dim = 8;
  data_cfg.train_samples = 200;
  data_cfg.test_samples = 50;
  auto [train, test] = make_synthetic(data_cfg, 88);
  (void)test;
  std::vector<int> idx(train.size());
  for (int i = 0; i < train.size(); ++i) idx[i] = i;

  double worst = 0.0;
  for (ModelKind kind : {ModelKind::logistic, ModelKind::mlp}) {
    ModelSpec spec{kind, 8, 5, 6};
    Rng rng(kind == ModelKind::logistic ? 81 : 82);
    std::vector<double> w(spec.param_count());
    for (double& v : w) v = 0.3 * rng.normal();
    std::vector<double> g;
    model_grad(spec, w, train, idx, g);
    for (int probe = 0; probe < 10; ++probe) {
      int j = static_cast<int>(rng.uniform_int(0, spec.param_count() - 1));
      double h = 1e-6 * std::max(1.0, std::abs(w[j]));
      std::vector<double> wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      double numeric =
          (model_loss(spec, wp, train, idx) - model_loss(spec, wm, train, idx)) / (2 * h);
      double denom = std::max({std::abs(numeric), std::abs(g[j]), 1e-8});
      worst = std::max(worst, std::abs(numeric - g[j]) / denom);
    }
  }
  report(8, worst <= 1e-5,
         concat("analytic vs central-difference gradients, both model classes: max rel err ",
                worst, " <= 1e-5"));
}

// ---- shared training setup for criteria 9-10 --------------------------------

struct TrainWorld {
  Scenario scenario;
  Schedule schedule;
  ExperimentConfig cfg;
  FlContext ctx;
};

std::unique_ptr<TrainWorld> make_train_world(std::uint64_t seed, int labels_per_cluster = 6) {
  auto w = std::make_unique<TrainWorld>();
  GenerationConfig gen;
  gen.num_uds = 20;
  gen.num_uavs = 5;
  gen.rrbs_per_uav = 7;
  gen.p_los = 0.9;
  w->scenario = generate(gen, seed);
  auto rates = build_rate_table(w->scenario, PairRateMode::sinr);
  w->schedule = schedule_p1p2(w->scenario, rates);
  w->cfg.labels_per_ud = 2;
  w->cfg.labels_per_cluster = labels_per_cluster;
  w->cfg.data.num_classes = 10;
  w->cfg.data.feature_dim = 20;
  w->cfg.data.train_samples = 13000;
  w->cfg.data.test_samples = 1000;
  auto [train, test] = make_synthetic(w->cfg.data, seed);
  w->ctx = make_context(w->scenario, w->schedule, w->cfg, seed, std::move(train), std::move(test));
  return w;
}

void criterion_9() {
  double t0 = now_s();
  auto w = make_train_world(1);
  TrainConfig tc;
  tc.global_iters = 300;
  tc.local_iters = 1;
  tc.learning_rate = 0.5;
  tc.model = ModelSpec{ModelKind::logistic, 20, 10, 0};
  tc.seed = 1;

  auto fed = run_fl(FlTopology::fedmod, w->ctx, tc);
  auto star = run_fl(FlTopology::star, w->ctx, tc);
  auto hfl = run_fl(FlTopology::hfl, w->ctx, tc);
  double dt = now_s() - t0;

  double linf = 0.0;
  for (std::size_t j = 0; j < fed.final_global.params.size(); ++j) {
    linf = std::max(linf, std::abs(fed.final_global.params[j] - star.final_global.params[j]));
    linf = std::max(linf, std::abs(fed.final_global.params[j] - hfl.final_global.params[j]));
  }
  double final_acc = fed.records.back().accuracy;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < fed.records.size(); ++i)
    worst_gap = std::max(worst_gap,
                         std::abs(fed.records[i].accuracy - star.records[i].accuracy));

  bool ok = linf <= 1e-9 && final_acc >= 0.85 && worst_gap <= 0.02 && dt < 180.0;
  report(9, ok,
         concat("learning equivalence: L_inf(fedmod,star,hfl)=", linf, " <= 1e-9; accuracy ",
                final_acc, " >= 0.85 in <= 300 iters; |fedmod-star| accuracy gap ", worst_gap,
                " <= 0.02 everywhere; ", dt, " s runtime"));
}

void criterion_10() {
  double acc[3] = {0, 0, 0};
  const int periods[3] = {1, 2, 3};
  for (int pi = 0; pi < 3; ++pi) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto w = make_train_world(seed, 4);
      TrainConfig tc;
      tc.global_iters = 47;
      tc.local_iters = 6;
      tc.learning_rate = 0.4;
      tc.dissemination_period = periods[pi];
      tc.model = ModelSpec{ModelKind::logistic, 20, 10, 0};
      tc.seed = seed;
      auto hist = run_fl(FlTopology::fedmod, w->ctx, tc);
      acc[pi] += hist.records.back().accuracy;
    }
    acc[pi] /= 5.0;
  }
  bool ok = acc[0] >= acc[1] - 0.01 && acc[1] >= acc[2] - 0.01;
  report(10, ok,
         concat("partial dissemination ordering (mean over 5 seeds): full=", acc[0],
                " >= period-2=", acc[1], " >= period-3=", acc[2], " with slack 0.01"));
}

// ---- criterion 11: energy ordering -----------------------------------------

void criterion_11() {
  int wins = 0;
  double mean_p1p2 = 0.0, mean_random = 0.0;
  const int trials = 50;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    GenerationConfig gen;
    gen.num_uds = 16;
    gen.num_uavs = 4;
    gen.rrbs_per_uav = 4;
    gen.p_los = 0.8;
    gen.ud_power_w_min = 1e-5;
    gen.ud_power_w_max = 3.0;
    Scenario s = generate(gen, seed);
    auto rates = build_rate_table(s, PairRateMode::sinr);

    Schedule planned = schedule_p1p2(s, rates);
    Rng rng = Rng(seed).fork(0xabc);
    Schedule random = random_schedule(s, rates, rng);

    double e_planned = iteration_costs(planned, nullptr, 1, 1, s).total_energy_j;
    double e_random = iteration_costs(random, nullptr, 1, 1, s).total_energy_j;
    mean_p1p2 += e_planned;
    mean_random += e_random;
    if (e_planned <= e_random) ++wins;
  }
  mean_p1p2 /= trials;
  mean_random /= trials;
  bool ok = wins >= 45 && mean_p1p2 < mean_random;
  report(11, ok,
         concat("energy ordering: planned <= random on ", wins, "/50 scenarios (need >= 45); "
                "mean ", mean_p1p2, " J < ", mean_random, " J"));
}

// ---- criterion 12: closed-form spot checks ----------------------------------

void criterion_12() {
  double pl = path_loss_db(100.0, 1e9);
  UavParams u;
  u.mass_kg = 0.5;
  u.gravity = 9.81;
  u.propeller_radius_m = 0.25;
  u.num_propellers = 4;
  u.air_density = 1.225;
  double hover = hover_power_w(u);
  NodeParams n;
  n.cycles_per_sample = 500;
  n.num_samples = 200;
  n.capacitance_coeff = 1e-28;
  n.cpu_freq_hz = 1e9;
  double energy = compute_energy_j(n, 1);

  bool ok = std::abs(pl - 72.45) <= 0.01 && std::abs(hover - 7.83) <= 0.01 &&
            std::abs(energy - 1e-5) <= 1e-12;
  report(12, ok,
         concat("spot checks: path loss ", pl, " dB (72.45 +- 0.01), hover ", hover,
                " W (7.83 +- 0.01), compute energy ", energy, " J (1e-5)"));
}

}  // namespace

int main() {
  criterion_1_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  if (g_failures == 0)
    std::printf("acceptance: all 12 criteria PASS\n");
  else
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
