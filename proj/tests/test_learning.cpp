#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <memory>

#include "fedmod/harness.hpp"
#include "fedmod/learning.hpp"

using namespace fedmod;
using Catch::Approx;

namespace {

SyntheticConfig tiny_data(int classes = 4, int dim = 6) {
  SyntheticConfig cfg;
  cfg.num_classes = classes;
  cfg.feature_dim = dim;
  cfg.train_samples = 240;
  cfg.test_samples = 120;
  return cfg;
}

std::vector<int> all_indices(const Dataset& d) {
  std::vector<int> idx(d.size());
  for (int i = 0; i < d.size(); ++i) idx[i] = i;
  return idx;
}

double finite_diff_check(const ModelSpec& spec, const Dataset& data, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(spec.param_count());
  for (double& v : w) v = 0.3 * rng.normal();
  auto idx = all_indices(data);
  std::vector<double> g;
  model_grad(spec, w, data, idx, g);

  double worst = 0.0;
  for (int probe = 0; probe < 10; ++probe) {
    int j = static_cast<int>(rng.uniform_int(0, spec.param_count() - 1));
    double h = 1e-6 * std::max(1.0, std::abs(w[j]));
    std::vector<double> wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    double numeric = (model_loss(spec, wp, data, idx) - model_loss(spec, wm, data, idx)) / (2 * h);
    double denom = std::max({std::abs(numeric), std::abs(g[j]), 1e-8});
    worst = std::max(worst, std::abs(numeric - g[j]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("uniform predictor loss is ln C") {
  auto [train, test] = make_synthetic(tiny_data(10, 5), 3);
  (void)test;
  ModelSpec spec{ModelKind::logistic, 5, 10, 0};
  std::vector<double> zeros(spec.param_count(), 0.0);
  REQUIRE(model_loss(spec, zeros, train, all_indices(train)) ==
          Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("confident correct predictions drive the loss to zero") {
  Dataset d;
  d.feature_dim = 2;
  d.num_classes = 2;
  d.x = {1, 0, 0, 1};
  d.y = {0, 1};
  ModelSpec spec{ModelKind::logistic, 2, 2, 0};
  std::vector<double> w(spec.param_count(), 0.0);
  w[0] = 50.0;          // class 0 weight on feature 0
  w[1 * 3 + 1] = 50.0;  // class 1 weight on feature 1
  REQUIRE(model_loss(spec, w, d, {0, 1}) < 1e-12);
}

TEST_CASE("duplicating every sample leaves the mean loss unchanged") {
  auto [train, test] = make_synthetic(tiny_data(), 9);
  (void)test;
  ModelSpec spec{ModelKind::logistic, 6, 4, 0};
  std::vector<double> w = init_params(spec, 4);
  auto idx = all_indices(train);
  auto doubled = idx;
  doubled.insert(doubled.end(), idx.begin(), idx.end());
  REQUIRE(model_loss(spec, w, train, doubled) ==
          Approx(model_loss(spec, w, train, idx)).epsilon(1e-12));
}

TEST_CASE("zero learning rate leaves the model untouched") {
  auto [train, test] = make_synthetic(tiny_data(), 5);
  (void)test;
  ModelSpec spec{ModelKind::logistic, 6, 4, 0};
  std::vector<double> w = init_params(spec, 8);
  std::vector<double> before = w;
  local_sgd_step(spec, w, train, all_indices(train), 0.0);
  REQUIRE(w == before);
}

TEST_CASE("analytic gradients match central differences for both model classes") {
  auto [train, test] = make_synthetic(tiny_data(), 17);
  (void)test;
  ModelSpec logistic{ModelKind::logistic, 6, 4, 0};
  REQUIRE(finite_diff_check(logistic, train, 31) <= 1e-5);
  ModelSpec mlp{ModelKind::mlp, 6, 4, 8};
  REQUIRE(finite_diff_check(mlp, train, 32) <= 1e-5);
}

TEST_CASE("full-batch descent on the convex model strictly decreases the loss") {
  auto [train, test] = make_synthetic(tiny_data(), 23);
  (void)test;
  ModelSpec spec{ModelKind::logistic, 6, 4, 0};
  std::vector<double> w = init_params(spec, 2);
  auto idx = all_indices(train);
  double prev = model_loss(spec, w, train, idx);
  for (int i = 0; i < 25; ++i) {
    local_sgd_step(spec, w, train, idx, 0.2);
    double cur = model_loss(spec, w, train, idx);
    REQUIRE(cur < prev);
    prev = cur;
  }
}

TEST_CASE("cluster aggregation is the weighted mean") {
  ModelVector a{{0.0}, OwnerKind::ud, 0, 1};
  ModelVector b{{4.0}, OwnerKind::ud, 1, 3};
  auto agg = cluster_aggregate({a, b});
  REQUIRE(agg.params[0] == Approx(3.0));
  REQUIRE(agg.sample_count == 4);

  ModelVector c{{2.0, -2.0}, OwnerKind::ud, 0, 5};
  ModelVector d{{4.0, 6.0}, OwnerKind::ud, 1, 5};
  auto mean = cluster_aggregate({c, d});
  REQUIRE(mean.params[0] == Approx(3.0));
  REQUIRE(mean.params[1] == Approx(2.0));

  auto single = cluster_aggregate({c});
  REQUIRE(single.params == c.params);

  ModelVector bad{{1.0, 2.0, 3.0}, OwnerKind::ud, 2, 1};
  REQUIRE_THROWS_AS(cluster_aggregate({a, bad}), domain_error);
}

TEST_CASE("global aggregation composes with cluster aggregation") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    int dim = 8;
    int clusters = static_cast<int>(rng.uniform_int(1, 4));
    std::vector<ModelVector> all_uds;
    std::vector<ModelVector> cluster_models;
    for (int c = 0; c < clusters; ++c) {
      int uds = static_cast<int>(rng.uniform_int(1, 4));
      std::vector<ModelVector> members;
      for (int u = 0; u < uds; ++u) {
        ModelVector m;
        m.sample_count = rng.uniform_int(1, 500);
        for (int j = 0; j < dim; ++j) m.params.push_back(rng.uniform(-5, 5));
        members.push_back(m);
        all_uds.push_back(m);
      }
      cluster_models.push_back(cluster_aggregate(members));
    }
    auto nested = global_aggregate(cluster_models);
    auto direct = cluster_aggregate(all_uds);
    for (int j = 0; j < dim; ++j)
      REQUIRE(std::abs(nested.params[j] - direct.params[j]) <= 1e-12);
  }
}

TEST_CASE("equal cluster counts reduce the global step to a plain average") {
  ModelVector a{{1.0}, OwnerKind::uav, 0, 10};
  ModelVector b{{3.0}, OwnerKind::uav, 1, 10};
  REQUIRE(global_aggregate({a, b}).params[0] == Approx(2.0));
  REQUIRE(global_aggregate({a}).params[0] == Approx(1.0));  // single cluster: identity
}

TEST_CASE("strict literal normalization divides the unweighted sum by the sample count") {
  ModelVector a{{1.0}, OwnerKind::uav, 0, 2};
  ModelVector b{{3.0}, OwnerKind::uav, 1, 2};
  REQUIRE(global_aggregate({a, b}, true).params[0] == Approx(1.0));  // (1+3)/4
}

TEST_CASE("aggregation is linear in the models") {
  Rng rng(15);
  std::vector<ModelVector> ms;
  for (int i = 0; i < 3; ++i) {
    ModelVector m;
    m.sample_count = rng.uniform_int(1, 9);
    for (int j = 0; j < 4; ++j) m.params.push_back(rng.uniform(-1, 1));
    ms.push_back(m);
  }
  auto base = cluster_aggregate(ms);
  auto scaled = ms;
  for (auto& m : scaled)
    for (auto& v : m.params) v *= 2.5;
  auto agg_scaled = cluster_aggregate(scaled);
  for (int j = 0; j < 4; ++j) REQUIRE(agg_scaled.params[j] == Approx(2.5 * base.params[j]));
}

namespace {

struct Pipeline {
  Scenario scenario;
  Schedule schedule;
  ExperimentConfig cfg;
  FlContext ctx;
};

// heap-allocated so the context's scenario/schedule pointers stay stable
std::unique_ptr<Pipeline> make_pipeline(std::uint64_t seed,
                                        const std::string& uinv_mode = "delivered") {
  auto holder = std::make_unique<Pipeline>();
  Pipeline& p = *holder;
  GenerationConfig gen;
  gen.num_uds = 8;
  gen.num_uavs = 3;
  gen.rrbs_per_uav = 4;
  gen.p_los = 0.8;
  p.scenario = generate(gen, seed);
  auto rates = build_rate_table(p.scenario, PairRateMode::sinr);
  p.schedule = schedule_p1p2(p.scenario, rates);
  p.cfg.uinv_mode = uinv_mode;
  p.cfg.labels_per_ud = 2;
  p.cfg.labels_per_cluster = 4;
  p.cfg.data = tiny_data(4, 6);
  p.cfg.data.train_samples = 3200;
  auto [train, test] = make_synthetic(p.cfg.data, seed);
  p.ctx = make_context(p.scenario, p.schedule, p.cfg, seed, std::move(train), std::move(test));
  return holder;
}

TrainConfig small_train(std::uint64_t seed) {
  TrainConfig tc;
  tc.global_iters = 30;
  tc.local_iters = 1;
  tc.learning_rate = 0.4;
  tc.model = ModelSpec{ModelKind::logistic, 6, 4, 0};
  tc.seed = seed;
  return tc;
}

}  // namespace

TEST_CASE("full dissemination leaves every UAV with the identical global model") {
  auto p = make_pipeline(3);
  auto hist = run_fedmod(p->ctx, small_train(3));
  REQUIRE(hist.final_uav_models.size() == 3);
  for (const auto& m : hist.final_uav_models) REQUIRE(m.params == hist.final_global.params);
}

TEST_CASE("star, hfl and fedmod-full agree with identical participants") {
  auto p = make_pipeline(11);
  TrainConfig tc = small_train(11);
  auto fed = run_fl(FlTopology::fedmod, p->ctx, tc);
  auto star = run_fl(FlTopology::star, p->ctx, tc);
  auto hfl = run_fl(FlTopology::hfl, p->ctx, tc);
  double worst = 0.0;
  for (std::size_t j = 0; j < fed.final_global.params.size(); ++j) {
    worst = std::max(worst, std::abs(fed.final_global.params[j] - star.final_global.params[j]));
    worst = std::max(worst, std::abs(fed.final_global.params[j] - hfl.final_global.params[j]));
  }
  REQUIRE(worst <= 1e-9);
}

TEST_CASE("training trajectories are deterministic in (seed, config)") {
  auto p1 = make_pipeline(21);
  auto p2 = make_pipeline(21);
  auto h1 = run_fedmod(p1->ctx, small_train(21));
  auto h2 = run_fedmod(p2->ctx, small_train(21));
  REQUIRE(h1.final_global.params == h2.final_global.params);
  for (std::size_t i = 0; i < h1.records.size(); ++i) {
    REQUIRE(h1.records[i].loss == h2.records[i].loss);
    REQUIRE(h1.records[i].accuracy == h2.records[i].accuracy);
  }
}

TEST_CASE("partial dissemination changes the trajectory") {
  auto p = make_pipeline(5);
  TrainConfig full = small_train(5);
  TrainConfig lazy = full;
  lazy.dissemination_period = 3;
  auto h_full = run_fedmod(p->ctx, full);
  auto h_lazy = run_fedmod(p->ctx, lazy);
  bool differs = false;
  for (std::size_t i = 0; i < h_full.records.size(); ++i)
    differs |= h_full.records[i].loss != h_lazy.records[i].loss;
  REQUIRE(differs);
}

TEST_CASE("a star over all UDs sees at least as many samples as the delivered set") {
  auto delivered = make_pipeline(7, "delivered");
  auto everyone = make_pipeline(7, "all");
  REQUIRE(everyone->ctx.uinv.size() >= delivered->ctx.uinv.size());
  long long delivered_n = 0, everyone_n = 0;
  for (int u : delivered->ctx.uinv) delivered_n += delivered->ctx.partition[u].size();
  for (int u : everyone->ctx.uinv) everyone_n += everyone->ctx.partition[u].size();
  REQUIRE(everyone_n >= delivered_n);
}

TEST_CASE("partition respects labels per UD and per cluster") {
  auto [train, test] = make_synthetic(tiny_data(10, 4), 13);
  (void)test;
  std::vector<int> cluster_of_ud(20);
  for (int u = 0; u < 20; ++u) cluster_of_ud[u] = u % 5;
  std::vector<int> samples(20, 20);
  SyntheticConfig big = tiny_data(10, 4);
  big.train_samples = 800;
  auto [train2, test2] = make_synthetic(big, 13);
  (void)test2;
  auto part = partition_noniid(train2, 20, 2, cluster_of_ud, 5, 6, samples, 13);

  std::set<int> used;
  std::vector<std::set<int>> cluster_labels(5);
  for (int u = 0; u < 20; ++u) {
    REQUIRE(part[u].size() == 20);
    std::set<int> labels;
    for (int i : part[u]) {
      REQUIRE(used.insert(i).second);  // disjoint partition
      labels.insert(train2.y[i]);
      cluster_labels[cluster_of_ud[u]].insert(train2.y[i]);
    }
    REQUIRE(labels.size() <= 2);
  }
  for (const auto& cl : cluster_labels) REQUIRE(cl.size() <= 6);

  auto again = partition_noniid(train2, 20, 2, cluster_of_ud, 5, 6, samples, 13);
  REQUIRE(again == part);
}

TEST_CASE("degenerate partition with labels_per_ud = C is allowed") {
  auto [train, test] = make_synthetic(tiny_data(4, 4), 19);
  (void)test;
  std::vector<int> cluster_of_ud = {0, 0};
  std::vector<int> samples = {30, 30};
  auto part = partition_noniid(train, 2, 4, cluster_of_ud, 1, 4, samples, 19);
  REQUIRE(part[0].size() == 30);
}

TEST_CASE("infeasible partitions name the binding constraint") {
  auto [train, test] = make_synthetic(tiny_data(4, 4), 19);
  (void)test;
  std::vector<int> cluster_of_ud = {0};
  std::vector<int> samples = {30};
  REQUIRE_THROWS_AS(partition_noniid(train, 1, 3, cluster_of_ud, 1, 2, samples, 19),
                    config_error);
  // demand exceeding the dataset
  std::vector<int> too_many = {100000};
  try {
    partition_noniid(train, 1, 2, cluster_of_ud, 1, 4, too_many, 19);
    FAIL("expected config error");
  } catch (const config_error& e) {
    REQUIRE(std::string(e.what()).find("label") != std::string::npos);
  }
}

TEST_CASE("idx reader round trips a tiny handcrafted file") {
  auto be32 = [](std::ofstream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<char*>(b), 4);
  };
  {
    std::ofstream img("tiny_images.idx", std::ios::binary);
    be32(img, 2051);
    be32(img, 2);
    be32(img, 2);
    be32(img, 2);
    for (unsigned char v : {0, 51, 102, 153, 204, 255, 0, 255}) img.put(v);
    std::ofstream lab("tiny_labels.idx", std::ios::binary);
    be32(lab, 2049);
    be32(lab, 2);
    lab.put(7);
    lab.put(3);
  }
  Dataset d = load_mnist_idx("tiny_images.idx", "tiny_labels.idx");
  REQUIRE(d.size() == 2);
  REQUIRE(d.feature_dim == 4);
  REQUIRE(d.y == std::vector<int>{7, 3});
  REQUIRE(d.row(0)[1] == Approx(51.0 / 255.0));
  REQUIRE(d.row(1)[3] == Approx(1.0));
  std::remove("tiny_images.idx");

  std::ofstream bad("bad_magic.idx", std::ios::binary);
  be32(bad, 1234);
  bad.close();
  REQUIRE_THROWS_AS(load_mnist_idx("bad_magic.idx", "tiny_labels.idx"), error);
  std::remove("bad_magic.idx");
  std::remove("tiny_labels.idx");
}

TEST_CASE("convergence monitors flag a bad learning-rate / smoothness pair") {
  auto p = make_pipeline(29);
  auto hist = run_fedmod(p->ctx, small_train(29));
  auto good = convergence_monitors(hist, 0.4, 1.0);
  REQUIRE(good.lambda_precondition_ok);
  auto bad = convergence_monitors(hist, 0.4, 10.0);
  REQUIRE_FALSE(bad.lambda_precondition_ok);
  REQUIRE(good.grad_norm_sq.size() == hist.records.size());
  REQUIRE(good.loss_delta.size() == hist.records.size() - 1);
}

TEST_CASE("loss is non-increasing after burn-in on the convex task") {
  auto p = make_pipeline(31);
  TrainConfig tc = small_train(31);
  tc.global_iters = 40;
  tc.learning_rate = 0.2;
  auto hist = run_fedmod(p->ctx, tc);
  for (std::size_t i = 12; i < hist.records.size(); ++i)
    REQUIRE(hist.records[i].loss <= hist.records[i - 1].loss + 1e-9);
  // average squared gradient norm shrinks as training proceeds
  auto rep = convergence_monitors(hist, tc.learning_rate);
  REQUIRE(rep.running_avg_gnsq.back() < rep.running_avg_gnsq[4]);
}
