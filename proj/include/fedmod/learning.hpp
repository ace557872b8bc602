#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fedmod/accounting.hpp"
#include "fedmod/core.hpp"
#include "fedmod/dissemination.hpp"
#include "fedmod/rng.hpp"
#include "fedmod/scenario.hpp"
#include "fedmod/scheduling.hpp"

namespace fedmod {

struct Dataset {
  int feature_dim = 0;
  int num_classes = 0;
  std::vector<double> x;  // row-major, size() * feature_dim
  std::vector<int> y;

  int size() const { return static_cast<int>(y.size()); }
  const double* row(int i) const { return x.data() + static_cast<std::size_t>(i) * feature_dim; }
};

struct SyntheticConfig {
  int num_classes = 10;
  int feature_dim = 20;
  int train_samples = 4000;
  int test_samples = 1000;
  double mean_radius = 3.0;
  double noise_sigma = 1.0;
};

namespace detail {

inline std::vector<std::vector<double>> class_means(const SyntheticConfig& cfg, Rng& rng) {
  std::vector<std::vector<double>> means(cfg.num_classes, std::vector<double>(cfg.feature_dim));
  for (auto& mu : means) {
    double norm = 0.0;
    for (double& v : mu) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : mu) v = cfg.mean_radius * v / norm;
  }
  return means;
}

inline Dataset sample_mixture(const SyntheticConfig& cfg,
                              const std::vector<std::vector<double>>& means, int n, Rng& rng) {
  Dataset d;
  d.feature_dim = cfg.feature_dim;
  d.num_classes = cfg.num_classes;
  d.x.resize(static_cast<std::size_t>(n) * cfg.feature_dim);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    int c = i % cfg.num_classes;  // balanced
    d.y[i] = c;
    for (int j = 0; j < cfg.feature_dim; ++j)
      d.x[static_cast<std::size_t>(i) * cfg.feature_dim + j] =
          means[c][j] + cfg.noise_sigma * rng.normal();
  }
  return d;
}

}  // namespace detail

// Deterministic Gaussian-mixture classification task.
inline std::pair<Dataset, Dataset> make_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  Rng root(seed);
  Rng mean_rng = root.fork(11);
  Rng train_rng = root.fork(12);
  Rng test_rng = root.fork(13);
  auto means = detail::class_means(cfg, mean_rng);
  return {detail::sample_mixture(cfg, means, cfg.train_samples, train_rng),
          detail::sample_mixture(cfg, means, cfg.test_samples, test_rng)};
}

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) fail<parse_error>("idx file '", path, "': truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace detail

// Standard IDX image/label pair (big-endian dims, magic 2051/2049).
// Features are scaled to [0, 1].
inline Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) fail("cannot open '", images_path, "'");
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) fail("cannot open '", labels_path, "'");

  if (detail::read_be32(img, images_path) != 2051)
    fail<parse_error>("idx file '", images_path, "': bad magic, expected 2051");
  std::uint32_t n = detail::read_be32(img, images_path);
  std::uint32_t rows = detail::read_be32(img, images_path);
  std::uint32_t cols = detail::read_be32(img, images_path);
  if (detail::read_be32(lab, labels_path) != 2049)
    fail<parse_error>("idx file '", labels_path, "': bad magic, expected 2049");
  std::uint32_t nl = detail::read_be32(lab, labels_path);
  if (n != nl) fail<parse_error>("idx pair: ", n, " images but ", nl, " labels");

  Dataset d;
  d.feature_dim = static_cast<int>(rows * cols);
  d.num_classes = 10;
  d.x.resize(static_cast<std::size_t>(n) * d.feature_dim);
  d.y.resize(n);
  std::vector<unsigned char> buf(d.feature_dim);
  for (std::uint32_t i = 0; i < n; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), d.feature_dim);
    if (!img) fail<parse_error>("idx file '", images_path, "': truncated at image ", i);
    for (int j = 0; j < d.feature_dim; ++j)
      d.x[static_cast<std::size_t>(i) * d.feature_dim + j] = buf[j] / 255.0;
    int label = lab.get();
    if (label < 0) fail<parse_error>("idx file '", labels_path, "': truncated at label ", i);
    d.y[i] = label;
  }
  return d;
}

// Non-IID split: each cluster is allotted a label pool, each UD draws its
// labels from its cluster's pool, and sample indices are consumed disjointly.
inline std::vector<std::vector<int>> partition_noniid(const Dataset& data, int num_uds,
                                                      int labels_per_ud,
                                                      const std::vector<int>& cluster_of_ud,
                                                      int num_clusters, int labels_per_cluster,
                                                      const std::vector<int>& samples_per_ud,
                                                      std::uint64_t seed) {
  const int C = data.num_classes;
  if (labels_per_ud < 1 || labels_per_ud > C)
    fail<config_error>("partition: labels_per_ud must be in [1, ", C, "]");
  if (labels_per_ud > labels_per_cluster)
    fail<config_error>("partition infeasible: labels_per_ud (", labels_per_ud,
                       ") exceeds labels_per_cluster (", labels_per_cluster, ")");
  if (static_cast<int>(cluster_of_ud.size()) != num_uds ||
      static_cast<int>(samples_per_ud.size()) != num_uds)
    fail<config_error>("partition: need one cluster id and sample count per UD");

  Rng root(seed);
  Rng pool_rng = root.fork(21);
  Rng index_rng = root.fork(23);

  int pool_size = std::min(labels_per_cluster, C);
  std::vector<std::vector<int>> cluster_pool(num_clusters);
  for (int c = 0; c < num_clusters; ++c) {
    std::vector<int> labels(C);
    std::iota(labels.begin(), labels.end(), 0);
    pool_rng.shuffle(labels);
    cluster_pool[c].assign(labels.begin(), labels.begin() + pool_size);
    std::sort(cluster_pool[c].begin(), cluster_pool[c].end());
  }

  std::vector<std::vector<int>> by_label(C);
  for (int i = 0; i < data.size(); ++i) by_label[data.y[i]].push_back(i);
  for (auto& g : by_label) index_rng.shuffle(g);
  std::vector<std::size_t> cursor(C, 0);

  // Each UD takes the least-demanded labels of its cluster pool, which keeps
  // the per-label draw within the dataset's per-label supply.
  std::vector<long long> demand(C, 0);
  std::vector<std::vector<int>> part(num_uds);
  for (int u = 0; u < num_uds; ++u) {
    int c = cluster_of_ud[u];
    if (c < 0 || c >= num_clusters) fail<config_error>("partition: bad cluster for ud ", u);
    std::vector<int> pool = cluster_pool[c];
    std::sort(pool.begin(), pool.end(),
              [&](int a, int b) { return demand[a] != demand[b] ? demand[a] < demand[b] : a < b; });
    std::vector<int> labels(pool.begin(), pool.begin() + labels_per_ud);
    std::sort(labels.begin(), labels.end());
    for (int l : labels) demand[l] += samples_per_ud[u] / labels_per_ud + 1;
    for (int i = 0; i < samples_per_ud[u]; ++i) {
      int tries = 0;
      int label = labels[i % labels_per_ud];
      while (cursor[label] >= by_label[label].size() && tries < labels_per_ud) {
        label = labels[(i + ++tries) % labels_per_ud];
      }
      if (cursor[label] >= by_label[label].size())
        fail<config_error>("partition infeasible: dataset exhausted for labels of ud ", u,
                           " (binding constraint: samples of label ", labels[i % labels_per_ud],
                           ")");
      part[u].push_back(by_label[label][cursor[label]++]);
    }
  }
  return part;
}

// ---------------------------------------------------------------------------
// Models: multinomial logistic regression and a one-hidden-layer perceptron
// (tanh), both with analytic gradients.

enum class ModelKind { logistic, mlp };

// Defaults put the logistic parameter count at 10 * 909 = 9090, in line with
// the nominal model size carried by the scenarios.
struct ModelSpec {
  ModelKind kind = ModelKind::logistic;
  int feature_dim = 908;
  int num_classes = 10;
  int hidden = 16;

  int param_count() const {
    if (kind == ModelKind::logistic) return num_classes * (feature_dim + 1);
    return hidden * (feature_dim + 1) + num_classes * (hidden + 1);
  }
};

enum class OwnerKind { ud, uav, global };

struct ModelVector {
  std::vector<double> params;
  OwnerKind owner_kind = OwnerKind::global;
  int owner_id = -1;
  long long sample_count = 0;
};

namespace detail {

inline void softmax_inplace(std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// logits for one sample
inline void forward(const ModelSpec& spec, const std::vector<double>& w, const double* x,
                    std::vector<double>& logits, std::vector<double>* hidden_act) {
  const int d = spec.feature_dim, C = spec.num_classes;
  logits.assign(C, 0.0);
  if (spec.kind == ModelKind::logistic) {
    for (int c = 0; c < C; ++c) {
      const double* row = w.data() + static_cast<std::size_t>(c) * (d + 1);
      double z = row[d];
      for (int j = 0; j < d; ++j) z += row[j] * x[j];
      logits[c] = z;
    }
    return;
  }
  const int h = spec.hidden;
  std::vector<double>& a = *hidden_act;
  a.assign(h, 0.0);
  for (int i = 0; i < h; ++i) {
    const double* row = w.data() + static_cast<std::size_t>(i) * (d + 1);
    double z = row[d];
    for (int j = 0; j < d; ++j) z += row[j] * x[j];
    a[i] = std::tanh(z);
  }
  const double* w2 = w.data() + static_cast<std::size_t>(h) * (d + 1);
  for (int c = 0; c < C; ++c) {
    const double* row = w2 + static_cast<std::size_t>(c) * (h + 1);
    double z = row[h];
    for (int i = 0; i < h; ++i) z += row[i] * a[i];
    logits[c] = z;
  }
}

}  // namespace detail

namespace detail {

inline void check_shapes(const ModelSpec& spec, const std::vector<double>& w,
                         const Dataset& data) {
  if (spec.feature_dim != data.feature_dim || spec.num_classes != data.num_classes)
    fail<domain_error>("model/data shape mismatch: model expects ", spec.feature_dim, "x",
                       spec.num_classes, ", data is ", data.feature_dim, "x", data.num_classes);
  if (static_cast<int>(w.size()) != spec.param_count())
    fail<domain_error>("parameter vector has ", w.size(), " entries, model needs ",
                       spec.param_count());
}

}  // namespace detail

// Mean cross-entropy over the given sample indices.
inline double model_loss(const ModelSpec& spec, const std::vector<double>& w, const Dataset& data,
                         const std::vector<int>& indices) {
  if (indices.empty()) fail<domain_error>("model_loss: empty sample set");
  detail::check_shapes(spec, w, data);
  std::vector<double> logits, hidden;
  double total = 0.0;
  for (int i : indices) {
    detail::forward(spec, w, data.row(i), logits, &hidden);
    detail::softmax_inplace(logits);
    total += -std::log(std::max(logits[data.y[i]], 1e-300));
  }
  return total / indices.size();
}

// Analytic gradient of the mean cross-entropy.
inline void model_grad(const ModelSpec& spec, const std::vector<double>& w, const Dataset& data,
                       const std::vector<int>& indices, std::vector<double>& grad) {
  detail::check_shapes(spec, w, data);
  const int d = spec.feature_dim, C = spec.num_classes;
  grad.assign(w.size(), 0.0);
  std::vector<double> logits, hidden;
  const double inv_n = 1.0 / indices.size();
  for (int i : indices) {
    const double* x = data.row(i);
    detail::forward(spec, w, x, logits, &hidden);
    detail::softmax_inplace(logits);
    if (spec.kind == ModelKind::logistic) {
      for (int c = 0; c < C; ++c) {
        double dz = (logits[c] - (c == data.y[i] ? 1.0 : 0.0)) * inv_n;
        double* g = grad.data() + static_cast<std::size_t>(c) * (d + 1);
        for (int j = 0; j < d; ++j) g[j] += dz * x[j];
        g[d] += dz;
      }
      continue;
    }
    const int h = spec.hidden;
    const double* w2 = w.data() + static_cast<std::size_t>(h) * (d + 1);
    double* g2 = grad.data() + static_cast<std::size_t>(h) * (d + 1);
    std::vector<double> da(h, 0.0);
    for (int c = 0; c < C; ++c) {
      double dz = (logits[c] - (c == data.y[i] ? 1.0 : 0.0)) * inv_n;
      const double* row = w2 + static_cast<std::size_t>(c) * (h + 1);
      double* grow = g2 + static_cast<std::size_t>(c) * (h + 1);
      for (int k = 0; k < h; ++k) {
        grow[k] += dz * hidden[k];
        da[k] += dz * row[k];
      }
      grow[h] += dz;
    }
    for (int k = 0; k < h; ++k) {
      double dpre = da[k] * (1.0 - hidden[k] * hidden[k]);
      double* grow = grad.data() + static_cast<std::size_t>(k) * (d + 1);
      for (int j = 0; j < d; ++j) grow[j] += dpre * x[j];
      grow[d] += dpre;
    }
  }
}

// One SGD step on the minibatch gradient: w <- w - lambda * g.
inline void local_sgd_step(const ModelSpec& spec, std::vector<double>& w, const Dataset& data,
                           const std::vector<int>& batch, double lambda) {
  if (lambda < 0) fail<domain_error>("local_sgd_step: negative learning rate");
  std::vector<double> g;
  model_grad(spec, w, data, batch, g);
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] -= lambda * g[j];
    if (!std::isfinite(w[j]))
      fail<domain_error>("local_sgd_step: non-finite parameter after update (j=", j, ")");
  }
}

inline int model_predict(const ModelSpec& spec, const std::vector<double>& w, const double* x) {
  std::vector<double> logits, hidden;
  detail::forward(spec, w, x, logits, &hidden);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

inline double model_accuracy(const ModelSpec& spec, const std::vector<double>& w,
                             const Dataset& data) {
  if (data.size() == 0) return 0.0;
  detail::check_shapes(spec, w, data);
  int hits = 0;
  for (int i = 0; i < data.size(); ++i)
    if (model_predict(spec, w, data.row(i)) == data.y[i]) ++hits;
  return static_cast<double>(hits) / data.size();
}

inline std::vector<double> init_params(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(spec.param_count());
  for (double& v : w) v = 0.01 * rng.normal();
  return w;
}

// ---------------------------------------------------------------------------
// Aggregation

// Sample-count-weighted mean of models with identical dimension.
inline ModelVector cluster_aggregate(const std::vector<ModelVector>& models) {
  if (models.empty()) fail<domain_error>("cluster_aggregate: empty input");
  const std::size_t dim = models[0].params.size();
  long long total = 0;
  for (const auto& m : models) {
    if (m.params.size() != dim)
      fail<domain_error>("cluster_aggregate: dimension mismatch (", m.params.size(), " vs ", dim,
                         ")");
    total += m.sample_count;
  }
  ModelVector out;
  out.owner_kind = OwnerKind::uav;
  out.params.assign(dim, 0.0);
  out.sample_count = total;
  for (const auto& m : models) {
    double w = static_cast<double>(m.sample_count) / static_cast<double>(total);
    for (std::size_t j = 0; j < dim; ++j) out.params[j] += w * m.params[j];
  }
  return out;
}

// Global combination of cluster models. The default keeps the weighting
// consistent with the intra-cluster weights (data-weighted mean); the strict
// literal form divides an unweighted sum by the total sample count and is
// kept only as an A/B diagnostic.
inline ModelVector global_aggregate(const std::vector<ModelVector>& cluster_models,
                                    bool strict_literal = false) {
  if (cluster_models.empty()) fail<domain_error>("global_aggregate: empty input");
  if (!strict_literal) {
    ModelVector out = cluster_aggregate(cluster_models);
    out.owner_kind = OwnerKind::global;
    return out;
  }
  const std::size_t dim = cluster_models[0].params.size();
  long long total = 0;
  for (const auto& m : cluster_models) {
    if (m.params.size() != dim) fail<domain_error>("global_aggregate: dimension mismatch");
    total += m.sample_count;
  }
  ModelVector out;
  out.owner_kind = OwnerKind::global;
  out.params.assign(dim, 0.0);
  out.sample_count = total;
  for (const auto& m : cluster_models)
    for (std::size_t j = 0; j < dim; ++j) out.params[j] += m.params[j];
  for (std::size_t j = 0; j < dim; ++j) out.params[j] /= static_cast<double>(total);
  return out;
}

// ---------------------------------------------------------------------------
// Federated training drivers

enum class FlTopology { fedmod, star, hfl };

struct TrainConfig {
  int global_iters = 100;
  int local_iters = 1;
  double learning_rate = 0.5;
  int batch_size = 0;  // 0 = full local batch
  int dissemination_period = 1;
  bool strict_eq9 = false;
  ModelSpec model;
  std::uint64_t seed = 1;
};

struct IterationRecord {
  int iter = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double t_diss_s = 0.0;
  double tau_s = 0.0;
  double energy_total_j = 0.0;
  double energy_ud_j = 0.0;
  double energy_uav_j = 0.0;
  int diss_rounds = 0;
  double grad_norm_sq = 0.0;
};

struct History {
  std::vector<IterationRecord> records;
  ModelVector final_global;
  std::vector<ModelVector> final_uav_models;  // per-UAV copy after the last iteration
};

// Everything a training run needs, prepared by the harness.
struct FlContext {
  const Scenario* scenario = nullptr;
  const Schedule* schedule = nullptr;
  Dataset train;
  Dataset test;
  std::vector<std::vector<int>> partition;  // per UD
  std::vector<int> uinv;                    // participating UDs, sorted
  std::vector<int> uav_of_ud;               // cluster of each UD (-1 if none)
  UavTopology topo;
  long long model_size_bits = 9098;
};

namespace detail {

inline std::vector<int> batch_for(const FlContext& ctx, const TrainConfig& cfg, int ud, int iter,
                                  int local_step) {
  const auto& all = ctx.partition[ud];
  if (cfg.batch_size <= 0 || cfg.batch_size >= static_cast<int>(all.size())) return all;
  Rng rng = Rng(cfg.seed).fork(0x9000 + ud).fork(iter).fork(local_step);
  std::vector<int> batch;
  for (int i = 0; i < cfg.batch_size; ++i)
    batch.push_back(all[rng.uniform_int(0, static_cast<std::int64_t>(all.size()) - 1)]);
  return batch;
}

inline std::vector<int> concat_indices(const FlContext& ctx) {
  std::vector<int> all;
  for (int u : ctx.uinv) all.insert(all.end(), ctx.partition[u].begin(), ctx.partition[u].end());
  return all;
}

}  // namespace detail

// One driver for all three topologies: the learning algebra is identical,
// only the aggregation/communication structure differs.
inline History run_fl(FlTopology topo, const FlContext& ctx, const TrainConfig& cfg) {
  if (ctx.uinv.empty()) fail<config_error>("run_fl: no participating UDs");
  const int K = ctx.topo.num_uavs;
  History hist;

  std::vector<double> w0 = init_params(cfg.model, cfg.seed);
  std::map<int, std::vector<double>> broadcast;  // per participating UD
  for (int u : ctx.uinv) broadcast[u] = w0;

  std::vector<int> eval_indices = detail::concat_indices(ctx);
  std::vector<ModelVector> uav_models(K);

  for (int t = 1; t <= cfg.global_iters; ++t) {
    // Local updates.
    std::map<int, ModelVector> local;
    for (int u : ctx.uinv) {
      std::vector<double> w = broadcast[u];
      for (int l = 1; l <= cfg.local_iters; ++l)
        local_sgd_step(cfg.model, w, ctx.train, detail::batch_for(ctx, cfg, u, t, l),
                       cfg.learning_rate);
      ModelVector mv;
      mv.params = std::move(w);
      mv.owner_kind = OwnerKind::ud;
      mv.owner_id = u;
      mv.sample_count = static_cast<long long>(ctx.partition[u].size());
      local.emplace(u, std::move(mv));
    }

    IterationRecord rec;
    rec.iter = t;
    std::vector<double> eval_model;
    bool metrics_done = false;

    if (topo == FlTopology::star) {
      std::vector<ModelVector> all;
      for (int u : ctx.uinv) all.push_back(local.at(u));
      ModelVector global = cluster_aggregate(all);  // direct data-weighted mean
      global.owner_kind = OwnerKind::global;
      eval_model = global.params;
      for (int u : ctx.uinv) broadcast[u] = global.params;
      hist.final_global = global;
      for (int k = 0; k < K; ++k) uav_models[k] = global;
    } else {
      // Per-UAV cluster aggregation.
      std::vector<std::vector<ModelVector>> per_cluster(K);
      for (int u : ctx.uinv) {
        int k = ctx.uav_of_ud[u];
        if (k < 0 || k >= K) fail<config_error>("run_fl: ud ", u, " has no cluster");
        per_cluster[k].push_back(local.at(u));
      }
      std::vector<ModelVector> cluster_models(K);
      for (int k = 0; k < K; ++k) {
        if (per_cluster[k].empty()) {
          // A UAV with no delivered UDs this round keeps an empty-weight model.
          cluster_models[k].params.assign(w0.size(), 0.0);
          cluster_models[k].sample_count = 0;
        } else {
          cluster_models[k] = cluster_aggregate(per_cluster[k]);
        }
        cluster_models[k].owner_kind = OwnerKind::uav;
        cluster_models[k].owner_id = k;
      }

      bool full_round = (topo == FlTopology::hfl) || cfg.dissemination_period <= 1 ||
                        (t % cfg.dissemination_period == 0);
      std::vector<ModelVector> nonempty;
      for (int k = 0; k < K; ++k)
        if (cluster_models[k].sample_count > 0) nonempty.push_back(cluster_models[k]);

      if (full_round) {
        if (topo == FlTopology::fedmod) {
          auto trace = run_dissemination(SideInformation::initial(K), ctx.topo,
                                         ctx.model_size_bits);
          rec.t_diss_s = trace.t_diss_s;
          rec.diss_rounds = trace.rounds_to_consensus;
        }
        ModelVector global = global_aggregate(nonempty, cfg.strict_eq9);
        eval_model = global.params;
        for (int u : ctx.uinv) broadcast[u] = global.params;
        hist.final_global = global;
        for (int k = 0; k < K; ++k) uav_models[k] = global;
      } else {
        // Skipped dissemination: every UAV pushes its own stale cluster view.
        for (int u : ctx.uinv) broadcast[u] = cluster_models[ctx.uav_of_ud[u]].params;
        ModelVector estimate = global_aggregate(nonempty, false);
        eval_model = estimate.params;
        hist.final_global = estimate;
        for (int k = 0; k < K; ++k) uav_models[k] = cluster_models[k];
        // What the network serves its UDs is the per-cluster model, so loss
        // and accuracy are the data-weighted mean over the UAV-held models.
        long long total = 0;
        for (const auto& m : nonempty) total += m.sample_count;
        for (const auto& m : nonempty) {
          double w = static_cast<double>(m.sample_count) / static_cast<double>(total);
          rec.loss += w * model_loss(cfg.model, m.params, ctx.train, eval_indices);
          rec.accuracy += w * model_accuracy(cfg.model, m.params, ctx.test);
        }
        metrics_done = true;
      }
    }

    if (!metrics_done) {
      rec.loss = model_loss(cfg.model, eval_model, ctx.train, eval_indices);
      rec.accuracy = model_accuracy(cfg.model, eval_model, ctx.test);
    }
    std::vector<double> g;
    model_grad(cfg.model, eval_model, ctx.train, eval_indices, g);
    for (double v : g) rec.grad_norm_sq += v * v;

    if (ctx.scenario && ctx.schedule && topo == FlTopology::fedmod) {
      DisseminationTrace* no_trace = nullptr;
      IterationCosts costs = iteration_costs(*ctx.schedule, no_trace, cfg.local_iters,
                                             cfg.global_iters, *ctx.scenario, rec.t_diss_s);
      rec.tau_s = costs.tau_s;
      rec.energy_total_j = costs.total_energy_j;
      rec.energy_ud_j = costs.energy_ud_j;
      rec.energy_uav_j = costs.energy_uav_j;
    } else if (ctx.scenario) {
      BaselineCosts costs = baseline_costs(topo == FlTopology::star, ctx.uinv,
                                           ctx.schedule, cfg.local_iters, *ctx.scenario);
      rec.tau_s = costs.tau_s;
      rec.energy_total_j = costs.total_energy_j;
      rec.energy_ud_j = costs.energy_ud_j;
      rec.energy_uav_j = costs.energy_uav_j;
    }

    hist.records.push_back(rec);
  }

  hist.final_uav_models = uav_models;
  return hist;
}

inline History run_fedmod(const FlContext& ctx, const TrainConfig& cfg) {
  return run_fl(FlTopology::fedmod, ctx, cfg);
}

inline History run_baseline(FlTopology kind, const FlContext& ctx, const TrainConfig& cfg) {
  if (kind == FlTopology::fedmod) fail<config_error>("run_baseline: kind must be star or hfl");
  return run_fl(kind, ctx, cfg);
}

// ---------------------------------------------------------------------------
// Convergence monitors: purely observational per-iteration quantities.

struct ConvergenceReport {
  std::vector<double> loss_delta;        // F(t+1) - F(t)
  std::vector<double> grad_norm_sq;      // per iteration
  std::vector<double> running_avg_gnsq;  // running mean of grad_norm_sq
  double lambda = 0.0;
  double smoothness_l = 0.0;  // user-supplied L estimate (0 = not provided)
  bool lambda_precondition_ok = true;  // 1 - lambda * L >= 0
};

inline ConvergenceReport convergence_monitors(const History& hist, double lambda,
                                              double smoothness_l = 0.0) {
  if (hist.records.empty()) fail<domain_error>("convergence_monitors: empty history");
  ConvergenceReport rep;
  rep.lambda = lambda;
  rep.smoothness_l = smoothness_l;
  rep.lambda_precondition_ok = smoothness_l <= 0.0 || 1.0 - lambda * smoothness_l >= 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < hist.records.size(); ++i) {
    rep.grad_norm_sq.push_back(hist.records[i].grad_norm_sq);
    acc += hist.records[i].grad_norm_sq;
    rep.running_avg_gnsq.push_back(acc / (i + 1));
    if (i > 0) rep.loss_delta.push_back(hist.records[i].loss - hist.records[i - 1].loss);
  }
  return rep;
}

}  // namespace fedmod
