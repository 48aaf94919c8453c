#include "pfmap/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <stdexcept>

#include "pfmap/complexity.hpp"
#include "pfmap/gpml.hpp"
#include "pfmap/pacbayes.hpp"
#include "pfmap/parallel.hpp"
#include "pfmap/rng.hpp"

namespace pfmap {

namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

json dist_to_json(const ParamDistribution& d) {
  return json{{"kind", d.kind == DistKind::gaussian ? "gaussian" : "uniform_cube"},
              {"sigma_w", d.sigma_w},
              {"sigma_b", d.sigma_b}};
}

ParamDistribution dist_from_json(const json& j, ParamDistribution def) {
  if (j.contains("kind")) {
    const std::string k = j["kind"];
    if (k == "gaussian")
      def.kind = DistKind::gaussian;
    else if (k == "uniform_cube")
      def.kind = DistKind::uniform_cube;
    else
      throw std::invalid_argument("config: unknown distribution kind " + k);
  }
  def.sigma_w = j.value("sigma_w", def.sigma_w);
  def.sigma_b = j.value("sigma_b", def.sigma_b);
  return def;
}

json train_to_json(const TrainConfig& t) {
  const char* algo = t.algo == TrainAlgo::sgd      ? "sgd"
                     : t.algo == TrainAlgo::advsgd ? "advsgd"
                                                   : "adam";
  return json{{"algo", algo},
              {"learning_rate", t.learning_rate},
              {"batch_size", t.batch_size},
              {"max_steps", t.max_steps},
              {"loss", t.loss == LossKind::bce ? "bce" : "mse"},
              {"ema_decay", t.ema_decay},
              {"softmax_temp", t.softmax_temp},
              {"adam_beta1", t.adam_beta1},
              {"adam_beta2", t.adam_beta2},
              {"adam_eps", t.adam_eps},
              {"init", dist_to_json(t.init)},
              {"accuracy_check_every", t.accuracy_check_every}};
}

TrainConfig train_from_json(const json& j, TrainConfig def) {
  if (j.contains("algo")) {
    const std::string a = j["algo"];
    if (a == "sgd")
      def.algo = TrainAlgo::sgd;
    else if (a == "advsgd")
      def.algo = TrainAlgo::advsgd;
    else if (a == "adam")
      def.algo = TrainAlgo::adam;
    else
      throw std::invalid_argument("config: unknown train algo " + a);
  }
  def.learning_rate = j.value("learning_rate", def.learning_rate);
  def.batch_size = j.value("batch_size", def.batch_size);
  def.max_steps = j.value("max_steps", def.max_steps);
  if (j.contains("loss")) {
    const std::string l = j["loss"];
    if (l == "bce")
      def.loss = LossKind::bce;
    else if (l == "mse")
      def.loss = LossKind::mse;
    else
      throw std::invalid_argument("config: unknown loss " + l);
  }
  def.ema_decay = j.value("ema_decay", def.ema_decay);
  def.softmax_temp = j.value("softmax_temp", def.softmax_temp);
  def.adam_beta1 = j.value("adam_beta1", def.adam_beta1);
  def.adam_beta2 = j.value("adam_beta2", def.adam_beta2);
  def.adam_eps = j.value("adam_eps", def.adam_eps);
  if (j.contains("init")) def.init = dist_from_json(j["init"], def.init);
  def.accuracy_check_every =
      j.value("accuracy_check_every", def.accuracy_check_every);
  return def;
}

NetworkSpec make_spec(const std::vector<int>& layer_sizes) {
  NetworkSpec spec;
  spec.layer_sizes = layer_sizes;
  spec.validate();
  return spec;
}

int effective_gp_depth(const ExperimentConfig& cfg, const NetworkSpec& spec) {
  if (cfg.gp_depth > 0) return cfg.gp_depth;
  const int hidden = spec.n_weight_layers() - 1;
  return std::max(hidden, 1);
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  json j{{"experiment", cfg.experiment},
         {"seed", cfg.seed},
         {"workers", cfg.workers},
         {"out_dir", cfg.out_dir},
         {"layer_sizes", cfg.layer_sizes},
         {"dist", dist_to_json(cfg.dist)},
         {"n_samples", cfg.n_samples},
         {"layer_sweep", cfg.layer_sweep},
         {"envelope_bin_width", cfg.envelope_bin_width},
         {"gp_sigma_w", cfg.gp_sigma_w},
         {"gp_sigma_b", cfg.gp_sigma_b},
         {"gp_depth", cfg.gp_depth},
         {"gp_draws", cfg.gp_draws},
         {"dataset", cfg.dataset},
         {"data_dir", cfg.data_dir},
         {"synthetic_side", cfg.synthetic_side},
         {"synthetic_count", cfg.synthetic_count},
         {"m_inputs", cfg.m_inputs},
         {"corruption_grid", cfg.corruption_grid},
         {"m_train", cfg.m_train},
         {"n_test", cfg.n_test},
         {"train_seeds", cfg.train_seeds},
         {"delta", cfg.delta},
         {"n_train_sets", cfg.n_train_sets},
         {"runs_per_set", cfg.runs_per_set},
         {"train_set_size", cfg.train_set_size},
         {"target_table", cfg.target_table},
         {"gp_sigma_sweep", cfg.gp_sigma_sweep},
         {"train", train_to_json(cfg.train)}};
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path);
  json j;
  f >> j;

  ExperimentConfig cfg;
  cfg.experiment = j.value("experiment", cfg.experiment);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.layer_sizes = j.value("layer_sizes", cfg.layer_sizes);
  if (j.contains("dist")) cfg.dist = dist_from_json(j["dist"], cfg.dist);
  cfg.n_samples = j.value("n_samples", cfg.n_samples);
  cfg.layer_sweep = j.value("layer_sweep", cfg.layer_sweep);
  cfg.envelope_bin_width = j.value("envelope_bin_width", cfg.envelope_bin_width);
  cfg.gp_sigma_w = j.value("gp_sigma_w", cfg.gp_sigma_w);
  cfg.gp_sigma_b = j.value("gp_sigma_b", cfg.gp_sigma_b);
  cfg.gp_depth = j.value("gp_depth", cfg.gp_depth);
  cfg.gp_draws = j.value("gp_draws", cfg.gp_draws);
  cfg.dataset = j.value("dataset", cfg.dataset);
  cfg.data_dir = j.value("data_dir", cfg.data_dir);
  cfg.synthetic_side = j.value("synthetic_side", cfg.synthetic_side);
  cfg.synthetic_count = j.value("synthetic_count", cfg.synthetic_count);
  cfg.m_inputs = j.value("m_inputs", cfg.m_inputs);
  cfg.corruption_grid = j.value("corruption_grid", cfg.corruption_grid);
  cfg.m_train = j.value("m_train", cfg.m_train);
  cfg.n_test = j.value("n_test", cfg.n_test);
  cfg.train_seeds = j.value("train_seeds", cfg.train_seeds);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.n_train_sets = j.value("n_train_sets", cfg.n_train_sets);
  cfg.runs_per_set = j.value("runs_per_set", cfg.runs_per_set);
  cfg.train_set_size = j.value("train_set_size", cfg.train_set_size);
  cfg.target_table = j.value("target_table", cfg.target_table);
  cfg.gp_sigma_sweep = j.value("gp_sigma_sweep", cfg.gp_sigma_sweep);
  if (j.contains("train")) cfg.train = train_from_json(j["train"], cfg.train);
  return cfg;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  auto betacf = [](double a_, double b_, double x_) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14, kFpMin = 1e-300;
    const double qab = a_ + b_, qap = a_ + 1.0, qam = a_ - 1.0;
    double c = 1.0, d = 1.0 - qab * x_ / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
      const int m2 = 2 * m;
      double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < kFpMin) d = kFpMin;
      c = 1.0 + aa / c;
      if (std::abs(c) < kFpMin) c = kFpMin;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < kFpMin) d = kFpMin;
      c = 1.0 + aa / c;
      if (std::abs(c) < kFpMin) c = kFpMin;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
  };

  const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                             std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

std::pair<double, double> pearson(const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 3)
    throw std::invalid_argument("pearson: need |xs| = |ys| >= 3");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("pearson: zero variance");
  double rho = sxy / std::sqrt(sxx * syy);
  rho = std::clamp(rho, -1.0, 1.0);

  const double df = static_cast<double>(n - 2);
  double p;
  if (std::abs(rho) >= 1.0) {
    p = 0.0;
  } else {
    const double t2 = rho * rho * df / (1.0 - rho * rho);
    p = reg_inc_beta(0.5 * df, 0.5, df / (df + t2));
  }
  return {rho, p};
}

LabeledSet load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset == "synthetic") {
    // go through the IDX writer/reader so the binary path stays exercised
    ensure_dir(cfg.out_dir);
    const std::string img = cfg.out_dir + "/synthetic-images-idx3-ubyte";
    const std::string lab = cfg.out_dir + "/synthetic-labels-idx1-ubyte";
    const RawDataset gen = synthetic_images(
        cfg.synthetic_count, cfg.synthetic_side, derive_seed(cfg.seed, 7777));
    write_idx(gen, cfg.synthetic_side, cfg.synthetic_side, img, lab);
    RawDataset raw = load_idx(img, lab);
    raw.source = "synthetic";
    return make_binarized(raw);
  }
  if (cfg.dataset == "mnist" || cfg.dataset == "fashion-mnist") {
    return make_binarized(load_idx(cfg.data_dir + "/train-images-idx3-ubyte",
                                   cfg.data_dir + "/train-labels-idx1-ubyte"));
  }
  if (cfg.dataset == "cifar10") {
    std::vector<std::string> files;
    for (int b = 1; b <= 5; ++b) {
      const std::string path =
          cfg.data_dir + "/data_batch_" + std::to_string(b) + ".bin";
      if (std::filesystem::exists(path)) files.push_back(path);
    }
    if (files.empty())
      throw std::runtime_error("load_dataset: no CIFAR-10 batches in " +
                               cfg.data_dir);
    return make_binarized(load_cifar10(files));
  }
  throw std::invalid_argument("load_dataset: unknown dataset " + cfg.dataset);
}

ProbComplexityReport run_prob_complexity(const ExperimentConfig& cfg) {
  ensure_dir(cfg.out_dir);
  const NetworkSpec spec = make_spec(cfg.layer_sizes);

  const FrequencyTable table = estimate_frequencies(
      spec, cfg.dist, cfg.n_samples, cfg.seed, cfg.workers);
  const RankProfile ranks = rank_profile(table);
  const FrequencyTable filtered = filter_singletons(table);
  const RankProfile kept = rank_profile(filtered);  // survivors, rank order

  // rank plot with the parameter-free Zipf reference
  const double n_outputs = std::exp2(static_cast<double>(spec.input_dim()));
  const double n_funcs = std::pow(2.0, n_outputs);  // 2^(2^n)
  {
    std::ofstream f(cfg.out_dir + "/rank.csv");
    f << "rank,prob,zipf_ref\n";
    const std::size_t cap = std::min<std::size_t>(ranks.entries.size(), 1000000);
    for (std::size_t i = 0; i < cap; ++i) {
      const RankEntry& e = ranks.entries[i];
      f << e.rank << "," << g17(e.probability) << ","
        << g17(zipf_reference(e.rank, n_funcs)) << "\n";
    }
  }

  // complexity columns for the surviving functions
  struct Row {
    const RankEntry* e;
    double lz, ent, gen, csr;
    int boolexpr;
  };
  std::vector<Row> rows(kept.entries.size());
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    const RankEntry& e = kept.entries[i];
    const BooleanFunction f(spec.input_dim(), e.key);
    rows[i] = {&e,
               lz_complexity(e.key),
               entropy(e.key),
               generalization_complexity(f),
               critical_sample_ratio(f),
               boolean_expr_complexity(f)};
  });

  {
    std::ofstream f(cfg.out_dir + "/complexity.csv");
    f << "truth_table,lz,entropy,boolexpr,gencomp,csr\n";
    for (const Row& r : rows)
      f << r.e->key.to_string() << "," << g17(r.lz) << "," << g17(r.ent) << ","
        << r.boolexpr << "," << g17(r.gen) << "," << g17(r.csr) << "\n";
  }
  {
    std::ofstream f(cfg.out_dir + "/functions.jsonl");
    for (const Row& r : rows) {
      json rec{{"truth_table", r.e->key.to_string()},
               {"count", r.e->count},
               {"prob", r.e->probability}};
      f << rec.dump() << "\n";
    }
  }

  ProbComplexityReport rep;
  rep.distinct_functions = ranks.entries.size();
  rep.exported_functions = rows.size();
  for (std::size_t i = 0; i < std::min<std::size_t>(10, ranks.entries.size());
       ++i)
    rep.top_ranks.emplace_back(ranks.entries[i].rank,
                               ranks.entries[i].probability);

  std::vector<double> lz, log2p;
  std::vector<std::pair<double, double>> pts;
  lz.reserve(rows.size());
  for (const Row& r : rows) {
    lz.push_back(r.lz);
    log2p.push_back(std::log2(r.e->probability));
    pts.emplace_back(r.lz, log2p.back());
  }
  if (rows.size() >= 3) {
    const auto [rho, p] = pearson(log2p, lz);
    rep.pearson_log2p_lz = rho;
    rep.pearson_p_value = p;
  }
  if (!pts.empty()) {
    const BoundParams env = fit_envelope(pts, cfg.envelope_bin_width);
    rep.envelope_a = env.a;
    rep.envelope_b = env.b;
    double max_excess = -1e300;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].e->probability < 1e-3) continue;
      const double line = -env.a * rows[i].lz + env.b;
      max_excess = std::max(max_excess, log2p[i] - line);
    }
    rep.max_excess_above_envelope = max_excess;
    json env_j{{"a", env.a},
               {"b", env.b},
               {"bin_width", cfg.envelope_bin_width},
               {"max_excess_above_envelope_high_p", max_excess}};
    std::ofstream jf(cfg.out_dir + "/envelope.json");
    jf << env_j.dump(2) << "\n";
  }

  {
    json rj{{"config", json::parse(config_to_json(cfg))},
            {"distinct_functions", rep.distinct_functions},
            {"exported_functions", rep.exported_functions},
            {"pearson_log2p_lz", rep.pearson_log2p_lz},
            {"pearson_p_value", rep.pearson_p_value},
            {"envelope_a", rep.envelope_a},
            {"envelope_b", rep.envelope_b}};
    std::ofstream jf(cfg.out_dir + "/report.json");
    jf << rj.dump(2) << "\n";
  }

  // optional depth/architecture sweep replays into subdirectories
  for (std::size_t s = 0; s < cfg.layer_sweep.size(); ++s) {
    ExperimentConfig sub = cfg;
    sub.layer_sizes = cfg.layer_sweep[s];
    sub.layer_sweep.clear();
    sub.out_dir = cfg.out_dir + "/sweep_" + std::to_string(s);
    run_prob_complexity(sub);
  }
  return rep;
}

AgreementReport run_nn_gp_agreement(const ExperimentConfig& cfg) {
  ensure_dir(cfg.out_dir);
  if (cfg.m_inputs < 1 || cfg.m_inputs > 16)
    throw std::invalid_argument("run_nn_gp_agreement: m_inputs must be 1..16");

  const LabeledSet data = load_dataset(cfg);
  const LabeledSet picked = subsample(
      data, static_cast<std::size_t>(cfg.m_inputs), derive_seed(cfg.seed, 1001));
  const Eigen::MatrixXd& X = picked.inputs;
  const int d = static_cast<int>(X.cols());

  // the finite-width side uses hidden layers as wide as the input
  NetworkSpec spec;
  if (!cfg.layer_sizes.empty() && cfg.layer_sizes.front() == d)
    spec = make_spec(cfg.layer_sizes);
  else
    spec = make_spec({d, d, d, 1});

  const FrequencyTable net_table = estimate_label_frequencies(
      spec, cfg.dist, X, cfg.n_samples, derive_seed(cfg.seed, 1), cfg.workers);

  const KernelMatrix km = kernel_matrix(X, effective_gp_depth(cfg, spec),
                                        cfg.gp_sigma_w, cfg.gp_sigma_b);
  const FrequencyTable gp_table = estimate_gp_label_frequencies(
      km, cfg.gp_draws, derive_seed(cfg.seed, 2), cfg.workers);

  // join on labelings observed on both sides, in net-rank order
  const RankProfile net_ranks = rank_profile(net_table);
  struct JoinRow {
    const RankEntry* net;
    std::uint64_t gp_count;
    double log_ml_ep;
    double log_ml_laplace;
  };
  std::vector<JoinRow> joined;
  for (const RankEntry& e : net_ranks.entries) {
    const auto it = gp_table.counts.find(e.key);
    if (it == gp_table.counts.end()) continue;
    joined.push_back({&e, it->second, 0.0, 0.0});
  }
  parallel_for(joined.size(), cfg.workers, [&](std::size_t i) {
    joined[i].log_ml_ep = log_ml_ep(km, joined[i].net->key).log_pu;
    joined[i].log_ml_laplace = log_ml_laplace(km, joined[i].net->key).log_pu;
  });

  std::vector<double> log_net, log_gp, eps, laps;
  for (const JoinRow& r : joined) {
    log_net.push_back(std::log(r.net->probability));
    log_gp.push_back(std::log(static_cast<double>(r.gp_count) /
                              static_cast<double>(gp_table.total)));
    eps.push_back(r.log_ml_ep);
    laps.push_back(r.log_ml_laplace);
  }

  AgreementReport rep;
  rep.common_labelings = joined.size();
  if (joined.size() >= 3) {
    const auto [rho, p] = pearson(log_net, log_gp);
    rep.pearson_log_freq = rho;
    rep.pearson_p_value = p;
    rep.pearson_ep_vs_net = pearson(eps, log_net).first;
    rep.pearson_laplace_vs_net = pearson(laps, log_net).first;
  }

  {
    std::ofstream f(cfg.out_dir + "/agreement.csv");
    f << "labeling,count_net,count_gp,log_ml_ep,log_ml_laplace\n";
    for (const JoinRow& r : joined)
      f << r.net->key.to_string() << "," << r.net->count << "," << r.gp_count
        << "," << g17(r.log_ml_ep) << "," << g17(r.log_ml_laplace) << "\n";
  }
  {
    json rj{{"config", json::parse(config_to_json(cfg))},
            {"common_labelings", rep.common_labelings},
            {"pearson_log_freq", rep.pearson_log_freq},
            {"pearson_p_value", rep.pearson_p_value},
            {"pearson_ep_vs_net", rep.pearson_ep_vs_net},
            {"pearson_laplace_vs_net", rep.pearson_laplace_vs_net},
            {"net_total", net_table.total},
            {"gp_total", gp_table.total}};
    std::ofstream jf(cfg.out_dir + "/report.json");
    jf << rj.dump(2) << "\n";
  }
  return rep;
}

std::vector<CorruptionRow> run_corruption_sweep(const ExperimentConfig& cfg) {
  ensure_dir(cfg.out_dir);
  const LabeledSet data = load_dataset(cfg);
  const std::size_t need =
      static_cast<std::size_t>(cfg.m_train) + static_cast<std::size_t>(cfg.n_test);
  if (need > static_cast<std::size_t>(data.inputs.rows()))
    throw std::invalid_argument("run_corruption_sweep: dataset too small");

  const LabeledSet pool = subsample(data, need, derive_seed(cfg.seed, 11));
  LabeledSet train_set, test_set;
  train_set.inputs = pool.inputs.topRows(cfg.m_train);
  train_set.labels = BitVec(static_cast<std::size_t>(cfg.m_train));
  test_set.inputs = pool.inputs.bottomRows(cfg.n_test);
  test_set.labels = BitVec(static_cast<std::size_t>(cfg.n_test));
  for (int i = 0; i < cfg.m_train; ++i)
    train_set.labels.set(static_cast<std::size_t>(i),
                         pool.labels.get(static_cast<std::size_t>(i)));
  for (int i = 0; i < cfg.n_test; ++i)
    test_set.labels.set(
        static_cast<std::size_t>(i),
        pool.labels.get(static_cast<std::size_t>(cfg.m_train + i)));

  const int d = static_cast<int>(train_set.inputs.cols());
  NetworkSpec train_spec;
  if (!cfg.layer_sizes.empty() && cfg.layer_sizes.front() == d)
    train_spec = make_spec(cfg.layer_sizes);
  else
    train_spec = make_spec({d, 128, 1});

  const int depth = (cfg.gp_depth > 0) ? cfg.gp_depth : 1;
  const KernelMatrix km =
      kernel_matrix(train_set.inputs, depth, cfg.gp_sigma_w, cfg.gp_sigma_b);

  std::vector<CorruptionRow> rows(cfg.corruption_grid.size());
  for (std::size_t level = 0; level < cfg.corruption_grid.size(); ++level) {
    const double p = cfg.corruption_grid[level];
    const BitVec labels =
        corrupt(train_set.labels, p, derive_seed(cfg.seed, 100 + level));

    const MarginalLikelihood ml = log_ml_ep(km, labels);
    const BoundReport bound =
        realizable_bound(std::min(ml.log_pu, 0.0), cfg.m_train, cfg.delta);

    std::vector<TrainResult> results(static_cast<std::size_t>(cfg.train_seeds));
    TrainConfig tc = cfg.train;
    tc.extract_function = false;
    parallel_for(results.size(), cfg.workers, [&](std::size_t s) {
      results[s] = train(train_spec, train_set.inputs, labels, tc,
                         derive_seed(cfg.seed, 5000 + level * 1000 + s));
    });
    double err = 0.0, steps = 0.0;
    for (const TrainResult& r : results) {
      err += threshold_error(train_spec, r.params, test_set.inputs,
                             test_set.labels);
      steps += static_cast<double>(r.steps);
    }

    CorruptionRow row;
    row.corruption = p;
    row.log_pu = ml.log_pu;
    row.ep_converged = ml.converged;
    row.bound = bound.epsilon_bound;
    row.mean_test_error = err / cfg.train_seeds;
    row.mean_train_steps = steps / cfg.train_seeds;
    rows[level] = row;
  }

  {
    std::ofstream f(cfg.out_dir + "/corruption.csv");
    f << "corruption,log_pu,ep_converged,bound,mean_test_error,mean_train_steps\n";
    for (const CorruptionRow& r : rows)
      f << g17(r.corruption) << "," << g17(r.log_pu) << ","
        << (r.ep_converged ? 1 : 0) << "," << g17(r.bound) << ","
        << g17(r.mean_test_error) << "," << g17(r.mean_train_steps) << "\n";
  }
  {
    json rj{{"config", json::parse(config_to_json(cfg))}};
    json arr = json::array();
    for (const CorruptionRow& r : rows)
      arr.push_back(json{{"corruption", r.corruption},
                         {"log_pu", r.log_pu},
                         {"ep_converged", r.ep_converged},
                         {"bound", r.bound},
                         {"mean_test_error", r.mean_test_error},
                         {"mean_train_steps", r.mean_train_steps}});
    rj["rows"] = arr;
    std::ofstream jf(cfg.out_dir + "/report.json");
    jf << rj.dump(2) << "\n";
  }
  return rows;
}

SgdVsAbiReport run_sgd_vs_abi(const ExperimentConfig& cfg) {
  ensure_dir(cfg.out_dir);
  const BooleanFunction target = BooleanFunction::from_table_string(
      cfg.target_table.empty() ? kDefaultSgdAbiTarget : cfg.target_table);
  const int n = target.n_inputs;
  const NetworkSpec spec = make_spec(cfg.layer_sizes);
  if (spec.input_dim() != n)
    throw std::invalid_argument("run_sgd_vs_abi: net input != target arity");

  const Eigen::MatrixXd X_all = all_binary_inputs(n);
  const std::size_t n_inputs = static_cast<std::size_t>(X_all.rows());
  if (static_cast<std::size_t>(cfg.train_set_size) > n_inputs)
    throw std::invalid_argument("run_sgd_vs_abi: training set too large");

  // fixed training sets
  std::vector<std::vector<std::uint32_t>> sets(
      static_cast<std::size_t>(cfg.n_train_sets));
  for (int i = 0; i < cfg.n_train_sets; ++i) {
    Rng rng(derive_seed(cfg.seed, 200 + i));
    std::vector<std::uint32_t> idx(n_inputs);
    for (std::size_t k = 0; k < n_inputs; ++k)
      idx[k] = static_cast<std::uint32_t>(k);
    for (int k = 0; k < cfg.train_set_size; ++k) {
      const std::size_t j =
          k + rng.below(static_cast<std::uint32_t>(n_inputs - k));
      std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(cfg.train_set_size));
    sets[static_cast<std::size_t>(i)] = std::move(idx);
  }

  // SGD side: M optimizer runs per training set
  const std::size_t total_runs =
      static_cast<std::size_t>(cfg.n_train_sets) * cfg.runs_per_set;
  std::vector<BooleanFunction> found(total_runs);
  std::vector<char> converged(total_runs, 0);
  TrainConfig tc = cfg.train;
  tc.extract_function = true;
  parallel_for(total_runs, cfg.workers, [&](std::size_t r) {
    const std::size_t set_id = r / static_cast<std::size_t>(cfg.runs_per_set);
    const std::vector<std::uint32_t>& idx = sets[set_id];
    Eigen::MatrixXd Xi(idx.size(), n);
    BitVec yi(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Xi.row(static_cast<Eigen::Index>(k)) = X_all.row(idx[k]);
      yi.set(k, target.bits.get(idx[k]));
    }
    const TrainResult res =
        train(spec, Xi, yi, tc, derive_seed(cfg.seed, 300000 + r));
    if (res.reached_zero_error) {
      found[r] = res.function;
      converged[r] = 1;
    }
  });

  // counts per function per training set
  std::map<std::string, AbiEstimate> by_table;
  std::map<std::string, std::vector<std::uint64_t>> set_counts;
  for (std::size_t r = 0; r < total_runs; ++r) {
    if (!converged[r]) continue;
    const std::size_t set_id = r / static_cast<std::size_t>(cfg.runs_per_set);
    const std::string key = found[r].bits.to_string();
    auto& est = by_table[key];
    if (est.sgd_count == 0) {
      est.function = found[r];
      est.n_train_sets = cfg.n_train_sets;
      set_counts[key].assign(static_cast<std::size_t>(cfg.n_train_sets), 0);
    }
    ++est.sgd_count;
    ++set_counts[key][set_id];
  }

  // finite-size rule: drop functions seen exactly once in the whole sample
  for (auto it = by_table.begin(); it != by_table.end();) {
    if (it->second.sgd_count <= 1) {
      set_counts.erase(it->first);
      it = by_table.erase(it);
    } else {
      ++it;
    }
  }

  // SGD averages (independent of the GP parameters)
  std::vector<AbiEstimate*> order;
  for (auto& [key, est] : by_table) order.push_back(&est);
  std::vector<std::vector<char>> consistent_with(
      order.size(), std::vector<char>(sets.size(), 0));
  for (std::size_t fi = 0; fi < order.size(); ++fi) {
    AbiEstimate& est = *order[fi];
    const std::vector<std::uint64_t>& counts =
        set_counts[est.function.bits.to_string()];
    double sgd_sum = 0.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      sgd_sum += static_cast<double>(counts[i]) / cfg.runs_per_set;
      bool ok = true;
      for (std::uint32_t idx : sets[i])
        if (est.function.bits.get(idx) != target.bits.get(idx)) {
          ok = false;
          break;
        }
      consistent_with[fi][i] = ok;
    }
    est.avg_prob_sgd = sgd_sum / cfg.n_train_sets;
  }

  // ABI side under the primary GP parameters plus any sweep entries,
  // always over the same optimizer runs
  std::vector<std::pair<double, double>> sigmas{
      {cfg.gp_sigma_w, cfg.gp_sigma_b}};
  for (double s : cfg.gp_sigma_sweep) sigmas.emplace_back(s, s);

  SgdVsAbiReport rep;
  const int depth = effective_gp_depth(cfg, spec);
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    const auto [sw, sb] = sigmas[si];
    std::vector<double> log_p_s(sets.size());
    parallel_for(sets.size(), cfg.workers, [&](std::size_t i) {
      const std::vector<std::uint32_t>& idx = sets[i];
      Eigen::MatrixXd Xi(idx.size(), n);
      BitVec yi(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        Xi.row(static_cast<Eigen::Index>(k)) = X_all.row(idx[k]);
        yi.set(k, target.bits.get(idx[k]));
      }
      log_p_s[i] = log_ml_ep(kernel_matrix(Xi, depth, sw, sb), yi).log_pu;
    });

    const KernelMatrix km_all = kernel_matrix(X_all, depth, sw, sb);
    std::vector<double> log_p_f(order.size());
    parallel_for(order.size(), cfg.workers, [&](std::size_t i) {
      log_p_f[i] = log_ml_ep(km_all, order[i]->function.bits).log_pu;
    });

    std::vector<double> lx, ly;
    for (std::size_t fi = 0; fi < order.size(); ++fi) {
      double abi_sum = 0.0;
      for (std::size_t i = 0; i < sets.size(); ++i)
        if (consistent_with[fi][i])
          abi_sum += std::exp(log_p_f[fi] - log_p_s[i]);
      const double avg_abi = abi_sum / cfg.n_train_sets;
      if (si == 0) order[fi]->avg_prob_abi = avg_abi;
      if (order[fi]->avg_prob_sgd > 0.0 && avg_abi > 0.0) {
        lx.push_back(std::log(order[fi]->avg_prob_sgd));
        ly.push_back(std::log(avg_abi));
      }
    }
    double rho = 0.0, p = 1.0;
    if (lx.size() >= 3) std::tie(rho, p) = pearson(lx, ly);
    rep.sigma_sweep.push_back({sw, rho, p});
    if (si == 0) {
      rep.rho = rho;
      rep.p_value = p;
    }
  }

  rep.runs_total = total_runs;
  for (std::size_t r = 0; r < total_runs; ++r)
    if (converged[r]) ++rep.runs_converged;
  for (const auto& [key, est] : by_table) rep.functions.push_back(est);
  std::sort(rep.functions.begin(), rep.functions.end(),
            [](const AbiEstimate& a, const AbiEstimate& b) {
              if (a.sgd_count != b.sgd_count) return a.sgd_count > b.sgd_count;
              return a.function.bits.lex_less(b.function.bits);
            });

  {
    std::ofstream f(cfg.out_dir + "/abi.csv");
    f << "truth_table,sgd_count,avg_prob_sgd,avg_prob_abi\n";
    for (const AbiEstimate& est : rep.functions)
      f << est.function.bits.to_string() << "," << est.sgd_count << ","
        << g17(est.avg_prob_sgd) << "," << g17(est.avg_prob_abi) << "\n";
  }
  {
    json rj{{"config", json::parse(config_to_json(cfg))},
            {"rho", rep.rho},
            {"p_value", rep.p_value},
            {"n_functions", rep.functions.size()},
            {"runs_converged", rep.runs_converged},
            {"runs_total", rep.runs_total},
            {"target_lz", lz_complexity(target.bits)}};
    json sweep = json::array();
    for (const auto& row : rep.sigma_sweep)
      sweep.push_back(json{{"sigma", row[0]}, {"rho", row[1]}, {"p", row[2]}});
    rj["sigma_sweep"] = sweep;
    std::ofstream jf(cfg.out_dir + "/report.json");
    jf << rj.dump(2) << "\n";
  }
  return rep;
}

}  // namespace pfmap
