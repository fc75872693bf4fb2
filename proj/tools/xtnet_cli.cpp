// Command-line driver: generate | train | evaluate | theorems | sweep.
// Every command writes a run manifest with content hashes of its inputs
// and outputs so runs can be replayed and verified byte-for-byte.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xtnet/baselines.hpp"
#include "xtnet/checkpoint.hpp"
#include "xtnet/metrics.hpp"
#include "xtnet/trainer.hpp"

using nlohmann::json;
using namespace xtnet;

namespace {

constexpr const char* kToolVersion = "xtnet-cli 1.0.0";

// exit codes per contract
constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kNumericalError = 2;
constexpr int kThresholdError = 3;

std::string fnv64_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << content;
}

std::string file_hash(const std::string& path) { return fnv64_hex(slurp(path)); }

struct ManifestBuilder {
  json m;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  explicit ManifestBuilder(const std::string& command) {
    m["command"] = command;
    m["tool_version"] = kToolVersion;
    m["inputs"] = json::object();
    m["outputs"] = json::object();
  }
  void input(const std::string& path) { m["inputs"][path] = file_hash(path); }
  void output(const std::string& path) { m["outputs"][path] = file_hash(path); }
  void write(const std::string& path) {
    m["wall_clock_sec"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    spit(path, m.dump(2) + "\n");
  }
};

// --- config parsing -------------------------------------------------

template <typename T>
void opt(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

SynthConfig parse_synth_config(const json& j) {
  SynthConfig c;
  if (j.contains("dataset_id"))
    c.dataset_id = syn_dataset_from_string(j.at("dataset_id").get<std::string>());
  opt(j, "n_train", c.n_train);
  opt(j, "n_test", c.n_test);
  opt(j, "feature_dim", c.feature_dim);
  opt(j, "coeffs_outcome", c.coeffs_a);
  opt(j, "coeffs_treatment", c.coeffs_t);
  if (j.contains("w_t")) {
    auto w = j.at("w_t").get<std::vector<double>>();
    if (w.size() != 3)
      throw std::invalid_argument("config: w_t needs exactly 3 entries");
    c.w_t1 = w[0];
    c.w_t2 = w[1];
    c.w_t3 = w[2];
  }
  opt(j, "gaussian_sigma", c.gaussian_sigma);
  if (j.contains("uniform_range")) {
    auto r = j.at("uniform_range").get<std::vector<double>>();
    if (r.size() != 2)
      throw std::invalid_argument("config: uniform_range needs 2 entries");
    c.uniform_lo = r[0];
    c.uniform_hi = r[1];
  }
  opt(j, "levels", c.levels);
  opt(j, "outcome_bins", c.outcome_bins);
  opt(j, "obs_fraction", c.obs_fraction);
  opt(j, "seed", c.seed);
  c.validate();
  return c;
}

json synth_config_json(const SynthConfig& c) {
  return json{{"dataset_id", to_string(c.dataset_id)},
              {"n_train", c.n_train},
              {"n_test", c.n_test},
              {"feature_dim", c.feature_dim},
              {"coeffs_outcome", c.coeffs_a},
              {"coeffs_treatment", c.coeffs_t},
              {"w_t", {c.w_t1, c.w_t2, c.w_t3}},
              {"gaussian_sigma", c.gaussian_sigma},
              {"uniform_range", {c.uniform_lo, c.uniform_hi}},
              {"levels", c.levels},
              {"outcome_bins", c.outcome_bins},
              {"obs_fraction", c.obs_fraction},
              {"seed", c.seed}};
}

XTNetConfig parse_xtnet_config(const json& j) {
  XTNetConfig c;
  opt(j, "feature_dim", c.feature_dim);
  opt(j, "levels", c.levels);
  opt(j, "num_outcomes", c.num_outcomes);
  opt(j, "trunk_widths", c.trunk_widths);
  opt(j, "backbone_widths", c.backbone_widths);
  opt(j, "head_widths", c.head_widths);
  if (j.contains("activation"))
    c.activation = activation_from_string(j.at("activation").get<std::string>());
  opt(j, "clamp_eps", c.clamp_eps);
  opt(j, "mask_sigmoid", c.mask_sigmoid);
  opt(j, "seed", c.seed);
  c.validate();
  return c;
}

json xtnet_config_json(const XTNetConfig& c) {
  return json{{"feature_dim", c.feature_dim},
              {"levels", c.levels},
              {"num_outcomes", c.num_outcomes},
              {"trunk_widths", c.trunk_widths},
              {"backbone_widths", c.backbone_widths},
              {"head_widths", c.head_widths},
              {"activation", to_string(c.activation)},
              {"clamp_eps", c.clamp_eps},
              {"mask_sigmoid", c.mask_sigmoid},
              {"seed", c.seed}};
}

BaselineConfig parse_baseline_config(const json& j, const std::string& kind) {
  BaselineConfig c;
  c.kind = baseline_kind_from_string(kind);
  opt(j, "feature_dim", c.feature_dim);
  opt(j, "levels", c.levels);
  opt(j, "num_outcomes", c.num_outcomes);
  opt(j, "widths", c.widths);
  if (j.contains("activation"))
    c.activation = activation_from_string(j.at("activation").get<std::string>());
  opt(j, "clamp_eps", c.clamp_eps);
  opt(j, "seed", c.seed);
  c.validate();
  return c;
}

json baseline_config_json(const BaselineConfig& c) {
  return json{{"feature_dim", c.feature_dim},
              {"levels", c.levels},
              {"num_outcomes", c.num_outcomes},
              {"widths", c.widths},
              {"activation", to_string(c.activation)},
              {"clamp_eps", c.clamp_eps},
              {"seed", c.seed}};
}

TrainConfig parse_train_config(const json& j) {
  TrainConfig c;
  opt(j, "learning_rate", c.learning_rate);
  opt(j, "epochs", c.epochs);
  opt(j, "batch_size", c.batch_size);
  if (j.contains("optimizer")) {
    const auto s = j.at("optimizer").get<std::string>();
    if (s == "sgd")
      c.optimizer = Optimizer::sgd;
    else if (s == "adam")
      c.optimizer = Optimizer::adam;
    else
      throw std::invalid_argument("config: unknown optimizer " + s);
  }
  opt(j, "beta1", c.beta1);
  opt(j, "beta2", c.beta2);
  opt(j, "adam_eps", c.adam_eps);
  opt(j, "seed", c.seed);
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    opt(l, "lambda1", c.loss.lambda1);
    opt(l, "lambda2", c.loss.lambda2);
    opt(l, "sinkhorn_epsilon", c.loss.sinkhorn_epsilon);
    opt(l, "sinkhorn_iters", c.loss.sinkhorn_iters);
    opt(l, "min_group_size", c.loss.min_group_size);
    opt(l, "clamp_eps", c.loss.clamp_eps);
  }
  c.validate();
  return c;
}

json train_config_json(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"optimizer", c.optimizer == Optimizer::adam ? "adam" : "sgd"},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"adam_eps", c.adam_eps},
              {"seed", c.seed},
              {"loss",
               {{"lambda1", c.loss.lambda1},
                {"lambda2", c.loss.lambda2},
                {"sinkhorn_epsilon", c.loss.sinkhorn_epsilon},
                {"sinkhorn_iters", c.loss.sinkhorn_iters},
                {"min_group_size", c.loss.min_group_size},
                {"clamp_eps", c.loss.clamp_eps}}}};
}

TheoremInstanceConfig parse_theorem_config(const json& j) {
  TheoremInstanceConfig c;
  opt(j, "levels", c.levels);
  opt(j, "interaction_max", c.interaction_max);
  opt(j, "interaction_density", c.interaction_density);
  opt(j, "model_noise", c.model_noise);
  opt(j, "model_draws", c.model_draws);
  opt(j, "units", c.units);
  opt(j, "instances", c.instances);
  opt(j, "budget_points", c.budget_points);
  opt(j, "seed", c.seed);
  c.validate();
  return c;
}

json theorem_config_json(const TheoremInstanceConfig& c) {
  return json{{"levels", c.levels},
              {"interaction_max", c.interaction_max},
              {"interaction_density", c.interaction_density},
              {"model_noise", c.model_noise},
              {"model_draws", c.model_draws},
              {"units", c.units},
              {"instances", c.instances},
              {"budget_points", c.budget_points},
              {"seed", c.seed}};
}

json dominance_json(const DominantEffectTable& t) {
  return json{{"rows", t.gaps.rows},
              {"cols", t.gaps.cols},
              {"data", t.gaps.data},
              {"source", t.source == DominantEffectTable::Source::rct_estimate
                             ? "rct_estimate"
                             : "config_override"}};
}

DominantEffectTable parse_dominance(const json& j) {
  DominantEffectTable t;
  t.gaps = Tensor(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  t.gaps.data = j.at("data").get<std::vector<double>>();
  t.source = j.at("source").get<std::string>() == "rct_estimate"
                 ? DominantEffectTable::Source::rct_estimate
                 : DominantEffectTable::Source::config_override;
  return t;
}

std::unique_ptr<UpliftModel> model_from_checkpoint_config(const json& cfg) {
  const auto kind = cfg.at("model").get<std::string>();
  if (kind == "xtnet")
    return std::make_unique<XTNet>(parse_xtnet_config(cfg.at("model_config")),
                                   parse_dominance(cfg.at("dominance")));
  return make_baseline(parse_baseline_config(cfg.at("model_config"), kind));
}

// --- commands -------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed = -1;  // <0 = keep the config's seed
};

std::string join(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

int cmd_generate(const CommonArgs& args) {
  ManifestBuilder mb("generate");
  mb.input(args.config_path);
  auto cfg = parse_synth_config(json::parse(slurp(args.config_path)));
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);

  auto result = gen_synthetic(cfg);
  const auto train_path = join(args.out_dir, "train.csv");
  const auto test_path = join(args.out_dir, "test.csv");
  const auto data_manifest = join(args.out_dir, "dataset.json");
  write_dataset_csv(result.train, train_path);
  write_dataset_csv(result.test, test_path);
  // echo the fully resolved config (with drawn coefficients) so the
  // oracle can be rebuilt from this file alone
  spit(data_manifest, synth_manifest_json(cfg, result.coeffs) + "\n");

  mb.m["config"] = synth_config_json(cfg);
  mb.m["seed"] = cfg.seed;
  mb.output(train_path);
  mb.output(test_path);
  mb.output(data_manifest);
  mb.write(join(args.out_dir, "generate_manifest.json"));
  std::cout << "wrote " << train_path << " (" << result.train.size()
            << " rows), " << test_path << " (" << result.test.size()
            << " rows)\n";
  return kOk;
}

// dataset.json from cmd_generate holds the resolved SynthConfig with
// materialized coefficients; regenerating from it reproduces the exact
// dataset and its potential-outcome oracle
SynthConfig synth_config_from_dataset_manifest(const json& j) {
  SynthConfig c = parse_synth_config(j);
  c.coeffs_a = j.at("coeffs_outcome").get<std::vector<double>>();
  c.coeffs_t = j.at("coeffs_treatment").get<std::vector<std::vector<double>>>();
  return c;
}

int cmd_train(const CommonArgs& args) {
  ManifestBuilder mb("train");
  mb.input(args.config_path);
  const auto cfg = json::parse(slurp(args.config_path));

  const auto train_csv = cfg.at("train_csv").get<std::string>();
  const auto levels = cfg.at("levels").get<std::vector<int>>();
  mb.input(train_csv);
  const auto data = read_dataset_csv(train_csv, levels);

  auto tc = parse_train_config(cfg.value("train", json::object()));
  if (args.seed >= 0) tc.seed = static_cast<std::uint64_t>(args.seed);

  const auto kind = cfg.value("model", std::string("xtnet"));
  json model_cfg_json;
  std::unique_ptr<UpliftModel> model;
  DominantEffectTable dominance;
  if (kind == "xtnet") {
    auto mc = parse_xtnet_config(cfg.value("model_config", json::object()));
    mc.levels = levels;
    mc.feature_dim = data.features.cols;
    mc.num_outcomes = data.num_outcomes();
    if (args.seed >= 0) mc.seed = static_cast<std::uint64_t>(args.seed);
    auto net = make_xtnet(mc, data);
    dominance = net->dominance();
    model_cfg_json = xtnet_config_json(net->config());
    model = std::move(net);
  } else {
    auto bc = parse_baseline_config(cfg.value("model_config", json::object()),
                                    kind);
    bc.levels = levels;
    bc.feature_dim = data.features.cols;
    bc.num_outcomes = data.num_outcomes();
    if (args.seed >= 0) bc.seed = static_cast<std::uint64_t>(args.seed);
    model_cfg_json = baseline_config_json(bc);
    model = make_baseline(bc);
  }

  const auto result = train(*model, data, tc);

  json ck_cfg{{"model", kind},
              {"model_config", model_cfg_json},
              {"levels", levels},
              {"train", train_config_json(tc)}};
  if (kind == "xtnet") ck_cfg["dominance"] = dominance_json(dominance);

  const auto ck_path = join(args.out_dir, "checkpoint.json");
  const auto trace_path = join(args.out_dir, "loss_trace.csv");
  save_checkpoint(ck_path, ck_cfg.dump(), model->all_params());
  write_loss_trace_csv(result, trace_path);

  mb.m["config"] = ck_cfg;
  mb.m["seed"] = tc.seed;
  mb.output(ck_path);
  mb.output(trace_path);
  mb.write(join(args.out_dir, "train_manifest.json"));
  std::cout << "trained " << kind << " for " << result.trace.size()
            << " epochs; final total loss "
            << (result.trace.empty() ? 0.0 : result.trace.back().total) << "\n";
  return kOk;
}

int cmd_evaluate(const CommonArgs& args, const std::string& checkpoint_path,
                 const std::string& dataset_manifest,
                 std::vector<std::string> policies, std::size_t max_units) {
  ManifestBuilder mb("evaluate");
  mb.input(args.config_path.empty() ? checkpoint_path : args.config_path);
  if (!args.config_path.empty()) mb.input(checkpoint_path);
  mb.input(dataset_manifest);
  if (policies.empty()) policies = {"qini", "aucc", "mv_aucc", "mcmv_aucc"};

  const auto synth_cfg =
      synth_config_from_dataset_manifest(json::parse(slurp(dataset_manifest)));
  auto synth = gen_synthetic(synth_cfg);
  const auto& test = synth.test;

  // rebuild the model and restore its weights
  const auto ck_cfg_str = [&] {
    // load twice: once to read the stored config, once to fill params
    std::vector<ad::Parameter*> none;
    return load_checkpoint(checkpoint_path, none);
  }();
  const auto ck_cfg = json::parse(ck_cfg_str);
  auto model = model_from_checkpoint_config(ck_cfg);
  load_checkpoint(checkpoint_path, model->all_params());

  const auto levels = ck_cfg.at("levels").get<std::vector<int>>();
  if (levels != test.levels)
    throw std::invalid_argument(
        "evaluate: checkpoint and dataset treatment spaces differ");
  if (model->num_outcomes() != test.num_outcomes() ||
      ck_cfg.at("model_config").at("feature_dim").get<std::size_t>() !=
          test.features.cols)
    throw std::invalid_argument(
        "evaluate: checkpoint and dataset shapes differ");

  const std::size_t n = std::min(max_units, test.size());
  const auto combos = enumerate_combos(levels);
  const auto costs = CostModel::unit(levels);

  std::vector<UnitInstance> pred_units, true_units;
  std::vector<std::vector<double>> pred_scores, true_scores;
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = &test.features.data[i * test.features.cols];
    pred_units.push_back(unit_from_model(*model, x, levels, costs, i));
    true_units.push_back(unit_from_oracle(synth.oracle, x, costs, i));
    pred_scores.push_back(pred_units.back().ey);
    true_scores.push_back(true_units.back().ey);
  }
  const auto [re_mean, re_std] = ranking_error(pred_scores, true_scores);

  double b_max = 0.0;
  std::vector<std::vector<double>> actual;
  for (const auto& u : true_units) {
    b_max += u.ec.back();
    actual.push_back(u.ey);
  }
  const double budget = b_max / 2.0;

  json report{{"units", n},
              {"budget", budget},
              {"ranking_error", {{"mean", re_mean}, {"std", re_std}}},
              {"area_scores", json::object()}};
  std::vector<std::string> outputs;
  for (const auto& pname : policies) {
    const auto kind = policy_kind_from_string(pname);
    const double score =
        evaluate_policy(kind, pred_units, actual, budget, 101, 1234);
    report["area_scores"][pname] = score;
    auto plan = allocate(kind, pred_units, budget);
    auto curve = uplift_curve(plan, actual, budget_grid(budget, 101));
    const auto curve_path = join(args.out_dir, "curve_" + pname + ".csv");
    write_curve_csv(curve, curve_path);
    outputs.push_back(curve_path);
  }

  const auto report_path = join(args.out_dir, "evaluate_report.json");
  spit(report_path, report.dump(2) + "\n");
  {
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "ranking_error_mean," << re_mean << "\n";
    csv << "ranking_error_std," << re_std << "\n";
    for (const auto& pname : policies)
      csv << "area_" << pname << ","
          << report["area_scores"][pname].get<double>() << "\n";
    spit(join(args.out_dir, "evaluate_report.csv"), csv.str());
  }

  mb.m["config"] = report;
  mb.output(report_path);
  mb.output(join(args.out_dir, "evaluate_report.csv"));
  for (const auto& p : outputs) mb.output(p);
  mb.write(join(args.out_dir, "evaluate_manifest.json"));
  std::cout << "ranking error " << re_mean << " +- " << re_std << "\n";
  return kOk;
}

int cmd_theorems(const CommonArgs& args) {
  ManifestBuilder mb("theorems");
  json raw = json::object();
  if (!args.config_path.empty()) {
    mb.input(args.config_path);
    raw = json::parse(slurp(args.config_path));
  }
  auto cfg = parse_theorem_config(raw);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  const double chain_min = raw.value("chain_min", 0.95);
  const double strict_min = raw.value("strict_min", 0.5);

  const auto report = theorem_harness(cfg);
  const auto report_path = join(args.out_dir, "dominance_report.json");
  auto j = json::parse(report.to_json());
  j["config"] = theorem_config_json(cfg);
  j["thresholds"] = {{"chain_min", chain_min}, {"strict_min", strict_min}};
  spit(report_path, j.dump(2) + "\n");

  mb.m["config"] = theorem_config_json(cfg);
  mb.m["seed"] = cfg.seed;
  mb.output(report_path);
  mb.write(join(args.out_dir, "theorems_manifest.json"));

  std::cout << "lemma " << report.lemma_rate << ", exchange "
            << report.exchange_rate << ", chain " << report.chain_rate
            << ", strict " << report.strict_rate << "\n";
  const bool pass = report.lemma_rate >= 1.0 && report.exchange_rate >= 1.0 &&
                    report.chain_rate >= chain_min &&
                    report.strict_rate > strict_min;
  return pass ? kOk : kThresholdError;
}

int cmd_sweep(const CommonArgs& args, std::size_t workers) {
  ManifestBuilder mb("sweep");
  mb.input(args.config_path);
  const auto cfg = json::parse(slurp(args.config_path));
  const auto seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
  if (seeds.empty()) throw std::invalid_argument("sweep: no seeds");

  auto synth_base = parse_synth_config(cfg.at("data"));
  const auto kind = cfg.value("model", std::string("xtnet"));
  const auto policy = cfg.value("policy", std::string("mcmv_aucc"));
  const std::size_t max_units = cfg.value("max_units", std::size_t{200});

  struct Row {
    std::uint64_t seed;
    double ranking_mean, ranking_std, area;
  };
  std::vector<Row> rows(seeds.size());
  std::vector<std::string> errors;
  std::mutex err_mu;

  std::size_t next = 0;
  std::mutex next_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lk(next_mu);
        if (next >= seeds.size()) return;
        i = next++;
      }
      try {
        SynthConfig sc = synth_base;
        sc.seed = seeds[i];
        auto synth = gen_synthetic(sc);

        auto tc = parse_train_config(cfg.value("train", json::object()));
        tc.seed = seeds[i];
        std::unique_ptr<UpliftModel> model;
        if (kind == "xtnet") {
          auto mc =
              parse_xtnet_config(cfg.value("model_config", json::object()));
          mc.levels = sc.levels;
          mc.feature_dim = synth.train.features.cols;
          mc.seed = seeds[i];
          model = make_xtnet(mc, synth.train);
        } else {
          auto bc = parse_baseline_config(
              cfg.value("model_config", json::object()), kind);
          bc.levels = sc.levels;
          bc.feature_dim = synth.train.features.cols;
          bc.seed = seeds[i];
          model = make_baseline(bc);
        }
        train(*model, synth.train, tc);

        const auto levels = sc.levels;
        const auto costs = CostModel::unit(levels);
        const std::size_t n = std::min(max_units, synth.test.size());
        std::vector<UnitInstance> pred_units;
        std::vector<std::vector<double>> pred_scores, true_scores, actual;
        double b_max = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
          const double* x =
              &synth.test.features.data[u * synth.test.features.cols];
          pred_units.push_back(unit_from_model(*model, x, levels, costs, u));
          auto tu = unit_from_oracle(synth.oracle, x, costs, u);
          pred_scores.push_back(pred_units.back().ey);
          true_scores.push_back(tu.ey);
          actual.push_back(tu.ey);
          b_max += tu.ec.back();
        }
        const auto [rm, rs] = ranking_error(pred_scores, true_scores);
        const double area =
            evaluate_policy(policy_kind_from_string(policy), pred_units, actual,
                            b_max / 2.0, 101, 1234);
        rows[i] = {seeds[i], rm, rs, area};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(err_mu);
        errors.push_back("seed " + std::to_string(seeds[i]) + ": " + e.what());
      }
    }
  };

  workers = std::max<std::size_t>(1, std::min(workers, seeds.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << e << "\n";
    return kNumericalError;
  }

  double rank_sum = 0.0, area_sum = 0.0;
  json per_seed = json::array();
  for (const auto& r : rows) {
    rank_sum += r.ranking_mean;
    area_sum += r.area;
    per_seed.push_back({{"seed", r.seed},
                        {"ranking_error_mean", r.ranking_mean},
                        {"ranking_error_std", r.ranking_std},
                        {"area_score", r.area}});
  }
  json report{{"model", kind},
              {"policy", policy},
              {"per_seed", per_seed},
              {"mean_ranking_error", rank_sum / rows.size()},
              {"mean_area_score", area_sum / rows.size()}};
  const auto report_path = join(args.out_dir, "sweep_report.json");
  spit(report_path, report.dump(2) + "\n");

  mb.m["config"] = cfg;
  mb.m["seed"] = seeds;
  mb.output(report_path);
  mb.write(join(args.out_dir, "sweep_manifest.json"));
  std::cout << "sweep of " << rows.size() << " seeds: mean area "
            << report["mean_area_score"].get<double>() << ", mean ranking error "
            << report["mean_ranking_error"].get<double>() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xtnet workbench"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string checkpoint_path, dataset_manifest;
  std::vector<std::string> policies;
  std::size_t max_units = 200;
  std::size_t workers = std::thread::hardware_concurrency();

  auto add_common = [&](CLI::App* sub, bool config_required) {
    sub->add_option("--config", args.config_path, "JSON config path")
        ->required(config_required);
    sub->add_option("--out-dir", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "override the config seed");
  };

  auto* gen = app.add_subcommand("generate", "synthesize a dataset");
  add_common(gen, true);
  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  add_common(tr, true);
  auto* ev = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
  add_common(ev, false);
  ev->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
  ev->add_option("--data", dataset_manifest,
                 "dataset.json written by generate")
      ->required();
  ev->add_option("--policy", policies, "policy to score (repeatable)");
  ev->add_option("--max-units", max_units, "test units to evaluate");
  auto* th = app.add_subcommand("theorems", "run the dominance harness");
  add_common(th, false);
  auto* sw = app.add_subcommand("sweep", "train/evaluate across seeds");
  add_common(sw, true);
  sw->add_option("--workers", workers, "parallel runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(args);
    if (tr->parsed()) return cmd_train(args);
    if (ev->parsed())
      return cmd_evaluate(args, checkpoint_path, dataset_manifest, policies,
                          max_units);
    if (th->parsed()) return cmd_theorems(args);
    if (sw->parsed()) return cmd_sweep(args, workers);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return kUsageError;
}
