#include "stormsel/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "stormsel/attribution.hpp"
#include "stormsel/citest.hpp"
#include "stormsel/config.hpp"
#include "stormsel/csv.hpp"
#include "stormsel/dataset.hpp"
#include "stormsel/discovery.hpp"
#include "stormsel/error.hpp"
#include "stormsel/model_io.hpp"
#include "stormsel/parallel.hpp"
#include "stormsel/pipeline.hpp"
#include "stormsel/rng.hpp"
#include "stormsel/synth.hpp"
#include "stormsel/version.hpp"

namespace stormsel {

namespace {

unsigned resolve_jobs(const CliContext& ctx, const Config& cfg) {
  if (ctx.jobs > 0) return ctx.jobs;
  const long long j = cfg.get_int("jobs", 0);
  if (j > 0) return static_cast<unsigned>(j);
  return default_jobs();
}

/// Collects output files and renders the run manifest. Nothing in the
/// manifest depends on job count or wall clock, so reruns are byte-identical.
class RunRecorder {
 public:
  RunRecorder(const CliContext& ctx, std::string command)
      : out_dir_(ctx.out_dir), command_(std::move(command)) {
    if (out_dir_.empty()) throw UserError("missing --out directory");
    if (!ctx.config_path.empty()) add_input(ctx.config_path);
  }

  void add_input(const std::string& path) {
    inputs_.emplace_back(path, file_digest_hex(path));
  }

  void write_output(const std::string& rel_path, const std::string& content) {
    write_text_file(out_dir_ + "/" + rel_path, content);
    outputs_.emplace_back(rel_path, bytes_digest_hex(content));
  }

  void note_output(const std::string& rel_path) {
    outputs_.emplace_back(rel_path, file_digest_hex(out_dir_ + "/" + rel_path));
  }

  void finish(std::uint64_t resolved_seed) {
    std::ostringstream os;
    os << "stormsel " << kVersion << " " << command_ << "\n";
    os << "seed " << resolved_seed << "\n";
    for (const auto& [path, digest] : inputs_) os << "input " << path << " " << digest << "\n";
    for (const auto& [path, digest] : outputs_) os << "output " << path << " " << digest << "\n";
    write_text_file(out_dir_ + "/run_manifest.txt", os.str());
  }

 private:
  std::string out_dir_;
  std::string command_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

struct LoadedPanel {
  AlignedPanel panel;  // aligned; standardized when standardize_now
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> files;  // absolute storm csv paths, manifest order
};

LoadedPanel load_panel_from_manifest(const std::string& manifest_path, double sigma_steps,
                                     const std::string& target_code, bool standardize_now,
                                     unsigned jobs) {
  const auto entries = load_manifest(manifest_path);
  std::vector<StormSeries> storms(entries.size());
  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    storms[i] = load_storm_csv(entries[i].path);
    storms[i].id = entries[i].storm_id;
  });

  LoadedPanel out;
  for (const auto& e : entries) out.files.push_back(e.path);

  // Life-cycle alignment applies when a pressure record exists; synthetic
  // panels carry none and are generated pre-aligned.
  bool any_mslp = false;
  for (const auto& s : storms) {
    for (const double v : s.mslp) {
      if (!std::isnan(v)) any_mslp = true;
    }
  }
  AlignedPanel panel;
  std::set<std::string> rejected;
  if (any_mslp) {
    AlignmentResult aligned = align_by_mslp_minimum(storms, sigma_steps);
    rejected.insert(aligned.rejected_ids.begin(), aligned.rejected_ids.end());
    panel = std::move(aligned.panel);
  } else {
    panel = assemble_unaligned(storms);
  }
  for (const auto& e : entries) {
    if (rejected.count(e.storm_id)) continue;
    (e.is_test ? out.test_ids : out.train_ids).push_back(e.storm_id);
  }
  set_panel_target(panel, target_code);
  out.panel = standardize_now ? standardize(std::move(panel), out.train_ids)
                              : std::move(panel);
  return out;
}

LinkAssumptions parse_assumptions(const Config& cfg, int lag_min, int lag_max) {
  LinkAssumptions out;
  auto parse_list = [&](const std::string& key, LinkStatus status) {
    for (const auto& item : cfg.get_string_list(key)) {
      const auto at = item.find('@');
      if (at == std::string::npos) {
        throw UserError("config " + cfg.origin() + ": '" + key + "' entries need code@lag or code@*, got '" +
                        item + "'");
      }
      const std::string code = item.substr(0, at);
      const std::string lag = item.substr(at + 1);
      if (lag == "*") {
        for (int l = lag_min; l <= lag_max; ++l) out.set({code, l}, status);
      } else {
        out.set({code, std::stoi(lag)}, status);
      }
    }
  };
  parse_list("forced", LinkStatus::forced);
  parse_list("forbidden", LinkStatus::forbidden);
  return out;
}

MlpConfig parse_mlp_config(const Config& cfg) {
  MlpConfig mc;
  if (cfg.has("mlp_hidden")) {
    mc.hidden.clear();
    for (const auto h : cfg.get_int_list("mlp_hidden")) mc.hidden.push_back(static_cast<int>(h));
    // keep the relu/relu/relu/tanh/linear pattern for 4 hidden layers,
    // otherwise relu everywhere with a linear head
    if (mc.hidden.size() != 4) {
      mc.activations.assign(mc.hidden.size(), Activation::relu);
      mc.activations.push_back(Activation::linear);
    }
  }
  mc.learning_rate = cfg.get_double("mlp_learning_rate", mc.learning_rate);
  mc.max_epochs = static_cast<int>(cfg.get_int("mlp_max_epochs", mc.max_epochs));
  mc.batch_size = static_cast<int>(cfg.get_int("mlp_batch_size", mc.batch_size));
  return mc;
}

const std::set<std::string> kDiscoverKeys = {
    "manifest", "target",  "lag_min",       "lag_max", "alphas", "folds",
    "seed",     "jobs",    "max_cond_size", "sigma_steps", "mode", "forced",
    "forbidden", "standardize_per_fold"};

const std::set<std::string> kExperimentKeys = [] {
  std::set<std::string> keys = kDiscoverKeys;
  keys.insert({"ks", "methods", "regressor", "threshold", "exclude", "mlp_hidden",
               "mlp_learning_rate", "mlp_max_epochs", "mlp_batch_size"});
  return keys;
}();

const std::set<std::string> kScreenKeys = {
    "manifest", "base",        "candidates",   "max_lead_hours", "step_hours",
    "dvar",     "significance", "min_intervals", "sigma_steps",   "jobs", "seed"};

const std::set<std::string> kShapKeys = {
    "manifest", "sigma_steps", "background_size", "n_coalitions", "seed", "jobs"};

}  // namespace

void cmd_synth(const CliContext& ctx) {
  RunRecorder rec(ctx, "synth");
  ScmSpec spec = ScmSpec::from_file(ctx.config_path);
  if (ctx.seed_override) spec.seed = *ctx.seed_override;

  const SynthPanel synth = generate_panel(spec);
  int n_test = std::max(0, std::min(spec.n_storms - 1, spec.n_storms / 5));
  for (const auto& rel : export_panel_csv(synth, ctx.out_dir, n_test)) {
    rec.note_output(rel);
  }
  rec.finish(spec.seed);
}

void cmd_discover(const CliContext& ctx) {
  RunRecorder rec(ctx, "discover");
  const Config cfg = Config::from_file(ctx.config_path);
  cfg.require_known_keys(kDiscoverKeys);
  cfg.require_present({"manifest", "target", "alphas"});

  const unsigned jobs = resolve_jobs(ctx, cfg);
  const std::uint64_t seed = ctx.seed_override.value_or(cfg.get_uint64("seed", 0));
  const int lag_min = static_cast<int>(cfg.get_int("lag_min", 0));
  const int lag_max = static_cast<int>(cfg.get_int("lag_max", lag_min));
  const int folds = static_cast<int>(cfg.get_int("folds", 7));
  const auto alphas = cfg.get_double_list("alphas");
  const auto mode = assumption_mode_from_string(cfg.get_string("mode", "noASSUMPS"));
  const LinkAssumptions assumptions = parse_assumptions(cfg, lag_min, lag_max);
  if (mode == AssumptionMode::withASSUMPS && assumptions.forced().empty()) {
    throw UserError("config " + cfg.origin() + ": mode withASSUMPS needs a 'forced' link list");
  }

  const std::string manifest = cfg.get_string("manifest");
  LoadedPanel loaded = load_panel_from_manifest(manifest, cfg.get_double("sigma_steps", 3.0),
                                                cfg.get_string("target"), true, jobs);
  rec.add_input(manifest);
  for (const auto& f : loaded.files) rec.add_input(f);

  const FoldSpec fold_spec = make_folds(loaded.train_ids, folds, derive_seed(seed, "folds"));

  MpcOptions mpc;
  mpc.lag_min = lag_min;
  mpc.lag_max = lag_max;
  mpc.max_cond_size = static_cast<int>(cfg.get_int("max_cond_size", 3));
  mpc.mode = mode;
  mpc.jobs = 1;

  struct Job {
    int fold;
    std::size_t alpha_idx;
  };
  std::vector<Job> plan;
  for (int f = 0; f < folds; ++f) {
    for (std::size_t a = 0; a < alphas.size(); ++a) plan.push_back({f, a});
  }
  std::vector<SelectedFeatureSet> sets(plan.size());
  parallel_for(plan.size(), jobs, [&](std::size_t i) {
    MpcOptions opt = mpc;
    opt.fold = plan[i].fold;
    opt.pc_alpha = alphas[plan[i].alpha_idx];
    sets[i] = mpc_select(loaded.panel, fold_spec.train_ids(plan[i].fold), assumptions, opt);
  });

  for (std::size_t i = 0; i < plan.size(); ++i) {
    std::ostringstream name;
    name << "features_fold" << plan[i].fold << "_alpha" << plan[i].alpha_idx << ".txt";
    rec.write_output(name.str(), sets[i].serialize());
  }
  rec.write_output("abacus.csv", abacus_csv(sets, alphas));
  rec.finish(seed);
}

namespace {

ExperimentPlan experiment_plan_from_config(const Config& cfg, std::uint64_t seed, unsigned jobs) {
  ExperimentPlan plan;
  plan.grid.alphas = cfg.get_double_list("alphas");
  for (const auto k : cfg.get_int_list("ks")) plan.grid.ks.push_back(static_cast<int>(k));
  plan.folds = static_cast<int>(cfg.get_int("folds", 7));
  plan.mode = assumption_mode_from_string(cfg.get_string("mode", "noASSUMPS"));
  plan.regressor = regressor_from_string(cfg.get_string("regressor", "mlr"));
  plan.shortlist_threshold = static_cast<int>(cfg.get_int("threshold", 3));
  plan.exclude = cfg.get_string_list("exclude");
  if (cfg.has("methods")) {
    plan.methods.clear();
    for (const auto& m : cfg.get_string_list("methods")) {
      plan.methods.push_back(method_from_string(m));
    }
  }
  plan.options.lag_min = static_cast<int>(cfg.get_int("lag_min", 0));
  plan.options.lag_max = static_cast<int>(cfg.get_int("lag_max", plan.options.lag_min));
  plan.options.max_cond_size = static_cast<int>(cfg.get_int("max_cond_size", 3));
  plan.options.assumptions = parse_assumptions(cfg, plan.options.lag_min, plan.options.lag_max);
  plan.options.mlp = parse_mlp_config(cfg);
  plan.options.seed = seed;
  plan.options.jobs = jobs;
  if (plan.mode == AssumptionMode::withASSUMPS && plan.options.assumptions.forced().empty()) {
    throw UserError("config " + cfg.origin() + ": mode withASSUMPS needs a 'forced' link list");
  }
  return plan;
}

}  // namespace

void cmd_experiment(const CliContext& ctx) {
  RunRecorder rec(ctx, "experiment");
  const Config cfg = Config::from_file(ctx.config_path);
  cfg.require_known_keys(kExperimentKeys);
  cfg.require_present({"manifest", "target"});

  const unsigned jobs = resolve_jobs(ctx, cfg);
  const std::uint64_t seed = ctx.seed_override.value_or(cfg.get_uint64("seed", 0));
  const ExperimentPlan plan = experiment_plan_from_config(cfg, seed, jobs);

  const std::string manifest = cfg.get_string("manifest");
  LoadedPanel loaded = load_panel_from_manifest(manifest, cfg.get_double("sigma_steps", 3.0),
                                                cfg.get_string("target"), true, jobs);
  rec.add_input(manifest);
  for (const auto& f : loaded.files) rec.add_input(f);

  FoldSpec folds = make_folds(loaded.train_ids, plan.folds, derive_seed(seed, "folds"));
  folds.test_ids = loaded.test_ids;

  const ExperimentResult result = run_experiment(loaded.panel, folds, plan);

  rec.write_output("fold_reports.csv", fold_report_csv(result.reports));
  rec.write_output("shortlist.csv", shortlist_csv(result.shortlist));
  rec.write_output("comparison.csv", comparison_csv(result.reports));
  rec.finish(seed);
}

void cmd_screen(const CliContext& ctx) {
  RunRecorder rec(ctx, "screen");
  const Config cfg = Config::from_file(ctx.config_path);
  cfg.require_known_keys(kScreenKeys);
  cfg.require_present({"manifest", "base", "candidates"});

  const unsigned jobs = resolve_jobs(ctx, cfg);
  const std::string manifest = cfg.get_string("manifest");
  // screening regresses raw-unit targets on standardized predictors; the
  // panel target is per-interval, so any DELV placeholder works here
  LoadedPanel loaded = load_panel_from_manifest(manifest, cfg.get_double("sigma_steps", 3.0),
                                                "DELV24", true, jobs);
  rec.add_input(manifest);
  for (const auto& f : loaded.files) rec.add_input(f);

  ScreeningOptions opt;
  opt.max_lead_hours = static_cast<int>(cfg.get_int("max_lead_hours", 168));
  opt.step_hours = static_cast<int>(cfg.get_int("step_hours", 6));
  opt.min_delta_r2 = cfg.get_double("dvar", 0.002);
  opt.significance = cfg.get_double("significance", 0.99);
  opt.required_intervals = static_cast<int>(cfg.get_int("min_intervals", 5));
  opt.storm_ids = loaded.train_ids;

  const ScreeningReport report = screen_predictors(
      loaded.panel, cfg.get_string_list("base"), cfg.get_string_list("candidates"), opt);
  rec.write_output("screening.csv", screening_csv(report));
  rec.finish(ctx.seed_override.value_or(cfg.get_uint64("seed", 0)));
}

void cmd_shap(const CliContext& ctx, const std::string& model_a_path,
              const std::string& model_b_path) {
  RunRecorder rec(ctx, "shap");
  const Config cfg = Config::from_file(ctx.config_path);
  cfg.require_known_keys(kShapKeys);
  cfg.require_present({"manifest"});

  const unsigned jobs = resolve_jobs(ctx, cfg);
  const std::uint64_t seed = ctx.seed_override.value_or(cfg.get_uint64("seed", 0));

  const SavedModel model_a = load_model(model_a_path);
  const SavedModel model_b = load_model(model_b_path);
  rec.add_input(model_a_path);
  rec.add_input(model_b_path);
  if (model_a.target_code != model_b.target_code) {
    throw UserError("models target different codes: " + model_a.target_code + " vs " +
                    model_b.target_code);
  }

  // common/added from the two feature lists; A must be a subset of B
  std::vector<Feature> common = model_a.features();
  std::vector<Feature> added;
  {
    std::set<Feature> a(common.begin(), common.end());
    std::set<Feature> b(model_b.features().begin(), model_b.features().end());
    std::vector<Feature> missing;
    for (const auto& f : a) {
      if (!b.count(f)) missing.push_back(f);
    }
    if (!missing.empty()) {
      throw UserError("model A features missing from model B: " + join_labels(missing, ","));
    }
    for (const auto& f : b) {
      if (!a.count(f)) added.push_back(f);
    }
  }

  const std::string manifest = cfg.get_string("manifest");
  LoadedPanel loaded = load_panel_from_manifest(manifest, cfg.get_double("sigma_steps", 3.0),
                                                model_a.target_code, false, jobs);
  rec.add_input(manifest);
  for (const auto& f : loaded.files) rec.add_input(f);

  // raw gather over B's (superset) features, standardize per model context
  const std::vector<Feature>& union_feats = model_b.features();
  const DesignMatrix raw_test = gather_design(loaded.panel, union_feats, loaded.test_ids);
  const DesignMatrix raw_train = gather_design(loaded.panel, union_feats, loaded.train_ids);
  if (raw_test.X.rows() == 0) throw UserError("no complete test rows to attribute");
  if (raw_train.X.rows() == 0) throw UserError("no complete training rows for the background");

  auto standardize_with = [&](const SavedModel& m, const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd out(raw.rows(), static_cast<Eigen::Index>(m.features().size()));
    for (std::size_t j = 0; j < m.features().size(); ++j) {
      const auto& f = m.features()[j];
      Eigen::Index src = -1;
      for (std::size_t u = 0; u < union_feats.size(); ++u) {
        if (union_feats[u] == f) src = static_cast<Eigen::Index>(u);
      }
      const auto it = m.standardization.find(f.code);
      Eigen::VectorXd col = raw.col(src);
      if (it != m.standardization.end()) {
        col = (col.array() - it->second.mean) / it->second.std;
      }
      out.col(static_cast<Eigen::Index>(j)) = col;
    }
    return out;
  };

  const long long bg_size = cfg.get_int("background_size", 300);
  Eigen::MatrixXd bg_rows;
  {
    const Eigen::Index n = raw_train.X.rows();
    const Eigen::Index take = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(bg_size));
    Rng rng(derive_seed(seed, "background"));
    const auto pick = rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                     static_cast<std::size_t>(take));
    bg_rows.resize(take, raw_train.X.cols());
    for (Eigen::Index i = 0; i < take; ++i) {
      bg_rows.row(i) = raw_train.X.row(static_cast<Eigen::Index>(pick[static_cast<std::size_t>(i)]));
    }
  }

  KernelShapOptions shap_opt;
  shap_opt.n_coalitions = static_cast<int>(cfg.get_int("n_coalitions", 0));
  shap_opt.seed = derive_seed(seed, "shap");
  shap_opt.jobs = jobs;

  auto run_one = [&](const SavedModel& m) {
    const Eigen::MatrixXd inst = standardize_with(m, raw_test.X);
    const Eigen::MatrixXd bg = standardize_with(m, bg_rows);
    ModelFn fn = [&m](const Eigen::MatrixXd& X) { return model_predict(m, X); };
    return kernel_shap(fn, bg, inst, m.features(), shap_opt);
  };
  const ShapAttribution shap_a = run_one(model_a);
  const ShapAttribution shap_b = run_one(model_b);

  auto attribution_csv = [](const ShapAttribution& s) {
    std::ostringstream os;
    os << "instance";
    for (const auto& f : s.features) os << "," << f.label();
    os << ",prediction\n";
    os << "base_value," << format_double(s.base_value);
    for (std::size_t j = 1; j < s.features.size(); ++j) os << ",";
    os << ",\n";
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
      os << i;
      for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
        os << "," << format_double(s.values(i, j));
      }
      os << "," << format_double(s.predictions[i]) << "\n";
    }
    return os.str();
  };
  rec.write_output("shap_a.csv", attribution_csv(shap_a));
  rec.write_output("shap_b.csv", attribution_csv(shap_b));

  // decompose_difference verifies the two attributions saw identical values
  // on the common columns, i.e. the models share standardization for them.
  const DifferenceDecomposition dec = decompose_difference(shap_a, shap_b, common, added);
  {
    std::ostringstream os;
    os << "instance,delta_pred,delta_base";
    for (const auto& f : dec.common) os << ",common:" << f.label();
    for (const auto& f : dec.added) os << ",added:" << f.label();
    os << ",residual\n";
    for (Eigen::Index i = 0; i < dec.delta_pred.size(); ++i) {
      os << i << "," << format_double(dec.delta_pred[i]) << ","
         << format_double(dec.delta_base);
      for (Eigen::Index j = 0; j < dec.common_terms.cols(); ++j) {
        os << "," << format_double(dec.common_terms(i, j));
      }
      for (Eigen::Index j = 0; j < dec.added_terms.cols(); ++j) {
        os << "," << format_double(dec.added_terms(i, j));
      }
      os << "," << format_double(dec.residual[i]) << "\n";
    }
    rec.write_output("decomposition.csv", os.str());
  }
  rec.finish(seed);
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("stormsel");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"causal predictor discovery and statistical intensity forecasting"};
  app.require_subcommand(1);

  CliContext ctx;
  std::string model_a, model_b;
  long long seed_flag = -1;
  long long jobs_flag = 0;

  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    sub->add_option("--config", ctx.config_path, "config file path")->required(config_required);
    sub->add_option("--out", ctx.out_dir, "output directory")->required();
    sub->add_option("--seed", seed_flag, "override the config seed");
    sub->add_option("--jobs", jobs_flag, "worker threads (default: cores)");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic storm panel from an SCM spec");
  add_common(synth);
  CLI::App* discover = app.add_subcommand("discover", "per-fold alpha sweep and abacus table");
  add_common(discover);
  CLI::App* experiment =
      app.add_subcommand("experiment", "full cross-validated feature-selection comparison");
  add_common(experiment);
  CLI::App* shap = app.add_subcommand("shap", "Kernel SHAP attributions and model-difference decomposition");
  add_common(shap);
  shap->add_option("model_a", model_a, "baseline model file")->required();
  shap->add_option("model_b", model_b, "extended model file")->required();
  CLI::App* screen = app.add_subcommand("screen", "three-condition operational predictor screening");
  add_common(screen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (seed_flag >= 0) ctx.seed_override = static_cast<std::uint64_t>(seed_flag);
  if (jobs_flag > 0) ctx.jobs = static_cast<unsigned>(jobs_flag);

  try {
    if (synth->parsed()) {
      cmd_synth(ctx);
    } else if (discover->parsed()) {
      cmd_discover(ctx);
    } else if (experiment->parsed()) {
      cmd_experiment(ctx);
    } else if (shap->parsed()) {
      cmd_shap(ctx, model_a, model_b);
    } else if (screen->parsed()) {
      cmd_screen(ctx);
    }
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace stormsel
