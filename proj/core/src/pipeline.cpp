#include "stormsel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "stormsel/citest.hpp"
#include "stormsel/csv.hpp"
#include "stormsel/error.hpp"
#include "stormsel/log.hpp"
#include "stormsel/parallel.hpp"
#include "stormsel/rng.hpp"

namespace stormsel {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(Method m) {
  switch (m) {
    case Method::causal: return "causal";
    case Method::correlation: return "correlation";
    case Method::forest: return "forest";
    default: return "none";
  }
}

const char* to_string(Regressor r) { return r == Regressor::mlp ? "mlp" : "mlr"; }

Method method_from_string(const std::string& s) {
  if (s == "causal") return Method::causal;
  if (s == "correlation") return Method::correlation;
  if (s == "forest") return Method::forest;
  if (s == "none") return Method::none;
  throw ValidationError("unknown method '" + s + "'");
}

Regressor regressor_from_string(const std::string& s) {
  if (s == "mlr") return Regressor::mlr;
  if (s == "mlp") return Regressor::mlp;
  throw ValidationError("unknown regressor '" + s + "'");
}

namespace {

Metrics safe_evaluate(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() < 2) {
    Metrics m;
    m.n = static_cast<long>(y_true.size());
    m.r2_defined = false;
    m.r2 = kNaN;
    m.pcc = 0.0;
    m.mae = y_true.size() == 1 ? std::fabs(y_true[0] - y_pred[0]) : 0.0;
    return m;
  }
  return evaluate(y_true, y_pred);
}

std::vector<int> window_lags(const PipelineOptions& options) {
  std::vector<int> lags;
  for (int lag = options.lag_min; lag <= options.lag_max; ++lag) lags.push_back(lag);
  return lags;
}

std::vector<Feature> all_features_at_lag(const AlignedPanel& panel, int lag) {
  std::vector<std::string> codes = panel.codes;
  std::sort(codes.begin(), codes.end());
  std::vector<Feature> out;
  for (const auto& code : codes) {
    if (code == panel.target_code && lag == 0) continue;
    out.push_back({code, lag});
  }
  return out;
}

}  // namespace

FoldReport run_fold(const AlignedPanel& panel, const FoldSpec& folds, int fold,
                    Method method, AssumptionMode mode, const Grid& grid,
                    Regressor regressor, const PipelineOptions& options) {
  if (fold < 0 || fold >= folds.k) {
    throw ValidationError("run_fold: fold " + std::to_string(fold) + " outside k=" +
                          std::to_string(folds.k));
  }
  const auto train_ids = folds.train_ids(fold);
  const auto val_ids = folds.validation_ids(fold);
  const auto& test_ids = folds.test_ids;

  FoldReport report;
  report.fold = fold;
  report.method = method;
  report.mode = mode;
  report.regressor = regressor;
  report.target_code = panel.target_code;

  // One feature set per grid point.
  std::vector<GridEntry> entries;
  if (method == Method::causal) {
    if (grid.alphas.empty()) throw ValidationError("run_fold: causal grid needs alphas");
    MpcOptions mpc;
    mpc.lag_min = options.lag_min;
    mpc.lag_max = options.lag_max;
    mpc.max_cond_size = options.max_cond_size;
    mpc.mode = mode;
    mpc.fold = fold;
    mpc.jobs = options.jobs;
    const auto sets = sweep_alpha(panel, train_ids, options.assumptions, mpc, grid.alphas);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      GridEntry e;
      e.pc_alpha = grid.alphas[i];
      e.features = sets[i].members;
      entries.push_back(std::move(e));
    }
  } else if (method == Method::correlation || method == Method::forest) {
    if (grid.ks.empty()) throw ValidationError("run_fold: baseline grid needs ks");
    FeatureRanking ranking;
    if (method == Method::correlation) {
      ranking = rank_by_correlation(panel, window_lags(options), train_ids);
    } else {
      ForestConfig fc = options.forest;
      fc.seed = derive_seed(options.seed, "forest", static_cast<std::uint64_t>(fold));
      fc.jobs = options.jobs;
      ranking = rank_by_forest_importance(panel, window_lags(options), train_ids, fc);
    }
    const auto sets = top_k_sets(ranking, grid.ks);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      GridEntry e;
      e.k = grid.ks[i];
      for (const auto& f : sets[i]) e.features.push_back({f, ranking.scores.at(f)});
      entries.push_back(std::move(e));
    }
  } else {
    GridEntry e;
    e.k = 0;
    for (const auto& f : all_features_at_lag(panel, options.lag_min)) {
      e.features.push_back({f, 0.0});
    }
    entries.push_back(std::move(e));
  }

  // Fit and evaluate each entry.
  for (std::size_t i = 0; i < entries.size(); ++i) {
    GridEntry& e = entries[i];
    if (e.features.empty()) {
      e.flag = "empty-set";
      continue;
    }
    std::vector<Feature> feats;
    for (const auto& m : e.features) feats.push_back(m.feature);
    try {
      const DesignMatrix train = gather_design(panel, feats, train_ids);
      const DesignMatrix val = gather_design(panel, feats, val_ids);
      const DesignMatrix test = gather_design(panel, feats, test_ids);
      Eigen::VectorXd pred_train, pred_val, pred_test;
      if (regressor == Regressor::mlr) {
        const MlrModel model = fit_mlr(train.X, train.y, feats);
        pred_train = predict(model, train.X);
        pred_val = predict(model, val.X);
        pred_test = predict(model, test.X);
      } else {
        MlpConfig mc = options.mlp;
        mc.seed = derive_seed(options.seed, "mlp",
                              static_cast<std::uint64_t>(fold) * 1000003ull + i);
        const MlpModel model = fit_mlp(train.X, train.y, val.X, val.y, mc, feats);
        pred_train = predict(model, train.X);
        pred_val = predict(model, val.X);
        pred_test = predict(model, test.X);
      }
      e.train = safe_evaluate(train.y, pred_train);
      e.validation = safe_evaluate(val.y, pred_val);
      e.test = safe_evaluate(test.y, pred_test);
    } catch (const std::exception& ex) {
      e.flag = std::string("fit-error: ") + ex.what();
      warn("fold " + std::to_string(fold) + " " + to_string(method) + " entry " +
           std::to_string(i) + " skipped: " + ex.what());
    }
  }

  // Best entry: highest validation r2; ties by PCC, then fewer features,
  // then grid order.
  int best = -1;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const GridEntry& e = entries[i];
    if (!e.flag.empty() || !e.validation.r2_defined) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const GridEntry& b = entries[static_cast<std::size_t>(best)];
    if (e.validation.r2 > b.validation.r2 ||
        (e.validation.r2 == b.validation.r2 &&
         (e.validation.pcc > b.validation.pcc ||
          (e.validation.pcc == b.validation.pcc && e.features.size() < b.features.size())))) {
      best = static_cast<int>(i);
    }
  }
  report.entries = std::move(entries);
  report.best_entry = best;
  return report;
}

Shortlist aggregate_shortlist(const std::vector<std::vector<Feature>>& best_sets,
                              int threshold, const std::vector<std::string>& exclude) {
  if (best_sets.empty()) throw ValidationError("aggregate_shortlist: no best sets");
  const std::set<std::string> excluded(exclude.begin(), exclude.end());
  std::map<std::string, int> counts;
  for (const auto& set : best_sets) {
    std::set<std::string> codes;  // lags collapse: one count per fold
    for (const auto& f : set) codes.insert(f.code);
    for (const auto& c : codes) counts[c]++;
  }
  Shortlist out;
  out.threshold = threshold;
  for (const auto& [code, count] : counts) {
    if (count > threshold && !excluded.count(code)) {
      out.members.push_back({code, count});
    }
  }
  return out;
}

std::vector<std::string> assemble_ships_plus(const std::vector<std::string>& base,
                                             const Shortlist& shortlist) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& code : base) {
    if (seen.insert(code).second) out.push_back(code);
  }
  for (const auto& m : shortlist.members) {
    if (seen.insert(m.code).second) out.push_back(m.code);
  }
  return out;
}

// -- screening -----------------------------------------------------------------

namespace {

/// Design rows for one lead time: base (+candidates) at lag 0 vs the
/// lead-specific intensity change, complete cases across training storms.
DesignMatrix gather_for_lead(const AlignedPanel& panel, const std::vector<Feature>& feats,
                             const std::vector<std::string>& ids, int lead_hours) {
  std::vector<int> cols;
  for (const auto& f : feats) {
    const int j = panel.code_index(f.code);
    if (j < 0) throw ValidationError("screening: unknown predictor '" + f.code + "'");
    cols.push_back(j);
  }
  const Eigen::Index lead = lead_hours / 6;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> ys;
  for (const auto& id : ids) {
    const auto* storm = panel.storm_by_id(id);
    if (!storm) throw ValidationError("screening: unknown storm id '" + id + "'");
    const Eigen::Index L = storm->vmax.size();
    for (Eigen::Index t = 0; t + lead < L; ++t) {
      if (std::isnan(storm->vmax[t]) || std::isnan(storm->vmax[t + lead])) continue;
      Eigen::VectorXd row(static_cast<Eigen::Index>(feats.size()));
      bool ok = true;
      for (std::size_t j = 0; j < feats.size(); ++j) {
        const double v = storm->values(t, cols[j]);
        if (std::isnan(v)) {
          ok = false;
          break;
        }
        row[static_cast<Eigen::Index>(j)] = v;
      }
      if (!ok) continue;
      rows.push_back(std::move(row));
      ys.push_back(storm->vmax[t + lead] - storm->vmax[t]);
    }
  }
  DesignMatrix out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feats.size()));
  out.y.resize(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = rows[i];
    out.y[static_cast<Eigen::Index>(i)] = ys[i];
  }
  return out;
}

double training_r2(const MlrModel& model, const DesignMatrix& d) {
  return safe_evaluate(d.y, predict(model, d.X)).r2;
}

/// kth-largest |t| over usable intervals; 0 when fewer than k values exist.
double kth_best_abs_t(const std::vector<double>& ts, int k) {
  std::vector<double> mags;
  for (const double t : ts) {
    if (std::isfinite(t)) mags.push_back(std::fabs(t));
  }
  if (static_cast<int>(mags.size()) < k) return 0.0;
  std::nth_element(mags.begin(), mags.begin() + (k - 1), mags.end(), std::greater<>());
  return mags[static_cast<std::size_t>(k - 1)];
}

}  // namespace

ScreeningReport screen_predictors(const AlignedPanel& panel,
                                  const std::vector<std::string>& base_codes,
                                  const std::vector<std::string>& candidate_codes,
                                  const ScreeningOptions& options) {
  if (options.max_lead_hours < options.step_hours || options.step_hours <= 0 ||
      options.max_lead_hours % options.step_hours != 0) {
    throw ValidationError("screening: bad interval grid");
  }
  std::vector<std::string> ids = options.storm_ids;
  if (ids.empty()) ids = panel.storm_ids();

  std::vector<std::string> candidates = candidate_codes;
  std::sort(candidates.begin(), candidates.end());

  std::vector<Feature> base;
  for (const auto& c : base_codes) base.push_back({c, 0});

  ScreeningReport report;
  for (int h = options.step_hours; h <= options.max_lead_hours; h += options.step_hours) {
    report.interval_hours.push_back(h);
  }
  const std::size_t n_intervals = report.interval_hours.size();

  // Base fits per interval.
  std::vector<double> base_r2(n_intervals, kNaN);
  std::vector<bool> interval_usable(n_intervals, false);
  std::vector<DesignMatrix> base_designs(n_intervals);
  for (std::size_t r = 0; r < n_intervals; ++r) {
    base_designs[r] = gather_for_lead(panel, base, ids, report.interval_hours[r]);
    if (base_designs[r].X.rows() <
        static_cast<Eigen::Index>(base.size() + candidates.size()) + 8) {
      continue;  // too short for meaningful fits at this lead
    }
    const MlrModel model = fit_mlr(base_designs[r].X, base_designs[r].y, base);
    base_r2[r] = training_r2(model, base_designs[r]);
    interval_usable[r] = true;
  }

  // Conditions 1 and 2, one candidate at a time.
  report.candidates.resize(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    ScreeningCandidate& out = report.candidates[c];
    out.code = candidates[c];
    out.intervals.resize(n_intervals);
    std::vector<Feature> aug = base;
    aug.push_back({candidates[c], 0});
    for (std::size_t r = 0; r < n_intervals; ++r) {
      ScreeningIntervalStat& st = out.intervals[r];
      st.lead_hours = report.interval_hours[r];
      if (!interval_usable[r]) continue;
      st.usable = true;
      const DesignMatrix d = gather_for_lead(panel, aug, ids, report.interval_hours[r]);
      try {
        const MlrModel model = fit_mlr(d.X, d.y, aug);
        st.delta_r2 = training_r2(model, d) - base_r2[r];
        st.t_alone = model.t_stats[model.t_stats.size() - 1];
        const double crit =
            student_t_critical(options.significance, static_cast<double>(model.df_residual));
        st.significant_alone = std::isfinite(st.t_alone) && std::fabs(st.t_alone) >= crit;
      } catch (const ValidationError&) {
        // collinear with the base: adding it cannot explain new variance
        st.delta_r2 = 0.0;
        st.t_alone = 0.0;
        st.significant_alone = false;
        out.rank_deficient = true;
      }
    }

    // condition 1: best mean delta-R2 over required_intervals consecutive
    // usable intervals
    double best_window = -std::numeric_limits<double>::infinity();
    const int w = options.required_intervals;
    for (std::size_t r = 0; r + static_cast<std::size_t>(w) <= n_intervals; ++r) {
      double sum = 0.0;
      bool all_usable = true;
      for (int j = 0; j < w; ++j) {
        const auto& st = out.intervals[r + static_cast<std::size_t>(j)];
        if (!st.usable) {
          all_usable = false;
          break;
        }
        sum += st.delta_r2;
      }
      if (all_usable) best_window = std::max(best_window, sum / static_cast<double>(w));
    }
    out.best_window_mean_delta = std::isfinite(best_window) ? best_window : 0.0;
    out.cond1 = std::isfinite(best_window) && best_window >= options.min_delta_r2;

    int sig_count = 0;
    for (const auto& st : out.intervals) {
      if (st.usable && st.significant_alone) ++sig_count;
    }
    out.cond2 = sig_count >= options.required_intervals;
  }

  // Step 3: joint refit with every passer, backward elimination.
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (report.candidates[c].cond1 && report.candidates[c].cond2) active.push_back(c);
  }

  while (!active.empty()) {
    std::vector<Feature> joint = base;
    for (const std::size_t c : active) joint.push_back({candidates[c], 0});

    // per-candidate joint t statistics across intervals
    std::map<std::size_t, std::vector<double>> joint_ts;
    for (const std::size_t c : active) joint_ts[c] = {};
    bool rank_trouble = false;
    std::size_t dropped_for_rank = 0;

    for (std::size_t r = 0; r < n_intervals && !rank_trouble; ++r) {
      if (!interval_usable[r]) continue;
      const DesignMatrix d = gather_for_lead(panel, joint, ids, report.interval_hours[r]);
      // detect dependent candidate columns before fitting
      Eigen::MatrixXd design(d.X.rows(), d.X.cols() + 1);
      design.col(0).setOnes();
      design.rightCols(d.X.cols()) = d.X;
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
      qr.setThreshold(1e-10);
      if (qr.rank() < design.cols()) {
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < perm.size(); ++i) {
          const Eigen::Index col = perm[i];
          const Eigen::Index first_cand = 1 + static_cast<Eigen::Index>(base.size());
          if (col >= first_cand) {
            dropped_for_rank = active[static_cast<std::size_t>(col - first_cand)];
            rank_trouble = true;
            break;
          }
        }
        if (!rank_trouble) {
          throw ValidationError("screening: base predictor set is rank-deficient at lead " +
                                std::to_string(report.interval_hours[r]) + "h");
        }
        break;
      }
      const MlrModel model = fit_mlr(d.X, d.y, joint);
      const double crit =
          student_t_critical(options.significance, static_cast<double>(model.df_residual));
      for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t c = active[a];
        const double t = model.t_stats[static_cast<Eigen::Index>(base.size() + a)];
        joint_ts[c].push_back(t);
        auto& st = report.candidates[c].intervals[r];
        st.t_joint = t;
        st.significant_joint = std::isfinite(t) && std::fabs(t) >= crit;
      }
    }

    if (rank_trouble) {
      report.candidates[dropped_for_rank].rank_deficient = true;
      report.elimination_order.push_back(candidates[dropped_for_rank]);
      warn("screening: candidate '" + candidates[dropped_for_rank] +
           "' dropped (collinear in joint refit)");
      active.erase(std::find(active.begin(), active.end(), dropped_for_rank));
      continue;
    }

    // does every active candidate satisfy the condition-2 rule jointly?
    bool all_pass = true;
    std::size_t weakest = active.front();
    double weakest_metric = std::numeric_limits<double>::infinity();
    for (const std::size_t c : active) {
      int sig = 0;
      for (std::size_t r = 0; r < n_intervals; ++r) {
        const auto& st = report.candidates[c].intervals[r];
        if (st.usable && st.significant_joint) ++sig;
      }
      if (sig < options.required_intervals) all_pass = false;
      const double metric = kth_best_abs_t(joint_ts[c], options.required_intervals);
      if (metric < weakest_metric) {
        weakest_metric = metric;
        weakest = c;
      }
    }
    if (all_pass) {
      for (const std::size_t c : active) {
        report.candidates[c].cond3 = true;
        report.candidates[c].retained = true;
        report.retained.push_back(candidates[c]);
      }
      break;
    }
    report.elimination_order.push_back(candidates[weakest]);
    active.erase(std::find(active.begin(), active.end(), weakest));
  }
  return report;
}

// -- experiment orchestration ----------------------------------------------------

ExperimentResult run_experiment(const AlignedPanel& panel, const FoldSpec& folds,
                                const ExperimentPlan& plan) {
  struct Cell {
    Method method;
    int fold;
  };
  std::vector<Cell> cells;
  for (const auto method : plan.methods) {
    for (int f = 0; f < plan.folds; ++f) cells.push_back({method, f});
  }

  ExperimentResult result;
  result.reports.resize(cells.size());
  PipelineOptions inner = plan.options;
  inner.jobs = 1;  // cells are the unit of parallelism
  parallel_for(cells.size(), plan.options.jobs, [&](std::size_t i) {
    result.reports[i] = run_fold(panel, folds, cells[i].fold, cells[i].method, plan.mode,
                                 plan.grid, plan.regressor, inner);
  });

  for (const auto& report : result.reports) {
    if (report.method != Method::causal || report.best_entry < 0) continue;
    std::vector<Feature> feats;
    for (const auto& m : report.entries[static_cast<std::size_t>(report.best_entry)].features) {
      feats.push_back(m.feature);
    }
    result.causal_best_sets.push_back(std::move(feats));
  }
  if (!result.causal_best_sets.empty()) {
    result.shortlist =
        aggregate_shortlist(result.causal_best_sets, plan.shortlist_threshold, plan.exclude);
  } else {
    result.shortlist.threshold = plan.shortlist_threshold;
  }
  return result;
}

// -- CSV renderings ----------------------------------------------------------------

namespace {

void append_metrics(std::ostringstream& os, const Metrics& m) {
  os << "," << (m.r2_defined ? format_double(m.r2) : "") << "," << format_double(m.pcc)
     << "," << format_double(m.mae) << "," << m.n;
}

}  // namespace

std::string fold_report_csv(const std::vector<FoldReport>& reports) {
  std::ostringstream os;
  os << "target,fold,method,mode,regressor,grid_param,n_features,features,"
        "train_r2,train_pcc,train_mae,train_n,"
        "val_r2,val_pcc,val_mae,val_n,"
        "test_r2,test_pcc,test_mae,test_n,flag,best\n";
  for (const auto& rep : reports) {
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
      const auto& e = rep.entries[i];
      os << rep.target_code << "," << rep.fold << "," << to_string(rep.method) << ","
         << to_string(rep.mode) << "," << to_string(rep.regressor) << ",";
      if (rep.method == Method::causal) {
        os << format_double(e.pc_alpha);
      } else {
        os << e.k;
      }
      std::vector<Feature> feats;
      for (const auto& m : e.features) feats.push_back(m.feature);
      os << "," << feats.size() << "," << join_labels(feats);
      append_metrics(os, e.train);
      append_metrics(os, e.validation);
      append_metrics(os, e.test);
      os << "," << e.flag << ","
         << (static_cast<int>(i) == rep.best_entry ? "1" : "0") << "\n";
    }
  }
  return os.str();
}

std::string abacus_csv(const std::vector<SelectedFeatureSet>& sets,
                       const std::vector<double>& alphas) {
  // presence counts (over folds) per predictor code, lags collapsed
  std::set<std::string> codes;
  for (const auto& s : sets) {
    for (const auto& m : s.members) codes.insert(m.feature.code);
  }
  std::ostringstream os;
  os << "predictor";
  for (const double a : alphas) os << "," << format_double(a);
  os << "\n";
  for (const auto& code : codes) {
    os << code;
    for (const double a : alphas) {
      int count = 0;
      for (const auto& s : sets) {
        if (s.pc_alpha != a) continue;
        for (const auto& m : s.members) {
          if (m.feature.code == code) {
            ++count;
            break;
          }
        }
      }
      os << "," << count;
    }
    os << "\n";
  }
  return os.str();
}

std::string shortlist_csv(const Shortlist& shortlist) {
  std::ostringstream os;
  os << "predictor,count_of_folds,threshold\n";
  for (const auto& m : shortlist.members) {
    os << m.code << "," << m.count << "," << shortlist.threshold << "\n";
  }
  return os.str();
}

std::string comparison_csv(const std::vector<FoldReport>& reports) {
  // median/quartiles of best-entry test r2 per (target, method)
  struct Key {
    std::string target;
    std::string method;
    bool operator<(const Key& o) const {
      return target != o.target ? target < o.target : method < o.method;
    }
  };
  std::map<Key, std::vector<double>> by_key;
  for (const auto& rep : reports) {
    if (rep.best_entry < 0) continue;
    const auto& e = rep.entries[static_cast<std::size_t>(rep.best_entry)];
    if (!e.test.r2_defined) continue;
    by_key[{rep.target_code, to_string(rep.method)}].push_back(e.test.r2);
  }
  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return kNaN;
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
  };
  std::ostringstream os;
  os << "target,method,n_folds,test_r2_q1,test_r2_median,test_r2_q3\n";
  for (const auto& [key, values] : by_key) {
    os << key.target << "," << key.method << "," << values.size() << ","
       << format_double(quantile(values, 0.25)) << ","
       << format_double(quantile(values, 0.5)) << ","
       << format_double(quantile(values, 0.75)) << "\n";
  }
  return os.str();
}

std::string screening_csv(const ScreeningReport& report) {
  std::ostringstream os;
  os << "candidate,interval_hours,usable,delta_r2,t_alone,significant_alone,"
        "t_joint,significant_joint,best_window_mean_delta,cond1,cond2,cond3,retained\n";
  for (const auto& c : report.candidates) {
    for (const auto& st : c.intervals) {
      os << c.code << "," << st.lead_hours << "," << (st.usable ? 1 : 0) << ","
         << format_double(st.delta_r2) << "," << format_double(st.t_alone) << ","
         << (st.significant_alone ? 1 : 0) << "," << format_double(st.t_joint) << ","
         << (st.significant_joint ? 1 : 0) << "," << format_double(c.best_window_mean_delta)
         << "," << (c.cond1 ? 1 : 0) << "," << (c.cond2 ? 1 : 0) << "," << (c.cond3 ? 1 : 0)
         << "," << (c.retained ? 1 : 0) << "\n";
    }
  }
  return os.str();
}

}  // namespace stormsel
