#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stormsel/baselines.hpp"
#include "stormsel/dataset.hpp"
#include "stormsel/discovery.hpp"
#include "stormsel/mlp.hpp"
#include "stormsel/regression.hpp"

namespace stormsel {

enum class Method { causal, correlation, forest, none };
enum class Regressor { mlr, mlp };

const char* to_string(Method m);
const char* to_string(Regressor r);
Method method_from_string(const std::string& s);
Regressor regressor_from_string(const std::string& s);

/// Everything run_fold needs besides the grid itself.
struct PipelineOptions {
  int lag_min = 0;
  int lag_max = 0;
  int max_cond_size = 3;
  LinkAssumptions assumptions;
  ForestConfig forest;
  MlpConfig mlp;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Causal grids sweep pc_alpha; baseline grids sweep top-k sizes. method=none
/// ignores both and uses every predictor at lag_min.
struct Grid {
  std::vector<double> alphas;
  std::vector<int> ks;
};

struct GridEntry {
  double pc_alpha = 0.0;  // causal entries
  int k = -1;             // baseline entries
  std::vector<SelectedFeature> features;
  Metrics train, validation, test;
  std::string flag;  // "" ok; "empty-set" or "fit-error: ..." entries are
                     // excluded from best-entry selection
};

struct FoldReport {
  int fold = 0;
  Method method = Method::causal;
  AssumptionMode mode = AssumptionMode::noASSUMPS;
  Regressor regressor = Regressor::mlr;
  std::string target_code;
  std::vector<GridEntry> entries;
  int best_entry = -1;  // argmax validation r2, PCC then parsimony tiebreaks
};

/// Runs one (fold, method) cell of the experiment: derive a feature set per
/// grid point, fit the regressor on the fold's training storms, evaluate on
/// train/validation/test.
FoldReport run_fold(const AlignedPanel& panel, const FoldSpec& folds, int fold,
                    Method method, AssumptionMode mode, const Grid& grid,
                    Regressor regressor, const PipelineOptions& options);

/// Counts per predictor code how many best-fold sets contain it (lags
/// collapsed; one count per fold) and keeps codes with count > threshold that
/// are not excluded.
struct Shortlist {
  struct Member {
    std::string code;
    int count = 0;
  };
  std::vector<Member> members;  // lexicographic
  int threshold = 3;
};

Shortlist aggregate_shortlist(const std::vector<std::vector<Feature>>& best_sets,
                              int threshold = 3,
                              const std::vector<std::string>& exclude = {});

/// base U shortlist codes; duplicates removed, base order first.
std::vector<std::string> assemble_ships_plus(const std::vector<std::string>& base,
                                             const Shortlist& shortlist);

// -- operational screening ----------------------------------------------------

struct ScreeningOptions {
  int max_lead_hours = 168;
  int step_hours = 6;
  double min_delta_r2 = 0.002;  // condition 1: +0.2% variance explained
  double significance = 0.99;   // condition 2/3: two-sided coefficient test
  int required_intervals = 5;   // window length for cond 1, count for cond 2/3
  std::vector<std::string> storm_ids;  // empty = every storm in the panel
};

struct ScreeningIntervalStat {
  int lead_hours = 0;
  bool usable = false;  // enough complete cases for the fits
  double delta_r2 = 0.0;
  double t_alone = 0.0;
  bool significant_alone = false;
  double t_joint = 0.0;  // from the last joint refit that included the candidate
  bool significant_joint = false;
};

struct ScreeningCandidate {
  std::string code;
  std::vector<ScreeningIntervalStat> intervals;
  double best_window_mean_delta = 0.0;
  bool cond1 = false;
  bool cond2 = false;
  bool cond3 = false;
  bool retained = false;
  bool rank_deficient = false;
};

struct ScreeningReport {
  std::vector<int> interval_hours;
  std::vector<ScreeningCandidate> candidates;  // canonical order
  std::vector<std::string> retained;
  std::vector<std::string> elimination_order;
};

/// SHIPS-style three-condition screening of candidate predictors against a
/// base set, interval-wise MLR fits on the training storms (no validation
/// split). Condition 1: adding the candidate alone must raise R^2 by at least
/// min_delta_r2 averaged over some `required_intervals` consecutive
/// intervals. Condition 2: the candidate coefficient must be significant in
/// at least `required_intervals` intervals. Step 3: joint refit with all
/// passers, backward-eliminating the predictor whose 5th-best |t| is
/// smallest until every survivor meets the condition-2 rule.
ScreeningReport screen_predictors(const AlignedPanel& panel,
                                  const std::vector<std::string>& base_codes,
                                  const std::vector<std::string>& candidate_codes,
                                  const ScreeningOptions& options);

// -- experiment orchestration ---------------------------------------------------

struct ExperimentPlan {
  std::vector<Method> methods = {Method::causal, Method::correlation, Method::forest,
                                 Method::none};
  Regressor regressor = Regressor::mlr;
  AssumptionMode mode = AssumptionMode::noASSUMPS;
  Grid grid;
  int folds = 7;
  int shortlist_threshold = 3;
  std::vector<std::string> exclude;
  PipelineOptions options;
};

struct ExperimentResult {
  std::vector<FoldReport> reports;  // method-major, fold-minor
  Shortlist shortlist;              // aggregated from the causal best sets
  std::vector<std::vector<Feature>> causal_best_sets;
};

/// Full workflow for one panel/target: every (method x fold) cell in
/// parallel, then the cross-fold shortlist. `fold_seed` drives make_folds.
ExperimentResult run_experiment(const AlignedPanel& panel, const FoldSpec& folds,
                                const ExperimentPlan& plan);

// -- canonical CSV renderings ---------------------------------------------------

std::string fold_report_csv(const std::vector<FoldReport>& reports);
std::string abacus_csv(const std::vector<SelectedFeatureSet>& sets,
                       const std::vector<double>& alphas);
std::string shortlist_csv(const Shortlist& shortlist);
std::string comparison_csv(const std::vector<FoldReport>& reports);
std::string screening_csv(const ScreeningReport& report);

}  // namespace stormsel
