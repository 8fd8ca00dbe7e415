#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stormsel/feature.hpp"

namespace stormsel {

/// One storm's raw multivariate record at 6-hour resolution. Missing cells
/// are NaN. `vmax` / `mslp` mirror the VMAX / PMIN columns when present.
struct StormSeries {
  std::string id;
  std::vector<long long> time;  // strictly increasing by 1
  std::vector<std::string> codes;
  std::vector<std::vector<double>> columns;  // [code][step]
  std::vector<double> vmax;  // empty when no VMAX column
  std::vector<double> mslp;  // empty when no PMIN column

  std::size_t length() const { return time.size(); }
  int code_index(const std::string& code) const;
};

struct MeanStd {
  double mean = 0.0;
  double std = 1.0;
};

/// One storm on the common panel grid. `values(t, j)` is predictor j at panel
/// step t, NaN when missing or padding. `observed[t]` marks steps inside the
/// storm's original record (padding steps are 0 and all-NaN).
struct AlignedStorm {
  std::string id;
  Eigen::MatrixXd values;  // length x n_codes
  Eigen::VectorXd target;  // NaN where undefined
  Eigen::VectorXd vmax;    // NaN where missing; used for lead-time targets
  std::vector<std::uint8_t> observed;
};

/// Life-cycle-aligned multistorm panel. All storms share the grid length and
/// the anchor position. Standardization statistics are filled by
/// `standardize` and always come from training storms only.
struct AlignedPanel {
  std::vector<std::string> codes;  // catalog order
  std::vector<AlignedStorm> storms;
  Eigen::Index anchor_index = 0;
  std::map<std::string, MeanStd> standardization;
  std::string target_code;  // DELV24..DELV120, or a raw column for synthetic panels

  std::size_t length() const { return storms.empty() ? 0 : static_cast<std::size_t>(storms[0].values.rows()); }
  int code_index(const std::string& code) const;
  const AlignedStorm* storm_by_id(const std::string& id) const;
  std::vector<std::string> storm_ids() const;
};

/// k-fold assignment over training storms; test ids never enter a fold.
struct FoldSpec {
  int k = 0;
  std::map<std::string, int> assignments;
  std::vector<std::string> test_ids;

  std::vector<std::string> train_ids(int fold) const;  // all folds except `fold`
  std::vector<std::string> validation_ids(int fold) const;
};

struct ManifestEntry {
  std::string storm_id;
  std::string path;
  bool is_test = false;
};

// -- ingestion ---------------------------------------------------------------

/// Parses one storm CSV (`time,<code>,...`; empty cell = missing). Throws
/// ParseError / ValidationError with 1-based data-row numbers.
StormSeries load_storm_csv(const std::string& path);

/// Parses a manifest: one `storm_id,path,role` line each, role train|test.
/// Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::string& path);

// -- target construction -----------------------------------------------------

/// Intensity change at a fixed lead: out[t] = vmax[t + lead/6] - vmax[t],
/// NaN once t + lead runs past the end. lead_hours must be a positive
/// multiple of 6.
std::vector<double> build_target(const StormSeries& series, int lead_hours);
Eigen::VectorXd build_target_from_vmax(const Eigen::VectorXd& vmax, int lead_hours);

/// DELV<k> -> k hours; nullopt for raw-column target codes.
std::optional<int> lead_hours_from_target_code(const std::string& code);

// -- alignment ---------------------------------------------------------------

struct AlignmentResult {
  AlignedPanel panel;
  std::vector<std::string> rejected_ids;  // storms with all-missing MSLP
};

/// Smooths each storm's MSLP with a truncated (+-4 sigma), missing-aware
/// Gaussian kernel, anchors at the earliest smoothed minimum, shifts storms so
/// anchors coincide and pads with NaN. sigma_steps defaults to 3 (= 18 h).
AlignmentResult align_by_mslp_minimum(const std::vector<StormSeries>& storms,
                                      double sigma_steps = 3.0);

/// Missing-aware Gaussian smoothing of one sequence (exposed for tests).
std::vector<double> gaussian_smooth(const std::vector<double>& x, double sigma_steps);

/// Panel assembly without MSLP alignment: storms anchored at step 0 and
/// NaN-padded at the end. Used for synthetic panels, which are generated
/// pre-aligned and carry no pressure column.
AlignedPanel assemble_unaligned(const std::vector<StormSeries>& storms);

/// Fills per-storm target sequences. For DELV codes the target is built from
/// the aligned vmax; any other code copies that (pre-standardization) column
/// verbatim. Must run before `standardize`.
void set_panel_target(AlignedPanel& panel, const std::string& target_code);

// -- standardization ---------------------------------------------------------

/// Standardizes every predictor column with mean/std pooled over the observed
/// entries of `training_ids` (population std). Zero-variance or <2-sample
/// predictors are dropped with a warning. Returns the transformed panel.
AlignedPanel standardize(AlignedPanel panel, const std::vector<std::string>& training_ids);

// -- folds ---------------------------------------------------------------------

/// Deterministic shuffle by seed, then round-robin assignment. Fold sizes
/// differ by at most one.
FoldSpec make_folds(const std::vector<std::string>& storm_ids, int k, std::uint64_t seed);

// -- pooled sample assembly ----------------------------------------------------

/// Gathers complete-case rows (y, features...) across the given storms: the
/// target at panel step t paired with each feature's column at t - lag. Rows
/// with any NaN are excluded (listwise). Row order: storms in the order
/// given, steps ascending.
struct DesignMatrix {
  Eigen::MatrixXd X;  // n x n_features
  Eigen::VectorXd y;  // n
};
DesignMatrix gather_design(const AlignedPanel& panel, const std::vector<Feature>& features,
                           const std::vector<std::string>& storm_ids);

}  // namespace stormsel
