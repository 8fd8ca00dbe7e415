#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stormsel/citest.hpp"
#include "stormsel/dataset.hpp"
#include "stormsel/feature.hpp"

namespace stormsel {

enum class LinkStatus { allowed, forced, forbidden };

/// Per-link prior knowledge. Forced links survive every test; forbidden links
/// never enter the candidate set. Unlisted links default to allowed.
class LinkAssumptions {
 public:
  void set(const Feature& f, LinkStatus status) { status_[f] = status; }
  LinkStatus status(const Feature& f) const {
    const auto it = status_.find(f);
    return it == status_.end() ? LinkStatus::allowed : it->second;
  }
  std::vector<Feature> forced() const {
    std::vector<Feature> out;
    for (const auto& [f, s] : status_) {
      if (s == LinkStatus::forced) out.push_back(f);
    }
    return out;  // std::map keeps canonical (code, lag) order
  }
  bool empty() const { return status_.empty(); }

 private:
  std::map<Feature, LinkStatus> status_;
};

enum class AssumptionMode { noASSUMPS, withASSUMPS };

const char* to_string(AssumptionMode mode);
AssumptionMode assumption_mode_from_string(const std::string& s);

struct SelectedFeature {
  Feature feature;
  double strength = 0.0;  // |partial correlation| at final retention
};

/// Result of one discovery run; members sorted in canonical (code, lag)
/// order. Byte-identical for identical inputs.
struct SelectedFeatureSet {
  std::vector<SelectedFeature> members;
  double pc_alpha = 0.0;
  AssumptionMode mode = AssumptionMode::noASSUMPS;
  int fold = -1;

  bool contains(const Feature& f) const;
  std::vector<Feature> features() const;

  std::string serialize() const;
  static SelectedFeatureSet deserialize(const std::string& text, const std::string& origin);
};

struct MpcOptions {
  int lag_min = 0;
  int lag_max = 0;
  double pc_alpha = 0.05;
  int max_cond_size = 3;  // < 0 means unbounded
  AssumptionMode mode = AssumptionMode::noASSUMPS;
  int fold = -1;
  unsigned jobs = 1;
};

/// Single-target PC-stable parent discovery over (predictor, lag) candidates
/// with lag in [lag_min, lag_max], pooled across the training storms.
///
/// Level 0 tests every candidate unconditionally against the target; higher
/// levels condition each surviving candidate on the p strongest other
/// survivors ranked by the previous level's |r|. Removals apply only at level
/// boundaries. Forced links are tested at level 0 for their strength but are
/// never removed; forbidden links never become candidates.
SelectedFeatureSet mpc_select(const AlignedPanel& panel,
                              const std::vector<std::string>& train_ids,
                              const LinkAssumptions& assumptions,
                              const MpcOptions& options);

/// One independent mpc_select per alpha.
std::vector<SelectedFeatureSet> sweep_alpha(const AlignedPanel& panel,
                                            const std::vector<std::string>& train_ids,
                                            const LinkAssumptions& assumptions,
                                            MpcOptions options,
                                            const std::vector<double>& alphas);

}  // namespace stormsel
