#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "stormsel/dataset.hpp"
#include "stormsel/feature.hpp"

namespace stormsel {

/// Features sorted by score descending, ties broken lexicographically.
struct FeatureRanking {
  std::vector<Feature> ordered;
  std::map<Feature, double> scores;
  bool degenerate = false;  // constant predictors or degenerate target seen
};

FeatureRanking make_ranking(std::map<Feature, double> scores, bool degenerate = false);

/// Absolute Pearson correlation of each (predictor, lag) with the target over
/// pooled complete-case training samples. Constant predictors score 0 with
/// the degenerate flag set.
FeatureRanking rank_by_correlation(const AlignedPanel& panel, const std::vector<int>& lags,
                                   const std::vector<std::string>& train_ids);

struct ForestConfig {
  int n_trees = 200;
  int max_depth = 12;
  int min_leaf = 5;
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Variance-reduction importance from a bootstrap ensemble of regression
/// trees, normalized to sum 1. Deterministic given the seed (per-tree seeds
/// derive from it). Degenerate targets yield uniform scores with the flag.
FeatureRanking rank_by_forest_importance(const AlignedPanel& panel, const std::vector<int>& lags,
                                         const std::vector<std::string>& train_ids,
                                         const ForestConfig& config);

/// Raw-matrix variant used by the panel wrapper and the tests.
std::vector<double> forest_importance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const ForestConfig& config, bool* degenerate = nullptr);

/// Nested prefix sets of the ranking. Ks larger than the ranking are
/// truncated with a warning.
std::vector<std::vector<Feature>> top_k_sets(const FeatureRanking& ranking,
                                             const std::vector<int>& ks);

/// Serialization: `predictor,lag,score` lines.
std::string serialize_ranking(const FeatureRanking& ranking);

}  // namespace stormsel
