#include "stormsel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stormsel/csv.hpp"
#include "stormsel/error.hpp"
#include "stormsel/log.hpp"
#include "stormsel/parallel.hpp"
#include "stormsel/rng.hpp"

namespace stormsel {

FeatureRanking make_ranking(std::map<Feature, double> scores, bool degenerate) {
  FeatureRanking r;
  r.degenerate = degenerate;
  r.ordered.reserve(scores.size());
  for (const auto& [f, s] : scores) r.ordered.push_back(f);
  // stable sort on score keeps the map's lexicographic order for ties
  std::stable_sort(r.ordered.begin(), r.ordered.end(), [&](const Feature& a, const Feature& b) {
    return scores.at(a) > scores.at(b);
  });
  r.scores = std::move(scores);
  return r;
}

namespace {

std::vector<Feature> lagged_candidates(const AlignedPanel& panel, const std::vector<int>& lags) {
  std::vector<std::string> codes = panel.codes;
  std::sort(codes.begin(), codes.end());
  std::vector<Feature> out;
  for (const auto& code : codes) {
    for (const int lag : lags) {
      if (code == panel.target_code && lag == 0) continue;
      out.push_back({code, lag});
    }
  }
  return out;
}

}  // namespace

FeatureRanking rank_by_correlation(const AlignedPanel& panel, const std::vector<int>& lags,
                                   const std::vector<std::string>& train_ids) {
  if (lags.empty()) throw ValidationError("rank_by_correlation: empty lag set");
  std::map<Feature, double> scores;
  bool degenerate = false;
  for (const auto& f : lagged_candidates(panel, lags)) {
    const DesignMatrix d = gather_design(panel, {f}, train_ids);
    double score = 0.0;
    if (d.y.size() < 3) {
      warn("correlation ranking: '" + f.label() + "' has " + std::to_string(d.y.size()) +
           " complete cases; scored 0");
      degenerate = true;
    } else {
      const Eigen::ArrayXd x = d.X.col(0).array() - d.X.col(0).mean();
      const Eigen::ArrayXd y = d.y.array() - d.y.mean();
      const double vx = x.square().sum();
      const double vy = y.square().sum();
      if (vx <= 0.0 || vy <= 0.0) {
        degenerate = true;  // constant predictor or constant target
      } else {
        score = std::fabs((x * y).sum() / std::sqrt(vx * vy));
      }
    }
    scores[f] = score;
  }
  return make_ranking(std::move(scores), degenerate);
}

// -- regression forest ---------------------------------------------------------

namespace {

struct TreeGrower {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const ForestConfig& cfg;
  int mtry;
  Rng rng;
  std::vector<double> importance;  // per feature, weighted variance decrease

  TreeGrower(const Eigen::MatrixXd& X_, const Eigen::VectorXd& y_, const ForestConfig& cfg_,
             int mtry_, std::uint64_t seed)
      : X(X_), y(y_), cfg(cfg_), mtry(mtry_), rng(seed),
        importance(static_cast<std::size_t>(X_.cols()), 0.0) {}

  void grow() {
    const Eigen::Index n = X.rows();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (auto& i : idx) i = static_cast<Eigen::Index>(rng.bounded(static_cast<std::uint64_t>(n)));
    split_node(idx, 0);
  }

  void split_node(std::vector<Eigen::Index>& idx, int depth) {
    const std::size_t n_node = idx.size();
    if (depth >= cfg.max_depth || n_node < 2 * static_cast<std::size_t>(cfg.min_leaf)) return;

    double sum = 0.0, sumsq = 0.0;
    for (const auto i : idx) {
      sum += y[i];
      sumsq += y[i] * y[i];
    }
    const double sse_parent = sumsq - sum * sum / static_cast<double>(n_node);
    if (sse_parent <= 1e-12) return;

    const auto feat_sample =
        rng.sample_without_replacement(static_cast<std::size_t>(X.cols()),
                                       static_cast<std::size_t>(mtry));
    // deterministic tie-breaking: evaluate sampled features in ascending order
    std::vector<std::size_t> feats(feat_sample.begin(), feat_sample.end());
    std::sort(feats.begin(), feats.end());

    double best_gain = 0.0;
    std::size_t best_feat = 0;
    double best_threshold = 0.0;
    bool found = false;

    std::vector<std::pair<double, double>> vals(n_node);  // (x, y)
    for (const std::size_t j : feats) {
      for (std::size_t k = 0; k < n_node; ++k) {
        vals[k] = {X(idx[k], static_cast<Eigen::Index>(j)), y[idx[k]]};
      }
      std::sort(vals.begin(), vals.end());
      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t k = 0; k + 1 < n_node; ++k) {
        left_sum += vals[k].second;
        left_sq += vals[k].second * vals[k].second;
        const std::size_t nl = k + 1, nr = n_node - nl;
        if (nl < static_cast<std::size_t>(cfg.min_leaf)) continue;
        if (nr < static_cast<std::size_t>(cfg.min_leaf)) break;
        if (vals[k].first == vals[k + 1].first) continue;  // split between distinct values
        const double right_sum = sum - left_sum;
        const double right_sq = sumsq - left_sq;
        const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
        const double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
        const double gain = sse_parent - sse_l - sse_r;
        if (gain > best_gain) {
          best_gain = gain;
          best_feat = j;
          best_threshold = 0.5 * (vals[k].first + vals[k + 1].first);
          found = true;
        }
      }
    }
    if (!found) return;

    // weighted impurity decrease, normalized by the bootstrap sample size
    importance[best_feat] += best_gain / static_cast<double>(X.rows());

    std::vector<Eigen::Index> left, right;
    left.reserve(n_node);
    right.reserve(n_node);
    for (const auto i : idx) {
      (X(i, static_cast<Eigen::Index>(best_feat)) <= best_threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    split_node(left, depth + 1);
    split_node(right, depth + 1);
  }
};

}  // namespace

std::vector<double> forest_importance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const ForestConfig& config, bool* degenerate) {
  if (X.rows() != y.size()) throw ValidationError("forest_importance: X and y row counts differ");
  if (X.rows() < 20) {
    throw ValidationError("forest_importance: need at least 20 pooled samples, got " +
                          std::to_string(X.rows()));
  }
  const int d = static_cast<int>(X.cols());
  const int mtry = config.features_per_split > 0
                       ? std::min(config.features_per_split, d)
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  std::vector<std::vector<double>> per_tree(static_cast<std::size_t>(config.n_trees));
  parallel_for(static_cast<std::size_t>(config.n_trees), config.jobs, [&](std::size_t t) {
    TreeGrower grower(X, y, config, mtry, derive_seed(config.seed, "tree", t));
    grower.grow();
    per_tree[t] = std::move(grower.importance);
  });

  std::vector<double> total(static_cast<std::size_t>(d), 0.0);
  for (const auto& imp : per_tree) {
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += imp[j];
  }
  const double mass = std::accumulate(total.begin(), total.end(), 0.0);
  if (mass <= 0.0) {
    if (degenerate) *degenerate = true;
    warn("forest importance: no splits anywhere (degenerate target); uniform scores");
    std::fill(total.begin(), total.end(), 1.0 / static_cast<double>(d));
    return total;
  }
  if (degenerate) *degenerate = false;
  for (auto& v : total) v /= mass;
  return total;
}

FeatureRanking rank_by_forest_importance(const AlignedPanel& panel, const std::vector<int>& lags,
                                         const std::vector<std::string>& train_ids,
                                         const ForestConfig& config) {
  if (lags.empty()) throw ValidationError("rank_by_forest_importance: empty lag set");
  const auto candidates = lagged_candidates(panel, lags);
  const DesignMatrix d = gather_design(panel, candidates, train_ids);
  bool degenerate = false;
  const auto importance = forest_importance(d.X, d.y, config, &degenerate);
  std::map<Feature, double> scores;
  for (std::size_t j = 0; j < candidates.size(); ++j) scores[candidates[j]] = importance[j];
  return make_ranking(std::move(scores), degenerate);
}

std::vector<std::vector<Feature>> top_k_sets(const FeatureRanking& ranking,
                                             const std::vector<int>& ks) {
  std::vector<std::vector<Feature>> out;
  for (const int k : ks) {
    if (k <= 0) throw ValidationError("top_k_sets: k must be positive");
    std::size_t take = static_cast<std::size_t>(k);
    if (take > ranking.ordered.size()) {
      warn("top_k_sets: k=" + std::to_string(k) + " exceeds ranking size " +
           std::to_string(ranking.ordered.size()) + "; truncated");
      take = ranking.ordered.size();
    }
    out.emplace_back(ranking.ordered.begin(),
                     ranking.ordered.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

std::string serialize_ranking(const FeatureRanking& ranking) {
  std::ostringstream os;
  for (const auto& f : ranking.ordered) {
    os << f.code << "," << f.lag << "," << format_double(ranking.scores.at(f)) << "\n";
  }
  return os.str();
}

}  // namespace stormsel
