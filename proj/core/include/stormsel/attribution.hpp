#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "stormsel/baselines.hpp"
#include "stormsel/feature.hpp"

namespace stormsel {

/// Batched model evaluation: rows are instances in feature order.
using ModelFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

/// Per-instance Shapley values. base_value is the mean prediction over the
/// background set; base_value + row-sum of values reproduces the model
/// prediction on each instance (additivity, enforced by the constrained
/// solver).
struct ShapAttribution {
  double base_value = 0.0;
  Eigen::MatrixXd values;     // instances x features
  Eigen::MatrixXd instances;  // copy of the attributed rows
  Eigen::VectorXd predictions;
  std::vector<Feature> features;
  int n_coalitions = 0;
  std::uint64_t seed = 0;
  bool ridge_fallback = false;
};

struct KernelShapOptions {
  int n_coalitions = 0;  // <= 0: 2d + 2048, capped at 2^d
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Kernel SHAP with marginal-expectation imputation: a coalition is valued by
/// averaging model outputs over the background rows with off-coalition
/// features taken from the background. Empty and full coalitions are always
/// included and enforced as constraints of the weighted least-squares solve.
/// When 2^d fits the budget every coalition is enumerated and the result is
/// exact.
ShapAttribution kernel_shap(const ModelFn& model, const Eigen::MatrixXd& background,
                            const Eigen::MatrixXd& instances,
                            const std::vector<Feature>& features,
                            const KernelShapOptions& options);

/// Features ranked by mean |SHAP| over instances.
FeatureRanking rank_mean_abs_shap(const ShapAttribution& attribution);

/// Decomposition of f(x) - g(x) where g extends f's feature set:
/// delta_base + sum(common terms) + sum(added terms) + residual, with the
/// residual equal to the two attributions' combined additivity slack.
struct DifferenceDecomposition {
  double delta_base = 0.0;  // B_f - B_g
  std::vector<Feature> common;
  std::vector<Feature> added;
  Eigen::MatrixXd common_terms;  // instances x |common|: SHAP_f - SHAP_g
  Eigen::MatrixXd added_terms;   // instances x |added|: -SHAP_g
  Eigen::VectorXd delta_pred;    // f(x) - g(x)
  Eigen::VectorXd residual;
};

DifferenceDecomposition decompose_difference(const ShapAttribution& shap_f,
                                             const ShapAttribution& shap_g,
                                             const std::vector<Feature>& common,
                                             const std::vector<Feature>& added);

}  // namespace stormsel
