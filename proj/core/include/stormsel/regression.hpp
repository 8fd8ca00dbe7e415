#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stormsel/feature.hpp"

namespace stormsel {

/// Train/holdout evaluation metrics. r2 can be negative (model worse than
/// predicting the mean); r2_defined is false when SST is zero.
struct Metrics {
  double r2 = 0.0;
  double pcc = 0.0;
  double mae = 0.0;
  long n = 0;
  bool r2_defined = true;
};

/// Least-squares linear model with intercept, plus residual-based coefficient
/// standard errors and t statistics for the screening procedure.
struct MlrModel {
  std::vector<Feature> features;
  Eigen::VectorXd coefficients;  // per feature
  double intercept = 0.0;
  Eigen::VectorXd std_errors;  // per feature; NaN when df == 0
  Eigen::VectorXd t_stats;
  double intercept_std_error = 0.0;
  double intercept_t = 0.0;
  long n_train = 0;
  long df_residual = 0;
};

/// Fits by Householder QR. Throws ValidationError on rank-deficient designs,
/// naming the dependent columns and the smallest singular value.
MlrModel fit_mlr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const std::vector<Feature>& features = {});

Eigen::VectorXd predict(const MlrModel& model, const Eigen::MatrixXd& X);

/// r2 = 1 - SSE/SST, Pearson correlation, mean absolute error. pcc is 0 when
/// either side is constant (correlation undefined).
Metrics evaluate(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

}  // namespace stormsel
