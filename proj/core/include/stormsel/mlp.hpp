#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "stormsel/feature.hpp"

namespace stormsel {

enum class Activation { relu, tanh, linear };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Stops training after epoch e (1-based) when e > min_epochs and the epoch's
/// validation loss exceeds the mean of the `window` validation losses
/// immediately before it. With the defaults the earliest possible stop is
/// epoch 51, comparing against the mean of epochs 1..50.
struct EarlyStopRule {
  int window = 50;
  int min_epochs = 50;

  bool should_stop(const std::vector<double>& completed_val_losses) const;
};

struct MlpConfig {
  std::vector<int> hidden = {512, 512, 512, 512};
  std::vector<Activation> activations = {Activation::relu, Activation::relu,
                                         Activation::relu, Activation::tanh,
                                         Activation::linear};  // per weight layer
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 1000;
  int batch_size = 0;  // 0 = full batch; otherwise fixed sequential batches
  EarlyStopRule early_stop;
  std::uint64_t seed = 0;
};

struct TrainEpoch {
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct MlpModel {
  std::vector<int> layer_sizes;            // [d, hidden..., 1]
  std::vector<Activation> activations;     // per weight layer
  std::vector<Eigen::MatrixXd> weights;    // W[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;
  std::vector<Feature> features;
  std::uint64_t seed = 0;
  std::vector<TrainEpoch> history;
  int stopped_epoch = 0;  // 1-based; 0 when max_epochs exhausted without firing
};

/// Unoptimized network with fan-in-scaled uniform weights and zero biases,
/// built deterministically from config.seed.
MlpModel init_mlp(int input_dim, const MlpConfig& config);

Eigen::VectorXd predict(const MlpModel& model, const Eigen::MatrixXd& X);

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct MlpGradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
  double loss = 0.0;
};

/// MSE loss and its gradient by backpropagation (exposed so the
/// finite-difference check can exercise the same path used in training).
MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y);

/// Adam training on the MSE objective with the early-stopping rule above.
/// Deterministic given config.seed and the fixed batch order. Returns the
/// parameters at the stopping epoch. Throws InternalError on NaN loss.
MlpModel fit_mlp(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                 const Eigen::MatrixXd& X_val, const Eigen::VectorXd& y_val,
                 const MlpConfig& config, const std::vector<Feature>& features = {});

}  // namespace stormsel
