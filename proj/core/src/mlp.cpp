#include "stormsel/mlp.hpp"

#include <cmath>
#include <numeric>

#include "stormsel/error.hpp"
#include "stormsel/rng.hpp"

namespace stormsel {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    default: return "linear";
  }
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  throw ValidationError("unknown activation '" + s + "'");
}

bool EarlyStopRule::should_stop(const std::vector<double>& losses) const {
  const int e = static_cast<int>(losses.size());
  if (e <= min_epochs || e < window + 1) return false;
  double avg = 0.0;
  for (int i = e - 1 - window; i < e - 1; ++i) avg += losses[static_cast<std::size_t>(i)];
  avg /= static_cast<double>(window);
  return losses.back() > avg;
}

namespace {

inline Eigen::MatrixXd apply_activation(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
    default: return z;
  }
}

inline Eigen::MatrixXd activation_grad(Activation a, const Eigen::MatrixXd& z,
                                       const Eigen::MatrixXd& h) {
  switch (a) {
    case Activation::relu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
      return (1.0 - h.array().square()).matrix();
    default:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
}

// Forward pass keeping pre-activations and activations for backprop.
// Columns are samples (inputs transposed once at the boundary).
struct ForwardCache {
  std::vector<Eigen::MatrixXd> z;  // pre-activation per layer
  std::vector<Eigen::MatrixXd> h;  // activation per layer; h[0] = input
};

ForwardCache forward(const MlpModel& m, const Eigen::MatrixXd& x_cols) {
  ForwardCache c;
  c.h.push_back(x_cols);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Eigen::MatrixXd z = m.weights[l] * c.h.back();
    z.colwise() += m.biases[l];
    c.h.push_back(apply_activation(m.activations[l], z));
    c.z.push_back(std::move(z));
  }
  return c;
}

}  // namespace

MlpModel init_mlp(int input_dim, const MlpConfig& config) {
  if (input_dim < 1) throw ValidationError("init_mlp: input_dim must be >= 1");
  if (config.activations.size() != config.hidden.size() + 1) {
    throw ValidationError("init_mlp: need one activation per weight layer (hidden + output)");
  }
  MlpModel m;
  m.seed = config.seed;
  m.activations = config.activations;
  m.layer_sizes.push_back(input_dim);
  for (const int h : config.hidden) {
    if (h < 1) throw ValidationError("init_mlp: hidden layer size must be >= 1");
    m.layer_sizes.push_back(h);
  }
  m.layer_sizes.push_back(1);

  Rng rng(config.seed);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const int fan_in = m.layer_sizes[l];
    const int fan_out = m.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd W(fan_out, fan_in);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) {
        W(i, j) = rng.uniform(-bound, bound);
      }
    }
    m.weights.push_back(std::move(W));
    m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return m;
}

Eigen::VectorXd predict(const MlpModel& m, const Eigen::MatrixXd& X) {
  if (X.cols() != m.layer_sizes.front()) {
    throw ValidationError("mlp predict: expected " + std::to_string(m.layer_sizes.front()) +
                          " feature columns, got " + std::to_string(X.cols()));
  }
  const ForwardCache c = forward(m, X.transpose());
  return c.h.back().row(0).transpose();
}

double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::VectorXd pred = predict(m, X);
  return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

MlpGradients mlp_gradients(const MlpModel& m, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows();
  const ForwardCache c = forward(m, X.transpose());
  MlpGradients g;
  g.d_weights.resize(m.weights.size());
  g.d_biases.resize(m.biases.size());

  const Eigen::MatrixXd pred = c.h.back();  // 1 x n
  Eigen::MatrixXd delta = 2.0 * (pred - y.transpose()) / static_cast<double>(n);
  g.loss = (pred - y.transpose()).squaredNorm() / static_cast<double>(n);

  for (std::size_t l = m.weights.size(); l-- > 0;) {
    delta = delta.cwiseProduct(activation_grad(m.activations[l], c.z[l], c.h[l + 1]));
    g.d_weights[l] = delta * c.h[l].transpose();
    g.d_biases[l] = delta.rowwise().sum();
    if (l > 0) delta = m.weights[l].transpose() * delta;
  }
  return g;
}

MlpModel fit_mlp(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                 const Eigen::MatrixXd& X_val, const Eigen::VectorXd& y_val,
                 const MlpConfig& config, const std::vector<Feature>& features) {
  if (X_train.rows() == 0) throw ValidationError("fit_mlp: empty training set");
  if (X_val.rows() == 0) throw ValidationError("fit_mlp: empty validation set");
  if (X_train.rows() != y_train.size() || X_val.rows() != y_val.size()) {
    throw ValidationError("fit_mlp: X and y row counts differ");
  }
  if (!features.empty() &&
      static_cast<Eigen::Index>(features.size()) != X_train.cols()) {
    throw ValidationError("fit_mlp: feature list length does not match X columns");
  }

  MlpModel m = init_mlp(static_cast<int>(X_train.cols()), config);
  m.features = features;

  // Adam state, one slot per weight/bias matrix.
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mB, vB;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    mW.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    vW.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    mB.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
    vB.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
  }

  const Eigen::Index n = X_train.rows();
  const Eigen::Index batch = config.batch_size <= 0
                                 ? n
                                 : std::min<Eigen::Index>(config.batch_size, n);
  long step = 0;
  std::vector<double> val_losses;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    Eigen::Index covered = 0;
    int batch_index = 0;
    for (Eigen::Index start = 0; start < n; start += batch, ++batch_index) {
      const Eigen::Index len = std::min(batch, n - start);
      const MlpGradients g =
          mlp_gradients(m, X_train.middleRows(start, len), y_train.segment(start, len));
      if (!std::isfinite(g.loss)) {
        throw InternalError("fit_mlp: NaN loss at epoch " + std::to_string(epoch) +
                            " batch " + std::to_string(batch_index));
      }
      epoch_loss += g.loss * static_cast<double>(len);
      covered += len;

      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < m.weights.size(); ++l) {
        mW[l] = config.beta1 * mW[l] + (1.0 - config.beta1) * g.d_weights[l];
        vW[l] = config.beta2 * vW[l].array().matrix() +
                (1.0 - config.beta2) * g.d_weights[l].array().square().matrix();
        m.weights[l].array() -= config.learning_rate * (mW[l].array() / bc1) /
                                ((vW[l].array() / bc2).sqrt() + config.epsilon);
        mB[l] = config.beta1 * mB[l] + (1.0 - config.beta1) * g.d_biases[l];
        vB[l] = config.beta2 * vB[l].array().matrix() +
                (1.0 - config.beta2) * g.d_biases[l].array().square().matrix();
        m.biases[l].array() -= config.learning_rate * (mB[l].array() / bc1) /
                               ((vB[l].array() / bc2).sqrt() + config.epsilon);
      }
    }

    const double val = mlp_loss(m, X_val, y_val);
    if (!std::isfinite(val)) {
      throw InternalError("fit_mlp: NaN validation loss at epoch " + std::to_string(epoch));
    }
    m.history.push_back({epoch_loss / static_cast<double>(covered), val});
    val_losses.push_back(val);
    if (config.early_stop.should_stop(val_losses)) {
      m.stopped_epoch = epoch;
      break;
    }
  }
  return m;
}

}  // namespace stormsel
