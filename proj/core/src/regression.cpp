#include "stormsel/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stormsel/error.hpp"

namespace stormsel {

MlrModel fit_mlr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const std::vector<Feature>& features) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw ValidationError("fit_mlr: X and y row counts differ");
  if (n < p + 1) {
    throw ValidationError("fit_mlr: " + std::to_string(n) + " rows for " +
                          std::to_string(p) + " features; need rows >= features + 1");
  }
  if (!features.empty() && static_cast<Eigen::Index>(features.size()) != p) {
    throw ValidationError("fit_mlr: feature list length does not match X columns");
  }

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = X;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) {
    // Report which columns fall outside the independent pivot set and how
    // degenerate the system is.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const double smin = svd.singularValues().tail(1)(0);
    const auto perm = qr.colsPermutation().indices();
    std::ostringstream os;
    os << "fit_mlr: rank-deficient design (rank " << qr.rank() << " of " << p + 1
       << ", smallest singular value " << smin << "); dependent columns:";
    for (Eigen::Index i = qr.rank(); i < perm.size(); ++i) {
      const Eigen::Index col = perm[i];
      if (col == 0) {
        os << " intercept";
      } else if (!features.empty()) {
        os << " " << features[static_cast<std::size_t>(col - 1)].label();
      } else {
        os << " x" << (col - 1);
      }
    }
    throw ValidationError(os.str());
  }

  const Eigen::VectorXd beta = qr.solve(y);

  MlrModel model;
  model.features = features;
  if (features.empty()) {
    model.features.resize(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
      model.features[static_cast<std::size_t>(j)] = {"x" + std::to_string(j), 0};
    }
  }
  model.intercept = beta[0];
  model.coefficients = beta.tail(p);
  model.n_train = static_cast<long>(n);
  model.df_residual = static_cast<long>(n - p - 1);

  const Eigen::VectorXd resid = y - design * beta;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  model.std_errors = Eigen::VectorXd::Constant(p, nan);
  model.t_stats = Eigen::VectorXd::Constant(p, nan);
  model.intercept_std_error = nan;
  model.intercept_t = nan;
  if (model.df_residual >= 1) {
    const double s2 = resid.squaredNorm() / static_cast<double>(model.df_residual);
    // (D'D)^-1 = P R^-1 R^-T P' from the pivoted QR
    const Eigen::MatrixXd R =
        qr.matrixQR().topLeftCorner(p + 1, p + 1).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
    Eigen::MatrixXd xtx_inv = Rinv * Rinv.transpose();
    const auto& perm = qr.colsPermutation();
    xtx_inv = perm * xtx_inv * perm.transpose();
    for (Eigen::Index j = 0; j <= p; ++j) {
      const double se = std::sqrt(std::max(0.0, s2 * xtx_inv(j, j)));
      const double t = se > 0.0 ? beta[j] / se : 0.0;
      if (j == 0) {
        model.intercept_std_error = se;
        model.intercept_t = t;
      } else {
        model.std_errors[j - 1] = se;
        model.t_stats[j - 1] = t;
      }
    }
  }
  return model;
}

Eigen::VectorXd predict(const MlrModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.coefficients.size()) {
    throw ValidationError("predict: expected " + std::to_string(model.coefficients.size()) +
                          " feature columns, got " + std::to_string(X.cols()));
  }
  return (X * model.coefficients).array() + model.intercept;
}

Metrics evaluate(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("evaluate: length mismatch");
  }
  if (y_true.size() < 2) {
    throw ValidationError("evaluate: need at least 2 samples");
  }
  Metrics m;
  m.n = static_cast<long>(y_true.size());
  const double mean = y_true.mean();
  const double sst = (y_true.array() - mean).square().sum();
  const double sse = (y_true - y_pred).squaredNorm();
  if (sst > 0.0) {
    m.r2 = 1.0 - sse / sst;
  } else {
    m.r2_defined = false;
    m.r2 = std::numeric_limits<double>::quiet_NaN();
  }
  m.mae = (y_true - y_pred).cwiseAbs().mean();

  const double mp = y_pred.mean();
  const double vt = (y_true.array() - mean).square().sum();
  const double vp = (y_pred.array() - mp).square().sum();
  if (vt > 0.0 && vp > 0.0) {
    const double cov = ((y_true.array() - mean) * (y_pred.array() - mp)).sum();
    m.pcc = std::clamp(cov / std::sqrt(vt * vp), -1.0, 1.0);
  } else {
    m.pcc = 0.0;  // correlation undefined for constant sequences
  }
  return m;
}

}  // namespace stormsel
