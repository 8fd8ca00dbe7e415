#include "stormsel/citest.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "stormsel/error.hpp"
#include "stormsel/log.hpp"

namespace stormsel {

namespace {
constexpr double kResidualVarTol = 1e-12;
}

double student_t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  const double tail = boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  return std::min(1.0, 2.0 * tail);
}

double student_t_critical(double confidence, double df) {
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, 0.5 + confidence / 2.0);
}

Eigen::MatrixXd pooled_samples(const AlignedPanel& panel, const Feature& x,
                               const std::vector<Feature>& cond,
                               const std::vector<std::string>& storm_ids) {
  if (storm_ids.empty()) throw ValidationError("pooled_samples: empty storm subset");
  std::vector<Feature> features;
  features.reserve(cond.size() + 1);
  features.push_back(x);
  features.insert(features.end(), cond.begin(), cond.end());
  const DesignMatrix d = gather_design(panel, features, storm_ids);

  Eigen::MatrixXd samples(d.X.rows(), d.X.cols() + 1);
  samples.col(0) = d.X.col(0);
  samples.col(1) = d.y;
  for (Eigen::Index j = 1; j < d.X.cols(); ++j) {
    samples.col(j + 1) = d.X.col(j);
  }
  return samples;
}

CITestResult partial_correlation(const Eigen::MatrixXd& samples, int cond_size) {
  if (samples.cols() != cond_size + 2) {
    throw ValidationError("partial_correlation: sample matrix has " +
                          std::to_string(samples.cols()) + " columns for cond_size " +
                          std::to_string(cond_size));
  }
  CITestResult res;
  res.cond_size = cond_size;
  res.n_effective = static_cast<long>(samples.rows());

  const long df = res.n_effective - 2 - cond_size;
  if (res.n_effective < cond_size + 3 || df < 1) {
    res.untestable = true;
    res.p_value = 1.0;
    return res;
  }

  // Residualize x and y on [1 | cond] with one factorization.
  const Eigen::Index n = samples.rows();
  Eigen::MatrixXd design(n, cond_size + 1);
  design.col(0).setOnes();
  for (int j = 0; j < cond_size; ++j) design.col(j + 1) = samples.col(j + 2);
  Eigen::MatrixXd xy(n, 2);
  xy.col(0) = samples.col(0);
  xy.col(1) = samples.col(1);
  const Eigen::MatrixXd coef = design.householderQr().solve(xy);
  const Eigen::MatrixXd resid = xy - design * coef;

  const double var_x = resid.col(0).squaredNorm() / static_cast<double>(n);
  const double var_y = resid.col(1).squaredNorm() / static_cast<double>(n);
  const double cov = resid.col(0).dot(resid.col(1));

  if (var_x < kResidualVarTol || var_y < kResidualVarTol) {
    res.degenerate = true;
    res.r = cov < 0.0 ? -1.0 : 1.0;
    res.stat = std::copysign(std::numeric_limits<double>::infinity(), res.r);
    res.p_value = 0.0;
    return res;
  }

  double r = cov / std::sqrt(resid.col(0).squaredNorm() * resid.col(1).squaredNorm());
  r = std::clamp(r, -1.0, 1.0);
  res.r = r;

  const double one_minus_r2 = 1.0 - r * r;
  if (one_minus_r2 <= 1e-15) {
    res.stat = std::copysign(std::numeric_limits<double>::infinity(), r);
    res.p_value = 0.0;
    return res;
  }
  res.stat = r * std::sqrt(static_cast<double>(df) / one_minus_r2);
  res.p_value = student_t_two_sided_p(res.stat, static_cast<double>(df));
  return res;
}

CITestResult ci_test(const AlignedPanel& panel, const Feature& x,
                     const std::vector<Feature>& cond,
                     const std::vector<std::string>& storm_ids) {
  return partial_correlation(pooled_samples(panel, x, cond, storm_ids),
                             static_cast<int>(cond.size()));
}

bool is_independent(const CITestResult& result, double pc_alpha) {
  if (pc_alpha <= 0.0 || pc_alpha >= 1.0) {
    throw ValidationError("pc_alpha must be in (0, 1)");
  }
  if (result.untestable) {
    warn("untestable CI result (n_effective=" + std::to_string(result.n_effective) +
         ", cond_size=" + std::to_string(result.cond_size) +
         ") treated as independent");
    return true;
  }
  return result.p_value > pc_alpha;
}

}  // namespace stormsel
