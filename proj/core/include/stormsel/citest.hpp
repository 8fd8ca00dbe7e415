#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stormsel/dataset.hpp"
#include "stormsel/feature.hpp"

namespace stormsel {

/// Outcome of one pooled partial-correlation test. `untestable` marks tests
/// with too few complete cases (distinct from p = 1); `degenerate` marks
/// residual variances that collapsed below tolerance, where r is clamped.
struct CITestResult {
  double r = 0.0;
  double stat = 0.0;
  double p_value = 1.0;
  long n_effective = 0;
  int cond_size = 0;
  bool untestable = false;
  bool degenerate = false;
};

/// Rows are (x, y, cond...) tuples pooled across the given storms and all
/// valid offsets; listwise complete cases only. Zero rows are a legal result
/// (callers treat the link as untestable).
Eigen::MatrixXd pooled_samples(const AlignedPanel& panel, const Feature& x,
                               const std::vector<Feature>& cond,
                               const std::vector<std::string>& storm_ids);

/// Linear partial correlation of columns 0 and 1 of `samples` given the
/// remaining columns: r of the least-squares residuals after regressing both
/// on the conditioning block plus intercept; t statistic with
/// df = n - 2 - cond_size; two-sided Student-t p-value.
CITestResult partial_correlation(const Eigen::MatrixXd& samples, int cond_size);

/// Convenience wrapper: pool then test.
CITestResult ci_test(const AlignedPanel& panel, const Feature& x,
                     const std::vector<Feature>& cond,
                     const std::vector<std::string>& storm_ids);

/// True iff the result does not reject independence at pc_alpha (p > alpha;
/// the boundary p == alpha counts as dependent). Untestable results are
/// treated as independent with a logged warning.
bool is_independent(const CITestResult& result, double pc_alpha);

/// Two-sided Student-t tail probability, exposed for reuse by regression
/// diagnostics and screening.
double student_t_two_sided_p(double t, double df);
/// Critical |t| for a two-sided test at the given confidence (e.g. 0.99).
double student_t_critical(double confidence, double df);

}  // namespace stormsel
