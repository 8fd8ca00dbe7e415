#include "stormsel/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "stormsel/error.hpp"
#include "stormsel/parallel.hpp"
#include "stormsel/rng.hpp"

namespace stormsel {

namespace {

using Mask = std::vector<std::uint8_t>;

double shapley_kernel_weight(int d, int s) {
  // (d-1) / (C(d,s) * s * (d-s)); callers never pass s == 0 or s == d
  double comb = 1.0;
  for (int i = 1; i <= s; ++i) {
    comb *= static_cast<double>(d - i + 1) / static_cast<double>(i);
  }
  return static_cast<double>(d - 1) / (comb * static_cast<double>(s) * static_cast<double>(d - s));
}

/// Deterministic coalition pool: all of them when the budget allows,
/// otherwise singletons + leave-one-out plus kernel-distributed random masks
/// (paired with complements), deduplicated.
std::vector<Mask> build_coalitions(int d, int budget, Rng& rng) {
  std::set<Mask> unique;
  const bool enumerable = d <= 20 && (1 << d) <= budget;
  if (enumerable) {
    for (int mask = 1; mask + 1 < (1 << d); ++mask) {
      Mask m(static_cast<std::size_t>(d), 0);
      for (int j = 0; j < d; ++j) {
        if (mask & (1 << j)) m[static_cast<std::size_t>(j)] = 1;
      }
      unique.insert(std::move(m));
    }
    return {unique.begin(), unique.end()};
  }

  for (int j = 0; j < d && 2 * d <= budget; ++j) {
    Mask single(static_cast<std::size_t>(d), 0);
    single[static_cast<std::size_t>(j)] = 1;
    Mask loo(static_cast<std::size_t>(d), 1);
    loo[static_cast<std::size_t>(j)] = 0;
    unique.insert(std::move(single));
    unique.insert(std::move(loo));
  }

  // size distribution proportional to the aggregate kernel mass per size
  std::vector<double> size_weight(static_cast<std::size_t>(d), 0.0);
  double total = 0.0;
  for (int s = 1; s <= d - 1; ++s) {
    size_weight[static_cast<std::size_t>(s)] =
        static_cast<double>(d - 1) / (static_cast<double>(s) * static_cast<double>(d - s));
    total += size_weight[static_cast<std::size_t>(s)];
  }

  int attempts = 0;
  const int max_attempts = budget * 8;
  while (static_cast<int>(unique.size()) < budget - 2 && attempts++ < max_attempts) {
    double pick = rng.uniform() * total;
    int s = 1;
    for (; s < d - 1; ++s) {
      pick -= size_weight[static_cast<std::size_t>(s)];
      if (pick <= 0.0) break;
    }
    Mask m(static_cast<std::size_t>(d), 0);
    for (const std::size_t j :
         rng.sample_without_replacement(static_cast<std::size_t>(d), static_cast<std::size_t>(s))) {
      m[j] = 1;
    }
    Mask complement(static_cast<std::size_t>(d), 1);
    for (std::size_t j = 0; j < m.size(); ++j) complement[j] = m[j] ? 0 : 1;
    unique.insert(std::move(m));
    if (static_cast<int>(unique.size()) < budget - 2) unique.insert(std::move(complement));
  }
  return {unique.begin(), unique.end()};
}

}  // namespace

ShapAttribution kernel_shap(const ModelFn& model, const Eigen::MatrixXd& background,
                            const Eigen::MatrixXd& instances,
                            const std::vector<Feature>& features,
                            const KernelShapOptions& options) {
  if (background.rows() == 0) throw ValidationError("kernel_shap: empty background");
  if (instances.cols() != background.cols()) {
    throw ValidationError("kernel_shap: instance and background widths differ");
  }
  const int d = static_cast<int>(instances.cols());
  if (d < 1) throw ValidationError("kernel_shap: no features");
  if (!features.empty() && static_cast<int>(features.size()) != d) {
    throw ValidationError("kernel_shap: feature list does not match matrix width");
  }

  int budget = options.n_coalitions > 0 ? options.n_coalitions : 2 * d + 2048;
  if (d <= 20) budget = std::min(budget, 1 << d);
  if (budget < 2) throw ValidationError("kernel_shap: coalition budget too small");

  ShapAttribution out;
  out.features = features;
  out.n_coalitions = budget;
  out.seed = options.seed;
  out.instances = instances;
  out.values.resize(instances.rows(), d);
  out.predictions = model(instances);

  const double base_value = model(background).mean();
  out.base_value = base_value;

  const Eigen::Index n_bg = background.rows();
  std::vector<bool> ridge_flags(static_cast<std::size_t>(instances.rows()), false);

  parallel_for(static_cast<std::size_t>(instances.rows()), options.jobs, [&](std::size_t i) {
    Rng rng(derive_seed(options.seed, "instance", i));
    const Eigen::RowVectorXd x = instances.row(static_cast<Eigen::Index>(i));

    const auto masks = build_coalitions(d, budget, rng);
    const double fx = out.predictions[static_cast<Eigen::Index>(i)];

    if (d == 1) {
      out.values(static_cast<Eigen::Index>(i), 0) = fx - base_value;
      return;
    }

    // v(S): mean over background rows with off-coalition features imputed
    Eigen::VectorXd v(static_cast<Eigen::Index>(masks.size()));
    Eigen::MatrixXd batch = background;
    for (std::size_t m = 0; m < masks.size(); ++m) {
      for (int j = 0; j < d; ++j) {
        if (masks[m][static_cast<std::size_t>(j)]) {
          batch.col(j).setConstant(x[j]);
        } else {
          batch.col(j) = background.col(j);
        }
      }
      v[static_cast<Eigen::Index>(m)] = model(batch).mean();
    }

    // constrained WLS: eliminate phi_d via the additivity constraint
    const Eigen::Index rows = static_cast<Eigen::Index>(masks.size());
    Eigen::MatrixXd A(rows, d - 1);
    Eigen::VectorXd b(rows);
    Eigen::VectorXd w(rows);
    for (Eigen::Index m = 0; m < rows; ++m) {
      const Mask& mask = masks[static_cast<std::size_t>(m)];
      const double zd = mask[static_cast<std::size_t>(d - 1)] ? 1.0 : 0.0;
      int size = 0;
      for (const auto bit : mask) size += bit;
      for (int j = 0; j + 1 < d; ++j) {
        A(m, j) = (mask[static_cast<std::size_t>(j)] ? 1.0 : 0.0) - zd;
      }
      b[m] = v[m] - base_value - zd * (fx - base_value);
      w[m] = shapley_kernel_weight(d, size);
    }

    const Eigen::MatrixXd Aw = w.asDiagonal() * A;
    Eigen::MatrixXd normal = A.transpose() * Aw;
    const Eigen::VectorXd rhs = A.transpose() * (w.asDiagonal() * b);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    Eigen::VectorXd phi_head;
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
      phi_head = ldlt.solve(rhs);
      ok = phi_head.allFinite() &&
           (normal * phi_head - rhs).norm() <= 1e-6 * (1.0 + rhs.norm());
    }
    if (!ok) {
      normal.diagonal().array() += 1e-8;  // ridge fallback on singular systems
      phi_head = Eigen::LDLT<Eigen::MatrixXd>(normal).solve(rhs);
      ridge_flags[i] = true;
    }

    double tail = fx - base_value;
    for (Eigen::Index j = 0; j + 1 < d; ++j) {
      out.values(static_cast<Eigen::Index>(i), j) = phi_head[j];
      tail -= phi_head[j];
    }
    out.values(static_cast<Eigen::Index>(i), d - 1) = tail;
  });

  for (const bool f : ridge_flags) {
    if (f) out.ridge_fallback = true;
  }
  return out;
}

FeatureRanking rank_mean_abs_shap(const ShapAttribution& attribution) {
  if (attribution.values.rows() == 0) {
    throw ValidationError("rank_mean_abs_shap: empty attribution");
  }
  std::map<Feature, double> scores;
  for (Eigen::Index j = 0; j < attribution.values.cols(); ++j) {
    const Feature f = attribution.features.empty()
                          ? Feature{"x" + std::to_string(j), 0}
                          : attribution.features[static_cast<std::size_t>(j)];
    scores[f] = attribution.values.col(j).cwiseAbs().mean();
  }
  return make_ranking(std::move(scores));
}

DifferenceDecomposition decompose_difference(const ShapAttribution& shap_f,
                                             const ShapAttribution& shap_g,
                                             const std::vector<Feature>& common,
                                             const std::vector<Feature>& added) {
  auto index_of = [](const ShapAttribution& a, const Feature& f) {
    for (std::size_t j = 0; j < a.features.size(); ++j) {
      if (a.features[j] == f) return static_cast<Eigen::Index>(j);
    }
    return Eigen::Index{-1};
  };

  // feature-set contract: f == common, g == common U added
  {
    std::set<Feature> fset(shap_f.features.begin(), shap_f.features.end());
    std::set<Feature> want_f(common.begin(), common.end());
    std::set<Feature> gset(shap_g.features.begin(), shap_g.features.end());
    std::set<Feature> want_g = want_f;
    want_g.insert(added.begin(), added.end());
    if (fset != want_f || gset != want_g) {
      std::ostringstream os;
      os << "decompose_difference: feature sets do not match;";
      for (const auto& f : want_f) {
        if (!fset.count(f)) os << " f-missing:" << f.label();
      }
      for (const auto& f : fset) {
        if (!want_f.count(f)) os << " f-extra:" << f.label();
      }
      for (const auto& f : want_g) {
        if (!gset.count(f)) os << " g-missing:" << f.label();
      }
      for (const auto& f : gset) {
        if (!want_g.count(f)) os << " g-extra:" << f.label();
      }
      throw ValidationError(os.str());
    }
  }
  if (shap_f.values.rows() != shap_g.values.rows()) {
    throw ValidationError("decompose_difference: instance counts differ");
  }
  // same instances: shared columns must carry identical values
  for (const auto& f : common) {
    const Eigen::Index jf = index_of(shap_f, f);
    const Eigen::Index jg = index_of(shap_g, f);
    if ((shap_f.instances.col(jf) - shap_g.instances.col(jg)).cwiseAbs().maxCoeff() > 0.0) {
      throw ValidationError("decompose_difference: instance values differ on " + f.label());
    }
  }

  const Eigen::Index n = shap_f.values.rows();
  DifferenceDecomposition out;
  out.common = common;
  out.added = added;
  out.delta_base = shap_f.base_value - shap_g.base_value;
  out.common_terms.resize(n, static_cast<Eigen::Index>(common.size()));
  out.added_terms.resize(n, static_cast<Eigen::Index>(added.size()));
  for (std::size_t j = 0; j < common.size(); ++j) {
    out.common_terms.col(static_cast<Eigen::Index>(j)) =
        shap_f.values.col(index_of(shap_f, common[j])) -
        shap_g.values.col(index_of(shap_g, common[j]));
  }
  for (std::size_t j = 0; j < added.size(); ++j) {
    out.added_terms.col(static_cast<Eigen::Index>(j)) =
        -shap_g.values.col(index_of(shap_g, added[j]));
  }
  out.delta_pred = shap_f.predictions - shap_g.predictions;
  out.residual.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double reconstructed = out.delta_base + out.common_terms.row(i).sum() +
                                 out.added_terms.row(i).sum();
    out.residual[i] = out.delta_pred[i] - reconstructed;
  }
  return out;
}

}  // namespace stormsel
