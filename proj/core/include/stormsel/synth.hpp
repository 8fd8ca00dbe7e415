#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stormsel/dataset.hpp"
#include "stormsel/feature.hpp"

namespace stormsel {

enum class LinkTag { linear, squared, tanh_saturating };

struct ScmLink {
  std::string parent;
  std::string child;
  int lag = 0;
  double coeff = 0.0;
  LinkTag tag = LinkTag::linear;
};

/// Declarative linear/weakly-nonlinear structural causal model over lagged
/// links, simulated independently per storm with Gaussian innovations.
struct ScmSpec {
  std::vector<std::string> variables;  // declaration order = catalog order
  std::vector<ScmLink> links;
  std::map<std::string, double> noise_std;  // default 1.0
  std::string target;
  std::string vmax_var;  // optional: variable doubling as the storm's VMAX
  int n_storms = 0;
  int length = 0;
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
  int max_lag() const;

  static ScmSpec from_file(const std::string& path);
  static ScmSpec from_string(const std::string& text, const std::string& origin);
  std::string serialize() const;
};

struct SynthPanel {
  AlignedPanel panel;
  std::vector<Feature> true_parents;  // (parent, lag) links into the target
};

/// Simulates the SCM: per-storm independent realizations, burn-in of
/// 10 x max_lag discarded, panel trivially aligned (no padding). The target
/// column of the spec becomes the panel target. Throws if any value exceeds
/// 1e6 (unstable coefficients).
SynthPanel generate_panel(const ScmSpec& spec);

/// Reference PC semantics for small systems: a candidate is retained iff no
/// conditioning subset of the other candidates (any size, including empty)
/// renders it independent of the target at pc_alpha. Refuses more than 6
/// candidates. Shares the pooled CI test with discovery by design; the CI
/// test itself is validated against an independent oracle elsewhere.
std::vector<Feature> exhaustive_ci_oracle(const AlignedPanel& panel,
                                          const std::vector<Feature>& candidates,
                                          double pc_alpha,
                                          const std::vector<std::string>& storm_ids);

/// Writes one CSV per storm (dataset format), a manifest, and a ground-truth
/// file `truth.csv` (`parent,lag` lines). `n_test` trailing storms get the
/// test role. Returns the list of files written (relative to out_dir).
std::vector<std::string> export_panel_csv(const SynthPanel& synth, const std::string& out_dir,
                                          int n_test);

}  // namespace stormsel
