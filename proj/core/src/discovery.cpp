#include "stormsel/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stormsel/csv.hpp"
#include "stormsel/error.hpp"
#include "stormsel/log.hpp"
#include "stormsel/parallel.hpp"

namespace stormsel {

const char* to_string(AssumptionMode mode) {
  return mode == AssumptionMode::withASSUMPS ? "withASSUMPS" : "noASSUMPS";
}

AssumptionMode assumption_mode_from_string(const std::string& s) {
  if (s == "withASSUMPS") return AssumptionMode::withASSUMPS;
  if (s == "noASSUMPS") return AssumptionMode::noASSUMPS;
  throw ValidationError("unknown assumption mode '" + s + "' (expected withASSUMPS or noASSUMPS)");
}

bool SelectedFeatureSet::contains(const Feature& f) const {
  for (const auto& m : members) {
    if (m.feature == f) return true;
  }
  return false;
}

std::vector<Feature> SelectedFeatureSet::features() const {
  std::vector<Feature> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m.feature);
  return out;
}

std::string SelectedFeatureSet::serialize() const {
  std::ostringstream os;
  os << "# pc_alpha=" << format_double(pc_alpha) << " mode=" << to_string(mode)
     << " fold=" << fold << "\n";
  for (const auto& m : members) {
    os << m.feature.code << "," << m.feature.lag << "," << format_double(m.strength) << "\n";
  }
  return os.str();
}

SelectedFeatureSet SelectedFeatureSet::deserialize(const std::string& text,
                                                   const std::string& origin) {
  SelectedFeatureSet set;
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0].rfind("# pc_alpha=", 0) != 0) {
    throw ParseError(origin + ": missing feature-set header");
  }
  std::istringstream hs(lines[0].substr(1));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "pc_alpha") set.pc_alpha = parse_hex_double(val, "in " + origin);
    if (key == "mode") set.mode = assumption_mode_from_string(val);
    if (key == "fold") set.fold = std::stoi(val);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != 3) {
      throw ParseError(origin + ": expected 'predictor,lag,strength' at line " +
                       std::to_string(i + 1));
    }
    SelectedFeature m;
    m.feature.code = cells[0];
    m.feature.lag = static_cast<int>(parse_hex_double(cells[1], "lag in " + origin));
    m.strength = parse_hex_double(cells[2], "strength in " + origin);
    set.members.push_back(std::move(m));
  }
  return set;
}

namespace {

struct Candidate {
  Feature feature;
  bool forced = false;
  double strength = 0.0;  // |r| from the most recent test
};

}  // namespace

SelectedFeatureSet mpc_select(const AlignedPanel& panel,
                              const std::vector<std::string>& train_ids,
                              const LinkAssumptions& assumptions,
                              const MpcOptions& options) {
  if (options.lag_min < 0 || options.lag_min > options.lag_max ||
      static_cast<std::size_t>(options.lag_max) >= panel.length()) {
    throw ValidationError("mpc_select: lag window [" + std::to_string(options.lag_min) +
                          "," + std::to_string(options.lag_max) +
                          "] invalid for panel length " + std::to_string(panel.length()));
  }
  if (options.pc_alpha <= 0.0 || options.pc_alpha >= 1.0) {
    throw ValidationError("mpc_select: pc_alpha must be in (0, 1)");
  }

  // Candidate set, canonical (code, lag) order. Panel codes may arrive in
  // catalog order; sort a copy.
  std::vector<std::string> codes = panel.codes;
  std::sort(codes.begin(), codes.end());
  std::vector<Candidate> candidates;
  for (const auto& code : codes) {
    for (int lag = options.lag_min; lag <= options.lag_max; ++lag) {
      const Feature f{code, lag};
      if (code == panel.target_code && lag == 0) continue;
      const LinkStatus status = assumptions.status(f);
      if (status == LinkStatus::forbidden) continue;
      candidates.push_back({f, status == LinkStatus::forced, 0.0});
    }
  }

  SelectedFeatureSet result;
  result.pc_alpha = options.pc_alpha;
  result.mode = options.mode;
  result.fold = options.fold;
  if (candidates.empty()) return result;

  // Level 0: unconditional tests.
  {
    std::vector<CITestResult> tests(candidates.size());
    parallel_for(candidates.size(), options.jobs, [&](std::size_t i) {
      tests[i] = ci_test(panel, candidates[i].feature, {}, train_ids);
    });
    std::vector<Candidate> survivors;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      Candidate c = candidates[i];
      const auto& t = tests[i];
      if (t.untestable) {
        if (c.forced) {
          warn("forced link " + c.feature.label() + " untestable; kept with strength 0");
          c.strength = 0.0;
          survivors.push_back(c);
        } else {
          warn("candidate " + c.feature.label() + " untestable at level 0; removed");
        }
        continue;
      }
      c.strength = std::fabs(t.r);
      if (c.forced || !is_independent(t, options.pc_alpha)) {
        survivors.push_back(c);
      }
    }
    candidates = std::move(survivors);
  }

  // Levels p >= 1: condition each non-forced survivor on the p strongest
  // other survivors from the previous level; removals applied at the barrier.
  const int max_cond =
      options.max_cond_size < 0 ? std::numeric_limits<int>::max() : options.max_cond_size;
  for (int p = 1; p <= max_cond; ++p) {
    if (static_cast<std::size_t>(p) + 1 > candidates.size()) break;  // needs p others

    // Strength ranking snapshot (PC-stable: fixed during the level). Ties
    // break toward canonical order, which candidates already carry.
    std::vector<std::size_t> rank(candidates.size());
    for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return candidates[a].strength > candidates[b].strength;
    });

    std::vector<int> decision(candidates.size(), 1);  // 1 keep, 0 remove
    std::vector<double> new_strength(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      new_strength[i] = candidates[i].strength;
    }

    parallel_for(candidates.size(), options.jobs, [&](std::size_t i) {
      if (candidates[i].forced) return;
      std::vector<Feature> cond;
      cond.reserve(static_cast<std::size_t>(p));
      for (std::size_t r = 0; r < rank.size() && cond.size() < static_cast<std::size_t>(p); ++r) {
        if (rank[r] == i) continue;
        cond.push_back(candidates[rank[r]].feature);
      }
      const CITestResult t = ci_test(panel, candidates[i].feature, cond, train_ids);
      if (t.untestable) {
        warn("candidate " + candidates[i].feature.label() + " untestable at level " +
             std::to_string(p) + "; removed");
        decision[i] = 0;
        return;
      }
      new_strength[i] = std::fabs(t.r);
      if (is_independent(t, options.pc_alpha)) decision[i] = 0;
    });

    std::vector<Candidate> survivors;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!decision[i]) continue;
      Candidate c = candidates[i];
      c.strength = new_strength[i];
      survivors.push_back(c);
    }
    candidates = std::move(survivors);
  }

  result.members.reserve(candidates.size());
  for (const auto& c : candidates) {
    result.members.push_back({c.feature, c.strength});
  }
  return result;
}

std::vector<SelectedFeatureSet> sweep_alpha(const AlignedPanel& panel,
                                            const std::vector<std::string>& train_ids,
                                            const LinkAssumptions& assumptions,
                                            MpcOptions options,
                                            const std::vector<double>& alphas) {
  if (alphas.empty()) throw ValidationError("sweep_alpha: empty alpha grid");
  std::vector<SelectedFeatureSet> out;
  out.reserve(alphas.size());
  for (const double a : alphas) {
    options.pc_alpha = a;
    out.push_back(mpc_select(panel, train_ids, assumptions, options));
  }
  return out;
}

}  // namespace stormsel
