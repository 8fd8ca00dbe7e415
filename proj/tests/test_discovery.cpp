#include <doctest.h>

#include <cmath>

#include "stormsel/discovery.hpp"
#include "stormsel/error.hpp"
#include "stormsel/synth.hpp"
#include "test_support.hpp"

using namespace stormsel;
using test_support::WarningCapture;

TEST_SUITE_BEGIN("discovery");

namespace {

MpcOptions window(int lag_min, int lag_max, double alpha) {
  MpcOptions opt;
  opt.lag_min = lag_min;
  opt.lag_max = lag_max;
  opt.pc_alpha = alpha;
  return opt;
}

SynthPanel chain_panel(std::uint64_t seed = 21) {
  ScmSpec spec;
  spec.variables = {"X1", "X2", "Y"};
  spec.links = {{"X1", "X1", 1, 0.5}, {"X1", "X2", 1, 0.9}, {"X2", "Y", 1, 0.8}};
  spec.target = "Y";
  spec.n_storms = 8;
  spec.length = 1200;
  spec.seed = seed;
  return generate_panel(spec);
}

}  // namespace

TEST_CASE("noise target yields an empty set across seeds") {
  int empty = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    ScmSpec spec;
    spec.variables = {"A", "B", "C", "Y"};
    spec.target = "Y";
    spec.n_storms = 3;
    spec.length = 250;
    spec.seed = 700 + seed;
    const SynthPanel p = generate_panel(spec);
    const auto set =
        mpc_select(p.panel, p.panel.storm_ids(), {}, window(1, 2, 0.01));
    if (set.members.empty()) ++empty;
  }
  CHECK(empty >= 7);
}

TEST_CASE("chain: mediator kept, upstream variable removed at level 1") {
  const SynthPanel p = chain_panel();
  const auto set = mpc_select(p.panel, p.panel.storm_ids(), {}, window(1, 1, 0.01));
  REQUIRE(set.members.size() == 1);
  CHECK(set.members[0].feature == Feature{"X2", 1});
  CHECK(set.members[0].strength > 0.5);
}

TEST_CASE("heuristic equals the exhaustive oracle on chain panels") {
  const SynthPanel p = chain_panel(33);
  const auto ids = p.panel.storm_ids();
  for (const double alpha : {0.001, 0.01, 0.05, 0.2}) {
    const auto heuristic = mpc_select(p.panel, ids, {}, window(1, 2, alpha));
    // identical candidate universe for both routes (target lags included)
    std::vector<Feature> candidates;
    for (const auto code : {"X1", "X2", "Y"}) {
      candidates.push_back({code, 1});
      candidates.push_back({code, 2});
    }
    const auto oracle = exhaustive_ci_oracle(p.panel, candidates, alpha, ids);
    CHECK(heuristic.features() == oracle);
  }
}

TEST_CASE("forced links survive any alpha and appear in the output") {
  const SynthPanel p = chain_panel(5);
  LinkAssumptions assumptions;
  assumptions.set({"X1", 2}, LinkStatus::forced);  // not a true parent
  for (const double alpha : {0.001, 0.05, 0.4}) {
    MpcOptions opt = window(1, 2, alpha);
    opt.mode = AssumptionMode::withASSUMPS;
    const auto set = mpc_select(p.panel, p.panel.storm_ids(), assumptions, opt);
    CHECK(set.contains({"X1", 2}));
    CHECK(set.mode == AssumptionMode::withASSUMPS);
  }
}

TEST_CASE("forbidden links never enter the candidate set") {
  const SynthPanel p = chain_panel(6);
  LinkAssumptions assumptions;
  assumptions.set({"X2", 1}, LinkStatus::forbidden);  // the true parent
  const auto set = mpc_select(p.panel, p.panel.storm_ids(), assumptions, window(1, 1, 0.05));
  CHECK_FALSE(set.contains({"X2", 1}));
}

TEST_CASE("single-lag mode restricts candidates to one lag per predictor") {
  const SynthPanel p = chain_panel(7);
  const auto set = mpc_select(p.panel, p.panel.storm_ids(), {}, window(1, 1, 0.5));
  for (const auto& m : set.members) CHECK(m.feature.lag == 1);
}

TEST_CASE("determinism: byte-identical serialization run to run") {
  const SynthPanel p = chain_panel(9);
  const auto a = mpc_select(p.panel, p.panel.storm_ids(), {}, window(1, 3, 0.05));
  const auto b = mpc_select(p.panel, p.panel.storm_ids(), {}, window(1, 3, 0.05));
  CHECK(a.serialize() == b.serialize());

  SUBCASE("parallel jobs do not change the result") {
    MpcOptions opt = window(1, 3, 0.05);
    opt.jobs = 8;
    const auto c = mpc_select(p.panel, p.panel.storm_ids(), {}, opt);
    CHECK(c.serialize() == a.serialize());
  }
}

TEST_CASE("members are sorted canonically and unique") {
  const SynthPanel p = chain_panel(11);
  const auto set = mpc_select(p.panel, p.panel.storm_ids(), {}, window(1, 4, 0.6));
  for (std::size_t i = 1; i < set.members.size(); ++i) {
    CHECK(set.members[i - 1].feature < set.members[i].feature);
  }
}

TEST_CASE("sweep_alpha: independent per alpha, near-1 alpha keeps level-0 survivors") {
  const SynthPanel p = chain_panel(13);
  const std::vector<double> alphas = {0.001, 0.05, 0.3, 0.999};
  const auto sets = sweep_alpha(p.panel, p.panel.storm_ids(), {}, window(1, 2, 0.05), alphas);
  REQUIRE(sets.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(sets[i].pc_alpha == alphas[i]);
  // alpha -> 1: every unconditional dependence survives (conditional removals
  // also need p > alpha, nearly impossible at 0.999 for dependent links)
  CHECK(sets[3].members.size() >= sets[0].members.size());

  const auto rerun = sweep_alpha(p.panel, p.panel.storm_ids(), {}, window(1, 2, 0.05), alphas);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    CHECK(sets[i].serialize() == rerun[i].serialize());
  }
}

TEST_CASE("feature set serialization round trip") {
  SelectedFeatureSet set;
  set.pc_alpha = 0.05;
  set.mode = AssumptionMode::withASSUMPS;
  set.fold = 3;
  set.members = {{{"SHL0", 4}, 0.31}, {{"PVOR", 17}, 0.125}};
  const auto text = set.serialize();
  const auto back = SelectedFeatureSet::deserialize(text, "roundtrip");
  CHECK(back.pc_alpha == set.pc_alpha);
  CHECK(back.mode == set.mode);
  CHECK(back.fold == set.fold);
  REQUIRE(back.members.size() == 2);
  CHECK(back.members[0].feature == set.members[0].feature);
  CHECK(back.members[1].strength == set.members[1].strength);
}

TEST_CASE("untestable candidates are removed with a warning unless forced") {
  // tiny panel: lag window close to the panel length leaves too few rows
  ScmSpec spec;
  spec.variables = {"A", "Y"};
  spec.links = {{"A", "Y", 1, 0.9}};
  spec.target = "Y";
  spec.n_storms = 1;
  spec.length = 5;
  spec.seed = 1;
  const SynthPanel p = generate_panel(spec);
  WarningCapture capture;
  const auto set = mpc_select(p.panel, p.panel.storm_ids(), {}, window(4, 4, 0.05));
  CHECK(set.members.empty());
  CHECK(capture.any_contains("untestable"));
}

TEST_CASE("invalid lag window and alpha are validation errors") {
  const SynthPanel p = chain_panel(15);
  CHECK_THROWS_AS(mpc_select(p.panel, p.panel.storm_ids(), {}, window(3, 1, 0.05)),
                  ValidationError);
  CHECK_THROWS_AS(mpc_select(p.panel, p.panel.storm_ids(), {}, window(0, 1, 0.0)),
                  ValidationError);
}

TEST_SUITE_END();
