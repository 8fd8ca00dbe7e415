#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "stormsel/citest.hpp"
#include "stormsel/csv.hpp"
#include "stormsel/dataset.hpp"
#include "stormsel/error.hpp"
#include "stormsel/synth.hpp"
#include "test_support.hpp"

using namespace stormsel;

TEST_SUITE_BEGIN("synth");

namespace {

ScmSpec chain_spec() {
  // X1 -> X2 -> Y, all lag 1, plus autocorrelation on X1
  ScmSpec spec;
  spec.variables = {"X1", "X2", "Y"};
  spec.links = {{"X1", "X1", 1, 0.5}, {"X1", "X2", 1, 0.9}, {"X2", "Y", 1, 0.8}};
  spec.target = "Y";
  spec.n_storms = 4;
  spec.length = 400;
  spec.seed = 21;
  return spec;
}

}  // namespace

TEST_CASE("spec file round trip and validation") {
  const std::string text =
      "var X1 1.0\n"
      "var Y 0.5\n"
      "link X1 Y 2 0.7 linear\n"
      "target Y\n"
      "n_storms 3\n"
      "length 50\n"
      "seed 9\n";
  const ScmSpec spec = ScmSpec::from_string(text, "inline");
  CHECK(spec.variables.size() == 2);
  CHECK(spec.links.size() == 1);
  CHECK(spec.links[0].lag == 2);
  CHECK(spec.noise_std.at("Y") == 0.5);

  const ScmSpec again = ScmSpec::from_string(spec.serialize(), "roundtrip");
  CHECK(again.serialize() == spec.serialize());

  SUBCASE("unknown key is a parse error") {
    CHECK_THROWS_AS(ScmSpec::from_string(text + "bogus 1\n", "inline"), ParseError);
  }
  SUBCASE("undeclared target rejected") {
    CHECK_THROWS_AS(ScmSpec::from_string("var A\ntarget B\nn_storms 1\nlength 10\n", "x"),
                    ValidationError);
  }
  SUBCASE("lag-0 cycle rejected") {
    const std::string cyclic =
        "var A\nvar B\nlink A B 0 1.0\nlink B A 0 1.0\ntarget A\nn_storms 1\nlength 10\n";
    CHECK_THROWS_AS(ScmSpec::from_string(cyclic, "x"), ValidationError);
  }
}

TEST_CASE("generate_panel: determinism and ground truth readback") {
  const ScmSpec spec = chain_spec();
  const SynthPanel a = generate_panel(spec);
  const SynthPanel b = generate_panel(spec);
  REQUIRE(a.panel.storms.size() == 4);
  CHECK(a.panel.storms[0].values == b.panel.storms[0].values);
  CHECK(a.true_parents == std::vector<Feature>{{"X2", 1}});
  CHECK(a.panel.target_code == "Y");

  SUBCASE("storms are mutually independent realizations") {
    CHECK(a.panel.storms[0].values != a.panel.storms[1].values);
    // innovation-level correlation across storms stays near zero
    const auto& s0 = a.panel.storms[0].values;
    const auto& s1 = a.panel.storms[1].values;
    const Eigen::VectorXd x0 = s0.col(0).array() - s0.col(0).mean();
    const Eigen::VectorXd x1 = s1.col(0).array() - s1.col(0).mean();
    const double corr = x0.dot(x1) / std::sqrt(x0.squaredNorm() * x1.squaredNorm());
    CHECK(std::fabs(corr) < 0.15);
  }
}

TEST_CASE("pure-noise spec has no target parents") {
  ScmSpec spec;
  spec.variables = {"A", "B", "Y"};
  spec.target = "Y";
  spec.n_storms = 2;
  spec.length = 100;
  spec.seed = 1;
  const SynthPanel p = generate_panel(spec);
  CHECK(p.true_parents.empty());
}

TEST_CASE("declared noise_std matches empirical innovation std within 5%") {
  ScmSpec spec;
  spec.variables = {"A"};
  spec.noise_std["A"] = 2.5;
  spec.target = "A";
  spec.n_storms = 1;
  spec.length = 4000;
  spec.seed = 53;
  const SynthPanel p = generate_panel(spec);
  const auto& col = p.panel.storms[0].values.col(0);
  const double mean = col.mean();
  const double sd = std::sqrt((col.array() - mean).square().sum() / col.size());
  CHECK(sd == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("unstable dynamics raise a rescale error") {
  ScmSpec spec;
  spec.variables = {"A"};
  spec.links = {{"A", "A", 1, 1.8}};
  spec.target = "A";
  spec.n_storms = 1;
  spec.length = 200;
  spec.seed = 3;
  CHECK_THROWS_WITH_AS(generate_panel(spec), doctest::Contains("rescale"), ValidationError);
}

TEST_CASE("nonlinear link tags shape the data") {
  ScmSpec spec;
  spec.variables = {"X", "Y"};
  spec.noise_std["Y"] = 0.1;
  spec.links = {{"X", "Y", 1, 1.0, LinkTag::squared}};
  spec.target = "Y";
  spec.n_storms = 1;
  spec.length = 2000;
  spec.seed = 8;
  const SynthPanel p = generate_panel(spec);
  const auto& v = p.panel.storms[0].values;
  // y_t ~ x_{t-1}^2: linear correlation ~0, correlation with squares strong
  Eigen::VectorXd x(v.rows() - 1), y(v.rows() - 1);
  for (Eigen::Index t = 1; t < v.rows(); ++t) {
    x[t - 1] = v(t - 1, 0);
    y[t - 1] = v(t, 1);
  }
  auto corr = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  };
  CHECK(std::fabs(corr(x, y)) < 0.1);
  CHECK(corr(x.array().square().matrix(), y) > 0.8);
}

TEST_CASE("confounder: correlation flags the decoy, CI test clears it") {
  // C -> X, C -> Y; X has no link into Y. C autocorrelated so lagged
  // correlations propagate.
  ScmSpec spec;
  spec.variables = {"C", "X", "Y"};
  spec.noise_std = {{"C", 1.0}, {"X", 0.3}, {"Y", 0.3}};
  spec.links = {{"C", "C", 1, 0.7}, {"C", "X", 1, 1.0}, {"C", "Y", 1, 1.0}};
  spec.target = "Y";
  spec.n_storms = 6;
  spec.length = 800;
  spec.seed = 99;
  const SynthPanel p = generate_panel(spec);
  const auto ids = p.panel.storm_ids();

  // decoy X at lag 2 correlates with Y (through C at lag 1... C lag 2 drives both)
  const auto marginal = ci_test(p.panel, {"X", 2}, {}, ids);
  CHECK(marginal.p_value < 1e-6);
  // conditioning on the confounder's driving lag accepts independence
  const auto conditioned = ci_test(p.panel, {"X", 2}, {{"C", 1}, {"C", 2}}, ids);
  CHECK(conditioned.p_value > 0.01);
}

TEST_CASE("exhaustive oracle: chain retains only the mediator") {
  const SynthPanel p = generate_panel(chain_spec());
  const auto ids = p.panel.storm_ids();
  const std::vector<Feature> candidates = {{"X1", 1}, {"X1", 2}, {"X2", 1}, {"X2", 2}};
  const auto kept = exhaustive_ci_oracle(p.panel, candidates, 0.01, ids);
  CHECK(kept == std::vector<Feature>{{"X2", 1}});
}

TEST_CASE("exhaustive oracle: collider keeps both independent parents") {
  ScmSpec spec;
  spec.variables = {"X", "Z", "Y"};
  spec.noise_std["Y"] = 0.5;
  spec.links = {{"X", "Y", 1, 0.8}, {"Z", "Y", 1, -0.8}};
  spec.target = "Y";
  spec.n_storms = 4;
  spec.length = 600;
  spec.seed = 2;
  const SynthPanel p = generate_panel(spec);
  const auto kept = exhaustive_ci_oracle(p.panel, {{"X", 1}, {"Z", 1}}, 0.05,
                                         p.panel.storm_ids());
  CHECK(kept == std::vector<Feature>{{"X", 1}, {"Z", 1}});
}

TEST_CASE("exhaustive oracle: empty graph retains nothing at small alpha") {
  int clean = 0;
  const int trials = 10;
  for (int s = 0; s < trials; ++s) {
    ScmSpec spec;
    spec.variables = {"A", "B", "Y"};
    spec.target = "Y";
    spec.n_storms = 3;
    spec.length = 300;
    spec.seed = 500 + static_cast<std::uint64_t>(s);
    const SynthPanel p = generate_panel(spec);
    const auto kept = exhaustive_ci_oracle(p.panel, {{"A", 1}, {"B", 1}}, 0.01,
                                           p.panel.storm_ids());
    if (kept.empty()) ++clean;
  }
  CHECK(clean >= 9);  // >= 0.9 probability over seeds
}

TEST_CASE("exhaustive oracle refuses more than 6 candidates") {
  const SynthPanel p = generate_panel(chain_spec());
  std::vector<Feature> many;
  for (int lag = 1; lag <= 4; ++lag) {
    many.push_back({"X1", lag});
    many.push_back({"X2", lag});
  }
  CHECK_THROWS_AS(exhaustive_ci_oracle(p.panel, many, 0.05, p.panel.storm_ids()),
                  ValidationError);
}

TEST_CASE("panel CSV export round-trips through the dataset loader") {
  ScmSpec spec = chain_spec();
  spec.n_storms = 3;
  spec.length = 40;
  const SynthPanel p = generate_panel(spec);
  const auto dir = (std::filesystem::temp_directory_path() / "synth_export").string();
  std::filesystem::remove_all(dir);
  const auto files = export_panel_csv(p, dir, 1);
  CHECK(files.size() == 3 + 2);  // storms + manifest + truth

  const auto entries = load_manifest(dir + "/manifest.txt");
  REQUIRE(entries.size() == 3);
  CHECK(entries[2].is_test);
  const StormSeries s = load_storm_csv(entries[0].path);
  CHECK(s.length() == 40);
  REQUIRE(s.codes == p.panel.codes);
  for (Eigen::Index t = 0; t < 40; ++t) {
    for (std::size_t j = 0; j < s.codes.size(); ++j) {
      CHECK(s.columns[j][static_cast<std::size_t>(t)] ==
            p.panel.storms[0].values(t, static_cast<Eigen::Index>(j)));
    }
  }
}

TEST_SUITE_END();
