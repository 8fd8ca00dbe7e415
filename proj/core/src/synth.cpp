#include "stormsel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "stormsel/citest.hpp"
#include "stormsel/csv.hpp"
#include "stormsel/error.hpp"
#include "stormsel/rng.hpp"

namespace stormsel {

namespace {

const char* tag_name(LinkTag tag) {
  switch (tag) {
    case LinkTag::squared: return "squared";
    case LinkTag::tanh_saturating: return "tanh";
    default: return "linear";
  }
}

LinkTag tag_from_string(const std::string& s, const std::string& origin) {
  if (s == "linear") return LinkTag::linear;
  if (s == "squared") return LinkTag::squared;
  if (s == "tanh") return LinkTag::tanh_saturating;
  throw ParseError(origin + ": unknown link tag '" + s + "'");
}

double apply_tag(LinkTag tag, double x) {
  switch (tag) {
    case LinkTag::squared: return x * x;
    case LinkTag::tanh_saturating: return std::tanh(x);
    default: return x;
  }
}

}  // namespace

int ScmSpec::max_lag() const {
  int m = 0;
  for (const auto& l : links) m = std::max(m, l.lag);
  return m;
}

void ScmSpec::validate() const {
  if (variables.empty()) throw ValidationError("scm spec: no variables declared");
  if (n_storms <= 0) throw ValidationError("scm spec: n_storms must be positive");
  if (length <= 0) throw ValidationError("scm spec: length must be positive");
  std::set<std::string> vars(variables.begin(), variables.end());
  if (vars.size() != variables.size()) throw ValidationError("scm spec: duplicate variable name");
  if (!vars.count(target)) {
    throw ValidationError("scm spec: target '" + target + "' is not a declared variable");
  }
  if (!vmax_var.empty() && !vars.count(vmax_var)) {
    throw ValidationError("scm spec: vmax_var '" + vmax_var + "' is not a declared variable");
  }
  for (const auto& l : links) {
    if (!vars.count(l.parent)) throw ValidationError("scm spec: unknown link parent '" + l.parent + "'");
    if (!vars.count(l.child)) throw ValidationError("scm spec: unknown link child '" + l.child + "'");
    if (l.lag < 0) throw ValidationError("scm spec: negative lag on link " + l.parent + "->" + l.child);
    if (!std::isfinite(l.coeff)) throw ValidationError("scm spec: non-finite coefficient");
  }
  // lag-0 subgraph must be acyclic (checked by attempting a topo order)
  std::map<std::string, std::vector<std::string>> zero_children;
  std::map<std::string, int> indeg;
  for (const auto& v : variables) indeg[v] = 0;
  for (const auto& l : links) {
    if (l.lag == 0) {
      zero_children[l.parent].push_back(l.child);
      indeg[l.child]++;
    }
  }
  std::vector<std::string> queue;
  for (const auto& [v, d] : indeg) {
    if (d == 0) queue.push_back(v);
  }
  std::size_t seen = 0;
  while (!queue.empty()) {
    const std::string v = queue.back();
    queue.pop_back();
    ++seen;
    for (const auto& c : zero_children[v]) {
      if (--indeg[c] == 0) queue.push_back(c);
    }
  }
  if (seen != variables.size()) {
    throw ValidationError("scm spec: contemporaneous (lag 0) links form a cycle");
  }
}

ScmSpec ScmSpec::from_file(const std::string& path) {
  return from_string(read_text_file(path), path);
}

ScmSpec ScmSpec::from_string(const std::string& text, const std::string& origin) {
  ScmSpec spec;
  std::size_t lineno = 0;
  for (const auto& raw : split_lines(text)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream is(line);
    std::string key;
    if (!(is >> key)) continue;
    const std::string at = origin + ":" + std::to_string(lineno);
    if (key == "var") {
      std::string name;
      double noise = 1.0;
      if (!(is >> name)) throw ParseError(at + ": var needs a name");
      if (is >> noise) spec.noise_std[name] = noise;
      spec.variables.push_back(name);
    } else if (key == "link") {
      ScmLink l;
      if (!(is >> l.parent >> l.child >> l.lag >> l.coeff)) {
        throw ParseError(at + ": link needs 'parent child lag coeff [tag]'");
      }
      std::string tag;
      if (is >> tag) l.tag = tag_from_string(tag, at);
      spec.links.push_back(l);
    } else if (key == "target") {
      if (!(is >> spec.target)) throw ParseError(at + ": target needs a variable name");
    } else if (key == "vmax_var") {
      if (!(is >> spec.vmax_var)) throw ParseError(at + ": vmax_var needs a variable name");
    } else if (key == "n_storms") {
      if (!(is >> spec.n_storms)) throw ParseError(at + ": n_storms needs an integer");
    } else if (key == "length") {
      if (!(is >> spec.length)) throw ParseError(at + ": length needs an integer");
    } else if (key == "seed") {
      if (!(is >> spec.seed)) throw ParseError(at + ": seed needs an integer");
    } else {
      throw ParseError(at + ": unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string ScmSpec::serialize() const {
  std::ostringstream os;
  for (const auto& v : variables) {
    const auto it = noise_std.find(v);
    os << "var " << v << " " << format_double(it == noise_std.end() ? 1.0 : it->second) << "\n";
  }
  for (const auto& l : links) {
    os << "link " << l.parent << " " << l.child << " " << l.lag << " "
       << format_double(l.coeff) << " " << tag_name(l.tag) << "\n";
  }
  os << "target " << target << "\n";
  if (!vmax_var.empty()) os << "vmax_var " << vmax_var << "\n";
  os << "n_storms " << n_storms << "\n";
  os << "length " << length << "\n";
  os << "seed " << seed << "\n";
  return os.str();
}

SynthPanel generate_panel(const ScmSpec& spec) {
  spec.validate();
  const int burn_in = 10 * spec.max_lag();
  const int total = burn_in + spec.length;
  const std::size_t nvars = spec.variables.size();

  std::map<std::string, std::size_t> var_index;
  for (std::size_t i = 0; i < nvars; ++i) var_index[spec.variables[i]] = i;

  // Evaluation order: lag-0 links must see their parents' current values.
  std::vector<std::size_t> order(nvars);
  {
    std::vector<std::vector<std::size_t>> zero_children(nvars);
    std::vector<int> indeg(nvars, 0);
    for (const auto& l : spec.links) {
      if (l.lag == 0) {
        zero_children[var_index.at(l.parent)].push_back(var_index.at(l.child));
        indeg[var_index.at(l.child)]++;
      }
    }
    std::vector<std::size_t> queue;
    for (std::size_t i = nvars; i-- > 0;) {
      if (indeg[i] == 0) queue.push_back(i);
    }
    std::size_t pos = 0;
    while (!queue.empty()) {
      const std::size_t v = queue.back();
      queue.pop_back();
      order[pos++] = v;
      for (const std::size_t c : zero_children[v]) {
        if (--indeg[c] == 0) queue.push_back(c);
      }
    }
  }

  std::vector<std::vector<const ScmLink*>> incoming(nvars);
  for (const auto& l : spec.links) incoming[var_index.at(l.child)].push_back(&l);

  SynthPanel out;
  out.panel.codes = spec.variables;
  out.panel.target_code = spec.target;
  out.panel.anchor_index = 0;

  for (int s = 0; s < spec.n_storms; ++s) {
    Rng rng(derive_seed(spec.seed, "storm", static_cast<std::uint64_t>(s)));
    Eigen::MatrixXd sim(total, static_cast<Eigen::Index>(nvars));
    for (int t = 0; t < total; ++t) {
      for (const std::size_t v : order) {
        const auto it = spec.noise_std.find(spec.variables[v]);
        const double noise = (it == spec.noise_std.end() ? 1.0 : it->second);
        double val = noise * rng.normal();
        for (const ScmLink* l : incoming[v]) {
          const int ts = t - l->lag;
          const double parent_val = ts < 0 ? 0.0 : sim(ts, static_cast<Eigen::Index>(var_index.at(l->parent)));
          val += l->coeff * apply_tag(l->tag, parent_val);
        }
        if (std::fabs(val) > 1e6) {
          throw ValidationError("scm spec: unstable dynamics at storm " + std::to_string(s) +
                                " step " + std::to_string(t) +
                                "; rescale link coefficients");
        }
        sim(t, static_cast<Eigen::Index>(v)) = val;
      }
    }

    AlignedStorm storm;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth%03d", s);
    storm.id = idbuf;
    storm.values = sim.bottomRows(spec.length);
    storm.observed.assign(static_cast<std::size_t>(spec.length), 1);
    storm.target = storm.values.col(static_cast<Eigen::Index>(var_index.at(spec.target)));
    if (!spec.vmax_var.empty()) {
      storm.vmax = storm.values.col(static_cast<Eigen::Index>(var_index.at(spec.vmax_var)));
    } else {
      storm.vmax = Eigen::VectorXd::Constant(spec.length, std::numeric_limits<double>::quiet_NaN());
    }
    out.panel.storms.push_back(std::move(storm));
  }

  std::set<Feature> parents;
  for (const auto& l : spec.links) {
    if (l.child == spec.target) parents.insert({l.parent, l.lag});
  }
  out.true_parents.assign(parents.begin(), parents.end());
  return out;
}

std::vector<Feature> exhaustive_ci_oracle(const AlignedPanel& panel,
                                          const std::vector<Feature>& candidates,
                                          double pc_alpha,
                                          const std::vector<std::string>& storm_ids) {
  if (candidates.size() > 6) {
    throw ValidationError("exhaustive_ci_oracle: refused, " +
                          std::to_string(candidates.size()) + " candidates > 6");
  }
  std::vector<Feature> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());

  std::vector<Feature> retained;
  const std::size_t n = sorted.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Feature> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(sorted[j]);
    }
    bool independent_somewhere = false;
    const std::size_t subsets = std::size_t{1} << others.size();
    for (std::size_t mask = 0; mask < subsets && !independent_somewhere; ++mask) {
      std::vector<Feature> cond;
      for (std::size_t j = 0; j < others.size(); ++j) {
        if (mask & (std::size_t{1} << j)) cond.push_back(others[j]);
      }
      const CITestResult t = ci_test(panel, sorted[i], cond, storm_ids);
      if (is_independent(t, pc_alpha)) independent_somewhere = true;
    }
    if (!independent_somewhere) retained.push_back(sorted[i]);
  }
  return retained;
}

std::vector<std::string> export_panel_csv(const SynthPanel& synth, const std::string& out_dir,
                                          int n_test) {
  const auto& panel = synth.panel;
  if (n_test < 0 || static_cast<std::size_t>(n_test) >= panel.storms.size()) {
    throw ValidationError("export_panel_csv: n_test must be in [0, n_storms)");
  }
  std::vector<std::string> written;
  std::ostringstream manifest;
  const std::size_t n = panel.storms.size();
  for (std::size_t s = 0; s < n; ++s) {
    const auto& storm = panel.storms[s];
    std::ostringstream csv;
    csv << "time";
    for (const auto& code : panel.codes) csv << "," << code;
    csv << "\n";
    for (Eigen::Index t = 0; t < storm.values.rows(); ++t) {
      csv << t;
      for (Eigen::Index j = 0; j < storm.values.cols(); ++j) {
        csv << ",";
        if (!std::isnan(storm.values(t, j))) csv << format_double(storm.values(t, j));
      }
      csv << "\n";
    }
    const std::string rel = storm.id + ".csv";
    write_text_file(out_dir + "/" + rel, csv.str());
    written.push_back(rel);
    const bool is_test = s >= n - static_cast<std::size_t>(n_test);
    manifest << storm.id << "," << rel << "," << (is_test ? "test" : "train") << "\n";
  }
  write_text_file(out_dir + "/manifest.txt", manifest.str());
  written.push_back("manifest.txt");

  std::ostringstream truth;
  truth << "parent,lag\n";
  for (const auto& f : synth.true_parents) {
    truth << f.code << "," << f.lag << "\n";
  }
  write_text_file(out_dir + "/truth.csv", truth.str());
  written.push_back("truth.csv");
  return written;
}

}  // namespace stormsel
