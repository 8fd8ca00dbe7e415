#include "stormsel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "stormsel/csv.hpp"
#include "stormsel/error.hpp"
#include "stormsel/log.hpp"
#include "stormsel/rng.hpp"

namespace stormsel {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

int StormSeries::code_index(const std::string& code) const {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] == code) return static_cast<int>(i);
  }
  return -1;
}

int AlignedPanel::code_index(const std::string& code) const {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] == code) return static_cast<int>(i);
  }
  return -1;
}

const AlignedStorm* AlignedPanel::storm_by_id(const std::string& id) const {
  for (const auto& s : storms) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::vector<std::string> AlignedPanel::storm_ids() const {
  std::vector<std::string> ids;
  ids.reserve(storms.size());
  for (const auto& s : storms) ids.push_back(s.id);
  return ids;
}

std::vector<std::string> FoldSpec::train_ids(int fold) const {
  std::vector<std::string> out;
  for (const auto& [id, f] : assignments) {
    if (f != fold) out.push_back(id);
  }
  return out;
}

std::vector<std::string> FoldSpec::validation_ids(int fold) const {
  std::vector<std::string> out;
  for (const auto& [id, f] : assignments) {
    if (f == fold) out.push_back(id);
  }
  return out;
}

// -- ingestion ----------------------------------------------------------------

StormSeries load_storm_csv(const std::string& path) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty()) throw ParseError(path + ": empty file");

  const auto header = split_csv_line(lines[0]);
  int time_col = -1;
  StormSeries series;
  series.id = std::filesystem::path(path).stem().string();
  std::set<std::string> seen;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "time") {
      if (time_col >= 0) throw ValidationError(path + ": duplicate time column");
      time_col = static_cast<int>(j);
      continue;
    }
    if (header[j].empty()) throw ParseError(path + ": empty header cell");
    if (!seen.insert(header[j]).second) {
      throw ValidationError(path + ": duplicate predictor code '" + header[j] + "'");
    }
    series.codes.push_back(header[j]);
  }
  if (time_col < 0) throw ValidationError(path + ": header has no 'time' column");
  series.columns.assign(series.codes.size(), {});

  long long prev_time = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t row = series.time.size() + 1;  // 1-based data row
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) {
      throw ParseError(path + ": malformed row at row " + std::to_string(row) +
                       ": expected " + std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    }
    const double traw =
        parse_cell(cells[time_col], "in time column at row " + std::to_string(row));
    if (!std::isfinite(traw) || traw != std::floor(traw)) {
      throw ParseError(path + ": non-integer time at row " + std::to_string(row));
    }
    const long long t = static_cast<long long>(traw);
    if (!series.time.empty() && t != prev_time + 1) {
      throw ValidationError(path + ": non-contiguous time at row " + std::to_string(row));
    }
    prev_time = t;
    series.time.push_back(t);
    std::size_t k = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (static_cast<int>(j) == time_col) continue;
      series.columns[k].push_back(
          parse_cell(cells[j], "in column '" + series.codes[k] + "' at row " +
                                   std::to_string(row)));
      ++k;
    }
  }

  const int vi = series.code_index("VMAX");
  if (vi >= 0) series.vmax = series.columns[vi];
  const int pi = series.code_index("PMIN");
  if (pi >= 0) series.mslp = series.columns[pi];
  return series;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  for (const auto& line : split_lines(read_text_file(path))) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 'storm_id,path,role'");
    }
    if (cells[2] != "train" && cells[2] != "test") {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": role must be train or test, got '" +
                            cells[2] + "'");
    }
    if (!seen.insert(cells[0]).second) {
      throw ValidationError(path + ": duplicate storm id '" + cells[0] + "'");
    }
    std::filesystem::path p(cells[1]);
    if (p.is_relative()) p = base / p;
    entries.push_back({cells[0], p.string(), cells[2] == "test"});
  }
  if (entries.empty()) throw ValidationError(path + ": manifest lists no storms");
  return entries;
}

// -- targets -------------------------------------------------------------------

std::optional<int> lead_hours_from_target_code(const std::string& code) {
  if (code.rfind("DELV", 0) != 0 || code.size() <= 4) return std::nullopt;
  int hours = 0;
  for (std::size_t i = 4; i < code.size(); ++i) {
    if (code[i] < '0' || code[i] > '9') return std::nullopt;
    hours = hours * 10 + (code[i] - '0');
  }
  return hours;
}

Eigen::VectorXd build_target_from_vmax(const Eigen::VectorXd& vmax, int lead_hours) {
  if (lead_hours <= 0 || lead_hours % 6 != 0) {
    throw ValidationError("lead_hours must be a positive multiple of 6, got " +
                          std::to_string(lead_hours));
  }
  const Eigen::Index lead = lead_hours / 6;
  Eigen::VectorXd out = Eigen::VectorXd::Constant(vmax.size(), kNaN);
  for (Eigen::Index t = 0; t + lead < vmax.size(); ++t) {
    out[t] = vmax[t + lead] - vmax[t];
  }
  return out;
}

std::vector<double> build_target(const StormSeries& series, int lead_hours) {
  if (series.vmax.empty()) {
    throw ValidationError("storm '" + series.id + "' has no VMAX column; cannot build target");
  }
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(series.vmax.data(),
                                                        static_cast<Eigen::Index>(series.vmax.size()));
  const Eigen::VectorXd t = build_target_from_vmax(v, lead_hours);
  return {t.data(), t.data() + t.size()};
}

// -- alignment -----------------------------------------------------------------

std::vector<double> gaussian_smooth(const std::vector<double>& x, double sigma_steps) {
  if (sigma_steps <= 0) throw ValidationError("sigma_steps must be > 0");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma_steps));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * (k / sigma_steps) * (k / sigma_steps));
  }
  const int n = static_cast<int>(x.size());
  std::vector<double> out(x.size(), kNaN);
  for (int t = 0; t < n; ++t) {
    double num = 0.0, den = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      const int s = t + k;
      if (s < 0 || s >= n || std::isnan(x[s])) continue;  // renormalize over observed
      num += kernel[k + radius] * x[s];
      den += kernel[k + radius];
    }
    if (den > 0.0) out[t] = num / den;
  }
  return out;
}

AlignmentResult align_by_mslp_minimum(const std::vector<StormSeries>& storms,
                                      double sigma_steps) {
  AlignmentResult result;
  struct Anchored {
    const StormSeries* storm;
    Eigen::Index anchor;
  };
  std::vector<Anchored> kept;

  std::set<std::string> codes_union_check;
  for (const auto& storm : storms) {
    Eigen::Index anchor = -1;
    if (!storm.mslp.empty()) {
      const auto smoothed = gaussian_smooth(storm.mslp, sigma_steps);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < smoothed.size(); ++t) {
        // earliest index wins ties
        if (!std::isnan(smoothed[t]) && smoothed[t] < best) {
          best = smoothed[t];
          anchor = static_cast<Eigen::Index>(t);
        }
      }
    }
    if (anchor < 0) {
      warn("storm '" + storm.id + "' rejected: MSLP all missing");
      result.rejected_ids.push_back(storm.id);
      continue;
    }
    kept.push_back({&storm, anchor});
  }
  if (kept.empty()) {
    throw ValidationError("alignment rejected every storm (no usable MSLP)");
  }

  // all storms must agree on the predictor catalog
  const auto& catalog = kept.front().storm->codes;
  for (const auto& a : kept) {
    if (a.storm->codes != catalog) {
      throw ValidationError("storm '" + a.storm->id +
                            "' predictor catalog differs from '" +
                            kept.front().storm->id + "'");
    }
  }

  Eigen::Index max_left = 0, max_right = 0;
  for (const auto& a : kept) {
    max_left = std::max(max_left, a.anchor);
    max_right = std::max<Eigen::Index>(
        max_right, static_cast<Eigen::Index>(a.storm->length()) - a.anchor - 1);
  }
  const Eigen::Index panel_len = max_left + max_right + 1;

  AlignedPanel panel;
  panel.codes = catalog;
  panel.anchor_index = max_left;
  for (const auto& a : kept) {
    AlignedStorm as;
    as.id = a.storm->id;
    as.values = Eigen::MatrixXd::Constant(panel_len, static_cast<Eigen::Index>(catalog.size()), kNaN);
    as.target = Eigen::VectorXd::Constant(panel_len, kNaN);
    as.vmax = Eigen::VectorXd::Constant(panel_len, kNaN);
    as.observed.assign(static_cast<std::size_t>(panel_len), 0);
    const Eigen::Index offset = max_left - a.anchor;
    const Eigen::Index len = static_cast<Eigen::Index>(a.storm->length());
    for (Eigen::Index t = 0; t < len; ++t) {
      as.observed[static_cast<std::size_t>(offset + t)] = 1;
      for (std::size_t j = 0; j < catalog.size(); ++j) {
        as.values(offset + t, static_cast<Eigen::Index>(j)) =
            a.storm->columns[j][static_cast<std::size_t>(t)];
      }
      if (!a.storm->vmax.empty()) {
        as.vmax[offset + t] = a.storm->vmax[static_cast<std::size_t>(t)];
      }
    }
    panel.storms.push_back(std::move(as));
  }
  result.panel = std::move(panel);
  return result;
}

AlignedPanel assemble_unaligned(const std::vector<StormSeries>& storms) {
  if (storms.empty()) throw ValidationError("assemble_unaligned: no storms");
  const auto& catalog = storms.front().codes;
  Eigen::Index panel_len = 0;
  for (const auto& s : storms) {
    if (s.codes != catalog) {
      throw ValidationError("storm '" + s.id + "' predictor catalog differs from '" +
                            storms.front().id + "'");
    }
    panel_len = std::max(panel_len, static_cast<Eigen::Index>(s.length()));
  }

  AlignedPanel panel;
  panel.codes = catalog;
  panel.anchor_index = 0;
  for (const auto& s : storms) {
    AlignedStorm as;
    as.id = s.id;
    as.values = Eigen::MatrixXd::Constant(panel_len, static_cast<Eigen::Index>(catalog.size()), kNaN);
    as.target = Eigen::VectorXd::Constant(panel_len, kNaN);
    as.vmax = Eigen::VectorXd::Constant(panel_len, kNaN);
    as.observed.assign(static_cast<std::size_t>(panel_len), 0);
    const Eigen::Index len = static_cast<Eigen::Index>(s.length());
    for (Eigen::Index t = 0; t < len; ++t) {
      as.observed[static_cast<std::size_t>(t)] = 1;
      for (std::size_t j = 0; j < catalog.size(); ++j) {
        as.values(t, static_cast<Eigen::Index>(j)) = s.columns[j][static_cast<std::size_t>(t)];
      }
      if (!s.vmax.empty()) as.vmax[t] = s.vmax[static_cast<std::size_t>(t)];
    }
    panel.storms.push_back(std::move(as));
  }
  return panel;
}

void set_panel_target(AlignedPanel& panel, const std::string& target_code) {
  panel.target_code = target_code;
  const auto lead = lead_hours_from_target_code(target_code);
  if (lead) {
    for (auto& storm : panel.storms) {
      storm.target = build_target_from_vmax(storm.vmax, *lead);
    }
    return;
  }
  const int j = panel.code_index(target_code);
  if (j < 0) {
    throw ValidationError("target code '" + target_code +
                          "' is neither DELV<hours> nor a panel column");
  }
  for (auto& storm : panel.storms) {
    storm.target = storm.values.col(j);
  }
}

// -- standardization -----------------------------------------------------------

AlignedPanel standardize(AlignedPanel panel, const std::vector<std::string>& training_ids) {
  std::vector<const AlignedStorm*> train;
  for (const auto& id : training_ids) {
    const auto* s = panel.storm_by_id(id);
    if (!s) throw ValidationError("standardize: unknown training storm id '" + id + "'");
    train.push_back(s);
  }
  if (train.empty()) throw ValidationError("standardize: empty training id list");

  const std::size_t ncols = panel.codes.size();
  std::vector<MeanStd> stats(ncols);
  std::vector<bool> keep(ncols, true);

  for (std::size_t j = 0; j < ncols; ++j) {
    double sum = 0.0, sumsq = 0.0;
    long long n = 0;
    for (const auto* s : train) {
      const auto col = s->values.col(static_cast<Eigen::Index>(j));
      for (Eigen::Index t = 0; t < col.size(); ++t) {
        if (std::isnan(col[t])) continue;
        sum += col[t];
        sumsq += col[t] * col[t];
        ++n;
      }
    }
    if (n < 2) {
      warn("predictor '" + panel.codes[j] + "' dropped: fewer than 2 observed training samples");
      keep[j] = false;
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    // population variance (divide by n)
    double var = sumsq / static_cast<double>(n) - mean * mean;
    if (var <= 0.0 || !std::isfinite(var)) {
      warn("predictor '" + panel.codes[j] + "' dropped: zero variance on training storms");
      keep[j] = false;
      continue;
    }
    stats[j] = {mean, std::sqrt(var)};
  }

  AlignedPanel out;
  out.anchor_index = panel.anchor_index;
  out.target_code = panel.target_code;
  std::vector<Eigen::Index> kept_cols;
  for (std::size_t j = 0; j < ncols; ++j) {
    if (!keep[j]) continue;
    kept_cols.push_back(static_cast<Eigen::Index>(j));
    out.codes.push_back(panel.codes[j]);
    out.standardization[panel.codes[j]] = stats[j];
  }
  for (auto& storm : panel.storms) {
    AlignedStorm as;
    as.id = std::move(storm.id);
    as.target = std::move(storm.target);
    as.vmax = std::move(storm.vmax);
    as.observed = std::move(storm.observed);
    as.values.resize(storm.values.rows(), static_cast<Eigen::Index>(kept_cols.size()));
    for (std::size_t jj = 0; jj < kept_cols.size(); ++jj) {
      const auto& ms = out.standardization[out.codes[jj]];
      as.values.col(static_cast<Eigen::Index>(jj)) =
          (storm.values.col(kept_cols[jj]).array() - ms.mean) / ms.std;
    }
    out.storms.push_back(std::move(as));
  }
  return out;
}

// -- folds -----------------------------------------------------------------------

FoldSpec make_folds(const std::vector<std::string>& storm_ids, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("make_folds: k must be >= 2");
  if (static_cast<std::size_t>(k) > storm_ids.size()) {
    throw ValidationError("make_folds: k=" + std::to_string(k) + " exceeds " +
                          std::to_string(storm_ids.size()) + " storm ids");
  }
  {
    std::set<std::string> uniq(storm_ids.begin(), storm_ids.end());
    if (uniq.size() != storm_ids.size()) {
      throw ValidationError("make_folds: duplicate storm ids");
    }
  }
  std::vector<std::string> shuffled = storm_ids;
  Rng rng(seed);
  rng.shuffle(shuffled);
  FoldSpec spec;
  spec.k = k;
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    spec.assignments[shuffled[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return spec;
}

// -- pooled design ---------------------------------------------------------------

DesignMatrix gather_design(const AlignedPanel& panel, const std::vector<Feature>& features,
                           const std::vector<std::string>& storm_ids) {
  std::vector<int> cols;
  cols.reserve(features.size());
  for (const auto& f : features) {
    const int j = panel.code_index(f.code);
    if (j < 0) throw ValidationError("gather_design: unknown predictor '" + f.code + "'");
    if (f.lag < 0) throw ValidationError("gather_design: negative lag for '" + f.code + "'");
    cols.push_back(j);
  }

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> ys;
  const Eigen::Index L = static_cast<Eigen::Index>(panel.length());
  for (const auto& id : storm_ids) {
    const auto* storm = panel.storm_by_id(id);
    if (!storm) throw ValidationError("gather_design: unknown storm id '" + id + "'");
    for (Eigen::Index t = 0; t < L; ++t) {
      const double y = storm->target[t];
      if (std::isnan(y)) continue;
      Eigen::VectorXd row(static_cast<Eigen::Index>(features.size()));
      bool complete = true;
      for (std::size_t j = 0; j < features.size(); ++j) {
        const Eigen::Index s = t - features[j].lag;
        if (s < 0 || s >= L) {
          complete = false;
          break;
        }
        const double v = storm->values(s, cols[j]);
        if (std::isnan(v)) {
          complete = false;
          break;
        }
        row[static_cast<Eigen::Index>(j)] = v;
      }
      if (!complete) continue;
      rows.push_back(std::move(row));
      ys.push_back(y);
    }
  }

  DesignMatrix out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(features.size()));
  out.y.resize(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = rows[i];
    out.y[static_cast<Eigen::Index>(i)] = ys[i];
  }
  return out;
}

}  // namespace stormsel
