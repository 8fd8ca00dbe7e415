#include "stormsel/model_io.hpp"

#include <sstream>

#include "stormsel/csv.hpp"
#include "stormsel/error.hpp"

namespace stormsel {

namespace {

void write_vector(std::ostream& os, const char* tag, const Eigen::VectorXd& v) {
  os << tag << " " << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) os << " " << format_hex_double(v[i]);
  os << "\n";
}

void write_matrix(std::ostream& os, const char* tag, const Eigen::MatrixXd& m) {
  os << tag << " " << m.rows() << " " << m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << " " << format_hex_double(m(i, j));
  }
  os << "\n";
}

/// Whitespace token stream over the whole blob; the format never embeds
/// spaces in identifiers, so line structure is cosmetic.
class TokenReader {
 public:
  TokenReader(const std::string& text, const std::string& origin)
      : is_(text), origin_(origin) {}

  std::string token(const char* what) {
    std::string t;
    if (!(is_ >> t)) throw ParseError(origin_ + ": truncated model file, wanted " + std::string(what));
    return t;
  }

  void expect(const std::string& tag) {
    const std::string got = token(tag.c_str());
    if (got != tag) throw ParseError(origin_ + ": expected '" + tag + "', got '" + got + "'");
  }

  long long integer(const char* what) {
    const std::string t = token(what);
    try {
      return std::stoll(t);
    } catch (const std::exception&) {
      throw ParseError(origin_ + ": bad integer '" + t + "' for " + std::string(what));
    }
  }

  std::uint64_t unsigned64(const char* what) {
    const std::string t = token(what);
    try {
      return std::stoull(t);
    } catch (const std::exception&) {
      throw ParseError(origin_ + ": bad integer '" + t + "' for " + std::string(what));
    }
  }

  double number(const char* what) {
    return parse_hex_double(token(what), std::string(what) + " in " + origin_);
  }

  Eigen::VectorXd vector(const std::string& tag) {
    expect(tag);
    const Eigen::Index n = static_cast<Eigen::Index>(integer("vector length"));
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = number("vector entry");
    return v;
  }

  Eigen::MatrixXd matrix(const std::string& tag) {
    expect(tag);
    const Eigen::Index r = static_cast<Eigen::Index>(integer("matrix rows"));
    const Eigen::Index c = static_cast<Eigen::Index>(integer("matrix cols"));
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = number("matrix entry");
    }
    return m;
  }

 private:
  std::istringstream is_;
  std::string origin_;
};

}  // namespace

const std::vector<Feature>& SavedModel::features() const {
  if (const auto* mlr = std::get_if<MlrModel>(&model)) return mlr->features;
  return std::get<MlpModel>(model).features;
}

std::string serialize_model(const SavedModel& m) {
  std::ostringstream os;
  os << "stormsel-model v1\n";
  os << "type " << (m.is_mlp() ? "mlp" : "mlr") << "\n";
  os << "target " << m.target_code << "\n";
  const auto& feats = m.features();
  os << "features " << feats.size() << "\n";
  for (const auto& f : feats) os << f.code << " " << f.lag << "\n";
  os << "standardization " << m.standardization.size() << "\n";
  for (const auto& [code, ms] : m.standardization) {
    os << code << " " << format_hex_double(ms.mean) << " " << format_hex_double(ms.std) << "\n";
  }
  if (const auto* mlr = std::get_if<MlrModel>(&m.model)) {
    write_vector(os, "coefficients", mlr->coefficients);
    os << "intercept " << format_hex_double(mlr->intercept) << "\n";
    write_vector(os, "std_errors", mlr->std_errors);
    write_vector(os, "t_stats", mlr->t_stats);
    os << "fit " << mlr->n_train << " " << mlr->df_residual << " "
       << format_hex_double(mlr->intercept_std_error) << " "
       << format_hex_double(mlr->intercept_t) << "\n";
  } else {
    const auto& mlp = std::get<MlpModel>(m.model);
    os << "seed " << mlp.seed << "\n";
    os << "layers " << mlp.layer_sizes.size();
    for (const int s : mlp.layer_sizes) os << " " << s;
    os << "\n";
    os << "activations";
    for (const auto a : mlp.activations) os << " " << to_string(a);
    os << "\n";
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
      write_matrix(os, "W", mlp.weights[l]);
      write_vector(os, "b", mlp.biases[l]);
    }
  }
  return os.str();
}

SavedModel deserialize_model(const std::string& text, const std::string& origin) {
  TokenReader in(text, origin);
  in.expect("stormsel-model");
  {
    const std::string version = in.token("version");
    if (version != "v1") throw ParseError(origin + ": unsupported model version '" + version + "'");
  }
  in.expect("type");
  const std::string type = in.token("model type");
  if (type != "mlr" && type != "mlp") {
    throw ParseError(origin + ": unknown model type '" + type + "'");
  }

  SavedModel out;
  in.expect("target");
  out.target_code = in.token("target code");

  in.expect("features");
  const long long nfeat = in.integer("feature count");
  std::vector<Feature> feats;
  for (long long i = 0; i < nfeat; ++i) {
    Feature f;
    f.code = in.token("feature code");
    f.lag = static_cast<int>(in.integer("feature lag"));
    feats.push_back(std::move(f));
  }

  in.expect("standardization");
  const long long nstd = in.integer("standardization count");
  for (long long i = 0; i < nstd; ++i) {
    const std::string code = in.token("standardization code");
    MeanStd ms;
    ms.mean = in.number("standardization mean");
    ms.std = in.number("standardization std");
    out.standardization[code] = ms;
  }

  if (type == "mlr") {
    MlrModel mlr;
    mlr.features = feats;
    mlr.coefficients = in.vector("coefficients");
    in.expect("intercept");
    mlr.intercept = in.number("intercept");
    mlr.std_errors = in.vector("std_errors");
    mlr.t_stats = in.vector("t_stats");
    in.expect("fit");
    mlr.n_train = static_cast<long>(in.integer("n_train"));
    mlr.df_residual = static_cast<long>(in.integer("df_residual"));
    mlr.intercept_std_error = in.number("intercept std error");
    mlr.intercept_t = in.number("intercept t");
    if (mlr.coefficients.size() != static_cast<Eigen::Index>(feats.size())) {
      throw ParseError(origin + ": coefficient count does not match feature count");
    }
    out.model = std::move(mlr);
  } else {
    MlpModel mlp;
    mlp.features = feats;
    in.expect("seed");
    mlp.seed = in.unsigned64("seed");
    in.expect("layers");
    const long long nlayers = in.integer("layer count");
    for (long long i = 0; i < nlayers; ++i) {
      mlp.layer_sizes.push_back(static_cast<int>(in.integer("layer size")));
    }
    in.expect("activations");
    for (long long i = 0; i + 1 < nlayers; ++i) {
      mlp.activations.push_back(activation_from_string(in.token("activation")));
    }
    for (long long l = 0; l + 1 < nlayers; ++l) {
      mlp.weights.push_back(in.matrix("W"));
      mlp.biases.push_back(in.vector("b"));
    }
    for (std::size_t l = 0; l + 1 < mlp.layer_sizes.size(); ++l) {
      if (mlp.weights[l].rows() != mlp.layer_sizes[l + 1] ||
          mlp.weights[l].cols() != mlp.layer_sizes[l]) {
        throw ParseError(origin + ": weight shape does not chain with layer sizes");
      }
    }
    if (!mlp.layer_sizes.empty() &&
        mlp.layer_sizes.front() != static_cast<int>(feats.size()) && !feats.empty()) {
      throw ParseError(origin + ": input width does not match feature count");
    }
    out.model = std::move(mlp);
  }
  return out;
}

void save_model(const std::string& path, const SavedModel& m) {
  write_text_file(path, serialize_model(m));
}

SavedModel load_model(const std::string& path) {
  return deserialize_model(read_text_file(path), path);
}

Eigen::VectorXd model_predict(const SavedModel& m, const Eigen::MatrixXd& X) {
  if (const auto* mlr = std::get_if<MlrModel>(&m.model)) return predict(*mlr, X);
  return predict(std::get<MlpModel>(m.model), X);
}

}  // namespace stormsel
