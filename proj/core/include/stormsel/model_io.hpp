#pragma once

#include <map>
#include <string>
#include <variant>

#include "stormsel/dataset.hpp"
#include "stormsel/mlp.hpp"
#include "stormsel/regression.hpp"

namespace stormsel {

/// A trained head plus the standardization context it expects. Serialized as
/// a self-describing text blob with hex-float parameters, so save/load
/// round-trips bit-exactly.
struct SavedModel {
  std::variant<MlrModel, MlpModel> model;
  std::map<std::string, MeanStd> standardization;
  std::string target_code;

  const std::vector<Feature>& features() const;
  bool is_mlp() const { return std::holds_alternative<MlpModel>(model); }
};

std::string serialize_model(const SavedModel& m);
SavedModel deserialize_model(const std::string& text, const std::string& origin);

void save_model(const std::string& path, const SavedModel& m);
SavedModel load_model(const std::string& path);

/// Applies whichever head is stored. X columns follow features() order and
/// must already be standardized with the stored context.
Eigen::VectorXd model_predict(const SavedModel& m, const Eigen::MatrixXd& X);

}  // namespace stormsel
