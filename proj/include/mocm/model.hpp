#ifndef MOCM_MODEL_HPP
#define MOCM_MODEL_HPP

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "mocm/linalg.hpp"
#include "mocm/mapping.hpp"

namespace mocm {

/// Trained binary cognitive model: the shared space reached in training,
/// the decision surface, and everything needed to reproduce the feature
/// mapping at prediction time.  Immutable after training.
struct CognitiveModel {
  Matrix shared_space;  // G, T x V
  Vector weights;       // W, length V
  MappingSpec mapping;
  double alpha = 1.0;
  double lambda_orth = 1.0;
  std::uint64_t seed = 0;
  int category_index = 0;  // 0-based positive category of this one-vs-all model
  nlohmann::json config_echo;

  /// Writes model.json plus MOCMMAT1 matrix payloads into `dir`.
  void save(const std::filesystem::path& dir) const;
  static CognitiveModel load(const std::filesystem::path& dir);
};

}  // namespace mocm

#endif  // MOCM_MODEL_HPP
