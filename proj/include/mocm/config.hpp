#ifndef MOCM_CONFIG_HPP
#define MOCM_CONFIG_HPP

#include <string>

#include <json.hpp>

#include "mocm/engine.hpp"
#include "mocm/mapping.hpp"
#include "mocm/objectives.hpp"

namespace mocm {

/// Full run configuration, echoed verbatim into every output artifact.
struct RunConfig {
  OptimizerConfig optimizer;

  MappingKind mapping = MappingKind::Linear;
  int gaussian_anchor_count = 8;  // anchor rows strided from the mean training response
  double gamma = 0.0;             // 0 resolves to 1 / V_org
  int svd_dim = 0;                // required for the SVD mapping

  double alpha = 1.0;
  double lambda_orth = 1.0;
  bool warm_start = false;
  RepairMode repair_mode = RepairMode::Soft;

  int verbosity = 1;

  void validate(Index v_org) const;  // throws std::invalid_argument
  double resolved_gamma(Index v_org) const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

}  // namespace mocm

#endif  // MOCM_CONFIG_HPP
