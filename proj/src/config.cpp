#include "mocm/config.hpp"

#include <stdexcept>

namespace mocm {

void RunConfig::validate(Index v_org) const {
  optimizer.validate();
  if (mapping == MappingKind::GaussianKernel && gaussian_anchor_count < 1) {
    throw std::invalid_argument("config: gaussian mapping needs at least one anchor");
  }
  if (mapping == MappingKind::SvdSelect && (svd_dim < 1 || svd_dim > v_org)) {
    throw std::invalid_argument("config: svd mapping needs 1 <= svd-dim <= " +
                                std::to_string(v_org));
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("config: alpha must be positive");
  if (lambda_orth < 0.0) throw std::invalid_argument("config: lambda-orth must be nonnegative");
  if (gamma < 0.0) throw std::invalid_argument("config: gamma must be nonnegative");
}

double RunConfig::resolved_gamma(Index v_org) const {
  // The kernel width convention is 1/n with n input features.
  return gamma > 0.0 ? gamma : 1.0 / static_cast<double>(v_org);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["population"] = optimizer.population_size;
  j["max_it"] = optimizer.max_iterations;
  j["max_same"] = optimizer.max_same;
  j["seed"] = optimizer.seed;
  j["kappa"] = optimizer.kappa;
  j["i2_sentinel"] = optimizer.no_predecessor_i2;
  j["swap_indicator_args"] = optimizer.swap_indicator_args;
  j["threads"] = optimizer.threads;
  j["mapping"] = to_string(mapping);
  j["anchors"] = gaussian_anchor_count;
  j["gamma"] = gamma;
  j["svd_dim"] = svd_dim;
  j["alpha"] = alpha;
  j["lambda_orth"] = lambda_orth;
  j["warm_start"] = warm_start;
  j["repair"] = to_string(repair_mode);
  j["verbosity"] = verbosity;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.optimizer.population_size = j.value("population", c.optimizer.population_size);
  c.optimizer.max_iterations = j.value("max_it", c.optimizer.max_iterations);
  c.optimizer.max_same = j.value("max_same", c.optimizer.max_same);
  c.optimizer.seed = j.value("seed", c.optimizer.seed);
  c.optimizer.kappa = j.value("kappa", c.optimizer.kappa);
  c.optimizer.no_predecessor_i2 = j.value("i2_sentinel", c.optimizer.no_predecessor_i2);
  c.optimizer.swap_indicator_args = j.value("swap_indicator_args", false);
  c.optimizer.threads = j.value("threads", c.optimizer.threads);
  if (j.contains("mapping")) c.mapping = mapping_kind_from_string(j["mapping"].get<std::string>());
  c.gaussian_anchor_count = j.value("anchors", c.gaussian_anchor_count);
  c.gamma = j.value("gamma", c.gamma);
  c.svd_dim = j.value("svd_dim", c.svd_dim);
  c.alpha = j.value("alpha", c.alpha);
  c.lambda_orth = j.value("lambda_orth", c.lambda_orth);
  c.warm_start = j.value("warm_start", c.warm_start);
  if (j.contains("repair")) c.repair_mode = repair_mode_from_string(j["repair"].get<std::string>());
  c.verbosity = j.value("verbosity", c.verbosity);
  return c;
}

}  // namespace mocm
