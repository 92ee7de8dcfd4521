#include "mocm/model.hpp"

#include <fstream>
#include <stdexcept>

#include "mocm/io.hpp"

namespace mocm {

void CognitiveModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);

  nlohmann::json meta;
  meta["format_version"] = 1;
  meta["trs"] = static_cast<std::int64_t>(shared_space.rows());
  meta["features"] = static_cast<std::int64_t>(shared_space.cols());
  meta["mapping"] = to_string(mapping.kind);
  meta["gamma"] = mapping.gamma;
  meta["alpha"] = alpha;
  meta["lambda_orth"] = lambda_orth;
  meta["seed"] = seed;
  meta["category_index"] = category_index;
  meta["config"] = config_echo;

  nlohmann::json files;
  files["shared_space"] = "shared_space.mat";
  files["weights"] = "weights.mat";
  write_matrix(dir / "shared_space.mat", shared_space);
  write_matrix(dir / "weights.mat", Matrix(weights));
  if (mapping.kind == MappingKind::GaussianKernel) {
    files["anchors"] = "anchors.mat";
    write_matrix(dir / "anchors.mat", mapping.anchors);
  } else if (mapping.kind == MappingKind::SvdSelect) {
    files["basis"] = "basis.mat";
    write_matrix(dir / "basis.mat", mapping.basis);
  }
  meta["files"] = files;

  std::ofstream out(dir / "model.json");
  if (!out) throw std::runtime_error((dir / "model.json").string() + ": cannot write");
  out << meta.dump(2) << '\n';
}

CognitiveModel CognitiveModel::load(const std::filesystem::path& dir) {
  const auto meta_path = dir / "model.json";
  std::ifstream in(meta_path);
  if (!in) throw std::runtime_error(meta_path.string() + ": cannot open");
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(meta_path.string() + ": invalid JSON: " + e.what());
  }

  auto require = [&](const char* field) -> const nlohmann::json& {
    if (!meta.contains(field)) {
      throw std::runtime_error(meta_path.string() + ": missing field '" + std::string(field) +
                               "'");
    }
    return meta.at(field);
  };

  CognitiveModel model;
  model.mapping.kind = mapping_kind_from_string(require("mapping").get<std::string>());
  model.mapping.gamma = require("gamma").get<double>();
  model.alpha = require("alpha").get<double>();
  model.lambda_orth = require("lambda_orth").get<double>();
  model.seed = require("seed").get<std::uint64_t>();
  model.category_index = require("category_index").get<int>();
  if (meta.contains("config")) model.config_echo = meta["config"];

  const nlohmann::json& files = require("files");
  auto matrix_path = [&](const char* key) {
    if (!files.contains(key)) {
      throw std::runtime_error(meta_path.string() + ": missing file entry '" +
                               std::string(key) + "'");
    }
    const auto p = dir / files.at(key).get<std::string>();
    if (!std::filesystem::exists(p)) {
      throw std::runtime_error("model: missing file " + p.string());
    }
    return p;
  };

  model.shared_space = read_matrix(matrix_path("shared_space"));
  const Matrix w = read_matrix(matrix_path("weights"));
  model.weights = w.col(0);
  if (model.mapping.kind == MappingKind::GaussianKernel) {
    model.mapping.anchors = read_matrix(matrix_path("anchors"));
  } else if (model.mapping.kind == MappingKind::SvdSelect) {
    model.mapping.basis = read_matrix(matrix_path("basis"));
  }
  return model;
}

}  // namespace mocm
