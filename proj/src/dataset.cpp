#include "mocm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "mocm/glm.hpp"
#include "mocm/io.hpp"
#include "mocm/log.hpp"
#include "mocm/rng.hpp"
#include "mocm/sampling.hpp"

namespace mocm {

void Dataset::validate() const {
  if (scans.empty()) throw std::runtime_error("dataset: no subjects");
  if (categories < 1) throw std::runtime_error("dataset: category count must be >= 1");
  if (!(tr_seconds > 0.0)) throw std::runtime_error("dataset: TR must be positive");
  const Index t0 = scans.front().f.rows();
  const Index v0 = scans.front().f.cols();
  std::set<std::string> ids;
  for (const SubjectScan& s : scans) {
    if (!ids.insert(s.id).second) {
      throw std::runtime_error("dataset: duplicate subject id '" + s.id + "'");
    }
    if (s.f.rows() != t0) {
      throw std::runtime_error("dataset: subject '" + s.id + "' has " +
                               std::to_string(s.f.rows()) + " TRs, expected " +
                               std::to_string(t0));
    }
    if (s.f.cols() != v0) {
      throw std::runtime_error("dataset: subject '" + s.id + "' has inconsistent voxel count");
    }
    if (s.tau.rows() != t0 || s.tau.cols() != categories) {
      throw std::runtime_error("dataset: subject '" + s.id + "' onset matrix shape mismatch");
    }
    if ((s.tau.array() < 0.0).any()) {
      throw std::runtime_error("dataset: subject '" + s.id + "' has negative onset entries");
    }
    // Time-synchronized stimuli: every subject shares the onset matrix.
    if (!(s.tau.array() == scans.front().tau.array()).all()) {
      throw std::runtime_error("dataset: subject '" + s.id +
                               "' onsets differ from subject '" + scans.front().id +
                               "' (stimuli must be time-synchronized)");
    }
  }
}

Matrix standardize(const Matrix& f) {
  if (f.rows() < 2) throw std::invalid_argument("standardize: need at least two rows");
  Matrix out(f.rows(), f.cols());
  const double n = static_cast<double>(f.rows());
  int constant_columns = 0;
  for (Index c = 0; c < f.cols(); ++c) {
    const double mean = f.col(c).mean();
    const double var = (f.col(c).array() - mean).square().sum() / n;
    if (var <= 0.0) {
      out.col(c).setZero();
      ++constant_columns;
      continue;
    }
    out.col(c) = (f.col(c).array() - mean) / std::sqrt(var);
  }
  if (constant_columns > 0) {
    log_warn("standardize: " + std::to_string(constant_columns) +
             " constant column(s) mapped to zero");
  }
  return out;
}

std::vector<int> derive_labels(const Matrix& tau) {
  std::vector<int> labels(static_cast<std::size_t>(tau.rows()), 0);
  for (Index t = 0; t < tau.rows(); ++t) {
    int active = 0;
    int category = 0;
    for (Index c = 0; c < tau.cols(); ++c) {
      if (tau(t, c) > 0.0) {
        ++active;
        category = static_cast<int>(c) + 1;
      }
    }
    labels[static_cast<std::size_t>(t)] = active == 1 ? category : 0;
  }
  return labels;
}

std::vector<std::vector<int>> category_rows(const std::vector<int>& labels, int categories) {
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(categories));
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] >= 1 && labels[t] <= categories) {
      rows[static_cast<std::size_t>(labels[t] - 1)].push_back(static_cast<int>(t));
    }
  }
  for (int c = 0; c < categories; ++c) {
    if (rows[static_cast<std::size_t>(c)].empty()) {
      throw std::runtime_error("category " + std::to_string(c + 1) +
                               " has no labeled time points");
    }
  }
  return rows;
}

SyntheticDataset generate_synthetic(int subjects, int trs, int voxels, int categories,
                                    double noise_sigma, RotationMode rotation,
                                    std::uint64_t seed, double tr_seconds) {
  if (subjects < 1 || trs < 2 || voxels < 1 || categories < 1) {
    throw std::invalid_argument("generate_synthetic: all dimensions must be positive");
  }
  if (voxels < categories) {
    throw std::invalid_argument("generate_synthetic: need at least as many voxels as categories");
  }
  if (trs % categories != 0) {
    throw std::invalid_argument("generate_synthetic: TR count must divide into " +
                                std::to_string(categories) + " equal blocks");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("generate_synthetic: noise sigma must be nonnegative");
  }

  // Shared block-design onsets: per category one cell of [rest gap +
  // stimulus block]; every stimulus TR carries a unit boxcar.  The gap
  // keeps hemodynamic bleed from the previous block out of the labeled
  // span.
  const int cell = trs / categories;
  const int gap = std::min(4, cell / 4);
  Matrix tau = Matrix::Zero(trs, categories);
  for (int c = 0; c < categories; ++c) {
    const int start = c * cell + gap;
    const int stop = (c + 1) * cell;
    for (int t = start; t < stop; ++t) tau(t, c) = 1.0;
  }

  const Matrix d = design_matrix(tau, tr_seconds);

  // Shared response template, fixed by the seed.
  Rng template_rng = Rng::stream(seed, RngPurpose::Generator, 0);
  Matrix response_template(categories, voxels);
  for (Index i = 0; i < response_template.rows(); ++i)
    for (Index j = 0; j < response_template.cols(); ++j)
      response_template(i, j) = template_rng.normal();

  const Matrix core = d * response_template;  // noiseless shared signal

  SyntheticDataset out;
  out.dataset.categories = categories;
  out.dataset.tr_seconds = tr_seconds;
  for (int c = 0; c < categories; ++c) {
    out.dataset.category_names.push_back("category-" + std::to_string(c + 1));
  }
  out.truth.template_response = response_template;
  out.truth.labels = derive_labels(tau);

  for (int s = 0; s < subjects; ++s) {
    Rng rot_rng = Rng::stream(seed, RngPurpose::Generator, 0x100 + static_cast<std::uint64_t>(s));
    Matrix q = rotation == RotationMode::Orthogonal
                   ? random_orthogonal(voxels, rot_rng)
                   : Matrix::Identity(voxels, voxels);

    Matrix f = core * q;
    if (noise_sigma > 0.0) {
      Rng noise_rng =
          Rng::stream(seed, RngPurpose::Generator, 0x200 + static_cast<std::uint64_t>(s));
      for (Index i = 0; i < f.rows(); ++i)
        for (Index j = 0; j < f.cols(); ++j) f(i, j) += noise_sigma * noise_rng.normal();
      // At sigma = 0 the construction satisfies F = D (template * Q)
      // exactly; standardizing would break that identity, so it only
      // applies to noisy draws.
      f = standardize(f);
    }

    char id[16];
    std::snprintf(id, sizeof(id), "sub-%02d", s);
    out.dataset.scans.push_back(SubjectScan{id, std::move(f), tau});
    out.truth.beta.push_back(response_template * q);
    out.truth.rotation.push_back(std::move(q));
  }

  out.dataset.validate();
  return out;
}

std::vector<Split> loso_splits(const Dataset& dataset) {
  if (dataset.subject_count() < 2) {
    throw std::invalid_argument("loso_splits: need at least two subjects");
  }
  std::vector<std::string> ids;
  for (const SubjectScan& s : dataset.scans) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());

  std::vector<Split> splits;
  for (const std::string& held_out : ids) {
    Split split;
    split.test_ids.push_back(held_out);
    for (const std::string& id : ids) {
      if (id != held_out) split.train_ids.push_back(id);
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

namespace {

const char* matrix_extension(FileFormat format) {
  return format == FileFormat::Binary ? ".mat" : ".csv";
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir,
                  FileFormat format) {
  dataset.validate();
  std::filesystem::create_directories(dir);

  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["subject_count"] = dataset.subject_count();
  manifest["trs"] = static_cast<std::int64_t>(dataset.t());
  manifest["voxels"] = static_cast<std::int64_t>(dataset.v_org());
  manifest["categories"] = dataset.categories;
  manifest["tr_seconds"] = dataset.tr_seconds;
  manifest["category_names"] = dataset.category_names;

  nlohmann::json subjects = nlohmann::json::array();
  for (const SubjectScan& s : dataset.scans) {
    const std::string series = s.id + "_series" + matrix_extension(format);
    const std::string onsets = s.id + "_onsets" + matrix_extension(format);
    if (format == FileFormat::Binary) {
      write_matrix(dir / series, s.f);
      write_matrix(dir / onsets, s.tau);
    } else {
      write_matrix_csv(dir / series, s.f);
      write_onsets_csv(dir / onsets, s.tau);
    }
    subjects.push_back({{"id", s.id}, {"series_file", series}, {"onsets_file", onsets}});
  }
  manifest["subjects"] = subjects;

  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error((dir / "manifest.json").string() + ": cannot write");
  out << manifest.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error(manifest_path.string() + ": cannot open");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(manifest_path.string() + ": invalid JSON: " + e.what());
  }

  auto require = [&](const char* field) -> const nlohmann::json& {
    if (!manifest.contains(field)) {
      throw std::runtime_error(manifest_path.string() + ": missing field '" +
                               std::string(field) + "'");
    }
    return manifest.at(field);
  };

  Dataset dataset;
  dataset.categories = require("categories").get<int>();
  dataset.tr_seconds = require("tr_seconds").get<double>();
  if (manifest.contains("category_names")) {
    dataset.category_names = manifest["category_names"].get<std::vector<std::string>>();
  }

  for (const nlohmann::json& subject : require("subjects")) {
    for (const char* field : {"id", "series_file", "onsets_file"}) {
      if (!subject.contains(field)) {
        throw std::runtime_error(manifest_path.string() + ": subject entry missing '" +
                                 std::string(field) + "'");
      }
    }
    SubjectScan scan;
    scan.id = subject["id"].get<std::string>();
    const auto series = dir / subject["series_file"].get<std::string>();
    const auto onsets = dir / subject["onsets_file"].get<std::string>();
    if (!std::filesystem::exists(series)) {
      throw std::runtime_error("dataset: missing subject file " + series.string());
    }
    if (!std::filesystem::exists(onsets)) {
      throw std::runtime_error("dataset: missing subject file " + onsets.string());
    }
    scan.f = read_matrix_auto(series);
    scan.tau = read_matrix_auto(onsets, /*onsets=*/true);
    // Triplet CSVs trim trailing all-zero categories; pad to the declared C.
    if (scan.tau.cols() < dataset.categories) {
      Matrix padded = Matrix::Zero(scan.tau.rows(), dataset.categories);
      padded.leftCols(scan.tau.cols()) = scan.tau;
      scan.tau = std::move(padded);
    }
    dataset.scans.push_back(std::move(scan));
  }

  const auto declared_t = require("trs").get<Index>();
  const auto declared_v = require("voxels").get<Index>();
  if (!dataset.scans.empty() &&
      (dataset.t() != declared_t || dataset.v_org() != declared_v)) {
    throw std::runtime_error(manifest_path.string() +
                             ": declared dimensions do not match subject files");
  }
  dataset.validate();
  return dataset;
}

}  // namespace mocm
