#ifndef MOCM_DATASET_HPP
#define MOCM_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mocm/linalg.hpp"

namespace mocm {

/// One subject's session: BOLD-like time series plus stimulus onsets.
struct SubjectScan {
  std::string id;
  Matrix f;    // T x V_org
  Matrix tau;  // T x C, nonnegative stimulus intensities
};

struct Dataset {
  std::vector<SubjectScan> scans;
  int categories = 0;
  double tr_seconds = 2.0;
  std::vector<std::string> category_names;

  Index t() const { return scans.empty() ? 0 : scans.front().f.rows(); }
  Index v_org() const { return scans.empty() ? 0 : scans.front().f.cols(); }
  int subject_count() const { return static_cast<int>(scans.size()); }

  /// Enforces shared T / V_org / C and time-synchronized stimuli
  /// (identical tau across subjects).  Throws on violation.
  void validate() const;
};

/// Column-wise z-scoring with population variance.  Constant columns map
/// to zero with a logged warning.
Matrix standardize(const Matrix& f);

/// Labels each time point with its stimulus category (1-based), or 0 when
/// no category or more than one category is active (excluded from the
/// classification loss and from metrics).
std::vector<int> derive_labels(const Matrix& tau);

/// Row indices per category (0-based category index), from 1-based labels.
/// Throws if a category has no labeled time point.
std::vector<std::vector<int>> category_rows(const std::vector<int>& labels, int categories);

enum class RotationMode { Orthogonal, Identity };

struct SyntheticTruth {
  Matrix template_response;     // C x V_org regressor template
  std::vector<Matrix> rotation; // per subject, V_org x V_org data-space rotation
  std::vector<Matrix> beta;     // per subject, template * rotation
  std::vector<int> labels;      // derived from the shared onsets
};

struct SyntheticDataset {
  Dataset dataset;
  SyntheticTruth truth;
};

/// Seeded multi-subject block-design generator.
///
/// The shared onset matrix alternates one rest gap and one stimulus block
/// per category; every stimulus TR carries a unit boxcar.  The noiseless
/// per-subject signal is design * template * rotation, so the returned
/// truth satisfies F = D beta exactly at sigma = 0 (standardization is
/// skipped in that case to keep the construction exact).
SyntheticDataset generate_synthetic(int subjects, int trs, int voxels, int categories,
                                    double noise_sigma, RotationMode rotation,
                                    std::uint64_t seed, double tr_seconds = 2.0);

struct Split {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

/// Leave-one-subject-out folds, ordered by scan id.
std::vector<Split> loso_splits(const Dataset& dataset);

enum class FileFormat { Binary, Csv };

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir,
                  FileFormat format = FileFormat::Binary);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace mocm

#endif  // MOCM_DATASET_HPP
