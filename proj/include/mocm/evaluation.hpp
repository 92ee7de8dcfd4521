#ifndef MOCM_EVALUATION_HPP
#define MOCM_EVALUATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mocm/config.hpp"
#include "mocm/dataset.hpp"
#include "mocm/model.hpp"
#include "mocm/objectives.hpp"

namespace mocm {

/// Exact-match fraction over labeled samples.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Rank-based (Mann-Whitney) AUC with ties contributing 1/2.  Truth labels
/// are +1 / -1; both classes must be present.
double auc(const std::vector<double>& scores, const std::vector<int>& truth);

struct FoldResult {
  std::string test_id;
  double accuracy = 0.0;
  double auc = 0.0;
  std::vector<double> per_category_accuracy;  // recall per category

  nlohmann::json to_json() const;
};

struct MetricsReport {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0, std_accuracy = 0.0;
  double mean_auc = 0.0, std_auc = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json config_echo;

  nlohmann::json to_json() const;
  /// CSV row in the mean+-std table layout ("label,accuracy,auc").
  std::string to_csv_row(const std::string& label) const;
};

struct TrainedFold {
  std::vector<CognitiveModel> models;         // one per category; a single model when C = 2
  std::vector<OptimizationTrace> traces;
};

/// Trains one binary model per category on the split's training subjects
/// (collapsing to a single model for C = 2), each with a seed derived from
/// the master seed and the category index.
TrainedFold one_vs_all_train(const Dataset& dataset, const Split& split,
                             const RunConfig& config);

struct SubjectPrediction {
  Matrix scores;               // T x n_models, (X R W_k)_t
  std::vector<int> predicted;  // 1-based category per time point
  TestingParams fitted;
  OptimizationTrace trace;
};

/// Fits testing-phase params once for the subject, then scores every model
/// and predicts by argmax (ties: lowest category index).
SubjectPrediction one_vs_all_predict(const std::vector<CognitiveModel>& models,
                                     const SubjectScan& scan, double tr_seconds,
                                     const RunConfig& config,
                                     std::uint64_t fit_stream_counter = 0);

struct CrossValidationResult {
  MetricsReport report;
  std::vector<TrainedFold> folds;  // kept for trace export
};

/// Full leave-one-subject-out protocol: per fold, one-vs-all training on
/// the remaining subjects and prediction on the held-out one.
CrossValidationResult cross_validate(const Dataset& dataset, const RunConfig& config);

}  // namespace mocm

#endif  // MOCM_EVALUATION_HPP
