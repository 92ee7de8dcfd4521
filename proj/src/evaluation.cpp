#include "mocm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mocm/glm.hpp"
#include "mocm/log.hpp"

namespace mocm {

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("accuracy: prediction/truth length mismatch");
  }
  if (predicted.empty()) throw std::invalid_argument("accuracy: empty labeled set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double auc(const std::vector<double>& scores, const std::vector<int>& truth) {
  if (scores.size() != truth.size()) {
    throw std::invalid_argument("auc: score/truth length mismatch");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : truth) {
    if (y == 1) {
      ++n_pos;
    } else if (y == -1) {
      ++n_neg;
    } else {
      throw std::invalid_argument("auc: truth label outside {-1,+1}");
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("auc: both classes must be present");
  }

  // Midrank assignment; tied pairs contribute 1/2 to the rank sum.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return scores[l] < scores[r]; });
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based midrank
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] == 1) pos_rank_sum += rank[k];
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

nlohmann::json FoldResult::to_json() const {
  nlohmann::json j;
  j["test_id"] = test_id;
  j["accuracy"] = accuracy;
  j["auc"] = auc;
  j["per_category_accuracy"] = per_category_accuracy;
  return j;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["folds"] = nlohmann::json::array();
  for (const FoldResult& f : folds) j["folds"].push_back(f.to_json());
  j["mean_accuracy"] = mean_accuracy;
  j["std_accuracy"] = std_accuracy;
  j["mean_auc"] = mean_auc;
  j["std_auc"] = std_auc;
  j["seed"] = seed;
  j["config"] = config_echo;
  return j;
}

std::string MetricsReport::to_csv_row(const std::string& label) const {
  std::ostringstream out;
  out.precision(4);
  out << std::fixed << label << ',' << 100.0 * mean_accuracy << "+-" << 100.0 * std_accuracy
      << ',' << 100.0 * mean_auc << "+-" << 100.0 * std_auc;
  return out.str();
}

namespace {

std::vector<const SubjectScan*> scans_by_ids(const Dataset& dataset,
                                             const std::vector<std::string>& ids) {
  std::vector<const SubjectScan*> out;
  for (const std::string& id : ids) {
    const auto it = std::find_if(dataset.scans.begin(), dataset.scans.end(),
                                 [&](const SubjectScan& s) { return s.id == id; });
    if (it == dataset.scans.end()) {
      throw std::invalid_argument("split references unknown subject id '" + id + "'");
    }
    out.push_back(&*it);
  }
  return out;
}

/// Per-fold feature mapping, fit on training subjects only.
MappingSpec build_mapping(const RunConfig& config,
                          const std::vector<const SubjectScan*>& train, const Matrix& d,
                          Index v_org) {
  MappingSpec spec;
  spec.kind = config.mapping;
  switch (config.mapping) {
    case MappingKind::Linear:
      break;
    case MappingKind::GaussianKernel: {
      spec.gamma = config.resolved_gamma(v_org);
      // Anchor rows are strided from the mean training response D beta so
      // the feature space is fixed per fold and shared with the test side.
      Matrix mean_response = Matrix::Zero(d.rows(), v_org);
      for (const SubjectScan* scan : train) {
        mean_response += d * least_squares_beta(scan->f, d);
      }
      mean_response /= static_cast<double>(train.size());
      const Index count = std::min<Index>(config.gaussian_anchor_count, d.rows());
      Matrix anchors(count, v_org);
      for (Index i = 0; i < count; ++i) {
        anchors.row(i) = mean_response.row(i * d.rows() / count);
      }
      spec.anchors = std::move(anchors);
      break;
    }
    case MappingKind::SvdSelect: {
      Matrix stack(static_cast<Index>(train.size()) * d.rows(), v_org);
      for (std::size_t i = 0; i < train.size(); ++i) {
        stack.middleRows(static_cast<Index>(i) * d.rows(), d.rows()) = train[i]->f;
      }
      spec.basis = svd_select(stack, config.svd_dim);
      break;
    }
  }
  return spec;
}

std::vector<int> binary_labels_for_category(const std::vector<int>& category_labels,
                                            int category_index) {
  std::vector<int> y(category_labels.size(), 0);
  for (std::size_t t = 0; t < category_labels.size(); ++t) {
    if (category_labels[t] == 0) continue;
    y[t] = category_labels[t] == category_index + 1 ? 1 : -1;
  }
  return y;
}

}  // namespace

TrainedFold one_vs_all_train(const Dataset& dataset, const Split& split,
                             const RunConfig& config) {
  dataset.validate();
  config.validate(dataset.v_org());
  if (dataset.categories < 2) {
    throw std::invalid_argument("one_vs_all_train: need at least two categories");
  }
  const auto train = scans_by_ids(dataset, split.train_ids);
  if (train.empty()) throw std::invalid_argument("one_vs_all_train: empty training split");

  // Stimuli are time-synchronized, so one design matrix serves every
  // training subject.
  const Matrix d = design_matrix(train.front()->tau, dataset.tr_seconds);
  const std::vector<int> category_labels = derive_labels(train.front()->tau);
  category_rows(category_labels, dataset.categories);  // each category must be present

  const MappingSpec mapping = build_mapping(config, train, d, dataset.v_org());

  std::vector<Matrix> f_list, d_list;
  for (const SubjectScan* scan : train) {
    f_list.push_back(scan->f);
    d_list.push_back(d);
  }

  const int n_models = dataset.categories == 2 ? 1 : dataset.categories;
  TrainedFold fold;
  for (int k = 0; k < n_models; ++k) {
    const std::vector<int> y = binary_labels_for_category(category_labels, k);
    TrainProblem problem(f_list, d_list, mapping, category_labels, y, dataset.categories,
                         config.alpha, config.lambda_orth, config.repair_mode);

    OptimizerConfig ocfg = config.optimizer;
    ocfg.seed = derive_seed(config.optimizer.seed ^ static_cast<std::uint64_t>(k),
                            RngPurpose::Category, 0);

    std::vector<std::vector<double>> initial;
    if (config.warm_start) initial.push_back(problem.warm_candidate());

    OptimizeResult result = optimize(problem.objective_fn(), problem.sampler_fn(), ocfg,
                                     problem.repair_fn(), initial);

    const TrainingParams best = problem.assemble(result.best.params);
    CognitiveModel model;
    model.shared_space = shared_space(problem.mapped(best)).g;
    model.weights = best.weights;
    model.mapping = mapping;
    model.alpha = config.alpha;
    model.lambda_orth = config.lambda_orth;
    model.seed = ocfg.seed;
    model.category_index = k;
    model.config_echo = config.to_json();
    fold.models.push_back(std::move(model));
    fold.traces.push_back(std::move(result.trace));
  }
  return fold;
}

SubjectPrediction one_vs_all_predict(const std::vector<CognitiveModel>& models,
                                     const SubjectScan& scan, double tr_seconds,
                                     const RunConfig& config,
                                     std::uint64_t fit_stream_counter) {
  if (models.empty()) throw std::invalid_argument("one_vs_all_predict: no models");
  for (const CognitiveModel& m : models) {
    if (m.shared_space.rows() != models.front().shared_space.rows() ||
        m.shared_space.cols() != models.front().shared_space.cols()) {
      throw std::invalid_argument("one_vs_all_predict: models disagree on dimensions");
    }
  }

  const Matrix d = design_matrix(scan.tau, tr_seconds);
  const std::vector<int> category_labels = derive_labels(scan.tau);
  const int categories = static_cast<int>(scan.tau.cols());

  // The testing-phase fit runs once per subject; with several one-vs-all
  // models the target is the mean of their shared spaces.
  SharedSpace g{models.front().shared_space};
  for (std::size_t k = 1; k < models.size(); ++k) g.g += models[k].shared_space;
  g.g /= static_cast<double>(models.size());

  TestProblem problem({scan.f}, {d}, models.front().mapping, category_labels, categories, g,
                      config.lambda_orth, config.repair_mode);

  OptimizerConfig ocfg = config.optimizer;
  ocfg.seed = derive_seed(config.optimizer.seed, RngPurpose::TestFit, fit_stream_counter);

  std::vector<std::vector<double>> initial;
  if (config.warm_start) initial.push_back(problem.warm_candidate());

  OptimizeResult result = optimize(problem.objective_fn(), problem.sampler_fn(), ocfg,
                                   problem.repair_fn(), initial);

  SubjectPrediction out;
  out.fitted = problem.assemble(result.best.params);
  out.trace = std::move(result.trace);

  const Matrix x = models.front().mapping.apply(d * out.fitted.beta.front());
  const Matrix a = x * out.fitted.rotation.front();
  out.scores = Matrix(a.rows(), static_cast<Index>(models.size()));
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (a.cols() != models[k].weights.size()) {
      throw std::invalid_argument("one_vs_all_predict: weight length mismatch with features");
    }
    out.scores.col(static_cast<Index>(k)) = a * models[k].weights;
  }

  out.predicted.resize(static_cast<std::size_t>(a.rows()));
  for (Index t = 0; t < a.rows(); ++t) {
    if (models.size() == 1) {
      // Binary collapse: the implicit second model scores -s.
      out.predicted[static_cast<std::size_t>(t)] = out.scores(t, 0) < 0.0 ? 2 : 1;
    } else {
      Index arg = 0;
      for (Index k = 1; k < out.scores.cols(); ++k) {
        if (out.scores(t, k) > out.scores(t, arg)) arg = k;  // ties keep the lowest index
      }
      out.predicted[static_cast<std::size_t>(t)] = static_cast<int>(arg) + 1;
    }
  }
  return out;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};  // sample std across folds
}

}  // namespace

CrossValidationResult cross_validate(const Dataset& dataset, const RunConfig& config) {
  const std::vector<Split> splits = loso_splits(dataset);
  CrossValidationResult result;
  result.report.seed = config.optimizer.seed;
  result.report.config_echo = config.to_json();

  std::vector<double> accs, aucs;
  for (std::size_t fold_index = 0; fold_index < splits.size(); ++fold_index) {
    const Split& split = splits[fold_index];
    try {
      TrainedFold trained = one_vs_all_train(dataset, split, config);
      const SubjectScan* test = scans_by_ids(dataset, split.test_ids).front();
      SubjectPrediction pred = one_vs_all_predict(trained.models, *test, dataset.tr_seconds,
                                                  config, fold_index);

      const std::vector<int> truth = derive_labels(test->tau);
      std::vector<int> truth_labeled, pred_labeled;
      std::vector<Index> labeled_rows;
      for (std::size_t t = 0; t < truth.size(); ++t) {
        if (truth[t] != 0) {
          truth_labeled.push_back(truth[t]);
          pred_labeled.push_back(pred.predicted[t]);
          labeled_rows.push_back(static_cast<Index>(t));
        }
      }

      FoldResult fr;
      fr.test_id = test->id;
      fr.accuracy = accuracy(pred_labeled, truth_labeled);

      // AUC: binary directly; otherwise the unweighted mean of the
      // one-vs-all binary AUCs.
      const int n_models = static_cast<int>(trained.models.size());
      double auc_sum = 0.0;
      for (int k = 0; k < n_models; ++k) {
        std::vector<double> s;
        std::vector<int> y;
        for (std::size_t i = 0; i < labeled_rows.size(); ++i) {
          s.push_back(pred.scores(labeled_rows[i], k));
          y.push_back(truth_labeled[i] == k + 1 ? 1 : -1);
        }
        auc_sum += auc(s, y);
      }
      fr.auc = auc_sum / static_cast<double>(n_models);

      for (int c = 1; c <= dataset.categories; ++c) {
        std::size_t total = 0, hit = 0;
        for (std::size_t i = 0; i < truth_labeled.size(); ++i) {
          if (truth_labeled[i] == c) {
            ++total;
            if (pred_labeled[i] == c) ++hit;
          }
        }
        fr.per_category_accuracy.push_back(
            total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total));
      }

      accs.push_back(fr.accuracy);
      aucs.push_back(fr.auc);
      result.report.folds.push_back(std::move(fr));
      result.folds.push_back(std::move(trained));
    } catch (const std::exception& e) {
      throw std::runtime_error("cross_validate: fold " + std::to_string(fold_index) +
                               " (test subject '" + split.test_ids.front() + "'): " + e.what());
    }
  }

  std::tie(result.report.mean_accuracy, result.report.std_accuracy) = mean_std(accs);
  std::tie(result.report.mean_auc, result.report.std_auc) = mean_std(aucs);
  return result;
}

}  // namespace mocm
