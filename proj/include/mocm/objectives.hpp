#ifndef MOCM_OBJECTIVES_HPP
#define MOCM_OBJECTIVES_HPP

#include <span>
#include <vector>

#include "mocm/engine.hpp"
#include "mocm/linalg.hpp"
#include "mocm/mapping.hpp"
#include "mocm/model.hpp"
#include "mocm/objective_vector.hpp"
#include "mocm/rng.hpp"

namespace mocm {

/// Worst finite cost assigned to a degenerate candidate (e.g. a zero-norm
/// pattern in the rotation-consistency term) so dominance eliminates it
/// instead of aborting the run.
inline constexpr double kWorstCost = 1e300;

// ---------------------------------------------------------------------------
// Parameter containers

struct TrainingParams {
  std::vector<Matrix> beta;      // per subject, C x V_org
  std::vector<Matrix> rotation;  // per subject, V x V
  Vector weights;                // length V
  double alpha = 1.0;            // classifier trade-off, not part of the search
};

struct TestingParams {
  std::vector<Matrix> beta;
  std::vector<Matrix> rotation;
};

struct SharedSpace {
  Matrix g;  // T x V
};

/// Dimensions of the flat parameter layout: all beta blocks
/// (subject-major, row-major), then all rotation blocks, then the weight
/// vector when present.
struct ParamShape {
  int subjects = 0;
  int categories = 0;
  Index v_org = 0;
  Index v = 0;
  bool has_weights = true;
  double alpha = 1.0;  // restored on decode, never encoded

  std::size_t flat_size() const {
    const std::size_t s = static_cast<std::size_t>(subjects);
    return s * static_cast<std::size_t>(categories) * static_cast<std::size_t>(v_org) +
           s * static_cast<std::size_t>(v) * static_cast<std::size_t>(v) +
           (has_weights ? static_cast<std::size_t>(v) : 0u);
  }
};

std::vector<double> encode(const TrainingParams& p);
std::vector<double> encode(const TestingParams& p);
TrainingParams decode_training(std::span<const double> flat, const ParamShape& shape);
TestingParams decode_testing(std::span<const double> flat, const ParamShape& shape);

// ---------------------------------------------------------------------------
// Objective components

/// Mean squared Frobenius tracking error of the per-subject linear models:
/// (1/S) sum_i ||F_i - D_i beta_i||_F^2.
double theta1(const std::vector<Matrix>& f, const std::vector<Matrix>& d,
              const std::vector<Matrix>& beta);

/// Element-wise mean of the mapped subject responses.
SharedSpace shared_space(const std::vector<Matrix>& mapped);

/// Pairwise alignment cost plus a soft orthogonality penalty:
/// (1/S) sum_{i<j} ||A_i - A_j||_F^2 + lambda sum_i ||A_i' A_i - I||_F^2.
double theta2_pairwise(const std::vector<Matrix>& mapped, double lambda_orth);

/// Shared-space form of the alignment cost:
/// (1/S) sum_i ||G - A_i||_F^2 + the same orthogonality penalty.
double theta2_shared(const std::vector<Matrix>& mapped, const SharedSpace& g,
                     double lambda_orth);

/// Cosine similarity between a pattern before and after mapping.
/// Throws on zero-norm input.
double ise(const Vector& x, const Vector& g);

/// Rotation-consistency cost: per subject, the category-mean rows of the
/// pre-mapping matrix are compared (by cosine) against the category-mean
/// rows of the post-mapping matrix, and unequal angles across category
/// pairs are penalized:
/// (1/S) sum_l sum_{m<n} (ISE_m - ISE_n)^2.
double theta3(const std::vector<Matrix>& pre, const std::vector<Matrix>& post,
              const std::vector<std::vector<int>>& rows_per_category);

/// Squared-hinge classification cost with an L1 penalty on the decision
/// surface: (alpha/S) sum_i sum_t max(0, 1 - y_t (A_i w)_t)^2 + ||w||_1.
/// Labels must be exactly +1 or -1.
double theta4(const std::vector<Matrix>& mapped, const Vector& w,
              const std::vector<int>& y, double alpha);

// ---------------------------------------------------------------------------
// Integrated objectives

/// Training cost vector [theta1, theta2, theta3, theta4].  Design matrices
/// are derived from the onsets, features as X_i = Phi(D_i beta_i), mapped
/// responses as A_i = X_i R_i.  `y` holds +1 / -1 task labels with 0
/// marking time points excluded from the classification term.
ObjectiveVector k_train(const std::vector<Matrix>& f, const std::vector<Matrix>& tau,
                        double tr_seconds, const TrainingParams& p,
                        const MappingSpec& mapping, const std::vector<int>& y,
                        double lambda_orth = 1.0);

/// Testing cost vector [theta1, theta2 against the trained shared space,
/// theta3] over the test subjects only.
ObjectiveVector k_test(const std::vector<Matrix>& f_hat, const std::vector<Matrix>& tau_hat,
                       double tr_seconds, const SharedSpace& g, const TestingParams& p,
                       const MappingSpec& mapping, double lambda_orth = 1.0);

// ---------------------------------------------------------------------------
// Constraint repair

enum class RepairMode { Soft, Hard };

const char* to_string(RepairMode mode);
RepairMode repair_mode_from_string(const std::string& name);

/// Hard-repairs one rotation block: A = X R is replaced by its nearest
/// column-orthonormal matrix A* (via its singular factors) and R is
/// re-solved so X R = A* exactly.  Returns false (leaving R unchanged,
/// with a logged warning) when X is rank-deficient.
bool repair_rotation(const Matrix& x, Matrix& r);

/// Applies repair_rotation per subject in hard mode; soft mode returns the
/// params unchanged (the penalty inside theta2 carries the constraint).
TrainingParams repair(TrainingParams p, const std::vector<Matrix>& x, RepairMode mode);
TestingParams repair(TestingParams p, const std::vector<Matrix>& x, RepairMode mode);

// ---------------------------------------------------------------------------
// Prediction

struct Prediction {
  std::vector<Vector> scores;            // per subject, length T: (X R W)_t
  std::vector<std::vector<int>> labels;  // per subject, sign(score), sign(0) = +1
};

Prediction predict(const std::vector<Matrix>& f_hat, const std::vector<Matrix>& tau_hat,
                   double tr_seconds, const CognitiveModel& model, const TestingParams& p);

// ---------------------------------------------------------------------------
// Optimization problems

/// Which parameter blocks the optimizer searches; frozen blocks keep the
/// values supplied at construction.
struct FreeMask {
  bool beta = true;
  bool rotation = true;
  bool weights = true;
};

/// Immutable training-phase problem context.  evaluate() is a pure
/// function of the flat vector, safe to call concurrently.
class TrainProblem {
 public:
  TrainProblem(std::vector<Matrix> f, std::vector<Matrix> d, MappingSpec mapping,
               std::vector<int> category_labels, std::vector<int> binary_labels,
               int categories, double alpha, double lambda_orth, RepairMode repair_mode,
               FreeMask mask = {}, TrainingParams frozen = {});

  std::size_t dim() const { return dim_; }
  Index feature_dim() const { return v_; }

  ObjectiveVector evaluate(const std::vector<double>& flat) const;
  std::vector<double> sample(Rng& rng) const;
  void repair_candidate(std::vector<double>& flat) const;
  std::vector<double> warm_candidate() const;

  /// Reassembles full params from the free blocks plus frozen values.
  TrainingParams assemble(const std::vector<double>& flat) const;
  /// Mapped responses A_i = Phi(D_i beta_i) R_i for the given params.
  std::vector<Matrix> mapped(const TrainingParams& p) const;

  ObjectiveFn objective_fn() const;
  SamplerFn sampler_fn() const;
  RepairFn repair_fn() const;

 private:
  std::vector<Matrix> f_, d_;
  MappingSpec mapping_;
  std::vector<int> category_labels_;
  std::vector<std::vector<int>> rows_per_category_;
  std::vector<int> labeled_idx_;
  std::vector<double> labeled_y_;
  int categories_;
  double alpha_, lambda_orth_;
  RepairMode repair_mode_;
  FreeMask mask_;
  TrainingParams frozen_;
  Index v_org_, v_, t_;
  std::size_t dim_;
};

/// Immutable testing-phase problem context (objectives [t1, t2, t3]
/// against a fixed shared space).
class TestProblem {
 public:
  TestProblem(std::vector<Matrix> f_hat, std::vector<Matrix> d_hat, MappingSpec mapping,
              std::vector<int> category_labels, int categories, SharedSpace g,
              double lambda_orth, RepairMode repair_mode, FreeMask mask = {},
              TestingParams frozen = {});

  std::size_t dim() const { return dim_; }

  ObjectiveVector evaluate(const std::vector<double>& flat) const;
  std::vector<double> sample(Rng& rng) const;
  void repair_candidate(std::vector<double>& flat) const;
  std::vector<double> warm_candidate() const;

  TestingParams assemble(const std::vector<double>& flat) const;
  std::vector<Matrix> mapped(const TestingParams& p) const;

  ObjectiveFn objective_fn() const;
  SamplerFn sampler_fn() const;
  RepairFn repair_fn() const;

 private:
  std::vector<Matrix> f_, d_;
  MappingSpec mapping_;
  std::vector<int> category_labels_;
  std::vector<std::vector<int>> rows_per_category_;
  int categories_;
  SharedSpace g_;
  double lambda_orth_;
  RepairMode repair_mode_;
  FreeMask mask_;
  TestingParams frozen_;
  Index v_org_, v_, t_;
  std::size_t dim_;
};

}  // namespace mocm

#endif  // MOCM_OBJECTIVES_HPP
