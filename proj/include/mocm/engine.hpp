#ifndef MOCM_ENGINE_HPP
#define MOCM_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mocm/objective_vector.hpp"
#include "mocm/rng.hpp"

namespace mocm {

/// One encoded solution plus the bookkeeping used by the selection pass.
struct Candidate {
  std::vector<double> params;
  std::optional<ObjectiveVector> objectives;  // lazily cached

  // Filled by non_dominated_partition, relative to the pool it ran on.
  std::uint32_t n_p = 0;                // number of candidates dominating this one
  std::vector<std::uint32_t> delta;     // pool indices this candidate dominates
  std::uint32_t front = 0;              // 0-based front index

  // Indicator scores within the candidate's front, filled by sort_select.
  double a = 0.0;  // I1
  double b = 0.0;  // I2
};

using ObjectiveFn = std::function<ObjectiveVector(const std::vector<double>&)>;
using SamplerFn = std::function<std::vector<double>(Rng&)>;
using RepairFn = std::function<void(std::vector<double>&)>;

struct OptimizerConfig {
  std::uint32_t population_size = 50;  // O
  std::uint32_t max_iterations = 1000;
  std::uint32_t max_same = 5;
  std::uint64_t seed = 0;
  double kappa = 0.05;             // I1 scaling
  double no_predecessor_i2 = 0.0;  // I2 sentinel for the first-positioned member
  bool swap_indicator_args = false;
  int threads = 0;  // cap on concurrent objective evaluations, 0 = hardware

  void validate() const;
};

enum class Termination { MaxItReached, MaxSameReached };

const char* to_string(Termination t);

struct OptimizationTrace {
  std::vector<ObjectiveVector> best_per_iteration;
  std::vector<double> elapsed_seconds;  // cumulative, one entry per iteration
  std::uint32_t iterations_run = 0;
  Termination termination = Termination::MaxItReached;
  double wall_time_seconds = 0.0;

  /// One JSON object per line: {"iter":i,"best":[...],"elapsed_s":t}
  void write_jsonl(std::ostream& out) const;
};

struct OptimizeResult {
  Candidate best;
  OptimizationTrace trace;
  std::vector<Candidate> final_population;
};

/// Raised when an objective or sampler invocation fails; carries the pool
/// index of the offending candidate.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::size_t candidate_index, const std::string& what)
      : std::runtime_error("candidate " + std::to_string(candidate_index) + ": " + what),
        candidate_index_(candidate_index) {}
  std::size_t candidate_index() const { return candidate_index_; }

 private:
  std::size_t candidate_index_;
};

/// Partitions a population into non-dominated fronts.
///
/// Fills n_p (domination count), delta (dominated set) and front on every
/// candidate; the returned fronts hold pool indices in ascending position
/// order.  All objectives must already be evaluated and of equal length.
std::vector<std::vector<std::uint32_t>> non_dominated_partition(
    std::vector<Candidate>& population, int threads = 1);

/// Evaluates the pool, partitions it into fronts, scores each front with
/// the I1/I2 indicators and returns the first `count` candidates ordered
/// ascending by max(I1, I2) (ties: lower I1, then pool position).
std::vector<Candidate> sort_select(const ObjectiveFn& objective_fn,
                                   std::vector<Candidate> pool, std::uint32_t count,
                                   const OptimizerConfig& config);

/// Runs the full optimization loop: random initial population, per
/// iteration O mean-of-two-parents offspring plus O fresh exploration
/// samples pooled with the survivors (3O total), selection back to O.
/// Terminates when the best cost vector is bitwise identical for
/// `max_same` consecutive iterations or after `max_iterations`.
/// Fully deterministic given the seed, for any thread count.
///
/// `initial_params` seeds the first population (e.g. a warm-start
/// candidate); the remainder is drawn from the sampler.
OptimizeResult optimize(const ObjectiveFn& objective_fn, const SamplerFn& sampler,
                        const OptimizerConfig& config, const RepairFn& repair = {},
                        const std::vector<std::vector<double>>& initial_params = {});

}  // namespace mocm

#endif  // MOCM_ENGINE_HPP
