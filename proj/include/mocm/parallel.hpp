#ifndef MOCM_PARALLEL_HPP
#define MOCM_PARALLEL_HPP

#include <span>

#include "mocm/engine.hpp"

namespace mocm {

/// Resolves a requested thread cap: 0 means all hardware threads.
int resolve_threads(int requested);

/// Evaluates every candidate that does not yet have cached objectives.
///
/// The OpenMP path writes each result into its own slot, so the outcome is
/// bit-identical to evaluate_population_serial for any thread count and
/// any scheduling.  The first failing candidate (by pool index) is
/// reported via EvaluationError after the region completes.
void evaluate_population(std::span<Candidate> pool, const ObjectiveFn& objective_fn,
                         int threads);

/// Serial reference implementation, kept for testing and benchmarking.
void evaluate_population_serial(std::span<Candidate> pool, const ObjectiveFn& objective_fn);

/// Fills n_p and delta for every pool member (the O(n^2 m) domination
/// pass).  Row-parallel: candidate p's count and dominated set depend only
/// on read-only data, so the result is thread-count independent.
void domination_pass(std::span<Candidate> pool, int threads);

/// Serial reference implementation of the domination pass.
void domination_pass_serial(std::span<Candidate> pool);

}  // namespace mocm

#endif  // MOCM_PARALLEL_HPP
