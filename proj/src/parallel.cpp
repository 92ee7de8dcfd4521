#include "mocm/parallel.hpp"

#include <omp.h>

#include <string>
#include <vector>

namespace mocm {

int resolve_threads(int requested) {
  if (requested <= 0) return omp_get_max_threads();
  return requested;
}

namespace {

void check_lengths(std::span<Candidate> pool) {
  if (pool.empty()) return;
  const std::size_t m = pool.front().objectives->size();
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (pool[i].objectives->size() != m) {
      throw EvaluationError(i, "objective vector length changed mid-run (" +
                                   std::to_string(pool[i].objectives->size()) + " vs " +
                                   std::to_string(m) + ")");
    }
  }
}

}  // namespace

void evaluate_population_serial(std::span<Candidate> pool, const ObjectiveFn& objective_fn) {
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].objectives) continue;
    try {
      pool[i].objectives = objective_fn(pool[i].params);
    } catch (const std::exception& e) {
      throw EvaluationError(i, e.what());
    }
  }
  check_lengths(pool);
}

void evaluate_population(std::span<Candidate> pool, const ObjectiveFn& objective_fn,
                         int threads) {
  const int n = resolve_threads(threads);
  if (n <= 1 || pool.size() < 2) {
    evaluate_population_serial(pool, objective_fn);
    return;
  }

  // Exceptions may not cross the parallel region; record and rethrow the
  // first failure by pool index so the error is schedule-independent.
  std::vector<std::string> errors(pool.size());
  std::vector<char> failed(pool.size(), 0);

#pragma omp parallel for schedule(dynamic) num_threads(n)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(pool.size()); ++i) {
    if (pool[i].objectives) continue;
    try {
      pool[i].objectives = objective_fn(pool[i].params);
    } catch (const std::exception& e) {
      failed[i] = 1;
      errors[i] = e.what();
    } catch (...) {
      failed[i] = 1;
      errors[i] = "unknown evaluation failure";
    }
  }

  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (failed[i]) throw EvaluationError(i, errors[i]);
  }
  check_lengths(pool);
}

void domination_pass_serial(std::span<Candidate> pool) {
  for (std::size_t p = 0; p < pool.size(); ++p) {
    Candidate& cp = pool[p];
    cp.n_p = 0;
    cp.delta.clear();
    const ObjectiveVector& op = *cp.objectives;
    for (std::size_t q = 0; q < pool.size(); ++q) {
      if (q == p) continue;
      const ObjectiveVector& oq = *pool[q].objectives;
      if (dominates(op, oq)) {
        cp.delta.push_back(static_cast<std::uint32_t>(q));
      } else if (dominates(oq, op)) {
        ++cp.n_p;
      }
    }
  }
}

void domination_pass(std::span<Candidate> pool, int threads) {
  const int n = resolve_threads(threads);
  if (n <= 1 || pool.size() < 2) {
    domination_pass_serial(pool);
    return;
  }
#pragma omp parallel for schedule(static) num_threads(n)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(pool.size()); ++p) {
    Candidate& cp = pool[p];
    cp.n_p = 0;
    cp.delta.clear();
    const ObjectiveVector& op = *cp.objectives;
    for (std::size_t q = 0; q < pool.size(); ++q) {
      if (q == static_cast<std::size_t>(p)) continue;
      const ObjectiveVector& oq = *pool[q].objectives;
      if (dominates(op, oq)) {
        cp.delta.push_back(static_cast<std::uint32_t>(q));
      } else if (dominates(oq, op)) {
        ++cp.n_p;
      }
    }
  }
}

}  // namespace mocm
