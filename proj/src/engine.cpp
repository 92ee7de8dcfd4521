#include "mocm/engine.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "mocm/indicators.hpp"
#include "mocm/parallel.hpp"

namespace mocm {

void OptimizerConfig::validate() const {
  if (population_size < 2) {
    throw std::invalid_argument("OptimizerConfig: population_size must be >= 2");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 1");
  }
  if (max_same < 1 || max_same > max_iterations) {
    throw std::invalid_argument("OptimizerConfig: require 1 <= max_same <= max_iterations");
  }
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("OptimizerConfig: kappa must be positive");
  }
}

const char* to_string(Termination t) {
  return t == Termination::MaxItReached ? "MaxItReached" : "MaxSameReached";
}

void OptimizationTrace::write_jsonl(std::ostream& out) const {
  for (std::size_t i = 0; i < best_per_iteration.size(); ++i) {
    nlohmann::json line;
    line["iter"] = i;
    line["best"] = best_per_iteration[i].values();
    line["elapsed_s"] = i < elapsed_seconds.size() ? elapsed_seconds[i] : 0.0;
    out << line.dump() << '\n';
  }
}

std::vector<std::vector<std::uint32_t>> non_dominated_partition(
    std::vector<Candidate>& population, int threads) {
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (!population[i].objectives) {
      throw EvaluationError(i, "objectives not evaluated before partitioning");
    }
  }

  domination_pass(population, threads);

  // Peel fronts on a scratch copy of the counts so every candidate keeps
  // its original n_p.
  std::vector<std::uint32_t> remaining(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) remaining[i] = population[i].n_p;

  std::vector<std::vector<std::uint32_t>> fronts;
  std::vector<std::uint32_t> current;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (remaining[i] == 0) current.push_back(static_cast<std::uint32_t>(i));
  }

  while (!current.empty()) {
    const std::uint32_t front_index = static_cast<std::uint32_t>(fronts.size());
    std::vector<std::uint32_t> next;
    for (std::uint32_t p : current) {
      population[p].front = front_index;
      for (std::uint32_t q : population[p].delta) {
        if (--remaining[q] == 0) next.push_back(q);
      }
    }
    fronts.push_back(std::move(current));
    // Keep each front in ascending pool position; the I2 predecessor
    // relation is defined on the original index.
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

namespace {

struct ScoredMember {
  std::uint32_t pool_index;
  double a;
  double b;
};

/// Scores one position-ordered front with I1/I2 and returns its members
/// ordered ascending by max(a, b), ties by lower a, then pool position.
std::vector<ScoredMember> order_front(const std::vector<Candidate>& pool,
                                      const std::vector<std::uint32_t>& front,
                                      const OptimizerConfig& cfg) {
  std::vector<ObjectiveVector> objs;
  objs.reserve(front.size());
  for (std::uint32_t idx : front) objs.push_back(*pool[idx].objectives);

  std::vector<ScoredMember> scored(front.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    scored[i].pool_index = front[i];
    scored[i].a = indicator_i1(i, objs, cfg.kappa, cfg.swap_indicator_args);
    scored[i].b = indicator_i2(i, objs, cfg.no_predecessor_i2, cfg.swap_indicator_args);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredMember& lhs, const ScoredMember& rhs) {
                     const double ml = std::max(lhs.a, lhs.b);
                     const double mr = std::max(rhs.a, rhs.b);
                     if (ml != mr) return ml < mr;
                     if (lhs.a != rhs.a) return lhs.a < rhs.a;
                     return lhs.pool_index < rhs.pool_index;
                   });
  return scored;
}

}  // namespace

std::vector<Candidate> sort_select(const ObjectiveFn& objective_fn,
                                   std::vector<Candidate> pool, std::uint32_t count,
                                   const OptimizerConfig& config) {
  evaluate_population(pool, objective_fn, config.threads);
  const auto fronts = non_dominated_partition(pool, config.threads);

  std::vector<Candidate> selected;
  selected.reserve(std::min<std::size_t>(count, pool.size()));
  for (const auto& front : fronts) {
    const auto ordered = order_front(pool, front, config);
    for (const ScoredMember& m : ordered) {
      Candidate c = pool[m.pool_index];
      c.a = m.a;
      c.b = m.b;
      selected.push_back(std::move(c));
      if (selected.size() == count) return selected;
    }
  }
  return selected;
}

OptimizeResult optimize(const ObjectiveFn& objective_fn, const SamplerFn& sampler,
                        const OptimizerConfig& config, const RepairFn& repair,
                        const std::vector<std::vector<double>>& initial_params) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const std::uint32_t o = config.population_size;

  auto make_candidate = [&](Rng& rng, std::size_t pool_index) {
    Candidate c;
    try {
      c.params = sampler(rng);
    } catch (const std::exception& e) {
      throw EvaluationError(pool_index, std::string("sampler: ") + e.what());
    }
    if (repair) repair(c.params);
    return c;
  };

  std::vector<Candidate> population;
  population.reserve(o);
  for (const auto& params : initial_params) {
    if (population.size() == o) break;
    Candidate c;
    c.params = params;
    if (repair) repair(c.params);
    population.push_back(std::move(c));
  }
  {
    Rng rng = Rng::stream(config.seed, RngPurpose::Init, 0);
    while (population.size() < o) population.push_back(make_candidate(rng, population.size()));
  }

  OptimizationTrace trace;
  std::uint32_t iteration = 0;
  std::uint32_t same_count = 0;
  ObjectiveVector previous_best;

  auto run_iteration = [&](std::uint32_t i) {
    std::vector<Candidate> pool;
    pool.reserve(3 * o);
    for (const Candidate& c : population) pool.push_back(c);

    // Offspring: component-wise mean of two distinct parents drawn
    // uniformly without replacement, then domain repair.
    Rng offspring_rng = Rng::stream(config.seed, RngPurpose::Offspring, i);
    for (std::uint32_t k = 0; k < o; ++k) {
      const std::size_t i1 = offspring_rng.below(population.size());
      std::size_t i2 = offspring_rng.below(population.size() - 1);
      if (i2 >= i1) ++i2;
      const std::vector<double>& p1 = population[i1].params;
      const std::vector<double>& p2 = population[i2].params;
      Candidate child;
      child.params.resize(p1.size());
      for (std::size_t d = 0; d < p1.size(); ++d) {
        child.params[d] = 0.5 * (p1[d] + p2[d]);
      }
      if (repair) repair(child.params);
      pool.push_back(std::move(child));
    }

    // Exploration: O fresh random solutions.
    Rng explore_rng = Rng::stream(config.seed, RngPurpose::Explore, i);
    for (std::uint32_t k = 0; k < o; ++k) {
      pool.push_back(make_candidate(explore_rng, pool.size()));
    }

    population = sort_select(objective_fn, std::move(pool), o, config);
  };

  while (iteration < config.max_iterations && same_count < config.max_same) {
    try {
      run_iteration(iteration);
    } catch (const EvaluationError& e) {
      throw std::runtime_error("optimize: iteration " + std::to_string(iteration) +
                               ": " + e.what());
    }

    const ObjectiveVector& best = *population.front().objectives;
    if (iteration > 0 && best.bitwise_equal(previous_best)) {
      ++same_count;
    } else {
      same_count = 0;
    }
    previous_best = best;

    trace.best_per_iteration.push_back(best);
    trace.elapsed_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count());
    ++iteration;
  }

  trace.iterations_run = iteration;
  trace.termination = same_count >= config.max_same ? Termination::MaxSameReached
                                                    : Termination::MaxItReached;
  trace.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  return OptimizeResult{population.front(), std::move(trace), std::move(population)};
}

}  // namespace mocm
