#include "mocm/indicators.hpp"

#include <cmath>
#include <stdexcept>

namespace mocm {

double epsilon_indicator(const ObjectiveVector& p, const ObjectiveVector& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("epsilon_indicator: cost vectors of unequal length");
  }
  double eps = p[0] - q[0];
  for (std::size_t i = 1; i < p.size(); ++i) {
    eps = std::max(eps, p[i] - q[i]);
  }
  return eps;
}

double isde(const ObjectiveVector& p, const ObjectiveVector& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("isde: cost vectors of unequal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < q[i]) {
      const double d = p[i] - q[i];
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

double indicator_i1(std::size_t q_index, std::span<const ObjectiveVector> front,
                    double kappa, bool swapped) {
  const ObjectiveVector& q = front[q_index];
  double sum = 0.0;
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (i == q_index) continue;
    const double eps =
        swapped ? epsilon_indicator(front[i], q) : epsilon_indicator(q, front[i]);
    sum += std::exp(-eps / kappa);
  }
  return sum;
}

double indicator_i2(std::size_t q_position, std::span<const ObjectiveVector> front,
                    double sentinel, bool swapped) {
  if (q_position == 0) return sentinel;
  const ObjectiveVector& q = front[q_position];
  double best = swapped ? isde(front[0], q) : isde(q, front[0]);
  for (std::size_t i = 1; i < q_position; ++i) {
    const double d = swapped ? isde(front[i], q) : isde(q, front[i]);
    best = std::min(best, d);
  }
  return best;
}

}  // namespace mocm
