#ifndef MOCM_INDICATORS_HPP
#define MOCM_INDICATORS_HPP

#include <span>

#include "mocm/objective_vector.hpp"

namespace mocm {

/// Additive epsilon indicator: the smallest eps such that shifting every
/// component of p down by eps makes it weakly dominate q, i.e.
/// max_l(p_l - q_l).  May be negative.
double epsilon_indicator(const ObjectiveVector& p, const ObjectiveVector& q);

/// Shift-based density estimation distance: sqrt(sum_l sd(p_l, q_l)^2)
/// where sd(a, b) = a - b when a < b and 0 otherwise.
double isde(const ObjectiveVector& p, const ObjectiveVector& q);

/// First quality indicator of a front member: sum over the other members p
/// of exp(-I_eps(q, p) / kappa).  Zero for a singleton front.
///
/// `swapped` flips the argument order of the inner epsilon indicator
/// (experimental switch; default matches the printed definition).
double indicator_i1(std::size_t q_index, std::span<const ObjectiveVector> front,
                    double kappa, bool swapped = false);

/// Second indicator: minimum I_SDE(q, p) over members p positioned before q
/// in the (position-ordered) front.  The first-positioned member has no
/// predecessor and receives `sentinel`.
double indicator_i2(std::size_t q_position, std::span<const ObjectiveVector> front,
                    double sentinel, bool swapped = false);

}  // namespace mocm

#endif  // MOCM_INDICATORS_HPP
