#ifndef MOCM_OBJECTIVE_VECTOR_HPP
#define MOCM_OBJECTIVE_VECTOR_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace mocm {

/// Ordered vector of real-valued costs, all to be minimized.
///
/// Entries must be finite: an evaluation that produces NaN or Inf is an
/// error and is rejected at construction.
class ObjectiveVector {
 public:
  ObjectiveVector() = default;

  explicit ObjectiveVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw std::invalid_argument("ObjectiveVector: empty cost vector");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw std::invalid_argument("ObjectiveVector: non-finite cost at component " +
                                    std::to_string(i));
      }
    }
  }

  ObjectiveVector(std::initializer_list<double> values)
      : ObjectiveVector(std::vector<double>(values)) {}

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  /// Exact bit-level equality, used by the MaxSame termination test.
  bool bitwise_equal(const ObjectiveVector& other) const {
    if (values_.size() != other.values_.size()) return false;
    return values_.empty() ||
           std::memcmp(values_.data(), other.values_.data(),
                       values_.size() * sizeof(double)) == 0;
  }

  bool operator==(const ObjectiveVector& other) const { return bitwise_equal(other); }

 private:
  std::vector<double> values_;
};

/// Pareto dominance for minimization: a dominates b iff a is no worse in
/// every component and strictly better in at least one.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

}  // namespace mocm

#endif  // MOCM_OBJECTIVE_VECTOR_HPP
