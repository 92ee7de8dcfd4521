#ifndef MOCM_RNG_HPP
#define MOCM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace mocm {

/// Stream purposes for counter-based seed splitting.
///
/// Every random draw in a run comes from a stream identified by
/// (master seed, purpose, counter).  Streams are derived with the
/// splitmix64 finalizer:
///
///   seed = mix64(mix64(mix64(master) ^ purpose_tag) ^ counter)
///
/// so any (purpose, counter) pair yields an independent deterministic
/// stream regardless of evaluation or scheduling order.
enum class RngPurpose : std::uint64_t {
  Init = 0x01,       // initial population
  Offspring = 0x02,  // parent selection, counter = iteration
  Explore = 0x03,    // exploration samples, counter = iteration
  Category = 0x04,   // per-category training run, counter = category index
  TestFit = 0x05,    // per-subject testing-phase fit, counter = subject index
  Generator = 0x06,  // synthetic data generator sub-streams
};

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, RngPurpose purpose,
                                    std::uint64_t counter) {
  return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(purpose)) ^ counter);
}

/// mt19937_64 engine with the distribution transforms pinned in-tree.
///
/// The standard specifies the engine output exactly but leaves the
/// distributions implementation-defined, so uniform/normal sampling is
/// done here to keep runs bit-reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static Rng stream(std::uint64_t master, RngPurpose purpose, std::uint64_t counter) {
    return Rng(derive_seed(master, purpose, counter));
  }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  /// Uniform integer in [0, n); n must be positive.  Rejection sampling
  /// keeps the draw unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    std::uint64_t x = eng_();
    while (x < threshold) x = eng_();
    return x % n;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mocm

#endif  // MOCM_RNG_HPP
