#ifndef MOCM_SAMPLING_HPP
#define MOCM_SAMPLING_HPP

#include "mocm/linalg.hpp"
#include "mocm/rng.hpp"

namespace mocm {

/// i.i.d. standard normal matrix.
Matrix random_gaussian(Index rows, Index cols, Rng& rng);

/// Haar-ish random orthogonal matrix: QR factor of a Gaussian draw with
/// the sign ambiguity fixed (positive R diagonal).
Matrix random_orthogonal(Index n, Rng& rng);

}  // namespace mocm

#endif  // MOCM_SAMPLING_HPP
