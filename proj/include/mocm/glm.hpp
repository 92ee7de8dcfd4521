#ifndef MOCM_GLM_HPP
#define MOCM_GLM_HPP

#include <vector>

#include "mocm/linalg.hpp"

namespace mocm {

/// Canonical double-gamma HRF sampled at multiples of the repetition time.
///
/// h(t) = t^(a1-1) e^(-t/b1) / (b1^a1 Gamma(a1))
///      - c t^(a2-1) e^(-t/b2) / (b2^a2 Gamma(a2))
/// with a1 = 6, a2 = 16, b1 = b2 = 1, c = 1/6, sampled on
/// t = 0, TR, 2 TR, ... <= duration and rescaled so the largest sample
/// equals 1.
std::vector<double> hrf_kernel(double tr_seconds, double duration_seconds = 32.0);

/// Builds a design matrix by causal discrete convolution of each onset
/// column with the sampled HRF, truncated to the onset length.
Matrix design_matrix(const Matrix& tau, double tr_seconds);

/// Least-squares regressors minimizing ||F - D beta||_F^2; falls back to
/// the minimum-norm solution (with a logged warning) when D is
/// rank-deficient.
Matrix least_squares_beta(const Matrix& f, const Matrix& d);

}  // namespace mocm

#endif  // MOCM_GLM_HPP
