#include "mocm/glm.hpp"

#include <cmath>
#include <stdexcept>

#include "mocm/log.hpp"

namespace mocm {

namespace {

double double_gamma(double t) {
  constexpr double a1 = 6.0, a2 = 16.0, b1 = 1.0, b2 = 1.0, c = 1.0 / 6.0;
  if (t <= 0.0) return 0.0;
  const double g1 =
      std::pow(t, a1 - 1.0) * std::exp(-t / b1) / (std::pow(b1, a1) * std::tgamma(a1));
  const double g2 =
      std::pow(t, a2 - 1.0) * std::exp(-t / b2) / (std::pow(b2, a2) * std::tgamma(a2));
  return g1 - c * g2;
}

}  // namespace

std::vector<double> hrf_kernel(double tr_seconds, double duration_seconds) {
  if (!(tr_seconds > 0.0)) {
    throw std::invalid_argument("hrf_kernel: TR must be positive");
  }
  std::vector<double> kernel;
  for (double t = 0.0; t <= duration_seconds + 1e-12; t += tr_seconds) {
    kernel.push_back(double_gamma(t));
  }
  double peak = 0.0;
  for (double v : kernel) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) {
    throw std::invalid_argument("hrf_kernel: degenerate sampling, kernel is all zero");
  }
  for (double& v : kernel) v /= peak;
  return kernel;
}

Matrix design_matrix(const Matrix& tau, double tr_seconds) {
  const std::vector<double> h = hrf_kernel(tr_seconds);
  const Index t_len = tau.rows();
  Matrix d = Matrix::Zero(t_len, tau.cols());
  for (Index c = 0; c < tau.cols(); ++c) {
    for (Index t = 0; t < t_len; ++t) {
      double acc = 0.0;
      const Index kmax = std::min<Index>(t, static_cast<Index>(h.size()) - 1);
      for (Index k = 0; k <= kmax; ++k) {
        acc += h[static_cast<std::size_t>(k)] * tau(t - k, c);
      }
      d(t, c) = acc;
    }
  }
  return d;
}

Matrix least_squares_beta(const Matrix& f, const Matrix& d) {
  if (f.rows() != d.rows()) {
    throw std::invalid_argument("least_squares_beta: row count mismatch between data and design");
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(d);
  if (cod.rank() < d.cols()) {
    log_warn("least_squares_beta: rank-deficient design (rank " +
             std::to_string(cod.rank()) + " of " + std::to_string(d.cols()) +
             "), using minimum-norm solution");
  }
  return cod.solve(f);
}

}  // namespace mocm
