#include "mocm/mapping.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

namespace mocm {

const char* to_string(MappingKind kind) {
  switch (kind) {
    case MappingKind::Linear: return "linear";
    case MappingKind::GaussianKernel: return "gaussian";
    case MappingKind::SvdSelect: return "svd";
  }
  return "linear";
}

MappingKind mapping_kind_from_string(const std::string& name) {
  if (name == "linear") return MappingKind::Linear;
  if (name == "gaussian") return MappingKind::GaussianKernel;
  if (name == "svd") return MappingKind::SvdSelect;
  throw std::invalid_argument("unknown mapping kind '" + name +
                              "' (expected linear, gaussian or svd)");
}

Matrix phi_linear(const Matrix& m) { return m; }

Matrix phi_gaussian_serial(const Matrix& m, const Matrix& anchors, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("phi_gaussian: gamma must be positive");
  if (anchors.rows() < 1) throw std::invalid_argument("phi_gaussian: need at least one anchor");
  if (m.cols() != anchors.cols()) {
    throw std::invalid_argument("phi_gaussian: feature dimension mismatch with anchors");
  }
  Matrix out(m.rows(), anchors.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < anchors.rows(); ++j) {
      const double d2 = (m.row(i) - anchors.row(j)).squaredNorm();
      out(i, j) = std::exp(-gamma * d2);
    }
  }
  return out;
}

Matrix phi_gaussian(const Matrix& m, const Matrix& anchors, double gamma, int threads) {
  if (threads <= 1 || m.rows() < 2) return phi_gaussian_serial(m, anchors, gamma);
  if (!(gamma > 0.0)) throw std::invalid_argument("phi_gaussian: gamma must be positive");
  if (anchors.rows() < 1) throw std::invalid_argument("phi_gaussian: need at least one anchor");
  if (m.cols() != anchors.cols()) {
    throw std::invalid_argument("phi_gaussian: feature dimension mismatch with anchors");
  }
  Matrix out(m.rows(), anchors.rows());
#pragma omp parallel for schedule(static) num_threads(threads)
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < anchors.rows(); ++j) {
      const double d2 = (m.row(i) - anchors.row(j)).squaredNorm();
      out(i, j) = std::exp(-gamma * d2);
    }
  }
  return out;
}

Matrix svd_select(const Matrix& training_stack, Index v) {
  if (v < 1 || v > std::min(training_stack.rows(), training_stack.cols())) {
    throw std::invalid_argument("svd_select: target dimension out of range");
  }
  Eigen::BDCSVD<Matrix> svd(training_stack, Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double tol = std::max(training_stack.rows(), training_stack.cols()) *
                     std::numeric_limits<double>::epsilon() * sigma(0);
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol) ++rank;
  }
  if (v > rank) {
    throw std::invalid_argument("svd_select: requested " + std::to_string(v) +
                                " components but the data has rank " + std::to_string(rank));
  }
  Matrix basis = svd.matrixV().leftCols(v);
  // Fix the sign per singular vector: largest-magnitude entry positive.
  for (Index c = 0; c < basis.cols(); ++c) {
    Index arg = 0;
    double best = 0.0;
    for (Index r = 0; r < basis.rows(); ++r) {
      const double mag = std::abs(basis(r, c));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (basis(arg, c) < 0.0) basis.col(c) = -basis.col(c);
  }
  return basis;
}

Index MappingSpec::output_dim(Index v_org) const {
  switch (kind) {
    case MappingKind::Linear: return v_org;
    case MappingKind::GaussianKernel: return anchors.rows();
    case MappingKind::SvdSelect: return basis.cols();
  }
  return v_org;
}

Matrix MappingSpec::apply(const Matrix& m) const {
  switch (kind) {
    case MappingKind::Linear: return phi_linear(m);
    case MappingKind::GaussianKernel: return phi_gaussian_serial(m, anchors, gamma);
    case MappingKind::SvdSelect:
      if (m.cols() != basis.rows()) {
        throw std::invalid_argument("MappingSpec: input has " + std::to_string(m.cols()) +
                                    " features, basis expects " + std::to_string(basis.rows()));
      }
      return m * basis;
  }
  return m;
}

}  // namespace mocm
