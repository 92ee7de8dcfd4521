#ifndef MOCM_MAPPING_HPP
#define MOCM_MAPPING_HPP

#include <string>

#include "mocm/linalg.hpp"

namespace mocm {

enum class MappingKind { Linear, GaussianKernel, SvdSelect };

const char* to_string(MappingKind kind);
MappingKind mapping_kind_from_string(const std::string& name);

/// Identity mapping.
Matrix phi_linear(const Matrix& m);

/// Gaussian kernel features against a fixed anchor set:
/// out(i, j) = exp(-gamma * ||m_i - anchors_j||^2).  Anchors come from the
/// training phase only, so train and test land in the same feature space.
Matrix phi_gaussian(const Matrix& m, const Matrix& anchors, double gamma,
                    int threads = 1);

/// Serial reference for the kernel features, kept for testing/benchmarks.
Matrix phi_gaussian_serial(const Matrix& m, const Matrix& anchors, double gamma);

/// Feature-selection basis: the top-v right singular vectors of the
/// vertically stacked training data, sign-normalized so the
/// largest-magnitude entry of each vector is positive.  Throws if v
/// exceeds the numerical rank (the message lists the attainable rank).
Matrix svd_select(const Matrix& training_stack, Index v);

/// Frozen description of the feature mapping, persisted with a model.
struct MappingSpec {
  MappingKind kind = MappingKind::Linear;
  double gamma = 0.0;  // GaussianKernel only
  Matrix anchors;      // GaussianKernel only, T_a x V_org
  Matrix basis;        // SvdSelect only, V_org x V

  Index output_dim(Index v_org) const;
  Matrix apply(const Matrix& m) const;
};

}  // namespace mocm

#endif  // MOCM_MAPPING_HPP
