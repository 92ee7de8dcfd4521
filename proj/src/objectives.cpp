#include "mocm/objectives.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "mocm/dataset.hpp"
#include "mocm/glm.hpp"
#include "mocm/log.hpp"
#include "mocm/sampling.hpp"

namespace mocm {

// ---------------------------------------------------------------------------
// Encoding

namespace {

void append_matrix(std::vector<double>& out, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
}

Matrix take_matrix(std::span<const double>& flat, Index rows, Index cols) {
  const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (flat.size() < n) {
    throw std::invalid_argument("decode: flat vector shorter than the shape requires");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = flat[k++];
  flat = flat.subspan(n);
  return m;
}

}  // namespace

std::vector<double> encode(const TrainingParams& p) {
  std::vector<double> flat;
  for (const Matrix& b : p.beta) append_matrix(flat, b);
  for (const Matrix& r : p.rotation) append_matrix(flat, r);
  for (Index i = 0; i < p.weights.size(); ++i) flat.push_back(p.weights(i));
  return flat;
}

std::vector<double> encode(const TestingParams& p) {
  std::vector<double> flat;
  for (const Matrix& b : p.beta) append_matrix(flat, b);
  for (const Matrix& r : p.rotation) append_matrix(flat, r);
  return flat;
}

TrainingParams decode_training(std::span<const double> flat, const ParamShape& shape) {
  if (!shape.has_weights || flat.size() != shape.flat_size()) {
    throw std::invalid_argument("decode_training: flat length " + std::to_string(flat.size()) +
                                " does not match shape (" + std::to_string(shape.flat_size()) +
                                " expected)");
  }
  TrainingParams p;
  p.alpha = shape.alpha;
  for (int s = 0; s < shape.subjects; ++s) {
    p.beta.push_back(take_matrix(flat, shape.categories, shape.v_org));
  }
  for (int s = 0; s < shape.subjects; ++s) {
    p.rotation.push_back(take_matrix(flat, shape.v, shape.v));
  }
  p.weights = Vector(shape.v);
  for (Index i = 0; i < shape.v; ++i) p.weights(i) = flat[static_cast<std::size_t>(i)];
  return p;
}

TestingParams decode_testing(std::span<const double> flat, const ParamShape& shape) {
  ParamShape expect = shape;
  expect.has_weights = false;
  if (flat.size() != expect.flat_size()) {
    throw std::invalid_argument("decode_testing: flat length " + std::to_string(flat.size()) +
                                " does not match shape (" + std::to_string(expect.flat_size()) +
                                " expected)");
  }
  TestingParams p;
  for (int s = 0; s < shape.subjects; ++s) {
    p.beta.push_back(take_matrix(flat, shape.categories, shape.v_org));
  }
  for (int s = 0; s < shape.subjects; ++s) {
    p.rotation.push_back(take_matrix(flat, shape.v, shape.v));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Objective components

double theta1(const std::vector<Matrix>& f, const std::vector<Matrix>& d,
              const std::vector<Matrix>& beta) {
  if (f.empty() || f.size() != d.size() || f.size() != beta.size()) {
    throw std::invalid_argument("theta1: subject list size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (d[i].rows() != f[i].rows() || d[i].cols() != beta[i].rows() ||
        beta[i].cols() != f[i].cols()) {
      throw std::invalid_argument("theta1: dimension mismatch for subject " + std::to_string(i));
    }
    sum += (f[i] - d[i] * beta[i]).squaredNorm();
  }
  return sum / static_cast<double>(f.size());
}

SharedSpace shared_space(const std::vector<Matrix>& mapped) {
  if (mapped.empty()) throw std::invalid_argument("shared_space: empty subject list");
  Matrix g = mapped.front();
  for (std::size_t i = 1; i < mapped.size(); ++i) {
    if (mapped[i].rows() != g.rows() || mapped[i].cols() != g.cols()) {
      throw std::invalid_argument("shared_space: shape mismatch at subject " + std::to_string(i));
    }
    g += mapped[i];
  }
  g /= static_cast<double>(mapped.size());
  return SharedSpace{std::move(g)};
}

namespace {

double orthogonality_penalty(const std::vector<Matrix>& mapped) {
  double sum = 0.0;
  for (const Matrix& a : mapped) {
    const Matrix gram = a.transpose() * a;
    sum += (gram - Matrix::Identity(gram.rows(), gram.cols())).squaredNorm();
  }
  return sum;
}

}  // namespace

double theta2_pairwise(const std::vector<Matrix>& mapped, double lambda_orth) {
  if (mapped.empty()) throw std::invalid_argument("theta2_pairwise: empty subject list");
  double sum = 0.0;
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    for (std::size_t j = i + 1; j < mapped.size(); ++j) {
      if (mapped[i].rows() != mapped[j].rows() || mapped[i].cols() != mapped[j].cols()) {
        throw std::invalid_argument("theta2_pairwise: shape mismatch between subjects");
      }
      sum += (mapped[i] - mapped[j]).squaredNorm();
    }
  }
  double value = sum / static_cast<double>(mapped.size());
  if (lambda_orth != 0.0) value += lambda_orth * orthogonality_penalty(mapped);
  return value;
}

double theta2_shared(const std::vector<Matrix>& mapped, const SharedSpace& g,
                     double lambda_orth) {
  if (mapped.empty()) throw std::invalid_argument("theta2_shared: empty subject list");
  double sum = 0.0;
  for (const Matrix& a : mapped) {
    if (a.rows() != g.g.rows() || a.cols() != g.g.cols()) {
      throw std::invalid_argument("theta2_shared: subject shape does not match shared space");
    }
    sum += (g.g - a).squaredNorm();
  }
  double value = sum / static_cast<double>(mapped.size());
  if (lambda_orth != 0.0) value += lambda_orth * orthogonality_penalty(mapped);
  return value;
}

double ise(const Vector& x, const Vector& g) {
  if (x.size() != g.size()) throw std::invalid_argument("ise: vector length mismatch");
  const double nx = x.norm();
  const double ng = g.norm();
  if (nx <= 0.0 || ng <= 0.0) {
    throw std::invalid_argument("ise: zero-norm input pattern");
  }
  // Identical patterns have cosine exactly one; the general path can lose
  // an ulp to the square roots.
  if ((x.array() == g.array()).all()) return 1.0;
  const double c = x.dot(g) / (nx * ng);
  // Clamp rounding spill so the cosine stays in [-1, 1].
  return std::min(1.0, std::max(-1.0, c));
}

double theta3(const std::vector<Matrix>& pre, const std::vector<Matrix>& post,
              const std::vector<std::vector<int>>& rows_per_category) {
  if (pre.empty() || pre.size() != post.size()) {
    throw std::invalid_argument("theta3: subject list size mismatch");
  }
  const std::size_t c = rows_per_category.size();
  for (const auto& rows : rows_per_category) {
    if (rows.empty()) throw std::invalid_argument("theta3: category with no labeled time points");
  }
  double sum = 0.0;
  std::vector<double> angles(c);
  for (std::size_t l = 0; l < pre.size(); ++l) {
    if (pre[l].rows() != post[l].rows()) {
      throw std::invalid_argument("theta3: pre/post row mismatch for subject " + std::to_string(l));
    }
    for (std::size_t m = 0; m < c; ++m) {
      Vector x = Vector::Zero(pre[l].cols());
      Vector g = Vector::Zero(post[l].cols());
      for (int row : rows_per_category[m]) {
        x += pre[l].row(row).transpose();
        g += post[l].row(row).transpose();
      }
      const double n = static_cast<double>(rows_per_category[m].size());
      angles[m] = ise(x / n, g / n);
    }
    for (std::size_t m = 0; m < c; ++m) {
      for (std::size_t k = m + 1; k < c; ++k) {
        const double d = angles[m] - angles[k];
        sum += d * d;
      }
    }
  }
  return sum / static_cast<double>(pre.size());
}

double theta4(const std::vector<Matrix>& mapped, const Vector& w,
              const std::vector<int>& y, double alpha) {
  if (mapped.empty()) throw std::invalid_argument("theta4: empty subject list");
  if (!(alpha > 0.0)) throw std::invalid_argument("theta4: alpha must be positive");
  double hinge = 0.0;
  for (const Matrix& a : mapped) {
    if (a.cols() != w.size()) {
      throw std::invalid_argument("theta4: weight length does not match mapped features");
    }
    if (static_cast<std::size_t>(a.rows()) != y.size()) {
      throw std::invalid_argument("theta4: label length does not match time points");
    }
    const Vector scores = a * w;
    for (Index t = 0; t < scores.size(); ++t) {
      const int label = y[static_cast<std::size_t>(t)];
      if (label != 1 && label != -1) {
        throw std::invalid_argument("theta4: label outside {-1,+1} at time point " +
                                    std::to_string(t));
      }
      const double margin = 1.0 - static_cast<double>(label) * scores(t);
      if (margin > 0.0) hinge += margin * margin;
    }
  }
  return alpha / static_cast<double>(mapped.size()) * hinge + w.lpNorm<1>();
}

// ---------------------------------------------------------------------------
// Integrated objectives

namespace {

// Shared evaluation core: features, mapped responses and the four costs.
// Keeping one code path makes the packaged ops and the optimizer-facing
// problems agree bit-for-bit.
struct EvalPieces {
  std::vector<Matrix> x;  // Phi(D beta)
  std::vector<Matrix> a;  // X R
};

EvalPieces features_and_mapped(const std::vector<Matrix>& d, const MappingSpec& mapping,
                               const std::vector<Matrix>& beta,
                               const std::vector<Matrix>& rotation) {
  EvalPieces out;
  out.x.reserve(d.size());
  out.a.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    Matrix x = mapping.apply(d[i] * beta[i]);
    if (x.cols() != rotation[i].rows()) {
      throw std::invalid_argument("mapped feature dimension does not match rotation block");
    }
    out.a.push_back(x * rotation[i]);
    out.x.push_back(std::move(x));
  }
  return out;
}

double hinge_subset(const std::vector<Matrix>& mapped, const Vector& w,
                    const std::vector<int>& labeled_idx, const std::vector<double>& labeled_y,
                    double alpha) {
  double hinge = 0.0;
  for (const Matrix& a : mapped) {
    const Vector scores = a * w;
    for (std::size_t k = 0; k < labeled_idx.size(); ++k) {
      const double margin = 1.0 - labeled_y[k] * scores(labeled_idx[k]);
      if (margin > 0.0) hinge += margin * margin;
    }
  }
  return alpha / static_cast<double>(mapped.size()) * hinge + w.lpNorm<1>();
}

double guard_finite(double v) { return std::isfinite(v) ? v : kWorstCost; }

/// theta3 with the in-run degeneracy policy: a candidate whose mapped
/// pattern collapses to zero norm gets the worst finite cost instead of
/// aborting the search.
double theta3_guarded(const std::vector<Matrix>& pre, const std::vector<Matrix>& post,
                      const std::vector<std::vector<int>>& rows_per_category) {
  try {
    return theta3(pre, post, rows_per_category);
  } catch (const std::invalid_argument&) {
    return kWorstCost;
  }
}

}  // namespace

ObjectiveVector k_train(const std::vector<Matrix>& f, const std::vector<Matrix>& tau,
                        double tr_seconds, const TrainingParams& p,
                        const MappingSpec& mapping, const std::vector<int>& y,
                        double lambda_orth) {
  if (f.size() != tau.size() || f.size() != p.beta.size() || f.size() != p.rotation.size()) {
    throw std::invalid_argument("k_train: subject list size mismatch");
  }
  std::vector<Matrix> d;
  d.reserve(tau.size());
  for (const Matrix& t : tau) d.push_back(design_matrix(t, tr_seconds));

  const int categories = static_cast<int>(tau.front().cols());
  const auto cat_rows = category_rows(derive_labels(tau.front()), categories);

  std::vector<int> labeled_idx;
  std::vector<double> labeled_y;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t] == 1 || y[t] == -1) {
      labeled_idx.push_back(static_cast<int>(t));
      labeled_y.push_back(static_cast<double>(y[t]));
    } else if (y[t] != 0) {
      throw std::invalid_argument("k_train: task label outside {-1,0,+1}");
    }
  }
  if (labeled_idx.empty()) throw std::invalid_argument("k_train: no labeled time points");

  double t1, t2, t3, t4;
  try {
    t1 = guard_finite(theta1(f, d, p.beta));
    const EvalPieces pieces = features_and_mapped(d, mapping, p.beta, p.rotation);
    t2 = guard_finite(theta2_pairwise(pieces.a, lambda_orth));
    t3 = guard_finite(theta3_guarded(pieces.x, pieces.a, cat_rows));
    t4 = guard_finite(hinge_subset(pieces.a, p.weights, labeled_idx, labeled_y, p.alpha));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("k_train: ") + e.what());
  }
  return ObjectiveVector{t1, t2, t3, t4};
}

ObjectiveVector k_test(const std::vector<Matrix>& f_hat, const std::vector<Matrix>& tau_hat,
                       double tr_seconds, const SharedSpace& g, const TestingParams& p,
                       const MappingSpec& mapping, double lambda_orth) {
  if (f_hat.size() != tau_hat.size() || f_hat.size() != p.beta.size() ||
      f_hat.size() != p.rotation.size()) {
    throw std::invalid_argument("k_test: subject list size mismatch");
  }
  std::vector<Matrix> d;
  d.reserve(tau_hat.size());
  for (const Matrix& t : tau_hat) d.push_back(design_matrix(t, tr_seconds));

  const int categories = static_cast<int>(tau_hat.front().cols());
  const auto cat_rows = category_rows(derive_labels(tau_hat.front()), categories);

  double t1, t2, t3;
  try {
    t1 = guard_finite(theta1(f_hat, d, p.beta));
    const EvalPieces pieces = features_and_mapped(d, mapping, p.beta, p.rotation);
    t2 = guard_finite(theta2_shared(pieces.a, g, lambda_orth));
    t3 = guard_finite(theta3_guarded(pieces.x, pieces.a, cat_rows));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("k_test: ") + e.what());
  }
  return ObjectiveVector{t1, t2, t3};
}

// ---------------------------------------------------------------------------
// Repair

const char* to_string(RepairMode mode) {
  return mode == RepairMode::Soft ? "soft" : "hard";
}

RepairMode repair_mode_from_string(const std::string& name) {
  if (name == "soft") return RepairMode::Soft;
  if (name == "hard") return RepairMode::Hard;
  throw std::invalid_argument("unknown repair mode '" + name + "' (expected soft or hard)");
}

bool repair_rotation(const Matrix& x, Matrix& r) {
  if (x.cols() > x.rows()) return false;  // hard repair needs V <= T
  const Matrix a = x * r;
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double tol =
      std::max(a.rows(), a.cols()) * std::numeric_limits<double>::epsilon() *
      (sigma.size() > 0 ? sigma(0) : 0.0);
  if (sigma.size() == 0 || sigma(sigma.size() - 1) <= tol) {
    return false;  // rank-deficient product, nearest orthonormal frame is ambiguous
  }
  const Matrix a_star = svd.matrixU() * svd.matrixV().transpose();

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x);
  if (cod.rank() < x.cols()) return false;
  r = cod.solve(a_star);
  return true;
}

TrainingParams repair(TrainingParams p, const std::vector<Matrix>& x, RepairMode mode) {
  if (mode == RepairMode::Soft) return p;
  for (std::size_t i = 0; i < p.rotation.size(); ++i) {
    if (!repair_rotation(x[i], p.rotation[i])) {
      log_warn("repair: rank-deficient features for subject " + std::to_string(i) +
               ", falling back to soft mode");
    }
  }
  return p;
}

TestingParams repair(TestingParams p, const std::vector<Matrix>& x, RepairMode mode) {
  if (mode == RepairMode::Soft) return p;
  for (std::size_t i = 0; i < p.rotation.size(); ++i) {
    if (!repair_rotation(x[i], p.rotation[i])) {
      log_warn("repair: rank-deficient features for subject " + std::to_string(i) +
               ", falling back to soft mode");
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Prediction

Prediction predict(const std::vector<Matrix>& f_hat, const std::vector<Matrix>& tau_hat,
                   double tr_seconds, const CognitiveModel& model, const TestingParams& p) {
  if (f_hat.size() != tau_hat.size() || f_hat.size() != p.beta.size() ||
      f_hat.size() != p.rotation.size()) {
    throw std::invalid_argument("predict: subject list size mismatch");
  }
  Prediction out;
  for (std::size_t i = 0; i < f_hat.size(); ++i) {
    if (f_hat[i].rows() != tau_hat[i].rows()) {
      throw std::invalid_argument("predict: series/onset row mismatch for subject " +
                                  std::to_string(i));
    }
    const Matrix d = design_matrix(tau_hat[i], tr_seconds);
    const Matrix x = model.mapping.apply(d * p.beta[i]);
    if (x.cols() != p.rotation[i].rows() || p.rotation[i].cols() != model.weights.size()) {
      throw std::invalid_argument("predict: dimension mismatch with model for subject " +
                                  std::to_string(i));
    }
    Vector scores = x * p.rotation[i] * model.weights;
    std::vector<int> labels(static_cast<std::size_t>(scores.size()));
    for (Index t = 0; t < scores.size(); ++t) {
      labels[static_cast<std::size_t>(t)] = scores(t) < 0.0 ? -1 : 1;  // sign(0) = +1
    }
    out.scores.push_back(std::move(scores));
    out.labels.push_back(std::move(labels));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimization problems

namespace {

constexpr double kInitSigma = 0.1;  // spread of the beta / weight initializers

Matrix procrustes_rotation(const Matrix& x, const Matrix& target) {
  Eigen::BDCSVD<Matrix> svd(x.transpose() * target,
                            Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// A few passes of exact-ish coordinate minimization of the squared-hinge
/// plus L1 cost; each coordinate step is a ternary search on the convex
/// one-dimensional slice.
Vector coordinate_descent_weights(const std::vector<Matrix>& a,
                                  const std::vector<int>& labeled_idx,
                                  const std::vector<double>& labeled_y, double alpha,
                                  int passes) {
  const Index v = a.front().cols();
  const double inv_s = 1.0 / static_cast<double>(a.size());
  Vector w = Vector::Zero(v);
  std::vector<Vector> scores;
  scores.reserve(a.size());
  for (const Matrix& m : a) scores.push_back(Vector::Zero(m.rows()));

  auto slice_cost = [&](Index j, double val) {
    const double shift = val - w(j);
    double hinge = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t k = 0; k < labeled_idx.size(); ++k) {
        const int row = labeled_idx[k];
        const double s = scores[i](row) + shift * a[i](row, j);
        const double margin = 1.0 - labeled_y[k] * s;
        if (margin > 0.0) hinge += margin * margin;
      }
    }
    return alpha * inv_s * hinge + std::abs(val);
  };

  for (int pass = 0; pass < passes; ++pass) {
    for (Index j = 0; j < v; ++j) {
      double lo = w(j) - 2.0, hi = w(j) + 2.0;
      for (int it = 0; it < 60; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (slice_cost(j, m1) <= slice_cost(j, m2)) {
          hi = m2;
        } else {
          lo = m1;
        }
      }
      const double val = 0.5 * (lo + hi);
      const double shift = val - w(j);
      if (shift != 0.0) {
        for (std::size_t i = 0; i < a.size(); ++i) scores[i] += shift * a[i].col(j);
        w(j) = val;
      }
    }
  }
  return w;
}

}  // namespace

TrainProblem::TrainProblem(std::vector<Matrix> f, std::vector<Matrix> d, MappingSpec mapping,
                           std::vector<int> category_labels, std::vector<int> binary_labels,
                           int categories, double alpha, double lambda_orth,
                           RepairMode repair_mode, FreeMask mask, TrainingParams frozen)
    : f_(std::move(f)),
      d_(std::move(d)),
      mapping_(std::move(mapping)),
      category_labels_(std::move(category_labels)),
      categories_(categories),
      alpha_(alpha),
      lambda_orth_(lambda_orth),
      repair_mode_(repair_mode),
      mask_(mask),
      frozen_(std::move(frozen)) {
  if (f_.empty() || f_.size() != d_.size()) {
    throw std::invalid_argument("TrainProblem: subject list size mismatch");
  }
  t_ = f_.front().rows();
  v_org_ = f_.front().cols();
  v_ = mapping_.output_dim(v_org_);
  if (!(alpha_ > 0.0)) throw std::invalid_argument("TrainProblem: alpha must be positive");
  if (static_cast<Index>(category_labels_.size()) != t_ ||
      static_cast<Index>(binary_labels.size()) != t_) {
    throw std::invalid_argument("TrainProblem: label length does not match time points");
  }
  rows_per_category_ = category_rows(category_labels_, categories_);
  for (std::size_t t = 0; t < binary_labels.size(); ++t) {
    if (binary_labels[t] == 1 || binary_labels[t] == -1) {
      labeled_idx_.push_back(static_cast<int>(t));
      labeled_y_.push_back(static_cast<double>(binary_labels[t]));
    } else if (binary_labels[t] != 0) {
      throw std::invalid_argument("TrainProblem: task label outside {-1,0,+1}");
    }
  }
  if (labeled_idx_.empty()) throw std::invalid_argument("TrainProblem: no labeled time points");

  const std::size_t s = f_.size();
  frozen_.alpha = alpha_;
  if (!mask_.beta && frozen_.beta.size() != s) {
    throw std::invalid_argument("TrainProblem: frozen beta blocks missing");
  }
  if (!mask_.rotation && frozen_.rotation.size() != s) {
    throw std::invalid_argument("TrainProblem: frozen rotation blocks missing");
  }
  if (!mask_.weights && frozen_.weights.size() != v_) {
    throw std::invalid_argument("TrainProblem: frozen weights missing");
  }

  dim_ = 0;
  if (mask_.beta) dim_ += s * static_cast<std::size_t>(categories_) * static_cast<std::size_t>(v_org_);
  if (mask_.rotation) dim_ += s * static_cast<std::size_t>(v_) * static_cast<std::size_t>(v_);
  if (mask_.weights) dim_ += static_cast<std::size_t>(v_);
  if (dim_ == 0) throw std::invalid_argument("TrainProblem: no free parameter block");
}

TrainingParams TrainProblem::assemble(const std::vector<double>& flat) const {
  if (flat.size() != dim_) {
    throw std::invalid_argument("TrainProblem: flat length " + std::to_string(flat.size()) +
                                ", expected " + std::to_string(dim_));
  }
  TrainingParams p;
  p.alpha = alpha_;
  std::span<const double> rest(flat);
  if (mask_.beta) {
    for (std::size_t i = 0; i < f_.size(); ++i) {
      p.beta.push_back(take_matrix(rest, categories_, v_org_));
    }
  } else {
    p.beta = frozen_.beta;
  }
  if (mask_.rotation) {
    for (std::size_t i = 0; i < f_.size(); ++i) {
      p.rotation.push_back(take_matrix(rest, v_, v_));
    }
  } else {
    p.rotation = frozen_.rotation;
  }
  if (mask_.weights) {
    p.weights = Vector(v_);
    for (Index i = 0; i < v_; ++i) p.weights(i) = rest[static_cast<std::size_t>(i)];
  } else {
    p.weights = frozen_.weights;
  }
  return p;
}

std::vector<Matrix> TrainProblem::mapped(const TrainingParams& p) const {
  return features_and_mapped(d_, mapping_, p.beta, p.rotation).a;
}

ObjectiveVector TrainProblem::evaluate(const std::vector<double>& flat) const {
  const TrainingParams p = assemble(flat);
  const double t1 = guard_finite(theta1(f_, d_, p.beta));
  const EvalPieces pieces = features_and_mapped(d_, mapping_, p.beta, p.rotation);
  const double t2 = guard_finite(theta2_pairwise(pieces.a, lambda_orth_));
  const double t3 = guard_finite(theta3_guarded(pieces.x, pieces.a, rows_per_category_));
  const double t4 =
      guard_finite(hinge_subset(pieces.a, p.weights, labeled_idx_, labeled_y_, alpha_));
  return ObjectiveVector{t1, t2, t3, t4};
}

std::vector<double> TrainProblem::sample(Rng& rng) const {
  std::vector<double> flat;
  flat.reserve(dim_);
  if (mask_.beta) {
    const std::size_t n =
        f_.size() * static_cast<std::size_t>(categories_) * static_cast<std::size_t>(v_org_);
    for (std::size_t i = 0; i < n; ++i) flat.push_back(rng.normal(0.0, kInitSigma));
  }
  if (mask_.rotation) {
    for (std::size_t i = 0; i < f_.size(); ++i) {
      append_matrix(flat, random_orthogonal(v_, rng));
    }
  }
  if (mask_.weights) {
    for (Index i = 0; i < v_; ++i) flat.push_back(rng.normal(0.0, kInitSigma));
  }
  return flat;
}

void TrainProblem::repair_candidate(std::vector<double>& flat) const {
  if (repair_mode_ != RepairMode::Hard || !mask_.rotation) return;
  TrainingParams p = assemble(flat);
  std::size_t offset = 0;
  if (mask_.beta) {
    offset = f_.size() * static_cast<std::size_t>(categories_) * static_cast<std::size_t>(v_org_);
  }
  for (std::size_t i = 0; i < f_.size(); ++i) {
    const Matrix x = mapping_.apply(d_[i] * p.beta[i]);
    Matrix r = p.rotation[i];
    if (repair_rotation(x, r)) {
      for (Index a = 0; a < r.rows(); ++a)
        for (Index b = 0; b < r.cols(); ++b) flat[offset++] = r(a, b);
    } else {
      log_warn("repair: rank-deficient features for subject " + std::to_string(i) +
               ", candidate left unrepaired");
      offset += static_cast<std::size_t>(v_) * static_cast<std::size_t>(v_);
    }
  }
}

std::vector<double> TrainProblem::warm_candidate() const {
  std::vector<Matrix> beta;
  for (std::size_t i = 0; i < f_.size(); ++i) {
    beta.push_back(mask_.beta ? least_squares_beta(f_[i], d_[i]) : frozen_.beta[i]);
  }
  std::vector<Matrix> x;
  for (std::size_t i = 0; i < f_.size(); ++i) x.push_back(mapping_.apply(d_[i] * beta[i]));
  Matrix target = x.front();
  for (std::size_t i = 1; i < x.size(); ++i) target += x[i];
  target /= static_cast<double>(x.size());

  std::vector<Matrix> rotation;
  for (std::size_t i = 0; i < f_.size(); ++i) {
    rotation.push_back(mask_.rotation ? procrustes_rotation(x[i], target)
                                      : frozen_.rotation[i]);
  }
  std::vector<Matrix> a;
  for (std::size_t i = 0; i < f_.size(); ++i) a.push_back(x[i] * rotation[i]);

  std::vector<double> flat;
  flat.reserve(dim_);
  if (mask_.beta) {
    for (const Matrix& b : beta) append_matrix(flat, b);
  }
  if (mask_.rotation) {
    for (const Matrix& r : rotation) append_matrix(flat, r);
  }
  if (mask_.weights) {
    const Vector w = coordinate_descent_weights(a, labeled_idx_, labeled_y_, alpha_, 3);
    for (Index i = 0; i < w.size(); ++i) flat.push_back(w(i));
  }
  return flat;
}

ObjectiveFn TrainProblem::objective_fn() const {
  return [this](const std::vector<double>& flat) { return evaluate(flat); };
}

SamplerFn TrainProblem::sampler_fn() const {
  return [this](Rng& rng) { return sample(rng); };
}

RepairFn TrainProblem::repair_fn() const {
  if (repair_mode_ != RepairMode::Hard || !mask_.rotation) return {};
  return [this](std::vector<double>& flat) { repair_candidate(flat); };
}

TestProblem::TestProblem(std::vector<Matrix> f_hat, std::vector<Matrix> d_hat,
                         MappingSpec mapping, std::vector<int> category_labels,
                         int categories, SharedSpace g, double lambda_orth,
                         RepairMode repair_mode, FreeMask mask, TestingParams frozen)
    : f_(std::move(f_hat)),
      d_(std::move(d_hat)),
      mapping_(std::move(mapping)),
      category_labels_(std::move(category_labels)),
      categories_(categories),
      g_(std::move(g)),
      lambda_orth_(lambda_orth),
      repair_mode_(repair_mode),
      mask_(mask),
      frozen_(std::move(frozen)) {
  if (f_.empty() || f_.size() != d_.size()) {
    throw std::invalid_argument("TestProblem: subject list size mismatch");
  }
  t_ = f_.front().rows();
  v_org_ = f_.front().cols();
  v_ = mapping_.output_dim(v_org_);
  if (g_.g.rows() != t_ || g_.g.cols() != v_) {
    throw std::invalid_argument("TestProblem: shared space shape does not match the mapping");
  }
  if (static_cast<Index>(category_labels_.size()) != t_) {
    throw std::invalid_argument("TestProblem: label length does not match time points");
  }
  rows_per_category_ = category_rows(category_labels_, categories_);

  const std::size_t s = f_.size();
  if (!mask_.beta && frozen_.beta.size() != s) {
    throw std::invalid_argument("TestProblem: frozen beta blocks missing");
  }
  if (!mask_.rotation && frozen_.rotation.size() != s) {
    throw std::invalid_argument("TestProblem: frozen rotation blocks missing");
  }
  dim_ = 0;
  if (mask_.beta) dim_ += s * static_cast<std::size_t>(categories_) * static_cast<std::size_t>(v_org_);
  if (mask_.rotation) dim_ += s * static_cast<std::size_t>(v_) * static_cast<std::size_t>(v_);
  if (dim_ == 0) throw std::invalid_argument("TestProblem: no free parameter block");
}

TestingParams TestProblem::assemble(const std::vector<double>& flat) const {
  if (flat.size() != dim_) {
    throw std::invalid_argument("TestProblem: flat length " + std::to_string(flat.size()) +
                                ", expected " + std::to_string(dim_));
  }
  TestingParams p;
  std::span<const double> rest(flat);
  if (mask_.beta) {
    for (std::size_t i = 0; i < f_.size(); ++i) {
      p.beta.push_back(take_matrix(rest, categories_, v_org_));
    }
  } else {
    p.beta = frozen_.beta;
  }
  if (mask_.rotation) {
    for (std::size_t i = 0; i < f_.size(); ++i) {
      p.rotation.push_back(take_matrix(rest, v_, v_));
    }
  } else {
    p.rotation = frozen_.rotation;
  }
  return p;
}

std::vector<Matrix> TestProblem::mapped(const TestingParams& p) const {
  return features_and_mapped(d_, mapping_, p.beta, p.rotation).a;
}

ObjectiveVector TestProblem::evaluate(const std::vector<double>& flat) const {
  const TestingParams p = assemble(flat);
  const double t1 = guard_finite(theta1(f_, d_, p.beta));
  const EvalPieces pieces = features_and_mapped(d_, mapping_, p.beta, p.rotation);
  const double t2 = guard_finite(theta2_shared(pieces.a, g_, lambda_orth_));
  const double t3 = guard_finite(theta3_guarded(pieces.x, pieces.a, rows_per_category_));
  return ObjectiveVector{t1, t2, t3};
}

std::vector<double> TestProblem::sample(Rng& rng) const {
  std::vector<double> flat;
  flat.reserve(dim_);
  if (mask_.beta) {
    const std::size_t n =
        f_.size() * static_cast<std::size_t>(categories_) * static_cast<std::size_t>(v_org_);
    for (std::size_t i = 0; i < n; ++i) flat.push_back(rng.normal(0.0, kInitSigma));
  }
  if (mask_.rotation) {
    for (std::size_t i = 0; i < f_.size(); ++i) {
      append_matrix(flat, random_orthogonal(v_, rng));
    }
  }
  return flat;
}

void TestProblem::repair_candidate(std::vector<double>& flat) const {
  if (repair_mode_ != RepairMode::Hard || !mask_.rotation) return;
  TestingParams p = assemble(flat);
  std::size_t offset = 0;
  if (mask_.beta) {
    offset = f_.size() * static_cast<std::size_t>(categories_) * static_cast<std::size_t>(v_org_);
  }
  for (std::size_t i = 0; i < f_.size(); ++i) {
    const Matrix x = mapping_.apply(d_[i] * p.beta[i]);
    Matrix r = p.rotation[i];
    if (repair_rotation(x, r)) {
      for (Index a = 0; a < r.rows(); ++a)
        for (Index b = 0; b < r.cols(); ++b) flat[offset++] = r(a, b);
    } else {
      log_warn("repair: rank-deficient features for test subject " + std::to_string(i) +
               ", candidate left unrepaired");
      offset += static_cast<std::size_t>(v_) * static_cast<std::size_t>(v_);
    }
  }
}

std::vector<double> TestProblem::warm_candidate() const {
  std::vector<Matrix> beta;
  for (std::size_t i = 0; i < f_.size(); ++i) {
    beta.push_back(mask_.beta ? least_squares_beta(f_[i], d_[i]) : frozen_.beta[i]);
  }
  std::vector<double> flat;
  flat.reserve(dim_);
  if (mask_.beta) {
    for (const Matrix& b : beta) append_matrix(flat, b);
  }
  if (mask_.rotation) {
    for (std::size_t i = 0; i < f_.size(); ++i) {
      const Matrix x = mapping_.apply(d_[i] * beta[i]);
      append_matrix(flat, procrustes_rotation(x, g_.g));
    }
  }
  return flat;
}

ObjectiveFn TestProblem::objective_fn() const {
  return [this](const std::vector<double>& flat) { return evaluate(flat); };
}

SamplerFn TestProblem::sampler_fn() const {
  return [this](Rng& rng) { return sample(rng); };
}

RepairFn TestProblem::repair_fn() const {
  if (repair_mode_ != RepairMode::Hard || !mask_.rotation) return {};
  return [this](std::vector<double>& flat) { repair_candidate(flat); };
}

}  // namespace mocm
