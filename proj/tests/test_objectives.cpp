#include <doctest.h>

#include <cmath>

#include "mocm/dataset.hpp"
#include "mocm/glm.hpp"
#include "mocm/objectives.hpp"
#include "mocm/rng.hpp"
#include "mocm/sampling.hpp"

using namespace mocm;

namespace {

std::vector<Matrix> random_mapped(Rng& rng, int subjects, Index t, Index v) {
  std::vector<Matrix> a;
  for (int i = 0; i < subjects; ++i) a.push_back(random_gaussian(t, v, rng));
  return a;
}

// Test-local direct evaluation of the alignment costs, independent of the
// library path.
double theta2_pairwise_oracle(const std::vector<Matrix>& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) sum += (a[i] - a[j]).squaredNorm();
  return sum / static_cast<double>(a.size());
}

double theta2_shared_oracle(const std::vector<Matrix>& a) {
  Matrix g = Matrix::Zero(a.front().rows(), a.front().cols());
  for (const Matrix& m : a) g += m;
  g /= static_cast<double>(a.size());
  double sum = 0.0;
  for (const Matrix& m : a) sum += (g - m).squaredNorm();
  return sum / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("theta1: exact fit, hand residual, zero regressors") {
  Rng rng(51);
  const Matrix d = random_gaussian(20, 2, rng);
  const Matrix beta_true = random_gaussian(2, 4, rng);
  const Matrix f = d * beta_true;
  CHECK(theta1({f}, {d}, {beta_true}) <= 1e-18);

  Matrix f2(2, 2), d2(2, 1), b2(1, 2);
  f2 << 1, 0, 0, 1;
  d2 << 1, 0;
  b2 << 1, 0;
  CHECK(theta1({f2}, {d2}, {b2}) == doctest::Approx(1.0).epsilon(1e-12));

  const Matrix zero_beta = Matrix::Zero(2, 4);
  CHECK(theta1({f}, {d}, {zero_beta}) == doctest::Approx(f.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("theta2 pairwise on tabulated inputs") {
  Matrix a1 = Matrix::Identity(2, 2);
  Matrix a2(2, 2);
  a2 << 0, 1, 1, 0;

  // Equal column-orthonormal responses have zero cost.
  CHECK(theta2_pairwise({a1, a1}, 1.0) == 0.0);

  // Hand-computed difference: ||a1 - a2||_F^2 = 4, times 1/S.
  CHECK(theta2_pairwise({a1, a2}, 0.0) == doctest::Approx(2.0).epsilon(1e-12));

  // Orthogonality penalty: A'A = 2I gives ||I||_F^2 = 2 per subject.
  const Matrix scaled = std::sqrt(2.0) * Matrix::Identity(2, 2);
  CHECK((scaled.transpose() * scaled - 2.0 * Matrix::Identity(2, 2)).isZero(1e-14));
  CHECK(theta2_pairwise({scaled, scaled}, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("shared space is the element-wise mean") {
  Matrix a1 = Matrix::Identity(2, 2);
  Matrix a2(2, 2);
  a2 << 0, 1, 1, 0;
  CHECK(shared_space({a1}).g == a1);
  const Matrix g = shared_space({a1, a2}).g;
  CHECK(g(0, 0) == 0.5);
  CHECK(g(0, 1) == 0.5);
  CHECK(shared_space({a1, Matrix(-a1)}).g.isZero(0.0));
  CHECK_THROWS_AS(shared_space({}), std::invalid_argument);
}

TEST_CASE("theta2 shared on tabulated inputs") {
  Matrix a1 = Matrix::Identity(2, 2);
  Matrix a2(2, 2);
  a2 << 0, 1, 1, 0;
  const SharedSpace g = shared_space({a1, a2});
  CHECK(theta2_shared({a1, a2}, g, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(theta2_shared({a1, a1}, shared_space({a1, a1}), 0.0) == 0.0);
}

TEST_CASE("pairwise and shared alignment costs agree up to the subject count") {
  Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    const int s = 2 + static_cast<int>(rng.below(5));
    const Index t = 8 + static_cast<Index>(rng.below(25));
    const Index v = 2 + static_cast<Index>(rng.below(7));
    const auto a = random_mapped(rng, s, t, v);
    const double pairwise = theta2_pairwise(a, 0.0);
    const double shared = theta2_shared(a, shared_space(a), 0.0);
    CHECK(pairwise ==
          doctest::Approx(static_cast<double>(s) * shared).epsilon(1e-9));
    // Both sides also agree with the direct oracles.
    CHECK(pairwise == doctest::Approx(theta2_pairwise_oracle(a)).epsilon(1e-12));
    CHECK(shared == doctest::Approx(theta2_shared_oracle(a)).epsilon(1e-12));
  }
}

TEST_CASE("ise: tabulated values, bounds and degeneracy") {
  Vector x(2), g(2);
  x << 1, 0;
  g << 1, 0;
  CHECK(ise(x, g) == doctest::Approx(1.0).epsilon(1e-12));
  g << 0, 1;
  CHECK(ise(x, g) == doctest::Approx(0.0).epsilon(1e-12));
  g << 1, 1;
  CHECK(ise(x, g) == doctest::Approx(0.7071067811865475).epsilon(1e-12));
  CHECK_THROWS_AS(ise(Vector::Zero(2), g), std::invalid_argument);
}

TEST_CASE("ise is scale-invariant and bounded") {
  Rng rng(53);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index v = 2 + static_cast<Index>(rng.below(6));
    Vector x(v), g(v);
    for (Index i = 0; i < v; ++i) {
      x(i) = rng.normal();
      g(i) = rng.normal();
    }
    if (x.norm() == 0.0 || g.norm() == 0.0) continue;
    const double base = ise(x, g);
    CHECK(std::abs(base) <= 1.0);
    const double c = 0.01 + 5.0 * rng.uniform();
    const double d = 0.01 + 5.0 * rng.uniform();
    CHECK(ise(c * x, d * g) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("theta3 on tabulated inputs") {
  // Identity mapping: every category cosine is 1.
  Rng rng(54);
  const Matrix x = random_gaussian(6, 3, rng);
  const std::vector<std::vector<int>> rows{{0, 1, 2}, {3, 4, 5}};
  CHECK(theta3({x}, {x}, rows) == 0.0);

  // A single category has no pairs.
  CHECK(theta3({x}, {x + random_gaussian(6, 3, rng)}, {{0, 1, 2, 3, 4, 5}}) == 0.0);

  // Hand-computed two-category case: cosines 1 and 1/sqrt(2).
  Matrix pre(2, 2), post(2, 2);
  pre << 1, 0, 1, 0;
  post << 1, 0, 1, 1;
  CHECK(theta3({pre}, {post}, {{0}, {1}}) ==
        doctest::Approx(0.085786437626905).epsilon(1e-10));

  CHECK_THROWS_AS(theta3({pre}, {post}, {{0, 1}, {}}), std::invalid_argument);
}

TEST_CASE("theta3 vanishes when rotations are positive multiples of the identity") {
  Rng rng(55);
  const Matrix x = random_gaussian(8, 4, rng);
  const Matrix a = 2.5 * x;  // positive scaling keeps every cosine at 1
  const std::vector<std::vector<int>> rows{{0, 1}, {2, 3}, {4, 5, 6, 7}};
  CHECK(theta3({x, x}, {a, a}, rows) <= 1e-18);
}

TEST_CASE("theta4 on tabulated inputs") {
  // Margins [2, 0.5] with W = [0.5, -0.25]: hinge 0.25 plus L1 0.75.
  Matrix a(2, 2);
  a << 4, 0, 1, 0;
  Vector w(2);
  w << 0.5, -0.25;
  const std::vector<int> y{1, 1};
  CHECK(theta4({a}, w, y, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  // All margins at or above one leave only the L1 term.
  Matrix big = 10.0 * Matrix::Ones(3, 2);
  Vector w2(2);
  w2 << 0.4, 0.3;
  CHECK(theta4({big}, w2, {1, 1, 1}, 2.0) == doctest::Approx(0.7).epsilon(1e-12));

  // Zero weights cost alpha * T for any data.
  Rng rng(56);
  const Matrix r = random_gaussian(6, 3, rng);
  CHECK(theta4({r, r}, Vector::Zero(3), {1, -1, 1, -1, 1, -1}, 1.75) ==
        doctest::Approx(1.75 * 6.0).epsilon(1e-12));

  CHECK_THROWS_AS(theta4({a}, w, {1, 2}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(theta4({a}, w, y, 0.0), std::invalid_argument);
}

TEST_CASE("encode/decode: round-trip, layout length, zero vector") {
  Rng rng(57);
  ParamShape shape;
  shape.subjects = 3;
  shape.categories = 2;
  shape.v_org = 4;
  shape.v = 5;
  shape.alpha = 1.25;

  for (int trial = 0; trial < 100; ++trial) {
    TrainingParams p;
    p.alpha = shape.alpha;
    for (int s = 0; s < shape.subjects; ++s) {
      p.beta.push_back(random_gaussian(2, 4, rng));
      p.rotation.push_back(random_gaussian(5, 5, rng));
    }
    p.weights = random_gaussian(5, 1, rng).col(0);
    const auto flat = encode(p);
    CHECK(flat.size() == shape.flat_size());
    CHECK(flat.size() == 3u * 2u * 4u + 3u * 25u + 5u);
    const TrainingParams q = decode_training(flat, shape);
    for (int s = 0; s < shape.subjects; ++s) {
      CHECK((q.beta[s].array() == p.beta[s].array()).all());
      CHECK((q.rotation[s].array() == p.rotation[s].array()).all());
    }
    CHECK((q.weights.array() == p.weights.array()).all());
    CHECK(q.alpha == shape.alpha);
  }

  const std::vector<double> zeros(shape.flat_size(), 0.0);
  const TrainingParams z = decode_training(zeros, shape);
  CHECK(z.beta[0].isZero(0.0));
  CHECK(z.rotation[2].isZero(0.0));
  CHECK(z.weights.isZero(0.0));

  ParamShape test_shape = shape;
  test_shape.has_weights = false;
  TestingParams tp;
  for (int s = 0; s < shape.subjects; ++s) {
    tp.beta.push_back(random_gaussian(2, 4, rng));
    tp.rotation.push_back(random_gaussian(5, 5, rng));
  }
  const auto tflat = encode(tp);
  CHECK(tflat.size() == test_shape.flat_size());
  const TestingParams tq = decode_testing(tflat, test_shape);
  CHECK((tq.beta[1].array() == tp.beta[1].array()).all());

  CHECK_THROWS_AS(decode_training(std::vector<double>(3, 0.0), shape), std::invalid_argument);
}

namespace {

// Straight-line composition of the published cost definitions, used as the
// integrated-objective oracle.  Recomputes everything from scratch.
ObjectiveVector k_train_oracle(const std::vector<Matrix>& f, const Matrix& tau, double tr,
                               const TrainingParams& p, const MappingSpec& mapping,
                               const std::vector<int>& y, double lambda) {
  const Matrix d = design_matrix(tau, tr);
  const int s = static_cast<int>(f.size());
  double t1 = 0.0;
  std::vector<Matrix> xs, as;
  for (int i = 0; i < s; ++i) {
    t1 += (f[i] - d * p.beta[i]).squaredNorm();
    const Matrix x = mapping.apply(d * p.beta[i]);
    xs.push_back(x);
    as.push_back(x * p.rotation[i]);
  }
  t1 /= s;

  double t2 = 0.0;
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j) t2 += (as[i] - as[j]).squaredNorm();
  t2 /= s;
  for (int i = 0; i < s; ++i) {
    const Matrix gram = as[i].transpose() * as[i];
    t2 += lambda * (gram - Matrix::Identity(gram.rows(), gram.cols())).squaredNorm();
  }

  const auto labels = derive_labels(tau);
  const int c = static_cast<int>(tau.cols());
  double t3 = 0.0;
  for (int i = 0; i < s; ++i) {
    std::vector<double> ang(c);
    for (int m = 0; m < c; ++m) {
      Vector xm = Vector::Zero(xs[i].cols()), gm = Vector::Zero(as[i].cols());
      int n = 0;
      for (std::size_t t = 0; t < labels.size(); ++t) {
        if (labels[t] == m + 1) {
          xm += xs[i].row(static_cast<Index>(t)).transpose();
          gm += as[i].row(static_cast<Index>(t)).transpose();
          ++n;
        }
      }
      xm /= n;
      gm /= n;
      ang[m] = xm.dot(gm) / (xm.norm() * gm.norm());
    }
    for (int m = 0; m < c; ++m)
      for (int k = m + 1; k < c; ++k) t3 += (ang[m] - ang[k]) * (ang[m] - ang[k]);
  }
  t3 /= s;

  double hinge = 0.0;
  for (int i = 0; i < s; ++i) {
    const Vector scores = as[i] * p.weights;
    for (std::size_t t = 0; t < y.size(); ++t) {
      if (y[t] == 0) continue;
      const double margin = 1.0 - y[t] * scores(static_cast<Index>(t));
      if (margin > 0.0) hinge += margin * margin;
    }
  }
  const double t4 = p.alpha / s * hinge + p.weights.lpNorm<1>();
  return ObjectiveVector{t1, t2, t3, t4};
}

std::vector<int> binary_from_categories(const std::vector<int>& labels) {
  std::vector<int> y(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) y[i] = 1;
    else if (labels[i] != 0) y[i] = -1;
  }
  return y;
}

}  // namespace

TEST_CASE("k_train at the generator optimum: zero tracking and rotation errors") {
  // Identity rotations keep every pre/post cosine equal, so both the
  // tracking term and the rotation-consistency term vanish exactly.
  const auto synth = generate_synthetic(3, 24, 5, 2, 0.0, RotationMode::Identity, 61);
  std::vector<Matrix> f, tau;
  for (const auto& scan : synth.dataset.scans) {
    f.push_back(scan.f);
    tau.push_back(scan.tau);
  }
  TrainingParams p;
  for (int s = 0; s < 3; ++s) {
    p.beta.push_back(synth.truth.beta[s]);
    p.rotation.push_back(Matrix::Identity(5, 5));
  }
  p.weights = Vector::Zero(5);
  MappingSpec linear;
  const auto y = binary_from_categories(synth.truth.labels);
  const ObjectiveVector costs =
      k_train(f, tau, synth.dataset.tr_seconds, p, linear, y, 1.0);
  CHECK(costs[0] == 0.0);
  CHECK(costs[2] == 0.0);
  const ObjectiveVector oracle = k_train_oracle(f, tau.front(), synth.dataset.tr_seconds,
                                                p, linear, y, 1.0);
  CHECK(costs[1] == doctest::Approx(oracle[1]).epsilon(1e-12));
  CHECK(costs[3] == doctest::Approx(oracle[3]).epsilon(1e-12));
}

TEST_CASE("k_train at zero params decomposes into the trivial pieces") {
  const auto synth = generate_synthetic(2, 24, 4, 2, 0.1, RotationMode::Identity, 62);
  std::vector<Matrix> f, tau;
  for (const auto& scan : synth.dataset.scans) {
    f.push_back(scan.f);
    tau.push_back(scan.tau);
  }
  TrainingParams p;
  p.alpha = 1.5;
  for (int s = 0; s < 2; ++s) {
    p.beta.push_back(Matrix::Zero(2, 4));
    p.rotation.push_back(Matrix::Zero(4, 4));
  }
  p.weights = Vector::Zero(4);
  MappingSpec linear;
  const auto y = binary_from_categories(synth.truth.labels);
  const double lambda = 1.0;
  const ObjectiveVector costs = k_train(f, tau, synth.dataset.tr_seconds, p, linear, y, lambda);

  double f_energy = 0.0;
  for (const Matrix& m : f) f_energy += m.squaredNorm();
  CHECK(costs[0] == doctest::Approx(f_energy / 2.0).epsilon(1e-12));
  // A = 0: only the orthogonality penalty remains, lambda * S * ||I||^2.
  CHECK(costs[1] == doctest::Approx(lambda * 2.0 * 4.0).epsilon(1e-12));
  // Zero features make the category patterns degenerate.
  CHECK(costs[2] == kWorstCost);
  // Zero weights: alpha times the number of labeled time points.
  std::size_t labeled = 0;
  for (int v : y) labeled += v != 0;
  CHECK(costs[3] == doctest::Approx(1.5 * static_cast<double>(labeled)).epsilon(1e-12));
}

TEST_CASE("k_train is invariant under subject reordering") {
  Rng rng(63);
  const auto synth = generate_synthetic(3, 24, 4, 2, 0.2, RotationMode::Orthogonal, 64);
  std::vector<Matrix> f, tau;
  for (const auto& scan : synth.dataset.scans) {
    f.push_back(scan.f);
    tau.push_back(scan.tau);
  }
  TrainingParams p;
  for (int s = 0; s < 3; ++s) {
    p.beta.push_back(random_gaussian(2, 4, rng));
    p.rotation.push_back(random_gaussian(4, 4, rng));
  }
  p.weights = random_gaussian(4, 1, rng).col(0);
  MappingSpec linear;
  const auto y = binary_from_categories(synth.truth.labels);
  const ObjectiveVector base = k_train(f, tau, 2.0, p, linear, y, 1.0);

  const std::vector<std::size_t> perm{2, 0, 1};
  std::vector<Matrix> f2, tau2;
  TrainingParams p2;
  p2.alpha = p.alpha;
  p2.weights = p.weights;
  for (std::size_t i : perm) {
    f2.push_back(f[i]);
    tau2.push_back(tau[i]);
    p2.beta.push_back(p.beta[i]);
    p2.rotation.push_back(p.rotation[i]);
  }
  const ObjectiveVector permuted = k_train(f2, tau2, 2.0, p2, linear, y, 1.0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(permuted[i] == doctest::Approx(base[i]).epsilon(1e-12));
  }
}

TEST_CASE("k_train matches the straight-line oracle on random instances") {
  Rng rng(65);
  for (int trial = 0; trial < 10; ++trial) {
    const auto synth = generate_synthetic(3, 24, 4, 2, 0.3, RotationMode::Orthogonal,
                                          100 + static_cast<std::uint64_t>(trial));
    std::vector<Matrix> f, tau;
    for (const auto& scan : synth.dataset.scans) {
      f.push_back(scan.f);
      tau.push_back(scan.tau);
    }
    TrainingParams p;
    p.alpha = 2.0;
    for (int s = 0; s < 3; ++s) {
      p.beta.push_back(random_gaussian(2, 4, rng));
      p.rotation.push_back(random_gaussian(4, 4, rng));
    }
    p.weights = random_gaussian(4, 1, rng).col(0);
    MappingSpec linear;
    const auto y = binary_from_categories(synth.truth.labels);
    const ObjectiveVector lhs = k_train(f, tau, 2.0, p, linear, y, 0.7);
    const ObjectiveVector rhs = k_train_oracle(f, tau.front(), 2.0, p, linear, y, 0.7);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-11));
    }
  }
}

TEST_CASE("k_test: aligned subject, zero regressors, random oracle") {
  Rng rng(66);
  const auto synth = generate_synthetic(2, 24, 4, 2, 0.2, RotationMode::Identity, 67);
  const SubjectScan& scan = synth.dataset.scans.front();
  MappingSpec linear;

  // A test subject whose mapped response equals the shared space.
  TestingParams p;
  p.beta.push_back(synth.truth.beta[0]);
  p.rotation.push_back(Matrix::Identity(4, 4));
  const Matrix d = design_matrix(scan.tau, synth.dataset.tr_seconds);
  const Matrix a = d * synth.truth.beta[0];
  const SharedSpace g{a};
  const ObjectiveVector costs =
      k_test({scan.f}, {scan.tau}, synth.dataset.tr_seconds, g, p, linear, 0.0);
  CHECK(costs[1] <= 1e-18);

  // Zero regressors: the tracking term equals the data energy.
  TestingParams zero;
  zero.beta.push_back(Matrix::Zero(2, 4));
  zero.rotation.push_back(Matrix::Identity(4, 4));
  const ObjectiveVector zcosts =
      k_test({scan.f}, {scan.tau}, synth.dataset.tr_seconds, g, zero, linear, 0.0);
  CHECK(zcosts[0] == doctest::Approx(scan.f.squaredNorm()).epsilon(1e-12));

  // Random instance against a direct reimplementation.
  TestingParams r;
  r.beta.push_back(random_gaussian(2, 4, rng));
  r.rotation.push_back(random_gaussian(4, 4, rng));
  const ObjectiveVector lhs =
      k_test({scan.f}, {scan.tau}, synth.dataset.tr_seconds, g, r, linear, 0.9);
  const Matrix x = d * r.beta[0];
  const Matrix ar = x * r.rotation[0];
  const double t1 = (scan.f - d * r.beta[0]).squaredNorm();
  double t2 = (g.g - ar).squaredNorm();
  const Matrix gram = ar.transpose() * ar;
  t2 += 0.9 * (gram - Matrix::Identity(4, 4)).squaredNorm();
  CHECK(lhs[0] == doctest::Approx(t1).epsilon(1e-12));
  CHECK(lhs[1] == doctest::Approx(t2).epsilon(1e-12));
}

TEST_CASE("hard repair: fixed point, scaling removal, random feasibility") {
  Rng rng(68);

  // Random T = 10, V = 4 case: the repaired product is orthonormal.
  const Matrix x = random_gaussian(10, 4, rng);
  Matrix r = random_gaussian(4, 4, rng);
  REQUIRE(repair_rotation(x, r));
  const Matrix a = x * r;
  CHECK((a.transpose() * a - Matrix::Identity(4, 4)).norm() <= 1e-9);

  // Repairing again is a no-op (projection fixed point).
  Matrix r2 = r;
  REQUIRE(repair_rotation(x, r2));
  CHECK((r2 - r).cwiseAbs().maxCoeff() <= 1e-12);

  // A = 2 Q collapses back to Q.
  Matrix q = random_orthogonal(4, rng);
  Matrix r3 = 2.0 * q;
  const Matrix x3 = Matrix::Identity(4, 4);
  REQUIRE(repair_rotation(x3, r3));
  CHECK((x3 * r3 - q).cwiseAbs().maxCoeff() <= 1e-12);

  // Rank-deficient features refuse the hard projection.
  Matrix x_def = Matrix::Zero(10, 4);
  x_def.col(0).setOnes();
  Matrix r4 = random_gaussian(4, 4, rng);
  const Matrix before = r4;
  CHECK_FALSE(repair_rotation(x_def, r4));
  CHECK((r4 - before).isZero(0.0));

  // Params-level wrapper in soft mode returns the input unchanged.
  TrainingParams p;
  p.beta.push_back(Matrix::Zero(2, 4));
  p.rotation.push_back(before);
  p.weights = Vector::Zero(4);
  const TrainingParams soft = repair(p, {x}, RepairMode::Soft);
  CHECK((soft.rotation[0].array() == before.array()).all());
}

TEST_CASE("predict: sign convention and tabulated scores") {
  const auto synth = generate_synthetic(2, 12, 3, 2, 0.1, RotationMode::Identity, 69);
  const SubjectScan& scan = synth.dataset.scans.front();

  CognitiveModel model;
  model.mapping.kind = MappingKind::Linear;
  model.shared_space = Matrix::Zero(12, 3);
  model.weights = Vector::Zero(3);

  TestingParams p;
  p.beta.push_back(synth.truth.beta[0]);
  p.rotation.push_back(Matrix::Identity(3, 3));

  // Zero weights: all scores zero, all labels +1.
  const Prediction zero = predict({scan.f}, {scan.tau}, synth.dataset.tr_seconds, model, p);
  CHECK(zero.scores[0].isZero(0.0));
  for (int label : zero.labels[0]) CHECK(label == 1);

  // Engineer scores [0, 2.5, -0.1]: staggered unit impulses make the
  // design rows [0,0], [h1,0], [h2,h1], and the regressors solve for the
  // wanted values.  Labels come out [+1, +1, -1].
  const auto kernel = hrf_kernel(1.0);
  Matrix tau2 = Matrix::Zero(3, 2);
  tau2(0, 0) = 1.0;
  tau2(1, 1) = 1.0;
  Matrix beta2(2, 1);
  beta2 << 2.5 / kernel[1], (-0.1 - kernel[2] * 2.5 / kernel[1]) / kernel[1];
  CognitiveModel m2;
  m2.mapping.kind = MappingKind::Linear;
  m2.shared_space = Matrix::Zero(3, 1);
  m2.weights = Vector::Ones(1);
  TestingParams p2;
  p2.beta.push_back(beta2);
  p2.rotation.push_back(Matrix::Identity(1, 1));
  const Prediction hand = predict({Matrix::Zero(3, 1)}, {tau2}, 1.0, m2, p2);
  CHECK(hand.scores[0](1) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(hand.scores[0](2) == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(hand.labels[0] == std::vector<int>{1, 1, -1});
}

TEST_CASE("predict labels are invariant under positive weight rescaling") {
  Rng rng(70);
  const auto synth = generate_synthetic(2, 24, 4, 2, 0.2, RotationMode::Identity, 71);
  const SubjectScan& scan = synth.dataset.scans.front();
  CognitiveModel model;
  model.mapping.kind = MappingKind::Linear;
  model.shared_space = Matrix::Zero(24, 4);
  model.weights = random_gaussian(4, 1, rng).col(0);
  TestingParams p;
  p.beta.push_back(random_gaussian(2, 4, rng));
  p.rotation.push_back(random_gaussian(4, 4, rng));

  const Prediction base = predict({scan.f}, {scan.tau}, 2.0, model, p);
  CognitiveModel scaled = model;
  scaled.weights *= 37.5;
  const Prediction rescaled = predict({scan.f}, {scan.tau}, 2.0, scaled, p);
  CHECK(base.labels[0] == rescaled.labels[0]);
}

TEST_CASE("predict reproduces generator labels on noiseless aligned data") {
  const auto synth = generate_synthetic(3, 48, 6, 2, 0.0, RotationMode::Orthogonal, 72);
  const Dataset& ds = synth.dataset;
  const Matrix d = design_matrix(ds.scans[0].tau, ds.tr_seconds);

  // Ground-truth alignment: A_i = F_i Q_i' = D * template for everyone.
  // A least-squares read-out on the common response then reproduces the
  // labels on every subject, labeled time points only.
  const Matrix common = d * synth.truth.template_response;
  std::vector<int> y;
  std::vector<Index> labeled;
  for (std::size_t t = 0; t < synth.truth.labels.size(); ++t) {
    if (synth.truth.labels[t] != 0) {
      labeled.push_back(static_cast<Index>(t));
      y.push_back(synth.truth.labels[t] == 1 ? 1 : -1);
    }
  }
  Matrix a_labeled(static_cast<Index>(labeled.size()), common.cols());
  Vector targets(static_cast<Index>(labeled.size()));
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    a_labeled.row(static_cast<Index>(i)) = common.row(labeled[i]);
    targets(static_cast<Index>(i)) = y[i];
  }
  const Vector w = least_squares_beta(targets, a_labeled).col(0);

  CognitiveModel model;
  model.mapping.kind = MappingKind::Linear;
  model.shared_space = common;
  model.weights = w;

  for (std::size_t s = 0; s < ds.scans.size(); ++s) {
    TestingParams p;
    p.beta.push_back(synth.truth.beta[s]);
    p.rotation.push_back(synth.truth.rotation[s].transpose());
    const Prediction pred = predict({ds.scans[s].f}, {ds.scans[s].tau}, ds.tr_seconds,
                                    model, p);
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      CHECK(pred.labels[0][static_cast<std::size_t>(labeled[i])] == y[i]);
    }
  }
}

TEST_CASE("train problem evaluation agrees with the packaged objective") {
  Rng rng(73);
  const auto synth = generate_synthetic(3, 24, 4, 2, 0.2, RotationMode::Orthogonal, 74);
  std::vector<Matrix> f, d_list;
  const Matrix d = design_matrix(synth.dataset.scans[0].tau, synth.dataset.tr_seconds);
  std::vector<Matrix> tau;
  for (const auto& scan : synth.dataset.scans) {
    f.push_back(scan.f);
    d_list.push_back(d);
    tau.push_back(scan.tau);
  }
  const auto cat = derive_labels(synth.dataset.scans[0].tau);
  const auto y = binary_from_categories(cat);
  MappingSpec linear;
  TrainProblem problem(f, d_list, linear, cat, y, 2, 1.5, 0.8, RepairMode::Soft);

  Rng sample_rng(75);
  const auto flat = problem.sample(sample_rng);
  CHECK(flat.size() == problem.dim());
  const ObjectiveVector via_problem = problem.evaluate(flat);
  const TrainingParams p = problem.assemble(flat);
  const ObjectiveVector via_op = k_train(f, tau, synth.dataset.tr_seconds, p, linear, y, 0.8);
  for (std::size_t i = 0; i < 4; ++i) CHECK(via_problem[i] == via_op[i]);
}

TEST_CASE("train problem: frozen blocks stay frozen and the warm start is strong") {
  const auto synth = generate_synthetic(3, 48, 6, 2, 0.1, RotationMode::Orthogonal, 76);
  std::vector<Matrix> f, d_list;
  const Matrix d = design_matrix(synth.dataset.scans[0].tau, synth.dataset.tr_seconds);
  for (const auto& scan : synth.dataset.scans) {
    f.push_back(scan.f);
    d_list.push_back(d);
  }
  const auto cat = derive_labels(synth.dataset.scans[0].tau);
  const auto y = binary_from_categories(cat);
  MappingSpec linear;

  FreeMask weights_only;
  weights_only.beta = false;
  weights_only.rotation = false;
  TrainingParams frozen;
  for (int s = 0; s < 3; ++s) {
    frozen.beta.push_back(least_squares_beta(f[s], d));
    frozen.rotation.push_back(synth.truth.rotation[s].transpose());
  }
  TrainProblem problem(f, d_list, linear, cat, y, 2, 1.0, 1.0, RepairMode::Soft,
                       weights_only, frozen);
  CHECK(problem.dim() == 6);

  const auto warm = problem.warm_candidate();
  const ObjectiveVector at_warm = problem.evaluate(warm);
  const ObjectiveVector at_zero = problem.evaluate(std::vector<double>(6, 0.0));
  // Coordinate descent on the classification term beats the zero vector.
  CHECK(at_warm[3] < at_zero[3]);
  // Frozen blocks reassemble bit-identically.
  const TrainingParams p = problem.assemble(warm);
  for (int s = 0; s < 3; ++s) {
    CHECK((p.beta[s].array() == frozen.beta[s].array()).all());
    CHECK((p.rotation[s].array() == frozen.rotation[s].array()).all());
  }
}
