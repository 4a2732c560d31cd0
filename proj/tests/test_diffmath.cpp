#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

namespace dualgnn {
namespace {

using testing::random_matrix;

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Central-difference check of a function of a single parameter.
double check(const std::function<Tensor(Tape&, Tensor)>& f, Parameter& p) {
  Parameter* ps[] = {&p};
  return grad_check([&](Tape& t) { return f(t, t.parameter(p)); }, ps).max_rel_error;
}

// Downstream scalar that weights every entry differently.
Tensor probe(Tape& t, const Tensor& x, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  return sum(matmul(transpose(t.constant(random_matrix(x.rows(), x.cols(), rng))), x));
}

TEST(Matmul, IdentityAndHandExample) {
  Tape t;
  Matrix m = mat({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(t.constant(Matrix::Identity(2, 2)), t.constant(m)).value(), m);
  EXPECT_EQ(matmul(t.constant(m), t.constant(mat({{1}, {1}}))).value(), mat({{3}, {7}}));
}

TEST(Matmul, ShapeMismatchThrows) {
  Tape t;
  EXPECT_THROW(matmul(t.constant(Matrix::Zero(2, 3)), t.constant(Matrix::Zero(2, 3))), ShapeError);
}

TEST(Matmul, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  Parameter a(random_matrix(3, 4, rng)), b(random_matrix(4, 2, rng));
  Parameter* ps[] = {&a, &b};
  auto r = grad_check([&](Tape& t) { return probe(t, matmul(t.parameter(a), t.parameter(b))); }, ps);
  EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST(Spmm, EmptyMatrixAnnihilates) {
  Tape t;
  std::mt19937_64 rng(2);
  EXPECT_EQ(spmm(SparseMatrix(3), t.constant(random_matrix(3, 2, rng))).value(), Matrix::Zero(3, 2));
}

TEST(Spmm, SingleEdgeSwapsRows) {
  Tape t;
  auto a = adjacency_from_edges(2, {{0, 1}});
  EXPECT_EQ(spmm(a, t.constant(mat({{5}, {-2}}))).value(), mat({{-2}, {5}}));
}

TEST(Spmm, MatchesDenseProductOnRandomInstances) {
  std::mt19937_64 rng(3);
  for (std::size_t n = 1; n <= 16; ++n) {
    auto s = testing::random_weighted(n, 0.4, rng);
    Matrix x = random_matrix(static_cast<Eigen::Index>(n), 3, rng);
    Tape t;
    Matrix got = spmm(s, t.constant(x)).value();
    EXPECT_LE((got - s.dense() * x).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n;
  }
}

TEST(Spmm, GradientFlowsToDenseOperand) {
  std::mt19937_64 rng(4);
  auto s = testing::random_weighted(5, 0.5, rng);
  Parameter x(random_matrix(5, 3, rng));
  EXPECT_LE(check([&](Tape& t, Tensor p) { return probe(t, spmm(s, p)); }, x), 1e-4);
}

TEST(Elu, Values) {
  Tape t;
  Matrix v = elu(t.constant(mat({{0.0, 1.0, -1.0}}))).value();
  EXPECT_EQ(v(0, 0), 0.0);
  EXPECT_EQ(v(0, 1), 1.0);
  EXPECT_NEAR(v(0, 2), std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(v(0, 2), -0.63212, 1e-5);
}

TEST(Elu, DerivativeAtZeroIsOne) {
  Tape t;
  Tensor x = t.leaf(Matrix::Zero(1, 1));
  t.backward(sum(elu(x)));
  EXPECT_EQ(x.grad()(0, 0), 1.0);
}

TEST(Elu, ChainGradient) {
  std::mt19937_64 rng(5);
  Parameter w(random_matrix(4, 4, rng));
  Matrix x = random_matrix(6, 4, rng);
  EXPECT_LE(check([&](Tape& t, Tensor p) { return probe(t, elu(matmul(elu(matmul(t.constant(x), p)), p))); }, w),
            1e-4);
}

TEST(Softmax, Examples) {
  Tape t;
  EXPECT_EQ(softmax_rows(t.constant(mat({{0, 0}}))).value(), mat({{0.5, 0.5}}));
  for (double c : {-40.0, 0.0, 3.5, 50.0}) {
    Matrix v = softmax_rows(t.constant(Matrix::Constant(1, 3, c))).value();
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(v(0, k), 1.0 / 3.0, 1e-15);
  }
}

TEST(Softmax, GradientOfRowOneTwo) {
  Parameter x(mat({{1, 2}}));
  EXPECT_LE(check([&](Tape& t, Tensor p) { return probe(t, softmax_rows(p)); }, x), 1e-4);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
  std::mt19937_64 rng(6);
  Tape t;
  Matrix x = random_matrix(8, 5, rng, -20, 20);
  Matrix y = softmax_rows(t.constant(x)).value();
  Matrix shifted = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) shifted.row(i).array() += 7.0 * static_cast<double>(i);
  Matrix y2 = softmax_rows(t.constant(shifted)).value();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    EXPECT_NEAR(y.row(i).sum(), 1.0, 1e-9);
    EXPECT_LE((y.row(i) - y2.row(i)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TraceQuadratic, Examples) {
  Tape t;
  std::mt19937_64 rng(7);
  EXPECT_EQ(trace_quadratic(t.constant(random_matrix(4, 2, rng)), SparseMatrix(4)).item(), 0.0);
  auto a = adjacency_from_edges(4, {{0, 1}, {2, 3}});
  Matrix s = mat({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  EXPECT_EQ(trace_quadratic(t.constant(s), a).item(), 4.0);
}

TEST(TraceQuadratic, MatchesDenseOracleAndGradient) {
  std::mt19937_64 rng(8);
  auto m = testing::random_weighted(7, 0.5, rng);
  Parameter s(random_matrix(7, 3, rng));
  Tape t;
  const double got = trace_quadratic(t.constant(s.value), m).item();
  EXPECT_NEAR(got, (s.value.transpose() * m.dense() * s.value).trace(), 1e-12);
  EXPECT_LE(check([&](Tape&, Tensor p) { return trace_quadratic(p, m); }, s), 1e-4);
}

TEST(Frobenius, Examples) {
  Tape t;
  EXPECT_NEAR(frobenius_norm(t.constant(Matrix::Identity(2, 2))).item(), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(frobenius_norm(t.constant(mat({{3, 4}}))).item(), 5.0);
  std::mt19937_64 rng(9);
  Matrix x = random_matrix(4, 4, rng);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) ss += x(i, j) * x(i, j);
  EXPECT_NEAR(frobenius_norm(t.constant(x)).item(), std::sqrt(ss), 1e-14);
  Parameter p(x);
  EXPECT_LE(check([&](Tape&, Tensor q) { return frobenius_norm(q); }, p), 1e-4);
}

TEST(Frobenius, ZeroNormHasZeroGradient) {
  Tape t;
  Tensor x = t.leaf(Matrix::Zero(2, 2));
  t.backward(frobenius_norm(x));
  EXPECT_EQ(x.grad(), Matrix::Zero(2, 2));
}

TEST(ElementaryOps, GradientsOnRandomInputs) {
  std::mt19937_64 rng(10);
  Parameter a(random_matrix(4, 3, rng)), b(random_matrix(4, 3, rng)), bias(random_matrix(1, 3, rng));
  Parameter sc(Matrix::Constant(1, 1, 0.7));
  Parameter* ab[] = {&a, &b};
  auto run = [&](auto f, std::span<Parameter* const> ps) { return grad_check(f, ps).max_rel_error; };
  EXPECT_LE(run([&](Tape& t) { return probe(t, add(t.parameter(a), t.parameter(b))); }, ab), 1e-4);
  EXPECT_LE(run([&](Tape& t) { return probe(t, sub(t.parameter(a), t.parameter(b))); }, ab), 1e-4);
  Parameter* one[] = {&a};
  EXPECT_LE(run([&](Tape& t) { return probe(t, scale(t.parameter(a), -2.5)); }, one), 1e-4);
  EXPECT_LE(run([&](Tape& t) { return probe(t, transpose(t.parameter(a))); }, one), 1e-4);
  EXPECT_LE(run([&](Tape& t) { return probe(t, add_constant(t.parameter(a), b.value)); }, one), 1e-4);
  Parameter* ab2[] = {&a, &bias};
  EXPECT_LE(run([&](Tape& t) { return probe(t, add_row_bias(t.parameter(a), t.parameter(bias))); }, ab2), 1e-4);
  Parameter* as[] = {&a, &sc};
  EXPECT_LE(run([&](Tape& t) { return probe(t, divide(t.parameter(a), t.parameter(sc))); }, as), 1e-4);
}

TEST(Divide, ZeroDivisorThrows) {
  Tape t;
  EXPECT_THROW(divide(t.constant(Matrix::Ones(2, 2)), t.constant(Matrix::Zero(1, 1))), NumericError);
}

TEST(Backward, SumGivesOnes) {
  std::mt19937_64 rng(11);
  Tape t;
  Tensor w = t.leaf(random_matrix(3, 5, rng));
  t.backward(sum(w));
  EXPECT_EQ(w.grad(), Matrix::Ones(3, 5));
}

TEST(Backward, SquaredNormGivesTwoW) {
  std::mt19937_64 rng(12);
  Tape t;
  Matrix v = random_matrix(3, 3, rng);
  Tensor w = t.leaf(v);
  Tensor n = frobenius_norm(w);
  t.backward(matmul(n, n));
  EXPECT_LE((w.grad() - 2.0 * v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Backward, RepeatedCallsAccumulate) {
  Parameter p(Matrix::Constant(2, 2, 1.5));
  Tape t;
  Tensor loss = sum(t.parameter(p));
  t.backward(loss);
  t.backward(loss);
  EXPECT_EQ(p.grad, Matrix::Constant(2, 2, 2.0));
}

TEST(Backward, NonScalarLossThrows) {
  Tape t;
  EXPECT_THROW(t.backward(t.leaf(Matrix::Zero(2, 1))), ShapeError);
}

TEST(GradCheck, ExactForLinearMaps) {
  std::mt19937_64 rng(13);
  Parameter w(random_matrix(3, 3, rng));
  Matrix x = random_matrix(5, 3, rng);
  EXPECT_LE(check([&](Tape& t, Tensor p) { return probe(t, matmul(t.constant(x), p)); }, w), 1e-9);
}

TEST(GradCheck, MincutThroughAssignmentWeights) {
  std::mt19937_64 rng(14);
  Graph g = testing::toy_graph();
  auto norm = normalize_sym(g.adjacency);
  auto deg = degree_vector(norm);
  Parameter w(random_matrix(5, 4, rng)), b(random_matrix(1, 4, rng));
  Parameter* ps[] = {&w, &b};
  auto r = grad_check(
      [&](Tape& t) {
        Tensor s = cluster_assign(t.constant(g.features), t.parameter(w), t.parameter(b));
        return mincut_loss(s, norm, deg).total;
      },
      ps);
  EXPECT_LE(r.max_rel_error, 1e-3);
}

TEST(Numerics, NoNonFiniteValuesForBoundedInputs) {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 20; ++rep) {
    Tape t;
    Tensor x = t.leaf(random_matrix(6, 4, rng, -50, 50));
    Tensor w = t.leaf(random_matrix(4, 4, rng, -1, 1));
    Tensor s = softmax_rows(elu(matmul(x, w)));
    Tensor loss = add(frobenius_norm(s), sum(elu(x)));
    t.backward(loss);
    EXPECT_TRUE(s.value().allFinite());
    EXPECT_TRUE(x.grad().allFinite());
    EXPECT_TRUE(w.grad().allFinite());
  }
}

TEST(Numerics, NonFiniteForwardValueThrows) {
  Tape t;
  Matrix bad = Matrix::Zero(1, 1);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(t.constant(bad), NumericError);
}

TEST(SparseMatrix, RejectsAsymmetricDuplicateAndNegativeInput) {
  EXPECT_THROW(SparseMatrix::from_triplets(2, {{0, 1, 1.0}}), std::invalid_argument);
  EXPECT_THROW(SparseMatrix::from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}, {0, 1, 1.0}}), std::invalid_argument);
  EXPECT_THROW(SparseMatrix::from_triplets(2, {{0, 5, 1.0}}), ShapeError);
  EXPECT_THROW(normalize_sym(SparseMatrix::from_triplets(2, {{0, 1, -1.0}, {1, 0, -1.0}})), std::invalid_argument);
}

}  // namespace
}  // namespace dualgnn
