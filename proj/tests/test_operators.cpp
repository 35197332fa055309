#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sbmg/operators.hpp"

using namespace sbmg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

LevelOperator laplacian(Algebra alg, GridShape s, int q = 1) {
  return assemble_structured(alg, s, laplacian_symbol(s.d, q));
}

VectorXd apply(const LevelOperator& op, const VectorXd& x) {
  VectorXd y(x.size());
  matvec(op, x.data(), y.data());
  return y;
}

}  // namespace

TEST(Algebra, NamesRoundTrip) {
  for (Algebra a : {Algebra::Tau, Algebra::Circulant, Algebra::Dct3}) EXPECT_EQ(parse_algebra(to_string(a)), a);
  EXPECT_THROW(parse_algebra("hankel"), std::invalid_argument);
}

TEST(Algebra, CoarseSizeParity) {
  EXPECT_EQ(coarse_size(Algebra::Tau, 31), 15);
  EXPECT_EQ(coarse_size(Algebra::Tau, 3), 1);
  EXPECT_FALSE(coarse_size(Algebra::Tau, 32));
  EXPECT_FALSE(coarse_size(Algebra::Tau, 1));
  EXPECT_EQ(coarse_size(Algebra::Circulant, 32), 16);
  EXPECT_EQ(coarse_size(Algebra::Dct3, 2), 1);
  EXPECT_FALSE(coarse_size(Algebra::Dct3, 31));
}

TEST(GridShape, Sizes) {
  EXPECT_EQ(GridShape::line(7).size(), 7u);
  EXPECT_EQ(GridShape::square(5).size(), 25u);
  EXPECT_EQ(GridShape::rect(3, 4).size(), 12u);
  EXPECT_EQ(GridShape::rect(3, 4).fast(), 4);
}

TEST(AssembleStructured, TauTridiagonal) {
  const MatrixXd m = materialize_dense(laplacian(Algebra::Tau, GridShape::line(5)));
  MatrixXd expect = MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) {
    expect(i, i) = 2.0;
    if (i + 1 < 5) expect(i, i + 1) = expect(i + 1, i) = -1.0;
  }
  EXPECT_EQ(m, expect);
  const MatrixXd m3 = materialize_dense(laplacian(Algebra::Tau, GridShape::line(3)));
  EXPECT_EQ(m3, expect.topLeftCorner(3, 3));
}

TEST(AssembleStructured, CirculantWraps) {
  const MatrixXd m = materialize_dense(laplacian(Algebra::Circulant, GridShape::line(4)));
  EXPECT_EQ(m.row(0), (Eigen::RowVector4d(2, -1, 0, -1)));
}

TEST(AssembleStructured, Dct3ReflectiveRow) {
  const MatrixXd m = materialize_dense(laplacian(Algebra::Dct3, GridShape::line(4)));
  EXPECT_NEAR((m.row(0) - Eigen::RowVector4d(1, -1, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((m.row(3) - Eigen::RowVector4d(0, 0, -1, 1)).norm(), 0.0, 1e-15);
}

TEST(AssembleStructured, MatchesTransformOracle) {
  const std::vector<CosinePoly> stencils = {
      {2.0, -1.0}, {6.0, -4.0, 1.0}, {20.0, -15.0, 6.0, -1.0}, {3.0, 0.7, -0.4, 0.25}, {2.0, 1.0}, {6.0, 4.0, 1.0}};
  for (Algebra alg : {Algebra::Tau, Algebra::Circulant, Algebra::Dct3})
    for (const auto& f : stencils)
      for (int n = 7; n <= 64; n += (n < 16 ? 1 : 19)) {
        const MatrixXd got = materialize_dense(assemble_structured(alg, GridShape::line(n), make_symbol(f)));
        const MatrixXd want = oracle::algebra_matrix(alg, n, f);
        EXPECT_LT(oracle::max_abs(got - want), 1e-12) << to_string(alg) << " n=" << n << " deg=" << f.degree();
        EXPECT_LT(oracle::max_abs(closure_matrix(alg, n, f).dense() - want), 1e-12);
      }
}

TEST(AssembleStructured, TwoLevelIsKroneckerSum) {
  for (Algebra alg : {Algebra::Tau, Algebra::Circulant, Algebra::Dct3}) {
    const int n0 = 6, n1 = 5;
    const CosinePoly f{2.0, -1.0}, g{6.0, -4.0, 1.0};
    const auto op = assemble_structured(alg, GridShape::rect(n0, n1), make_symbol(SymbolMode::Sum, f, g));
    const MatrixXd want = oracle::kron(oracle::algebra_matrix(alg, n0, f), MatrixXd::Identity(n1, n1)) +
                          oracle::kron(MatrixXd::Identity(n0, n0), oracle::algebra_matrix(alg, n1, g));
    EXPECT_LT(oracle::max_abs(materialize_dense(op) - want), 1e-12) << to_string(alg);
  }
}

TEST(AssembleStructured, ProductModeIsKroneckerProduct) {
  const CosinePoly p{2.0, 1.0};
  const auto op = assemble_structured(Algebra::Tau, GridShape::square(5), make_symbol(SymbolMode::Product, p, p));
  const MatrixXd a = oracle::tau_matrix(5, p);
  EXPECT_LT(oracle::max_abs(materialize_dense(op) - oracle::kron(a, a)), 1e-12);
}

TEST(AssembleStructured, RejectsWideStencil) {
  EXPECT_THROW(laplacian(Algebra::Tau, GridShape::line(3), 3), std::invalid_argument);
  EXPECT_THROW(assemble_structured(Algebra::Tau, GridShape::line(5), laplacian_symbol(2, 1)), std::invalid_argument);
}

TEST(Matvec, TridiagonalTimesOnes) {
  const auto op = laplacian(Algebra::Tau, GridShape::line(5));
  EXPECT_EQ(matvec(op, Vec(5, 1.0)), (Vec{1, 0, 0, 0, 1}));
  EXPECT_THROW(matvec(op, Vec(4, 1.0)), std::invalid_argument);
}

TEST(Matvec, PeriodicAndReflectiveKernels) {
  for (Algebra alg : {Algebra::Circulant, Algebra::Dct3})
    for (GridShape s : {GridShape::line(16), GridShape::square(8)}) {
      const Vec y = matvec(laplacian(alg, s), Vec(s.size(), 1.0));
      for (double v : y) EXPECT_NEAR(v, 0.0, 1e-14);
    }
}

TEST(Matvec, StrangTermLiftsConstants) {
  const int n = 16;
  for (Algebra alg : {Algebra::Circulant, Algebra::Dct3}) {
    auto op = laplacian(alg, GridShape::line(n));
    op.strang = strang_term(alg, op.shape, laplacian_symbol(1, 1));
    const double theta = alg == Algebra::Circulant ? 2 * kPi / n : kPi / n;
    const double f = 2.0 - 2.0 * std::cos(theta);
    for (double v : matvec(op, Vec(n, 1.0))) EXPECT_NEAR(v, f, 1e-14);
  }
  EXPECT_THROW(strang_term(Algebra::Tau, GridShape::line(5), laplacian_symbol(1, 1)), std::invalid_argument);
}

TEST(Matvec, StrangDenseCirculantN4) {
  auto op = laplacian(Algebra::Circulant, GridShape::line(4));
  op.strang = strang_term(Algebra::Circulant, op.shape, laplacian_symbol(1, 1));
  // f(pi/2) = 2
  const MatrixXd want = oracle::circulant_matrix(4, {2.0, -1.0}) + (2.0 / 4.0) * MatrixXd::Ones(4, 4);
  EXPECT_LT(oracle::max_abs(materialize_dense(op) - want), 1e-14);
}

TEST(Matvec, StrangTwoLevelUsesFirstHarmonic) {
  const int n = 8;
  auto op = laplacian(Algebra::Circulant, GridShape::square(n));
  op.strang = strang_term(Algebra::Circulant, op.shape, laplacian_symbol(2, 1));
  const double f = 2.0 - 2.0 * std::cos(2 * kPi / n);
  for (double v : matvec(op, Vec(op.size(), 1.0))) EXPECT_NEAR(v, f, 1e-13);
}

TEST(Matvec, BandedMatchesDense) {
  int seed = 1;
  for (Algebra alg : {Algebra::Tau, Algebra::Circulant, Algebra::Dct3})
    for (GridShape s : {GridShape::line(9), GridShape::line(10), GridShape::square(6), GridShape::rect(4, 7)})
      for (int half : {0, 1, 2}) {
        auto op = assemble_structured(alg, s, laplacian_symbol(s.d, 2));
        const MatrixXd d = oracle::random_band(s.size(), half, s.d == 1 ? s.n[0] : s.n[1], seed++);
        std::vector<Eigen::Triplet<double>> t;
        for (int i = 0; i < d.rows(); ++i)
          for (int j = 0; j < d.cols(); ++j)
            if (d(i, j) != 0.0) t.emplace_back(i, j, d(i, j));
        op = with_correction(op, BandMatrix::from_triplets(s, t));
        if (alg != Algebra::Tau) op.strang = strang_term(alg, s, laplacian_symbol(s.d, 2));
        const MatrixXd dense = materialize_dense(op);
        for (int k = 0; k < 100; ++k) {
          const VectorXd x = oracle::random_vector(dense.rows(), 1000 + k);
          const VectorXd ref = dense * x;
          EXPECT_LE((apply(op, x) - ref).norm(), 1e-12 * ref.norm());
        }
      }
}

TEST(MaterializeDense, SymmetricAndCapped) {
  auto op = laplacian(Algebra::Dct3, GridShape::square(6), 3);
  op.strang = strang_term(Algebra::Dct3, op.shape, laplacian_symbol(2, 3));
  const MatrixXd m = materialize_dense(op);
  EXPECT_EQ(oracle::max_abs(m - m.transpose()), 0.0);
  EXPECT_THROW(materialize_dense(laplacian(Algebra::Tau, GridShape::line(65)), 64), std::length_error);
}

TEST(BandMatrix, DiagonalAndWidth) {
  const GridShape s = GridShape::line(6);
  const BandMatrix d = BandMatrix::diagonal(s, Vec{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(d.width(0), 1);
  EXPECT_DOUBLE_EQ(d.max_row_sum(), 6.0);
  EXPECT_THROW(BandMatrix::diagonal(s, Vec(5, 1.0)), std::invalid_argument);

  std::vector<Eigen::Triplet<double>> t = {{0, 0, 1.0}, {0, 2, 0.5}, {2, 0, 0.5}, {0, 0, 1.0}};
  const BandMatrix b = BandMatrix::from_triplets(s, t);
  EXPECT_EQ(b.width(0), 5);
  EXPECT_DOUBLE_EQ(b.max_row_sum(), 2.5);
}

TEST(BandMatrix, PeriodicOffsetsWrap) {
  // entry (0, n-1) is stored at offset -1, not n-1
  const GridShape s = GridShape::line(8);
  std::vector<Eigen::Triplet<double>> t = {{0, 7, 1.0}, {7, 0, 1.0}};
  EXPECT_EQ(BandMatrix::from_triplets(s, t).width(0), 3);
}

TEST(GershgorinBound, DominatesLargestEigenvalue) {
  for (Algebra alg : {Algebra::Tau, Algebra::Circulant, Algebra::Dct3}) {
    auto op = laplacian(alg, GridShape::square(8), 2);
    op = with_correction(op, BandMatrix::diagonal(op.shape, Vec(op.size(), 0.3)));
    const double lmax = Eigen::SelfAdjointEigenSolver<MatrixXd>(materialize_dense(op)).eigenvalues().maxCoeff();
    EXPECT_GE(gershgorin_bound(op), lmax - 1e-12);
  }
}

TEST(MinEigFormula, ClosedForm) {
  EXPECT_NEAR(min_eig_formula_tau_1d(1), 2.0, 1e-15);
  EXPECT_NEAR(min_eig_formula_tau_1d(3), 2.0 - std::sqrt(2.0), 1e-15);
  for (int n : {3, 31}) {
    const double dense =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(materialize_dense(laplacian(Algebra::Tau, GridShape::line(n))))
            .eigenvalues()
            .minCoeff();
    EXPECT_NEAR(min_eig_formula_tau_1d(n), dense, 1e-12);
  }
  EXPECT_THROW(min_eig_formula_tau_1d(0), std::invalid_argument);
}
