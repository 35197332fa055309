#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sbmg/symbols.hpp"

namespace sbmg {

using Vec = std::vector<double>;
using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

enum class Algebra { Tau, Circulant, Dct3 };

std::string_view to_string(Algebra a);
Algebra parse_algebra(std::string_view s);

// coarse size for one axis, or nullopt if n breaks the parity rule (tau: odd n >= 3, others: even n >= 2)
std::optional<int> coarse_size(Algebra a, int n);

struct GridShape {
  int d = 1;
  std::array<int, 2> n{1, 1};

  static GridShape line(int n0) { return {1, {n0, 1}}; }
  static GridShape square(int n0) { return {2, {n0, n0}}; }
  static GridShape rect(int n0, int n1) { return {2, {n0, n1}}; }

  std::size_t size() const { return std::size_t(n[0]) * (d == 2 ? std::size_t(n[1]) : 1); }
  // row-major: axis 0 is the slow index
  int fast() const { return d == 2 ? n[1] : 1; }
  bool operator==(const GridShape&) const = default;
};

// small compressed-row matrix, used for the 1D factors of structured parts and prolongations
struct Csr {
  int rows = 0, cols = 0;
  std::vector<int> ptr{0}, idx;
  std::vector<double> val;

  double at(int i, int j) const;
  Eigen::MatrixXd dense() const;
  static Csr from_dense(const Eigen::MatrixXd& m, double drop = 0.0);
  static Csr identity(int n);
};

// 1D algebra matrix generated by an even stencil (image-method closure of the band)
Csr closure_matrix(Algebra alg, int n, const CosinePoly& stencil);

// L_0 (x) L_1 (x) ... over the d axes; stencils[a] generates factors[a]
struct KronTerm {
  std::vector<CosinePoly> stencils;
  std::vector<Csr> factors;
};

// symmetric band matrix; offsets are per axis, wrapped into (-n/2, n/2]
// values[k][i] = M(i, i (+) offsets[k]) with per-axis periodic index arithmetic
struct BandMatrix {
  GridShape shape;
  std::vector<std::array<int, 2>> offsets;
  std::vector<Vec> values;

  BandMatrix() = default;
  explicit BandMatrix(GridShape s) : shape(s) {}

  bool empty() const { return offsets.empty(); }
  std::size_t column(std::size_t row, std::size_t slot) const;
  // number of nonzero diagonals along an axis, 2 * max|offset| + 1 (0 if empty)
  int width(int axis, double tol = 0.0) const;
  double max_row_sum() const;  // infinity norm

  static BandMatrix diagonal(GridShape s, const Vec& d);
  static BandMatrix from_sparse(GridShape s, const RowSparse& m, double drop = 0.0);
  // entries given as (row, col, value); duplicates accumulate
  static BandMatrix from_triplets(GridShape s, const std::vector<Eigen::Triplet<double>>& t);
};

struct RankOne {
  Vec v;  // contributes v (v^T x)
};

struct LevelOperator {
  Algebra algebra = Algebra::Tau;
  GridShape shape;
  std::vector<KronTerm> structured;
  BandMatrix correction;
  std::optional<RankOne> strang;

  std::size_t size() const { return shape.size(); }
};

LevelOperator assemble_structured(Algebra alg, GridShape shape, const SymbolND& sym);

LevelOperator with_correction(LevelOperator op, BandMatrix d);

// v = sqrt(f(theta)/N) e with theta = 2pi/N (circulant) or pi/N (DCT-III), first axis in 2D
RankOne strang_term(Algebra alg, GridShape shape, const SymbolND& sym);

// y = B x
void matvec(const LevelOperator& op, const double* x, double* y);
Vec matvec(const LevelOperator& op, const Vec& x);
// y = (structured + correction) x, no rank-one term
void apply_band(const LevelOperator& op, const double* x, double* y);

// structured + correction, no rank-one part
RowSparse to_sparse(const LevelOperator& op);

constexpr std::size_t kDenseCap = 4096;
Eigen::MatrixXd materialize_dense(const LevelOperator& op, std::size_t cap = kDenseCap);

// Gershgorin row-sum bound of the assembled operator (rank-one term included)
double gershgorin_bound(const LevelOperator& op);

double min_eig_formula_tau_1d(int n);

}  // namespace sbmg
