#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sbmg/operators.hpp"

namespace sbmg {

// P_axis = scale * A(p) * T, one factor per axis; the full prolongation is their Kronecker product
struct Prolongation {
  Algebra algebra = Algebra::Tau;
  GridShape fine, coarse;
  std::vector<CosinePoly> symbols;
  double axis_scale = 1.0;
  std::vector<Csr> factors;     // n_fine x n_coarse
  std::vector<Csr> transposed;  // n_coarse x n_fine
};

// cutting operator of one axis, n_fine x n_coarse
Csr cutting_operator(Algebra alg, int n_fine);

Prolongation build_prolongation(Algebra alg, GridShape fine, const SymbolND& psym);

// y = p x (coarse -> fine) and y = p^T x (fine -> coarse)
void prolong(const Prolongation& p, const double* coarse, double* fine);
void restrict_to_coarse(const Prolongation& p, const double* fine, double* coarse);

RowSparse to_sparse(const Prolongation& p);
Eigen::MatrixXd materialize_dense(const Prolongation& p, std::size_t cap = kDenseCap);

LevelOperator galerkin_coarsen(const LevelOperator& op, const Prolongation& p);

enum class CycleMode { TGM, MGM };
enum class SmootherKind { Richardson, GaussSeidel };
enum class OmegaRule { Symbol, Gershgorin, Finest };

struct SmootherConfig {
  SmootherKind kind = SmootherKind::Richardson;
  double omega_pre = 0.0, omega_post = 0.0;
  int nu_pre = 1, nu_post = 1;
  double bound = 0.0;  // M, the spectral upper bound the weights were derived from
};

struct HierarchyOptions {
  CycleMode mode = CycleMode::MGM;
  std::size_t coarsest_cap = 0;  // 0: 16^d
  SmootherKind smoother = SmootherKind::Richardson;
  OmegaRule omega_rule = OmegaRule::Symbol;
  double pre_factor = 2.0;  // omega_pre = pre_factor / M
  double post_factor = 1.0;
  int nu_pre = 1, nu_post = 1;
  std::optional<SymbolND> symbol;  // generating function of the finest structured part
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// exact solver for the last level: dense Cholesky up to kDenseDirect unknowns, sparse otherwise
class CoarseSolver {
 public:
  static constexpr std::size_t kDenseDirect = 1024;

  CoarseSolver() = default;
  explicit CoarseSolver(const LevelOperator& op);

  void solve(const double* b, double* x) const;
  std::size_t size() const { return n_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::size_t n_ = 0;
};

struct Level {
  LevelOperator op;
  std::optional<Prolongation> down;
  SmootherConfig smoother;
  RowSparse rows;  // assembled band part, filled when Gauss-Seidel is used
};

struct LevelHierarchy {
  CycleMode mode = CycleMode::MGM;
  std::vector<Level> levels;
  CoarseSolver coarse;

  std::size_t depth() const { return levels.size(); }
};

LevelHierarchy build_hierarchy(const LevelOperator& fine, const SymbolND& psym, const HierarchyOptions& opt);

// per-axis sizes from finest to coarsest, or an error if the parity rule breaks first
std::vector<int> size_ladder(Algebra alg, int n, std::size_t cap, int d, CycleMode mode);

// smallest theta with A <= theta B; nullopt when B is not positive definite
std::optional<double> check_order_relation(const LevelOperator& a, const LevelOperator& b);

}  // namespace sbmg
