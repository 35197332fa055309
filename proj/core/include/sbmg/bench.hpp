#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sbmg/solvers.hpp"

namespace sbmg {

// d0..d10; d5-d10 are seeded random band corrections
struct CorrectionSpec {
  int family = 0;
  std::uint64_t seed = 0;
};

std::string family_name(int family);
int parse_family(std::string_view s);
bool is_random_family(int family);

BandMatrix make_correction(const CorrectionSpec& spec, GridShape shape);

struct Problem {
  LevelOperator op;
  SymbolND symbol, psym;
};

// structured part + correction; singular d0 circulant/DCT-III systems get the Strang term
Problem make_problem(Algebra alg, int d, int n, int q, int w, const CorrectionSpec& spec);

enum class SolverKind { TGM, MGM, CG };
enum class RhsKind { Product, Uniform };  // b = B x* or b itself uniform

std::string_view to_string(SolverKind s);
SolverKind parse_solver(std::string_view s);

struct Cell {
  Algebra algebra = Algebra::Tau;
  int d = 1, q = 1, w = 1, n = 31;
  int family = 0;
  SolverKind solver = SolverKind::MGM;
  int rho = 0;
  bool rho_post_only = false;
  SmootherKind smoother = SmootherKind::Richardson;
  OmegaRule omega_rule = OmegaRule::Symbol;
  double pre_factor = 2.0, post_factor = 1.0;
  double tol = 1e-7;
  int max_iter = 1000;
  std::uint64_t seed = 1;
  int reps = 1;
  RhsKind rhs = RhsKind::Product;
  bool kappa = false;
};

struct CellResult {
  Cell cell;
  double iters = 0.0;  // mean over repetitions
  double resid = 0.0;  // final relative residual, mean over repetitions
  double secs = 0.0;   // mean solve time
  std::vector<int> per_rep;
  bool converged = true;
  std::optional<double> kappa;  // first repetition
};

CellResult run_cell(const Cell& cell);

struct CsvRow {
  std::string algebra;
  int dim = 1, q = 1, w = 1, n = 0;
  std::string correction, solver;
  int rho = 0;
  double iters = 0.0, resid = 0.0, secs = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> kappa;

  bool operator==(const CsvRow&) const = default;
};

CsvRow to_row(const CellResult& r, bool timing = true);
std::string emit_csv(const std::vector<CsvRow>& rows);
std::vector<CsvRow> parse_csv(std::string_view text);
// sizes down, one column per (solver, family, q, w, rho); kappa gets its own column when present
std::string emit_markdown(const std::vector<CsvRow>& rows, const std::string& title = {});

struct TableOutput {
  std::string markdown, csv;
};
TableOutput emit_table(const std::vector<CellResult>& results, bool timing = true, const std::string& title = {});

struct TableOptions {
  int max_2d = 511;  // largest 2D axis size
  std::uint64_t seed = 1;
  double tol = 1e-7;
  int max_iter = 1000;
  int reps = 10;  // random families
  SmootherKind smoother = SmootherKind::Richardson;
  OmegaRule omega_rule = OmegaRule::Symbol;
  double pre_factor = 2.0, post_factor = 1.0;
  bool rho_post_only = false;
  RhsKind rhs = RhsKind::Product;
};

std::vector<Cell> table_grid(int table, const TableOptions& opt = {});
std::string table_title(int table);
std::vector<int> default_sizes(Algebra alg, int d, int max_2d = 511);

// per-cell seed from (master seed, cell index)
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace sbmg
