// sbmg-bench: iteration-count tables for structured-plus-banded systems
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbmg/analysis.hpp"
#include "sbmg/bench.hpp"

using namespace sbmg;

namespace {

struct Args {
  std::string algebra = "tau";
  int dim = 1, q = 1, w = 1;
  std::vector<int> sizes;
  std::vector<std::string> corrections{"d0"};
  std::vector<std::string> solvers{"mgm"};
  std::vector<int> rhos{0};
  bool rho_post_only = false;
  std::string smoother = "richardson";
  std::string omega_rule = "symbol";
  double pre_factor = 2.0, post_factor = 1.0;
  std::string rhs = "product";
  double tol = 1e-7;
  int max_iter = 1000;
  std::uint64_t seed = 1;
  int reps = 0;  // 0: 10 for random families, 1 otherwise
  bool kappa = false;
  std::string out;
  std::string format = "md";
  bool no_timing = false;
  int max_2d = 511;
};

SmootherKind parse_smoother(const std::string& s) {
  if (s == "richardson") return SmootherKind::Richardson;
  if (s == "gs-post") return SmootherKind::GaussSeidel;
  throw CLI::ValidationError("--smoother", "expected richardson or gs-post");
}

OmegaRule parse_omega_rule(const std::string& s) {
  if (s == "symbol") return OmegaRule::Symbol;
  if (s == "gershgorin") return OmegaRule::Gershgorin;
  if (s == "finest") return OmegaRule::Finest;
  throw CLI::ValidationError("--omega-rule", "expected symbol, gershgorin or finest");
}

RhsKind parse_rhs(const std::string& s) {
  if (s == "product") return RhsKind::Product;
  if (s == "uniform") return RhsKind::Uniform;
  throw CLI::ValidationError("--rhs", "expected product or uniform");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

void emit(const Args& a, const std::vector<CellResult>& results, const std::string& title) {
  const TableOutput t = emit_table(results, !a.no_timing, title);
  if (a.out.empty()) {
    if (a.format != "csv") std::cout << t.markdown;
    if (a.format == "both") std::cout << "\n";
    if (a.format != "md") std::cout << t.csv;
    return;
  }
  if (a.format == "md") write_text(a.out, t.markdown);
  else if (a.format == "csv") write_text(a.out, t.csv);
  else {
    write_text(a.out + ".md", t.markdown);
    write_text(a.out + ".csv", t.csv);
  }
}

std::vector<CellResult> run_all(const std::vector<Cell>& cells) {
  std::vector<CellResult> out;
  out.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    std::fprintf(stderr, "[%zu/%zu] %s %dD n=%d %s %s rho=%d\n", i + 1, cells.size(),
                 std::string(to_string(c.algebra)).c_str(), c.d, c.n, family_name(c.family).c_str(),
                 std::string(to_string(c.solver)).c_str(), c.rho);
    out.push_back(run_cell(c));
  }
  return out;
}

TableOptions table_options(const Args& a) {
  TableOptions o;
  o.max_2d = a.max_2d;
  o.seed = a.seed;
  o.tol = a.tol;
  o.max_iter = a.max_iter;
  if (a.reps > 0) o.reps = a.reps;
  o.smoother = parse_smoother(a.smoother);
  o.omega_rule = parse_omega_rule(a.omega_rule);
  o.pre_factor = a.pre_factor;
  o.post_factor = a.post_factor;
  o.rho_post_only = a.rho_post_only;
  o.rhs = parse_rhs(a.rhs);
  return o;
}

std::vector<Cell> custom_grid(const Args& a) {
  const Algebra alg = parse_algebra(a.algebra);
  std::vector<int> sizes = a.sizes.empty() ? default_sizes(alg, a.dim, a.max_2d) : a.sizes;
  const TableOptions o = table_options(a);
  std::vector<Cell> cells;
  for (int n : sizes)
    for (const auto& cs : a.corrections)
      for (const auto& ss : a.solvers)
        for (int rho : a.rhos) {
          Cell c;
          c.algebra = alg;
          c.d = a.dim;
          c.q = a.q;
          c.w = a.w;
          c.n = n;
          c.family = parse_family(cs);
          c.solver = parse_solver(ss);
          c.rho = rho;
          c.rho_post_only = o.rho_post_only;
          c.smoother = o.smoother;
          c.omega_rule = o.omega_rule;
          c.pre_factor = o.pre_factor;
          c.post_factor = o.post_factor;
          c.tol = o.tol;
          c.max_iter = o.max_iter;
          c.rhs = o.rhs;
          c.kappa = a.kappa;
          c.reps = a.reps > 0 ? a.reps : (is_random_family(c.family) ? 10 : 1);
          c.seed = derive_seed(a.seed, cells.size());
          cells.push_back(c);
        }
  return cells;
}

int run_certify(const Args& a, bool quick) {
  std::vector<CertifyConfig> configs;
  for (Algebra alg : {Algebra::Tau, Algebra::Circulant, Algebra::Dct3}) {
    const int shift = alg == Algebra::Tau ? 0 : 1;
    for (int family : {0, 1, 4}) {
      for (int n : {15, 31, 63}) {
        if (quick && n > 15) continue;
        CertifyConfig c;
        c.algebra = alg;
        c.d = 1;
        c.n = n + shift;
        c.family = family;
        c.w = a.w;
        c.seed = a.seed;
        configs.push_back(c);
      }
      CertifyConfig c;
      c.algebra = alg;
      c.d = 2;
      c.n = 15 + shift;
      c.family = family;
      c.w = a.w;
      c.seed = a.seed;
      configs.push_back(c);
    }
  }
  int failed = 0;
  std::printf("%-28s %9s %9s %9s %9s %9s %6s\n", "case", "alpha", "beta", "bound", "measured", "theta", "result");
  for (const auto& c : configs) {
    const TheoryCertificate t = certify(c);
    if (!t.pass) ++failed;
    std::printf("%-28s %9.4f %9.4f %9.6f %9.6f %9.4f %6s\n", t.label().c_str(), t.alpha_post, t.beta, t.bound,
                t.measured_contraction, t.theta, t.pass ? "ok" : "FAIL");
  }
  std::printf("%zu certificates, %d failed\n", configs.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multigrid iteration counts for structured-plus-banded HPD systems"};
  app.set_config("--config", "", "key = value file with any of the long options");
  Args a;

  app.add_option("--algebra", a.algebra, "tau | circ | dct3")->check(CLI::IsMember({"tau", "circ", "dct3"}));
  app.add_option("--dim", a.dim, "1 or 2")->check(CLI::IsMember({1, 2}));
  app.add_option("--q", a.q, "Laplacian power")->check(CLI::IsMember({1, 2, 3}));
  app.add_option("--w", a.w, "projector exponent")->check(CLI::PositiveNumber);
  app.add_option("--sizes", a.sizes, "comma separated axis sizes")->delimiter(',');
  app.add_option("--correction", a.corrections, "d0..d10, comma separated")->delimiter(',');
  app.add_option("--solver", a.solvers, "tgm | mgm | cg, comma separated")->delimiter(',');
  app.add_option("--rho", a.rhos, "extra smoothing steps per level, comma separated")->delimiter(',');
  app.add_flag("--rho-post-only", a.rho_post_only, "apply the rho increase to post-smoothing only");
  app.add_option("--smoother", a.smoother, "richardson | gs-post");
  app.add_option("--omega-rule", a.omega_rule, "symbol | gershgorin | finest");
  app.add_option("--pre-factor", a.pre_factor, "omega_pre = factor / M");
  app.add_option("--post-factor", a.post_factor, "omega_post = factor / M");
  app.add_option("--rhs", a.rhs, "product (b = B x*) | uniform");
  app.add_option("--tol", a.tol, "relative residual tolerance");
  app.add_option("--max-iter", a.max_iter);
  app.add_option("--seed", a.seed);
  app.add_option("--reps", a.reps, "repetitions (default 10 for random families)");
  app.add_flag("--kappa", a.kappa, "also report the condition number");
  app.add_option("--out", a.out, "output path (both: PATH.md and PATH.csv)");
  app.add_option("--format", a.format)->check(CLI::IsMember({"md", "csv", "both"}));
  app.add_flag("--no-timing", a.no_timing, "write secs=0 so output is byte-reproducible");
  app.add_option("--max-2d", a.max_2d, "largest 2D axis size");

  int table = 0;
  auto* tab = app.add_subcommand("table", "reproduce one of the reference tables");
  tab->add_option("N", table, "table number 1..8")->required()->check(CLI::Range(1, 8));

  bool quick = false;
  auto* cert = app.add_subcommand("certify", "check the two-grid convergence certificates");
  cert->add_flag("--quick", quick, "smallest sizes only");
  app.require_subcommand(0, 1);
  tab->fallthrough();
  cert->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cert) return run_certify(a, quick);
    if (*tab) {
      emit(a, run_all(table_grid(table, table_options(a))), table_title(table));
      return 0;
    }
    emit(a, run_all(custom_grid(a)), "");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
