#include "sbmg/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sbmg/analysis.hpp"

namespace sbmg {

namespace {

double d_value(int family, double s, double big_n) {
  switch (family) {
    case 1: return s / (s + 1.0);
    case 2: return std::abs(std::sin(s));
    case 3: return std::abs(std::sin(s)) * (s * s - 1.0) / (s * s + 1.0);
    case 4: return s / big_n;
    default: return 0.0;
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt_iters(double v) {
  const double r = std::round(2.0 * v) / 2.0;
  if (r == std::floor(r)) return fmt("%.0f", r);
  return fmt("%.1f", r);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t k = s.find(sep, start);
    out.emplace_back(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

constexpr const char* kCsvHeader = "algebra,dim,q,w,n,correction,solver,rho,iters,resid,secs,seed,kappa";

}  // namespace

std::string family_name(int family) {
  if (family < 0 || family > 10) throw std::invalid_argument("family out of range");
  return "d" + std::to_string(family);
}

int parse_family(std::string_view s) {
  if (s.size() >= 2 && (s[0] == 'd' || s[0] == 'D')) s.remove_prefix(1);
  int v = -1;
  try {
    std::size_t used = 0;
    v = std::stoi(std::string(s), &used);
    if (used != s.size()) v = -1;
  } catch (const std::exception&) {
    v = -1;
  }
  if (v < 0 || v > 10) throw std::invalid_argument("unknown correction family: " + std::string(s));
  return v;
}

bool is_random_family(int family) { return family >= 5 && family <= 10; }

BandMatrix make_correction(const CorrectionSpec& spec, GridShape shape) {
  if (spec.family < 0 || spec.family > 10) throw std::invalid_argument("make_correction: family out of range");
  if (spec.family == 0) return BandMatrix(shape);
  const std::size_t big_n = shape.size();
  if (!is_random_family(spec.family)) {
    Vec d(big_n);
    if (shape.d == 1) {
      for (std::size_t i = 0; i < big_n; ++i) d[i] = d_value(spec.family, double(i + 1), double(big_n));
    } else {
      const int n0 = shape.n[0], n1 = shape.n[1];
      for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
          const std::size_t k = std::size_t(i) * n1 + j;
          d[k] = spec.family == 4 ? double(k + 1) / double(big_n)
                                  : d_value(spec.family, i + 1.0, 0.0) + d_value(spec.family, j + 1.0, 0.0);
        }
    }
    return BandMatrix::diagonal(shape, d);
  }

  // d5/d7/d9 uniform, d6/d8/d10 normal; half-bandwidth 0, 1, 2
  const int half = (spec.family - 5) / 2;
  const bool normal = spec.family % 2 == 0;
  const int gamma = 2 * half + 1;
  const int line = shape.d == 1 ? shape.n[0] : shape.n[1];
  const double scale = 1.0 / (gamma * double(shape.n[0]) * double(shape.n[0]));
  std::mt19937_64 gen(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&] { return scale * (normal ? gauss(gen) : uni(gen)); };

  std::vector<Eigen::Triplet<double>> t;
  const std::size_t lines = big_n / std::size_t(line);
  for (std::size_t l = 0; l < lines; ++l) {
    const std::size_t base = l * std::size_t(line);
    for (int i = 0; i < line; ++i) {
      t.emplace_back(int(base + i), int(base + i), draw());
      for (int o = 1; o <= half && i + o < line; ++o) {
        const double v = draw();
        t.emplace_back(int(base + i), int(base + i + o), v);
        t.emplace_back(int(base + i + o), int(base + i), v);
      }
    }
  }
  return BandMatrix::from_triplets(shape, t);
}

Problem make_problem(Algebra alg, int d, int n, int q, int w, const CorrectionSpec& spec) {
  const GridShape shape = d == 1 ? GridShape::line(n) : GridShape::square(n);
  const SymbolND sym = laplacian_symbol(d, q);
  LevelOperator op = assemble_structured(alg, shape, sym);
  if (spec.family != 0) op = with_correction(std::move(op), make_correction(spec, shape));
  else if (alg != Algebra::Tau) op.strang = strang_term(alg, shape, sym);
  return {std::move(op), sym, projector_symbol(d, w)};
}

std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::TGM: return "tgm";
    case SolverKind::MGM: return "mgm";
    case SolverKind::CG: return "cg";
  }
  return "?";
}

SolverKind parse_solver(std::string_view s) {
  if (s == "tgm") return SolverKind::TGM;
  if (s == "mgm") return SolverKind::MGM;
  if (s == "cg") return SolverKind::CG;
  throw std::invalid_argument("unknown solver: " + std::string(s));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(master), std::uint32_t(master >> 32), std::uint32_t(index),
                    std::uint32_t(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

CellResult run_cell(const Cell& c) {
  if (c.reps < 1) throw std::invalid_argument("run_cell: reps must be positive");
  CellResult res;
  res.cell = c;
  for (int rep = 0; rep < c.reps; ++rep) {
    const CorrectionSpec spec{c.family, derive_seed(c.seed, 2 * std::uint64_t(rep))};
    const Problem pb = make_problem(c.algebra, c.d, c.n, c.q, c.w, spec);
    const std::size_t big_n = pb.op.size();

    std::mt19937_64 gen(derive_seed(c.seed, 2 * std::uint64_t(rep) + 1));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Vec b(big_n);
    if (c.rhs == RhsKind::Product) {
      Vec xs(big_n);
      for (double& v : xs) v = uni(gen);
      b = matvec(pb.op, xs);
    } else {
      for (double& v : b) v = uni(gen);
    }

    std::optional<LevelHierarchy> h;
    auto hierarchy = [&](CycleMode mode) {
      HierarchyOptions o;
      o.mode = mode;
      o.symbol = pb.symbol;
      o.smoother = c.smoother;
      o.omega_rule = c.omega_rule;
      o.pre_factor = c.pre_factor;
      o.post_factor = c.post_factor;
      return build_hierarchy(pb.op, pb.psym, o);
    };

    SolveReport rep_out;
    if (c.solver == SolverKind::CG) {
      rep_out = cg_solve(pb.op, b, c.tol, c.max_iter).second;
    } else {
      h = hierarchy(c.solver == SolverKind::TGM ? CycleMode::TGM : CycleMode::MGM);
      CycleConfig cfg;
      cfg.rho = c.rho;
      cfg.rho_post_only = c.rho_post_only;
      cfg.tol = c.tol;
      cfg.max_iter = c.max_iter;
      rep_out = solve(*h, b, cfg).second;
    }
    res.per_rep.push_back(rep_out.iterations);
    res.iters += rep_out.iterations;
    res.resid += rep_out.residual_history.back();
    res.secs += rep_out.wall_seconds;
    res.converged = res.converged && rep_out.converged;

    // condition number of the first repetition only
    if (c.kappa && rep == 0) {
      ConditionEstimate ce;
      if (c.d == 1 || big_n <= CoarseSolver::kDenseDirect) {
        ce = condition_number(pb.op, CondMethod::Dense);
      } else {
        if (!h || h->mode != CycleMode::MGM) h = hierarchy(CycleMode::MGM);
        ce = condition_number(pb.op, CondMethod::Iterative, &*h);
      }
      res.kappa = ce.kappa;
    }
  }
  res.iters /= c.reps;
  res.resid /= c.reps;
  res.secs /= c.reps;
  return res;
}

CsvRow to_row(const CellResult& r, bool timing) {
  CsvRow row;
  row.algebra = std::string(to_string(r.cell.algebra));
  row.dim = r.cell.d;
  row.q = r.cell.q;
  row.w = r.cell.w;
  row.n = r.cell.n;
  row.correction = family_name(r.cell.family);
  row.solver = std::string(to_string(r.cell.solver));
  row.rho = r.cell.rho;
  row.iters = r.iters;
  row.resid = r.resid;
  row.secs = timing ? r.secs : 0.0;
  row.seed = r.cell.seed;
  row.kappa = r.kappa;
  return row;
}

std::string emit_csv(const std::vector<CsvRow>& rows) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const auto& r : rows) {
    os << r.algebra << ',' << r.dim << ',' << r.q << ',' << r.w << ',' << r.n << ',' << r.correction << ','
       << r.solver << ',' << r.rho << ',' << fmt("%.17g", r.iters) << ',' << fmt("%.17g", r.resid) << ','
       << fmt("%.17g", r.secs) << ',' << r.seed << ',' << (r.kappa ? fmt("%.17g", *r.kappa) : "") << "\n";
  }
  return os.str();
}

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  bool header = true;
  for (std::string line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) throw std::invalid_argument("parse_csv: unexpected header");
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 13) throw std::invalid_argument("parse_csv: expected 13 fields: " + line);
    CsvRow r;
    r.algebra = f[0];
    r.dim = std::stoi(f[1]);
    r.q = std::stoi(f[2]);
    r.w = std::stoi(f[3]);
    r.n = std::stoi(f[4]);
    r.correction = f[5];
    r.solver = f[6];
    r.rho = std::stoi(f[7]);
    r.iters = std::stod(f[8]);
    r.resid = std::stod(f[9]);
    r.secs = std::stod(f[10]);
    r.seed = std::stoull(f[11]);
    if (!f[12].empty()) r.kappa = std::stod(f[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string emit_markdown(const std::vector<CsvRow>& rows, const std::string& title) {
  std::ostringstream os;
  if (!title.empty()) os << "### " << title << "\n\n";
  if (rows.empty()) {
    os << "| N |\n|---|\n";
    return os.str();
  }

  // panels keyed by (algebra, dim, solver, q, w) in order of first appearance
  using PanelKey = std::tuple<std::string, int, std::string, int, int>;
  std::vector<PanelKey> panels;
  std::map<PanelKey, std::vector<const CsvRow*>> members;
  for (const auto& r : rows) {
    PanelKey k{r.algebra, r.dim, r.solver, r.q, r.w};
    if (!members.count(k)) panels.push_back(k);
    members[k].push_back(&r);
  }

  for (const auto& key : panels) {
    const auto& rs = members[key];
    const auto& [alg, dim, solver, q, w] = key;
    std::string upper = solver;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return char(std::toupper(ch)); });
    os << "**" << upper << "**, " << alg << " " << dim << "D, q=" << q << " w=" << w << "\n\n";

    std::vector<std::pair<std::string, int>> cols;
    std::vector<int> sizes;
    std::map<std::string, int> rho_count;
    for (const CsvRow* r : rs) {
      std::pair<std::string, int> c{r->correction, r->rho};
      if (std::find(cols.begin(), cols.end(), c) == cols.end()) {
        cols.push_back(c);
        ++rho_count[r->correction];
      }
      if (std::find(sizes.begin(), sizes.end(), r->n) == sizes.end()) sizes.push_back(r->n);
    }
    std::sort(sizes.begin(), sizes.end());
    std::vector<bool> has_kappa(cols.size(), false);
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (const CsvRow* r : rs)
        if (r->correction == cols[j].first && r->rho == cols[j].second && r->kappa) has_kappa[j] = true;

    os << "| N |";
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::string label = cols[j].first;
      if (rho_count[cols[j].first] > 1 || cols[j].second != 0) label += " rho=" + std::to_string(cols[j].second);
      if (has_kappa[j]) os << " " << label << " k2 |";
      os << " " << label << " |";
    }
    os << "\n|---|";
    for (std::size_t j = 0; j < cols.size(); ++j) os << (has_kappa[j] ? "---|---|" : "---|");
    os << "\n";

    for (int n : sizes) {
      os << "| " << n << (dim == 2 ? "^2" : "") << " |";
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const CsvRow* hit = nullptr;
        for (const CsvRow* r : rs)
          if (r->n == n && r->correction == cols[j].first && r->rho == cols[j].second) hit = r;
        if (has_kappa[j]) os << " " << (hit && hit->kappa ? fmt("%.2e", *hit->kappa) : "") << " |";
        os << " " << (hit ? fmt_iters(hit->iters) : "") << " |";
      }
      os << "\n";
    }
    os << "\n";
  }
  return os.str();
}

TableOutput emit_table(const std::vector<CellResult>& results, bool timing, const std::string& title) {
  std::vector<CsvRow> rows;
  rows.reserve(results.size());
  for (const auto& r : results) rows.push_back(to_row(r, timing));
  return {emit_markdown(rows, title), emit_csv(rows)};
}

std::vector<int> default_sizes(Algebra alg, int d, int max_2d) {
  std::vector<int> out;
  const int offset = alg == Algebra::Tau ? -1 : 0;
  for (int e = 5; e <= 9; ++e) {
    const int n = (1 << e) + offset;
    if (d == 2 && n > max_2d + (alg == Algebra::Tau ? 0 : 1)) break;
    out.push_back(n);
  }
  return out;
}

std::string table_title(int table) {
  switch (table) {
    case 1: return "TGM and MGM iterations, tau 1D, tridiagonal plus diagonal";
    case 2: return "TGM and MGM iterations, tau 2D, tridiagonal plus diagonal";
    case 3: return "Condition numbers and CG iterations, tau 1D and 2D";
    case 4: return "Condition numbers and mean MGM iterations, random corrections";
    case 5: return "TGM and MGM iterations, circulant and DCT-III 1D";
    case 6: return "TGM and MGM iterations, circulant and DCT-III 2D";
    case 7: return "MGM iterations, higher order tau";
    case 8: return "MGM iterations, higher order circulant";
    default: throw std::invalid_argument("table number must be 1..8");
  }
}

std::vector<Cell> table_grid(int table, const TableOptions& opt) {
  (void)table_title(table);
  std::vector<Cell> cells;
  auto base = [&](Algebra alg, int d, int q, int w) {
    Cell c;
    c.algebra = alg;
    c.d = d;
    c.q = q;
    c.w = w;
    c.tol = opt.tol;
    c.max_iter = opt.max_iter;
    c.smoother = opt.smoother;
    c.omega_rule = opt.omega_rule;
    c.pre_factor = opt.pre_factor;
    c.post_factor = opt.post_factor;
    c.rho_post_only = opt.rho_post_only;
    c.rhs = opt.rhs;
    return c;
  };
  auto push = [&](Cell c, int n, int family, SolverKind s, int rho) {
    c.n = n;
    c.family = family;
    c.solver = s;
    c.rho = rho;
    c.seed = derive_seed(opt.seed, cells.size());
    c.reps = is_random_family(family) ? opt.reps : 1;
    cells.push_back(c);
  };
  // TGM d0..d4 then MGM d0..d4 with d4 repeated at rho_alt
  auto tgm_mgm = [&](Algebra alg, int d, int q, int w, int rho_alt, bool with_tgm) {
    const Cell c = base(alg, d, q, w);
    const auto sizes = default_sizes(alg, d, opt.max_2d);
    if (with_tgm)
      for (int n : sizes)
        for (int f = 0; f <= 4; ++f) push(c, n, f, SolverKind::TGM, 0);
    for (int n : sizes) {
      for (int f = 0; f <= 4; ++f) push(c, n, f, SolverKind::MGM, 0);
      push(c, n, 4, SolverKind::MGM, rho_alt);
    }
  };

  switch (table) {
    case 1: tgm_mgm(Algebra::Tau, 1, 1, 1, 1, true); break;
    case 2: tgm_mgm(Algebra::Tau, 2, 1, 1, 1, true); break;
    case 3:
      for (int d : {1, 2}) {
        Cell c = base(Algebra::Tau, d, 1, 1);
        c.kappa = true;
        c.max_iter = std::max(opt.max_iter, 100000);
        for (int n : default_sizes(Algebra::Tau, d, opt.max_2d))
          for (int f = 0; f <= 4; ++f) push(c, n, f, SolverKind::CG, 0);
      }
      break;
    case 4:
      for (int d : {1, 2}) {
        Cell c = base(Algebra::Tau, d, 1, 1);
        c.kappa = true;
        for (int n : default_sizes(Algebra::Tau, d, opt.max_2d))
          for (int f = 5; f <= 10; ++f) push(c, n, f, SolverKind::MGM, 0);
      }
      break;
    case 5:
      tgm_mgm(Algebra::Circulant, 1, 1, 1, 4, true);
      tgm_mgm(Algebra::Dct3, 1, 1, 1, 2, true);
      break;
    case 6:
      tgm_mgm(Algebra::Circulant, 2, 1, 1, 1, true);
      tgm_mgm(Algebra::Dct3, 2, 1, 1, 1, true);
      break;
    case 7:
      tgm_mgm(Algebra::Tau, 1, 2, 1, 4, false);
      tgm_mgm(Algebra::Tau, 1, 2, 2, 2, false);
      tgm_mgm(Algebra::Tau, 1, 3, 2, 1, false);
      tgm_mgm(Algebra::Tau, 1, 3, 3, 1, false);
      tgm_mgm(Algebra::Tau, 2, 2, 1, 2, false);
      tgm_mgm(Algebra::Tau, 2, 2, 2, 2, false);
      tgm_mgm(Algebra::Tau, 2, 3, 2, 2, false);
      tgm_mgm(Algebra::Tau, 2, 3, 3, 2, false);
      break;
    case 8:
      tgm_mgm(Algebra::Circulant, 1, 2, 1, 4, false);
      tgm_mgm(Algebra::Circulant, 1, 2, 2, 4, false);
      tgm_mgm(Algebra::Circulant, 1, 3, 2, 4, false);
      tgm_mgm(Algebra::Circulant, 1, 3, 3, 4, false);
      tgm_mgm(Algebra::Circulant, 2, 2, 1, 2, false);
      tgm_mgm(Algebra::Circulant, 2, 2, 2, 1, false);
      tgm_mgm(Algebra::Circulant, 2, 3, 2, 1, false);
      tgm_mgm(Algebra::Circulant, 2, 3, 3, 1, false);
      break;
  }
  return cells;
}

}  // namespace sbmg
