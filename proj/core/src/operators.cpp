#include "sbmg/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sbmg {

namespace {

int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

// canonical representative of an index difference modulo n, in (-n/2, n/2]
int canonical(int delta, int n) {
  int r = wrap(delta, n);
  return 2 * r > n ? r - n : r;
}

// fold a 1-based position into [1, n]; returns (index, sign), sign 0 means the image vanishes
std::pair<int, int> fold(Algebra alg, int t, int n) {
  switch (alg) {
    case Algebra::Tau: {
      const int p = 2 * (n + 1);
      const int m = wrap(t, p);
      if (m == 0 || m == n + 1) return {0, 0};
      if (m <= n) return {m, 1};
      return {p - m, -1};
    }
    case Algebra::Dct3: {
      const int m = wrap(t - 1, 2 * n);
      return {m < n ? m + 1 : 2 * n - m, 1};
    }
    case Algebra::Circulant:
      return {wrap(t - 1, n) + 1, 1};
  }
  return {0, 0};
}

bool is_identity(const Csr& a) {
  if (a.rows != a.cols || int(a.idx.size()) != a.rows) return false;
  for (int i = 0; i < a.rows; ++i)
    if (a.ptr[i] != i || a.idx[i] != i || a.val[i] != 1.0) return false;
  return true;
}

struct Axes {
  int slow, fast;
};

Axes axes(const GridShape& s) { return s.d == 2 ? Axes{s.n[0], s.n[1]} : Axes{1, s.n[0]}; }

thread_local Vec tl_scratch;

void apply_term(const KronTerm& t, const GridShape& s, const double* x, double* y) {
  if (s.d == 1) {
    const Csr& a = t.factors[0];
    for (int i = 0; i < a.rows; ++i) {
      double acc = 0.0;
      for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) acc += a.val[k] * x[a.idx[k]];
      y[i] += acc;
    }
    return;
  }
  const Csr& l = t.factors[0];
  const Csr& r = t.factors[1];
  const int n0 = s.n[0], n1 = s.n[1];
  const double* z = x;
  if (!is_identity(r)) {
    tl_scratch.resize(std::size_t(n0) * n1);
    double* zz = tl_scratch.data();
    for (int j0 = 0; j0 < n0; ++j0) {
      const double* xr = x + std::size_t(j0) * n1;
      double* zr = zz + std::size_t(j0) * n1;
      for (int i1 = 0; i1 < n1; ++i1) {
        double acc = 0.0;
        for (int k = r.ptr[i1]; k < r.ptr[i1 + 1]; ++k) acc += r.val[k] * xr[r.idx[k]];
        zr[i1] = acc;
      }
    }
    z = zz;
  }
  for (int i0 = 0; i0 < n0; ++i0) {
    double* yr = y + std::size_t(i0) * n1;
    for (int k = l.ptr[i0]; k < l.ptr[i0 + 1]; ++k) {
      const double a = l.val[k];
      const double* zr = z + std::size_t(l.idx[k]) * n1;
      for (int i1 = 0; i1 < n1; ++i1) yr[i1] += a * zr[i1];
    }
  }
}

void apply_correction(const BandMatrix& b, const double* x, double* y) {
  const auto [ns, nf] = axes(b.shape);
  const bool two = b.shape.d == 2;
  for (std::size_t k = 0; k < b.offsets.size(); ++k) {
    const int os = two ? b.offsets[k][0] : 0;
    const int of = two ? b.offsets[k][1] : b.offsets[k][0];
    const double* v = b.values[k].data();
    for (int is = 0; is < ns; ++is) {
      const std::size_t ro = std::size_t(is) * nf;
      const double* xr = x + std::size_t(wrap(is + os, ns)) * nf;
      const double* vr = v + ro;
      double* yr = y + ro;
      // j = i + of, split where it wraps
      const int split = of >= 0 ? nf - of : -of;
      const int lo_shift = of >= 0 ? of : of + nf;
      const int hi_shift = of >= 0 ? of - nf : of;
      for (int i = 0; i < split; ++i) yr[i] += vr[i] * xr[i + lo_shift];
      for (int i = split; i < nf; ++i) yr[i] += vr[i] * xr[i + hi_shift];
    }
  }
}

}  // namespace

std::string_view to_string(Algebra a) {
  switch (a) {
    case Algebra::Tau: return "tau";
    case Algebra::Circulant: return "circ";
    case Algebra::Dct3: return "dct3";
  }
  return "?";
}

Algebra parse_algebra(std::string_view s) {
  if (s == "tau") return Algebra::Tau;
  if (s == "circ" || s == "circulant") return Algebra::Circulant;
  if (s == "dct3" || s == "dct") return Algebra::Dct3;
  throw std::invalid_argument("unknown algebra: " + std::string(s));
}

std::optional<int> coarse_size(Algebra a, int n) {
  if (a == Algebra::Tau) {
    if (n < 3 || n % 2 == 0) return std::nullopt;
    return (n - 1) / 2;
  }
  if (n < 2 || n % 2 != 0) return std::nullopt;
  return n / 2;
}

double Csr::at(int i, int j) const {
  for (int k = ptr[i]; k < ptr[i + 1]; ++k)
    if (idx[k] == j) return val[k];
  return 0.0;
}

Eigen::MatrixXd Csr::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = ptr[i]; k < ptr[i + 1]; ++k) m(i, idx[k]) += val[k];
  return m;
}

Csr Csr::from_dense(const Eigen::MatrixXd& m, double drop) {
  Csr c;
  c.rows = int(m.rows());
  c.cols = int(m.cols());
  for (int i = 0; i < c.rows; ++i) {
    for (int j = 0; j < c.cols; ++j)
      if (std::abs(m(i, j)) > drop) {
        c.idx.push_back(j);
        c.val.push_back(m(i, j));
      }
    c.ptr.push_back(int(c.idx.size()));
  }
  return c;
}

Csr Csr::identity(int n) {
  Csr c;
  c.rows = c.cols = n;
  for (int i = 0; i < n; ++i) {
    c.idx.push_back(i);
    c.val.push_back(1.0);
    c.ptr.push_back(i + 1);
  }
  return c;
}

Csr closure_matrix(Algebra alg, int n, const CosinePoly& stencil) {
  if (n < 1) throw std::invalid_argument("closure_matrix: n must be positive");
  const int k = stencil.degree();
  Csr c;
  c.rows = c.cols = n;
  std::map<int, double> row;
  for (int i = 1; i <= n; ++i) {
    row.clear();
    for (int o = -k; o <= k; ++o) {
      const double a = stencil.coeff(o);
      if (a == 0.0) continue;
      const auto [j, sign] = fold(alg, i + o, n);
      if (sign != 0) row[j - 1] += sign * a;
    }
    for (const auto& [j, v] : row)
      if (v != 0.0) {
        c.idx.push_back(j);
        c.val.push_back(v);
      }
    c.ptr.push_back(int(c.idx.size()));
  }
  return c;
}

std::size_t BandMatrix::column(std::size_t row, std::size_t slot) const {
  const auto [ns, nf] = axes(shape);
  const bool two = shape.d == 2;
  const int is = int(row / nf), i_f = int(row % nf);
  const int os = two ? offsets[slot][0] : 0;
  const int of = two ? offsets[slot][1] : offsets[slot][0];
  return std::size_t(wrap(is + os, ns)) * nf + wrap(i_f + of, nf);
}

int BandMatrix::width(int axis, double tol) const {
  int m = -1;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const bool nz = std::any_of(values[k].begin(), values[k].end(),
                                [tol](double v) { return std::abs(v) > tol; });
    if (nz) m = std::max(m, std::abs(offsets[k][axis]));
  }
  return m < 0 ? 0 : 2 * m + 1;
}

double BandMatrix::max_row_sum() const {
  Vec s(shape.size(), 0.0);
  for (const auto& v : values)
    for (std::size_t i = 0; i < v.size(); ++i) s[i] += std::abs(v[i]);
  return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
}

BandMatrix BandMatrix::diagonal(GridShape s, const Vec& d) {
  if (d.size() != s.size()) throw std::invalid_argument("diagonal: length mismatch");
  BandMatrix b(s);
  b.offsets.push_back({0, 0});
  b.values.push_back(d);
  return b;
}

BandMatrix BandMatrix::from_triplets(GridShape s, const std::vector<Eigen::Triplet<double>>& t) {
  const auto [ns, nf] = axes(s);
  const bool two = s.d == 2;
  BandMatrix b(s);
  std::map<std::array<int, 2>, std::size_t> slot;
  for (const auto& e : t) {
    const int r = e.row(), c = e.col();
    std::array<int, 2> o{0, 0};
    if (two) {
      o[0] = canonical(c / nf - r / nf, ns);
      o[1] = canonical(c % nf - r % nf, nf);
    } else {
      o[0] = canonical(c - r, nf);
    }
    auto it = slot.find(o);
    if (it == slot.end()) {
      it = slot.emplace(o, b.offsets.size()).first;
      b.offsets.push_back(o);
      b.values.emplace_back(s.size(), 0.0);
    }
    b.values[it->second][r] += e.value();
  }
  return b;
}

BandMatrix BandMatrix::from_sparse(GridShape s, const RowSparse& m, double drop) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < m.outerSize(); ++i)
    for (RowSparse::InnerIterator it(m, i); it; ++it)
      if (std::abs(it.value()) > drop) t.emplace_back(int(it.row()), int(it.col()), it.value());
  return from_triplets(s, t);
}

LevelOperator assemble_structured(Algebra alg, GridShape shape, const SymbolND& sym) {
  if (sym.dim != shape.d) throw std::invalid_argument("assemble_structured: symbol and shape dimensions differ");
  for (int a = 0; a < shape.d; ++a) {
    const int k = sym.factors[a].degree();
    if (k >= shape.n[a])
      throw std::invalid_argument("assemble_structured: bandwidth " + std::to_string(k) +
                                  " not below axis size " + std::to_string(shape.n[a]));
  }
  LevelOperator op;
  op.algebra = alg;
  op.shape = shape;
  op.correction = BandMatrix(shape);
  auto term = [&](std::vector<CosinePoly> st) {
    KronTerm t;
    for (int a = 0; a < shape.d; ++a) t.factors.push_back(closure_matrix(alg, shape.n[a], st[a]));
    t.stencils = std::move(st);
    op.structured.push_back(std::move(t));
  };
  if (shape.d == 1) {
    term({sym.factors[0]});
  } else if (sym.mode == SymbolMode::Product) {
    term({sym.factors[0], sym.factors[1]});
  } else {
    term({sym.factors[0], CosinePoly{1.0}});
    term({CosinePoly{1.0}, sym.factors[1]});
  }
  return op;
}

LevelOperator with_correction(LevelOperator op, BandMatrix d) {
  if (!(d.shape == op.shape)) throw std::invalid_argument("with_correction: shape mismatch");
  op.correction = std::move(d);
  return op;
}

RankOne strang_term(Algebra alg, GridShape shape, const SymbolND& sym) {
  if (alg == Algebra::Tau) throw std::invalid_argument("strang_term: only for circulant and DCT-III");
  // smallest nonzero eigenvalue of the structured part: first harmonic along axis 0
  const double n0 = double(shape.n[0]);
  const double theta = alg == Algebra::Circulant ? 2.0 * std::numbers::pi / n0 : std::numbers::pi / n0;
  const double f = shape.d == 1 ? eval(sym, theta) : eval(sym, theta, 0.0);
  return RankOne{Vec(shape.size(), std::sqrt(f / double(shape.size())))};
}

void apply_band(const LevelOperator& op, const double* x, double* y) {
  std::fill(y, y + op.size(), 0.0);
  for (const auto& t : op.structured) apply_term(t, op.shape, x, y);
  apply_correction(op.correction, x, y);
}

void matvec(const LevelOperator& op, const double* x, double* y) {
  apply_band(op, x, y);
  if (op.strang) {
    const Vec& v = op.strang->v;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * x[i];
    for (std::size_t i = 0; i < v.size(); ++i) y[i] += s * v[i];
  }
}

Vec matvec(const LevelOperator& op, const Vec& x) {
  if (x.size() != op.size()) throw std::invalid_argument("matvec: length mismatch");
  Vec y(x.size());
  matvec(op, x.data(), y.data());
  return y;
}

RowSparse to_sparse(const LevelOperator& op) {
  const std::size_t n = op.size();
  std::vector<Eigen::Triplet<double>> t;
  const int nf = op.shape.fast();
  for (const auto& term : op.structured) {
    if (op.shape.d == 1) {
      const Csr& a = term.factors[0];
      for (int i = 0; i < a.rows; ++i)
        for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) t.emplace_back(i, a.idx[k], a.val[k]);
      continue;
    }
    const Csr& l = term.factors[0];
    const Csr& r = term.factors[1];
    for (int i0 = 0; i0 < l.rows; ++i0)
      for (int a = l.ptr[i0]; a < l.ptr[i0 + 1]; ++a)
        for (int i1 = 0; i1 < r.rows; ++i1)
          for (int b = r.ptr[i1]; b < r.ptr[i1 + 1]; ++b)
            t.emplace_back(i0 * nf + i1, l.idx[a] * nf + r.idx[b], l.val[a] * r.val[b]);
  }
  const auto& c = op.correction;
  for (std::size_t k = 0; k < c.offsets.size(); ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (c.values[k][i] != 0.0) t.emplace_back(int(i), int(c.column(i, k)), c.values[k][i]);
  RowSparse m{Eigen::Index(n), Eigen::Index(n)};
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::MatrixXd materialize_dense(const LevelOperator& op, std::size_t cap) {
  if (op.size() > cap)
    throw std::length_error("materialize_dense: N = " + std::to_string(op.size()) + " exceeds cap " +
                            std::to_string(cap));
  Eigen::MatrixXd m = Eigen::MatrixXd(to_sparse(op));
  if (op.strang) {
    Eigen::Map<const Eigen::VectorXd> v(op.strang->v.data(), Eigen::Index(op.size()));
    m += v * v.transpose();
  }
  return m;
}

double gershgorin_bound(const LevelOperator& op) {
  const RowSparse m = to_sparse(op);
  double v1 = 0.0;
  if (op.strang)
    for (double x : op.strang->v) v1 += std::abs(x);
  double best = 0.0;
  for (int i = 0; i < m.outerSize(); ++i) {
    double s = 0.0;
    for (RowSparse::InnerIterator it(m, i); it; ++it) {
      double a = it.value();
      if (op.strang) a += op.strang->v[i] * op.strang->v[it.col()];
      s += std::abs(a);
    }
    // columns untouched by the sparse pattern still see the rank-one term
    if (op.strang) {
      double covered = 0.0;
      for (RowSparse::InnerIterator it(m, i); it; ++it) covered += std::abs(op.strang->v[it.col()]);
      s += std::abs(op.strang->v[i]) * (v1 - covered);
    }
    best = std::max(best, s);
  }
  return best;
}

double min_eig_formula_tau_1d(int n) {
  if (n < 1) throw std::invalid_argument("min_eig_formula_tau_1d: n must be positive");
  const double s = std::sin(std::numbers::pi / (2.0 * (n + 1)));
  return 4.0 * s * s;
}

}  // namespace sbmg
