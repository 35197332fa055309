#include "sbmg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "sbmg/solvers.hpp"

namespace sbmg {

namespace {

using ColSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

RowSparse to_eigen(const Csr& a) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < a.rows; ++i)
    for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) t.emplace_back(i, a.idx[k], a.val[k]);
  RowSparse m(a.rows, a.cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Csr from_eigen(const RowSparse& m) {
  Csr c;
  c.rows = int(m.rows());
  c.cols = int(m.cols());
  for (int i = 0; i < m.outerSize(); ++i) {
    for (RowSparse::InnerIterator it(m, i); it; ++it)
      if (it.value() != 0.0) {
        c.idx.push_back(int(it.col()));
        c.val.push_back(it.value());
      }
    c.ptr.push_back(int(c.idx.size()));
  }
  return c;
}

Csr transpose(const Csr& a) { return from_eigen(RowSparse(to_eigen(a).transpose())); }

double max_abs(const RowSparse& m) {
  double s = 0.0;
  for (int i = 0; i < m.outerSize(); ++i)
    for (RowSparse::InnerIterator it(m, i); it; ++it) s = std::max(s, std::abs(it.value()));
  return s;
}

RowSparse pruned(const RowSparse& m, double tol) {
  RowSparse r = m;
  r.prune([tol](int, int, double v) { return std::abs(v) > tol; });
  return r;
}

thread_local Vec tl_kron;

// y = (a0 (x) a1) x, overwriting y; a1 is absent in 1D
void apply_kron(const Csr& a0, const Csr* a1, const double* x, double* y) {
  if (!a1) {
    for (int i = 0; i < a0.rows; ++i) {
      double acc = 0.0;
      for (int k = a0.ptr[i]; k < a0.ptr[i + 1]; ++k) acc += a0.val[k] * x[a0.idx[k]];
      y[i] = acc;
    }
    return;
  }
  const int c0 = a0.cols, r1 = a1->rows, c1 = a1->cols;
  tl_kron.resize(std::size_t(c0) * r1);
  double* z = tl_kron.data();
  for (int j0 = 0; j0 < c0; ++j0) {
    const double* xr = x + std::size_t(j0) * c1;
    double* zr = z + std::size_t(j0) * r1;
    for (int i1 = 0; i1 < r1; ++i1) {
      double acc = 0.0;
      for (int k = a1->ptr[i1]; k < a1->ptr[i1 + 1]; ++k) acc += a1->val[k] * xr[a1->idx[k]];
      zr[i1] = acc;
    }
  }
  std::fill(y, y + std::size_t(a0.rows) * r1, 0.0);
  for (int i0 = 0; i0 < a0.rows; ++i0) {
    double* yr = y + std::size_t(i0) * r1;
    for (int k = a0.ptr[i0]; k < a0.ptr[i0 + 1]; ++k) {
      const double a = a0.val[k];
      const double* zr = z + std::size_t(a0.idx[k]) * r1;
      for (int i1 = 0; i1 < r1; ++i1) yr[i1] += a * zr[i1];
    }
  }
}

RowSparse kron(const RowSparse& a, const RowSparse& b) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(a.nonZeros()) * std::size_t(b.nonZeros()));
  for (int i = 0; i < a.outerSize(); ++i)
    for (RowSparse::InnerIterator x(a, i); x; ++x)
      for (int j = 0; j < b.outerSize(); ++j)
        for (RowSparse::InnerIterator y(b, j); y; ++y)
          t.emplace_back(int(x.row() * b.rows() + y.row()), int(x.col() * b.cols() + y.col()),
                         x.value() * y.value());
  RowSparse m(a.rows() * b.rows(), a.cols() * b.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// interior stencil of s^2 T^T A(p^2 f) T
CosinePoly coarse_stencil(Algebra alg, const CosinePoly& f, const CosinePoly& p, double s) {
  const CosinePoly h = p * p * f;
  const int m = h.degree() / 2 + 1;
  std::vector<double> g(m + 1, 0.0);
  for (int j = 0; j <= m; ++j) {
    g[j] = alg == Algebra::Dct3 ? 2.0 * h.coeff(2 * j) + h.coeff(2 * j + 1) + h.coeff(2 * j - 1)
                                : h.coeff(2 * j);
    g[j] *= s * s;
  }
  double big = 0.0;
  for (double v : g) big = std::max(big, std::abs(v));
  return trimmed(CosinePoly(std::move(g)), 1e-15 * big);
}

void append(std::vector<Eigen::Triplet<double>>& t, const RowSparse& m) {
  for (int i = 0; i < m.outerSize(); ++i)
    for (RowSparse::InnerIterator it(m, i); it; ++it) t.emplace_back(int(it.row()), int(it.col()), it.value());
}

}  // namespace

Csr cutting_operator(Algebra alg, int n_fine) {
  const auto nc = coarse_size(alg, n_fine);
  if (!nc)
    throw std::invalid_argument("cutting_operator: size " + std::to_string(n_fine) + " breaks the " +
                                std::string(to_string(alg)) + " parity rule");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_fine, *nc);
  for (int j = 0; j < *nc; ++j) {
    switch (alg) {
      case Algebra::Tau: t(2 * j + 1, j) = 1.0; break;
      case Algebra::Circulant: t(2 * j, j) = 1.0; break;
      case Algebra::Dct3:
        t(2 * j, j) = 1.0;
        t(2 * j + 1, j) = 1.0;
        break;
    }
  }
  return Csr::from_dense(t);
}

Prolongation build_prolongation(Algebra alg, GridShape fine, const SymbolND& psym) {
  if (psym.dim != fine.d) throw std::invalid_argument("build_prolongation: symbol and shape dimensions differ");
  if (fine.d == 2 && psym.mode != SymbolMode::Product)
    throw std::invalid_argument("build_prolongation: 2D projector symbol must be a product");
  Prolongation p;
  p.algebra = alg;
  p.fine = fine;
  p.coarse = fine;
  p.axis_scale = alg == Algebra::Tau ? 1.0 / std::sqrt(2.0) : 1.0;
  for (int a = 0; a < fine.d; ++a) {
    const Csr t = cutting_operator(alg, fine.n[a]);
    p.coarse.n[a] = t.cols;
    RowSparse pa = p.axis_scale * (to_eigen(closure_matrix(alg, fine.n[a], psym.factors[a])) * to_eigen(t));
    p.factors.push_back(from_eigen(pa));
    p.transposed.push_back(transpose(p.factors.back()));
    p.symbols.push_back(psym.factors[a]);
  }
  return p;
}

void prolong(const Prolongation& p, const double* coarse, double* fine) {
  apply_kron(p.factors[0], p.fine.d == 2 ? &p.factors[1] : nullptr, coarse, fine);
}

void restrict_to_coarse(const Prolongation& p, const double* fine, double* coarse) {
  apply_kron(p.transposed[0], p.fine.d == 2 ? &p.transposed[1] : nullptr, fine, coarse);
}

RowSparse to_sparse(const Prolongation& p) {
  RowSparse m = to_eigen(p.factors[0]);
  if (p.fine.d == 2) m = kron(m, to_eigen(p.factors[1]));
  return m;
}

Eigen::MatrixXd materialize_dense(const Prolongation& p, std::size_t cap) {
  if (p.fine.size() > cap) throw std::length_error("materialize_dense: prolongation exceeds cap");
  return Eigen::MatrixXd(to_sparse(p));
}

LevelOperator galerkin_coarsen(const LevelOperator& op, const Prolongation& p) {
  if (!(op.shape == p.fine) || op.algebra != p.algebra)
    throw std::invalid_argument("galerkin_coarsen: operator and prolongation do not conform");
  const int d = op.shape.d;
  LevelOperator c;
  c.algebra = op.algebra;
  c.shape = p.coarse;
  std::vector<Eigen::Triplet<double>> deviation;

  std::vector<RowSparse> pa(d);
  for (int a = 0; a < d; ++a) pa[a] = to_eigen(p.factors[a]);

  for (const auto& term : op.structured) {
    KronTerm ct;
    std::vector<RowSparse> exact(d), closed(d), delta(d);
    for (int a = 0; a < d; ++a) {
      exact[a] = RowSparse(pa[a].transpose() * to_eigen(term.factors[a]) * pa[a]);
      const CosinePoly g = coarse_stencil(op.algebra, term.stencils[a], p.symbols[a], p.axis_scale);
      ct.factors.push_back(closure_matrix(op.algebra, p.coarse.n[a], g));
      ct.stencils.push_back(g);
      closed[a] = to_eigen(ct.factors.back());
      delta[a] = pruned(RowSparse(exact[a] - closed[a]), 1e-13 * std::max(1.0, max_abs(exact[a])));
    }
    // exact product minus closure product, kept in the correction
    if (d == 1) {
      append(deviation, delta[0]);
    } else {
      if (delta[0].nonZeros()) append(deviation, kron(delta[0], exact[1]));
      if (delta[1].nonZeros()) append(deviation, kron(closed[0], delta[1]));
    }
    c.structured.push_back(std::move(ct));
  }

  if (!op.correction.empty()) {
    LevelOperator only;
    only.shape = op.shape;
    only.correction = op.correction;
    const RowSparse pf = to_sparse(p);
    const RowSparse dc = RowSparse(pf.transpose() * to_sparse(only) * pf);
    append(deviation, dc);
  }
  RowSparse corr(int(c.shape.size()), int(c.shape.size()));
  corr.setFromTriplets(deviation.begin(), deviation.end());
  c.correction = BandMatrix::from_sparse(c.shape, corr, 1e-15 * max_abs(corr));

  if (op.strang) {
    RankOne r{Vec(c.shape.size())};
    restrict_to_coarse(p, op.strang->v.data(), r.v.data());
    c.strang = std::move(r);
  }
  return c;
}

struct CoarseSolver::Impl {
  enum class Kind { Dense, Sparse, Augmented } kind = Kind::Dense;
  Eigen::LLT<Eigen::MatrixXd> dense;
  Eigen::SimplicialLLT<ColSparse> sparse;
  Eigen::SparseLU<ColSparse> augmented;
  std::size_t n = 0;
};

CoarseSolver::CoarseSolver(const LevelOperator& op) : n_(op.size()) {
  auto impl = std::make_shared<Impl>();
  impl->n = n_;
  if (n_ <= kDenseDirect) {
    impl->kind = Impl::Kind::Dense;
    impl->dense.compute(materialize_dense(op, kDenseDirect));
    if (impl->dense.info() != Eigen::Success)
      throw FactorizationError("coarse operator is not positive definite (dense Cholesky failed)");
  } else if (!op.strang) {
    impl->kind = Impl::Kind::Sparse;
    impl->sparse.compute(ColSparse(to_sparse(op)));
    if (impl->sparse.info() != Eigen::Success)
      throw FactorizationError("coarse operator is not positive definite (sparse Cholesky failed)");
  } else {
    // [S v; v^T -1] [x; y] = [b; 0] gives (S + v v^T) x = b
    impl->kind = Impl::Kind::Augmented;
    const RowSparse s = to_sparse(op);
    std::vector<Eigen::Triplet<double>> t;
    append(t, s);
    const int n = int(n_);
    for (int i = 0; i < n; ++i) {
      const double v = op.strang->v[i];
      if (v != 0.0) {
        t.emplace_back(i, n, v);
        t.emplace_back(n, i, v);
      }
    }
    t.emplace_back(n, n, -1.0);
    ColSparse a(n + 1, n + 1);
    a.setFromTriplets(t.begin(), t.end());
    impl->augmented.compute(a);
    if (impl->augmented.info() != Eigen::Success)
      throw FactorizationError("coarse operator is singular (sparse LU failed)");
  }
  impl_ = std::move(impl);
}

void CoarseSolver::solve(const double* b, double* x) const {
  if (!impl_) throw std::logic_error("CoarseSolver: not factorized");
  const auto n = Eigen::Index(n_);
  Eigen::Map<const Eigen::VectorXd> bv(b, n);
  Eigen::Map<Eigen::VectorXd> xv(x, n);
  switch (impl_->kind) {
    case Impl::Kind::Dense: xv = impl_->dense.solve(bv); break;
    case Impl::Kind::Sparse: xv = impl_->sparse.solve(bv); break;
    case Impl::Kind::Augmented: {
      Eigen::VectorXd r(n + 1);
      r.head(n) = bv;
      r(n) = 0.0;
      xv = impl_->augmented.solve(r).head(n);
      break;
    }
  }
}

std::vector<int> size_ladder(Algebra alg, int n, std::size_t cap, int d, CycleMode mode) {
  std::vector<int> ladder{n};
  auto total = [d](int m) { return d == 2 ? std::size_t(m) * m : std::size_t(m); };
  while (mode == CycleMode::TGM ? ladder.size() < 2 : total(ladder.back()) > cap) {
    const auto next = coarse_size(alg, ladder.back());
    if (!next)
      throw std::invalid_argument("size ladder from " + std::to_string(n) + " breaks the " +
                                  std::string(to_string(alg)) + " parity rule at " +
                                  std::to_string(ladder.back()));
    ladder.push_back(*next);
  }
  return ladder;
}

LevelHierarchy build_hierarchy(const LevelOperator& fine, const SymbolND& psym, const HierarchyOptions& opt) {
  const int d = fine.shape.d;
  const std::size_t cap = opt.coarsest_cap ? opt.coarsest_cap : (d == 2 ? 256u : 16u);
  // validate the whole ladder before any coarsening work
  GridShape s = fine.shape;
  for (int steps = 0; opt.mode == CycleMode::TGM ? steps < 1 : s.size() > cap; ++steps)
    for (int a = 0; a < d; ++a) {
      const auto next = coarse_size(fine.algebra, s.n[a]);
      if (!next)
        throw std::invalid_argument("size ladder from " + std::to_string(fine.shape.n[a]) + " breaks the " +
                                    std::string(to_string(fine.algebra)) + " parity rule at " +
                                    std::to_string(s.n[a]));
      s.n[a] = *next;
    }

  LevelHierarchy h;
  h.mode = opt.mode;
  h.levels.push_back(Level{fine, std::nullopt, {}, {}});
  while (opt.mode == CycleMode::TGM ? h.levels.size() < 2 : h.levels.back().op.size() > cap) {
    Level& cur = h.levels.back();
    Prolongation p = build_prolongation(fine.algebra, cur.op.shape, psym);
    LevelOperator next = galerkin_coarsen(cur.op, p);
    cur.down = std::move(p);
    h.levels.push_back(Level{std::move(next), std::nullopt, {}, {}});
  }

  SmootherConfig finest;
  for (std::size_t s = 0; s + 1 < h.levels.size(); ++s) {
    Level& lv = h.levels[s];
    const SymbolND* sym = nullptr;
    if (s == 0 && opt.symbol && opt.omega_rule != OmegaRule::Gershgorin) sym = &*opt.symbol;
    SmootherConfig cfg = (opt.omega_rule == OmegaRule::Finest && s > 0)
                             ? finest
                             : level_smoother_params(lv.op, sym, lv.op.correction.max_row_sum(), opt.smoother,
                                                     opt.pre_factor, opt.post_factor);
    cfg.nu_pre = opt.nu_pre;
    cfg.nu_post = opt.nu_post;
    if (s == 0) finest = cfg;
    lv.smoother = cfg;
    if (opt.smoother == SmootherKind::GaussSeidel) lv.rows = to_sparse(lv.op);
  }
  h.coarse = CoarseSolver(h.levels.back().op);
  return h;
}

std::optional<double> check_order_relation(const LevelOperator& a, const LevelOperator& b) {
  if (!(a.shape == b.shape)) throw std::invalid_argument("check_order_relation: shapes differ");
  const Eigen::MatrixXd ma = materialize_dense(a), mb = materialize_dense(b);
  Eigen::LLT<Eigen::MatrixXd> llt(mb);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ma, mb, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return std::nullopt;
  return es.eigenvalues().maxCoeff();
}

}  // namespace sbmg
