#include "sbmg/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace sbmg {

namespace {

using Clock = std::chrono::steady_clock;

void residual(const LevelOperator& op, const Vec& x, const Vec& b, Vec& r) {
  r.resize(b.size());
  matvec(op, x.data(), r.data());
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - r[i];
}

void richardson(const LevelOperator& op, Vec& x, const Vec& b, double omega, int nu) {
  Vec r(b.size());
  for (int k = 0; k < nu; ++k) {
    residual(op, x, b, r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += omega * r[i];
  }
}

void gauss_seidel(const RowSparse& a, const std::optional<RankOne>& strang, Vec& x, const Vec& b, int nu) {
  const std::size_t n = x.size();
  for (int k = 0; k < nu; ++k) {
    double s = 0.0;
    if (strang)
      for (std::size_t i = 0; i < n; ++i) s += strang->v[i] * x[i];
    for (std::size_t i = 0; i < n; ++i) {
      double sigma = 0.0, diag = 0.0;
      for (RowSparse::InnerIterator it(a, int(i)); it; ++it) {
        if (std::size_t(it.col()) == i) diag += it.value();
        else sigma += it.value() * x[it.col()];
      }
      double vi = 0.0;
      if (strang) {
        vi = strang->v[i];
        sigma += vi * (s - vi * x[i]);
        diag += vi * vi;
      }
      const double xi = (b[i] - sigma) / diag;
      s += vi * (xi - x[i]);
      x[i] = xi;
    }
  }
}

void smooth_impl(const LevelOperator& op, const RowSparse* rows, Vec& x, const Vec& b, const SmootherConfig& cfg,
                 Phase phase, int nu) {
  if (nu <= 0) return;
  // Gauss-Seidel replaces the post-smoother only
  if (cfg.kind == SmootherKind::GaussSeidel && phase == Phase::Post) {
    if (rows && rows->rows() == Eigen::Index(op.size())) {
      gauss_seidel(*rows, op.strang, x, b, nu);
    } else {
      gauss_seidel(to_sparse(op), op.strang, x, b, nu);
    }
    return;
  }
  richardson(op, x, b, phase == Phase::Pre ? cfg.omega_pre : cfg.omega_post, nu);
}

void cycle(const LevelHierarchy& h, std::size_t s, Vec& x, const Vec& b, const CycleConfig& cfg, Workspace& ws) {
  if (s + 1 == h.levels.size()) {
    h.coarse.solve(b.data(), x.data());
    return;
  }
  const Level& lv = h.levels[s];
  const SmootherConfig& sc = lv.smoother;
  const int extra = cfg.rho * int(s);
  const int nu_pre = sc.nu_pre > 0 ? sc.nu_pre + (cfg.rho_post_only ? 0 : extra) : 0;
  const int nu_post = sc.nu_post > 0 ? sc.nu_post + extra : 0;
  const RowSparse* rows = lv.rows.rows() ? &lv.rows : nullptr;

  smooth_impl(lv.op, rows, x, b, sc, Phase::Pre, nu_pre);
  Vec& r = ws.r[s];
  residual(lv.op, x, b, r);
  Vec& bc = ws.bc[s + 1];
  Vec& xc = ws.xc[s + 1];
  restrict_to_coarse(*lv.down, r.data(), bc.data());
  std::fill(xc.begin(), xc.end(), 0.0);
  cycle(h, s + 1, xc, bc, cfg, ws);
  prolong(*lv.down, xc.data(), r.data());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += r[i];
  smooth_impl(lv.op, rows, x, b, sc, Phase::Post, nu_post);
}

std::string describe(const LevelHierarchy& h, const CycleConfig& cfg) {
  std::ostringstream os;
  os << (h.mode == CycleMode::TGM ? "tgm" : "mgm") << " levels=" << h.depth() << " rho=" << cfg.rho
     << (cfg.rho_post_only ? " post-only" : "") << " tol=" << cfg.tol;
  if (!h.levels.empty()) {
    const auto& sc = h.levels.front().smoother;
    os << " smoother=" << (sc.kind == SmootherKind::Richardson ? "richardson" : "gs-post")
       << " omega_pre=" << sc.omega_pre << " omega_post=" << sc.omega_post;
  }
  return os.str();
}

}  // namespace

double norm2(const Vec& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

SmootherConfig level_smoother_params(const LevelOperator& op, const SymbolND* sym, double fine_correction_norm,
                                     SmootherKind kind, double pre_factor, double post_factor) {
  const double m = sym ? sup_norm(*sym) + fine_correction_norm : gershgorin_bound(op);
  SmootherConfig c;
  c.kind = kind;
  c.bound = m;
  c.omega_pre = pre_factor / m;
  c.omega_post = post_factor / m;
  return c;
}

void smooth(const Level& lv, Vec& x, const Vec& b, const SmootherConfig& cfg, Phase phase) {
  smooth_impl(lv.op, lv.rows.rows() ? &lv.rows : nullptr, x, b, cfg, phase,
              phase == Phase::Pre ? cfg.nu_pre : cfg.nu_post);
}

void smooth(const LevelOperator& op, Vec& x, const Vec& b, const SmootherConfig& cfg, Phase phase) {
  smooth_impl(op, nullptr, x, b, cfg, phase, phase == Phase::Pre ? cfg.nu_pre : cfg.nu_post);
}

Workspace make_workspace(const LevelHierarchy& h) {
  Workspace ws;
  for (const auto& lv : h.levels) {
    ws.r.emplace_back(lv.op.size());
    ws.bc.emplace_back(lv.op.size());
    ws.xc.emplace_back(lv.op.size());
  }
  return ws;
}

void mgm_vcycle(const LevelHierarchy& h, std::size_t level, Vec& x, const Vec& b, const CycleConfig& cfg,
                Workspace& ws) {
  if (level >= h.levels.size()) throw std::out_of_range("mgm_vcycle: level out of range");
  if (x.size() != h.levels[level].op.size() || b.size() != x.size())
    throw std::invalid_argument("mgm_vcycle: length mismatch");
  cycle(h, level, x, b, cfg, ws);
}

void mgm_vcycle(const LevelHierarchy& h, std::size_t level, Vec& x, const Vec& b, const CycleConfig& cfg) {
  Workspace ws = make_workspace(h);
  mgm_vcycle(h, level, x, b, cfg, ws);
}

void tgm_iterate(const LevelHierarchy& h, Vec& x, const Vec& b, const CycleConfig& cfg) {
  if (h.mode != CycleMode::TGM || h.depth() != 2) throw std::invalid_argument("tgm_iterate: hierarchy is not TGM");
  Workspace ws = make_workspace(h);
  cycle(h, 0, x, b, cfg, ws);
}

std::pair<Vec, SolveReport> solve(const LevelHierarchy& h, const Vec& b, const CycleConfig& cfg) {
  const LevelOperator& op = h.levels.front().op;
  if (b.size() != op.size()) throw std::invalid_argument("solve: length mismatch");
  const auto t0 = Clock::now();
  SolveReport rep;
  rep.config = describe(h, cfg);
  Vec x(b.size(), 0.0), r(b.size());
  const double nb = norm2(b);
  rep.residual_history.push_back(nb > 0.0 ? 1.0 : 0.0);
  if (nb == 0.0 || 1.0 < cfg.tol) {
    rep.converged = true;
  } else {
    Workspace ws = make_workspace(h);
    for (int it = 1; it <= cfg.max_iter; ++it) {
      cycle(h, 0, x, b, cfg, ws);
      residual(op, x, b, r);
      const double rel = norm2(r) / nb;
      rep.residual_history.push_back(rel);
      rep.iterations = it;
      if (!std::isfinite(rel)) break;
      if (rel < cfg.tol) {
        rep.converged = true;
        break;
      }
    }
  }
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return {std::move(x), std::move(rep)};
}

std::pair<Vec, SolveReport> cg_solve(const LevelOperator& op, const Vec& b, double tol, int max_iter) {
  if (b.size() != op.size()) throw std::invalid_argument("cg_solve: length mismatch");
  const auto t0 = Clock::now();
  SolveReport rep;
  rep.config = "cg tol=" + std::to_string(tol);
  const std::size_t n = b.size();
  Vec x(n, 0.0), r = b, p = b, q(n);
  const double nb = norm2(b);
  rep.residual_history.push_back(nb > 0.0 ? 1.0 : 0.0);
  double rr = nb * nb;
  if (nb == 0.0 || 1.0 < tol) rep.converged = true;
  for (int it = 1; !rep.converged && it <= max_iter; ++it) {
    matvec(op, p.data(), q.data());
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    if (!(pq > 0.0)) {
      rep.breakdown = true;
      break;
    }
    const double alpha = rr / pq;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      rr_new += r[i] * r[i];
    }
    rep.iterations = it;
    const double rel = std::sqrt(rr_new) / nb;
    rep.residual_history.push_back(rel);
    if (rel < tol) {
      rep.converged = true;
      break;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return {std::move(x), std::move(rep)};
}

}  // namespace sbmg
