#include "sbmg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "sbmg/bench.hpp"

namespace sbmg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double max_gen_eig(const MatrixXd& a, const MatrixXd& b) {
  const MatrixXd as = 0.5 * (a + a.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(as, b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

double bnorm2(const MatrixXd& b, const VectorXd& x) { return x.dot(b * x); }

MatrixXd cgc_matrix(const MatrixXd& b, const MatrixXd& p) {
  const MatrixXd bc = p.transpose() * b * p;
  return MatrixXd::Identity(b.rows(), b.cols()) - p * bc.llt().solve(p.transpose() * b);
}

VectorXd random_vector(std::mt19937_64& g, Eigen::Index n) {
  std::normal_distribution<double> nd;
  VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = nd(g);
  return x;
}

}  // namespace

AlphaPair alpha_formulas(double omega_pre, double omega_post, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("alpha_formulas: M must be positive");
  auto check = [M](double w, const char* name) {
    if (!(w > 0.0 && w * M < 2.0))
      throw std::invalid_argument(std::string("alpha_formulas: ") + name + " outside (0, 2/M)");
  };
  check(omega_pre, "omega_pre");
  check(omega_post, "omega_post");
  AlphaPair a;
  a.post = omega_post * (2.0 - omega_post * M);
  if (omega_pre * M <= 1.5) {
    a.pre = 2.0 * omega_pre;
  } else {
    const double u = 1.0 - omega_pre * M;
    a.pre = omega_pre * (2.0 - omega_pre * M) / (u * u);
  }
  return a;
}

std::pair<double, double> smoothing_slack(const LevelOperator& op, const SmootherConfig& cfg, const VectorXd& x) {
  const MatrixXd b = materialize_dense(op);
  const double m = cfg.bound;
  const double wq = cfg.omega_post, wp = cfg.omega_pre;
  const double a_post = wq * (2.0 - wq * m);
  const double u = 1.0 - wp * m;
  const double a_pre = wp * m <= 1.5 ? 2.0 * wp : wp * (2.0 - wp * m) / (u * u);
  const VectorXd vq = x - wq * (b * x);
  const VectorXd vp = x - wp * (b * x);
  const double post = bnorm2(b, x) - a_post * (b * x).squaredNorm() - bnorm2(b, vq);
  const double pre = bnorm2(b, x) - a_pre * (b * vp).squaredNorm() - bnorm2(b, vp);
  return {post, pre};
}

SmoothingCheck verify_smoothing_property(const LevelOperator& op, const SmootherConfig& cfg, int samples,
                                         std::uint64_t seed) {
  const MatrixXd b = materialize_dense(op);
  SmoothingCheck c;
  const double m = cfg.bound;
  const double wq = cfg.omega_post, wp = cfg.omega_pre;
  c.alpha_post = wq * (2.0 - wq * m);
  const double u = 1.0 - wp * m;
  c.alpha_pre = wp * m <= 1.5 ? 2.0 * wp : wp * (2.0 - wp * m) / (u * u);
  c.worst_slack_post = c.worst_slack_pre = std::numeric_limits<double>::infinity();
  std::mt19937_64 g(seed);
  for (int s = 0; s < samples; ++s) {
    const VectorXd x = random_vector(g, b.rows());
    const double xb = bnorm2(b, x);
    const VectorXd bx = b * x;
    const VectorXd vq = x - wq * bx, vp = x - wp * bx;
    const double post = xb - c.alpha_post * bx.squaredNorm() - bnorm2(b, vq);
    const double pre = xb - c.alpha_pre * (b * vp).squaredNorm() - bnorm2(b, vp);
    c.worst_slack_post = std::min(c.worst_slack_post, post / xb);
    c.worst_slack_pre = std::min(c.worst_slack_pre, pre / xb);
  }
  // rounding allowance relative to ||x||_B^2
  c.pass = c.alpha_post > 0.0 && c.worst_slack_post >= -1e-12 && c.worst_slack_pre >= -1e-12;
  return c;
}

double estimate_beta(const LevelOperator& op, const Prolongation& p, BetaMode mode) {
  const MatrixXd b = materialize_dense(op);
  const MatrixXd pd = materialize_dense(p);
  if (mode == BetaMode::RangeCGC) {
    // min_y ||x - p y||^2 = x^T (I - P) x with P the orthogonal projector on range(p)
    const MatrixXd proj = pd * (pd.transpose() * pd).llt().solve(pd.transpose());
    return max_gen_eig(MatrixXd::Identity(b.rows(), b.cols()) - proj, b);
  }
  const MatrixXd c = cgc_matrix(b, pd);
  return max_gen_eig(c.transpose() * b * c, b * b);
}

MatrixXd error_propagator(const LevelHierarchy& h, const CycleConfig& cfg) {
  const std::size_t n = h.levels.front().op.size();
  if (n > kDenseCap) throw std::length_error("error_propagator: N exceeds the dense cap");
  MatrixXd e(n, n);
  Workspace ws = make_workspace(h);
  const Vec zero(n, 0.0);
  Vec x(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(x.begin(), x.end(), 0.0);
    x[j] = 1.0;
    mgm_vcycle(h, 0, x, zero, cfg, ws);
    for (std::size_t i = 0; i < n; ++i) e(i, j) = x[i];
  }
  return e;
}

double measure_contraction(const LevelHierarchy& h, const CycleConfig& cfg) {
  const MatrixXd b = materialize_dense(h.levels.front().op);
  const MatrixXd e = error_propagator(h, cfg);
  return std::sqrt(std::max(0.0, max_gen_eig(e.transpose() * b * e, b)));
}

BetaTransfer verify_beta_transfer(const LevelOperator& a, const LevelOperator& b, const Prolongation& p, double tol) {
  BetaTransfer t;
  const auto theta = check_order_relation(a, b);
  if (!theta) return t;
  t.theta = *theta;
  t.beta_a = estimate_beta(a, p, BetaMode::RangeCGC);
  t.beta_b = estimate_beta(b, p, BetaMode::RangeCGC);
  t.pass = t.beta_b <= t.theta * t.beta_a * (1.0 + tol) + tol;
  return t;
}

ChainCheck check_appendix_chains(const LevelHierarchy& h, int samples, std::uint64_t seed) {
  const Level& lv = h.levels.front();
  if (!lv.down) throw std::invalid_argument("check_appendix_chains: hierarchy has a single level");
  const MatrixXd b = materialize_dense(lv.op);
  const MatrixXd p = materialize_dense(*lv.down);
  const MatrixXd c = cgc_matrix(b, p);
  const SmootherConfig& sc = lv.smoother;
  const AlphaPair al = alpha_formulas(sc.omega_pre, sc.omega_post, sc.bound);
  const double beta = estimate_beta(lv.op, *lv.down, BetaMode::RangeCGC);
  const double beta_u = estimate_beta(lv.op, *lv.down, BetaMode::Unconditional);
  const MatrixXd id = MatrixXd::Identity(b.rows(), b.cols());
  const MatrixXd vpost = id - sc.omega_post * b, vpre = id - sc.omega_pre * b;
  ChainCheck r;
  std::mt19937_64 g(seed);
  for (int s = 0; s < samples; ++s) {
    const VectorXd x = random_vector(g, b.rows());
    const double xb = bnorm2(b, x);
    r.post_ratio = std::max(r.post_ratio, bnorm2(b, vpost * (c * x)) / ((1.0 - al.post / beta) * xb));
    r.pre_ratio = std::max(r.pre_ratio, bnorm2(b, c * (vpre * x)) * (1.0 + al.pre / beta_u) / xb);
  }
  r.pass = r.post_ratio <= 1.0 + 1e-10 && r.pre_ratio <= 1.0 + 1e-10;
  return r;
}

double lanczos_max(const std::function<void(const Vec&, Vec&)>& apply, std::size_t n, double rel_tol,
                   int max_steps, std::uint64_t seed, bool* converged) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec q(n), q_prev(n, 0.0), w(n);
  for (auto& v : q) v = u(g);
  double nq = norm2(q);
  for (auto& v : q) v /= nq;
  std::vector<double> alpha, beta;
  double last = 0.0, ritz = 0.0;
  bool ok = false;
  for (int k = 0; k < max_steps; ++k) {
    apply(q, w);
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += w[i] * q[i];
    const double bprev = beta.empty() ? 0.0 : beta.back();
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * q[i] + bprev * q_prev[i];
    alpha.push_back(a);
    const double bk = norm2(w);
    // tridiagonal Ritz values every few steps
    if (k % 5 == 4 || bk < 1e-14 || k + 1 == max_steps) {
      const int m = int(alpha.size());
      Eigen::VectorXd dd(m), ee(std::max(0, m - 1));
      for (int i = 0; i < m; ++i) dd(i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) ee(i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(dd, ee, Eigen::EigenvaluesOnly);
      ritz = es.eigenvalues().maxCoeff();
      if (k >= 9 && std::abs(ritz - last) <= rel_tol * 1e-3 * std::abs(ritz)) {
        ok = true;
        break;
      }
      last = ritz;
    }
    if (bk < 1e-14) {
      ok = true;
      break;
    }
    beta.push_back(bk);
    q_prev = q;
    for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / bk;
  }
  if (converged) *converged = ok;
  return ritz;
}

ConditionEstimate condition_number(const LevelOperator& op, CondMethod method, const LevelHierarchy* h,
                                   double rel_tol) {
  if (method == CondMethod::Auto) method = op.size() <= kDenseCap ? CondMethod::Dense : CondMethod::Iterative;
  ConditionEstimate c;
  c.method = method;
  if (method == CondMethod::Dense) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(materialize_dense(op), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return c;
    c.lambda_min = es.eigenvalues().minCoeff();
    c.lambda_max = es.eigenvalues().maxCoeff();
    c.kappa = c.lambda_max / c.lambda_min;
    c.converged = c.lambda_min > 0.0;
    return c;
  }
  if (!h) throw std::invalid_argument("condition_number: iterative method needs an MGM hierarchy");
  const std::size_t n = op.size();
  bool ok_max = false, ok_min = false;
  c.lambda_max = lanczos_max([&](const Vec& x, Vec& y) { matvec(op, x.data(), y.data()); }, n, rel_tol, 400, 3,
                             &ok_max);
  CycleConfig inner;
  inner.tol = 1e-12;
  inner.max_iter = 500;
  const double inv = lanczos_max(
      [&](const Vec& x, Vec& y) {
        auto [sol, rep] = solve(*h, x, inner);
        y = std::move(sol);
      },
      n, rel_tol, 400, 5, &ok_min);
  c.lambda_min = 1.0 / inv;
  c.kappa = c.lambda_max / c.lambda_min;
  c.converged = ok_max && ok_min;
  return c;
}

std::string TheoryCertificate::label() const {
  std::ostringstream os;
  os << to_string(config.algebra) << " " << config.d << "D n=" << config.n << " " << family_name(config.family)
     << " w=" << config.w;
  return os.str();
}

TheoryCertificate certify(const CertifyConfig& cfg) {
  TheoryCertificate t;
  t.config = cfg;
  const Problem pb = make_problem(cfg.algebra, cfg.d, cfg.n, 1, cfg.w, CorrectionSpec{cfg.family, cfg.seed});

  HierarchyOptions ho;
  ho.mode = CycleMode::TGM;
  ho.symbol = pb.symbol;
  ho.pre_factor = cfg.pre_factor;
  ho.nu_pre = 0;
  const LevelHierarchy post_only = build_hierarchy(pb.op, pb.psym, ho);
  ho.nu_pre = 1;
  const LevelHierarchy both = build_hierarchy(pb.op, pb.psym, ho);

  const Level& lv = both.levels.front();
  const SmootherConfig& sc = lv.smoother;
  const AlphaPair al = alpha_formulas(sc.omega_pre, sc.omega_post, sc.bound);
  t.alpha_pre = al.pre;
  t.alpha_post = al.post;
  t.beta = estimate_beta(lv.op, *lv.down, BetaMode::RangeCGC);
  t.beta_unconditional = estimate_beta(lv.op, *lv.down, BetaMode::Unconditional);
  t.bound = std::sqrt(1.0 - t.alpha_post / t.beta);
  t.bound_pre_post = std::sqrt((1.0 - t.alpha_post / t.beta_unconditional) / (1.0 + t.alpha_pre / t.beta_unconditional));
  t.measured_contraction = measure_contraction(post_only);
  t.measured_pre_post = measure_contraction(both);
  t.smoothing = verify_smoothing_property(lv.op, sc, cfg.samples, cfg.seed);
  t.chains = check_appendix_chains(both, cfg.samples, cfg.seed);

  // reference A: structured part, with the Strang term where the structured part alone is singular
  LevelOperator a = pb.op;
  a.correction = BandMatrix(a.shape);
  if (cfg.algebra != Algebra::Tau && !a.strang) a.strang = strang_term(cfg.algebra, a.shape, pb.symbol);
  t.transfer = verify_beta_transfer(a, pb.op, *lv.down);
  t.theta = t.transfer.theta;

  t.beta_ge_alpha = t.beta >= t.alpha_post;
  t.contraction_ok = t.measured_contraction <= t.bound + 1e-6;
  t.pass = t.beta_ge_alpha && t.bound > 0.0 && t.bound < 1.0 && t.contraction_ok && t.smoothing.pass &&
           t.chains.pass && t.transfer.pass;
  return t;
}

}  // namespace sbmg
