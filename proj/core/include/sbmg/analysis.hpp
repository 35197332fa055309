#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "sbmg/solvers.hpp"

namespace sbmg {

struct AlphaPair {
  double pre = 0.0, post = 0.0;
};

// throws std::invalid_argument unless 0 < omega < 2/M for both phases
AlphaPair alpha_formulas(double omega_pre, double omega_post, double M);

struct SmoothingCheck {
  bool pass = false;
  double alpha_pre = 0.0, alpha_post = 0.0;
  // min over samples of rhs - lhs, normalised by ||x||_B^2; negative means violated
  double worst_slack_pre = 0.0, worst_slack_post = 0.0;
};

// samples random vectors; the slack of the pre/post inequality is evaluated with the raw alpha expressions
SmoothingCheck verify_smoothing_property(const LevelOperator& op, const SmootherConfig& cfg, int samples,
                                         std::uint64_t seed = 7);
// same inequalities for one given vector, unnormalised slack (post, pre)
std::pair<double, double> smoothing_slack(const LevelOperator& op, const SmootherConfig& cfg,
                                          const Eigen::VectorXd& x);

enum class BetaMode { RangeCGC, Unconditional };

double estimate_beta(const LevelOperator& op, const Prolongation& p, BetaMode mode);

// B-energy norm of the one-cycle error propagator, materialised column by column
double measure_contraction(const LevelHierarchy& h, const CycleConfig& cfg = {});
Eigen::MatrixXd error_propagator(const LevelHierarchy& h, const CycleConfig& cfg = {});

struct BetaTransfer {
  double beta_a = 0.0, beta_b = 0.0, theta = 0.0;
  bool pass = false;
};

BetaTransfer verify_beta_transfer(const LevelOperator& a, const LevelOperator& b, const Prolongation& p,
                                  double tol = 1e-9);

struct ChainCheck {
  // max over samples of lhs / rhs; <= 1 means the inequality holds
  double post_ratio = 0.0, pre_ratio = 0.0;
  bool pass = false;
};

// ||V_post C x||_B^2 <= (1 - a_post/b) ||x||_B^2  and  ||C V_pre x||_B^2 <= ||x||_B^2 / (1 + a_pre/b')
ChainCheck check_appendix_chains(const LevelHierarchy& h, int samples, std::uint64_t seed = 11);

enum class CondMethod { Auto, Dense, Iterative };

struct ConditionEstimate {
  double kappa = 0.0, lambda_min = 0.0, lambda_max = 0.0;
  bool converged = false;
  CondMethod method = CondMethod::Dense;
};

// Auto picks dense up to kDenseCap; the iterative path needs an MGM hierarchy of op for the inverse
ConditionEstimate condition_number(const LevelOperator& op, CondMethod method = CondMethod::Auto,
                                   const LevelHierarchy* h = nullptr, double rel_tol = 1e-3);

// largest eigenvalue of a symmetric operator by three-term Lanczos
double lanczos_max(const std::function<void(const Vec&, Vec&)>& apply, std::size_t n, double rel_tol,
                   int max_steps, std::uint64_t seed, bool* converged = nullptr);

struct CertifyConfig {
  Algebra algebra = Algebra::Tau;
  int d = 1;
  int n = 31;
  int family = 0;  // d0..d4
  int w = 1;
  double pre_factor = 1.0;  // keeps omega_pre inside (0, 2/M) for the pre chain
  int samples = 100;
  std::uint64_t seed = 11;
};

struct TheoryCertificate {
  CertifyConfig config;
  double alpha_pre = 0.0, alpha_post = 0.0;
  double beta = 0.0, beta_unconditional = 0.0, theta = 0.0;
  double bound = 0.0, bound_pre_post = 0.0;
  double measured_contraction = 0.0, measured_pre_post = 0.0;
  SmoothingCheck smoothing;
  ChainCheck chains;
  BetaTransfer transfer;
  bool beta_ge_alpha = false, contraction_ok = false, pass = false;
  std::string label() const;
};

TheoryCertificate certify(const CertifyConfig& cfg);

}  // namespace sbmg
