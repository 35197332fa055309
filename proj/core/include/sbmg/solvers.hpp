#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sbmg/hierarchy.hpp"

namespace sbmg {

enum class Phase { Pre, Post };

struct CycleConfig {
  int rho = 0;                 // nu_s = nu_0 + s * rho
  bool rho_post_only = false;  // apply the increment to post-smoothing only
  double tol = 1e-7;
  int max_iter = 1000;
};

struct SolveReport {
  int iterations = 0;
  Vec residual_history;  // relative residuals, entry 0 is the initial one
  bool converged = false;
  bool breakdown = false;
  double wall_seconds = 0.0;
  std::string config;
};

// omega_pre = pre_factor / M, omega_post = post_factor / M; M = sup_norm(sym) + correction norm when sym is
// given, the Gershgorin bound of op otherwise
SmootherConfig level_smoother_params(const LevelOperator& op, const SymbolND* sym, double fine_correction_norm,
                                     SmootherKind kind = SmootherKind::Richardson, double pre_factor = 2.0,
                                     double post_factor = 1.0);

void smooth(const Level& lv, Vec& x, const Vec& b, const SmootherConfig& cfg, Phase phase);
void smooth(const LevelOperator& op, Vec& x, const Vec& b, const SmootherConfig& cfg, Phase phase);

// per-level scratch, reusable across cycles of one hierarchy
struct Workspace {
  std::vector<Vec> r, bc, xc;
};
Workspace make_workspace(const LevelHierarchy& h);

void tgm_iterate(const LevelHierarchy& h, Vec& x, const Vec& b, const CycleConfig& cfg = {});
void mgm_vcycle(const LevelHierarchy& h, std::size_t level, Vec& x, const Vec& b, const CycleConfig& cfg = {});
void mgm_vcycle(const LevelHierarchy& h, std::size_t level, Vec& x, const Vec& b, const CycleConfig& cfg,
                Workspace& ws);

// repeats cycles from x = 0 until ||b - Bx|| / ||b|| < tol
std::pair<Vec, SolveReport> solve(const LevelHierarchy& h, const Vec& b, const CycleConfig& cfg = {});

std::pair<Vec, SolveReport> cg_solve(const LevelOperator& op, const Vec& b, double tol = 1e-7, int max_iter = 100000);

double norm2(const Vec& x);

}  // namespace sbmg
