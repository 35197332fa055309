#pragma once

#include <span>
#include <vector>

namespace sbmg {

// f(t) = c0 + sum_{j>=1} 2 c_j cos(j t)
struct CosinePoly {
  std::vector<double> coeffs{0.0};

  CosinePoly() = default;
  CosinePoly(std::vector<double> c);
  CosinePoly(std::initializer_list<double> c) : CosinePoly(std::vector<double>(c)) {}

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double coeff(int j) const;  // symmetric: coeff(-j) == coeff(j), zero past the degree
  double operator()(double t) const;
  bool operator==(const CosinePoly&) const = default;
};

CosinePoly operator*(const CosinePoly& a, const CosinePoly& b);
CosinePoly operator+(const CosinePoly& a, const CosinePoly& b);
CosinePoly operator*(double s, const CosinePoly& a);
CosinePoly pow(const CosinePoly& a, int k);
// drops trailing coefficients with |c| <= tol
CosinePoly trimmed(const CosinePoly& a, double tol = 0.0);

double sup_norm(const CosinePoly& f);

enum class SymbolMode { Sum, Product };

struct SymbolND {
  int dim = 1;
  SymbolMode mode = SymbolMode::Sum;
  std::vector<CosinePoly> factors;

  int degree(int axis) const { return factors.at(axis).degree(); }
};

SymbolND make_symbol(CosinePoly f);
SymbolND make_symbol(SymbolMode mode, CosinePoly f1, CosinePoly f2);

double eval(const SymbolND& sym, std::span<const double> t);
double eval(const SymbolND& sym, double t);
double eval(const SymbolND& sym, double t1, double t2);

// max |f| over [0,pi]^d: dense grid (>= 2048 points per axis) plus golden-section refinement
double sup_norm(const SymbolND& sym);

// sum_i (2 - 2 cos t_i)^q
SymbolND laplacian_symbol(int d, int q);
// prod_i (2 + 2 cos t_i)^w
SymbolND projector_symbol(int d, int w);

}  // namespace sbmg
