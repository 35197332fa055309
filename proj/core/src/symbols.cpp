#include "sbmg/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sbmg {

namespace {

constexpr int kSamples = 2048;
constexpr double kTol = 1e-12;

// golden-section argmax of g on [a,b]; ends are candidates too
template <class G>
double golden_argmax(G&& g, double a, double b) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  const double a0 = a, b0 = b;
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  while (b - a > kTol) {
    if (gc >= gd) {
      b = d; d = c; gd = gc;
      c = b - r * (b - a); gc = g(c);
    } else {
      a = c; c = d; gc = gd;
      d = a + r * (b - a); gd = g(d);
    }
  }
  double t = 0.5 * (a + b);
  if (g(a0) > g(t)) t = a0;
  if (g(b0) > g(t)) t = b0;
  return t;
}

std::vector<double> sample(const CosinePoly& f) {
  std::vector<double> v(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) v[i] = f(std::numbers::pi * i / kSamples);
  return v;
}

}  // namespace

CosinePoly::CosinePoly(std::vector<double> c) : coeffs(std::move(c)) {
  if (coeffs.empty()) throw std::invalid_argument("CosinePoly needs at least one coefficient");
}

double CosinePoly::coeff(int j) const {
  j = std::abs(j);
  return j < static_cast<int>(coeffs.size()) ? coeffs[j] : 0.0;
}

double CosinePoly::operator()(double t) const {
  double s = coeffs[0];
  for (std::size_t j = 1; j < coeffs.size(); ++j) s += 2.0 * coeffs[j] * std::cos(j * t);
  return s;
}

CosinePoly operator*(const CosinePoly& a, const CosinePoly& b) {
  const int ka = a.degree(), kb = b.degree();
  std::vector<double> c(ka + kb + 1, 0.0);
  for (int m = 0; m <= ka + kb; ++m)
    for (int i = -ka; i <= ka; ++i) c[m] += a.coeff(i) * b.coeff(m - i);
  return CosinePoly(std::move(c));
}

CosinePoly operator+(const CosinePoly& a, const CosinePoly& b) {
  std::vector<double> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = a.coeff(int(j)) + b.coeff(int(j));
  return CosinePoly(std::move(c));
}

CosinePoly operator*(double s, const CosinePoly& a) {
  CosinePoly r = a;
  for (double& c : r.coeffs) c *= s;
  return r;
}

CosinePoly pow(const CosinePoly& a, int k) {
  if (k < 0) throw std::invalid_argument("negative power");
  CosinePoly r{1.0};
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

CosinePoly trimmed(const CosinePoly& a, double tol) {
  std::vector<double> c = a.coeffs;
  while (c.size() > 1 && std::abs(c.back()) <= tol) c.pop_back();
  return CosinePoly(std::move(c));
}

double sup_norm(const CosinePoly& f) {
  auto v = sample(f);
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  const double h = std::numbers::pi / kSamples;
  double a = std::max(0.0, (double(best) - 1) * h), b = std::min(std::numbers::pi, (double(best) + 1) * h);
  auto g = [&](double t) { return std::abs(f(t)); };
  return std::max(std::abs(v[best]), g(golden_argmax(g, a, b)));
}

SymbolND make_symbol(CosinePoly f) { return SymbolND{1, SymbolMode::Sum, {std::move(f)}}; }

SymbolND make_symbol(SymbolMode mode, CosinePoly f1, CosinePoly f2) {
  return SymbolND{2, mode, {std::move(f1), std::move(f2)}};
}

double eval(const SymbolND& sym, std::span<const double> t) {
  if (int(t.size()) != sym.dim || int(sym.factors.size()) != sym.dim)
    throw std::invalid_argument("eval: point dimension does not match symbol");
  double r = sym.mode == SymbolMode::Sum ? 0.0 : 1.0;
  for (int i = 0; i < sym.dim; ++i) {
    const double v = sym.factors[i](t[i]);
    r = sym.mode == SymbolMode::Sum ? r + v : r * v;
  }
  return r;
}

double eval(const SymbolND& sym, double t) { return eval(sym, std::span<const double>(&t, 1)); }

double eval(const SymbolND& sym, double t1, double t2) {
  const double t[2] = {t1, t2};
  return eval(sym, std::span<const double>(t, 2));
}

double sup_norm(const SymbolND& sym) {
  if (sym.dim == 1) return sup_norm(sym.factors.at(0));
  if (sym.dim != 2) throw std::invalid_argument("sup_norm: only d = 1, 2");
  const auto v1 = sample(sym.factors[0]), v2 = sample(sym.factors[1]);
  const bool sum = sym.mode == SymbolMode::Sum;
  double best = -1.0;
  int bi = 0, bj = 0;
  for (int i = 0; i <= kSamples; ++i)
    for (int j = 0; j <= kSamples; ++j) {
      const double v = std::abs(sum ? v1[i] + v2[j] : v1[i] * v2[j]);
      if (v > best) { best = v; bi = i; bj = j; }
    }
  const double h = std::numbers::pi / kSamples;
  double t1 = bi * h, t2 = bj * h;
  auto g = [&](double a, double b) { return std::abs(eval(sym, a, b)); };
  // alternating coordinate refinement around the winning grid point
  for (int round = 0; round < 4; ++round) {
    t1 = golden_argmax([&](double s) { return g(s, t2); }, std::max(0.0, t1 - h),
                       std::min(std::numbers::pi, t1 + h));
    t2 = golden_argmax([&](double s) { return g(t1, s); }, std::max(0.0, t2 - h),
                       std::min(std::numbers::pi, t2 + h));
    best = std::max(best, g(t1, t2));
  }
  return best;
}

SymbolND laplacian_symbol(int d, int q) {
  if (d < 1 || d > 2) throw std::invalid_argument("laplacian_symbol: d must be 1 or 2");
  if (q < 1 || q > 3) throw std::invalid_argument("laplacian_symbol: q must be 1, 2 or 3");
  CosinePoly f = pow(CosinePoly{2.0, -1.0}, q);
  return d == 1 ? make_symbol(f) : make_symbol(SymbolMode::Sum, f, f);
}

SymbolND projector_symbol(int d, int w) {
  if (d < 1 || d > 2) throw std::invalid_argument("projector_symbol: d must be 1 or 2");
  if (w < 1) throw std::invalid_argument("projector_symbol: w must be >= 1");
  CosinePoly p = pow(CosinePoly{2.0, 1.0}, w);
  return d == 1 ? make_symbol(p) : make_symbol(SymbolMode::Product, p, p);
}

}  // namespace sbmg
