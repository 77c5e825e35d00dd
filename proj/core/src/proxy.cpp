#include "qtwist/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "qtwist/errors.hpp"
#include "qtwist/numerics.hpp"

namespace qtwist {

double weight_w(double p, double x) {
  if (p < 2 || p > x) throw PreconditionError("weight_w: need 2 <= p <= x");
  const double lx = std::log(x);
  return std::exp(-std::log(p) / lx) * std::log(x / p) / lx;
}

double default_x(double X) {
  const double lll = std::log(std::log(std::log(X)));
  if (!(lll > 0)) throw PreconditionError("default x rule needs log log log X > 0 (X > e^e^1)");
  return std::pow(X, 1.0 / lll);
}

DirichletPoly::DirichletPoly(const Newform& f, double x, i64 exclude) : x_(x) {
  if (x < 2) return;
  const u64 top = static_cast<u64>(std::floor(x));
  if (top > f.prime_limit()) throw MissingCoefficient(top, f.prime_limit());
  const auto ps = f.primes();
  const auto ls = f.lambdas();
  for (std::size_t i = 0; i < ps.size() && ps[i] <= top; ++i) {
    const u64 p = ps[i];
    if (exclude > 1 && exclude % static_cast<i64>(p) == 0) continue;
    const double pd = static_cast<double>(p);
    const double w = weight_w(pd, x);
    primes_.push_back(ps[i]);
    coef_.push_back(ls[i] * w / std::sqrt(pd));
    envelope_ += 2.0 / std::sqrt(pd);
    diag_var_ += ls[i] * ls[i] * w * w / pd;
  }
}

double DirichletPoly::operator()(i64 d) const {
  NeumaierSum s;
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    const u32 p = primes_[i];
    const int chi = p == 2 ? kronecker(d, 2) : jacobi(d, p);
    if (chi) s.add(chi * coef_[i]);
  }
  return s.value();
}

double dirichlet_poly(const Newform& f, i64 d, double x) {
  if (std::gcd(d < 0 ? -d : d, 2 * f.level()) != 1) throw PreconditionError("dirichlet_poly: need gcd(d, 2N) = 1");
  return DirichletPoly(f, x)(d);
}

int c_of_p(const Cubic& F, u64 p) {
  if (p < 3 || (p & 1) == 0) throw PreconditionError("c_of_p: p must be an odd prime");
  if (F.discriminant() % static_cast<i64>(p) == 0) throw PreconditionError("c_of_p: p divides disc(F)");
  return 1 + F.roots_mod(p);
}

double ProxyConfig::window_lo() const {
  if (lower) return *lower;
  if (!(X > 1)) throw PreconditionError("ProxyConfig: X must exceed 1");
  return std::log(X);
}

TamagawaWindow::TamagawaWindow(const Cubic& F, double lo, double hi) : F_(F), lo_(lo), hi_(hi) {
  if (hi < lo) return;
  const u64 top = static_cast<u64>(std::floor(hi));
  if (top < 2) return;
  PrimeTable t(top);
  const i64 disc = F.discriminant();
  NeumaierSum shift;
  for (u32 p : t.primes()) {
    if (p < lo) continue;
    if (p == 2 || disc % static_cast<i64>(p) == 0) {
      skipped_.push_back(p);
      continue;
    }
    const double lc = std::log(static_cast<double>(1 + F.roots_mod(p)));
    primes_.push_back(p);
    logc_.push_back(lc);
    shift.add(lc / (static_cast<double>(p) + 1.0));
  }
  shift_ = shift.value();
  if (!skipped_.empty()) spdlog::debug("C(d;x) window skips {} bad primes", skipped_.size());
}

double TamagawaWindow::divisor_part(i64 d) const {
  const u64 ad = static_cast<u64>(d < 0 ? -d : d);
  NeumaierSum s;
  for (std::size_t i = 0; i < primes_.size(); ++i)
    if (ad % primes_[i] == 0) s.add(logc_[i]);
  return s.value();
}

double TamagawaWindow::operator()(i64 d) const {
  const u64 ad = static_cast<u64>(d < 0 ? -d : d);
  NeumaierSum s;
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    const double p = primes_[i];
    if (ad % primes_[i] == 0)
      s.add(p / (p + 1.0) * logc_[i]);
    else
      s.add(-logc_[i] / (p + 1.0));
  }
  return s.value();
}

bool TamagawaWindow::in_regime(double X, i64 n0) const {
  const double lx = std::log(X);
  const double disc = std::abs(static_cast<double>(F_.discriminant()));
  return hi_ > lx && lx > std::max(static_cast<double>(n0), disc);
}

double tamagawa_sum_C(const Cubic& F, i64 d, const ProxyConfig& cfg) {
  return TamagawaWindow(F, cfg.window_lo(), cfg.window_hi())(d);
}

std::string to_string(GaloisGroup g) {
  switch (g) {
    case GaloisGroup::trivial: return "trivial";
    case GaloisGroup::C2: return "C2";
    case GaloisGroup::C3: return "C3";
    case GaloisGroup::S3: return "S3";
  }
  return "?";
}

std::pair<double, double> profile_moments(std::span<const int> c) {
  NeumaierSum s1, s2;
  for (int v : c) {
    const double l = std::log(static_cast<double>(v));
    s1.add(l);
    s2.add(l * l);
  }
  const double n = static_cast<double>(c.size());
  return {-0.5 - s1.value() / n, 1.0 + s2.value() / n};
}

GaloisProfile galois_profile(const Cubic& F) {
  const i64 disc = F.discriminant();
  if (disc == 0) throw PreconditionError("galois_profile: F is not squarefree");
  GaloisProfile g;
  const auto roots = F.integer_roots();
  if (roots.size() == 3) {
    g.group = GaloisGroup::trivial;
    g.fixed_counts = {4};
  } else if (roots.size() == 1) {
    g.group = GaloisGroup::C2;
    g.fixed_counts = {4, 2};
  } else if (disc > 0 && is_perfect_square(static_cast<u64>(disc))) {
    g.group = GaloisGroup::C3;
    g.fixed_counts = {4, 1, 1};
  } else {
    g.group = GaloisGroup::S3;
    g.fixed_counts = {4, 2, 2, 2, 1, 1};
  }
  g.degree = static_cast<int>(g.fixed_counts.size());
  std::tie(g.mu, g.sigma2) = profile_moments(g.fixed_counts);
  return g;
}

std::vector<MertensResult> mertens_grid(const Cubic& F, const std::vector<double>& ys) {
  std::vector<MertensResult> out;
  if (ys.empty()) return out;
  if (!std::is_sorted(ys.begin(), ys.end())) throw PreconditionError("mertens_grid: y grid must ascend");
  if (ys.front() < 100) throw PreconditionError("mertens_check: need y >= 100");
  const GaloisProfile prof = galois_profile(F);
  PrimeTable t(static_cast<u64>(ys.back()));
  NeumaierSum s1, s2;
  std::size_t k = 0;
  auto emit = [&](double y) {
    const double llog = std::log(std::log(y));
    out.push_back({y, s1.value(), (-prof.mu - 0.5) * llog, s2.value(), (prof.sigma2 - 1.0) * llog});
  };
  for (u32 p : t.primes()) {
    while (k < ys.size() && p > ys[k]) emit(ys[k++]);
    const int roots = F.roots_mod(p);
    const double l = std::log(1.0 + roots);
    s1.add(l / p);
    s2.add(l * l / p);
  }
  while (k < ys.size()) emit(ys[k++]);
  return out;
}

MertensResult mertens_check(const Cubic& F, double y) { return mertens_grid(F, {y}).front(); }

NormalizedStats normalized_stats(std::span<const double> P, double X, std::optional<double> C,
                                 std::optional<double> sigma2) {
  if (X < 20) throw PreconditionError("normalized_stats: need X >= 20");
  const double ll = std::log(std::log(X));
  NormalizedStats s;
  for (double p : P) s.Q.push_back(p / std::sqrt(ll));
  if (C && sigma2 && !P.empty()) {
    s.R1 = P[0] / std::sqrt(ll);
    s.R2 = (P[0] - *C) / std::sqrt(*sigma2 * ll);
  }
  return s;
}

}  // namespace qtwist
