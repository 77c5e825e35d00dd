#include "qtwist/charsum.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <spdlog/spdlog.h>

#include "qtwist/errors.hpp"
#include "qtwist/numerics.hpp"

namespace qtwist {

double SmoothCutoff::smoothstep(double u) noexcept {
  if (u <= 0) return 0.0;
  if (u >= 1) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

SmoothCutoff::SmoothCutoff() : hat0_(0) {
  auto phi = [this](double t) { return (*this)(t); };
  hat0_ = integrate(phi, 0.5, 1.0, 1e-13) + 1.0 + integrate(phi, 2.0, 2.5, 1e-13);
}

double SmoothCutoff::operator()(double t) const noexcept {
  if (t <= support_lo || t >= support_hi) return 0.0;
  return smoothstep((t - 0.5) / 0.5) * smoothstep((2.5 - t) / 0.5);
}

const SmoothCutoff& default_cutoff() {
  static const SmoothCutoff phi;
  return phi;
}

double euler_factor_coprime(i64 n0) {
  double v = 6.0 / (std::numbers::pi * std::numbers::pi);
  for (u64 p : prime_divisors(static_cast<u64>(n0))) {
    const double pd = static_cast<double>(p);
    v /= 1.0 - 1.0 / (pd * pd);
  }
  return v;
}

namespace {

void check_pre(u64 n, u64 v, i64 n0) {
  if (n == 0 || v == 0) throw PreconditionError("n and v must be positive");
  if (std::gcd(n, static_cast<u64>(n0)) != 1) throw PreconditionError("need gcd(n, N0) = 1");
  if (std::gcd(n, v) != 1) throw PreconditionError("need gcd(n, v) = 1");
  if (std::gcd(v, static_cast<u64>(n0)) != 1) throw PreconditionError("need gcd(v, N0) = 1");
  if (!is_squarefree(v)) throw PreconditionError("v must be squarefree");
}

}  // namespace

double main_term(u64 n, u64 v, i64 n0, double X) {
  check_pre(n, v, n0);
  if (!is_perfect_square(n)) return 0.0;
  double val = X / (static_cast<double>(v) * static_cast<double>(n0));
  for (u64 p : prime_divisors(n * v)) val /= 1.0 + 1.0 / static_cast<double>(p);
  return val * euler_factor_coprime(n0) * default_cutoff().hat0();
}

double char_sum(u64 n, u64 v, const TwistFamily& family, double X, unsigned workers, u64* members) {
  check_pre(n, v, family.n0());
  if (!(X > 0)) throw PreconditionError("X must be positive");
  const auto& phi = default_cutoff();
  const auto chunks = chunk_ranges(SmoothCutoff::support_lo * X, SmoothCutoff::support_hi * X);
  struct Part {
    NeumaierSum sum;
    u64 count = 0;
  };
  const auto parts = ordered_parallel_map<Part>(chunks.size(), workers, [&](std::size_t i) {
    Part part;
    for (i64 d : family.enumerate(chunks[i].first, chunks[i].second)) {
      const u64 ad = static_cast<u64>(d < 0 ? -d : d);
      if (ad % v != 0) continue;
      const int kappa = d > 0 ? 1 : -1;
      const double w = phi(kappa * static_cast<double>(d) / X);
      if (w == 0.0) continue;
      ++part.count;
      part.sum.add(kronecker(d, n) * w);
    }
    return part;
  });
  NeumaierSum total;
  u64 count = 0;
  for (const auto& p : parts) {
    total += p.sum;
    count += p.count;
  }
  if (members) *members = count;
  return total.value();
}

CharSumResult char_sum_report(u64 n, u64 v, const TwistFamily& family, double X, double eps,
                              unsigned workers) {
  CharSumResult r;
  r.lhs = char_sum(n, v, family, X, workers, &r.members);
  r.main = main_term(n, v, family.n0(), X) * static_cast<double>(family.classes().size());
  r.error = r.lhs - r.main;
  r.ratio = r.main != 0 ? r.lhs / r.main : 0.0;
  r.in_regime = static_cast<double>(v) * std::sqrt(static_cast<double>(n)) <= std::pow(X, 0.5 - eps);
  if (!r.in_regime)
    spdlog::warn("v sqrt(n) = {} exceeds X^(1/2 - eps) = {}; main term outside its regime",
                 static_cast<double>(v) * std::sqrt(static_cast<double>(n)), std::pow(X, 0.5 - eps));
  return r;
}

}  // namespace qtwist
