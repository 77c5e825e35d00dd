#pragma once

// Smoothed character sums over a twist family and their main term.

#include "qtwist/family.hpp"

namespace qtwist {

/// Phi(t) = S((t - 1/2)/(1/2)) S((5/2 - t)/(1/2)), S the exp(-1/u) smoothstep.
/// Support [1/2, 5/2], equal to 1 on [1, 2].
class SmoothCutoff {
 public:
  SmoothCutoff();
  double operator()(double t) const noexcept;
  /// Integral of Phi over R, by adaptive quadrature (1.5 in closed form).
  double hat0() const noexcept { return hat0_; }
  static constexpr double support_lo = 0.5;
  static constexpr double support_hi = 2.5;

  static double smoothstep(double u) noexcept;

 private:
  double hat0_;
};

const SmoothCutoff& default_cutoff();

/// zeta(2)^{-1} prod_{p | N0} (1 - 1/p^2)^{-1} = prod_{p !| N0} (1 - 1/p^2).
double euler_factor_coprime(i64 n0);

struct CharSumResult {
  double lhs = 0;
  double main = 0;
  double error = 0;  // lhs - main
  double ratio = 0;  // lhs / main, 0 when main = 0
  bool in_regime = true;  // v sqrt(n) <= X^{1/2 - eps}
  u64 members = 0;
};

/// Exact sum over d in the family with v | d of chi_d(n) Phi(kappa d / X),
/// summed over every class of `family`. Chunked over |d| with an ordered
/// compensated reduction, so the value does not depend on `workers`.
double char_sum(u64 n, u64 v, const TwistFamily& family, double X, unsigned workers = 1,
                u64* members = nullptr);

/// delta(n = square) X/(v N0) prod_{p | nv} (1 + 1/p)^{-1} prod_{p !| N0} (1 - 1/p^2) Phi^(0),
/// per class (multiply by the class count for unions).
double main_term(u64 n, u64 v, i64 n0, double X);

CharSumResult char_sum_report(u64 n, u64 v, const TwistFamily& family, double X, double eps = 0.05,
                              unsigned workers = 1);

}  // namespace qtwist
