#pragma once

// Proxy statistics: the Dirichlet polynomial P_f(d; x) with weight w(p),
// the Tamagawa-type sum C(d; x), c(p), Galois profiles and normalized stats.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtwist/curve.hpp"
#include "qtwist/newform.hpp"

namespace qtwist {

/// w(p) = p^{-1/log x} log(x/p)/log x. Throws for p > x or p < 2.
double weight_w(double p, double x);

/// Default cutoff x = X^{1/log log log X}.
double default_x(double X);

/// P_f(d; x) = sum_{p <= x} lambda(p) chi_d(p) p^{-1/2} w(p), with the
/// per-prime coefficients precomputed. Primes dividing `exclude` are left
/// out (use N0 for the moment computations, 1 for the plain definition).
class DirichletPoly {
 public:
  DirichletPoly(const Newform& f, double x, i64 exclude = 1);

  double operator()(i64 d) const;
  double x() const noexcept { return x_; }
  std::span<const u32> primes() const noexcept { return primes_; }
  std::span<const double> coefficients() const noexcept { return coef_; }
  /// 2 sum p^{-1/2} over the included primes.
  double deligne_envelope() const noexcept { return envelope_; }
  /// sum lambda(p)^2 w(p)^2 / p: the variance of P under independent random signs.
  double diagonal_variance() const noexcept { return diag_var_; }

 private:
  double x_;
  std::vector<u32> primes_;
  std::vector<double> coef_;
  double envelope_ = 0;
  double diag_var_ = 0;
};

/// P_f(d; x) by definition (all p <= x). Requires gcd(d, 2N) = 1.
double dirichlet_poly(const Newform& f, i64 d, double x);

/// c(p) = 1 + #roots of F mod p, for odd p not dividing disc(F).
int c_of_p(const Cubic& F, u64 p);

/// Window [lo, hi] of C(d; x), lo = log X by default.
struct ProxyConfig {
  double X = 0;
  double x = 0;
  std::optional<double> lower;  // default log X

  double window_lo() const;
  double window_hi() const { return x; }
};

/// C(d; x) = sum_{lo <= p <= hi} C_p(d) with C_p = (p/(p+1)) log c(p) if p | d,
/// else -(1/(p+1)) log c(p). Primes dividing 2 disc(F) are skipped and listed.
class TamagawaWindow {
 public:
  TamagawaWindow(const Cubic& F, double lo, double hi);

  double operator()(i64 d) const;
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  /// sum over the window of log c(p) / (p + 1).
  double shift() const noexcept { return shift_; }
  /// sum over window primes p | d of log c(p).
  double divisor_part(i64 d) const;
  const std::vector<u64>& skipped() const noexcept { return skipped_; }
  /// x > log X > max(N0, |disc F|), the regime the definition assumes.
  bool in_regime(double X, i64 n0) const;
  std::span<const u32> primes() const noexcept { return primes_; }
  std::span<const double> log_c() const noexcept { return logc_; }

 private:
  Cubic F_;
  double lo_, hi_;
  std::vector<u32> primes_;
  std::vector<double> logc_;
  std::vector<u64> skipped_;
  double shift_ = 0;
};

double tamagawa_sum_C(const Cubic& F, i64 d, const ProxyConfig& cfg);

enum class GaloisGroup { trivial, C2, C3, S3 };
std::string to_string(GaloisGroup g);

struct GaloisProfile {
  GaloisGroup group = GaloisGroup::S3;
  int degree = 6;                 // n_K = |G|
  std::vector<int> fixed_counts;  // c(g) over the group elements
  double mu = 0;
  double sigma2 = 0;
};

GaloisProfile galois_profile(const Cubic& F);
/// (mu, sigma^2) from a multiset of c(g).
std::pair<double, double> profile_moments(std::span<const int> c_values);

struct MertensResult {
  double y = 0;
  double lhs1 = 0, target1 = 0;
  double lhs2 = 0, target2 = 0;
};
MertensResult mertens_check(const Cubic& F, double y);
/// Same sums at every y in an ascending grid from one sweep over the primes.
std::vector<MertensResult> mertens_grid(const Cubic& F, const std::vector<double>& ys);

struct NormalizedStats {
  std::vector<double> Q;     // P_j / sqrt(log log X)
  std::optional<double> R1;  // P / sqrt(log log X)
  std::optional<double> R2;  // (P - C) / sqrt(sigma^2 log log X)
};
/// P: one value per form; when C and sigma2 are given, R1/R2 use P[0].
NormalizedStats normalized_stats(std::span<const double> P, double X, std::optional<double> C = {},
                                 std::optional<double> sigma2 = {});

}  // namespace qtwist
