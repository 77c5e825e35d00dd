#pragma once

// Completed twisted L-functions
//   Lambda(s) = Q^s Gamma(s + (k-1)/2) L(s, f (x) chi_d),  Q = sqrt(N) |d| / 2 pi,
// by the smoothed functional equation with split parameter t:
//   Lambda(s) = I_t(s) + eps I_{1/t}(1 - s),
//   I_t(s) = sum_n a_n (Q/n)^s Gamma(s + (k-1)/2, n/(Q t)),  a_n = lambda(n) chi_d(n).
// Evaluating at two splits (t = 1 and t = t2) and comparing is the
// functional-equation check.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "qtwist/arith.hpp"
#include "qtwist/newform.hpp"
#include "qtwist/numerics.hpp"

namespace qtwist {

/// lambda(n) for n <= nmax plus the sieve to twist it; shared by many d.
class CoefficientTable {
 public:
  CoefficientTable(const Newform& f, u64 nmax);

  const Newform& form() const noexcept { return *form_; }
  u64 nmax() const noexcept { return nmax_; }
  std::span<const double> lambda() const noexcept { return lambda_; }
  /// a_n = lambda(n) chi_d(n) for 0 <= n <= T (entry 0 is 0).
  std::vector<double> twisted(i64 d, u64 T) const;

 private:
  const Newform* form_;
  u64 nmax_;
  PrimeTable table_;
  std::vector<double> lambda_;
};

struct LOptions {
  double split = 1.15;          // second split parameter t2
  double truncation_c = 40.0;   // T = c Q max(t2, 1/t2)
  double fe_tolerance = 1e-8;   // residual / max(1, |Lambda|)
  double doubling_tolerance = 1e-9;
  bool enforce = true;          // throw GateFailure on a failed check
};

struct CompletedLValue {
  cplx s;
  cplx value;
  u64 truncation = 0;
  double estimated_error = 0;
  double fe_residual = 0;      // |Lambda_1(s) - eps Lambda_t2(1 - s)|
  double doubling_change = 0;  // change when T is doubled
  double scale = 1;            // max(1, |Lambda|)
};

struct CentralDerivative {
  i64 d = 0;
  double lprime = 0;
  double logabs = 0;
  std::optional<double> u;     // (log|L'| - loglog|d|/2) / sqrt(loglog|d|), |d| >= 20
  double lambda_prime = 0;     // Lambda'(1/2)
  double finite_difference = 0;
  double fd_relative_error = 0;
  double estimated_error = 0;
  bool undecided = false;      // |L'| below the numerical zero threshold
};

struct CentralValue {
  i64 d = 0;
  double value = 0;  // L(1/2)
  double estimated_error = 0;
  bool undecided = false;
};

class TwistedL {
 public:
  /// d = 1 gives f itself. Requires gcd(d, 2N) = 1 otherwise; the table must
  /// reach the truncation length.
  TwistedL(const CoefficientTable& table, i64 d, LOptions opt = {});

  double Q() const noexcept { return Q_; }
  int root_number() const noexcept { return eps_; }
  i64 d() const noexcept { return d_; }
  u64 truncation() const noexcept { return T_; }

  /// I_t(s) summed over n in (from, to].
  cplx I(cplx s, double t, u64 from, u64 to) const;
  double I(double s, double t, u64 from, u64 to) const;

  CompletedLValue complete_lambda(cplx s) const;
  CentralDerivative central_derivative() const;
  CentralValue central_value() const;

  /// L'(1/2) in 50-digit arithmetic from integer a_n (weight 2).
  double central_derivative_extended() const;

 private:
  const CoefficientTable* table_;
  i64 d_;
  LOptions opt_;
  int eps_;
  double Q_;
  double kappa_;
  u64 T_;
  std::vector<double> a_;  // up to 2T
};

/// Dirichlet-series side Q^s Gamma(s + kappa) prod_{p <= P} (local factor)^{-1},
/// valid for Re s > 1 (contract check, Re s >= 2).
cplx lambda_euler_product(const Newform& f, i64 d, cplx s, u64 P);

/// log|L'(1/2)| - P_f(d; x) - (1/2) log log x.
double lprime_proxy_residual(double logabs_lprime, double P, double x);

/// Truncation length the engine will need for |d| at the given options.
u64 required_table_size(i64 level, i64 d, const LOptions& opt = {});

}  // namespace qtwist
