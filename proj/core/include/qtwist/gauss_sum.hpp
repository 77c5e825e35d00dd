#pragma once

// Quadratic Gauss sums tau_m(n) = sum_{b mod n} (b/n) e(mb/n) for odd n and
// the normalized G_m(n): G = tau when n = 1 mod 4, G = -i tau when n = 3 mod 4.

#include <complex>
#include <string>

#include "qtwist/arith.hpp"

namespace qtwist {

/// Exact value coef * sqrt(radicand) * i^phase, radicand squarefree.
struct GaussValue {
  enum class Form { zero, prime_power, legendre_root, totient, product };

  i64 coef = 0;
  u64 radicand = 1;
  int phase = 0;  // 0..3
  Form form = Form::zero;

  std::complex<double> value() const;
  double magnitude() const;
  bool is_zero() const noexcept { return coef == 0; }
  std::string str() const;

  friend bool operator==(const GaussValue& a, const GaussValue& b) noexcept {
    if (a.coef == 0 || b.coef == 0) return a.coef == b.coef;
    return a.coef == b.coef && a.radicand == b.radicand && a.phase == b.phase;
  }
};

GaussValue operator*(const GaussValue& a, const GaussValue& b);

/// Direct summation; oracle only (n odd, n <= 10^4).
std::complex<double> tau_brute(i64 m, u64 n);
/// G_m(n) from tau_brute via the prefactor identity.
std::complex<double> gauss_G_brute(i64 m, u64 n);

/// G_m(p^beta) in closed form (five cases); alpha = v_p(m), infinite for m = 0.
GaussValue gauss_prime_power(i64 m, u64 p, int beta);
/// G_m(n) as the product over p^beta || n; G_m(1) = 1.
GaussValue gauss_closed(i64 m, u64 n);
/// tau_m(n) = G_m(n) for n = 1 mod 4 and i G_m(n) for n = 3 mod 4.
GaussValue tau_closed(i64 m, u64 n);

/// Compare closed and brute forms for every odd n <= nmax and |m| <= mmax.
struct GaussCheckResult {
  u64 cases = 0;
  u64 mismatches = 0;
  i64 first_bad_m = 0;
  u64 first_bad_n = 0;
  double max_abs_error = 0;
};
GaussCheckResult gauss_check(u64 nmax, i64 mmax, unsigned workers = 1);

}  // namespace qtwist
