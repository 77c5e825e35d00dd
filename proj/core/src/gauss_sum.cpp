#include "qtwist/gauss_sum.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "qtwist/errors.hpp"
#include "qtwist/numerics.hpp"

namespace qtwist {

std::complex<double> GaussValue::value() const {
  static const std::complex<double> turns[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return static_cast<double>(coef) * std::sqrt(static_cast<double>(radicand)) * turns[phase & 3];
}

double GaussValue::magnitude() const {
  return std::abs(static_cast<double>(coef)) * std::sqrt(static_cast<double>(radicand));
}

std::string GaussValue::str() const {
  if (coef == 0) return "0";
  static const char* turns[4] = {"", "i", "-", "-i"};
  std::string s = std::to_string(coef);
  if (radicand != 1) s += "*sqrt(" + std::to_string(radicand) + ")";
  if (phase & 3) s = std::string(turns[phase & 3]) + "(" + s + ")";
  return s;
}

GaussValue operator*(const GaussValue& a, const GaussValue& b) {
  if (a.coef == 0 || b.coef == 0) return GaussValue{};
  const u64 g = std::gcd(a.radicand, b.radicand);
  GaussValue r;
  r.coef = a.coef * b.coef * static_cast<i64>(g);
  r.radicand = (a.radicand / g) * (b.radicand / g);
  r.phase = (a.phase + b.phase) & 3;
  r.form = GaussValue::Form::product;
  return r;
}

namespace {

void require_odd(u64 n) {
  if (n == 0 || (n & 1) == 0) throw PreconditionError("Gauss sums need an odd positive modulus");
}

i64 ipow(i64 b, int e) {
  i64 r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

std::complex<double> tau_brute(i64 m, u64 n) {
  require_odd(n);
  if (n > 10000) throw PreconditionError("tau_brute is an oracle limited to n <= 10^4");
  if (n == 1) return 1.0;
  const i64 mm = ((m % static_cast<i64>(n)) + static_cast<i64>(n)) % static_cast<i64>(n);
  NeumaierSum re, im;
  for (u64 b = 0; b < n; ++b) {
    const int chi = jacobi(static_cast<i64>(b), n);
    if (chi == 0) continue;
    const u64 k = static_cast<u64>(mm) * b % n;
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    re.add(chi * std::cos(t));
    im.add(chi * std::sin(t));
  }
  return {re.value(), im.value()};
}

std::complex<double> gauss_G_brute(i64 m, u64 n) {
  const std::complex<double> tau = tau_brute(m, n);
  // G = ((1-i)/2 + (-1/n)(1+i)/2) tau
  const double chi = jacobi(-1, n);
  const std::complex<double> pre = std::complex<double>(0.5, -0.5) + chi * std::complex<double>(0.5, 0.5);
  return pre * tau;
}

GaussValue gauss_prime_power(i64 m, u64 p, int beta) {
  require_odd(p);
  GaussValue v;
  if (beta == 0) {
    v.coef = 1;
    v.form = GaussValue::Form::prime_power;
    return v;
  }
  const bool alpha_inf = m == 0;
  const int alpha = alpha_inf ? 0 : valuation(static_cast<u64>(m < 0 ? -m : m), p);
  if (alpha_inf || beta <= alpha) {
    if (beta % 2 == 0) {
      v.coef = ipow(static_cast<i64>(p), beta - 1) * static_cast<i64>(p - 1);
      v.form = GaussValue::Form::totient;
    }
    return v;
  }
  if (beta == alpha + 1) {
    const i64 pa = ipow(static_cast<i64>(p), alpha);
    if (beta % 2 == 0) {
      v.coef = -pa;
      v.form = GaussValue::Form::prime_power;
    } else {
      const int leg = jacobi(m / pa, p);
      v.coef = leg * pa;
      v.radicand = p;
      v.form = GaussValue::Form::legendre_root;
    }
    return v;
  }
  return v;  // beta >= alpha + 2
}

GaussValue gauss_closed(i64 m, u64 n) {
  require_odd(n);
  GaussValue v;
  v.coef = 1;
  v.form = GaussValue::Form::prime_power;
  bool first = true;
  for (auto [p, e] : factor_trial(n)) {
    const GaussValue local = gauss_prime_power(m, p, e);
    if (first) {
      v = local;
      first = false;
    } else {
      v = v * local;
    }
    if (v.is_zero()) return GaussValue{};
  }
  return v;
}

GaussValue tau_closed(i64 m, u64 n) {
  GaussValue g = gauss_closed(m, n);
  if (!g.is_zero() && n % 4 == 3) g.phase = (g.phase + 1) & 3;
  return g;
}

GaussCheckResult gauss_check(u64 nmax, i64 mmax, unsigned workers) {
  std::vector<u64> ns;
  for (u64 n = 1; n <= nmax; n += 2) ns.push_back(n);
  auto per_n = ordered_parallel_map<GaussCheckResult>(ns.size(), workers, [&](std::size_t idx) {
    const u64 n = ns[idx];
    GaussCheckResult r;
    // same summation as tau_brute with the character and roots of unity tabulated
    std::vector<int> chi(n);
    std::vector<double> cs(n), sn(n);
    for (u64 b = 0; b < n; ++b) {
      chi[b] = n == 1 ? 1 : jacobi(static_cast<i64>(b), n);
      const double t = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(n);
      cs[b] = std::cos(t);
      sn[b] = std::sin(t);
    }
    const double chi_m1 = jacobi(-1, n);
    const std::complex<double> pre =
        std::complex<double>(0.5, -0.5) + chi_m1 * std::complex<double>(0.5, 0.5);
    for (i64 m = -mmax; m <= mmax; ++m) {
      ++r.cases;
      const u64 mm = static_cast<u64>(((m % static_cast<i64>(n)) + static_cast<i64>(n)) % static_cast<i64>(n));
      NeumaierSum re, im;
      for (u64 b = 0, k = 0; b < n; ++b, k = (k + mm) % n) {
        if (chi[b] == 0) continue;
        re.add(chi[b] * cs[k]);
        im.add(chi[b] * sn[k]);
      }
      const auto brute = n == 1 ? std::complex<double>(1.0) : pre * std::complex<double>(re.value(), im.value());
      const GaussValue closed = gauss_closed(m, n);
      const double err = std::abs(closed.value() - brute);
      // exact part: |G|^2 is an integer
      const double mag2 = std::norm(brute);
      const i64 exact2 = closed.coef * closed.coef * static_cast<i64>(closed.radicand);
      const bool ok = err <= 1e-9 * std::max<double>(1.0, static_cast<double>(n)) &&
                      std::llround(mag2) == (closed.is_zero() ? 0 : exact2);
      r.max_abs_error = std::max(r.max_abs_error, err);
      if (!ok) {
        if (r.mismatches == 0) {
          r.first_bad_m = m;
          r.first_bad_n = n;
        }
        ++r.mismatches;
      }
    }
    return r;
  });
  GaussCheckResult total;
  for (const auto& r : per_n) {
    if (r.mismatches && !total.mismatches) {
      total.first_bad_m = r.first_bad_m;
      total.first_bad_n = r.first_bad_n;
    }
    total.cases += r.cases;
    total.mismatches += r.mismatches;
    total.max_abs_error = std::max(total.max_abs_error, r.max_abs_error);
  }
  return total;
}

}  // namespace qtwist
