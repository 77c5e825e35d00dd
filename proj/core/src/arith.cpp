#include "qtwist/arith.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "qtwist/errors.hpp"

namespace qtwist {

PrimeTable::PrimeTable(u64 limit) : limit_(limit), lpf_(limit + 1, 0) {
  if (limit > 0xFFFFFFFFull) throw PreconditionError("PrimeTable limit must fit in 32 bits");
  for (u64 n = 2; n <= limit; ++n) {
    if (lpf_[n] == 0) {
      lpf_[n] = static_cast<u32>(n);
      primes_.push_back(static_cast<u32>(n));
    }
    for (u32 p : primes_) {
      if (p > lpf_[n] || n * p > limit) break;
      lpf_[n * p] = p;
    }
  }
}

u32 PrimeTable::least_prime_factor(u64 n) const {
  if (n > limit_) throw PreconditionError("least_prime_factor: n beyond table limit");
  return lpf_[n];
}

bool PrimeTable::is_prime(u64 n) const {
  if (n <= limit_) return n >= 2 && lpf_[n] == n;
  const auto f = factor_trial(n);
  return f.size() == 1 && f[0].second == 1;
}

std::size_t PrimeTable::count_up_to(u64 y) const {
  return static_cast<std::size_t>(
      std::upper_bound(primes_.begin(), primes_.end(), y) - primes_.begin());
}

std::vector<std::pair<u64, int>> PrimeTable::factor(u64 n) const {
  std::vector<std::pair<u64, int>> out;
  if (n <= 1) return out;
  if (n <= limit_) {
    while (n > 1) {
      u64 p = lpf_[n];
      int e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      out.emplace_back(p, e);
    }
    return out;
  }
  for (u32 p : primes_) {
    if (u64{p} * p > n) break;
    if (n % p != 0) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (n > 1) {
    const u64 top = primes_.empty() ? 1 : primes_.back();
    if (top * top >= n) {
      out.emplace_back(n, 1);
    } else {
      for (auto& pe : factor_trial(n)) out.push_back(pe);
    }
  }
  return out;
}

int jacobi(i64 a_signed, u64 n) {
  if (n == 0 || (n & 1) == 0) throw PreconditionError("jacobi: n must be odd and positive");
  u64 a = a_signed >= 0 ? static_cast<u64>(a_signed) % n
                        : (n - (static_cast<u64>(-(a_signed + 1)) + 1) % n) % n;
  int result = 1;
  while (a != 0) {
    int tz = std::countr_zero(a);
    a >>= tz;
    if ((tz & 1) && ((n & 7) == 3 || (n & 7) == 5)) result = -result;
    if ((a & 3) == 3 && (n & 3) == 3) result = -result;
    std::swap(a, n);
    a %= n;
  }
  return n == 1 ? result : 0;
}

int kronecker(i64 d, u64 n) {
  if (n == 0) return (d == 1 || d == -1) ? 1 : 0;
  int result = 1;
  if ((n & 1) == 0) {
    if ((d & 1) == 0) return 0;
    int tz = std::countr_zero(n);
    n >>= tz;
    // (d/2) = +1 for d = +-1 mod 8, -1 for d = +-3 mod 8
    u64 r = static_cast<u64>(((d % 8) + 8) % 8);
    if ((tz & 1) && (r == 3 || r == 5)) result = -result;
  }
  if (n == 1) return result;
  return result * jacobi(d, n);
}

std::vector<std::pair<u64, int>> factor_trial(u64 n) {
  std::vector<std::pair<u64, int>> out;
  auto take = [&](u64 p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.emplace_back(p, e);
  };
  take(2);
  take(3);
  for (u64 p = 5; p * p <= n; p += 6) {
    take(p);
    take(p + 2);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

bool is_squarefree(u64 n) {
  if (n == 0) return false;
  for (auto [p, e] : factor_trial(n))
    if (e > 1) return false;
  return true;
}

u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

bool is_perfect_square(u64 n) {
  u64 r = isqrt(n);
  return r * r == n;
}

std::optional<std::pair<u64, int>> prime_power(u64 n) {
  if (n < 2) return std::nullopt;
  auto is_prime_small = [](u64 r) {
    if (r < 2) return false;
    for (u64 q = 2; q * q <= r; ++q)
      if (r % q == 0) return false;
    return true;
  };
  for (int j = 63; j >= 2; --j) {
    u64 r = static_cast<u64>(std::llround(std::pow(static_cast<long double>(n), 1.0L / j)));
    for (u64 c = r > 0 ? r - 1 : 0; c <= r + 1; ++c) {
      if (c < 2) continue;
      u64 acc = 1;
      bool over = false;
      for (int i = 0; i < j && !over; ++i) {
        if (acc > n / c) over = true;
        else acc *= c;
      }
      if (!over && acc == n) return is_prime_small(c) ? std::optional(std::pair{c, j}) : std::nullopt;
    }
  }
  if (is_prime_small(n)) return std::pair{n, 1};
  return std::nullopt;
}

u64 euler_phi(u64 n) {
  if (n == 0) return 0;
  u64 phi = n;
  for (auto [p, e] : factor_trial(n)) phi = phi / p * (p - 1);
  return phi;
}

u64 divisor_count(u64 n) {
  if (n == 0) return 0;
  u64 c = 1;
  for (auto [p, e] : factor_trial(n)) c *= static_cast<u64>(e + 1);
  return c;
}

int valuation(u64 n, u64 p) {
  if (n == 0) return -1;
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

u64 powmod(u64 base, u64 exp, u64 mod) {
  unsigned __int128 r = 1 % mod, b = base % mod;
  while (exp) {
    if (exp & 1) r = r * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return static_cast<u64>(r);
}

std::vector<u64> prime_divisors(u64 n) {
  std::vector<u64> out;
  for (auto [p, e] : factor_trial(n)) out.push_back(p);
  return out;
}

bool is_fundamental_discriminant(i64 d) {
  if (d == 0 || d == 1 || d == -1) return false;
  u64 a = static_cast<u64>(d > 0 ? d : -d);
  i64 r4 = ((d % 4) + 4) % 4;
  if (r4 == 1) return is_squarefree(a);
  if (r4 != 0) return false;
  i64 m = d / 4;
  i64 m4 = ((m % 4) + 4) % 4;
  if (m4 != 2 && m4 != 3) return false;
  return is_squarefree(a / 4);
}

FundamentalDiscriminant::FundamentalDiscriminant(i64 d) : d_(d) {
  if (!is_fundamental_discriminant(d))
    throw PreconditionError("not a fundamental discriminant: " + std::to_string(d));
}

std::optional<FundamentalDiscriminant> FundamentalDiscriminant::try_make(i64 d) noexcept {
  if (!is_fundamental_discriminant(d)) return std::nullopt;
  return FundamentalDiscriminant(d, Unchecked{});
}

}  // namespace qtwist
