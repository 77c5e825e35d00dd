#pragma once

// Exact integer kernels shared by every other module: a sieved prime table,
// Kronecker/Jacobi symbols, factorization helpers and fundamental
// discriminants.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace qtwist {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u32 = std::uint32_t;

/// Primes up to `limit` plus the least-prime-factor map on [0, limit].
/// Built once by a linear sieve, then shared read-only.
class PrimeTable {
 public:
  explicit PrimeTable(u64 limit);

  u64 limit() const noexcept { return limit_; }
  std::span<const u32> primes() const noexcept { return primes_; }

  /// Least prime factor of n (n in [2, limit]); lpf(0) = lpf(1) = 0.
  u32 least_prime_factor(u64 n) const;
  bool is_prime(u64 n) const;

  /// Number of primes <= y (y clipped to the limit).
  std::size_t count_up_to(u64 y) const;

  /// Prime factorization as (p, e) pairs in ascending p. Uses the lpf map when
  /// n <= limit and trial division by the stored primes otherwise.
  std::vector<std::pair<u64, int>> factor(u64 n) const;

 private:
  u64 limit_;
  std::vector<u32> primes_;
  std::vector<u32> lpf_;
};

/// Jacobi symbol (a/n) for odd n >= 1.
int jacobi(i64 a, u64 n);

/// Kronecker symbol (d/n) for any integer d and n >= 0.
int kronecker(i64 d, u64 n);

/// Trial-division factorization (for values outside any prime table).
std::vector<std::pair<u64, int>> factor_trial(u64 n);

bool is_squarefree(u64 n);
bool is_perfect_square(u64 n);
/// (p, j) with n = p^j, or nothing when n is not a prime power.
std::optional<std::pair<u64, int>> prime_power(u64 n);
u64 isqrt(u64 n);
u64 euler_phi(u64 n);
/// Number of divisors, counted exactly from the factorization.
u64 divisor_count(u64 n);
int valuation(u64 n, u64 p);
u64 powmod(u64 base, u64 exp, u64 mod);

/// Distinct primes dividing n, ascending.
std::vector<u64> prime_divisors(u64 n);

/// A fundamental discriminant d: d = 1 mod 4 squarefree, or d = 4m with
/// m = 2, 3 mod 4 squarefree; |d| > 1.
class FundamentalDiscriminant {
 public:
  /// Throws PreconditionError when d is not fundamental.
  explicit FundamentalDiscriminant(i64 d);
  static std::optional<FundamentalDiscriminant> try_make(i64 d) noexcept;

  i64 value() const noexcept { return d_; }
  int sign() const noexcept { return d_ > 0 ? 1 : -1; }
  u64 abs() const noexcept { return static_cast<u64>(d_ > 0 ? d_ : -d_); }

  /// chi_d(n) = (d/n).
  int chi(u64 n) const { return kronecker(d_, n); }

  friend bool operator==(const FundamentalDiscriminant&, const FundamentalDiscriminant&) = default;

 private:
  struct Unchecked {};
  FundamentalDiscriminant(i64 d, Unchecked) noexcept : d_(d) {}
  i64 d_;
};

bool is_fundamental_discriminant(i64 d);

}  // namespace qtwist
