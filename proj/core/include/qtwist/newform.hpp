#pragma once

// Hecke eigenvalue sources for a newform f of level N, even weight k and
// sign eps_f: an elliptic curve (point counts) or a coefficient file of
// normalized lambda_f(p) = a_p / p^{(k-1)/2}.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtwist/arith.hpp"
#include "qtwist/curve.hpp"

namespace qtwist {

class Newform {
 public:
  /// Eigenvalues for every prime <= prime_limit from point counts on `e`.
  /// When QTWIST_CACHE_DIR is set (or cache_dir is given) the table is read
  /// from and written to a coefficient file there.
  static Newform from_curve(const EllipticCurve& e, u64 prime_limit, unsigned workers = 1,
                            std::optional<std::filesystem::path> cache_dir = std::nullopt);

  /// primes: ascending, complete up to their maximum except possibly at
  /// primes dividing the level. Values are normalized eigenvalues.
  static Newform from_coefficients(i64 level, int weight, int root_number,
                                   std::vector<std::pair<u64, double>> lambda_by_prime,
                                   std::string label = {});

  /// Coefficient file: a header line "N <level> k <weight> eps <sign>"
  /// followed by "p value" lines; '#' starts a comment.
  static Newform read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

  i64 level() const noexcept { return level_; }
  int weight() const noexcept { return weight_; }
  int root_number() const noexcept { return eps_; }
  const std::string& label() const noexcept { return label_; }
  /// Every prime <= prime_limit() has a known (or logged-as-skipped) eigenvalue.
  u64 prime_limit() const noexcept { return limit_; }

  /// Primes covered, ascending, and their eigenvalues (aligned arrays).
  /// Skipped bad primes carry 0.
  std::span<const u32> primes() const noexcept { return primes_; }
  std::span<const double> lambdas() const noexcept { return lambda_; }
  /// Bad primes whose eigenvalue could not be determined (treated as 0).
  const std::vector<u64>& skipped_primes() const noexcept { return skipped_; }

  /// lambda_f(p); throws MissingCoefficient for p beyond prime_limit and
  /// PreconditionError for composite p.
  double lambda_p(u64 p) const;

  /// Source curve when built by from_curve, else nullptr.
  const EllipticCurve* curve() const noexcept { return curve_ ? &*curve_ : nullptr; }

 private:
  static Newform build(i64 level, int weight, int root_number,
                       std::vector<std::pair<u64, double>> values, std::string label, u64 limit);

  i64 level_ = 1;
  int weight_ = 2;
  int eps_ = 1;
  std::string label_;
  u64 limit_ = 0;
  std::vector<u32> primes_;
  std::vector<double> lambda_;
  std::vector<u64> skipped_;
  std::optional<EllipticCurve> curve_;
};

/// Multiplicative extension: lambda(p^{j+1}) = lambda(p) lambda(p^j) - [p !| N] lambda(p^{j-1}).
double hecke_lambda(const Newform& f, u64 n);

/// lambda(n) for all 0 <= n <= nmax (entry 0 unused) by one sieve pass.
std::vector<double> hecke_lambda_table(const Newform& f, u64 nmax);

/// Lambda_f(n) = (alpha^j + beta^j) log p for n = p^j with p !| N;
/// lambda(p)^j log p at p | N; 0 when n is not a prime power.
double vonmangoldt_f(const Newform& f, u64 n);

/// s_j = alpha^j + beta^j from s_0 = 2, s_1 = lambda, s_j = lambda s_{j-1} - s_{j-2}.
double power_sum(double lambda, int j);

/// eps_f(d) = eps_f chi_d(-N). d = 1 is accepted (the untwisted form).
/// Throws PreconditionError when gcd(d, 2N) > 1.
int root_number_twist(const Newform& f, i64 d);
int root_number_twist(i64 level, int eps, i64 d);

/// Default cache directory from QTWIST_CACHE_DIR, if set.
std::optional<std::filesystem::path> default_cache_dir();

/// Catalog curve by label, as a newform with eigenvalues up to prime_limit.
Newform catalog_form(const std::string& label, u64 prime_limit, unsigned workers = 1);

}  // namespace qtwist
