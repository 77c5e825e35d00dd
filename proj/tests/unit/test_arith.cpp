#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "qtwist/arith.hpp"
#include "qtwist/curve.hpp"
#include "qtwist/errors.hpp"
#include "qtwist/family.hpp"
#include "qtwist/newform.hpp"

using namespace qtwist;

namespace {

bool prime_by_trial(u64 n) {
  if (n < 2) return false;
  for (u64 q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

// (d/p) for a prime p straight from the definitions: Euler's criterion at odd
// p, the mod-8 rule at 2.
int kronecker_prime(i64 d, u64 p) {
  if (p == 2) {
    if (d % 2 == 0) return 0;
    const i64 r = ((d % 8) + 8) % 8;
    return (r == 1 || r == 7) ? 1 : -1;
  }
  const i64 a = ((d % static_cast<i64>(p)) + static_cast<i64>(p)) % static_cast<i64>(p);
  if (a == 0) return 0;
  u64 acc = 1, base = static_cast<u64>(a), e = (p - 1) / 2;
  while (e) {
    if (e & 1) acc = acc * base % p;
    base = base * base % p;
    e >>= 1;
  }
  return acc == 1 ? 1 : -1;
}

int kronecker_oracle(i64 d, u64 n) {
  if (n == 0) return (d == 1 || d == -1) ? 1 : 0;
  int v = 1;
  for (u64 q = 2; n > 1; ++q) {
    while (n % q == 0) {
      v *= kronecker_prime(d, q);
      n /= q;
    }
  }
  return v;
}

bool squarefree_by_trial(u64 n) {
  for (u64 q = 2; q * q <= n; ++q)
    if (n % (q * q) == 0) return false;
  return true;
}

bool fundamental_oracle(i64 d) {
  if (d == 0 || d == 1) return false;
  const i64 r = ((d % 4) + 4) % 4;
  const u64 ad = static_cast<u64>(d < 0 ? -d : d);
  if (r == 1) return squarefree_by_trial(ad);
  if (r != 0) return false;
  const i64 m = d / 4;
  const i64 rm = ((m % 4) + 4) % 4;
  return (rm == 2 || rm == 3) && squarefree_by_trial(static_cast<u64>(m < 0 ? -m : m));
}

// #E(F_p) for y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 by trying every pair.
i64 count_points_naive(const EllipticCurve::AInvariants& a, i64 p) {
  auto md = [p](i64 v) { return ((v % p) + p) % p; };
  i64 count = 1;
  for (i64 x = 0; x < p; ++x)
    for (i64 y = 0; y < p; ++y) {
      const i64 lhs = md(y * y + a[0] * x * y + a[2] * y);
      const i64 rhs = md(x * x * x + a[1] * x * x + a[3] * x + a[4]);
      count += lhs == rhs;
    }
  return count;
}

}  // namespace

TEST_CASE("kronecker spot values") {
  CHECK(kronecker(5, 1) == 1);
  CHECK(kronecker(5, 10) == 0);
  CHECK(kronecker(-3, 7) == 1);
  CHECK(kronecker(7, 0) == 0);
  CHECK(kronecker(-1, 0) == 1);
}

TEST_CASE("kronecker agrees with the Euler-criterion oracle") {
  int bad = 0;
  for (i64 d = -300; d <= 300; ++d)
    for (u64 n = 0; n <= 400; ++n) bad += kronecker(d, n) != kronecker_oracle(d, n);
  CHECK(bad == 0);
}

TEST_CASE("kronecker is completely multiplicative in n") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<u64> nd(1, 10000);
  int bad = 0;
  for (i64 d : {-4, -3, 5, 8, -23, 37, -1155, 1001}) {
    for (int i = 0; i < 20000; ++i) {
      const u64 m = nd(rng), n = nd(rng);
      bad += kronecker(d, m * n) != kronecker(d, m) * kronecker(d, n);
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("kronecker over a full period sums to zero for fundamental d") {
  int bad = 0;
  for (i64 d = -400; d <= 400; ++d) {
    if (!fundamental_oracle(d)) continue;
    const u64 ad = static_cast<u64>(d < 0 ? -d : d);
    long sum = 0;
    for (u64 n = 1; n <= ad; ++n) {
      sum += kronecker(d, n);
      bad += kronecker(d, n) != kronecker(d, n + ad);
    }
    CHECK_MESSAGE(sum == 0, "d=" << d);
  }
  CHECK(bad == 0);
}

TEST_CASE("prime table matches trial division") {
  const PrimeTable t(100000);
  std::vector<u64> expected;
  for (u64 n = 2; n <= 100000; ++n)
    if (prime_by_trial(n)) expected.push_back(n);
  REQUIRE(t.primes().size() == expected.size());
  CHECK(std::equal(expected.begin(), expected.end(), t.primes().begin()));
  int bad = 0;
  for (u64 n = 2; n <= 100000; n += 7) {
    const u64 q = t.least_prime_factor(n);
    bad += n % q != 0 || !prime_by_trial(q);
    for (u64 r = 2; r < q; ++r) bad += n % r == 0;
  }
  CHECK(bad == 0);
  CHECK(t.count_up_to(1000) == 168);
}

TEST_CASE("fundamental discriminants") {
  int bad = 0;
  for (i64 d = -2000; d <= 2000; ++d) bad += is_fundamental_discriminant(d) != fundamental_oracle(d);
  CHECK(bad == 0);
  CHECK_THROWS_AS(FundamentalDiscriminant(1), PreconditionError);
  CHECK(FundamentalDiscriminant(12).value() == 12);
  CHECK_THROWS_AS(FundamentalDiscriminant(20), PreconditionError);
  CHECK(FundamentalDiscriminant(-4).sign() == -1);
  CHECK(FundamentalDiscriminant(-4).abs() == 4);
}

TEST_CASE("family enumeration without forms") {
  const auto fam = TwistFamily::single({}, 1, 1, std::nullopt);
  CHECK(fam.n0() == 8);
  const auto ds = fam.enumerate(0, 30);
  REQUIRE(ds.size() == 1);
  CHECK(ds[0] == 17);
  CHECK(fam.enumerate(30, 30).empty());
  CHECK_THROWS_AS(TwistFamily::single({}, 1, 3, std::nullopt), PreconditionError);
}

TEST_CASE("family enumeration matches a brute-force oracle and the root number rule") {
  const auto e = catalog_curve("37a1");
  REQUIRE(e);
  const FormSignature sig{e->conductor(), e->root_number()};
  const auto fam = TwistFamily::all_classes({sig}, -1);
  std::set<i64> got;
  i64 prev = 0;
  for (i64 d : fam.enumerate(0, 20000)) {
    const u64 ad = static_cast<u64>(d < 0 ? -d : d);
    REQUIRE(ad >= static_cast<u64>(prev));
    prev = static_cast<i64>(ad);
    got.insert(d);
  }
  std::set<i64> expected;
  for (i64 ad = 2; ad <= 20000; ++ad)
    for (i64 d : {ad, -ad}) {
      if (!fundamental_oracle(d) || std::gcd(ad, i64{2 * 37}) != 1) continue;
      // epsilon_f chi_d(-37) with chi_d(-1) = sign(d)
      const int sign = e->root_number() * (d < 0 ? -1 : 1) * kronecker_prime(d, 37);
      if (sign == -1) expected.insert(d);
    }
  CHECK(got == expected);
  for (i64 d : got) CHECK(root_number_twist(e->conductor(), e->root_number(), d) == -1);
}

TEST_CASE("family enumeration is independent of the chunking") {
  const auto fam = TwistFamily::all_classes({{37, 1}, {43, -1}}, -1);
  const auto whole = fam.enumerate(0, 300000);
  std::vector<i64> pieces;
  for (auto [lo, hi] : chunk_ranges(0, 300000, 4096)) {
    auto part = fam.enumerate(lo, hi);
    pieces.insert(pieces.end(), part.begin(), part.end());
  }
  CHECK(whole == pieces);
}

TEST_CASE("point counts on y^2 = x^3 - x") {
  const auto e = EllipticCurve::from_cubic(Cubic{0, -1, 0}, 32, 1);
  CHECK(ap_point_count(e, 3) == 0);
  const i64 n5 = count_points_naive({0, 0, 0, -1, 0}, 5);
  CHECK(ap_point_count(e, 5) == 6 - n5);
  CHECK_THROWS(ap_point_count(e, 2));
}

TEST_CASE("catalog a_p agree with naive counts on the full model, p = 2 included") {
  for (const auto& label : catalog_labels()) {
    const auto e = catalog_curve(label);
    REQUIRE(e);
    const PrimeTable t(400);
    const auto ap = ap_table(*e, t.primes());
    for (std::size_t i = 0; i < ap.size(); ++i) {
      const i64 p = t.primes()[i];
      if (e->conductor() % p == 0) continue;
      REQUIRE(ap[i].has_value());
      CHECK_MESSAGE(*ap[i] == p + 1 - count_points_naive(e->ainvariants(), p), label << " p=" << p);
    }
  }
}

TEST_CASE("Hasse bound for good primes up to 10^4") {
  const auto e = catalog_curve("389a1");
  const PrimeTable t(10000);
  const auto ap = ap_table(*e, t.primes());
  int bad = 0;
  for (std::size_t i = 0; i < ap.size(); ++i)
    if (ap[i]) bad += std::abs(*ap[i]) > 2 * std::sqrt(static_cast<double>(t.primes()[i]));
  CHECK(bad == 0);
}

TEST_CASE("Hecke eigenvalues: recursion, multiplicativity and Deligne's bound") {
  const Newform f = catalog_form("37a1", 10000);
  CHECK(hecke_lambda(f, 1) == 1.0);
  for (u64 p : {2, 3, 5, 7, 11}) CHECK(hecke_lambda(f, p * p) == doctest::Approx(f.lambda_p(p) * f.lambda_p(p) - 1).epsilon(1e-13));
  CHECK(hecke_lambda(f, 12) == doctest::Approx(hecke_lambda(f, 4) * hecke_lambda(f, 3)).epsilon(1e-13));
  // at the level prime the recursion has no p^{j-1} term
  CHECK(hecke_lambda(f, 37 * 37) == doctest::Approx(f.lambda_p(37) * f.lambda_p(37)).epsilon(1e-13));
  const auto table = hecke_lambda_table(f, 10000);
  int bad = 0;
  for (u64 n = 1; n <= 10000; ++n) {
    if (n % 37 == 0) continue;
    bad += std::abs(table[n]) > static_cast<double>(divisor_count(n)) + 1e-9;
    bad += std::abs(table[n] - hecke_lambda(f, n)) > 1e-12 * (1 + std::abs(table[n]));
  }
  CHECK(bad == 0);
  CHECK_THROWS_AS(hecke_lambda(f, 10007), MissingCoefficient);
}

TEST_CASE("von Mangoldt coefficients against Satake root powers") {
  const Newform f = catalog_form("37a1", 10000);
  for (u32 p : f.primes()) {
    if (p == 37) continue;
    const double lam = f.lambda_p(p), lp = std::log(static_cast<double>(p));
    REQUIRE(vonmangoldt_f(f, p) == doctest::Approx(lam * lp).epsilon(1e-12));
    REQUIRE(vonmangoldt_f(f, static_cast<u64>(p) * p) / lp + 2 == doctest::Approx(lam * lam).epsilon(1e-12));
    if (p < 200) {
      const std::complex<double> alpha(lam / 2, std::sqrt(std::max(0.0, 1 - lam * lam / 4)));
      const double s3 = 2 * std::pow(alpha, 3).real();
      CHECK(vonmangoldt_f(f, static_cast<u64>(p) * p * p) == doctest::Approx(s3 * lp).epsilon(1e-10));
    }
  }
  CHECK(vonmangoldt_f(f, 6) == 0.0);
  CHECK(vonmangoldt_f(f, 1) == 0.0);
}

TEST_CASE("Rankin-Selberg partial sums stay bounded" * doctest::timeout(600)) {
  const Newform f = catalog_form("37a1", 1000000);
  std::vector<double> vals;
  double acc = 0;
  std::size_t i = 0;
  const auto ps = f.primes();
  for (double y : {1e3, 1e4, 1e5, 1e6}) {
    for (; i < ps.size() && ps[i] <= y; ++i) {
      const u64 p = ps[i];
      if (p == 2 || p == 37) continue;
      acc += vonmangoldt_f(f, p * p) / static_cast<double>(p);
    }
    vals.push_back(acc + std::log(y));
  }
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  MESSAGE("sum + log y over y = 1e3..1e6: " << vals[0] << " " << vals[1] << " " << vals[2] << " " << vals[3]);
  CHECK(*hi - *lo < 1.0);
}

TEST_CASE("root numbers of twists") {
  CHECK(root_number_twist(37, 1, 17) == kronecker(17, 37) * 1);  // chi_17(-1) = 1
  // epsilon = -1 and chi_d(-N) = -1 give +1
  CHECK(kronecker_oracle(-3, 37) * -1 == -1);
  CHECK(root_number_twist(37, -1, -3) == 1);
  // chi_d(-N) = 1 leaves the sign alone
  for (i64 d : {5, 13, 17, 29, -3, -7}) {
    const int chi = kronecker_oracle(d, 37) * (d < 0 ? -1 : 1);
    CHECK(root_number_twist(37, 1, d) == chi);
    CHECK(root_number_twist(37, -1, d) == -chi);
  }
  CHECK_THROWS_AS(root_number_twist(37, 1, 37 * 5), PreconditionError);
  CHECK_THROWS_AS(root_number_twist(37, 1, -4), PreconditionError);
}

TEST_CASE("coefficient files round-trip") {
  const Newform f = catalog_form("11a1", 2000);
  const auto path = std::filesystem::temp_directory_path() / "qtwist_test_11a1.coef";
  f.write(path);
  const Newform g = Newform::read(path);
  CHECK(g.level() == 11);
  CHECK(g.root_number() == f.root_number());
  REQUIRE(g.primes().size() == f.primes().size());
  for (std::size_t i = 0; i < f.primes().size(); ++i) CHECK(g.lambdas()[i] == f.lambdas()[i]);
  std::filesystem::remove(path);
}

TEST_CASE("prime powers") {
  for (u64 n = 1; n <= 20000; ++n) {
    const auto f = factor_trial(n);
    const auto pp = prime_power(n);
    if (f.size() == 1) {
      REQUIRE(pp);
      CHECK(pp->first == f[0].first);
      CHECK(pp->second == f[0].second);
    } else {
      CHECK_FALSE(pp);
    }
  }
  CHECK(prime_power(u64{1} << 62) == std::pair<u64, int>{2, 62});
  CHECK(prime_power(999983ull * 999983ull) == std::pair<u64, int>{999983, 2});
  CHECK_FALSE(prime_power(999983ull * 999979ull));
}
