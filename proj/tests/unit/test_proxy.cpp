#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qtwist/arith.hpp"
#include "qtwist/curve.hpp"
#include "qtwist/errors.hpp"
#include "qtwist/family.hpp"
#include "qtwist/newform.hpp"
#include "qtwist/proxy.hpp"

using namespace qtwist;

namespace {

const double kLog2 = std::numbers::ln2;

int legendre(i64 a, i64 p) {
  a = ((a % p) + p) % p;
  if (a == 0) return 0;
  i64 acc = 1, base = a, e = (p - 1) / 2;
  while (e) {
    if (e & 1) acc = acc * base % p;
    base = base * base % p;
    e >>= 1;
  }
  return acc == 1 ? 1 : -1;
}

bool prime_oracle(u64 n) {
  if (n < 2) return false;
  for (u64 q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

int roots_oracle(const Cubic& F, i64 p) {
  int r = 0;
  for (i64 z = 0; z < p; ++z) {
    const i64 v = ((((z + F.a2) % p * z + F.a4) % p * z + F.a6) % p + p) % p;
    r += v == 0;
  }
  return r;
}

const Newform& form37() {
  static const Newform f = catalog_form("37a1", 100000);
  return f;
}

const Cubic x3_minus_x{0, -1, 0};
const Cubic x3_minus_x_minus_1{0, -1, -1};
const Cubic c3_cubic{0, -3, -1};        // x^3 - 3x - 1, disc 81
const Cubic c2_cubic{-1, 1, -1};        // (x - 1)(x^2 + 1)

}  // namespace

TEST_CASE("weight examples") {
  CHECK(weight_w(997, 997) == 0.0);
  CHECK(weight_w(2, 1e12) > 0.95);
  CHECK(weight_w(2, 1e12) < 1.0);
  const long double x = 1e6L;
  const long double w = std::pow(1e3L, -1 / std::log(x)) * std::log(x / 1e3L) / std::log(x);
  CHECK(weight_w(1e3, 1e6) == doctest::Approx(static_cast<double>(w)).epsilon(1e-14));
  CHECK(weight_w(1e3, 1e6) == doctest::Approx(std::exp(-0.5) / 2).epsilon(1e-14));
  CHECK_THROWS_AS(weight_w(11, 10), PreconditionError);
  CHECK_THROWS_AS(weight_w(1, 10), PreconditionError);
  double prev = 1;
  for (double p = 2; p <= 1000; p += 1) {
    const double v = weight_w(p, 1000);
    CHECK(v >= 0);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("default x rule") {
  const double X = 1e12;
  CHECK(default_x(X) == doctest::Approx(std::pow(X, 1 / std::log(std::log(std::log(X))))));
  CHECK_THROWS_AS(default_x(10), PreconditionError);
}

TEST_CASE("dirichlet polynomial against an extended-precision oracle") {
  const Newform& f = form37();
  CHECK(dirichlet_poly(f, 17, 1.5) == 0.0);
  for (i64 d : {17, -3, 5, -31, 1001, -4003}) {
    for (double x : {10.0, 1e3, 5e4}) {
      // reverse order, pairwise, in long double
      std::vector<long double> terms;
      for (u64 p = 2; p <= x; ++p) {
        if (!prime_oracle(p)) continue;
        const long double lx = std::log(static_cast<long double>(x));
        const long double w = std::pow(static_cast<long double>(p), -1 / lx) * std::log(x / p) / lx;
        const int chi = p == 2 ? kronecker(d, 2) : legendre(d, static_cast<i64>(p));
        terms.push_back(f.lambda_p(p) * chi * w / std::sqrt(static_cast<long double>(p)));
      }
      long double s = 0;
      for (std::size_t i = terms.size(); i >= 2; i -= 2) s += terms[i - 1] + terms[i - 2];
      if (terms.size() % 2) s += terms[0];
      CHECK(dirichlet_poly(f, d, x) == doctest::Approx(static_cast<double>(s)).epsilon(1e-12));
      const DirichletPoly P(f, x);
      CHECK(P(d) == doctest::Approx(static_cast<double>(s)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(dirichlet_poly(f, 37 * 5, 100), PreconditionError);
  CHECK_THROWS_AS(dirichlet_poly(f, 1000001, 1e6), MissingCoefficient);
}

TEST_CASE("excluded primes drop out of the polynomial") {
  const Newform& f = form37();
  const DirichletPoly full(f, 1000), cut(f, 1000, 296);
  for (i64 d : {5, 13, -3, -11}) {
    // 296 = 8 * 37 removes p = 2 and p = 37
    double dropped = 0;
    for (u64 p : {2, 37}) dropped += f.lambda_p(p) * kronecker(d, p) * weight_w(p, 1000) / std::sqrt(double(p));
    CHECK(full(d) - cut(d) == doctest::Approx(dropped).epsilon(1e-12));
  }
}

TEST_CASE("Deligne envelope bounds every value") {
  const Newform& f = form37();
  const DirichletPoly P(f, 1e4);
  double env = 0;
  for (u64 p = 2; p <= 1e4; ++p)
    if (prime_oracle(p)) env += 2 / std::sqrt(double(p));
  CHECK(P.deligne_envelope() == doctest::Approx(env).epsilon(1e-12));
  const auto fam = TwistFamily::all_classes({FormSignature::of(f)}, -1);
  int bad = 0;
  for (i64 d : fam.enumerate(0, 2e4)) bad += std::abs(P(d)) > env;
  CHECK(bad == 0);
}

TEST_CASE("c(p) examples and values") {
  for (u64 p : {3, 5, 7, 11, 101, 9973}) CHECK(c_of_p(x3_minus_x, p) == 4);
  CHECK(c_of_p(x3_minus_x_minus_1, 5) == 1 + roots_oracle(x3_minus_x_minus_1, 5));
  CHECK(c_of_p(x3_minus_x_minus_1, 5) == 2);  // the single root z = 2
  // 3 divides disc(x^3 - 3x - 1) = 81
  CHECK_THROWS_AS(c_of_p(c3_cubic, 3), PreconditionError);
  CHECK_THROWS_AS(c_of_p(x3_minus_x, 2), PreconditionError);
  CHECK_THROWS_AS(c_of_p(x3_minus_x_minus_1, 23), PreconditionError);
  // C3 field: primes are split or inert, never one root
  for (u64 p : {5, 7, 11, 13, 17, 19}) {
    const int c = c_of_p(c3_cubic, p);
    CHECK((c == 1 || c == 4));
    CHECK(c == 1 + roots_oracle(c3_cubic, static_cast<i64>(p)));
  }
  int bad = 0;
  PrimeTable t(100000);
  for (const Cubic& F : {x3_minus_x, x3_minus_x_minus_1, c3_cubic, c2_cubic}) {
    const i64 disc = F.discriminant();
    for (u32 p : t.primes()) {
      if (p == 2 || disc % p == 0) continue;
      const int c = c_of_p(F, p);
      bad += !(c == 1 || c == 2 || c == 4);
      if (p < 3000) bad += c != 1 + roots_oracle(F, p);
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("Chebotarev proportions up to 1e6") {
  struct Case {
    Cubic F;
    double split, one, none;
  };
  PrimeTable t(1000000);
  for (const Case& k : {Case{x3_minus_x_minus_1, 1.0 / 6, 0.5, 1.0 / 3}, Case{c3_cubic, 1.0 / 3, 0, 2.0 / 3},
                        Case{c2_cubic, 0.5, 0.5, 0}, Case{x3_minus_x, 1, 0, 0}}) {
    const i64 disc = k.F.discriminant();
    double n = 0, split = 0, one = 0, none = 0;
    for (u32 p : t.primes()) {
      if (p == 2 || disc % p == 0) continue;
      const int c = c_of_p(k.F, p);
      n += 1;
      split += c == 4;
      one += c == 2;
      none += c == 1;
    }
    for (auto [obs, q] : {std::pair{split, k.split}, {one, k.one}, {none, k.none}}) {
      const double sd = std::sqrt(n * q * (1 - q));
      CHECK(std::abs(obs - n * q) <= 3 * sd + 1e-9);
    }
  }
}

TEST_CASE("Galois profiles match the table") {
  const double l2 = kLog2;
  struct Row {
    Cubic F;
    GaloisGroup g;
    int degree;
    double mu, sigma2;
  };
  for (const Row& r : {Row{x3_minus_x, GaloisGroup::trivial, 1, -0.5 - 2 * l2, 1 + 4 * l2 * l2},
                       Row{c2_cubic, GaloisGroup::C2, 2, -0.5 - 1.5 * l2, 1 + 2.5 * l2 * l2},
                       Row{c3_cubic, GaloisGroup::C3, 3, -0.5 - (2.0 / 3) * l2, 1 + (4.0 / 3) * l2 * l2},
                       Row{x3_minus_x_minus_1, GaloisGroup::S3, 6, -0.5 - (5.0 / 6) * l2,
                           1 + (7.0 / 6) * l2 * l2}}) {
    const GaloisProfile g = galois_profile(r.F);
    CHECK(g.group == r.g);
    CHECK(g.degree == r.degree);
    CHECK(std::abs(g.mu - r.mu) < 1e-12);
    CHECK(std::abs(g.sigma2 - r.sigma2) < 1e-12);
    CHECK(static_cast<int>(g.fixed_counts.size()) == r.degree);
  }
  CHECK_THROWS_AS(galois_profile(Cubic{0, 0, 0}), PreconditionError);
  CHECK_THROWS_AS(galois_profile(Cubic{-2, 1, 0}), PreconditionError);  // x (x - 1)^2
  const std::vector<int> c{4, 1, 1};
  const auto [mu, s2] = profile_moments(c);
  CHECK(mu == doctest::Approx(-0.5 - std::log(4.0) / 3));
  CHECK(s2 == doctest::Approx(1 + std::log(4.0) * std::log(4.0) / 3));
}

TEST_CASE("Mertens sums: constant c(p)") {
  const auto grid = mertens_grid(x3_minus_x, {1e4, 1e5, 1e6});
  PrimeTable t(1000000);
  double recip = 0;
  std::size_t k = 0;
  std::vector<double> drift;
  for (u32 p : t.primes()) {
    while (k < grid.size() && p > grid[k].y) {
      // p = 2 contributes log 3 / 2 (two roots mod 2)
      CHECK(grid[k].lhs1 == doctest::Approx(std::log(4.0) * recip + std::log(3.0) / 2).epsilon(1e-12));
      drift.push_back(grid[k].lhs1 - grid[k].target1);
      ++k;
    }
    if (p > 2) recip += 1.0 / p;
  }
  drift.push_back(grid.back().lhs1 - grid.back().target1);
  CHECK(std::abs(drift.back() - drift.front()) <= 0.05);
  for (auto& m : grid) CHECK(m.lhs2 >= 0);
}

TEST_CASE("Mertens sums: S3 slopes in log log y") {
  std::vector<double> ys;
  for (double y = 1e3; y <= 1.001e7; y *= std::sqrt(10.0)) ys.push_back(y);
  const auto grid = mertens_grid(x3_minus_x_minus_1, ys);
  double sx = 0, sy1 = 0, sy2 = 0, sxx = 0, sxy1 = 0, sxy2 = 0;
  const double n = static_cast<double>(grid.size());
  for (auto& m : grid) {
    const double u = std::log(std::log(m.y));
    sx += u;
    sxx += u * u;
    sy1 += m.lhs1;
    sy2 += m.lhs2;
    sxy1 += u * m.lhs1;
    sxy2 += u * m.lhs2;
    CHECK(m.lhs2 >= 0);
  }
  const double slope1 = (n * sxy1 - sx * sy1) / (n * sxx - sx * sx);
  const double slope2 = (n * sxy2 - sx * sy2) / (n * sxx - sx * sx);
  MESSAGE("slopes " << slope1 << " " << slope2);
  CHECK(std::abs(slope1 / (5 * kLog2 / 6) - 1) <= 0.10);
  CHECK(std::abs(slope2 / (7 * kLog2 * kLog2 / 6) - 1) <= 0.10);
}

TEST_CASE("C(d; x) against a two-pass oracle") {
  const Cubic& F = x3_minus_x_minus_1;
  const TamagawaWindow C(F, 7, 100);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<i64> pick(-5'000'000, 5'000'000);
  for (int i = 0; i < 200; ++i) {
    const i64 d = pick(rng);
    if (d == 0) continue;
    // pass 1: good window primes; pass 2: the two branches
    std::vector<std::pair<i64, double>> window;
    for (i64 p = 7; p <= 100; ++p)
      if (prime_oracle(p) && F.discriminant() % p != 0) window.push_back({p, std::log(1.0 + roots_oracle(F, p))});
    double want = 0;
    for (auto [p, lc] : window) want += d % p == 0 ? lc * p / (p + 1.0) : -lc / (p + 1.0);
    CHECK(C(d) == doctest::Approx(want).epsilon(1e-12));
    CHECK(C(d) + C.shift() == doctest::Approx(C.divisor_part(d)).epsilon(1e-12));
  }
  // 23 | disc(F) is skipped and reported
  CHECK(std::find(C.skipped().begin(), C.skipped().end(), 23) != C.skipped().end());
}

TEST_CASE("C(d; x) examples") {
  const TamagawaWindow Cc(x3_minus_x, 10, 1000);
  double shift = 0;
  for (u64 p = 11; p <= 1000; ++p)
    if (prime_oracle(p)) shift += std::log(4.0) / (p + 1.0);
  // 7 has no prime factor in the window
  CHECK(Cc(7) == doctest::Approx(-shift).epsilon(1e-12));
  // one window prime dividing d flips its term to (p/(p+1)) log 4
  CHECK(Cc(7 * 13) - Cc(7) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  ProxyConfig cfg{1e6, 5000, {}};
  CHECK(cfg.window_lo() == doctest::Approx(std::log(1e6)));
  CHECK(tamagawa_sum_C(x3_minus_x, 7, cfg) == doctest::Approx(TamagawaWindow(x3_minus_x, std::log(1e6), 5000)(7)));
  const TamagawaWindow w(x3_minus_x, std::log(1e6), 5000);
  CHECK(w.in_regime(1e6, 8));
  CHECK_FALSE(w.in_regime(1e6, 296));
}

TEST_CASE("normalized statistics") {
  const double X = 1e6, ll = std::log(std::log(X));
  const std::vector<double> zero{0.0, 0.0};
  const auto z = normalized_stats(zero, X);
  CHECK(z.Q == std::vector<double>{0.0, 0.0});
  CHECK_FALSE(z.R1);

  const Newform& f = form37();
  const Newform g = catalog_form("53a1", 100000);
  const i64 d = 5;
  const std::vector<double> P{dirichlet_poly(f, d, 1e3), dirichlet_poly(g, d, 1e3)};
  const auto s = normalized_stats(P, X);
  CHECK(s.Q[0] * std::sqrt(ll) == doctest::Approx(P[0]));
  CHECK(s.Q[1] * std::sqrt(ll) == doctest::Approx(P[1]));

  const auto* E = f.curve();
  REQUIRE(E != nullptr);
  const GaloisProfile prof = galois_profile(E->cubic());
  const double Cd = tamagawa_sum_C(E->cubic(), d, ProxyConfig{X, 1e3, {}});
  const auto r = normalized_stats(P, X, Cd, prof.sigma2);
  CHECK(*r.R1 == doctest::Approx(s.Q[0]));
  CHECK(*r.R2 == doctest::Approx((P[0] - Cd) / std::sqrt(prof.sigma2 * ll)));
  CHECK_THROWS_AS(normalized_stats(P, 10), PreconditionError);
}
