#include <doctest.h>

#include <boost/math/special_functions/expint.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "qtwist/errors.hpp"
#include "qtwist/family.hpp"
#include "qtwist/lvalue.hpp"
#include "qtwist/moments.hpp"
#include "qtwist/newform.hpp"
#include "qtwist/proxy.hpp"

using namespace qtwist;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

const Newform& f37() {
  static const Newform f = catalog_form("37a1", 1000000);
  return f;
}

const CoefficientTable& table37() {
  static const CoefficientTable t(f37(), 1000000);
  return t;
}

// Classical rank-one series L'(E, 1) = 2 sum a_n / n E_1(2 pi n / sqrt N),
// with integer a_n from the multiplicative recursion on a_p and 50 digits.
double lprime_series_oracle(const Newform& f, int terms) {
  std::vector<long long> ap(terms + 1, 0);
  for (int p = 2; p <= terms; ++p) {
    bool prime = true;
    for (int q = 2; q * q <= p; ++q)
      if (p % q == 0) prime = false;
    if (prime) ap[p] = std::llround(f.lambda_p(p) * std::sqrt(double(p)));
  }
  std::vector<long long> a(terms + 1, 0);
  a[1] = 1;
  for (int n = 2; n <= terms; ++n) {
    int p = 2;
    while (n % p) ++p;
    int m = n, pk = 1;
    while (m % p == 0) {
      m /= p;
      pk *= p;
    }
    if (m != 1) {
      a[n] = a[pk] * a[m];
      continue;
    }
    // n = p^j
    if (n == p)
      a[n] = ap[p];
    else if (f.level() % p == 0)
      a[n] = ap[p] * a[n / p];
    else
      a[n] = ap[p] * a[n / p] - p * a[n / p / p];
  }
  const big root_n = boost::multiprecision::sqrt(big(f.level()));
  const big two_pi = 2 * boost::math::constants::pi<big>();
  big s = 0;
  for (int n = 1; n <= terms; ++n) {
    if (a[n] == 0) continue;
    s += big(a[n]) / n * boost::math::expint(1, two_pi * n / root_n);
  }
  return static_cast<double>(2 * s);
}

std::vector<i64> sample_family(int count, double top) {
  const auto fam = TwistFamily::all_classes({FormSignature::of(f37())}, -1);
  const auto all = fam.enumerate(0, top);
  std::vector<i64> out;
  const std::size_t step = std::max<std::size_t>(1, all.size() / count);
  for (std::size_t i = 0; i < all.size() && static_cast<int>(out.size()) < count; i += step) out.push_back(all[i]);
  return out;
}

}  // namespace

TEST_CASE("central derivative of the untwisted rank-one form") {
  const TwistedL L(table37(), 1);
  CHECK(L.root_number() == -1);
  const CentralDerivative c = L.central_derivative();
  const double oracle = lprime_series_oracle(f37(), 200);
  MESSAGE("engine " << c.lprime << ", series oracle " << oracle);
  CHECK(c.lprime == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(L.central_derivative_extended() == doctest::Approx(oracle).epsilon(1e-14));
  // Lambda'(1/2) = sqrt(Q) Gamma(1) L'(1/2)
  CHECK(c.lambda_prime == doctest::Approx(std::sqrt(L.Q()) * oracle).epsilon(1e-10));
  CHECK(c.fd_relative_error <= 1e-6);
  CHECK_FALSE(c.undecided);
}

TEST_CASE("odd twists vanish at the centre") {
  for (i64 d : sample_family(12, 3000)) {
    const TwistedL L(table37(), d);
    REQUIRE(L.root_number() == -1);
    const CompletedLValue v = L.complete_lambda({0.5, 0.0});
    CHECK(std::abs(v.value) <= 1e-8 * v.scale);
    CHECK(v.fe_residual <= 1e-8 * v.scale);
    CHECK(v.doubling_change <= 1e-9 * v.scale);
  }
}

TEST_CASE("functional equation relates s and 1 - s") {
  for (i64 d : {-3, 5, -7, 13, 17}) {
    const TwistedL L(table37(), d);
    for (double sr : {0.6, 0.9}) {
      const cplx s(sr, 1.3);
      const CompletedLValue a = L.complete_lambda(s);
      const CompletedLValue b = L.complete_lambda(1.0 - s);
      CHECK(std::abs(a.value - static_cast<double>(L.root_number()) * b.value) <= 1e-8 * std::max(a.scale, b.scale));
    }
  }
}

TEST_CASE("derivative kernel against the finite difference on 50 twists") {
  const auto ds = sample_family(50, 4000);
  REQUIRE(ds.size() == 50);
  int bad = 0;
  double worst = 0;
  for (i64 d : ds) {
    const CentralDerivative c = TwistedL(table37(), d).central_derivative();
    if (c.undecided) continue;
    worst = std::max(worst, c.fd_relative_error);
    bad += c.fd_relative_error > 1e-6;
    // recomposition of the normalized statistic
    if (std::abs(d) < 20) {
      CHECK_FALSE(c.u);
      continue;
    }
    REQUIRE(c.u);
    const double ll = std::log(std::log(std::abs(double(d))));
    CHECK(*c.u * std::sqrt(ll) + 0.5 * ll == doctest::Approx(c.logabs).epsilon(1e-14));
    CHECK(*c.u == u_statistic(c.logabs, d));
    CHECK(c.logabs == doctest::Approx(std::log(std::abs(c.lprime))).epsilon(1e-15));
  }
  MESSAGE("largest relative finite-difference gap " << worst);
  CHECK(bad == 0);
}

TEST_CASE("Re s >= 2 agrees with the Euler product") {
  const Newform& f = f37();
  for (i64 d : {1, -3, 5, 1109}) {
    const TwistedL L(table37(), d);
    for (cplx s : {cplx(3.0, 0.0), cplx(3.0, 2.0), cplx(2.0, 0.0), cplx(2.5, -1.0)}) {
      const cplx afe = L.complete_lambda(s).value;
      const cplx euler = lambda_euler_product(f, d, s, 1000000);
      CHECK(std::abs(afe - euler) <= 1e-8 * std::abs(euler));
    }
  }
  CHECK_THROWS_AS(lambda_euler_product(f, 5, cplx(1.0, 0.0), 1000), PreconditionError);
}

TEST_CASE("preconditions and gates") {
  CHECK_THROWS_AS(TwistedL(table37(), -111), PreconditionError);
  CHECK_THROWS_AS(TwistedL(table37(), 20), PreconditionError);
  CHECK_THROWS_AS(TwistedL(table37(), 0), PreconditionError);
  // 5 gives eps = -chi_5(-37) = +1
  const TwistedL even(table37(), 5);
  REQUIRE(even.root_number() == 1);
  CHECK_THROWS_AS(even.central_derivative(), PreconditionError);
  CHECK_THROWS_AS(even.central_derivative_extended(), PreconditionError);
  const CentralValue cv = even.central_value();
  CHECK(std::isfinite(cv.value));
  const TwistedL odd(table37(), sample_family(1, 100).front());
  REQUIRE(odd.root_number() == -1);
  CHECK_THROWS_AS(odd.central_value(), PreconditionError);
  // a table that cannot reach the truncation length
  const CoefficientTable small(f37(), 1000);
  CHECK_THROWS_AS(TwistedL(small, 99989), PreconditionError);
  // starving the truncation trips the doubling gate
  LOptions starve;
  starve.truncation_c = 0.5;
  CHECK_THROWS_AS(TwistedL(table37(), -3, starve).complete_lambda({0.7, 0.0}), GateFailure);
  starve.enforce = false;
  const CompletedLValue loose = TwistedL(table37(), -3, starve).complete_lambda({0.7, 0.0});
  CHECK(loose.doubling_change > 1e-9 * loose.scale);
  CHECK(required_table_size(37, -3) >= TwistedL(table37(), -3).truncation());
}

TEST_CASE("proxy residual bookkeeping") {
  CHECK(lprime_proxy_residual(0.3, 0.0, 100) == doctest::Approx(0.3 - 0.5 * std::log(std::log(100.0))));
  const double logabs = -0.4, P = 1.25;
  for (double d : {1e3, 5e4, 2e6}) {
    const double full = lprime_proxy_residual(logabs, P, d);
    const double half = lprime_proxy_residual(logabs, P, std::sqrt(d));
    CHECK(half - full == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(lprime_proxy_residual(0.0, 0.0, 2.0), PreconditionError);

  // residuals over a scan have a bounded median
  std::vector<double> res;
  for (i64 d : sample_family(40, 4000)) {
    const CentralDerivative c = TwistedL(table37(), d).central_derivative();
    if (c.undecided) continue;
    const double x = std::sqrt(std::abs(double(d)));
    res.push_back(lprime_proxy_residual(c.logabs, dirichlet_poly(f37(), d, x), x));
  }
  std::sort(res.begin(), res.end());
  const double median = res[res.size() / 2];
  MESSAGE("median residual " << median << " over " << res.size() << " twists");
  CHECK(std::abs(median) < 3.0);
}

TEST_CASE("extended precision matches double precision on twists") {
  for (i64 d : sample_family(6, 2000)) {
    const TwistedL L(table37(), d);
    const CentralDerivative c = L.central_derivative();
    CHECK(L.central_derivative_extended() == doctest::Approx(c.lprime).epsilon(1e-9));
  }
}
