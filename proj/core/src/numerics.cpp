#include "qtwist/numerics.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "qtwist/errors.hpp"

namespace qtwist {

namespace {

constexpr double kPi = std::numbers::pi;

bool at_pole(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

// Lanczos g = 7, n = 9 (Godfrey's coefficients).
constexpr std::array<double, 9> kLanczos{
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

}  // namespace

cplx log_gamma(cplx z) {
  if (at_pole(z)) throw PreconditionError("log_gamma: pole at non-positive integer");
  if (z.real() < 0.5) {
    // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    return std::log(kPi) - std::log(std::sin(kPi * z)) - log_gamma(1.0 - z);
  }
  // Shift up for accuracy when |z| is small; Lanczos is accurate for Re z >= 1/2.
  z -= 1.0;
  cplx x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + static_cast<double>(i));
  const cplx t = z + 7.5;
  return 0.5 * std::log(2 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

cplx gamma(cplx z) {
  if (at_pole(z)) throw PreconditionError("gamma: pole at non-positive integer");
  if (z.imag() == 0.0) return boost::math::tgamma(z.real());
  return std::exp(log_gamma(z));
}

cplx digamma(cplx z) {
  if (at_pole(z)) throw PreconditionError("digamma: pole at non-positive integer");
  if (z.real() < 0.5) {
    // psi(1-z) - psi(z) = pi cot(pi z)
    return digamma(1.0 - z) - kPi / std::tan(kPi * z);
  }
  cplx acc = 0.0;
  while (std::abs(z) < 10.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  // psi(z) ~ log z - 1/(2z) - sum B_{2k}/(2k z^{2k})
  static constexpr std::array<double, 8> b{1.0 / 12,       -1.0 / 120,      1.0 / 252,
                                           -1.0 / 240,     1.0 / 132,       -691.0 / 32760,
                                           1.0 / 12,       -3617.0 / 8160};
  const cplx z2 = 1.0 / (z * z);
  cplx pw = z2, series = 0.0;
  for (double c : b) {
    series += c * pw;
    pw *= z2;
  }
  return acc + std::log(z) - 0.5 / z - series;
}

double digamma(double x) { return boost::math::digamma(x); }

namespace {

cplx upper_gamma_series(cplx z, double y) {
  // gamma(z,y) = y^z e^{-y} sum_n y^n / (z (z+1) ... (z+n))
  cplx term = 1.0 / z, sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= y / (z + static_cast<double>(n));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  const cplx lower = std::exp(z * std::log(y) - y) * sum;
  return gamma(z) - lower;
}

cplx upper_gamma_cf(cplx z, double y) {
  // Modified Lentz on Gamma(z,y) = e^{-y} y^z / (y + 1 - z - 1(1-z)/(y + 3 - z - ...))
  const double tiny = 1e-300;
  cplx b = y + 1.0 - z;
  cplx c = 1.0 / tiny;
  cplx d = 1.0 / b;
  cplx h = d;
  for (int i = 1; i < 100000; ++i) {
    const cplx an = -static_cast<double>(i) * (static_cast<double>(i) - z);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const cplx delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(z * std::log(y) - y) * h;
}

}  // namespace

cplx upper_gamma(cplx z, double y) {
  if (!(y > 0)) throw PreconditionError("upper_gamma: y must be positive");
  if (at_pole(z)) throw PreconditionError("upper_gamma: z at a non-positive integer");
  if (z.real() < 0.5) {
    // Gamma(z, y) = (Gamma(z+1, y) - y^z e^{-y}) / z
    return (upper_gamma(z + 1.0, y) - std::exp(z * std::log(y) - y)) / z;
  }
  if (y < z.real() + 1.0) return upper_gamma_series(z, y);
  return upper_gamma_cf(z, y);
}

double upper_gamma(double a, double y) {
  if (!(y > 0)) throw PreconditionError("upper_gamma: y must be positive");
  if (a > 0) return boost::math::tgamma(a, y);
  if (a == 0) return expint_e1(y);
  return (upper_gamma(a + 1, y) - std::exp(a * std::log(y) - y)) / a;
}

double expint_e1(double y) {
  if (!(y > 0)) throw PreconditionError("expint_e1: y must be positive");
  return boost::math::expint(1, y);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol, double* error_out) {
  double err = 0;
  double l1 = 0;
  const double val =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, rel_tol, &err, &l1);
  if (error_out) *error_out = err;
  if (!(err <= std::max(abs_tol, rel_tol * std::abs(val))) && !(err <= 1e-3 * rel_tol * l1))
  {
    char buf[160];
    std::snprintf(buf, sizeof buf, "quadrature did not converge on [%.6g, %.6g]: estimate %.6g, error %.3g", a, b, val, err);
    throw GateFailure(buf);
  }
  return val;
}

}  // namespace qtwist
