#include "qtwist/lvalue.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qtwist/errors.hpp"

namespace qtwist {

namespace {
constexpr double kPi = std::numbers::pi;

double conductor_q(i64 level, i64 d) {
  const double ad = std::abs(static_cast<double>(d));
  return std::sqrt(static_cast<double>(level)) * ad / (2.0 * kPi);
}
}  // namespace

u64 required_table_size(i64 level, i64 d, const LOptions& opt) {
  const double tmax = std::max(opt.split, 1.0 / opt.split);
  return 2 * (static_cast<u64>(std::ceil(opt.truncation_c * conductor_q(level, d) * tmax)) + 16);
}

CoefficientTable::CoefficientTable(const Newform& f, u64 nmax)
    : form_(&f), nmax_(nmax), table_(std::max<u64>(nmax, 2)), lambda_(hecke_lambda_table(f, nmax)) {}

std::vector<double> CoefficientTable::twisted(i64 d, u64 T) const {
  if (T > nmax_) throw PreconditionError("truncation " + std::to_string(T) + " exceeds coefficient table (" + std::to_string(nmax_) + ")");
  std::vector<double> a(T + 1, 0.0);
  if (T == 0) return a;
  std::vector<signed char> chi(T + 1, 0);
  chi[1] = 1;
  for (u64 n = 2; n <= T; ++n) {
    const u64 p = table_.least_prime_factor(n);
    chi[n] = p == n ? static_cast<signed char>(kronecker(d, p))
                    : static_cast<signed char>(chi[p] * chi[n / p]);
  }
  for (u64 n = 1; n <= T; ++n) a[n] = chi[n] ? lambda_[n] * chi[n] : 0.0;
  return a;
}

TwistedL::TwistedL(const CoefficientTable& table, i64 d, LOptions opt)
    : table_(&table), d_(d), opt_(opt) {
  const Newform& f = table.form();
  if (d == 0) throw PreconditionError("d must be nonzero");
  if (d != 1 && !is_fundamental_discriminant(d)) throw PreconditionError("d must be a fundamental discriminant or 1");
  eps_ = root_number_twist(f, d);
  Q_ = conductor_q(f.level(), d);
  kappa_ = (f.weight() - 1) / 2.0;
  const double tmax = std::max(opt.split, 1.0 / opt.split);
  T_ = static_cast<u64>(std::ceil(opt.truncation_c * Q_ * tmax)) + 16;
  if (2 * T_ > table.nmax())
    throw PreconditionError("truncation budget exceeded: need coefficients up to " + std::to_string(2 * T_) +
                            ", table has " + std::to_string(table.nmax()));
  a_ = table.twisted(d, 2 * T_);
}

double TwistedL::I(double s, double t, u64 from, u64 to) const {
  NeumaierSum acc;
  const double a = s + kappa_;
  for (u64 n = from + 1; n <= to; ++n) {
    if (a_[n] == 0.0) continue;
    const double y = static_cast<double>(n) / (Q_ * t);
    acc.add(a_[n] * std::pow(Q_ / static_cast<double>(n), s) * upper_gamma(a, y));
  }
  return acc.value();
}

cplx TwistedL::I(cplx s, double t, u64 from, u64 to) const {
  if (s.imag() == 0.0) return I(s.real(), t, from, to);
  ComplexNeumaierSum acc;
  const cplx a = s + kappa_;
  for (u64 n = from + 1; n <= to; ++n) {
    if (a_[n] == 0.0) continue;
    const double y = static_cast<double>(n) / (Q_ * t);
    acc.add(a_[n] * std::exp(s * std::log(Q_ / static_cast<double>(n))) * upper_gamma(a, y));
  }
  return acc.value();
}

CompletedLValue TwistedL::complete_lambda(cplx s) const {
  const double t2 = opt_.split;
  const double e = eps_;
  CompletedLValue r;
  r.s = s;
  r.truncation = T_;
  const cplx I1s = I(s, 1.0, 0, T_);
  const cplx I1r = I(1.0 - s, 1.0, 0, T_);
  r.value = I1s + e * I1r;
  // Lambda_t2(1 - s) = I_t2(1 - s) + eps I_{1/t2}(s)
  const cplx alt = I(1.0 - s, t2, 0, T_) + e * I(s, 1.0 / t2, 0, T_);
  r.fe_residual = std::abs(r.value - e * alt);
  const cplx tail = I(s, 1.0, T_, 2 * T_) + e * I(1.0 - s, 1.0, T_, 2 * T_);
  r.doubling_change = std::abs(tail);
  r.scale = std::max(1.0, std::abs(r.value));
  r.estimated_error = std::max({r.doubling_change, r.fe_residual, 1e-16 * r.scale});
  if (opt_.enforce) {
    if (r.fe_residual > opt_.fe_tolerance * r.scale || r.doubling_change > opt_.doubling_tolerance * r.scale) {
      std::ostringstream os;
      os.precision(17);
      os << "L-function contract failed at d=" << d_ << " s=" << s << ": fe_residual=" << r.fe_residual
         << " doubling_change=" << r.doubling_change << " scale=" << r.scale;
      throw GateFailure(os.str());
    }
  }
  return r;
}

namespace {

// K(z, y) = int_y^inf e^{-u} u^{z-1} log(u/y) du for integer z >= 1, with
// Gamma(z, y) alongside: K(1) = E1, K(z+1) = z K(z) + Gamma(z).
std::pair<double, double> kernel_K(int z, double y) {
  double K = expint_e1(y);
  double G = std::exp(-y);
  for (int j = 1; j < z; ++j) {
    const double nextK = j * K + G;
    G = j * G + std::pow(y, j) * std::exp(-y);
    K = nextK;
  }
  return {K, G};
}

}  // namespace

CentralDerivative TwistedL::central_derivative() const {
  if (eps_ != -1) throw PreconditionError("central_derivative: root number of the twist is +1");
  const int k = table_->form().weight();
  const int z = k / 2;
  CentralDerivative r;
  r.d = d_;
  auto sum_range = [&](u64 from, u64 to, double* abs_sum) {
    NeumaierSum acc;
    double mag = 0;
    for (u64 n = from + 1; n <= to; ++n) {
      if (a_[n] == 0.0) continue;
      const double y = static_cast<double>(n) / Q_;
      const double term = a_[n] * std::sqrt(Q_ / static_cast<double>(n)) * kernel_K(z, y).first;
      acc.add(term);
      mag += std::abs(term);
    }
    if (abs_sum) *abs_sum = mag;
    return 2.0 * acc.value();
  };
  double mag = 0;
  r.lambda_prime = sum_range(0, T_, &mag);
  const double tail = std::abs(sum_range(T_, 2 * T_, nullptr));
  const double norm = std::sqrt(Q_) * std::tgamma(z);
  r.lprime = r.lambda_prime / norm;
  r.estimated_error = std::max(tail, 2e-16 * mag) / norm;

  const double h = 1e-4;
  const auto plus = complete_lambda(cplx(0.5 + h, 0));
  const auto minus = complete_lambda(cplx(0.5 - h, 0));
  r.finite_difference = (plus.value.real() - minus.value.real()) / (2 * h);
  r.fd_relative_error = std::abs(r.finite_difference - r.lambda_prime) / std::max(std::abs(r.lambda_prime), 1e-300);
  r.undecided = std::abs(r.lprime) <= std::max(1e-10, 100 * r.estimated_error);
  if (opt_.enforce && !r.undecided && r.fd_relative_error > 1e-6) {
    std::ostringstream os;
    os.precision(17);
    os << "derivative kernel disagrees with finite difference at d=" << d_ << ": kernel=" << r.lambda_prime
       << " fd=" << r.finite_difference << " rel=" << r.fd_relative_error;
    throw GateFailure(os.str());
  }
  r.logabs = std::log(std::abs(r.lprime));
  const double ad = std::abs(static_cast<double>(d_));
  if (ad >= 20) {
    const double ll = std::log(std::log(ad));
    r.u = (r.logabs - 0.5 * ll) / std::sqrt(ll);
  }
  return r;
}

CentralValue TwistedL::central_value() const {
  if (eps_ != 1) throw PreconditionError("central_value: root number of the twist is -1 (forced zero)");
  const int z = table_->form().weight() / 2;
  CentralValue r;
  r.d = d_;
  auto sum_range = [&](u64 from, u64 to, double* mag) {
    NeumaierSum acc;
    double m = 0;
    for (u64 n = from + 1; n <= to; ++n) {
      if (a_[n] == 0.0) continue;
      const double y = static_cast<double>(n) / Q_;
      const double term = a_[n] * std::sqrt(Q_ / static_cast<double>(n)) * kernel_K(z, y).second;
      acc.add(term);
      m += std::abs(term);
    }
    if (mag) *mag = m;
    return 2.0 * acc.value();
  };
  double mag = 0;
  const double lam = sum_range(0, T_, &mag);
  const double tail = std::abs(sum_range(T_, 2 * T_, nullptr));
  const double norm = std::sqrt(Q_) * std::tgamma(z);
  r.value = lam / norm;
  r.estimated_error = std::max(tail, 2e-16 * mag) / norm;
  r.undecided = std::abs(r.value) <= std::max(1e-10, 100 * r.estimated_error);
  return r;
}

double TwistedL::central_derivative_extended() const {
  using mp = boost::multiprecision::cpp_bin_float_50;
  if (table_->form().weight() != 2) throw PreconditionError("extended mode is implemented for weight 2");
  if (eps_ != -1) throw PreconditionError("central_derivative: root number of the twist is +1");
  const mp pi = boost::math::constants::pi<mp>();
  const mp Q = boost::multiprecision::sqrt(mp(table_->form().level())) * mp(std::abs(d_)) / (2 * pi);
  mp acc = 0;
  for (u64 n = 1; n <= T_; ++n) {
    if (a_[n] == 0.0) continue;
    const long long an = std::llround(a_[n] * std::sqrt(static_cast<double>(n)));
    if (an == 0) continue;
    const mp nn(n);
    // a_n / sqrt(n) * sqrt(Q / n) ... with the analytic normalization lambda(n) = a_n / sqrt(n)
    acc += mp(an) / boost::multiprecision::sqrt(nn) * boost::multiprecision::sqrt(Q / nn) *
           boost::math::expint(1, nn / Q);
  }
  const mp lp = 2 * acc / boost::multiprecision::sqrt(Q);
  return static_cast<double>(lp);
}

cplx lambda_euler_product(const Newform& f, i64 d, cplx s, u64 P) {
  if (s.real() <= 1.0) throw PreconditionError("Euler product needs Re s > 1");
  const double Q = conductor_q(f.level(), d);
  const double kappa = (f.weight() - 1) / 2.0;
  PrimeTable t(std::max<u64>(P, 2));
  cplx log_l = 0;
  for (u32 p : t.primes()) {
    const int chi = kronecker(d, p);
    if (chi == 0) continue;
    const double lp = f.lambda_p(p);
    const cplx x = std::exp(-s * std::log(static_cast<double>(p)));
    cplx local = 1.0 - lp * chi * x;
    if (f.level() % static_cast<i64>(p) != 0) local += x * x;
    log_l -= std::log(local);
  }
  return std::exp(s * std::log(Q) + log_gamma(s + kappa) + log_l);
}

double lprime_proxy_residual(double logabs_lprime, double P, double x) {
  if (x < 3) throw PreconditionError("lprime_proxy_residual: need x >= 3");
  return logabs_lprime - P - 0.5 * std::log(std::log(x));
}

}  // namespace qtwist
