#include "qtwist/explicit_formula.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <spdlog/spdlog.h>

#include "qtwist/charsum.hpp"
#include "qtwist/errors.hpp"
#include "qtwist/numerics.hpp"

namespace qtwist {

namespace {
constexpr double kPi = std::numbers::pi;
}

KernelPair fejer_kernel(double L) {
  if (!(L >= 1)) throw PreconditionError("kernel dilation L must be >= 1");
  KernelPair k;
  k.name = "fejer";
  k.h = [](double t) {
    if (std::abs(t) < 1e-8) return 1.0 - (kPi * t) * (kPi * t) / 3.0;
    const double s = std::sin(kPi * t) / (kPi * t);
    return s * s;
  };
  k.hat = [](double xi) { return std::max(1.0 - std::abs(xi), 0.0); };
  k.L = L;
  return k;
}

double prop2_kernel_factor(double X, const KernelPair& k) {
  return 2.0 * std::log(X) / k.L * k.hat0() + k.h0() / 2.0;
}

ZeroSumEngine::ZeroSumEngine(std::vector<const Newform*> forms, KernelPair kernel)
    : forms_(std::move(forms)), kernel_(std::move(kernel)), cutoff_(std::exp(kernel_.L)) {
  const double L = kernel_.L;
  if (!(L >= 1)) throw PreconditionError("kernel dilation L must be >= 1");
  if (cutoff_ > 4.0e9) throw PreconditionError("e^L beyond the prime-table budget");
  const u64 top = static_cast<u64>(std::floor(cutoff_));
  for (const Newform* f : forms_) {
    if (top > f->prime_limit()) throw MissingCoefficient(top, f->prime_limit());
  }
  const double hat0 = kernel_.hat0();
  for (const Newform* f : forms_) {
    const double z = f->weight() / 2.0;
    // A(k, L) = (1/L)[2 hat(0) psi(z) + int_0^L 2 e^{-zu}(hat(0) - hat(u/L))/(1 - e^{-u}) du
    //                 + 2 hat(0) sum_m e^{-(z+m)L}/(z+m)]
    auto integrand = [&](double u) {
      return 2.0 * std::exp(-z * u) * (hat0 - kernel_.hat_at(u / L)) / (-std::expm1(-u));
    };
    const double body = integrate(integrand, 0.0, L, 1e-12, 1e-15);
    double tail = 0;
    for (int m = 0; m < 200; ++m) {
      const double t = std::exp(-(z + m) * L) / (z + m);
      tail += t;
      if (t < 1e-18) break;
    }
    arch_const_.push_back((2.0 * hat0 * digamma(z) + body + 2.0 * hat0 * tail) / L);
  }
  if (forms_.empty() || top < 2) return;
  PrimeTable t(top);
  for (u32 p : t.primes()) {
    const double logp = std::log(static_cast<double>(p));
    double odd = 0, even = 0;
    double pj = 1.0;  // p^{j/2}
    const double sp = std::sqrt(static_cast<double>(p));
    for (int j = 1;; ++j) {
      const double xi = j * logp / L;
      if (xi >= 1.0 && kernel_.hat_at(xi) == 0.0) break;
      pj *= sp;
      const double H = kernel_.hat_at(xi) + kernel_.hat_at(-xi);
      double lam = 0;
      for (const Newform* f : forms_) {
        const double lp = f->lambda_p(p);
        lam += (f->level() % static_cast<i64>(p) == 0 ? std::pow(lp, j) : power_sum(lp, j)) * logp;
      }
      (j % 2 ? odd : even) += lam / pj * H;
    }
    primes_.push_back(p);
    odd_.push_back(odd);
    even_.push_back(even);
  }
}

double ZeroSumEngine::archimedean_term(i64 d) const {
  const double hat0 = kernel_.hat0();
  const double L = kernel_.L;
  const double dd = static_cast<double>(d);
  double total = 0;
  for (std::size_t j = 0; j < forms_.size(); ++j) {
    const double cond = static_cast<double>(forms_[j]->level()) * dd * dd / (4.0 * kPi * kPi);
    total += hat0 / L * std::log(cond) + arch_const_[j];
  }
  return total;
}

double ZeroSumEngine::archimedean_term_tspace(i64 d) const {
  const double L = kernel_.L;
  const double dd = static_cast<double>(d);
  double total = 0;
  // (2/L) int_0^inf h(tau)[log(N d^2/4pi^2) + 2 Re psi(k/2 + 2 pi i tau / L)] d tau,
  // integrated over unit cells up to T, plus the averaged tail of h ~ 1/(2 pi^2 tau^2)
  const double T = 4000.0;
  for (const Newform* f : forms_) {
    const double z = f->weight() / 2.0;
    const double logc = std::log(static_cast<double>(f->level()) * dd * dd / (4.0 * kPi * kPi));
    auto g = [&](double tau) {
      const double re_psi = digamma(cplx(z, 2.0 * kPi * tau / L)).real();
      return kernel_.h_at(tau) * (logc + 2.0 * re_psi);
    };
    NeumaierSum s;
    for (double a = 0; a < T; a += 1.0) s.add(integrate(g, a, a + 1.0, 1e-10, 1e-12));
    const double tail = kernel_.scale * (logc + 2.0 * (std::log(2.0 * kPi * T / L) + 1.0)) / (2.0 * kPi * kPi * T);
    total += 2.0 / L * (s.value() + tail);
  }
  return total;
}

double ZeroSumEngine::prime_side(i64 d) const {
  NeumaierSum s;
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    const u32 p = primes_[i];
    const int chi = p == 2 ? kronecker(d, 2) : jacobi(d, p);
    if (chi == 0) continue;
    s.add(chi * odd_[i] + even_[i]);
  }
  return s.value() / kernel_.L;
}

double ZeroSumEngine::prime_side_direct(i64 d, double cutoff_factor) const {
  const double L = kernel_.L;
  const u64 top = static_cast<u64>(std::floor(cutoff_ * cutoff_factor));
  long double acc = 0;
  for (u64 n = top; n >= 2; --n) {
    const double xi = std::log(static_cast<double>(n)) / L;
    const double H = kernel_.hat_at(xi) + kernel_.hat_at(-xi);
    if (H == 0.0) continue;
    const int chi = kronecker(d, n);
    if (chi == 0) continue;
    double lam = 0;
    for (const Newform* f : forms_) lam += vonmangoldt_f(*f, n);
    if (lam == 0.0) continue;
    acc += static_cast<long double>(lam) * chi / std::sqrt(static_cast<long double>(n)) * H;
  }
  return static_cast<double>(acc / L);
}

namespace {

// ell = q * square with q prime: returns q, else 0
u64 prime_times_square(u64 ell) {
  u64 q = 0;
  for (auto [p, e] : factor_trial(ell)) {
    if (e % 2) {
      if (q) return 0;
      q = p;
    }
  }
  return q;
}

}  // namespace

void finish_aggregate(AggregateResult& r, u64 ell, u64 v, const TwistFamily& family, double X,
                      const ZeroSumEngine& engine) {
  const KernelPair& k = engine.kernel();
  const auto& phi = default_cutoff();
  const u64 n0 = static_cast<u64>(family.n0());
  const double M = static_cast<double>(engine.form_count());
  const double classes = static_cast<double>(family.classes().size());
  double euler = 1.0;
  for (u64 p : prime_divisors(ell * v)) euler /= 1.0 + 1.0 / static_cast<double>(p);
  const double base = M * X / (static_cast<double>(v) * static_cast<double>(n0)) * euler * classes;
  if (is_perfect_square(ell)) {
    r.regime = "square";
    r.predicted = base * euler_factor_coprime(family.n0()) * phi.hat0() * prop2_kernel_factor(X, k);
    r.ratio = r.predicted != 0 ? r.S / r.predicted : 0;
    r.normalized = r.ratio;
  } else if (const u64 q = prime_times_square(ell)) {
    r.regime = "prime_times_square";
    const double qd = static_cast<double>(q);
    r.normalized = r.S / (base / k.L * std::log(qd) / std::sqrt(qd));
  } else {
    r.regime = "generic";
    r.normalized = r.S / (M * std::sqrt(X) * std::sqrt(static_cast<double>(ell)) * std::exp(k.L / 4));
  }
}

AggregateResult aggregate_S(u64 ell, u64 v, const TwistFamily& family, double X,
                            const ZeroSumEngine& engine, unsigned workers, double eps) {
  if (ell == 0 || v == 0) throw PreconditionError("ell and v must be positive");
  const u64 n0 = static_cast<u64>(family.n0());
  if (std::gcd(ell, n0 * v) != 1) throw PreconditionError("aggregate_S: need gcd(ell, N0 v) = 1");
  if (std::gcd(v, n0) != 1) throw PreconditionError("aggregate_S: need gcd(v, N0) = 1");
  if (!is_squarefree(v)) throw PreconditionError("aggregate_S: v must be squarefree");
  const KernelPair& k = engine.kernel();
  if (std::exp(k.L / 4) * std::sqrt(static_cast<double>(ell)) > std::pow(X, 0.5 - 3 * eps))
    spdlog::warn("e^(L/4) sqrt(ell) exceeds X^(1/2 - 3 eps); outside the stated regime");

  const auto& phi = default_cutoff();
  const auto chunks = chunk_ranges(SmoothCutoff::support_lo * X, SmoothCutoff::support_hi * X);
  struct Part {
    NeumaierSum sum;
    u64 count = 0;
    double min_z = std::numeric_limits<double>::infinity();
    i64 argmin = 0;
  };
  const auto parts = ordered_parallel_map<Part>(chunks.size(), workers, [&](std::size_t i) {
    Part part;
    for (i64 d : family.enumerate(chunks[i].first, chunks[i].second)) {
      const u64 ad = static_cast<u64>(d < 0 ? -d : d);
      if (ad % v != 0) continue;
      const double w = phi(std::abs(static_cast<double>(d)) / X);
      if (w == 0.0) continue;
      const int chi = kronecker(d, ell);
      const double z = engine.zero_sum(d);
      if (z < part.min_z) {
        part.min_z = z;
        part.argmin = d;
      }
      ++part.count;
      if (chi) part.sum.add(z * chi * w);
    }
    return part;
  });
  AggregateResult r;
  NeumaierSum total;
  r.min_zero_sum = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    total += p.sum;
    r.members += p.count;
    if (p.min_z < r.min_zero_sum) {
      r.min_zero_sum = p.min_z;
      r.argmin_d = p.argmin;
    }
  }
  r.S = total.value();
  finish_aggregate(r, ell, v, family, X, engine);
  return r;
}

}  // namespace qtwist
