#pragma once

// Shared numerical helpers: compensated sums, complex Gamma-type functions,
// adaptive quadrature and an ordered parallel map over chunks.

#include <algorithm>
#include <atomic>
#include <complex>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qtwist {

using cplx = std::complex<double>;

/// Neumaier's variant of Kahan summation. Order-dependent but deterministic.
class NeumaierSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  NeumaierSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }
  NeumaierSum& operator+=(const NeumaierSum& o) noexcept {
    add(o.sum_);
    add(o.comp_);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

  // raw state, for checkpoints that must restore a sum bit for bit
  double running() const noexcept { return sum_; }
  double compensation() const noexcept { return comp_; }
  static NeumaierSum restore(double running, double compensation) noexcept {
    NeumaierSum s;
    s.sum_ = running;
    s.comp_ = compensation;
    return s;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class ComplexNeumaierSum {
 public:
  void add(cplx v) noexcept {
    re_.add(v.real());
    im_.add(v.imag());
  }
  cplx value() const noexcept { return {re_.value(), im_.value()}; }

 private:
  NeumaierSum re_, im_;
};

/// log Gamma(z) (principal branch up to 2 pi i) for complex z off the poles.
cplx log_gamma(cplx z);
cplx gamma(cplx z);
/// Digamma psi(z) for complex z off the poles: recurrence up to |z| >= 10,
/// then the asymptotic series.
cplx digamma(cplx z);
double digamma(double x);

/// Upper incomplete gamma Gamma(z, y) for complex z and real y > 0.
/// Series (via Gamma(z) - gamma(z,y)) for small y, Lentz continued fraction
/// otherwise; Re z < 1/2 is reached by the downward recurrence. Throws
/// PreconditionError at z = 0, -1, -2, ...
cplx upper_gamma(cplx z, double y);
/// Real Gamma(a, y) for a > 0 (boost); a <= 0 via recurrence.
double upper_gamma(double a, double y);

/// E_1(y) for y > 0.
double expint_e1(double y);

double normal_cdf(double x);

/// Adaptive Gauss-Kronrod on [a, b] (b may be +infinity). Throws
/// GateFailure when the estimated error exceeds max(abs_tol, rel_tol*|I|).
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 1e-14, double* error_out = nullptr);

/// Calls fn(i) for i in [0, n) on `workers` threads and returns the results
/// in index order. Work is pulled chunk by chunk so results never depend on
/// the worker count. The first exception thrown by a worker is rethrown.
template <class T, class Fn>
std::vector<T> ordered_parallel_map(std::size_t n, unsigned workers, Fn&& fn) {
  std::vector<T> out(n);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace qtwist
