#pragma once

// Zero sums sum_gamma h(gamma L / 2 pi) for L(s, f (x) chi_d) computed from
// the explicit formula: archimedean term minus prime sum.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qtwist/family.hpp"
#include "qtwist/newform.hpp"

namespace qtwist {

/// Even test function h with hat h supported in [-1, 1], dilated by L.
struct KernelPair {
  std::string name;
  std::function<double(double)> h;
  std::function<double(double)> hat;  // hat h(xi)
  double L = 1.0;
  double scale = 1.0;  // multiplies both h and hat h

  double h_at(double t) const { return scale * h(t); }
  double hat_at(double xi) const { return scale * hat(xi); }
  double hat0() const { return hat_at(0.0); }
  double h0() const { return h_at(0.0); }
};

/// h(t) = (sin pi t / pi t)^2, hat h(xi) = max(1 - |xi|, 0).
KernelPair fejer_kernel(double L);

/// Per-form data the explicit formula needs, with the prime sum
/// precomputed up to e^L: for each prime p, A_p (odd powers) and B_p (even
/// powers) so the p-part of the prime sum is chi_d(p) A_p + B_p.
class ZeroSumEngine {
 public:
  ZeroSumEngine(std::vector<const Newform*> forms, KernelPair kernel);

  /// (1/2 pi) int h(tL/2pi) [sum_j log(N_j d^2 / 4 pi^2) + psi(k_j/2 + it) + psi(k_j/2 - it)] dt.
  double archimedean_term(i64 d) const;
  /// Same integral along t (quadrature of the digamma integrand); an oracle.
  double archimedean_term_tspace(i64 d) const;
  /// (1/L) sum_{n <= e^L} Lambda(n) chi_d(n) n^{-1/2} H(log n / L).
  double prime_side(i64 d) const;
  /// Independent oracle: loops over n and factors each one.
  double prime_side_direct(i64 d, double cutoff_factor = 1.0) const;
  double zero_sum(i64 d) const { return archimedean_term(d) - prime_side(d); }

  const KernelPair& kernel() const noexcept { return kernel_; }
  std::size_t form_count() const noexcept { return forms_.size(); }
  double prime_cutoff() const noexcept { return cutoff_; }

 private:
  std::vector<const Newform*> forms_;
  KernelPair kernel_;
  double cutoff_;
  std::vector<u32> primes_;
  std::vector<double> odd_, even_;
  std::vector<double> arch_const_;  // A(k_j, L) per form
};

/// Weighted family sum of zero sums: sum_{d in F, v | d} Z(d) chi_d(ell) Phi(kappa d / X).
struct AggregateResult {
  double S = 0;
  double predicted = 0;  // square-ell main term (0 otherwise)
  double ratio = 0;
  std::string regime;    // "square", "prime_times_square", "generic"
  double normalized = 0; // S over the case's scale
  u64 members = 0;
  double min_zero_sum = 0;
  i64 argmin_d = 0;
};

AggregateResult aggregate_S(u64 ell, u64 v, const TwistFamily& family, double X,
                            const ZeroSumEngine& engine, unsigned workers = 1, double eps = 0.05);

/// Fills predicted, ratio, regime and normalized from r.S.
void finish_aggregate(AggregateResult& r, u64 ell, u64 v, const TwistFamily& family, double X,
                      const ZeroSumEngine& engine);

/// (2 log X / L) hat h(0) + h(0)/2.
double prop2_kernel_factor(double X, const KernelPair& k);

}  // namespace qtwist
