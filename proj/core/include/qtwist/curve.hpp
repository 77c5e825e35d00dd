#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtwist/arith.hpp"

namespace qtwist {

/// Monic integer cubic F(x) = x^3 + a2 x^2 + a4 x + a6.
struct Cubic {
  i64 a2 = 0;
  i64 a4 = 0;
  i64 a6 = 0;

  /// Polynomial discriminant; throws if it does not fit in 64 bits.
  i64 discriminant() const;
  /// F(x) mod p in [0, p).
  u64 eval_mod(u64 x, u64 p) const;
  /// Number of distinct roots of F in F_p (brute force for p < 64, otherwise
  /// deg gcd(F, x^p - x)).
  int roots_mod(u64 p) const;
  /// Integer roots (the only rational roots of a monic integer cubic).
  std::vector<i64> integer_roots() const;

  friend bool operator==(const Cubic&, const Cubic&) = default;
};

/// Elliptic curve over Q with a long Weierstrass model [a1,a2,a3,a4,a6] and
/// the monic cubic F of the isomorphic model y^2 = F(x). When built from a
/// long model, F(X) = X^3 + b2 X^2 + 8 b4 X + 16 b6 (X = 4x, Y = 4(2y+a1x+a3)),
/// which agrees with the long model over F_p for every odd p.
class EllipticCurve {
 public:
  using AInvariants = std::array<i64, 5>;

  static EllipticCurve from_ainvariants(const AInvariants& a, i64 conductor, int root_number,
                                        std::string label = {});
  static EllipticCurve from_cubic(const Cubic& f, i64 conductor, int root_number,
                                  std::string label = {});

  const AInvariants& ainvariants() const noexcept { return ainv_; }
  const Cubic& cubic() const noexcept { return cubic_; }
  i64 conductor() const noexcept { return conductor_; }
  int root_number() const noexcept { return root_number_; }
  const std::string& label() const noexcept { return label_; }
  i64 cubic_discriminant() const noexcept { return disc_; }
  /// Discriminant of the long model.
  i64 minimal_discriminant() const noexcept { return delta_; }

  /// Projective point count of the long model over F_p (any prime p, good or
  /// bad; the singular point, if any, is counted once).
  u64 count_points(u64 p) const;

  /// a_p from the reduction of the supplied model: p + 1 - #E(F_p). Returns
  /// nullopt when the model is visibly non-minimal at a bad p (|a_p| > 1, or
  /// p divides the model discriminant but not the conductor).
  std::optional<int> local_ap(u64 p) const;

 private:
  AInvariants ainv_{};
  Cubic cubic_;
  i64 conductor_ = 1;
  int root_number_ = 1;
  std::string label_;
  i64 disc_ = 0;
  i64 delta_ = 0;
};

/// a_p = p + 1 - #E(F_p) for an odd prime p not dividing disc(F), by the
/// x-loop with Legendre values from a square table mod p. Throws
/// PreconditionError for p even or p | disc(F).
int ap_point_count(const EllipticCurve& e, u64 p);

/// a_p for every prime in `primes`. Bad primes use local_ap; entries that
/// cannot be determined are nullopt.
std::vector<std::optional<int>> ap_table(const EllipticCurve& e, std::span<const u32> primes,
                                         unsigned workers = 1);

/// Small catalog of curves used by the CLI and tests (Cremona labels).
std::optional<EllipticCurve> catalog_curve(const std::string& label);
std::vector<std::string> catalog_labels();

}  // namespace qtwist
