#pragma once

// Root-number-restricted twist families F(kappa, a): fundamental d = 1 mod 4
// coprime to N0 = lcm(8, N_1, ..., N_M), with kappa d > 0 and d = a mod N0.

#include <optional>
#include <vector>

#include "qtwist/arith.hpp"
#include "qtwist/newform.hpp"

namespace qtwist {

/// The part of a newform a family needs: level and sign.
struct FormSignature {
  i64 level = 1;
  int epsilon = 1;

  static FormSignature of(const Newform& f) { return {f.level(), f.root_number()}; }
  friend bool operator==(const FormSignature&, const FormSignature&) = default;
};

struct FamilyClass {
  int kappa = 1;
  i64 a = 1;  // residue mod N0
  friend bool operator==(const FamilyClass&, const FamilyClass&) = default;
};

class TwistFamily {
 public:
  /// One class F(kappa, a). Throws PreconditionError when a != 1, 5 mod 8 or
  /// gcd(a, N0) > 1. required_sign: -1 for F, +1 for E, nullopt for no filter.
  static TwistFamily single(std::vector<FormSignature> forms, int kappa, i64 a,
                            std::optional<int> required_sign);
  /// Union of every class (kappa, a) on which all eps_j(d) equal required_sign.
  static TwistFamily all_classes(std::vector<FormSignature> forms, int required_sign);

  const std::vector<FormSignature>& forms() const noexcept { return forms_; }
  i64 n0() const noexcept { return n0_; }
  const std::vector<FamilyClass>& classes() const noexcept { return classes_; }
  std::optional<int> required_sign() const noexcept { return sign_; }

  /// Class-level sign vector eps_j(d) (constant on a class).
  std::vector<int> class_signs(const FamilyClass& c) const;

  bool contains(i64 d) const;

  /// Members with X1 < |d| <= X2, ascending |d| then d. Squarefree test by a
  /// segmented sieve over blocks of 2^16 values of |d|.
  std::vector<i64> enumerate(double X1, double X2) const;

 private:
  std::vector<FormSignature> forms_;
  i64 n0_ = 8;
  std::vector<FamilyClass> classes_;
  std::optional<int> sign_;
};

i64 lcm_levels(const std::vector<FormSignature>& forms);

/// Split (X1, X2] into consecutive integer ranges aligned to multiples of
/// `block` (the resumable scan grain). Each pair is (lo, hi] as doubles.
std::vector<std::pair<double, double>> chunk_ranges(double X1, double X2, u64 block = u64{1} << 16);

/// Squarefree flags for |d| in [lo, hi] (index |d| - lo).
std::vector<char> squarefree_block(u64 lo, u64 hi);

}  // namespace qtwist
