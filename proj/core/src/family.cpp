#include "qtwist/family.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qtwist/errors.hpp"

namespace qtwist {

i64 lcm_levels(const std::vector<FormSignature>& forms) {
  i64 n0 = 8;
  for (const auto& f : forms) {
    if (f.level < 1) throw PreconditionError("level must be positive");
    n0 = std::lcm(n0, f.level);
  }
  return n0;
}

namespace {

i64 mod(i64 a, i64 m) {
  const i64 r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

std::vector<int> TwistFamily::class_signs(const FamilyClass& c) const {
  std::vector<int> out;
  // chi_d(N_j) depends only on d mod 8 and d mod the odd part of N_j, both
  // fixed by d = a mod N0; chi_d(-1) = kappa.
  for (const auto& f : forms_) out.push_back(f.epsilon * c.kappa * kronecker(c.a, static_cast<u64>(f.level)));
  return out;
}

TwistFamily TwistFamily::single(std::vector<FormSignature> forms, int kappa, i64 a,
                                std::optional<int> required_sign) {
  if (kappa != 1 && kappa != -1) throw PreconditionError("kappa must be +-1");
  if (required_sign && *required_sign != 1 && *required_sign != -1)
    throw PreconditionError("required sign must be +-1");
  TwistFamily fam;
  fam.forms_ = std::move(forms);
  fam.n0_ = lcm_levels(fam.forms_);
  a = mod(a, fam.n0_);
  if (a % 8 != 1 && a % 8 != 5)
    throw PreconditionError("residue a = " + std::to_string(a) + " is not 1 or 5 mod 8");
  if (std::gcd(a, fam.n0_) != 1)
    throw PreconditionError("residue a = " + std::to_string(a) + " is not coprime to N0 = " +
                            std::to_string(fam.n0_));
  fam.classes_ = {FamilyClass{kappa, a}};
  fam.sign_ = required_sign;
  return fam;
}

TwistFamily TwistFamily::all_classes(std::vector<FormSignature> forms, int required_sign) {
  if (required_sign != 1 && required_sign != -1) throw PreconditionError("required sign must be +-1");
  TwistFamily fam;
  fam.forms_ = std::move(forms);
  fam.n0_ = lcm_levels(fam.forms_);
  fam.sign_ = required_sign;
  for (int kappa : {-1, 1}) {
    for (i64 a = 1; a < fam.n0_; a += 4) {
      if (std::gcd(a, fam.n0_) != 1) continue;
      FamilyClass c{kappa, a};
      const auto s = fam.class_signs(c);
      if (std::all_of(s.begin(), s.end(), [&](int e) { return e == required_sign; }))
        fam.classes_.push_back(c);
    }
  }
  return fam;
}

bool TwistFamily::contains(i64 d) const {
  if (d == 0 || d == 1 || d == -1) return false;
  const int kappa = d > 0 ? 1 : -1;
  const i64 a = mod(d, n0_);
  const auto it = std::find(classes_.begin(), classes_.end(), FamilyClass{kappa, a});
  if (it == classes_.end()) return false;
  if (!is_squarefree(static_cast<u64>(d > 0 ? d : -d))) return false;
  if (sign_) {
    for (int e : class_signs(*it))
      if (e != *sign_) return false;
  }
  return true;
}

std::vector<std::pair<double, double>> chunk_ranges(double X1, double X2, u64 block) {
  std::vector<std::pair<double, double>> out;
  if (!(X1 >= 0) || X2 <= X1 || block == 0) return out;
  u64 lo = static_cast<u64>(std::floor(X1));
  const u64 hi = static_cast<u64>(std::floor(X2));
  while (lo < hi) {
    const u64 next = std::min(hi, (lo / block + 1) * block);
    out.emplace_back(static_cast<double>(lo), static_cast<double>(next));
    lo = next;
  }
  return out;
}

std::vector<char> squarefree_block(u64 lo, u64 hi) {
  std::vector<char> sf(hi >= lo ? hi - lo + 1 : 0, 1);
  if (sf.empty()) return sf;
  if (lo == 0) sf[0] = 0;
  const u64 r = isqrt(hi);
  PrimeTable t(std::max<u64>(r, 2));
  for (u32 p : t.primes()) {
    const u64 q = u64{p} * p;
    if (q > hi) break;
    for (u64 m = (lo + q - 1) / q * q; m <= hi; m += q) sf[m - lo] = 0;
  }
  return sf;
}

std::vector<i64> TwistFamily::enumerate(double X1, double X2) const {
  if (!(X1 >= 0) || X1 > X2) throw PreconditionError("enumerate: need 0 <= X1 <= X2");
  std::vector<i64> out;
  const u64 lo = static_cast<u64>(std::floor(X1)) + 1;
  const u64 hi = static_cast<u64>(std::floor(X2));
  if (hi < lo) return out;
  // a class passes the sign filter or not as a whole
  std::vector<char> live(2 * static_cast<std::size_t>(n0_), 0);  // [kappa < 0][a]
  for (const auto& c : classes_) {
    bool ok = true;
    if (sign_)
      for (int e : class_signs(c)) ok = ok && e == *sign_;
    if (ok) live[(c.kappa < 0 ? 0 : n0_) + c.a] = 1;
  }
  constexpr u64 kBlock = u64{1} << 16;
  for (u64 b = lo; b <= hi; b += kBlock) {
    const u64 e = std::min(hi, b + kBlock - 1);
    const auto sf = squarefree_block(b, e);
    for (u64 m = b; m <= e; ++m) {
      if (!sf[m - b] || m < 2) continue;
      // negative before positive at equal |d|
      for (int kappa : {-1, 1}) {
        const i64 d = kappa * static_cast<i64>(m);
        if (live[(kappa < 0 ? 0 : n0_) + mod(d, n0_)]) out.push_back(d);
      }
    }
  }
  return out;
}

}  // namespace qtwist
