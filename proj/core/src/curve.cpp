#include "qtwist/curve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "qtwist/errors.hpp"

namespace qtwist {

namespace {

using i128 = __int128;

i64 narrow(i128 v, const char* what) {
  if (v > std::numeric_limits<i64>::max() || v < std::numeric_limits<i64>::min())
    throw PreconditionError(std::string(what) + " overflows 64 bits");
  return static_cast<i64>(v);
}

u64 mod_reduce(i64 v, u64 p) {
  i64 r = v % static_cast<i64>(p);
  return static_cast<u64>(r < 0 ? r + static_cast<i64>(p) : r);
}

u64 mulm(u64 a, u64 b, u64 p) { return static_cast<u64>(static_cast<unsigned __int128>(a) * b % p); }
u64 addm(u64 a, u64 b, u64 p) {
  u64 s = a + b;
  return s >= p ? s - p : s;
}
u64 subm(u64 a, u64 b, u64 p) { return a >= b ? a - b : a + p - b; }

// Polynomials over F_p, lowest degree first, no trailing zeros.
using Poly = std::vector<u64>;

void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

Poly poly_mod(Poly a, const Poly& b, u64 p) {
  trim(a);
  const u64 inv_lead = powmod(b.back(), p - 2, p);
  while (a.size() >= b.size()) {
    const u64 coef = mulm(a.back(), inv_lead, p);
    const std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i)
      a[shift + i] = subm(a[shift + i], mulm(coef, b[i], p), p);
    trim(a);
  }
  return a;
}

std::size_t poly_gcd_degree(Poly a, Poly b, u64 p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a.empty() ? 0 : a.size() - 1;
}

// Multiply residues mod the monic cubic x^3 + c2 x^2 + c1 x + c0.
std::array<u64, 3> mul_mod_cubic(const std::array<u64, 3>& u, const std::array<u64, 3>& v,
                                 const std::array<u64, 3>& c, u64 p) {
  std::array<u64, 5> w{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) w[i + j] = addm(w[i + j], mulm(u[i], v[j], p), p);
  for (int k = 4; k >= 3; --k) {
    const u64 t = w[k];
    if (t == 0) continue;
    w[k] = 0;
    // x^k = x^{k-3} * (-(c2 x^2 + c1 x + c0))
    w[k - 1] = subm(w[k - 1], mulm(t, c[2], p), p);
    w[k - 2] = subm(w[k - 2], mulm(t, c[1], p), p);
    w[k - 3] = subm(w[k - 3], mulm(t, c[0], p), p);
  }
  return {w[0], w[1], w[2]};
}

}  // namespace

i64 Cubic::discriminant() const {
  const i128 b = a2, c = a4, d = a6;
  const i128 disc = 18 * b * c * d - 4 * b * b * b * d + b * b * c * c - 4 * c * c * c - 27 * d * d;
  return narrow(disc, "cubic discriminant");
}

u64 Cubic::eval_mod(u64 x, u64 p) const {
  x %= p;
  u64 v = 1;
  v = addm(mulm(v, x, p), mod_reduce(a2, p), p);
  v = addm(mulm(v, x, p), mod_reduce(a4, p), p);
  v = addm(mulm(v, x, p), mod_reduce(a6, p), p);
  return v;
}

int Cubic::roots_mod(u64 p) const {
  if (p < 64) {
    int count = 0;
    for (u64 x = 0; x < p; ++x) count += eval_mod(x, p) == 0;
    return count;
  }
  const std::array<u64, 3> c{mod_reduce(a6, p), mod_reduce(a4, p), mod_reduce(a2, p)};
  std::array<u64, 3> result{1, 0, 0};
  std::array<u64, 3> base{0, 1, 0};
  for (u64 e = p; e; e >>= 1) {
    if (e & 1) result = mul_mod_cubic(result, base, c, p);
    base = mul_mod_cubic(base, base, c, p);
  }
  Poly g{result[0], subm(result[1], 1, p), result[2]};
  Poly f{c[0], c[1], c[2], 1};
  trim(g);
  if (g.empty()) return 3;  // x^p = x mod F: F splits into distinct linear factors
  return static_cast<int>(poly_gcd_degree(f, g, p));
}

std::vector<i64> Cubic::integer_roots() const {
  auto eval = [&](i64 x) -> i128 {
    const i128 X = x;
    return ((X + a2) * X + a4) * X + a6;
  };
  // Real roots numerically (long double), then exact check of nearby integers.
  std::vector<long double> real_roots;
  const long double b = a2, c = a4, d = a6;
  const long double shift = b / 3.0L;
  const long double pp = c - b * b / 3.0L;
  const long double qq = 2.0L * b * b * b / 27.0L - b * c / 3.0L + d;
  const long double disc = qq * qq / 4.0L + pp * pp * pp / 27.0L;
  if (disc > 0) {
    const long double sq = std::sqrt(disc);
    real_roots.push_back(std::cbrt(-qq / 2.0L + sq) + std::cbrt(-qq / 2.0L - sq) - shift);
  } else if (pp == 0) {
    real_roots.push_back(-shift);
  } else {
    const long double r = 2.0L * std::sqrt(-pp / 3.0L);
    long double arg = 3.0L * qq / (pp * r);
    arg = std::clamp(arg, -1.0L, 1.0L);
    const long double phi = std::acos(arg) / 3.0L;
    for (int k = 0; k < 3; ++k)
      real_roots.push_back(r * std::cos(phi - 2.0L * static_cast<long double>(M_PI) * k / 3.0L) - shift);
  }
  std::vector<i64> roots;
  for (long double r : real_roots) {
    const long double fl = std::floor(r);
    for (long double cand = fl - 1; cand <= fl + 2; cand += 1) {
      if (std::fabs(cand) > 9.0e18L) continue;
      const i64 x = static_cast<i64>(cand);
      if (eval(x) == 0 && std::find(roots.begin(), roots.end(), x) == roots.end()) roots.push_back(x);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

EllipticCurve EllipticCurve::from_ainvariants(const AInvariants& a, i64 conductor, int root_number,
                                              std::string label) {
  if (conductor < 1) throw PreconditionError("conductor must be positive");
  if (root_number != 1 && root_number != -1) throw PreconditionError("root number must be +-1");
  const i128 a1 = a[0], a2 = a[1], a3 = a[2], a4 = a[3], a6 = a[4];
  const i128 b2 = a1 * a1 + 4 * a2;
  const i128 b4 = 2 * a4 + a1 * a3;
  const i128 b6 = a3 * a3 + 4 * a6;
  const i128 b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
  const i128 delta = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
  if (delta == 0) throw PreconditionError("singular Weierstrass model");
  EllipticCurve e;
  e.ainv_ = a;
  e.cubic_ = Cubic{narrow(b2, "b2"), narrow(8 * b4, "8 b4"), narrow(16 * b6, "16 b6")};
  e.conductor_ = conductor;
  e.root_number_ = root_number;
  e.label_ = std::move(label);
  e.disc_ = e.cubic_.discriminant();
  e.delta_ = narrow(delta, "model discriminant");
  return e;
}

EllipticCurve EllipticCurve::from_cubic(const Cubic& f, i64 conductor, int root_number,
                                        std::string label) {
  if (f.discriminant() == 0) throw PreconditionError("cubic is not squarefree (zero discriminant)");
  EllipticCurve e = from_ainvariants({0, f.a2, 0, f.a4, f.a6}, conductor, root_number, std::move(label));
  e.cubic_ = f;
  e.disc_ = f.discriminant();
  return e;
}

u64 EllipticCurve::count_points(u64 p) const {
  if (p == 2) {
    u64 count = 1;  // point at infinity
    for (i64 x = 0; x < 2; ++x)
      for (i64 y = 0; y < 2; ++y) {
        const i64 lhs = y * y + ainv_[0] * x * y + ainv_[2] * y;
        const i64 rhs = x * x * x + ainv_[1] * x * x + ainv_[3] * x + ainv_[4];
        if (((lhs - rhs) % 2 + 2) % 2 == 0) ++count;
      }
    return count;
  }
  i64 sum = 0;
  for (u64 x = 0; x < p; ++x) {
    const u64 v = cubic_.eval_mod(x, p);
    if (v == 0) continue;
    sum += powmod(v, (p - 1) / 2, p) == 1 ? 1 : -1;
  }
  return static_cast<u64>(static_cast<i64>(p) + 1 + sum);
}

std::optional<int> EllipticCurve::local_ap(u64 p) const {
  const int ap = static_cast<int>(static_cast<i64>(p) + 1 - static_cast<i64>(count_points(p)));
  const bool bad_model = delta_ % static_cast<i64>(p) == 0;
  const bool bad_curve = conductor_ % static_cast<i64>(p) == 0;
  if (!bad_curve) {
    if (bad_model) return std::nullopt;  // model not minimal at p
    return ap;
  }
  if (std::abs(ap) > 1) return std::nullopt;
  if ((conductor_ / static_cast<i64>(p)) % static_cast<i64>(p) == 0 && ap != 0) return std::nullopt;
  return ap;
}

namespace {

// Naive x-loop with Legendre values from a square table; F evaluated by
// forward differences so the loop body is additions and one table lookup.
int ap_naive(const Cubic& f, u64 p, std::vector<signed char>& chi) {
  chi.assign(p, -1);
  chi[0] = 0;
  u64 sq = 0;
  for (u64 x = 1; x <= p / 2; ++x) {
    sq = addm(sq, 2 * x - 1, p);  // x^2 = (x-1)^2 + 2x - 1, and 2x - 1 < p
    chi[sq] = 1;
  }
  u64 f0 = f.eval_mod(0, p), f1 = f.eval_mod(1, p), f2 = f.eval_mod(2, p);
  u64 d1 = subm(f1, f0, p);
  u64 d2 = subm(addm(f2, f0, p), addm(f1, f1, p), p);
  const u64 d3 = 6 % p;
  u64 v = f0;
  i64 sum = 0;
  for (u64 x = 0; x < p; ++x) {
    sum += chi[v];
    v = addm(v, d1, p);
    d1 = addm(d1, d2, p);
    d2 = addm(d2, d3, p);
  }
  return static_cast<int>(-sum);
}

}  // namespace

int ap_point_count(const EllipticCurve& e, u64 p) {
  if (p < 3 || (p & 1) == 0) throw PreconditionError("ap_point_count: p must be an odd prime");
  if (e.cubic_discriminant() % static_cast<i64>(p) == 0)
    throw PreconditionError("ap_point_count: p divides disc(F); use local_ap for bad primes");
  std::vector<signed char> chi;
  return ap_naive(e.cubic(), p, chi);
}

std::vector<std::optional<int>> ap_table(const EllipticCurve& e, std::span<const u32> primes,
                                         unsigned workers) {
  std::vector<std::optional<int>> out(primes.size());
  const i64 disc = e.cubic_discriminant();
  auto work = [&](std::size_t i, std::vector<signed char>& chi) {
    const u64 p = primes[i];
    if (p == 2 || disc % static_cast<i64>(p) == 0) {
      out[i] = e.local_ap(p);
    } else {
      out[i] = ap_naive(e.cubic(), p, chi);
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1 || primes.size() < 64) {
    std::vector<signed char> chi;
    for (std::size_t i = 0; i < primes.size(); ++i) work(i, chi);
    return out;
  }
  // Largest primes first so the workers finish together.
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      std::vector<signed char> chi;
      for (std::size_t k; (k = next.fetch_add(1)) < primes.size();) work(primes.size() - 1 - k, chi);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

namespace {

struct CatalogEntry {
  EllipticCurve::AInvariants ainv;
  i64 conductor;
  int root_number;
};

const std::map<std::string, CatalogEntry>& catalog() {
  static const std::map<std::string, CatalogEntry> entries{
      {"11a1", {{0, -1, 1, -10, -20}, 11, 1}},
      {"14a1", {{1, 0, 1, 4, -6}, 14, 1}},
      {"19a1", {{0, 1, 1, -9, -15}, 19, 1}},
      {"32a2", {{0, 0, 0, -1, 0}, 32, 1}},
      {"37a1", {{0, 0, 1, -1, 0}, 37, -1}},
      {"37b1", {{0, 1, 1, -23, -50}, 37, 1}},
      {"43a1", {{0, 1, 1, 0, 0}, 43, -1}},
      {"53a1", {{1, -1, 1, 0, 0}, 53, -1}},
      {"389a1", {{0, 1, 1, -2, 0}, 389, 1}},
  };
  return entries;
}

}  // namespace

std::optional<EllipticCurve> catalog_curve(const std::string& label) {
  auto it = catalog().find(label);
  if (it == catalog().end()) return std::nullopt;
  return EllipticCurve::from_ainvariants(it->second.ainv, it->second.conductor,
                                         it->second.root_number, label);
}

std::vector<std::string> catalog_labels() {
  std::vector<std::string> out;
  for (const auto& [k, v] : catalog()) out.push_back(k);
  return out;
}

}  // namespace qtwist
