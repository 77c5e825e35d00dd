#include "qtwist/newform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include "qtwist/errors.hpp"

namespace qtwist {

namespace fs = std::filesystem;

namespace {

std::string cache_name(const EllipticCurve& e) {
  if (!e.label().empty()) return e.label() + ".coef";
  std::string name = "curve";
  for (i64 a : e.ainvariants()) name += "_" + std::to_string(a);
  return name + ".coef";
}

}  // namespace

std::optional<fs::path> default_cache_dir() {
  if (const char* env = std::getenv("QTWIST_CACHE_DIR"); env && *env) return fs::path(env);
  return std::nullopt;
}

Newform Newform::from_coefficients(i64 level, int weight, int root_number,
                                   std::vector<std::pair<u64, double>> values, std::string label) {
  return build(level, weight, root_number, std::move(values), std::move(label), 0);
}

Newform Newform::build(i64 level, int weight, int root_number,
                       std::vector<std::pair<u64, double>> values, std::string label, u64 limit) {
  if (level < 1) throw PreconditionError("level must be positive");
  if (weight < 2 || weight % 2 != 0) throw PreconditionError("weight must be even and >= 2");
  if (root_number != 1 && root_number != -1) throw PreconditionError("root number must be +-1");
  std::sort(values.begin(), values.end());
  Newform f;
  f.level_ = level;
  f.weight_ = weight;
  f.eps_ = root_number;
  f.label_ = std::move(label);
  const u64 top = std::max<u64>(values.empty() ? 1 : values.back().first, limit);
  PrimeTable table(std::max<u64>(top, 2));
  std::size_t j = 0;
  for (u32 p : table.primes()) {
    double lam = 0.0;
    if (j < values.size() && values[j].first == p) {
      lam = values[j].second;
      ++j;
      if (level % static_cast<i64>(p) != 0 && std::abs(lam) > 2.0 + 1e-9)
        throw ParseError("eigenvalue at p=" + std::to_string(p) + " violates |lambda(p)| <= 2");
    } else if (level % static_cast<i64>(p) == 0) {
      f.skipped_.push_back(p);
      spdlog::info("no eigenvalue at bad prime {} for level {}; treated as 0", p, level);
    } else {
      throw ParseError("coefficient table has a gap at p=" + std::to_string(p));
    }
    f.primes_.push_back(p);
    f.lambda_.push_back(lam);
  }
  if (j != values.size())
    throw ParseError("coefficient table lists non-prime or duplicate index " +
                     std::to_string(values[j].first));
  f.limit_ = top;
  return f;
}

Newform Newform::from_curve(const EllipticCurve& e, u64 prime_limit, unsigned workers,
                            std::optional<fs::path> cache_dir) {
  if (!cache_dir) cache_dir = default_cache_dir();
  if (cache_dir) {
    const fs::path path = *cache_dir / cache_name(e);
    std::error_code ec;
    if (fs::exists(path, ec)) {
      try {
        Newform cached = read(path);
        if (cached.level() == e.conductor() && cached.root_number() == e.root_number() &&
            cached.prime_limit() >= prime_limit) {
          std::vector<std::pair<u64, double>> vals;
          for (std::size_t i = 0; i < cached.primes_.size() && cached.primes_[i] <= prime_limit; ++i) {
            if (std::find(cached.skipped_.begin(), cached.skipped_.end(), cached.primes_[i]) !=
                cached.skipped_.end())
              continue;
            vals.emplace_back(cached.primes_[i], cached.lambda_[i]);
          }
          Newform f = build(e.conductor(), 2, e.root_number(), std::move(vals), e.label(), prime_limit);
          f.curve_ = e;
          return f;
        }
      } catch (const ParseError& err) {
        spdlog::warn("ignoring unreadable coefficient cache {}: {}", path.string(), err.what());
      }
    }
  }
  PrimeTable table(std::max<u64>(prime_limit, 2));
  auto primes = table.primes().subspan(0, table.count_up_to(prime_limit));
  const auto aps = ap_table(e, primes, workers);
  std::vector<std::pair<u64, double>> vals;
  vals.reserve(primes.size());
  for (std::size_t i = 0; i < primes.size(); ++i) {
    if (!aps[i]) {
      if (e.conductor() % static_cast<i64>(primes[i]) != 0)
        throw PreconditionError("model is not minimal at good prime " + std::to_string(primes[i]));
      continue;
    }
    vals.emplace_back(primes[i], *aps[i] / std::sqrt(static_cast<double>(primes[i])));
  }
  Newform f = build(e.conductor(), 2, e.root_number(), std::move(vals), e.label(), prime_limit);
  f.curve_ = e;
  if (cache_dir) {
    std::error_code ec;
    fs::create_directories(*cache_dir, ec);
    const fs::path path = *cache_dir / cache_name(e);
    const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
    try {
      f.write(tmp);
      fs::rename(tmp, path, ec);
      if (ec) spdlog::warn("could not publish coefficient cache {}: {}", path.string(), ec.message());
    } catch (const Error& err) {
      spdlog::warn("could not write coefficient cache: {}", err.what());
    }
  }
  return f;
}

Newform Newform::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open coefficient file " + path.string());
  std::string line;
  std::optional<i64> level;
  std::optional<int> weight, eps;
  std::optional<u64> limit;
  std::string label;
  std::vector<std::pair<u64, double>> vals;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;
    if (!header_seen) {
      if (first != "N") throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected header 'N <level> k <weight> eps <sign>'");
      std::string key = first;
      do {
        std::string value;
        if (!(ss >> value)) throw ParseError(path.string() + ": header key '" + key + "' has no value");
        try {
          if (key == "N") level = std::stoll(value);
          else if (key == "k") weight = std::stoi(value);
          else if (key == "eps") eps = std::stoi(value);
          else if (key == "limit") limit = std::stoull(value);
          else if (key == "label") label = value;
          else throw ParseError(path.string() + ": unknown header key '" + key + "'");
        } catch (const std::logic_error&) {
          throw ParseError(path.string() + ": header field '" + key + "' is not a number");
        }
      } while (ss >> key);
      if (!level || !weight || !eps) throw ParseError(path.string() + ": header must carry N, k and eps");
      header_seen = true;
      continue;
    }
    char* end = nullptr;
    const u64 p = std::strtoull(first.c_str(), &end, 10);
    if (*end != '\0' || p < 2) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad prime field '" + first + "'");
    std::string value;
    if (!(ss >> value)) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing value");
    const double v = std::strtod(value.c_str(), &end);
    if (*end != '\0' || !std::isfinite(v)) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad value field '" + value + "'");
    vals.emplace_back(p, v);
  }
  if (!header_seen) throw ParseError(path.string() + ": empty coefficient file");
  return build(*level, *weight, *eps, std::move(vals), label, limit.value_or(0));
}

void Newform::write(const fs::path& path) const {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw Error("cannot write coefficient file " + path.string());
  std::fprintf(out, "N %lld k %d eps %d limit %llu", static_cast<long long>(level_), weight_, eps_,
               static_cast<unsigned long long>(limit_));
  if (!label_.empty()) std::fprintf(out, " label %s", label_.c_str());
  std::fputc('\n', out);
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    if (std::binary_search(skipped_.begin(), skipped_.end(), u64{primes_[i]})) continue;
    std::fprintf(out, "%u %.17g\n", primes_[i], lambda_[i]);
  }
  const bool ok = std::fflush(out) == 0;
  std::fclose(out);
  if (!ok) throw Error("short write on " + path.string());
}

double Newform::lambda_p(u64 p) const {
  if (p > limit_) throw MissingCoefficient(p, limit_);
  auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
  if (it == primes_.end() || *it != p) {
    if (p > (primes_.empty() ? 0 : primes_.back())) throw MissingCoefficient(p, limit_);
    throw PreconditionError("lambda_p: " + std::to_string(p) + " is not prime");
  }
  return lambda_[static_cast<std::size_t>(it - primes_.begin())];
}

double power_sum(double lambda, int j) {
  if (j == 0) return 2.0;
  double prev = 2.0, cur = lambda;
  for (int i = 1; i < j; ++i) {
    const double next = lambda * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

// lambda(p^e) by the Hecke recursion.
double lambda_prime_power(double lp, int e, bool bad) {
  double prev = 1.0, cur = lp;
  if (e == 0) return 1.0;
  for (int i = 1; i < e; ++i) {
    const double next = lp * cur - (bad ? 0.0 : prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

double hecke_lambda(const Newform& f, u64 n) {
  if (n == 0) throw PreconditionError("hecke_lambda: n must be positive");
  double v = 1.0;
  for (auto [p, e] : factor_trial(n)) {
    v *= lambda_prime_power(f.lambda_p(p), e, f.level() % static_cast<i64>(p) == 0);
  }
  return v;
}

std::vector<double> hecke_lambda_table(const Newform& f, u64 nmax) {
  std::vector<double> lam(nmax + 1, 0.0);
  if (nmax == 0) return lam;
  lam[1] = 1.0;
  if (nmax < 2) return lam;
  if (nmax > f.prime_limit()) {
    // first prime beyond the loaded range
    PrimeTable t(nmax);
    auto it = std::upper_bound(t.primes().begin(), t.primes().end(), f.prime_limit());
    if (it != t.primes().end()) throw MissingCoefficient(*it, f.prime_limit());
  }
  PrimeTable t(nmax);
  const auto fp = f.primes();
  const auto fl = f.lambdas();
  std::size_t idx = 0;
  for (u64 n = 2; n <= nmax; ++n) {
    const u64 p = t.least_prime_factor(n);
    u64 m = n, pe = 1;
    while (m % p == 0) {
      m /= p;
      pe *= p;
    }
    if (m == 1) {
      if (pe == p) {
        while (fp[idx] < p) ++idx;
        lam[n] = fl[idx];
      } else {
        const bool bad = f.level() % static_cast<i64>(p) == 0;
        lam[n] = lam[p] * lam[pe / p] - (bad ? 0.0 : lam[pe / p / p]);
      }
    } else {
      lam[n] = lam[pe] * lam[m];
    }
  }
  return lam;
}

double vonmangoldt_f(const Newform& f, u64 n) {
  if (n == 0) throw PreconditionError("vonmangoldt_f: n must be positive");
  if (n == 1) return 0.0;
  const auto pp = prime_power(n);
  if (!pp) return 0.0;
  const auto [p, j] = *pp;
  const double lp = f.lambda_p(p);
  const double logp = std::log(static_cast<double>(p));
  if (f.level() % static_cast<i64>(p) == 0) return std::pow(lp, j) * logp;
  return power_sum(lp, j) * logp;
}

int root_number_twist(i64 level, int eps, i64 d) {
  const i64 g = std::gcd(d < 0 ? -d : d, 2 * level);
  if (g != 1) throw PreconditionError("root_number_twist: gcd(d, 2N) = " + std::to_string(g) + " > 1");
  // chi_d(-N) = chi_d(-1) chi_d(N), chi_d(-1) = sign(d)
  return eps * (d > 0 ? 1 : -1) * kronecker(d, static_cast<u64>(level));
}

int root_number_twist(const Newform& f, i64 d) { return root_number_twist(f.level(), f.root_number(), d); }

Newform catalog_form(const std::string& label, u64 prime_limit, unsigned workers) {
  auto e = catalog_curve(label);
  if (!e) throw NotFound("unknown curve label '" + label + "'");
  return Newform::from_curve(*e, prime_limit, workers);
}

}  // namespace qtwist
