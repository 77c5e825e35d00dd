#include "qtwist/bsd.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "qtwist/errors.hpp"
#include "qtwist/proxy.hpp"

namespace qtwist {

namespace fs = std::filesystem;

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::fixture: return "fixture";
    case Provenance::remote: return "remote";
    case Provenance::computed_proxy: return "computed-proxy";
  }
  return "?";
}

std::vector<std::string> CurveInvariants::missing_for_proxy() const {
  std::vector<std::string> m;
  if (!omega) m.emplace_back("omega");
  if (!torsion) m.emplace_back("torsion");
  if (!tamagawa) m.emplace_back("tamagawa");
  return m;
}

namespace {

double positive_real(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  const double x = v.get<double>();
  if (!(x > 0) || !std::isfinite(x)) throw ParseError(std::string("field '") + key + "' must be positive");
  return x;
}

u64 positive_int(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ParseError(std::string("field '") + key + "' must be an integer");
  const i64 x = v.get<i64>();
  if (x <= 0) throw ParseError(std::string("field '") + key + "' must be positive");
  return static_cast<u64>(x);
}

bool present(const nlohmann::json& j, const char* key) { return j.contains(key) && !j.at(key).is_null(); }

}  // namespace

CurveInvariants invariants_from_json(const nlohmann::json& j, const std::string& label, Provenance prov) {
  if (!j.is_object()) throw ParseError("invariant record must be a JSON object");
  CurveInvariants inv;
  inv.label = label;
  inv.provenance = prov;
  if (!j.contains("d") || !j.at("d").is_number_integer()) throw ParseError("field 'd' must be an integer");
  inv.d = j.at("d").get<i64>();
  if (present(j, "label")) {
    if (!j.at("label").is_string()) throw ParseError("field 'label' must be a string");
    if (!label.empty() && j.at("label").get<std::string>() != label)
      throw ParseError("field 'label' is '" + j.at("label").get<std::string>() + "', expected '" + label + "'");
    inv.label = j.at("label").get<std::string>();
  }
  if (present(j, "omega")) inv.omega = positive_real(j, "omega");
  if (present(j, "torsion")) inv.torsion = positive_int(j, "torsion");
  if (present(j, "tamagawa")) inv.tamagawa = positive_int(j, "tamagawa");
  if (present(j, "regulator")) inv.regulator = positive_real(j, "regulator");
  if (present(j, "sha")) inv.sha = positive_int(j, "sha");
  for (const char* k : {"omega", "torsion", "tamagawa", "regulator", "sha"})
    if (present(j, k)) inv.sources[k] = prov;
  return inv;
}

nlohmann::json to_json(const CurveInvariants& inv) {
  nlohmann::json j;
  j["label"] = inv.label;
  j["d"] = inv.d;
  if (inv.omega) j["omega"] = *inv.omega;
  if (inv.torsion) j["torsion"] = *inv.torsion;
  if (inv.tamagawa) j["tamagawa"] = *inv.tamagawa;
  if (inv.regulator) j["regulator"] = *inv.regulator;
  if (inv.sha) j["sha"] = *inv.sha;
  j["provenance"] = to_string(inv.provenance);
  nlohmann::json src = nlohmann::json::object();
  for (const auto& [k, v] : inv.sources) src[k] = to_string(v);
  j["sources"] = src;
  return j;
}

namespace {

fs::path record_path(const fs::path& root, const std::string& label, i64 d) {
  return root / label / (std::to_string(d) + ".json");
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

void write_atomic(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << body;
  }
  fs::rename(tmp, p);
}

struct Url {
  std::string origin;  // scheme://host:port
  std::string prefix;  // path without trailing slash
};

Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw PreconditionError("remote URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  Url u;
  u.origin = url.substr(0, slash);
  u.prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!u.prefix.empty() && u.prefix.back() == '/') u.prefix.pop_back();
  return u;
}

template <class T>
void merge_field(std::optional<T>& into, const std::optional<T>& from, const char* name, CurveInvariants& inv,
                 Provenance from_prov) {
  if (!from) return;
  if (!into) {
    into = from;
    inv.sources[name] = from_prov;
  } else if (*into != *from) {
    spdlog::warn("{} d={}: field '{}' differs between sources ({} kept over {})", inv.label, inv.d, name,
                 *into, *from);
  }
}

}  // namespace

InvariantStore::InvariantStore(InvariantSourceOptions opt) : opt_(std::move(opt)) {
  if (!opt_.cache_dir) {
    if (const char* env = std::getenv("QTWIST_CACHE_DIR"); env && *env) opt_.cache_dir = fs::path(env) / "bsd";
  }
}

std::optional<CurveInvariants> InvariantStore::from_fixture(const std::string& label, i64 d) const {
  if (!opt_.fixtures) return std::nullopt;
  const fs::path p = record_path(*opt_.fixtures, label, d);
  if (!fs::exists(p)) return std::nullopt;
  auto inv = invariants_from_json(read_json(p), label, Provenance::fixture);
  if (inv.d != d) throw ParseError(p.string() + ": field 'd' is " + std::to_string(inv.d));
  return inv;
}

std::optional<CurveInvariants> InvariantStore::from_remote(const std::string& label, i64 d) {
  if (!opt_.remote || opt_.offline) return std::nullopt;
  std::optional<fs::path> cached;
  if (opt_.cache_dir) cached = record_path(*opt_.cache_dir, label, d);
  if (cached && !opt_.refresh && fs::exists(*cached)) {
    auto inv = invariants_from_json(read_json(*cached), label, Provenance::remote);
    if (inv.d != d) throw ParseError(cached->string() + ": field 'd' is " + std::to_string(inv.d));
    return inv;
  }
  std::lock_guard lock(net_mu_);
  const Url url = split_url(*opt_.remote);
  httplib::Client cli(url.origin);
  const auto secs = static_cast<time_t>(opt_.timeout_seconds);
  const auto usecs = static_cast<time_t>((opt_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  const std::string path = url.prefix + "/" + label + "/" + std::to_string(d) + ".json";
  std::string last_error = "no attempt";
  for (int attempt = 0; attempt < std::max(1, opt_.retries); ++attempt) {
    ++fetches_;
    auto res = cli.Get(path.c_str());
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 404) return std::nullopt;
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(*opt_.remote + path + ": " + e.what());
    }
    auto inv = invariants_from_json(j, label, Provenance::remote);
    if (inv.d != d) throw ParseError(*opt_.remote + path + ": field 'd' is " + std::to_string(inv.d));
    if (cached) write_atomic(*cached, res->body);
    return inv;
  }
  throw Error("remote fetch of " + path + " failed: " + last_error);
}

CurveInvariants InvariantStore::load(const std::string& label, i64 d) {
  auto fix = from_fixture(label, d);
  std::optional<CurveInvariants> rem;
  if (!fix || !fix->missing_for_proxy().empty() || !fix->regulator || !fix->sha) rem = from_remote(label, d);
  if (!fix && !rem) throw NotFound("no invariants for " + label + " d=" + std::to_string(d));
  if (!fix) return *rem;
  if (!rem) return *fix;
  CurveInvariants out = *fix;
  merge_field(out.omega, rem->omega, "omega", out, Provenance::remote);
  merge_field(out.torsion, rem->torsion, "torsion", out, Provenance::remote);
  merge_field(out.tamagawa, rem->tamagawa, "tamagawa", out, Provenance::remote);
  merge_field(out.regulator, rem->regulator, "regulator", out, Provenance::remote);
  merge_field(out.sha, rem->sha, "sha", out, Provenance::remote);
  return out;
}

namespace {

using cld = std::complex<long double>;

double agm(double a, double b) {
  for (int i = 0; i < 100 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double m = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = m;
  }
  return 0.5 * (a + b);
}

// Roots of x^3 + b x^2 + c x + e, polished by Newton steps.
std::array<cld, 3> cubic_roots(long double b, long double c, long double e) {
  const long double p = c - b * b / 3;
  const long double q = 2 * b * b * b / 27 - b * c / 3 + e;
  const long double shift = -b / 3;
  std::array<cld, 3> r;
  const long double disc = -(4 * p * p * p + 27 * q * q);
  if (disc > 0) {
    const long double m = 2 * std::sqrt(-p / 3);
    const long double th = std::acos(std::clamp(3 * q / (p * m), -1.0L, 1.0L)) / 3;
    for (int k = 0; k < 3; ++k) r[k] = m * std::cos(th - 2 * std::numbers::pi_v<long double> * k / 3) + shift;
  } else {
    const long double s = std::sqrt(std::max(0.0L, q * q / 4 + p * p * p / 27));
    const long double u = std::cbrt(-q / 2 + s), v = std::cbrt(-q / 2 - s);
    const long double re = -(u + v) / 2, im = std::sqrt(3.0L) / 2 * (u - v);
    r = {cld(u + v + shift, 0), cld(re + shift, im), cld(re + shift, -im)};
  }
  for (auto& z : r) {
    for (int it = 0; it < 4; ++it) {
      const cld f = ((z + b) * z + c) * z + e;
      const cld df = (3.0L * z + 2 * b) * z + c;
      if (std::abs(df) == 0) break;
      z -= f / df;
    }
  }
  return r;
}

}  // namespace

double real_period_twist(const EllipticCurve& e, i64 d) {
  if (d == 0) throw PreconditionError("d must be nonzero");
  const auto& a = e.ainvariants();
  const long double b2 = a[0] * a[0] + 4 * a[1];
  const long double b4 = 2 * a[3] + a[0] * a[2];
  const long double b6 = a[2] * a[2] + 4 * a[4];
  const long double dd = static_cast<long double>(d);
  // H^2 = 4 g(x), g = x^3 + (d b2/4) x^2 + (d^2 b4/2) x + d^3 b6/4; the period is
  // the integral of dx/sqrt(g) over the real locus.
  auto r = cubic_roots(dd * b2 / 4, dd * dd * b4 / 2, dd * dd * dd * b6 / 4);
  const long double tiny = 1e-12L * (1 + std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]));
  std::vector<long double> real;
  cld cplx_root;
  for (const auto& z : r) {
    if (std::abs(z.imag()) <= tiny) real.push_back(z.real());
    else cplx_root = z;
  }
  constexpr double pi = std::numbers::pi;
  if (real.size() == 3) {
    std::sort(real.begin(), real.end(), std::greater<>());
    const double e1 = static_cast<double>(real[0]), e2 = static_cast<double>(real[1]), e3 = static_cast<double>(real[2]);
    // two components, each pi / AGM
    return 2 * pi / agm(std::sqrt(e1 - e3), std::sqrt(e1 - e2));
  }
  if (real.size() != 1) throw Error("real_period_twist: could not separate the roots of the twisted cubic");
  const long double e1 = real[0];
  const long double q = std::abs(cld(e1, 0) - cplx_root);
  const long double c = (e1 - cplx_root.real()) / q;
  return static_cast<double>(pi / (std::sqrt(q) * agm(1.0, static_cast<double>(std::sqrt((1 + c) / 2)))));
}

CurveInvariants computed_invariants(const EllipticCurve& e, i64 d, double envelope) {
  CurveInvariants inv;
  inv.label = e.label();
  inv.d = d;
  inv.provenance = Provenance::computed_proxy;
  inv.omega = real_period_twist(e, d);
  const double ratio = *inv.omega * std::sqrt(std::abs(static_cast<double>(d))) / real_period_twist(e, 1);
  if (!(ratio >= 1.0 / envelope && ratio <= envelope)) {
    std::ostringstream os;
    os << "computed period of " << e.label() << " d=" << d << " leaves the 1/sqrt|d| envelope: ratio " << ratio;
    throw GateFailure(os.str());
  }
  inv.torsion = 1 + e.cubic().integer_roots().size();
  u64 tam = 1;
  const u64 ad = static_cast<u64>(std::abs(d));
  const i64 disc = e.cubic_discriminant();
  for (u64 p : prime_divisors(ad)) {
    if (p == 2 || e.conductor() % static_cast<i64>(p) == 0 || disc % static_cast<i64>(p) == 0) {
      spdlog::debug("Tamagawa proxy omits p={} for {} d={}", p, e.label(), d);
      continue;
    }
    tam *= static_cast<u64>(c_of_p(e.cubic(), p));
  }
  inv.tamagawa = tam;
  for (const char* k : {"omega", "torsion", "tamagawa"}) inv.sources[k] = Provenance::computed_proxy;
  if (ad % 2 == 0 || ad % 3 == 0) spdlog::debug("computed period of {} d={} is approximate at 2 and 3", e.label(), d);
  return inv;
}

namespace {
double bsd_scale(const CurveInvariants& inv) {
  const auto missing = inv.missing_for_proxy();
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw PreconditionError("missing invariants for " + inv.label + " d=" + std::to_string(inv.d) + ": " + names);
  }
  const double t = static_cast<double>(*inv.torsion);
  return t * t / (*inv.omega * static_cast<double>(*inv.tamagawa));
}
}  // namespace

double sha_reg_proxy(double lprime, const CurveInvariants& inv) { return lprime * bsd_scale(inv); }

double s0_proxy(int root_number, double lcentral, const CurveInvariants& inv, double zero_threshold) {
  if (root_number != 1) throw PreconditionError("S0 is defined for root number +1 twists");
  if (!(std::abs(lcentral) > zero_threshold)) throw PreconditionError("L(1/2) vanishes numerically");
  return lcentral * bsd_scale(inv);
}

}  // namespace qtwist
