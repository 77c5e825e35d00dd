#pragma once

// BSD invariants of twists E_d from fixture files, a remote JSON endpoint
// (cached on disk) or computed proxies, and the products S(E_d) R(E_d) and
// S_0(E_d) built from them.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtwist/curve.hpp"

namespace qtwist {

enum class Provenance { fixture, remote, computed_proxy };
std::string to_string(Provenance p);

struct CurveInvariants {
  std::string label;
  i64 d = 1;
  std::optional<double> omega;
  std::optional<u64> torsion;
  std::optional<u64> tamagawa;
  std::optional<double> regulator;
  std::optional<u64> sha;
  Provenance provenance = Provenance::fixture;
  std::map<std::string, Provenance> sources;  // per field actually present

  /// Names of the fields S R needs (omega, torsion, tamagawa) that are absent.
  std::vector<std::string> missing_for_proxy() const;
};

/// Record schema {d, omega, torsion, tamagawa, regulator?, sha?, label?}.
/// Throws ParseError naming the offending field.
CurveInvariants invariants_from_json(const nlohmann::json& j, const std::string& label, Provenance prov);
nlohmann::json to_json(const CurveInvariants& inv);

struct InvariantSourceOptions {
  std::optional<std::filesystem::path> fixtures;  // <dir>/<label>/<d>.json
  std::optional<std::string> remote;              // http://host[:port][/prefix]
  std::optional<std::filesystem::path> cache_dir; // remote responses, same layout
  bool refresh = false;                           // re-fetch even when cached
  bool offline = false;                           // never touch the network
  int retries = 3;
  double timeout_seconds = 5.0;
};

class InvariantStore {
 public:
  explicit InvariantStore(InvariantSourceOptions opt);

  /// Fixture fields win over remote ones; a disagreement is logged. Throws
  /// NotFound when no source has the twist.
  CurveInvariants load(const std::string& label, i64 d);

  /// Number of network requests issued so far.
  int fetches() const noexcept { return fetches_; }

 private:
  std::optional<CurveInvariants> from_fixture(const std::string& label, i64 d) const;
  std::optional<CurveInvariants> from_remote(const std::string& label, i64 d);

  InvariantSourceOptions opt_;
  std::mutex net_mu_;
  int fetches_ = 0;
};

/// Real period of the model H^2 = 4x^3 + d b2 x^2 + 2 d^2 b4 x + d^3 b6 with
/// the differential dx/H (the long model of E itself at d = 1), by the AGM.
double real_period_twist(const EllipticCurve& e, i64 d);

/// Computed proxy: period as above, torsion 1 + #rational roots of F (the
/// 2-torsion, which twisting preserves), Tamagawa product over good primes
/// p | d of c(p). Throws GateFailure when Omega(E_d) sqrt|d| / Omega(E) leaves
/// [1/envelope, envelope].
CurveInvariants computed_invariants(const EllipticCurve& e, i64 d, double envelope = 4.0);

/// S(E_d) R(E_d) = L'(1/2) tors^2 / (Omega Tam).
double sha_reg_proxy(double lprime, const CurveInvariants& inv);

/// S_0(E_d) = L(1/2) tors^2 / (Omega Tam) for root number +1 twists with
/// L(1/2) above `zero_threshold`.
double s0_proxy(int root_number, double lcentral, const CurveInvariants& inv, double zero_threshold = 1e-10);

}  // namespace qtwist
