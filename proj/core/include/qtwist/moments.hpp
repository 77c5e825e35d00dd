#pragma once

// Weighted family moments of the Dirichlet polynomials, Gaussian targets and
// rectangle probabilities, and empirical joint-distribution reports.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtwist/explicit_formula.hpp"
#include "qtwist/family.hpp"
#include "qtwist/proxy.hpp"

namespace qtwist {

/// k!/(2^{k/2}(k/2)!) for even k, 0 for odd k.
double gaussian_moment(int k);

/// Everything the moment sums need about one d, computed once per scan.
struct FamilySample {
  i64 d = 0;
  double weight = 0;      // Phi(kappa d / X)
  std::vector<double> P;  // one per form
  double C = 0;           // C(d; x) when a window was given
  double zero_sum = 0;    // explicit-formula zero sum when an engine was given
};

struct SampleSources {
  std::span<const DirichletPoly> polys;
  const TamagawaWindow* window = nullptr;
  const ZeroSumEngine* engine = nullptr;
};

/// Members of `family` with Phi(|d|/X) > 0, in enumeration order.
std::vector<FamilySample> collect_samples(const TwistFamily& family, double X, const SampleSources& src,
                                          unsigned workers = 1);

struct MomentReport {
  int k = 0;
  double lhs = 0;
  double predicted = 0;
  double ratio = 0;       // lhs / predicted for even k
  double normalized = 0;  // lhs / (W V^{k/2}) for any k (W = weight or main-term scale)
  double variance = 0;    // V: (sum a_j^2) log log X, or the P-C analogue
  double variance_x = 0;  // same with log log x in place of log log X
  double ratio_x = 0;     // lhs / (W V_x^{k/2} M_k)
  double weight_sum = 0;
  double X = 0, x = 0, L = 0;
  u64 members = 0;
};

/// sum_d P_a(d)^k Phi against (sum_d Phi)(sum a_j^2 log log X)^{k/2} M_k.
MomentReport poly_moment(std::span<const FamilySample> samples, std::span<const double> a, int k,
                         double X, double x);

/// sum_d P_a(d)^k Z(d) Phi against
/// M (#classes) X/N0 prod_{p !| N0}(1 - p^-2) Phi^(0) (2 log X/L h^(0) + h(0)/2) V^{k/2} M_k.
MomentReport poly_moment_with_zeros(std::span<const FamilySample> samples, std::span<const double> a, int k,
                                    const TwistFamily& family, double X, double x, const ZeroSumEngine& engine);

/// sum_d (b P + c (P - C))^k Phi (times Z(d) when `engine` is given), variance
/// (b^2 + 2bc + c^2 sigma^2) log log X. Uses the first form's P.
MomentReport pc_moment(std::span<const FamilySample> samples, double b, double c, int k, double sigma2,
                       const TwistFamily& family, double X, double x, const ZeroSumEngine* engine = nullptr);

/// prod_j (N(beta_j) - N(alpha_j)).
double psi_rectangle(std::span<const double> alpha, std::span<const double> beta);

/// Bivariate normal mass of (a1, b1) x (a2, b2) with unit variances and
/// correlation rho = 1/sigma_E, by nested adaptive quadrature of the density.
/// Infinite or far endpoints are clamped to +-12.
double xi_rectangle(std::span<const double> alpha, std::span<const double> beta, double sigma_E,
                    double tol = 1e-10);

/// Monte Carlo estimate of the same rectangle mass (rho = 0 gives the
/// product measure). Deterministic for a given seed.
double mc_rectangle(std::span<const double> alpha, std::span<const double> beta, double rho, u64 samples,
                    std::uint64_t seed);

struct ShapeStats {
  double mean = 0, variance = 0, skewness = 0, excess_kurtosis = 0;
  u64 n = 0;
};
/// Weighted moments (weights may all be 1).
ShapeStats shape_stats(std::span<const double> values, std::span<const double> weights = {});

/// Cramer-Wold style diagnostic: shape of a.P / sqrt(log log x) for
/// `count` random unit vectors a (seeded).
struct ProjectionShape {
  std::vector<double> direction;
  ShapeStats stats;
};
std::vector<ProjectionShape> projection_shapes(std::span<const FamilySample> samples, int count, double x,
                                               std::uint64_t seed);

enum class JointStatistic { u_vector, u_sha, rank_zero };
std::string to_string(JointStatistic s);

/// Lower-bound constant: 1 - M/4, 3/4 or 1/4.
double joint_constant(JointStatistic s, int M);

/// One member's statistic vector; `undecided` members are counted, not placed.
struct JointRow {
  i64 d = 0;
  std::vector<double> stat;
  bool undecided = false;
};

struct DistributionReport {
  JointStatistic statistic = JointStatistic::u_vector;
  std::vector<double> alpha, beta;
  double empirical = 0;  // fraction of decided members in the open-closed box
  double target = 0;     // Psi_M or Xi_E
  double constant = 0;
  double bound = 0;      // constant * target
  u64 members = 0;       // decided members
  u64 inside = 0;
  u64 undecided = 0;
  double X = 0;
};

/// Rows lie in the rectangle when alpha_j < s_j <= beta_j for every j.
/// sigma_E is needed for the two bivariate statistics.
DistributionReport joint_report(JointStatistic s, std::span<const JointRow> rows, std::span<const double> alpha,
                                std::span<const double> beta, std::optional<double> sigma_E = {},
                                double X = 0);

/// Normalized coordinate (log|L'| - loglog|d|/2)/sqrt(loglog|d|).
double u_statistic(double logabs_lprime, i64 d);
/// (log(S R / sqrt|d|) - (mu + 1) loglog|d|) / sqrt(sigma^2 loglog|d|).
double sha_statistic(double sha_reg, i64 d, double mu, double sigma2);
/// (log L(1/2) + loglog|d|/2)/sqrt(loglog|d|).
double central_value_statistic(double lcentral, i64 d);
/// (log(S0 / sqrt|d|) - mu loglog|d|) / sqrt(sigma^2 loglog|d|).
double s0_statistic(double s0, i64 d, double mu, double sigma2);

}  // namespace qtwist
