#include "qtwist/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qtwist/charsum.hpp"
#include "qtwist/errors.hpp"
#include "qtwist/numerics.hpp"

namespace qtwist {

double gaussian_moment(int k) {
  if (k < 0) throw PreconditionError("gaussian_moment: k must be nonnegative");
  if (k % 2) return 0.0;
  // (k-1)!! computed as a product keeps small k exact
  double v = 1.0;
  for (int j = k - 1; j > 1; j -= 2) v *= j;
  return v;
}

std::vector<FamilySample> collect_samples(const TwistFamily& family, double X, const SampleSources& src,
                                          unsigned workers) {
  if (!(X > 0)) throw PreconditionError("X must be positive");
  const auto& phi = default_cutoff();
  const auto chunks = chunk_ranges(SmoothCutoff::support_lo * X, SmoothCutoff::support_hi * X);
  auto parts = ordered_parallel_map<std::vector<FamilySample>>(chunks.size(), workers, [&](std::size_t i) {
    std::vector<FamilySample> out;
    for (i64 d : family.enumerate(chunks[i].first, chunks[i].second)) {
      const double w = phi(std::abs(static_cast<double>(d)) / X);
      if (w == 0.0) continue;
      FamilySample s;
      s.d = d;
      s.weight = w;
      s.P.reserve(src.polys.size());
      for (const auto& poly : src.polys) s.P.push_back(poly(d));
      if (src.window) s.C = (*src.window)(d);
      if (src.engine) s.zero_sum = src.engine->zero_sum(d);
      out.push_back(std::move(s));
    }
    return out;
  });
  std::vector<FamilySample> all;
  for (auto& p : parts) all.insert(all.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  return all;
}

namespace {

double loglog(double X) {
  const double v = std::log(std::log(X));
  if (!(v > 0)) throw PreconditionError("log log of the cutoff must be positive");
  return v;
}

double combine(const FamilySample& s, std::span<const double> a) {
  if (a.size() != s.P.size()) throw PreconditionError("coefficient vector and form count differ");
  double v = 0;
  for (std::size_t j = 0; j < a.size(); ++j) v += a[j] * s.P[j];
  return v;
}

double zero_scale(const TwistFamily& family, double X, const ZeroSumEngine& engine) {
  const double M = static_cast<double>(engine.form_count());
  const double classes = static_cast<double>(family.classes().size());
  return M * classes * X / static_cast<double>(family.n0()) * euler_factor_coprime(family.n0()) *
         default_cutoff().hat0() * prop2_kernel_factor(X, engine.kernel());
}

template <class Value>
MomentReport finish(std::span<const FamilySample> samples, int k, double X, double x, double var, double var_x,
                    const ZeroSumEngine* engine, double scale_override, Value&& value) {
  if (k < 0) throw PreconditionError("moment order must be nonnegative");
  MomentReport r;
  r.k = k;
  r.X = X;
  r.x = x;
  r.variance = var;
  r.variance_x = var_x;
  NeumaierSum lhs, W;
  for (const auto& s : samples) {
    const double v = value(s);
    double t = std::pow(v, k) * s.weight;
    if (engine) t *= s.zero_sum;
    lhs.add(t);
    W.add(s.weight);
  }
  r.members = samples.size();
  r.lhs = lhs.value();
  r.weight_sum = W.value();
  const double scale = engine ? scale_override : r.weight_sum;
  if (engine) r.L = engine->kernel().L;
  const double Mk = gaussian_moment(k);
  r.predicted = scale * std::pow(var, k / 2.0) * Mk;
  const double base = scale * std::pow(var, k / 2.0);
  r.normalized = base != 0 ? r.lhs / base : 0.0;
  if (Mk != 0 && r.predicted != 0) {
    r.ratio = r.lhs / r.predicted;
    r.ratio_x = r.lhs / (scale * std::pow(var_x, k / 2.0) * Mk);
  }
  return r;
}

}  // namespace

MomentReport poly_moment(std::span<const FamilySample> samples, std::span<const double> a, int k, double X,
                         double x) {
  if (k > 8) throw PreconditionError("poly_moment: k <= 8");
  double a2 = 0;
  for (double v : a) a2 += v * v;
  return finish(samples, k, X, x, a2 * loglog(X), a2 * loglog(x), nullptr, 0,
                [&](const FamilySample& s) { return combine(s, a); });
}

MomentReport poly_moment_with_zeros(std::span<const FamilySample> samples, std::span<const double> a, int k,
                                    const TwistFamily& family, double X, double x, const ZeroSumEngine& engine) {
  if (k > 8) throw PreconditionError("poly_moment: k <= 8");
  double a2 = 0;
  for (double v : a) a2 += v * v;
  return finish(samples, k, X, x, a2 * loglog(X), a2 * loglog(x), &engine, zero_scale(family, X, engine),
                [&](const FamilySample& s) { return combine(s, a); });
}

MomentReport pc_moment(std::span<const FamilySample> samples, double b, double c, int k, double sigma2,
                       const TwistFamily& family, double X, double x, const ZeroSumEngine* engine) {
  if (k > 8) throw PreconditionError("pc_moment: k <= 8");
  const double v = b * b + 2 * b * c + c * c * sigma2;
  const double scale = engine ? zero_scale(family, X, *engine) : 0.0;
  return finish(samples, k, X, x, v * loglog(X), v * loglog(x), engine, scale, [&](const FamilySample& s) {
    if (s.P.empty()) throw PreconditionError("pc_moment needs one Dirichlet polynomial");
    return b * s.P[0] + c * (s.P[0] - s.C);
  });
}

double psi_rectangle(std::span<const double> alpha, std::span<const double> beta) {
  if (alpha.size() != beta.size()) throw PreconditionError("rectangle endpoints differ in dimension");
  double v = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (!(alpha[j] < beta[j])) throw PreconditionError("rectangle needs alpha < beta");
    v *= normal_cdf(beta[j]) - normal_cdf(alpha[j]);
  }
  return v;
}

double xi_rectangle(std::span<const double> alpha, std::span<const double> beta, double sigma_E, double tol) {
  if (alpha.size() != 2 || beta.size() != 2) throw PreconditionError("xi_rectangle is two-dimensional");
  if (!(sigma_E > 1)) throw PreconditionError("xi_rectangle: need sigma_E > 1 (|rho| < 1)");
  const double rho = 1.0 / sigma_E;
  const double one = 1.0 - rho * rho;
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(one));
  auto clamp = [](double v) { return std::clamp(v, -12.0, 12.0); };
  const double a1 = clamp(alpha[0]), b1 = clamp(beta[0]);
  const double a2 = clamp(alpha[1]), b2 = clamp(beta[1]);
  if (!(alpha[0] < beta[0]) || !(alpha[1] < beta[1])) throw PreconditionError("rectangle needs alpha < beta");
  if (!(a1 < b1) || !(a2 < b2)) return 0.0;
  auto inner = [&](double v1) {
    auto dens = [&](double v2) { return norm * std::exp(-(v1 * v1 - 2 * rho * v1 * v2 + v2 * v2) / (2 * one)); };
    return integrate(dens, a2, b2, tol, 1e-17);
  };
  return integrate(inner, a1, b1, tol, 1e-15);
}

double mc_rectangle(std::span<const double> alpha, std::span<const double> beta, double rho, u64 samples,
                    std::uint64_t seed) {
  const std::size_t m = alpha.size();
  if (beta.size() != m || m == 0) throw PreconditionError("rectangle endpoints differ in dimension");
  if (rho != 0 && m != 2) throw PreconditionError("correlated Monte Carlo is two-dimensional");
  if (!(std::abs(rho) < 1)) throw PreconditionError("|rho| must be < 1");
  if (samples == 0) throw PreconditionError("need at least one sample");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  const double c = std::sqrt(1 - rho * rho);
  std::vector<double> z(m);
  u64 hits = 0;
  for (u64 i = 0; i < samples; ++i) {
    for (auto& v : z) v = nd(gen);
    if (m == 2) z[1] = rho * z[0] + c * z[1];
    bool in = true;
    for (std::size_t j = 0; j < m && in; ++j) in = alpha[j] < z[j] && z[j] <= beta[j];
    hits += in;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

ShapeStats shape_stats(std::span<const double> values, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != values.size()) throw PreconditionError("weights and values differ in size");
  ShapeStats r;
  r.n = values.size();
  if (values.empty()) return r;
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  NeumaierSum W, S1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    W.add(w(i));
    S1.add(w(i) * values[i]);
  }
  r.mean = S1.value() / W.value();
  NeumaierSum m2, m3, m4;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double c = values[i] - r.mean;
    m2.add(w(i) * c * c);
    m3.add(w(i) * c * c * c);
    m4.add(w(i) * c * c * c * c);
  }
  r.variance = m2.value() / W.value();
  if (r.variance > 0) {
    r.skewness = m3.value() / W.value() / std::pow(r.variance, 1.5);
    r.excess_kurtosis = m4.value() / W.value() / (r.variance * r.variance) - 3.0;
  }
  return r;
}

std::vector<ProjectionShape> projection_shapes(std::span<const FamilySample> samples, int count, double x,
                                               std::uint64_t seed) {
  if (samples.empty()) return {};
  const std::size_t M = samples.front().P.size();
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  const double norm = std::sqrt(loglog(x));
  std::vector<double> vals(samples.size()), ws(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) ws[i] = samples[i].weight;
  std::vector<ProjectionShape> out;
  for (int c = 0; c < count; ++c) {
    std::vector<double> a(M);
    double n2 = 0;
    for (auto& v : a) {
      v = nd(gen);
      n2 += v * v;
    }
    for (auto& v : a) v /= std::sqrt(n2);
    for (std::size_t i = 0; i < samples.size(); ++i) vals[i] = combine(samples[i], a) / norm;
    out.push_back({a, shape_stats(vals, ws)});
  }
  return out;
}

std::string to_string(JointStatistic s) {
  switch (s) {
    case JointStatistic::u_vector: return "u-vector";
    case JointStatistic::u_sha: return "u-sha";
    case JointStatistic::rank_zero: return "rank-zero";
  }
  return "?";
}

double joint_constant(JointStatistic s, int M) {
  switch (s) {
    case JointStatistic::u_vector:
      if (M < 1 || M > 3) throw PreconditionError("the u-vector bound is stated for 1 <= M <= 3");
      return 1.0 - M / 4.0;
    case JointStatistic::u_sha: return 0.75;
    case JointStatistic::rank_zero: return 0.25;
  }
  return 0;
}

DistributionReport joint_report(JointStatistic s, std::span<const JointRow> rows, std::span<const double> alpha,
                                std::span<const double> beta, std::optional<double> sigma_E, double X) {
  const std::size_t m = alpha.size();
  if (beta.size() != m || m == 0) throw PreconditionError("rectangle endpoints differ in dimension");
  DistributionReport r;
  r.statistic = s;
  r.alpha.assign(alpha.begin(), alpha.end());
  r.beta.assign(beta.begin(), beta.end());
  r.X = X;
  for (const auto& row : rows) {
    if (row.undecided) {
      ++r.undecided;
      continue;
    }
    if (row.stat.size() != m) throw PreconditionError("statistic dimension differs from the rectangle");
    ++r.members;
    bool in = true;
    for (std::size_t j = 0; j < m && in; ++j) in = alpha[j] < row.stat[j] && row.stat[j] <= beta[j];
    r.inside += in;
  }
  r.empirical = r.members ? static_cast<double>(r.inside) / static_cast<double>(r.members) : 0.0;
  if (s == JointStatistic::u_vector) {
    r.target = psi_rectangle(alpha, beta);
    r.constant = joint_constant(s, static_cast<int>(m));
  } else {
    if (m != 2) throw PreconditionError("bivariate statistic needs a two-dimensional rectangle");
    if (!sigma_E) throw PreconditionError("bivariate statistic needs sigma(E)");
    r.target = xi_rectangle(alpha, beta, *sigma_E);
    r.constant = joint_constant(s, 2);
  }
  r.bound = r.constant * r.target;
  return r;
}

namespace {
double loglog_d(i64 d) {
  const double ad = std::abs(static_cast<double>(d));
  if (ad < 20) throw PreconditionError("normalized statistics need |d| >= 20");
  return std::log(std::log(ad));
}
}  // namespace

double u_statistic(double logabs_lprime, i64 d) {
  const double ll = loglog_d(d);
  return (logabs_lprime - 0.5 * ll) / std::sqrt(ll);
}

double sha_statistic(double sha_reg, i64 d, double mu, double sigma2) {
  if (sha_reg == 0) throw PreconditionError("S R must be nonzero");
  const double ll = loglog_d(d);
  const double ad = std::abs(static_cast<double>(d));
  return (std::log(std::abs(sha_reg) / std::sqrt(ad)) - (mu + 1) * ll) / std::sqrt(sigma2 * ll);
}

double central_value_statistic(double lcentral, i64 d) {
  if (!(lcentral > 0)) throw PreconditionError("L(1/2) must be positive");
  const double ll = loglog_d(d);
  return (std::log(lcentral) + 0.5 * ll) / std::sqrt(ll);
}

double s0_statistic(double s0, i64 d, double mu, double sigma2) {
  if (!(s0 > 0)) throw PreconditionError("S0 must be positive");
  const double ll = loglog_d(d);
  const double ad = std::abs(static_cast<double>(d));
  return (std::log(s0 / std::sqrt(ad)) - mu * ll) / std::sqrt(sigma2 * ll);
}

}  // namespace qtwist
