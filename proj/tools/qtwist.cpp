#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "qtwist/bsd.hpp"
#include "qtwist/charsum.hpp"
#include "qtwist/config.hpp"
#include "qtwist/errors.hpp"
#include "qtwist/explicit_formula.hpp"
#include "qtwist/family.hpp"
#include "qtwist/gauss_sum.hpp"
#include "qtwist/lvalue.hpp"
#include "qtwist/moments.hpp"
#include "qtwist/newform.hpp"
#include "qtwist/proxy.hpp"
#include "qtwist/records.hpp"
#include "qtwist/scan.hpp"

using namespace qtwist;
using nlohmann::json;

namespace {

// Options every subcommand shares.
struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string output;  // JSONL file; stdout when empty
  unsigned workers = 0;
  std::optional<u64> seed;

  RunConfig load(const std::string& kind = {}) const {
    RunConfig cfg = config_file.empty() ? RunConfig{} : load_config(config_file);
    if (!kind.empty()) cfg.kind = kind;
    for (const auto& o : overrides) apply_override(cfg, o);
    if (workers) cfg.workers = workers;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_file, "key = value run configuration")->check(CLI::ExistingFile);
  app->add_option("--set", c.overrides, "override one config key (key=value); repeatable");
  app->add_option("-o,--output", c.output, "append JSONL records here instead of stdout");
  app->add_option("-j,--workers", c.workers, "worker threads");
  app->add_option("--seed", c.seed, "seed for every random choice");
}

class Emitter {
 public:
  Emitter(const RunConfig& cfg, const std::string& path) : hash_(cfg.hash()) {
    if (!path.empty()) file_ = std::make_unique<JsonlWriter>(path);
  }
  void operator()(const ResultRecord& r) {
    if (file_) file_->write(r);
    else std::cout << to_json(r).dump() << '\n';
  }
  void emit(std::string kind, json inputs, json outputs) {
    ResultRecord r;
    r.kind = std::move(kind);
    r.inputs = std::move(inputs);
    r.outputs = std::move(outputs);
    r.config_hash = hash_;
    r.timestamp = utc_timestamp();
    r.version = code_version();
    (*this)(r);
  }

 private:
  std::string hash_;
  std::unique_ptr<JsonlWriter> file_;
};

std::vector<Newform> forms_for(const RunConfig& cfg, u64 limit) {
  std::vector<Newform> forms;
  for (const auto& label : cfg.curves) forms.push_back(catalog_form(label, limit, std::max(1u, cfg.workers)));
  for (const auto& path : cfg.form_files) forms.push_back(Newform::read(path));
  if (forms.empty()) throw PreconditionError("no forms selected (set curves or form_files)");
  return forms;
}

TwistFamily family_for(const RunConfig& cfg, const std::vector<FormSignature>& sig) {
  if (cfg.all_pairs) {
    if (cfg.sign == 0) throw PreconditionError("all_pairs needs sign = 1 or -1");
    return TwistFamily::all_classes(sig, cfg.sign);
  }
  return TwistFamily::single(sig, cfg.kappa, cfg.a, cfg.sign == 0 ? std::nullopt : std::optional<int>(cfg.sign));
}

TwistFamily family_for(const RunConfig& cfg) {
  std::vector<FormSignature> sig;
  for (const auto& label : cfg.curves) {
    auto e = catalog_curve(label);
    if (!e) throw NotFound("unknown curve label '" + label + "'");
    sig.push_back({e->conductor(), e->root_number()});
  }
  for (const auto& path : cfg.form_files) sig.push_back(FormSignature::of(Newform::read(path)));
  return family_for(cfg, sig);
}


void add_d_selection(CLI::App* app, std::vector<i64>& ds, double& lo, double& hi) {
  app->add_option("-d,--d", ds, "discriminant(s)");
  app->add_option("--from", lo, "family range lower end (exclusive, in |d|)");
  app->add_option("--to", hi, "family range upper end (inclusive, in |d|)");
}

u64 abs_d(i64 d) { return static_cast<u64>(d < 0 ? -d : d); }

// d = 1 is the untwisted form; anything else must be a fundamental discriminant.
i64 checked_d(i64 d) {
  if (d != 1 && !is_fundamental_discriminant(d)) throw PreconditionError("not a fundamental discriminant: " + std::to_string(d));
  return d;
}

// Discriminants for a per-d command: an explicit list, or the family in (lo, hi].
std::vector<i64> pick_ds(const RunConfig& cfg, const std::vector<i64>& ds, double lo, double hi) {
  if (!ds.empty()) {
    for (i64 d : ds) checked_d(d);
    return ds;
  }
  if (hi <= lo) throw PreconditionError("give --d or a range with --to > --from");
  return family_for(cfg).enumerate(lo, hi);
}

int run_scan_command(const RunConfig& cfg, const std::string& output, bool no_resume, std::optional<u64> stop) {
  Emitter out(cfg, output);
  ScanOptions opt;
  opt.resume = !no_resume;
  opt.stop_after_chunks = stop;
  opt.sink = [&](const ResultRecord& r) { out(r); };
  const ScanOutcome res = run_scan(cfg, opt);
  spdlog::info("scan {}: {} chunks, {} computed, {} resumed, {} rejected; checkpoint {}",
               res.complete ? "complete" : "stopped", res.chunks_total, res.chunks_computed, res.chunks_resumed,
               res.chunks_rejected, res.checkpoint.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistics of central L-values and Sha proxies over quadratic twist families"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  Common common;
  std::vector<i64> ds;
  double from = 0, to = 0;

  auto* fam = app.add_subcommand("family", "enumerate a twist family");
  add_common(fam, common);
  fam->add_option("--from", from, "lower end of |d| (exclusive)");
  fam->add_option("--to", to, "upper end of |d| (inclusive)")->required();
  bool family_json = false;
  fam->add_flag("--json", family_json, "JSONL records with root numbers instead of bare integers");

  auto* coeffs = app.add_subcommand("coeffs", "Hecke eigenvalues by point counting");
  add_common(coeffs, common);
  std::string curve_label = "37a1";
  u64 limit = 10000;
  std::string coef_out;
  coeffs->add_option("--curve", curve_label, "catalog label");
  coeffs->add_option("--limit", limit, "prime limit");
  coeffs->add_option("--write", coef_out, "write the form file here");

  auto* gauss = app.add_subcommand("gauss-check", "closed-form Gauss sums against direct summation");
  add_common(gauss, common);
  u64 nmax = 2000;
  i64 mmax = 50;
  gauss->add_option("--nmax", nmax, "largest odd modulus");
  gauss->add_option("--mmax", mmax, "largest |m|");

  // direct flags for scan subcommands; each becomes a config override
  std::vector<std::string> scan_sets;
  auto family_flags = [&](CLI::App* a, const char* nflag, const char* nhelp) {
    a->add_option_function<std::string>(nflag, [&](const std::string& v) { scan_sets.push_back("n_values=" + v); }, nhelp);
    a->add_option_function<std::string>("--v", [&](const std::string& v) { scan_sets.push_back("v=" + v); },
                                        "squarefree divisor condition v | d");
    a->add_option_function<std::string>("--kappa", [&](const std::string& v) {
      scan_sets.push_back("kappa=" + v);
      scan_sets.push_back("all_pairs=false");
    }, "sign class kappa (selects a single (kappa, a) class)");
    a->add_option_function<std::string>("--a", [&](const std::string& v) {
      scan_sets.push_back("a=" + v);
      scan_sets.push_back("all_pairs=false");
    }, "residue a mod N0 (selects a single (kappa, a) class)");
    a->add_option_function<std::string>("--X-grid", [&](const std::string& v) { scan_sets.push_back("X_grid=" + v); },
                                        "comma-separated X values");
    a->add_option_function<std::string>("--L", [&](const std::string& v) { scan_sets.push_back("L_rule=fixed:" + v); },
                                        "kernel dilation (default log X)");
  };
  bool no_resume = false;
  std::optional<u64> stop_after;
  auto scan_flags = [&](CLI::App* a) {
    a->add_flag("--no-resume", no_resume, "ignore an existing checkpoint");
    a->add_option("--stop-after", stop_after, "stop after this many chunks (resume later)");
  };
  auto* charsum = app.add_subcommand("charsum", "smoothed character sums over the family");
  add_common(charsum, common);
  scan_flags(charsum);
  family_flags(charsum, "--n", "comma-separated n values");

  auto* proxy = app.add_subcommand("proxy", "Dirichlet polynomial and Tamagawa proxies per d");
  add_common(proxy, common);
  add_d_selection(proxy, ds, from, to);
  double X_param = 1e5;
  proxy->add_option("-X", X_param, "family scale X (sets x by the x rule)");

  auto* zerosum = app.add_subcommand("zerosum", "explicit-formula zero sums (per d, or the family aggregate)");
  add_common(zerosum, common);
  add_d_selection(zerosum, ds, from, to);
  bool aggregate = false;
  zerosum->add_flag("--aggregate", aggregate, "scan the family over the X grid instead of listing d");
  zerosum->add_option("-X", X_param, "kernel scale X for per-d listing (L by the L rule)");
  scan_flags(zerosum);
  family_flags(zerosum, "--ell", "comma-separated ell values (aggregate mode)");

  auto* lvalue = app.add_subcommand("lvalue", "central values L(1/2) of twists");
  add_common(lvalue, common);
  add_d_selection(lvalue, ds, from, to);
  std::vector<double> s_point;
  lvalue->add_option("--s", s_point, "evaluate the completed Lambda(s) at s = re [im] instead of L(1/2)")->expected(1, 2);
  LOptions lopt;
  lvalue->add_option("--truncation-c", lopt.truncation_c, "series length constant c in T = c Q")->check(CLI::PositiveNumber);

  auto* lprime = app.add_subcommand("lprime", "central derivatives L'(1/2) of twists");
  add_common(lprime, common);
  add_d_selection(lprime, ds, from, to);
  bool extended = false;
  lprime->add_flag("--extended", extended, "also evaluate in 50-digit arithmetic");
  lprime->add_option("--truncation-c", lopt.truncation_c, "series length constant c in T = c Q")->check(CLI::PositiveNumber);

  auto* moments = app.add_subcommand("moments", "weighted moments of the Dirichlet polynomial");
  add_common(moments, common);
  scan_flags(moments);

  auto* dist = app.add_subcommand("dist", "joint-distribution report for L' and Sha statistics");
  add_common(dist, common);
  add_d_selection(dist, ds, from, to);
  std::vector<double> alpha{-1}, beta{1};
  std::string stat_name = "u-vector";
  std::string fixtures;
  std::string csv_out;
  u64 mc_samples = 0;
  dist->add_option("--alpha", alpha, "rectangle lower corner");
  dist->add_option("--beta", beta, "rectangle upper corner");
  dist->add_option("--statistic", stat_name, "u-vector | u-sha | rank-zero");
  dist->add_option("--fixtures", fixtures, "BSD fixture directory (u-sha, rank-zero)");
  dist->add_option("--csv", csv_out, "export per-d statistics as CSV");
  dist->add_option("--mc", mc_samples, "Monte Carlo cross-check of the target with this many samples");

  auto* bsd = app.add_subcommand("bsd", "BSD invariants and the Sha proxy per twist");
  add_common(bsd, common);
  add_d_selection(bsd, ds, from, to);
  InvariantSourceOptions src;
  std::string fixtures_dir, remote_url, cache_dir;
  bool refresh = false, offline = false, allow_computed = false;
  bsd->add_option("--fixtures", fixtures_dir, "fixture directory <dir>/<label>/<d>.json");
  bsd->add_option("--remote", remote_url, "remote base URL");
  bsd->add_option("--cache", cache_dir, "cache directory for remote records");
  bsd->add_flag("--refresh", refresh, "re-fetch cached remote records");
  bsd->add_flag("--offline", offline, "never touch the network");
  bsd->add_flag("--computed", allow_computed, "fall back to computed proxies (approximate)");

  auto* report = app.add_subcommand("report", "convert or merge JSONL result files");
  std::vector<std::string> inputs;
  std::string format = "csv", report_out;
  std::string kind_filter;
  report->add_option("inputs", inputs, "JSONL files")->required();
  report->add_option("--format", format, "csv | jsonl");
  report->add_option("-o,--output", report_out, "output file")->required();
  report->add_option("--kind", kind_filter, "keep only this record kind");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  // records go to stdout; logging stays on stderr
  spdlog::set_default_logger(spdlog::stderr_logger_mt("qtwist"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");

  try {
    if (*fam) {
      const RunConfig cfg = common.load();
      const TwistFamily f = family_for(cfg);
      if (!family_json) {
        std::ofstream file;
        if (!common.output.empty()) file.open(common.output, std::ios::app);
        std::ostream& os = common.output.empty() ? std::cout : file;
        for (i64 d : f.enumerate(from, to)) os << d << '\n';
        return 0;
      }
      Emitter out(cfg, common.output);
      for (i64 d : f.enumerate(from, to)) {
        json signs = json::array();
        for (const auto& s : f.forms()) signs.push_back(root_number_twist(s.level, s.epsilon, d));
        out.emit("family_member", {{"d", d}}, {{"root_numbers", signs}, {"n0", f.n0()}});
      }
    } else if (*coeffs) {
      const RunConfig cfg = common.load();
      const Newform f = catalog_form(curve_label, limit, std::max(1u, cfg.workers));
      if (!coef_out.empty()) f.write(coef_out);
      json skipped = f.skipped_primes();
      Emitter out(cfg, common.output);
      out.emit("coeffs", {{"curve", curve_label}, {"limit", limit}},
               {{"level", f.level()}, {"root_number", f.root_number()}, {"primes", f.primes().size()},
                {"skipped", skipped}, {"lambda_2", f.lambda_p(2)}});
    } else if (*gauss) {
      const RunConfig cfg = common.load();
      const GaussCheckResult r = gauss_check(nmax, mmax, std::max(1u, cfg.workers));
      Emitter out(cfg, common.output);
      out.emit("gauss_check", {{"nmax", nmax}, {"mmax", mmax}},
               {{"cases", r.cases}, {"mismatches", r.mismatches}, {"max_abs_error", r.max_abs_error},
                {"first_bad_m", r.first_bad_m}, {"first_bad_n", r.first_bad_n}});
      if (r.mismatches) throw GateFailure("Gauss sum closed form disagrees with direct summation");
    } else if (*charsum) {
      common.overrides.insert(common.overrides.begin(), scan_sets.begin(), scan_sets.end());
      return run_scan_command(common.load("charsum"), common.output, no_resume, stop_after);
    } else if (*moments) {
      return run_scan_command(common.load("moments"), common.output, no_resume, stop_after);
    } else if (*zerosum && aggregate) {
      common.overrides.insert(common.overrides.begin(), scan_sets.begin(), scan_sets.end());
      return run_scan_command(common.load("zerosum"), common.output, no_resume, stop_after);
    } else if (*proxy) {
      const RunConfig cfg = common.load();
      const double x = resolve_x(cfg.x_rule, X_param);
      const auto forms = forms_for(cfg, static_cast<u64>(x) + 1);
      const auto dlist = pick_ds(cfg, ds, from, to);
      std::vector<std::unique_ptr<TamagawaWindow>> windows;
      for (const auto& f : forms) {
        if (f.curve()) windows.push_back(std::make_unique<TamagawaWindow>(f.curve()->cubic(), ProxyConfig{X_param, x, {}}.window_lo(), x));
        else windows.push_back(nullptr);
      }
      std::vector<DirichletPoly> polys;
      for (const auto& f : forms) polys.emplace_back(f, x);
      Emitter out(cfg, common.output);
      for (i64 d : dlist) {
        checked_d(d);
        for (std::size_t j = 0; j < forms.size(); ++j) {
          const double P = polys[j](d);
          json o = {{"P", P}};
          std::optional<double> C, sigma2;
          if (windows[j]) {
            C = (*windows[j])(d);
            const GaloisProfile gp = galois_profile(forms[j].curve()->cubic());
            sigma2 = gp.sigma2;
            o["C"] = *C;
            o["mu"] = gp.mu;
            o["sigma2"] = gp.sigma2;
            o["window"] = {windows[j]->lo(), windows[j]->hi()};
          }
          const double Pv[] = {P};
          const NormalizedStats ns = normalized_stats(Pv, X_param, C, sigma2);
          o["Q"] = ns.Q[0];
          if (ns.R1) o["R1"] = *ns.R1;
          if (ns.R2) o["R2"] = *ns.R2;
          out.emit("proxy", {{"form", forms[j].label()}, {"d", d}, {"X", X_param}, {"x", x}}, o);
        }
      }
    } else if (*zerosum) {
      common.overrides.insert(common.overrides.begin(), scan_sets.begin(), scan_sets.end());
      const RunConfig cfg = common.load();
      const double L = resolve_L(cfg.L_rule, X_param);
      const auto forms = forms_for(cfg, static_cast<u64>(std::exp(L)) + 1);
      std::vector<const Newform*> ptrs;
      for (const auto& f : forms) ptrs.push_back(&f);
      ZeroSumEngine engine(ptrs, fejer_kernel(L));
      Emitter out(cfg, common.output);
      const double floor = static_cast<double>(forms.size()) * engine.kernel().h0();
      for (i64 d : pick_ds(cfg, ds, from, to)) {
        const double z = engine.zero_sum(checked_d(d));
        out.emit("zerosum_d", {{"d", d}, {"L", L}},
                 {{"zero_sum", z}, {"archimedean", engine.archimedean_term(d)}, {"floor", floor},
                  {"below_floor", z < floor - 1e-6}});
      }
    } else if (*lvalue || *lprime) {
      const RunConfig cfg = common.load();
      const auto dlist = pick_ds(cfg, ds, from, to);
      u64 need = 1000;
      for (const auto& label : cfg.curves) {
        auto e = catalog_curve(label);
        if (!e) throw NotFound("unknown curve label '" + label + "'");
        for (i64 d : dlist) need = std::max(need, required_table_size(e->conductor(), d));
      }
      const auto forms = forms_for(cfg, need);
      Emitter out(cfg, common.output);
      for (const auto& f : forms) {
        u64 nmax_f = 1000;
        for (i64 d : dlist) nmax_f = std::max(nmax_f, required_table_size(f.level(), d));
        const CoefficientTable table(f, nmax_f);
        for (i64 d : dlist) {
          TwistedL L(table, checked_d(d), lopt);
          json in = {{"form", f.label()}, {"d", d}};
          if (*lvalue && !s_point.empty()) {
            const cplx s(s_point[0], s_point.size() > 1 ? s_point[1] : 0.0);
            const CompletedLValue v = L.complete_lambda(s);
            in["s"] = {s.real(), s.imag()};
            out.emit("lambda", in,
                     {{"re", v.value.real()}, {"im", v.value.imag()}, {"fe_residual", v.fe_residual},
                      {"doubling_change", v.doubling_change}, {"estimated_error", v.estimated_error},
                      {"truncation", v.truncation}});
          } else if (*lvalue) {
            const CentralValue v = L.central_value();
            out.emit("lvalue", in,
                     {{"root_number", L.root_number()}, {"value", v.value}, {"estimated_error", v.estimated_error},
                      {"undecided", v.undecided}});
          } else {
            if (L.root_number() != -1) {
              spdlog::debug("d = {}: root number +1, no forced central zero", d);
              continue;
            }
            const CentralDerivative c = L.central_derivative();
            json o = {{"lprime", c.lprime}, {"logabs", c.logabs}, {"fd_relative_error", c.fd_relative_error},
                      {"estimated_error", c.estimated_error}, {"undecided", c.undecided}};
            if (c.u) o["u"] = *c.u;
            if (!c.undecided && abs_d(d) >= 3) {
              const double x = std::sqrt(static_cast<double>(abs_d(d)));
              if (x >= 3 && static_cast<u64>(x) <= f.prime_limit())
                o["proxy_residual"] = lprime_proxy_residual(c.logabs, dirichlet_poly(f, d, x), x);
            }
            if (extended) o["lprime_extended"] = L.central_derivative_extended();
            out.emit("lprime", in, o);
          }
        }
      }
    } else if (*dist) {
      const RunConfig cfg = common.load();
      JointStatistic stat;
      if (stat_name == "u-vector") stat = JointStatistic::u_vector;
      else if (stat_name == "u-sha") stat = JointStatistic::u_sha;
      else if (stat_name == "rank-zero") stat = JointStatistic::rank_zero;
      else throw PreconditionError("unknown statistic '" + stat_name + "'");
      const auto dlist = pick_ds(cfg, ds, from, to);
      std::vector<i64> kept;
      for (i64 d : dlist)
        if (abs_d(d) >= 20) kept.push_back(d);
      u64 need = 1000;
      for (const auto& label : cfg.curves) {
        auto e = catalog_curve(label);
        if (!e) throw NotFound("unknown curve label '" + label + "'");
        for (i64 d : kept) need = std::max(need, required_table_size(e->conductor(), d));
      }
      const auto forms = forms_for(cfg, need);
      if (stat != JointStatistic::u_vector && forms.size() != 1)
        throw PreconditionError(stat_name + " is a statistic of one curve");
      std::optional<InvariantStore> store;
      if (stat != JointStatistic::u_vector) {
        InvariantSourceOptions so;
        if (!fixtures.empty()) so.fixtures = fixtures;
        so.offline = true;
        store.emplace(so);
      }
      std::optional<GaloisProfile> gp;
      if (stat != JointStatistic::u_vector) {
        if (!forms[0].curve()) throw PreconditionError("the Sha statistic needs a catalog curve");
        gp = galois_profile(forms[0].curve()->cubic());
      }
      std::vector<std::unique_ptr<CoefficientTable>> tables;
      for (const auto& f : forms) {
        u64 n = 1000;
        for (i64 d : kept) n = std::max(n, required_table_size(f.level(), d));
        tables.push_back(std::make_unique<CoefficientTable>(f, n));
      }
      std::vector<JointRow> rows;
      std::vector<ResultRecord> per_d;
      Emitter out(cfg, common.output);
      for (i64 d : kept) {
        JointRow row;
        row.d = d;
        json o = json::object();
        for (std::size_t j = 0; j < forms.size(); ++j) {
          TwistedL L(*tables[j], d);
          if (stat == JointStatistic::rank_zero) {
            const CentralValue v = L.central_value();
            if (v.undecided) row.undecided = true;
            else row.stat.push_back(central_value_statistic(v.value, d));
            if (!row.undecided) {
              const CurveInvariants inv = store->load(forms[j].label(), d);
              row.stat.push_back(s0_statistic(s0_proxy(L.root_number(), v.value, inv), d, gp->mu, gp->sigma2));
            }
            continue;
          }
          const CentralDerivative c = L.central_derivative();
          if (c.undecided || !c.u) {
            row.undecided = true;
            continue;
          }
          row.stat.push_back(*c.u);
          if (stat == JointStatistic::u_sha) {
            const CurveInvariants inv = store->load(forms[j].label(), d);
            row.stat.push_back(sha_statistic(sha_reg_proxy(c.lprime, inv), d, gp->mu, gp->sigma2));
          }
        }
        o["undecided"] = row.undecided;
        o["stat"] = row.stat;
        ResultRecord r;
        r.kind = "dist_row";
        r.inputs = {{"d", d}, {"statistic", stat_name}};
        r.outputs = o;
        r.config_hash = cfg.hash();
        r.version = code_version();
        per_d.push_back(r);
        rows.push_back(std::move(row));
      }
      std::optional<double> sigma_E;
      if (gp) sigma_E = std::sqrt(gp->sigma2);
      const double X = kept.empty() ? 0.0 : static_cast<double>(abs_d(kept.back()));
      const DistributionReport rep = joint_report(stat, rows, alpha, beta, sigma_E, X);
      json o = {{"empirical", rep.empirical}, {"target", rep.target}, {"constant", rep.constant},
                {"bound", rep.bound}, {"members", rep.members}, {"inside", rep.inside},
                {"undecided", rep.undecided}};
      if (mc_samples) {
        const double rho = sigma_E ? 1.0 / *sigma_E : 0.0;
        o["monte_carlo"] = mc_rectangle(alpha, beta, rho, mc_samples, cfg.seed);
      }
      out.emit("dist", {{"statistic", stat_name}, {"alpha", alpha}, {"beta", beta}, {"X", X}}, o);
      if (!csv_out.empty()) export_records(per_d, "csv", csv_out);
    } else if (*bsd) {
      const RunConfig cfg = common.load();
      InvariantSourceOptions so;
      if (!fixtures_dir.empty()) so.fixtures = fixtures_dir;
      if (!remote_url.empty()) so.remote = remote_url;
      if (!cache_dir.empty()) so.cache_dir = cache_dir;
      so.refresh = refresh;
      so.offline = offline;
      InvariantStore store(so);
      const auto dlist = pick_ds(cfg, ds, from, to);
      Emitter out(cfg, common.output);
      for (const auto& label : cfg.curves) {
        auto e = catalog_curve(label);
        if (!e) throw NotFound("unknown curve label '" + label + "'");
        u64 need = 1000;
        for (i64 d : dlist) need = std::max(need, required_table_size(e->conductor(), d));
        const Newform f = catalog_form(label, need, std::max(1u, cfg.workers));
        const CoefficientTable table(f, need);
        for (i64 d : dlist) {
          CurveInvariants inv;
          try {
            inv = store.load(label, d);
          } catch (const NotFound&) {
            if (!allow_computed) throw;
            inv = computed_invariants(*e, d);
          }
          json o = to_json(inv);
          TwistedL L(table, d);
          o["root_number"] = L.root_number();
          const auto missing = inv.missing_for_proxy();
          if (!missing.empty()) {
            o["missing"] = missing;
          } else if (L.root_number() == -1) {
            const CentralDerivative c = L.central_derivative();
            o["lprime"] = c.lprime;
            if (!c.undecided) o["sha_reg_proxy"] = sha_reg_proxy(c.lprime, inv);
            if (inv.regulator && !c.undecided) o["sha_proxy"] = sha_reg_proxy(c.lprime, inv) / *inv.regulator;
          } else {
            const CentralValue v = L.central_value();
            o["lcentral"] = v.value;
            if (!v.undecided) o["s0_proxy"] = s0_proxy(1, v.value, inv);
          }
          out.emit("bsd", {{"curve", label}, {"d", d}}, o);
        }
      }
    } else if (*report) {
      std::vector<ResultRecord> all;
      for (const auto& p : inputs)
        for (auto& r : read_jsonl(p))
          if (kind_filter.empty() || r.kind == kind_filter) all.push_back(std::move(r));
      export_records(all, format, report_out);
    }
  } catch (const GateFailure& e) {
    spdlog::error("gate failed: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
