#include "qtwist/scan.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <memory>

#include <spdlog/spdlog.h>

#include "qtwist/charsum.hpp"
#include "qtwist/errors.hpp"
#include "qtwist/explicit_formula.hpp"
#include "qtwist/family.hpp"
#include "qtwist/moments.hpp"
#include "qtwist/newform.hpp"
#include "qtwist/numerics.hpp"
#include "qtwist/proxy.hpp"

namespace qtwist {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hexfloat(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double from_hex(const json& j) {
  if (!j.is_string()) throw ParseError("checkpoint: expected a hex float string");
  const std::string s = j.get<std::string>();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ParseError("checkpoint: bad hex float '" + s + "'");
  return v;
}

// Exact partial state of one chunk.
struct Partial {
  std::vector<NeumaierSum> sums;
  u64 count = 0;
  double min_z = std::numeric_limits<double>::infinity();
  i64 argmin = 0;

  json to_json() const {
    json s = json::array();
    for (const auto& x : sums) s.push_back({hexfloat(x.running()), hexfloat(x.compensation())});
    return {{"n", count}, {"s", s}, {"minz", hexfloat(min_z)}, {"argmin", argmin}};
  }
  static Partial from_json(const json& j, std::size_t width) {
    Partial p;
    p.count = j.at("n").get<u64>();
    const auto& s = j.at("s");
    if (!s.is_array() || s.size() != width) throw ParseError("checkpoint: partial has the wrong width");
    for (const auto& pair : s) p.sums.push_back(NeumaierSum::restore(from_hex(pair.at(0)), from_hex(pair.at(1))));
    p.min_z = from_hex(j.at("minz"));
    p.argmin = j.at("argmin").get<i64>();
    return p;
  }
};

struct Level {
  double X = 0;
  double x = 0;
  double L = 0;
  std::vector<std::pair<double, double>> chunks;
  std::vector<DirichletPoly> polys;
  std::unique_ptr<ZeroSumEngine> engine;
};

struct Plan {
  const RunConfig* cfg = nullptr;
  std::vector<Newform> forms;
  std::optional<TwistFamily> family;
  std::vector<Level> levels;
  std::size_t width = 0;
  bool moments() const { return cfg->kind == "moments"; }
  bool zeros() const { return cfg->kind == "zerosum" || (moments() && cfg->zero_sums); }
};

std::vector<Newform> load_forms(const RunConfig& cfg, u64 limit) {
  std::vector<Newform> forms;
  for (const auto& label : cfg.curves) forms.push_back(catalog_form(label, limit, 1));
  for (const auto& path : cfg.form_files) {
    Newform f = Newform::read(path);
    if (f.prime_limit() < limit) throw MissingCoefficient(limit, f.prime_limit());
    forms.push_back(std::move(f));
  }
  return forms;
}

Plan make_plan(const RunConfig& cfg) {
  cfg.validate();
  Plan plan;
  plan.cfg = &cfg;
  u64 limit = 1000;
  for (double X : cfg.X_grid) {
    if (plan.moments()) limit = std::max<u64>(limit, static_cast<u64>(std::floor(resolve_x(cfg.x_rule, X))));
    if (plan.zeros()) limit = std::max<u64>(limit, static_cast<u64>(std::floor(std::exp(resolve_L(cfg.L_rule, X)))));
  }
  plan.forms = load_forms(cfg, limit);
  std::vector<FormSignature> sig;
  for (const auto& f : plan.forms) sig.push_back(FormSignature::of(f));
  if (cfg.all_pairs) {
    if (cfg.sign == 0) throw PreconditionError("all_pairs needs a required sign of +1 or -1");
    plan.family = TwistFamily::all_classes(sig, cfg.sign);
  } else {
    plan.family = TwistFamily::single(sig, cfg.kappa, cfg.a, cfg.sign == 0 ? std::nullopt : std::optional<int>(cfg.sign));
  }
  const std::size_t M = plan.forms.size();
  const std::size_t K = static_cast<std::size_t>(cfg.kmax) + 1;
  if (plan.moments()) plan.width = M * K * (plan.zeros() ? 2 : 1);
  else plan.width = cfg.n_values.size();
  for (u64 n : cfg.n_values) {
    if (plan.moments()) break;
    if (std::gcd(n, static_cast<u64>(plan.family->n0()) * cfg.v) != 1)
      throw PreconditionError("n = " + std::to_string(n) + " must be coprime to N0 v");
  }
  std::vector<const Newform*> ptrs;
  for (const auto& f : plan.forms) ptrs.push_back(&f);
  for (double X : cfg.X_grid) {
    Level lv;
    lv.X = X;
    lv.chunks = chunk_ranges(SmoothCutoff::support_lo * X, SmoothCutoff::support_hi * X, cfg.chunk);
    if (plan.moments()) {
      lv.x = resolve_x(cfg.x_rule, X);
      for (const auto& f : plan.forms) lv.polys.emplace_back(f, lv.x, plan.family->n0());
    }
    if (plan.zeros()) {
      lv.L = resolve_L(cfg.L_rule, X);
      lv.engine = std::make_unique<ZeroSumEngine>(ptrs, fejer_kernel(lv.L));
    }
    plan.levels.push_back(std::move(lv));
  }
  return plan;
}

Partial compute_chunk(const Plan& plan, const Level& lv, std::size_t ci) {
  const RunConfig& cfg = *plan.cfg;
  const auto& phi = default_cutoff();
  Partial part;
  part.sums.resize(plan.width);
  const std::size_t M = plan.forms.size();
  const std::size_t K = static_cast<std::size_t>(cfg.kmax) + 1;
  std::vector<double> powers(K);
  for (i64 d : plan.family->enumerate(lv.chunks[ci].first, lv.chunks[ci].second)) {
    const double w = phi(std::abs(static_cast<double>(d)) / lv.X);
    if (w == 0.0) continue;
    if (!plan.moments() && static_cast<u64>(d < 0 ? -d : d) % cfg.v != 0) continue;
    ++part.count;
    double z = 0;
    if (lv.engine) {
      z = lv.engine->zero_sum(d);
      if (z < part.min_z) {
        part.min_z = z;
        part.argmin = d;
      }
    }
    if (plan.moments()) {
      for (std::size_t j = 0; j < M; ++j) {
        const double P = lv.polys[j](d);
        double pw = w;
        for (std::size_t k = 0; k < K; ++k, pw *= P) {
          part.sums[j * K + k].add(pw);
          if (lv.engine) part.sums[M * K + j * K + k].add(pw * z);
        }
      }
    } else {
      for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
        const int chi = kronecker(d, cfg.n_values[i]);
        if (chi == 0) continue;
        part.sums[i].add(lv.engine ? z * chi * w : chi * w);
      }
    }
  }
  return part;
}

ResultRecord make_record(const Plan& plan, std::string kind, json inputs, json outputs) {
  ResultRecord r;
  r.kind = std::move(kind);
  r.inputs = std::move(inputs);
  r.outputs = std::move(outputs);
  r.config_hash = plan.cfg->hash();
  r.timestamp = utc_timestamp();
  r.version = code_version();
  return r;
}

std::vector<ResultRecord> level_records(const Plan& plan, const Level& lv, const std::vector<Partial>& parts) {
  const RunConfig& cfg = *plan.cfg;
  const TwistFamily& fam = *plan.family;
  std::vector<NeumaierSum> total(plan.width);
  Partial agg;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < plan.width; ++i) total[i] += p.sums[i];
    agg.count += p.count;
    if (p.min_z < agg.min_z) {
      agg.min_z = p.min_z;
      agg.argmin = p.argmin;
    }
  }
  std::vector<ResultRecord> out;
  json fam_out = {{"members", agg.count}, {"classes", fam.classes().size()}, {"n0", fam.n0()}};
  if (lv.engine) {
    fam_out["min_zero_sum"] = agg.min_z;
    fam_out["argmin_d"] = agg.argmin;
    fam_out["floor"] = static_cast<double>(plan.forms.size()) * lv.engine->kernel().h0();
  }
  json base_in = {{"X", lv.X}};
  if (plan.moments()) base_in["x"] = lv.x;
  if (lv.engine) base_in["L"] = lv.L;
  out.push_back(make_record(plan, "family", base_in, fam_out));

  if (plan.moments()) {
    const std::size_t M = plan.forms.size();
    const std::size_t K = static_cast<std::size_t>(cfg.kmax) + 1;
    const double V = std::log(std::log(lv.X));
    const double Vx = std::log(std::log(lv.x));
    for (std::size_t j = 0; j < M; ++j) {
      const double W = total[j * K].value();
      for (std::size_t k = 1; k < K; ++k) {
        const double lhs = total[j * K + k].value();
        const double Mk = gaussian_moment(static_cast<int>(k));
        const double scale = W * std::pow(V, k / 2.0);
        json in = base_in;
        in["form"] = plan.forms[j].label();
        in["k"] = k;
        json o = {{"lhs", lhs}, {"weight_sum", W}, {"predicted", scale * Mk}, {"normalized", lhs / scale}};
        if (Mk != 0) {
          o["ratio"] = lhs / (scale * Mk);
          o["ratio_x"] = lhs / (W * std::pow(Vx, k / 2.0) * Mk);
        }
        out.push_back(make_record(plan, "moment", in, o));
      }
      if (lv.engine) {
        AggregateResult ag;
        ag.S = total[M * K + j * K].value();
        finish_aggregate(ag, 1, 1, fam, lv.X, *lv.engine);
        const double zscale = ag.predicted;
        for (std::size_t k = 0; k < K; ++k) {
          const double lhs = total[M * K + j * K + k].value();
          const double Mk = gaussian_moment(static_cast<int>(k));
          const double scale = zscale * std::pow(V, k / 2.0);
          json in = base_in;
          in["form"] = plan.forms[j].label();
          in["k"] = k;
          json o = {{"lhs", lhs}, {"predicted", scale * Mk}, {"normalized", lhs / scale}};
          if (Mk != 0) o["ratio"] = lhs / (scale * Mk);
          out.push_back(make_record(plan, "moment_zero", in, o));
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
      const u64 n = cfg.n_values[i];
      json in = base_in;
      in["n"] = n;
      in["v"] = cfg.v;
      const double lhs = total[i].value();
      if (lv.engine) {
        AggregateResult ag;
        ag.S = lhs;
        ag.members = agg.count;
        finish_aggregate(ag, n, cfg.v, fam, lv.X, *lv.engine);
        out.push_back(make_record(plan, "zerosum", in,
                                  {{"S", ag.S}, {"predicted", ag.predicted}, {"ratio", ag.ratio},
                                   {"regime", ag.regime}, {"normalized", ag.normalized}}));
      } else {
        const double main = main_term(n, cfg.v, fam.n0(), lv.X) * static_cast<double>(fam.classes().size());
        json o = {{"lhs", lhs}, {"main", main}, {"error", lhs - main}};
        o["ratio"] = main != 0 ? lhs / main : 0.0;
        out.push_back(make_record(plan, "charsum", in, o));
      }
    }
  }
  return out;
}

using Key = std::pair<std::size_t, std::size_t>;  // (level, chunk)

json checkpoint_entry(std::size_t level, std::size_t chunk, const Partial& p) {
  json data = p.to_json();
  return {{"level", level}, {"chunk", chunk}, {"data", data}, {"sha256", sha256_hex(data.dump())}};
}

// Reads the valid entries; rejected ones are counted and recomputed.
std::map<Key, Partial> read_checkpoint(const fs::path& path, const Plan& plan, u64& rejected) {
  std::map<Key, Partial> done;
  std::ifstream in(path, std::ios::binary);
  if (!in) return done;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) {
      // a torn final line from an interrupted write
      ++rejected;
      break;
    }
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      ++rejected;
      continue;
    }
    if (header) {
      header = false;
      if (!j.contains("config_hash") || j.at("config_hash") != plan.cfg->hash())
        throw Error("checkpoint " + path.string() + " belongs to a different configuration");
      continue;
    }
    try {
      const json& data = j.at("data");
      if (sha256_hex(data.dump()) != j.at("sha256").get<std::string>()) {
        spdlog::warn("checkpoint entry level={} chunk={} fails its checksum; recomputing", j.value("level", -1),
                     j.value("chunk", -1));
        ++rejected;
        continue;
      }
      const Key key{j.at("level").get<std::size_t>(), j.at("chunk").get<std::size_t>()};
      if (key.first >= plan.levels.size() || key.second >= plan.levels[key.first].chunks.size()) {
        ++rejected;
        continue;
      }
      done.emplace(key, Partial::from_json(data, plan.width));
    } catch (const json::exception&) {
      ++rejected;
    }
  }
  return done;
}

void rewrite_checkpoint(const fs::path& path, const Plan& plan, const std::map<Key, Partial>& done) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << json{{"config_hash", plan.cfg->hash()}}.dump() << '\n';
    for (const auto& [key, p] : done) out << checkpoint_entry(key.first, key.second, p).dump() << '\n';
  }
  fs::rename(tmp, path);
}

}  // namespace

ScanOutcome run_scan(const RunConfig& cfg, const ScanOptions& opt) {
  ScanOutcome outcome;
  if (cfg.X_grid.empty()) {
    outcome.complete = true;
    return outcome;
  }
  const Plan plan = make_plan(cfg);
  outcome.checkpoint = opt.checkpoint ? *opt.checkpoint : fs::path(cfg.output_dir) / (cfg.hash() + ".ckpt.jsonl");
  if (outcome.checkpoint.has_parent_path()) fs::create_directories(outcome.checkpoint.parent_path());

  std::map<Key, Partial> done;
  if (opt.resume) done = read_checkpoint(outcome.checkpoint, plan, outcome.chunks_rejected);
  outcome.chunks_resumed = done.size();
  rewrite_checkpoint(outcome.checkpoint, plan, done);
  std::ofstream ckpt(outcome.checkpoint, std::ios::binary | std::ios::app);
  if (!ckpt) throw Error("cannot append to " + outcome.checkpoint.string());

  const unsigned workers = std::max(1u, cfg.workers);
  for (std::size_t li = 0; li < plan.levels.size(); ++li) {
    const Level& lv = plan.levels[li];
    outcome.chunks_total += lv.chunks.size();
    std::vector<std::size_t> pending;
    for (std::size_t ci = 0; ci < lv.chunks.size(); ++ci)
      if (!done.count({li, ci})) pending.push_back(ci);
    const std::size_t batch = 2 * static_cast<std::size_t>(workers);
    for (std::size_t b = 0; b < pending.size(); b += batch) {
      std::size_t n = std::min(batch, pending.size() - b);
      if (opt.stop_after_chunks) {
        const u64 room = *opt.stop_after_chunks - std::min(*opt.stop_after_chunks, outcome.chunks_computed);
        n = std::min<std::size_t>(n, room);
        if (n == 0) return outcome;
      }
      auto parts = ordered_parallel_map<Partial>(n, workers, [&](std::size_t i) {
        return compute_chunk(plan, lv, pending[b + i]);
      });
      for (std::size_t i = 0; i < n; ++i) {
        ckpt << checkpoint_entry(li, pending[b + i], parts[i]).dump() << '\n';
        done.emplace(Key{li, pending[b + i]}, std::move(parts[i]));
      }
      ckpt.flush();
      if (!ckpt) throw Error("write to " + outcome.checkpoint.string() + " failed");
      outcome.chunks_computed += n;
    }
  }

  for (std::size_t li = 0; li < plan.levels.size(); ++li) {
    std::vector<Partial> parts;
    for (std::size_t ci = 0; ci < plan.levels[li].chunks.size(); ++ci) parts.push_back(done.at({li, ci}));
    for (auto& r : level_records(plan, plan.levels[li], parts)) {
      if (opt.sink) opt.sink(r);
      outcome.records.push_back(std::move(r));
    }
  }
  outcome.complete = true;
  return outcome;
}

}  // namespace qtwist
