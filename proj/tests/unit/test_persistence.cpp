#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qtwist/config.hpp"
#include "qtwist/errors.hpp"
#include "qtwist/records.hpp"
#include "qtwist/scan.hpp"

using namespace qtwist;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qtwist-persist-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig small_moments(const fs::path& dir) {
  RunConfig c;
  c.kind = "moments";
  c.curves = {"37a1", "53a1"};
  c.X_grid = {2e3, 5e3};
  c.zero_sums = true;
  c.kmax = 3;
  c.chunk = 1500;
  c.output_dir = dir.string();
  return c;
}

std::vector<ResultRecord> strip(const std::vector<ResultRecord>& rs) {
  std::vector<ResultRecord> out;
  for (const auto& r : rs) out.push_back(r.without_time());
  return out;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string s; std::getline(in, s);) out.push_back(s);
  return out;
}

void write_lines(const fs::path& p, const std::vector<std::string>& ls) {
  std::ofstream out(p, std::ios::trunc);
  for (const auto& s : ls) out << s << '\n';
}

}  // namespace

TEST_CASE("config text round trip and hash") {
  RunConfig c;
  c.kind = "charsum";
  c.curves = {"11a1", "389a1"};
  c.X_grid = {1e4, 3.5e5};
  c.x_rule = "fixed:250";
  c.n_values = {1, 9, 49};
  c.v = 15;
  c.eps = 0.125;
  c.workers = 3;
  c.output_dir = "/tmp/elsewhere";
  const RunConfig back = parse_config(c.to_text());
  CHECK(back == c);
  CHECK(back.hash() == c.hash());
  CHECK(c.hash().size() == 64);
  // runtime keys do not enter the hash
  RunConfig d = c;
  d.workers = 8;
  d.output_dir = "x";
  CHECK(d.hash() == c.hash());
  d.seed = 2;
  CHECK(d.hash() != c.hash());
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing: comments, overrides, errors") {
  const RunConfig c = parse_config("# a comment\n\nkind = zerosum\n  kmax = 2  \nX_grid = 1e4, 2e4\n");
  CHECK(c.kind == "zerosum");
  CHECK(c.kmax == 2);
  CHECK(c.X_grid == std::vector<double>{1e4, 2e4});
  RunConfig o = c;
  apply_override(o, "sign=1");
  CHECK(o.sign == 1);
  CHECK_THROWS_AS(apply_override(o, "sign"), ParseError);
  CHECK_THROWS_AS(parse_config("colour = red\n"), ParseError);
  try {
    parse_config("kind = moments\nkmax = four\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("kmax") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/qtwist.conf"), Error);
  RunConfig bad;
  bad.kmax = 9;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = RunConfig{};
  bad.v = 12;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = RunConfig{};
  bad.kind = "nonsense";
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

TEST_CASE("x and L rules") {
  CHECK(resolve_x("sqrt", 1e6) == doctest::Approx(1e3));
  CHECK(resolve_x("cbrt", 1e6) == doctest::Approx(1e2));
  CHECK(resolve_x("fixed:77", 1e6) == 77);
  CHECK(resolve_L("logX", 1e4) == doctest::Approx(std::log(1e4)));
  CHECK(resolve_L("fixed:3.5", 1e9) == 3.5);
  CHECK_THROWS_AS(resolve_x("quartic", 1e6), ParseError);
  CHECK_THROWS_AS(resolve_L("none", 1e6), ParseError);
}

TEST_CASE("JSONL and CSV round trips") {
  const fs::path dir = scratch("records");
  std::vector<ResultRecord> rs;
  for (int i = 0; i < 3; ++i) {
    ResultRecord r;
    r.kind = "moment";
    r.inputs = {{"X", 1e4 * (i + 1)}, {"form", "37a1"}, {"k", i}};
    r.outputs = {{"lhs", 0.1 + i / 3.0}, {"ratio", 1.0 / 7}};
    r.config_hash = std::string(64, 'a');
    r.timestamp = utc_timestamp();
    r.version = code_version();
    rs.push_back(r);
  }
  {
    JsonlWriter w(dir / "sub" / "out.jsonl");
    for (const auto& r : rs) w.write(r);
  }
  CHECK(read_jsonl(dir / "sub" / "out.jsonl") == rs);
  // append keeps earlier records
  {
    JsonlWriter w(dir / "sub" / "out.jsonl");
    w.write(rs[0]);
  }
  CHECK(read_jsonl(dir / "sub" / "out.jsonl").size() == 4);

  std::ostringstream csv;
  write_csv(rs, csv);
  std::istringstream in(csv.str());
  const auto back = read_csv(in);
  REQUIRE(back.size() == rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK(back[i].kind == rs[i].kind);
    CHECK(back[i].inputs == rs[i].inputs);
    CHECK(back[i].config_hash == rs[i].config_hash);
    CHECK(back[i].timestamp == rs[i].timestamp);
    // 12 significant digits
    CHECK(back[i].outputs.at("lhs").get<double>() == doctest::Approx(rs[i].outputs.at("lhs").get<double>()).epsilon(1e-11));
  }
  CHECK(format12(1.0 / 3) == "0.333333333333");

  std::ostringstream empty;
  write_csv({}, empty);
  std::istringstream ein(empty.str());
  CHECK(read_csv(ein).empty());
  std::istringstream nohead("");
  CHECK_THROWS_AS(read_csv(nohead), ParseError);

  export_records(rs, "csv", dir / "out.csv");
  export_records(rs, "jsonl", dir / "out2.jsonl");
  CHECK(read_jsonl(dir / "out2.jsonl") == rs);
  CHECK_THROWS_AS(export_records(rs, "parquet", dir / "out.pq"), PreconditionError);

  std::istringstream broken("{\"kind\":\"x\"}\n");
  CHECK_THROWS_AS(read_jsonl(broken), ParseError);
  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(read_jsonl(garbage), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("an empty X grid is a complete scan with no records") {
  RunConfig c = small_moments(scratch("empty"));
  c.X_grid.clear();
  const ScanOutcome o = run_scan(c);
  CHECK(o.complete);
  CHECK(o.records.empty());
  CHECK(o.chunks_total == 0);
}

TEST_CASE("scans are reproducible across reruns and worker counts") {
  const fs::path dir = scratch("determinism");
  RunConfig c = small_moments(dir);
  ScanOptions fresh;
  fresh.resume = false;
  const ScanOutcome a = run_scan(c, fresh);
  REQUIRE(a.complete);
  CHECK(a.chunks_computed == a.chunks_total);
  CHECK(a.chunks_total > 4);
  const ScanOutcome b = run_scan(c, fresh);
  CHECK(strip(a.records) == strip(b.records));
  for (unsigned w : {2u, 4u}) {
    c.workers = w;
    const ScanOutcome p = run_scan(c, fresh);
    CHECK(strip(p.records) == strip(a.records));
  }
  // all records carry the configuration hash
  for (const auto& r : a.records) CHECK(r.config_hash == c.hash());
  // resuming a finished checkpoint computes nothing
  const ScanOutcome again = run_scan(c);
  CHECK(again.chunks_computed == 0);
  CHECK(again.chunks_resumed == again.chunks_total);
  CHECK(strip(again.records) == strip(a.records));
  fs::remove_all(dir);
}

TEST_CASE("interrupted scans resume to the uninterrupted result") {
  const fs::path dir = scratch("resume");
  RunConfig c = small_moments(dir);
  ScanOptions fresh;
  fresh.resume = false;
  fresh.checkpoint = dir / "fresh.ckpt";
  const ScanOutcome full = run_scan(c, fresh);
  REQUIRE(full.complete);

  ScanOptions part;
  part.checkpoint = dir / "part.ckpt";
  part.stop_after_chunks = 3;
  const ScanOutcome first = run_scan(c, part);
  CHECK_FALSE(first.complete);
  CHECK(first.records.empty());
  CHECK(first.chunks_computed == 3);
  part.stop_after_chunks = 2;
  c.workers = 3;
  const ScanOutcome second = run_scan(c, part);
  CHECK_FALSE(second.complete);
  CHECK(second.chunks_resumed == 3);
  part.stop_after_chunks.reset();
  std::vector<ResultRecord> sunk;
  part.sink = [&](const ResultRecord& r) { sunk.push_back(r); };
  const ScanOutcome last = run_scan(c, part);
  REQUIRE(last.complete);
  CHECK(last.chunks_resumed == 5);
  CHECK(last.chunks_resumed + last.chunks_computed == full.chunks_total);
  CHECK(strip(last.records) == strip(full.records));
  CHECK(sunk == last.records);
  fs::remove_all(dir);
}

TEST_CASE("damaged checkpoint entries are rejected and recomputed") {
  const fs::path dir = scratch("corrupt");
  RunConfig c = small_moments(dir);
  ScanOptions opt;
  opt.checkpoint = dir / "c.ckpt";
  const ScanOutcome full = run_scan(c, opt);
  REQUIRE(full.complete);
  auto ls = lines_of(*opt.checkpoint);
  REQUIRE(ls.size() == full.chunks_total + 1);
  // flip a digit inside the data of one entry, keep its checksum
  std::string& victim = ls[2];
  const auto at = victim.find("0x1.");
  REQUIRE(at != std::string::npos);
  victim[at + 4] = victim[at + 4] == '0' ? '1' : '0';
  ls[3] = "{\"level\": 0, \"chun";  // torn JSON
  write_lines(*opt.checkpoint, ls);
  {
    std::ofstream app(*opt.checkpoint, std::ios::app);
    app << "{\"level\":1";  // torn final line, no newline
  }
  const ScanOutcome redo = run_scan(c, opt);
  REQUIRE(redo.complete);
  CHECK(redo.chunks_rejected == 3);
  CHECK(redo.chunks_computed == 2);
  CHECK(strip(redo.records) == strip(full.records));
  // the rewritten checkpoint is clean again
  const ScanOutcome clean = run_scan(c, opt);
  CHECK(clean.chunks_rejected == 0);
  CHECK(clean.chunks_computed == 0);
  fs::remove_all(dir);
}

TEST_CASE("a checkpoint from another configuration is refused") {
  const fs::path dir = scratch("mismatch");
  RunConfig c = small_moments(dir);
  ScanOptions opt;
  opt.checkpoint = dir / "c.ckpt";
  opt.stop_after_chunks = 1;
  run_scan(c, opt);
  RunConfig other = c;
  other.kmax = 2;
  CHECK_THROWS_AS(run_scan(other, opt), Error);
  // without resume it starts over
  opt.resume = false;
  opt.stop_after_chunks.reset();
  CHECK(run_scan(other, opt).complete);
  fs::remove_all(dir);
}

TEST_CASE("charsum and zerosum scans produce their record kinds") {
  const fs::path dir = scratch("kinds");
  RunConfig c = small_moments(dir);
  c.kind = "charsum";
  c.curves.clear();
  c.X_grid = {2e4};
  c.n_values = {1, 9, 7};
  const ScanOutcome cs = run_scan(c);
  REQUIRE(cs.complete);
  REQUIRE(cs.records.size() == 4);
  CHECK(cs.records[0].kind == "family");
  CHECK(cs.records[1].kind == "charsum");
  CHECK(cs.records[1].outputs.at("ratio").get<double>() == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::abs(cs.records[3].outputs.at("lhs").get<double>()) < 0.2 * cs.records[1].outputs.at("lhs").get<double>());

  c.kind = "zerosum";
  c.curves = {"37a1"};
  c.n_values = {1};
  const ScanOutcome zs = run_scan(c);
  REQUIRE(zs.complete);
  CHECK(zs.records[1].kind == "zerosum");
  CHECK(zs.records[0].outputs.at("min_zero_sum").get<double>() >= zs.records[0].outputs.at("floor").get<double>() - 1e-8);
  c.n_values = {37};
  CHECK_THROWS_AS(run_scan(c), PreconditionError);
  fs::remove_all(dir);
}
