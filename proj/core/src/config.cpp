#include "qtwist/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "qtwist/errors.hpp"
#include "qtwist/proxy.hpp"

namespace qtwist {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) out.push_back(trim(item));
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': not a number: '" + v + "'");
  }
}

i64 parse_int(const std::string& key, const std::string& v) {
  i64 x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ParseError("config key '" + key + "': not an integer: '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("config key '" + key + "': not a boolean: '" + v + "'");
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + f(xs[i]);
  return s;
}

void set_key(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "kind") c.kind = v;
  else if (key == "curves") c.curves = split_list(v);
  else if (key == "form_files") {
    c.form_files.clear();
    for (auto& s : split_list(v)) c.form_files.emplace_back(s);
  } else if (key == "all_pairs") c.all_pairs = parse_bool(key, v);
  else if (key == "kappa") c.kappa = static_cast<int>(parse_int(key, v));
  else if (key == "a") c.a = parse_int(key, v);
  else if (key == "sign") c.sign = static_cast<int>(parse_int(key, v));
  else if (key == "X_grid") {
    c.X_grid.clear();
    for (auto& s : split_list(v)) c.X_grid.push_back(parse_double(key, s));
  } else if (key == "x_rule") c.x_rule = v;
  else if (key == "L_rule") c.L_rule = v;
  else if (key == "zero_sums") c.zero_sums = parse_bool(key, v);
  else if (key == "kmax") c.kmax = static_cast<int>(parse_int(key, v));
  else if (key == "n_values") {
    c.n_values.clear();
    for (auto& s : split_list(v)) c.n_values.push_back(static_cast<u64>(parse_int(key, s)));
  } else if (key == "v") c.v = static_cast<u64>(parse_int(key, v));
  else if (key == "eps") c.eps = parse_double(key, v);
  else if (key == "seed") c.seed = static_cast<u64>(parse_int(key, v));
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "precision") c.precision = v;
  else if (key == "workers") c.workers = static_cast<unsigned>(parse_int(key, v));
  else if (key == "chunk") c.chunk = static_cast<u64>(parse_int(key, v));
  else throw ParseError("unknown config key '" + key + "'");
}

}  // namespace

std::string RunConfig::to_text(bool runtime) const {
  std::ostringstream os;
  os << "kind = " << kind << '\n';
  os << "curves = " << join(curves, [](const std::string& s) { return s; }) << '\n';
  os << "form_files = " << join(form_files, [](const std::filesystem::path& p) { return p.string(); }) << '\n';
  os << "all_pairs = " << (all_pairs ? "true" : "false") << '\n';
  os << "kappa = " << kappa << '\n';
  os << "a = " << a << '\n';
  os << "sign = " << sign << '\n';
  os << "X_grid = " << join(X_grid, fmt_double) << '\n';
  os << "x_rule = " << x_rule << '\n';
  os << "L_rule = " << L_rule << '\n';
  os << "zero_sums = " << (zero_sums ? "true" : "false") << '\n';
  os << "kmax = " << kmax << '\n';
  os << "n_values = " << join(n_values, [](u64 n) { return std::to_string(n); }) << '\n';
  os << "v = " << v << '\n';
  os << "eps = " << fmt_double(eps) << '\n';
  os << "seed = " << seed << '\n';
  os << "precision = " << precision << '\n';
  os << "chunk = " << chunk << '\n';
  if (runtime) {
    os << "output_dir = " << output_dir << '\n';
    os << "workers = " << workers << '\n';
  }
  return os.str();
}

std::string RunConfig::hash() const { return sha256_hex(to_text(false)); }

void RunConfig::validate() const {
  if (kind != "moments" && kind != "charsum" && kind != "zerosum") throw PreconditionError("unknown scan kind '" + kind + "'");
  // a character-sum scan may run over the bare N0 = 8 family
  if (kind != "charsum" && curves.empty() && form_files.empty()) throw PreconditionError("config selects no forms");
  if (kappa != 1 && kappa != -1) throw PreconditionError("kappa must be +1 or -1");
  if (sign < -1 || sign > 1) throw PreconditionError("sign must be -1, 0 or 1");
  for (double X : X_grid)
    if (!(X >= 100)) throw PreconditionError("X grid values must be >= 100");
  if (kmax < 0 || kmax > 8) throw PreconditionError("kmax must lie in [0, 8]");
  if (precision != "double" && precision != "extended") throw PreconditionError("precision must be double or extended");
  if (chunk == 0) throw PreconditionError("chunk must be positive");
  if (v == 0 || !is_squarefree(v)) throw PreconditionError("v must be squarefree and positive");
  resolve_x(x_rule, 1e6);
  resolve_L(L_rule, 1e6);
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      set_key(c, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ParseError("override must be key=value: '" + std::string(assignment) + "'");
  set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

double resolve_x(const std::string& rule, double X) {
  if (rule == "default") return default_x(X);
  if (rule == "sqrt") return std::sqrt(X);
  if (rule == "cbrt") return std::cbrt(X);
  if (rule.rfind("fixed:", 0) == 0) return parse_double("x_rule", rule.substr(6));
  throw ParseError("unknown x rule '" + rule + "'");
}

double resolve_L(const std::string& rule, double X) {
  if (rule == "logX") return std::log(X);
  if (rule.rfind("fixed:", 0) == 0) return parse_double("L_rule", rule.substr(6));
  throw ParseError("unknown L rule '" + rule + "'");
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

}  // namespace qtwist
