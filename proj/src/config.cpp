#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <variant>

#include "aisopt/experiment.hpp"

// Config grammar: flat INI-style sections of `key = value` lines.
//   value := number | true | false | string | "quoted string"
//          | [v, v, ...] | [[v, ...], [v, ...]]
// `#` starts a comment. Unknown sections/keys and duplicate keys are
// rejected (fail-closed); errors carry line/column.

namespace aisopt {

namespace {

struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<double>, Matrix> v;
  int line = 0;
};

struct RawConfig {
  // section -> key -> value
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
  std::string origin;
};

[[noreturn]] void fail(const std::string& origin, int line, int col, const std::string& what) {
  std::ostringstream msg;
  msg << origin << ":" << line << ":" << col << ": " << what;
  throw std::runtime_error(msg.str());
}

size_t skip_ws(const std::string& s, size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return i;
}

bool parse_number(const std::string& tok, double* out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) return false;
  *out = v;
  return true;
}

// Parses a scalar or (possibly nested) bracket array starting at s[i].
ConfigValue parse_value(const std::string& s, size_t& i, const std::string& origin, int line) {
  i = skip_ws(s, i);
  if (i >= s.size()) fail(origin, line, int(i) + 1, "missing value");
  if (s[i] == '[') {
    ++i;
    std::vector<double> flat;
    std::vector<std::vector<double>> rows;
    bool nested = false;
    while (true) {
      i = skip_ws(s, i);
      if (i >= s.size()) fail(origin, line, int(i) + 1, "unterminated array");
      if (s[i] == ']') {
        ++i;
        break;
      }
      if (s[i] == ',') {
        ++i;
        continue;
      }
      ConfigValue inner = parse_value(s, i, origin, line);
      if (std::holds_alternative<std::vector<double>>(inner.v)) {
        nested = true;
        rows.push_back(std::get<std::vector<double>>(inner.v));
      } else if (std::holds_alternative<double>(inner.v)) {
        flat.push_back(std::get<double>(inner.v));
      } else {
        fail(origin, line, int(i) + 1, "arrays may contain only numbers");
      }
    }
    ConfigValue out;
    out.line = line;
    if (nested) {
      if (!flat.empty()) fail(origin, line, int(i) + 1, "mixed nested/flat array");
      size_t cols = rows.empty() ? 0 : rows[0].size();
      Matrix M(rows.size(), cols);
      for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) fail(origin, line, int(i) + 1, "ragged array rows");
        for (size_t c = 0; c < cols; ++c) M(r, c) = rows[r][c];
      }
      out.v = M;
    } else {
      out.v = flat;
    }
    return out;
  }
  if (s[i] == '"') {
    size_t end = s.find('"', i + 1);
    if (end == std::string::npos) fail(origin, line, int(i) + 1, "unterminated string");
    ConfigValue out{std::string(s.substr(i + 1, end - i - 1)), line};
    i = end + 1;
    return out;
  }
  size_t start = i;
  while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != '#') ++i;
  std::string tok = s.substr(start, i - start);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
  if (tok.empty()) fail(origin, line, int(start) + 1, "missing value");
  ConfigValue out;
  out.line = line;
  double num;
  if (tok == "true")
    out.v = true;
  else if (tok == "false")
    out.v = false;
  else if (parse_number(tok, &num))
    out.v = num;
  else
    out.v = tok;
  return out;
}

RawConfig parse_raw(const std::string& text, const std::string& origin) {
  static const std::map<std::string, std::set<std::string>> kKnown = {
      {"problem",
       {"kind", "alpha_tail", "gradient_scale", "theta_lower", "theta_upper", "theta_A",
        "theta_b", "quad_H", "quad_Sigma"}},
      {"is", {"kind", "base", "mu_lower", "mu_upper", "mixture_means"}},
      {"run",
       {"engine", "gamma", "alpha0_theta", "alpha0_mu", "theta0", "mu0", "horizon",
        "trajectories", "seed", "thinning", "burn_in", "checkpoints", "out", "freeze_mu"}},
  };
  RawConfig raw;
  raw.origin = origin;
  std::istringstream in(text);
  std::string lineBuf, section;
  int lineNo = 0;
  while (std::getline(in, lineBuf)) {
    ++lineNo;
    std::string s = lineBuf;
    // strip comment (quotes are never multi-token here, keep it simple:
    // a # inside a quoted string is not supported)
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    size_t i = skip_ws(s, 0);
    if (i >= s.size() || s[i] == '\r') continue;
    if (s[i] == '[') {
      size_t end = s.find(']', i);
      if (end == std::string::npos) fail(origin, lineNo, int(i) + 1, "unterminated section");
      section = s.substr(i + 1, end - i - 1);
      if (!kKnown.count(section))
        fail(origin, lineNo, int(i) + 1, "unknown section [" + section + "]");
      size_t rest = skip_ws(s, end + 1);
      if (rest < s.size() && s[rest] != '\r')
        fail(origin, lineNo, int(rest) + 1, "trailing text after section header");
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(origin, lineNo, int(i) + 1, "expected `key = value`");
    std::string key = s.substr(i, eq - i);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key.empty()) fail(origin, lineNo, int(i) + 1, "empty key");
    if (section.empty()) fail(origin, lineNo, int(i) + 1, "key before any [section]");
    if (!kKnown.at(section).count(key))
      fail(origin, lineNo, int(i) + 1, "unknown key '" + key + "' in section [" + section + "]");
    if (raw.sections[section].count(key))
      fail(origin, lineNo, int(i) + 1, "duplicate key '" + key + "'");
    size_t pos = eq + 1;
    ConfigValue v = parse_value(s, pos, origin, lineNo);
    pos = skip_ws(s, pos);
    if (pos < s.size() && s[pos] != '\r')
      fail(origin, lineNo, int(pos) + 1, "trailing text after value");
    raw.sections[section][key] = std::move(v);
  }
  return raw;
}

[[noreturn]] void bad_field(const RawConfig& raw, const std::string& field,
                            const std::string& why) {
  throw std::runtime_error(raw.origin + ": invalid config: field `" + field + "` " + why);
}

class Reader {
public:
  Reader(const RawConfig& raw, const std::string& section) : raw_(raw), section_(section) {}

  bool has(const std::string& key) const {
    auto s = raw_.sections.find(section_);
    return s != raw_.sections.end() && s->second.count(key);
  }
  template <class T>
  std::optional<T> get(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const ConfigValue& v = raw_.sections.at(section_).at(key);
    if (!std::holds_alternative<T>(v.v)) bad_field(raw_, section_ + "." + key, "has the wrong type");
    return std::get<T>(v.v);
  }
  double number(const std::string& key, double fallback) const {
    return get<double>(key).value_or(fallback);
  }
  std::optional<double> number_opt(const std::string& key) const { return get<double>(key); }
  std::string str(const std::string& key, const std::string& fallback) const {
    return get<std::string>(key).value_or(fallback);
  }
  long integer(const std::string& key, long fallback) const {
    auto v = get<double>(key);
    if (!v) return fallback;
    if (*v != std::floor(*v)) bad_field(raw_, section_ + "." + key, "must be an integer");
    return static_cast<long>(*v);
  }
  // scalar-or-array convenience for vectors like theta0
  std::optional<Vector> vec(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const ConfigValue& v = raw_.sections.at(section_).at(key);
    if (std::holds_alternative<double>(v.v)) return Vector::Constant(1, std::get<double>(v.v));
    if (std::holds_alternative<std::vector<double>>(v.v)) {
      const auto& a = std::get<std::vector<double>>(v.v);
      Vector out(a.size());
      for (size_t i = 0; i < a.size(); ++i) out(i) = a[i];
      return out;
    }
    bad_field(raw_, section_ + "." + key, "must be a number or number array");
  }
  std::optional<Matrix> matrix(const std::string& key) const { return get<Matrix>(key); }

private:
  const RawConfig& raw_;
  std::string section_;
};

ExperimentConfig from_raw(const RawConfig& raw) {
  ExperimentConfig cfg;
  Reader problem(raw, "problem"), is(raw, "is"), run(raw, "run");

  cfg.problem_kind = problem.str("kind", "");
  if (cfg.problem_kind.empty()) bad_field(raw, "problem.kind", "is required");
  cfg.alpha_tail = problem.number("alpha_tail", 1e-4);
  cfg.gradient_scale = problem.number("gradient_scale", 1.0);
  cfg.theta_lower = problem.number_opt("theta_lower");
  cfg.theta_upper = problem.number_opt("theta_upper");
  cfg.theta_A = problem.matrix("theta_A");
  if (auto b = problem.vec("theta_b")) cfg.theta_b = *b;
  cfg.quad_H = problem.matrix("quad_H");
  cfg.quad_Sigma = problem.matrix("quad_Sigma");

  cfg.is_kind = is.str("kind", "none");
  cfg.is_base = is.str("base", "standard_normal");
  cfg.mu_lower = is.number_opt("mu_lower");
  cfg.mu_upper = is.number_opt("mu_upper");
  if (auto m = is.vec("mixture_means")) cfg.mixture_means = *m;

  cfg.engine = run.str("engine", "");
  if (cfg.engine.empty()) bad_field(raw, "run.engine", "is required");
  cfg.gamma = run.number("gamma", 0.55);
  if (!(cfg.gamma > 0.5 && cfg.gamma < 1.0))
    bad_field(raw, "run.gamma", "must lie in the open interval (1/2, 1)");
  cfg.alpha0_theta = run.number("alpha0_theta", 0.05);
  cfg.alpha0_mu = run.number("alpha0_mu", 3e-6);
  if (auto t0 = run.vec("theta0")) cfg.theta0 = *t0;
  if (auto m0 = run.vec("mu0")) cfg.mu0 = *m0;
  cfg.horizon = run.integer("horizon", 0);
  if (cfg.horizon < 1) bad_field(raw, "run.horizon", "is required and must be >= 1");
  cfg.trajectories = run.integer("trajectories", 1);
  if (cfg.trajectories < 1) bad_field(raw, "run.trajectories", "must be >= 1");
  long seed = run.integer("seed", 1);
  if (seed < 0) bad_field(raw, "run.seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.thinning = run.integer("thinning", 100);
  if (cfg.thinning < 1) bad_field(raw, "run.thinning", "must be >= 1");
  cfg.burn_in = run.integer("burn_in", 0);
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.horizon)
    bad_field(raw, "run.burn_in", "must lie in [0, horizon)");
  if (auto cps = run.vec("checkpoints")) {
    for (int i = 0; i < cps->size(); ++i) {
      double c = (*cps)(i);
      if (c != std::floor(c) || c < 1 || c > double(cfg.horizon))
        bad_field(raw, "run.checkpoints", "entries must be integers in [1, horizon]");
      cfg.checkpoints.push_back(static_cast<long>(c));
    }
  }
  cfg.out_dir = run.str("out", "out");
  cfg.freeze_mu = run.get<bool>("freeze_mu").value_or(false);
  return cfg;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg = from_raw(parse_raw(text, origin));
  cfg.name = origin;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace aisopt
