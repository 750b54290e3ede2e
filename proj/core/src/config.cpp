#include "svtank/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "svtank/error.hpp"

namespace svtank {

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

// Drops a trailing '#' comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::optional<json> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  const bool integral = s.find_first_of(".eEnN") == std::string_view::npos;
  if (integral) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size()) return json(v);
  }
  double d = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec == std::errc() && p == s.data() + s.size()) return json(d);
  return std::nullopt;
}

json parse_scalar(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.empty()) fail_at(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail_at(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) ++i;
      out.push_back(s[i]);
    }
    return out;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (auto n = parse_number(s)) return *n;
  fail_at(line, "cannot parse value '" + std::string(s) + "'");
}

json parse_value(std::string_view s, std::size_t line) {
  s = trim(s);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') fail_at(line, "unterminated list");
    json arr = json::array();
    std::string_view body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      arr.push_back(parse_scalar(body.substr(0, comma), line));
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return arr;
  }
  return parse_scalar(s, line);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"physical", {"g", "mu", "L", "m", "H_max"}},
      {"friction", {"type", "c_f", "r0", "r1", "r", "b", "c", "B", "profile", "v_scale"}},
      {"gains",
       {"mode", "theorem", "omega", "omega1", "omega2", "r", "sigma", "k", "q", "delta", "beta",
        "gamma", "margin", "delta_min", "r_fraction", "k_fraction"}},
      {"initial", {"kind", "mode", "amplitude", "velocity", "xi0", "w0", "level_fraction"}},
      {"solver",
       {"n", "t_end", "cfl_adv", "cfl_diff", "output_every", "h_floor", "open_loop",
        "sample_and_hold", "spill", "fixed_dt", "record_states"}},
      {"verify",
       {"lemma1", "prop1", "prop2", "sandwich", "lemma2", "lemma2_convergence", "decay",
        "robustness", "samples"}},
      {"output", {"dir", "fields"}},
  };
  return keys;
}

const std::set<std::string>& top_level_keys() {
  static const std::set<std::string> keys = {"seed", "name"};
  return keys;
}

void check_keys(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be an object of sections");
  for (const auto& [section, body] : j.items()) {
    if (top_level_keys().count(section)) continue;
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError("unknown section [" + section + "]");
    if (!body.is_object()) throw ConfigError("section [" + section + "] must be a table");
    for (const auto& [key, value] : body.items())
      if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
  }
}

template <class T>
T get_or(const json& section, const char* key, T fallback, const char* where) {
  if (!section.contains(key)) return fallback;
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

}  // namespace

json parse_config_text(std::string_view text) {
  const std::string_view t = trim(text);
  if (!t.empty() && t.front() == '{') {
    try {
      return json::parse(t);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
  }
  json root = json::object();
  json* current = &root;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_at(line_no, "malformed section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!is_identifier(name)) fail_at(line_no, "bad section name '" + name + "'");
      if (root.contains(name)) fail_at(line_no, "duplicate section [" + name + "]");
      root[name] = json::object();
      current = &root[name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_at(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!is_identifier(key)) fail_at(line_no, "bad key '" + key + "'");
    if (current->contains(key)) fail_at(line_no, "duplicate key '" + key + "'");
    (*current)[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return root;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void set_config_value(json& config, const std::string& dotted_path, const std::string& value) {
  const auto dot = dotted_path.find('.');
  json parsed = parse_value(value, 0);
  if (dot == std::string::npos) {
    config[dotted_path] = parsed;
    return;
  }
  const std::string section = dotted_path.substr(0, dot);
  const std::string key = dotted_path.substr(dot + 1);
  if (!config.contains(section)) config[section] = json::object();
  config[section][key] = parsed;
  check_keys(config);
}

ExperimentConfig experiment_from_json(const json& j) {
  check_keys(j);
  ExperimentConfig cfg;
  cfg.source = j;
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& { return j.contains(name) ? j.at(name) : empty; };
  try {
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed, "config");

    const json& ph = section("physical");
    cfg.physical.g = get_or(ph, "g", cfg.physical.g, "physical");
    cfg.physical.mu = get_or(ph, "mu", cfg.physical.mu, "physical");
    cfg.physical.L = get_or(ph, "L", cfg.physical.L, "physical");
    cfg.physical.m = get_or(ph, "m", cfg.physical.m, "physical");
    cfg.physical.H_max = get_or(ph, "H_max", cfg.physical.H_max, "physical");
    cfg.physical.validate();

    if (j.contains("friction")) cfg.friction_spec = j.at("friction");
    cfg.friction = friction_from_json(cfg.friction_spec, cfg.physical);

    const json& gs = section("gains");
    const std::string mode = get_or<std::string>(gs, "mode", "suggest", "gains");
    if (mode == "suggest") {
      cfg.gains.mode = GainSpec::Mode::Suggest;
    } else if (mode == "explicit") {
      cfg.gains.mode = GainSpec::Mode::Explicit;
    } else {
      throw ConfigError("gains.mode must be \"suggest\" or \"explicit\"");
    }
    cfg.gains.theorem = get_or(gs, "theorem", cfg.gains.theorem, "gains");
    if (cfg.gains.theorem < 0 || cfg.gains.theorem > 2)
      throw ConfigError("gains.theorem must be 0 (none), 1 or 2");
    if (cfg.gains.mode == GainSpec::Mode::Suggest && cfg.gains.theorem == 0)
      throw ConfigError("gains.mode = \"suggest\" needs gains.theorem = 1 or 2");
    cfg.gains.omega = get_or(gs, "omega", cfg.gains.omega, "gains");
    cfg.gains.omega1 = get_or(gs, "omega1", cfg.gains.omega1, "gains");
    cfg.gains.omega2 = get_or(gs, "omega2", cfg.gains.omega2, "gains");
    if (gs.contains("r")) cfg.gains.r = get_or(gs, "r", 0.0, "gains");
    Gains& g = cfg.gains.gains;
    g.sigma = get_or(gs, "sigma", g.sigma, "gains");
    g.k = get_or(gs, "k", g.k, "gains");
    g.q = get_or(gs, "q", g.q, "gains");
    g.delta = get_or(gs, "delta", g.delta, "gains");
    g.beta = get_or(gs, "beta", g.beta, "gains");
    g.gamma = get_or(gs, "gamma", g.gamma, "gains");
    SuggestHints& hints = cfg.gains.hints;
    hints.sigma = get_or(gs, "sigma", hints.sigma, "gains");
    hints.q = get_or(gs, "q", hints.q, "gains");
    hints.margin = get_or(gs, "margin", hints.margin, "gains");
    hints.delta_min = get_or(gs, "delta_min", hints.delta_min, "gains");
    hints.r_fraction = get_or(gs, "r_fraction", hints.r_fraction, "gains");
    hints.k_fraction = get_or(gs, "k_fraction", hints.k_fraction, "gains");
    if (cfg.gains.mode == GainSpec::Mode::Explicit) {
      g.validate();
      if (cfg.gains.theorem != 0 && !cfg.gains.r)
        throw ConfigError("explicit gains with a certificate need gains.r");
    }
    if (!(hints.margin >= 0.0)) throw ConfigError("gains.margin must be >= 0");
    if (!(hints.r_fraction > 0.0 && hints.r_fraction < 1.0))
      throw ConfigError("gains.r_fraction must lie in (0, 1)");
    if (!(hints.k_fraction > 0.0 && hints.k_fraction < 1.0))
      throw ConfigError("gains.k_fraction must lie in (0, 1)");

    const json& in = section("initial");
    json in_copy = in;
    in_copy.erase("level_fraction");
    cfg.initial = initial_spec_from_json(in_copy);
    if (in.contains("level_fraction")) {
      cfg.level_fraction = get_or(in, "level_fraction", 0.0, "initial");
      if (!(*cfg.level_fraction >= 0.0 && *cfg.level_fraction <= 1.0))
        throw ConfigError("initial.level_fraction must lie in [0, 1]");
      if (cfg.gains.theorem == 0)
        throw ConfigError("initial.level_fraction needs a certificate (gains.theorem = 1 or 2)");
    }

    cfg.solver = solver_config_from_json(section("solver"));

    const json& vs = section("verify");
    VerifySpec& v = cfg.verify;
    v.lemma1 = get_or(vs, "lemma1", v.lemma1, "verify");
    v.prop1 = get_or(vs, "prop1", v.prop1, "verify");
    v.prop2 = get_or(vs, "prop2", v.prop2, "verify");
    v.sandwich = get_or(vs, "sandwich", v.sandwich, "verify");
    v.lemma2 = get_or(vs, "lemma2", v.lemma2, "verify");
    v.lemma2_convergence = get_or(vs, "lemma2_convergence", v.lemma2_convergence, "verify");
    v.decay = get_or(vs, "decay", v.decay, "verify");
    v.robustness = get_or(vs, "robustness", v.robustness, "verify");
    v.samples = get_or(vs, "samples", v.samples, "verify");
    if (v.samples == 0) throw ConfigError("verify.samples must be >= 1");
    if (v.robustness && cfg.gains.theorem != 1)
      throw ConfigError("verify.robustness needs gains.theorem = 1");

    const json& os = section("output");
    cfg.output.dir = get_or(os, "dir", cfg.output.dir, "output");
    cfg.output.fields = get_or(os, "fields", cfg.output.fields, "output");
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

}  // namespace svtank
