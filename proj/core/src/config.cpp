#include "rwtree/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "rwtree/error.hpp"

namespace rwtree {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError("expected an object", where.empty() ? "/" : where);
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key", where + "/" + key);
  }
}

double number_or_rational(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_rational(v.get<std::string>(), key);
  throw ConfigError("expected a number or a rational string", key);
}

template <class T>
T get_int(const json& obj, const char* name, const std::string& where, T fallback) {
  if (!obj.contains(name)) return fallback;
  const json& v = obj.at(name);
  const std::string key = where + "/" + name;
  if (!v.is_number_integer()) throw ConfigError("expected an integer", key);
  if constexpr (std::is_unsigned_v<T>) {
    if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
    const auto s = v.get<std::int64_t>();
    if (s < 0) throw ConfigError("expected a nonnegative integer", key);
    return static_cast<T>(s);
  } else {
    return static_cast<T>(v.get<std::int64_t>());
  }
}

double get_real(const json& obj, const char* name, const std::string& where, double fallback) {
  if (!obj.contains(name)) return fallback;
  return number_or_rational(obj.at(name), where + "/" + name);
}

bool get_bool(const json& obj, const char* name, const std::string& where, bool fallback) {
  if (!obj.contains(name)) return fallback;
  if (!obj.at(name).is_boolean()) throw ConfigError("expected a boolean", where + "/" + name);
  return obj.at(name).get<bool>();
}

std::string get_string(const json& obj, const char* name, const std::string& where, std::string fallback) {
  if (!obj.contains(name)) return fallback;
  if (!obj.at(name).is_string()) throw ConfigError("expected a string", where + "/" + name);
  return obj.at(name).get<std::string>();
}

EnvSpec parse_env(const json& e) {
  if (!e.is_object()) throw ConfigError("expected an object", "/env");
  const std::string model = get_string(e, "model", "/env", "");
  EnvSpec s;
  if (model == "rwre") {
    check_keys(e, "/env", {"model", "b", "coupling", "support"});
    s.model = ModelKind::rwre;
    const std::string coupling = get_string(e, "coupling", "/env", "identical");
    if (coupling == "identical") {
      s.coupling = Coupling::identical;
    } else if (coupling == "iid") {
      s.coupling = Coupling::iid;
    } else {
      throw ConfigError("coupling must be iid or identical", "/env/coupling");
    }
    if (!e.contains("support") || !e.at("support").is_array()) {
      throw ConfigError("support must be an array of {value, prob}", "/env/support");
    }
    std::size_t i = 0;
    for (const json& atom : e.at("support")) {
      const std::string where = "/env/support/" + std::to_string(i++);
      check_keys(atom, where, {"value", "prob"});
      if (!atom.contains("value") || !atom.contains("prob")) throw ConfigError("atom needs value and prob", where);
      s.support.push_back(Atom{number_or_rational(atom.at("value"), where + "/value"),
                               number_or_rational(atom.at("prob"), where + "/prob")});
    }
  } else if (model == "orrw") {
    check_keys(e, "/env", {"model", "b", "delta"});
    s.model = ModelKind::orrw;
    if (!e.contains("delta")) throw ConfigError("missing key", "/env/delta");
    s.delta = get_real(e, "delta", "/env", 1.0);
  } else {
    throw ConfigError("model must be rwre or orrw", "/env/model");
  }
  if (!e.contains("b")) throw ConfigError("missing key", "/env/b");
  s.b = get_int<int>(e, "b", "/env", 2);
  s.validate();
  return s;
}

}  // namespace

double parse_rational(std::string_view text, const std::string& key) {
  auto parse_one = [&](std::string_view t) {
    while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
    while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
      throw ConfigError("cannot parse number '" + std::string(text) + "'", key);
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_one(text);
  const double num = parse_one(text.substr(0, slash));
  const double den = parse_one(text.substr(slash + 1));
  if (den == 0.0) throw ConfigError("zero denominator", key);
  return num / den;
}

OutputFormat parse_format(std::string_view s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  throw ConfigError("format must be json or csv", "/output/format");
}

void RunConfig::validate() const {
  env.validate();
  campaign.validate();
  if (bounds.psi < 0) throw ConfigError("psi must be positive or \"auto\"", "/psi");
  if (bounds.psi_max < 1) throw ConfigError("psi_max must be >= 1", "/bounds/psi_max");
  if (bounds.p < 1 || bounds.eps < 1) throw ConfigError("p and eps must be positive integers", "/bounds");
  if (bounds.geom_cap < 4 || bounds.geom_cap > 160) throw ConfigError("geom_cap must lie in 4..160", "/bounds/geom_cap");
  if (!(bounds.series_tol > 0.0)) throw ConfigError("series_tol must be positive", "/bounds/series_tol");
  if (bounds.theta_terms < 1) throw ConfigError("theta_terms must be >= 1", "/bounds/theta_terms");
  if (bounds.tail_n_max < 1) throw ConfigError("tail_n_max must be >= 1", "/bounds/tail_n_max");
  if (bounds.offspring_samples < 1000) {
    throw ConfigError("offspring_samples must be >= 1000", "/bounds/offspring_samples");
  }
}

RunConfig parse_config(const json& j) {
  check_keys(j, "", {"env", "psi", "bounds", "campaign", "output"});
  RunConfig c;
  if (!j.contains("env")) throw ConfigError("missing key", "/env");
  c.env = parse_env(j.at("env"));
  if (j.contains("psi")) {
    const json& p = j.at("psi");
    if (p.is_string() && p.get<std::string>() == "auto") {
      c.bounds.psi = 0;
    } else if (p.is_number_integer() && p.get<std::int64_t>() >= 1) {
      c.bounds.psi = static_cast<int>(p.get<std::int64_t>());
    } else {
      throw ConfigError("psi must be a positive integer or \"auto\"", "/psi");
    }
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    check_keys(b, "/bounds",
               {"psi_max", "p", "eps", "geom_cap", "series_tol", "theta_terms", "tail_n_max", "offspring_samples"});
    c.bounds.psi_max = get_int<int>(b, "psi_max", "/bounds", c.bounds.psi_max);
    c.bounds.p = get_int<int>(b, "p", "/bounds", c.bounds.p);
    c.bounds.eps = get_int<int>(b, "eps", "/bounds", c.bounds.eps);
    c.bounds.geom_cap = get_int<int>(b, "geom_cap", "/bounds", c.bounds.geom_cap);
    c.bounds.series_tol = get_real(b, "series_tol", "/bounds", c.bounds.series_tol);
    c.bounds.theta_terms = get_int<int>(b, "theta_terms", "/bounds", c.bounds.theta_terms);
    c.bounds.tail_n_max = get_int<int>(b, "tail_n_max", "/bounds", c.bounds.tail_n_max);
    c.bounds.offspring_samples =
        get_int<std::uint64_t>(b, "offspring_samples", "/bounds", c.bounds.offspring_samples);
  }
  if (j.contains("campaign")) {
    const json& m = j.at("campaign");
    check_keys(m, "/campaign",
               {"replicas", "max_steps", "max_level", "guard", "seed", "workers", "beta_level", "max_vertices",
                "probe_levels", "keep_blocks"});
    CampaignConfig& k = c.campaign;
    k.replicas = get_int<std::uint64_t>(m, "replicas", "/campaign", k.replicas);
    k.max_steps = get_int<std::uint64_t>(m, "max_steps", "/campaign", k.max_steps);
    k.max_level = get_int<int>(m, "max_level", "/campaign", k.max_level);
    k.guard = get_int<int>(m, "guard", "/campaign", k.guard);
    k.seed = get_int<std::uint64_t>(m, "seed", "/campaign", k.seed);
    k.workers = get_int<unsigned>(m, "workers", "/campaign", k.workers);
    k.beta_level = get_int<int>(m, "beta_level", "/campaign", k.beta_level);
    k.max_vertices = get_int<std::size_t>(m, "max_vertices", "/campaign", k.max_vertices);
    k.keep_blocks = get_bool(m, "keep_blocks", "/campaign", k.keep_blocks);
    if (m.contains("probe_levels")) {
      const json& pl = m.at("probe_levels");
      if (!pl.is_array()) throw ConfigError("expected an array of integers", "/campaign/probe_levels");
      k.probe_levels.clear();
      for (const json& x : pl) {
        if (!x.is_number_integer()) throw ConfigError("expected an array of integers", "/campaign/probe_levels");
        k.probe_levels.push_back(static_cast<int>(x.get<std::int64_t>()));
      }
    }
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "/output", {"path", "format"});
    c.out_path = get_string(o, "path", "/output", "");
    c.format = parse_format(get_string(o, "format", "/output", "json"));
  }
  c.bounds.offspring_seed = c.campaign.seed;
  c.bounds.workers = c.campaign.workers;
  c.validate();
  return c;
}

RunConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const EnvSpec& env) {
  json e;
  e["model"] = std::string(to_string(env.model));
  e["b"] = env.b;
  if (env.model == ModelKind::rwre) {
    e["coupling"] = std::string(to_string(env.coupling));
    json sup = json::array();
    for (const Atom& a : env.support) sup.push_back({{"value", a.value}, {"prob", a.prob}});
    e["support"] = sup;
  } else {
    e["delta"] = env.delta;
  }
  return e;
}

json effective_config(const RunConfig& c) {
  json j;
  j["env"] = to_json(c.env);
  j["psi"] = c.bounds.psi == 0 ? json("auto") : json(c.bounds.psi);
  j["bounds"] = {{"psi_max", c.bounds.psi_max},         {"p", c.bounds.p},
                 {"eps", c.bounds.eps},                 {"geom_cap", c.bounds.geom_cap},
                 {"series_tol", c.bounds.series_tol},   {"theta_terms", c.bounds.theta_terms},
                 {"tail_n_max", c.bounds.tail_n_max},   {"offspring_samples", c.bounds.offspring_samples}};
  const CampaignConfig& k = c.campaign;
  j["campaign"] = {{"replicas", k.replicas},     {"max_steps", k.max_steps},       {"max_level", k.max_level},
                   {"guard", k.guard},           {"seed", k.seed},                 {"beta_level", k.beta_level},
                   {"max_vertices", k.max_vertices}, {"probe_levels", k.probe_levels}, {"keep_blocks", k.keep_blocks}};
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = effective_config(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rwtree
