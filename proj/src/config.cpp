#include "psim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace psim {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"n", "population size before injection", false},
      {"f", "Byzantine fraction (list)", true},
      {"t", "trusted fraction (list)", true},
      {"eviction", "eviction policy: a rate in [0,1] or 'adaptive' (list)", true},
      {"l1", "view size", false},
      {"l2", "sampler count (defaults to l1)", false},
      {"alpha", "push share of the view", false},
      {"beta", "pull share of the view", false},
      {"gamma", "history share of the view", false},
      {"rounds", "rounds per run", false},
      {"repetitions", "seeds per configuration: seed, seed+1, ...", false},
      {"seed", "master seed", false},
      {"push_budget_factor", "Byzantine pushes per node and round, in units of alpha*l1", false},
      {"ident_threshold", "identification attack threshold", false},
      {"identification", "run the identification attack (bool)", false},
      {"injection", "add view-poisoned trusted nodes (bool)", false},
      {"injection_fraction", "poisoned nodes as a fraction of n (list)", true},
      {"handshake_cache", "reuse handshake outcomes per node pair (bool)", false},
      {"out", "output directory", false},
  };
  return keys;
}

namespace {

const ConfigKey* find_key(std::string_view name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = value.find(',', start);
    auto item = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void add_value(Settings& out, const std::string& key, std::string_view raw, const std::string& where) {
  const auto* info = find_key(key);
  if (!info) throw ConfigError(where + ": unknown key '" + key + "'");
  auto& slot = out[key];
  if (info->list) {
    for (auto& v : split_list(raw)) slot.push_back(std::move(v));
  } else {
    if (!slot.empty()) throw ConfigError(where + ": key '" + key + "' given more than once");
    slot.push_back(trim(raw));
  }
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': not a non-negative integer: '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

EvictionPolicy to_eviction(const std::string& v) {
  if (v == "adaptive") return EvictionPolicy::adaptive();
  const double rate = to_double("eviction", v);
  if (rate < 0.0 || rate > 1.0) throw ConfigError("eviction rate must lie in [0, 1]: " + v);
  return EvictionPolicy::fixed(rate);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Settings parse_settings(std::string_view text, const std::string& source) {
  Settings out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(std::string_view(stripped).substr(0, eq));
    const auto value = trim(std::string_view(stripped).substr(eq + 1));
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    add_value(out, key, value, where);
  }
  return out;
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_settings(buf.str(), path.string());
}

Settings settings_from_env(const std::function<const char*(const char*)>& getenv_fn) {
  Settings out;
  for (const auto& k : config_keys()) {
    std::string name(kEnvPrefix);
    for (char c : k.name) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (const char* v = getenv_fn(name.c_str()); v && *v) add_value(out, k.name, v, name);
  }
  return out;
}

Settings preset_settings(const std::string& name) {
  Settings s;
  if (name == "full-sweep") {
    s["n"] = {"10000"};
    for (int i = 0; i <= 10; ++i) s["f"].push_back(fmt(0.10 + 0.02 * i));
    s["t"] = {"0.01", "0.05", "0.1", "0.2", "0.3", "0.4", "0.5"};
    s["eviction"] = {"0", "0.4", "0.6", "1", "adaptive"};
    s["l1"] = {"200"};
    s["rounds"] = {"200"};
    s["repetitions"] = {"10"};
  } else if (name == "desk") {
    s["n"] = {"1000"};
    s["l1"] = {"100"};
    s["rounds"] = {"200"};
    s["repetitions"] = {"5"};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected full-sweep or desk)");
  }
  return s;
}

void overlay(Settings& base, const Settings& top) {
  for (const auto& [k, v] : top) base[k] = v;
}

ExperimentConfig resolve_config(const Settings& settings) {
  ExperimentConfig c;
  auto scalar = [&](const char* key) -> const std::string* {
    auto it = settings.find(key);
    return it == settings.end() || it->second.empty() ? nullptr : &it->second.front();
  };
  auto list = [&](const char* key) -> const std::vector<std::string>* {
    auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
  };

  if (auto* v = scalar("n")) c.n = to_count("n", *v);
  if (auto* v = list("f")) {
    c.f_values.clear();
    for (const auto& x : *v) c.f_values.push_back(to_double("f", x));
  }
  if (auto* v = list("t")) {
    c.t_values.clear();
    for (const auto& x : *v) c.t_values.push_back(to_double("t", x));
  }
  if (auto* v = list("eviction")) {
    c.evictions.clear();
    for (const auto& x : *v) c.evictions.push_back(to_eviction(x));
  }
  if (auto* v = scalar("l1")) c.params.l1 = to_count("l1", *v);
  c.params.l2 = c.params.l1;
  if (auto* v = scalar("l2")) c.params.l2 = to_count("l2", *v);
  if (auto* v = scalar("alpha")) c.params.alpha = to_double("alpha", *v);
  if (auto* v = scalar("beta")) c.params.beta = to_double("beta", *v);
  if (auto* v = scalar("gamma")) c.params.gamma = to_double("gamma", *v);
  if (auto* v = scalar("rounds")) c.rounds = to_count("rounds", *v);
  if (auto* v = scalar("repetitions")) c.repetitions = to_count("repetitions", *v);
  if (auto* v = scalar("seed")) c.seed = to_count("seed", *v);
  if (auto* v = scalar("push_budget_factor")) c.push_budget_factor = to_double("push_budget_factor", *v);
  if (auto* v = scalar("ident_threshold")) c.ident_threshold = to_double("ident_threshold", *v);
  if (auto* v = scalar("identification")) c.identification = to_bool("identification", *v);
  if (auto* v = scalar("injection")) c.injection = to_bool("injection", *v);
  if (auto* v = list("injection_fraction")) {
    c.injection_fractions.clear();
    for (const auto& x : *v) c.injection_fractions.push_back(to_double("injection_fraction", x));
  }
  if (auto* v = scalar("handshake_cache")) c.cache_handshakes = to_bool("handshake_cache", *v);
  if (auto* v = scalar("out")) c.out = *v;

  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (n < 2) throw ConfigError("n must be at least 2");
  if (rounds < 1) throw ConfigError("rounds must be at least 1");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (f_values.empty()) throw ConfigError("at least one f value is required");
  if (t_values.empty()) throw ConfigError("at least one t value is required");
  if (evictions.empty()) throw ConfigError("at least one eviction policy is required");
  if (injection && injection_fractions.empty()) {
    throw ConfigError("injection is enabled but no injection_fraction is given");
  }
  if (out.empty()) throw ConfigError("output directory must not be empty");
  for (double f : f_values) {
    if (f < 0.0 || f > 1.0) throw ConfigError("f must lie in [0, 1], got " + fmt(f));
  }
  for (double t : t_values) {
    if (t < 0.0 || t > 1.0) throw ConfigError("t must lie in [0, 1], got " + fmt(t));
  }
  for (double f : f_values) {
    for (double t : t_values) {
      if (f + t > 1.0 + 1e-12) throw ConfigError("f + t exceeds 1 for f=" + fmt(f) + ", t=" + fmt(t));
    }
  }
  // Every run configuration must also pass the engine's own checks.
  try {
    for (double f : f_values) {
      for (double t : t_values) {
        for (const auto& ev : evictions) {
          run_config(f, t, ev, 0.0, seed, identification).validate();
          for (double inj : injection_fractions) run_config(f, t, ev, inj, seed, identification).validate();
        }
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig ExperimentConfig::run_config(double f, double t, const EvictionPolicy& eviction, double injection_frac,
                                       std::uint64_t run_seed, bool with_identification) const {
  RunConfig r;
  r.n = n;
  r.f = f;
  r.t = t;
  r.params = params;
  r.eviction = eviction;
  r.rounds = rounds;
  r.seed = run_seed;
  r.push_budget_factor = push_budget_factor;
  r.ident_threshold = ident_threshold;
  r.identification = with_identification;
  r.injection_fraction = injection_frac;
  r.cache_handshakes = cache_handshakes;
  return r;
}

}  // namespace psim
