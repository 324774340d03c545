#include "trap/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "trap/format.hpp"
#include "trap/graph.hpp"
#include "trap/landscape.hpp"

namespace trap {

namespace {

constexpr std::string_view kTolPrefix = "tol.";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Field-level failures carry only a message; the parser adds line and key.
struct BadValue {
  std::string message;
};

double to_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{"expected a number, got '" + std::string(s) + "'"};
  }
  return v;
}

std::uint64_t to_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{"expected a non-negative integer, got '" + std::string(s) + "'"};
  }
  return v;
}

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true") return true;
  if (s == "false") return false;
  throw BadValue{"expected true or false, got '" + std::string(s) + "'"};
}

template <class T, class Conv>
std::vector<T> to_list(std::string_view s, Conv conv) {
  std::vector<T> out;
  s = trim(s);
  if (s.empty()) return out;
  for (;;) {
    const auto comma = s.find(',');
    out.push_back(static_cast<T>(conv(s.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += format_double(xs[i]);
    else out += std::to_string(xs[i]);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  // Empty optional: the field is omitted from to_text().
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

template <class Member>
Field double_field(const char* key, Member member) {
  return {key, [member](ExperimentConfig& c, std::string_view v) { c.*member = to_double(v); },
          [member](const ExperimentConfig& c) { return std::optional(format_double(c.*member)); }};
}

template <class Member>
Field optional_double_field(const char* key, Member member) {
  return {key, [member](ExperimentConfig& c, std::string_view v) { c.*member = to_double(v); },
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            if (!(c.*member)) return std::nullopt;
            return format_double(*(c.*member));
          }};
}

template <class Member>
Field u64_field(const char* key, Member member) {
  return {key, [member](ExperimentConfig& c, std::string_view v) { c.*member = to_u64(v); },
          [member](const ExperimentConfig& c) { return std::optional(std::to_string(c.*member)); }};
}

template <class Member>
Field list_field(const char* key, Member member) {
  return {key,
          [member](ExperimentConfig& c, std::string_view v) {
            using T = typename std::remove_reference_t<decltype(c.*member)>::value_type;
            if constexpr (std::is_floating_point_v<T>) c.*member = to_list<T>(v, to_double);
            else c.*member = to_list<T>(v, to_u64);
          },
          [member](const ExperimentConfig& c) { return std::optional(join(c.*member)); }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = {
      {"experiment", [](C& c, std::string_view v) { c.experiment = parse_experiment(trim(v)); },
       [](const C& c) { return std::optional<std::string>(name(c.experiment)); }},
      {"topology",
       [](C& c, std::string_view v) {
         c.topology = std::string(trim(v));
         try {
           (void)Topology::parse(c.topology);
         } catch (const std::exception& e) {
           throw BadValue{e.what()};
         }
       },
       [](const C& c) { return std::optional(c.topology); }},
      {"landscape",
       [](C& c, std::string_view v) {
         c.landscape = std::string(trim(v));
         try {
           (void)Landscape::parse(c.landscape, 0);
         } catch (const std::exception& e) {
           throw BadValue{e.what()};
         }
       },
       [](const C& c) { return std::optional(c.landscape); }},
      double_field("alpha", &C::alpha),
      double_field("gamma", &C::gamma),
      double_field("cloud_rho", &C::cloud_rho),
      double_field("eps", &C::eps),
      double_field("M", &C::M),
      list_field("theta", &C::theta),
      list_field("lambda", &C::lambda),
      list_field("t0", &C::t0),
      list_field("s", &C::s),
      list_field("sizes", &C::sizes),
      u64_field("environments", &C::environments),
      u64_field("trajectories", &C::trajectories),
      u64_field("seed", &C::seed),
      {"workers", [](C& c, std::string_view v) { c.workers = static_cast<unsigned>(to_u64(v)); },
       [](const C& c) { return std::optional(std::to_string(c.workers)); }},
      {"output", [](C& c, std::string_view v) { c.output = std::string(trim(v)); },
       [](const C& c) { return std::optional(c.output); }},
      double_field("m", &C::m),
      optional_double_field("scale.t", &C::scale_t),
      optional_double_field("scale.g", &C::scale_g),
      optional_double_field("scale.rho", &C::scale_rho),
      optional_double_field("scale.r", &C::scale_r),
      {"step_cap", [](C& c, std::string_view v) { c.step_cap = to_u64(v); },
       [](const C& c) -> std::optional<std::string> {
         if (!c.step_cap) return std::nullopt;
         return std::to_string(*c.step_cap);
       }},
      double_field("lambda_d", &C::lambda_d),
      {"fresh_site", [](C& c, std::string_view v) { c.fresh_site = to_bool(v); },
       [](const C& c) { return std::optional<std::string>(c.fresh_site ? "true" : "false"); }},
      {"tolerance_profile", [](C& c, std::string_view v) { c.profile = parse_tolerance_profile(trim(v)); },
       [](const C& c) { return std::optional<std::string>(name(c.profile)); }},
  };
  return table;
}

}  // namespace

const char* name(Experiment e) {
  switch (e) {
    case Experiment::aging_curve: return "aging_curve";
    case Experiment::clock_marginal: return "clock_marginal";
    case Experiment::hitting_law: return "hitting_law";
    case Experiment::potential_report: return "potential_report";
    case Experiment::diagnostics: return "diagnostics";
  }
  return "?";
}

Experiment parse_experiment(std::string_view text) {
  for (auto e : {Experiment::aging_curve, Experiment::clock_marginal, Experiment::hitting_law,
                 Experiment::potential_report, Experiment::diagnostics}) {
    if (text == name(e)) return e;
  }
  throw std::invalid_argument("unknown experiment '" + std::string(text) + "'");
}

const char* name(ToleranceProfile p) { return p == ToleranceProfile::ci ? "ci" : "paper"; }

ToleranceProfile parse_tolerance_profile(std::string_view text) {
  if (text == "ci") return ToleranceProfile::ci;
  if (text == "paper") return ToleranceProfile::paper;
  throw std::invalid_argument("unknown tolerance profile '" + std::string(text) + "' (ci | paper)");
}

const std::map<std::string, double>& tolerance_defaults(ToleranceProfile profile) {
  static const std::map<std::string, double> paper = {
      {"gap", 0.02},          {"laplace_abs", 0.02}, {"laplace_sigma", 3},
      {"stable_abs", 0.03},   {"hit_mean_rel", 0.1}, {"hit_ks", 0.03},
      {"g0_band", 0.05},      {"kr_rel", 0.1},       {"coverage", 0.99},
      {"shallow_factor", 1.5}, {"very_deep_factor", 1.5},
  };
  static const std::map<std::string, double> ci = {
      {"gap", 0.05},          {"laplace_abs", 0.04}, {"laplace_sigma", 4},
      {"stable_abs", 0.06},   {"hit_mean_rel", 0.2}, {"hit_ks", 0.06},
      {"g0_band", 0.1},       {"kr_rel", 0.2},       {"coverage", 0.95},
      {"shallow_factor", 2},  {"very_deep_factor", 2},
  };
  return profile == ToleranceProfile::ci ? ci : paper;
}

double ExperimentConfig::tolerance(const std::string& key) const {
  if (auto it = tolerances.find(key); it != tolerances.end()) return it->second;
  const auto& defaults = tolerance_defaults(profile);
  if (auto it = defaults.find(key); it != defaults.end()) return it->second;
  throw std::out_of_range("unknown tolerance '" + key + "'");
}

void ExperimentConfig::validate() const {
  auto fail = [](const char* key, const std::string& msg) { throw ConfigError(0, key, msg); };
  if (environments < 1) fail("environments", "must be >= 1");
  if (trajectories < 1) fail("trajectories", "must be >= 1");
  if (experiment == Experiment::aging_curve && theta.empty()) fail("theta", "must not be empty");
  for (double th : theta) {
    if (!(th > 0)) fail("theta", "values must be positive");
  }
  if (!(eps > 0 && eps < 1 && M > 1)) fail("eps", "window needs 0 < eps < 1 < M");
  if (!(m >= 0)) fail("m", "must be >= 0");
  if (!(cloud_rho > 0)) fail("cloud_rho", "must be positive");
  for (const auto& [k, v] : tolerances) {
    if (!tolerance_defaults(profile).contains(k)) fail("tol.", "unknown tolerance '" + k + "'");
  }
}

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::runtime_error(message), line_(line), key_(std::move(key)) {}

ExperimentConfig parse_config(std::string_view text, std::string_view origin) {
  ExperimentConfig c;
  std::map<std::string, int> seen;
  int line_no = 0;
  auto error = [&](const std::string& key, const std::string& msg) {
    std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    if (!key.empty()) where += "field '" + key + "': ";
    return ConfigError(line_no, key, where + msg);
  };
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw error("", "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw error("", "missing key before '='");
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
      throw error(key, "duplicate key (first set on line " + std::to_string(it->second) + ")");
    }
    try {
      if (key.starts_with(kTolPrefix)) {
        const std::string tol = key.substr(kTolPrefix.size());
        if (!tolerance_defaults(ToleranceProfile::paper).contains(tol)) {
          throw BadValue{"unknown tolerance name"};
        }
        c.tolerances[tol] = to_double(value);
        continue;
      }
      bool known = false;
      for (const Field& f : fields()) {
        if (key == f.key) {
          f.set(c, value);
          known = true;
          break;
        }
      }
      if (!known) throw error(key, "unknown key");
    } catch (const BadValue& bad) {
      throw error(key, bad.message);
    } catch (const std::invalid_argument& bad) {
      throw error(key, bad.what());
    }
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    const int at = seen.contains(e.key()) ? seen[e.key()] : 0;
    throw ConfigError(at, e.key(),
                      std::string(origin) + ":" + std::to_string(at) + ": field '" + e.key() + "': " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string to_text(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : fields()) {
    if (auto v = f.get(config)) out += std::string(f.key) + " = " + *v + "\n";
  }
  for (const auto& [k, v] : config.tolerances) out += std::string(kTolPrefix) + k + " = " + format_double(v) + "\n";
  return out;
}

}  // namespace trap
