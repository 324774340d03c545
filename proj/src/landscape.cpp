#include "trap/landscape.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "trap/format.hpp"

namespace trap {

namespace {

constexpr std::uint64_t kEnvironmentSalt = 0x656E7669726F6E6Dull;

double parse_double(std::string_view text, std::string_view what) {
  double value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

void check_scales(const ScaleSet& s) {
  for (double v : {s.t, s.g, s.rho, s.r, s.f, s.xi}) {
    if (!std::isfinite(v) || v <= 0) {
      throw std::overflow_error("scale set is not representable for these parameters");
    }
  }
}

}  // namespace

std::uint64_t environment_key(std::uint64_t seed) { return derive_key(seed, kEnvironmentSalt); }

Landscape Landscape::pareto(double alpha, std::uint64_t seed) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("pareto alpha must be in (0, 1)");
  Landscape l;
  l.law_ = DepthLaw::pareto;
  l.alpha_ = alpha;
  return l.with_seed(seed);
}

Landscape Landscape::rem(double beta, unsigned n, std::uint64_t seed) {
  if (!(beta >= 0) || !std::isfinite(beta)) throw std::invalid_argument("rem beta must be finite and non-negative");
  if (n < 1) throw std::invalid_argument("rem dimension must be positive");
  Landscape l;
  l.law_ = DepthLaw::rem;
  l.beta_ = beta;
  l.rem_n_ = n;
  l.rem_sigma_ = beta * std::sqrt(static_cast<double>(n));
  return l.with_seed(seed);
}

Landscape Landscape::parse(std::string_view text, std::uint64_t seed) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("landscape must look like law:key=value,..., got '" +
                                std::string(text) + "'");
  }
  const auto law = text.substr(0, colon);
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double n = std::numeric_limits<double>::quiet_NaN();
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("landscape parameter '" + std::string(item) + "' lacks '='");
    }
    const auto key = item.substr(0, eq);
    const double value = parse_double(item.substr(eq + 1), key);
    if (key == "alpha") alpha = value;
    else if (key == "beta") beta = value;
    else if (key == "n") n = value;
    else throw std::invalid_argument("unknown landscape parameter '" + std::string(key) + "'");
  }
  if (law == "pareto") {
    if (std::isnan(alpha)) throw std::invalid_argument("pareto landscape needs alpha=");
    return pareto(alpha, seed);
  }
  if (law == "rem") {
    if (std::isnan(beta) || std::isnan(n)) throw std::invalid_argument("rem landscape needs beta= and n=");
    if (n < 1 || n != std::floor(n) || n > 64) throw std::invalid_argument("rem n must be an integer in [1, 64]");
    return rem(beta, static_cast<unsigned>(n), seed);
  }
  throw std::invalid_argument("unknown landscape law '" + std::string(law) + "'");
}

std::string Landscape::to_string() const {
  if (law_ == DepthLaw::pareto) return "pareto:alpha=" + format_double(alpha_);
  return "rem:beta=" + format_double(beta_) + ",n=" + std::to_string(rem_n_);
}

Landscape Landscape::with_seed(std::uint64_t seed) const {
  Landscape l = *this;
  l.seed_ = seed;
  l.key_ = environment_key(seed);
  return l;
}

Landscape Landscape::scaled(double c) const {
  if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("depth scale must be positive");
  Landscape l = *this;
  l.scale_ *= c;
  return l;
}

double Landscape::tau_from_energy(double energy) const { return scale_ * std::exp(beta_ * energy); }

double Landscape::tail(double u) const {
  const double x = u / scale_;
  if (law_ == DepthLaw::pareto) return x <= 1 ? 1.0 : std::pow(x, -alpha_);
  if (x <= 0) return 1.0;
  return 0.5 * std::erfc(std::log(x) / (rem_sigma_ * std::numbers::sqrt2));
}

ScaleSet rem_scales(unsigned n, double alpha, double beta, double m) {
  if (!(alpha > 0 && alpha < 1) || !(beta > 0) || n < 1 || !(m > 0)) {
    throw std::invalid_argument("rem scales need alpha in (0,1), beta > 0, n >= 1, m > 0");
  }
  const double nn = n;
  const double log_g = -std::log(alpha * beta * std::sqrt(2 * std::numbers::pi * nn)) / alpha +
                       alpha * beta * beta * nn;
  ScaleSet s;
  s.g = std::exp(log_g);
  s.t = s.g;
  s.r = std::exp(alpha * alpha * beta * beta * nn / 2);
  s.rho = 1.0 / s.r;
  s.f = s.t / s.g;
  s.m = m;
  s.xi = m * s.r;
  check_scales(s);
  return s;
}

ScaleSet torus_scales(unsigned n, double alpha, double gamma, double m) {
  if (!(alpha > 0 && alpha < 1) || !(gamma > 0 && gamma < 1) || n < 1 || !(m > 0)) {
    throw std::invalid_argument("torus scales need alpha in (0,1), gamma in (0,1), n >= 1, m > 0");
  }
  const double nn = n;
  const double log2n = 2 * nn * std::numbers::ln2;
  ScaleSet s;
  s.t = std::exp(log2n / alpha + (1 - gamma / alpha) * std::log(nn));
  s.g = std::exp(log2n / alpha - (gamma / alpha) * std::log(nn));
  s.rho = std::pow(s.g, -alpha);
  s.r = std::exp(log2n + (1 - gamma) * std::log(nn));
  s.f = s.t / s.g;
  s.m = m;
  s.xi = m * s.r;
  check_scales(s);
  return s;
}

ScaleSet complete_scales(std::uint64_t vertices, double alpha, double m) {
  if (!(alpha > 0 && alpha < 1) || vertices < 2 || !(m > 0)) {
    throw std::invalid_argument("complete scales need alpha in (0,1), N >= 2, m > 0");
  }
  const double nn = static_cast<double>(vertices);
  ScaleSet s;
  s.rho = 1.0 / std::sqrt(nn);
  s.r = std::sqrt(nn);
  s.g = std::pow(nn, 1.0 / (2 * alpha));
  s.t = s.g;
  s.f = s.t / s.g;
  s.m = m;
  s.xi = m * s.r;
  check_scales(s);
  return s;
}

double rem_window_ratio(double alpha, double beta) {
  return alpha * alpha * beta * beta / (2 * std::numbers::ln2);
}

bool rem_window_ok(double alpha, double beta) {
  const double q = rem_window_ratio(alpha, beta);
  return q > 0.75 && q < 1.0;
}

double rem_beta_for_ratio(double alpha, double ratio) {
  return std::sqrt(ratio * 2 * std::numbers::ln2) / alpha;
}

bool torus_gamma_ok(double gamma) { return gamma > 0 && gamma < 1.0 / 6.0; }

void validate(const TrapWindow& w) {
  if (!(w.eps > 0 && w.eps < 1 && w.M > 1)) {
    throw std::invalid_argument("trap window needs 0 < eps < 1 < M");
  }
}

std::vector<VertexId> cloud_members(const Topology& topology, const PoissonCloud& cloud) {
  const std::uint64_t count = topology.vertex_count();
  if (count > (std::uint64_t{1} << 32)) {
    throw std::invalid_argument("cloud_members: graph too large to scan");
  }
  std::vector<VertexId> out;
  for (VertexId v = 0; v < count; ++v) {
    if (cloud.contains(v)) out.push_back(v);
  }
  return out;
}

double rate_function(double x) {
  if (!(x >= 0 && x <= 1)) throw std::invalid_argument("rate_function needs x in [0, 1]");
  const auto xlogx = [](double y) { return y > 0 ? y * std::log(y) : 0.0; };
  return xlogx(x) + xlogx(1 - x) + std::numbers::ln2;
}

double omega_root(double level) {
  if (!(level > 0 && level <= std::numbers::ln2)) {
    throw std::invalid_argument("omega_root needs level in (0, log 2]");
  }
  // I decreases from log 2 at 0 to 0 at 1/2.
  double lo = 0.0;
  double hi = 0.5;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (rate_function(mid) > level) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

DistanceAudit min_distance_audit(const Topology& topology, std::span<const VertexId> cloud,
                                 double bound) {
  DistanceAudit audit;
  audit.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      const double d = static_cast<double>(topology.distance(cloud[i], cloud[j]));
      if (d < audit.min_distance) audit.min_distance = d;
    }
  }
  audit.pass = audit.min_distance >= bound;
  return audit;
}

std::array<double, 3> rem_tail_check(double alpha, double beta, unsigned n, std::uint64_t samples,
                                     std::uint64_t seed) {
  if (samples < 100000) throw std::invalid_argument("rem_tail_check needs at least 1e5 samples");
  const ScaleSet s = rem_scales(n, alpha, beta, 1.0);
  const Landscape land = Landscape::rem(beta, n, seed);
  const double cuts[3] = {s.g, 2 * s.g, 4 * s.g};
  std::array<std::uint64_t, 3> hits{};
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double tau = land.tau(i);
    for (int k = 0; k < 3; ++k) hits[k] += tau >= cuts[k];
  }
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) out[k] = s.r * static_cast<double>(hits[k]) / static_cast<double>(samples);
  return out;
}

}  // namespace trap
