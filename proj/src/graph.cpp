#include "trap/graph.hpp"

#include <bit>
#include <charconv>
#include <stdexcept>

namespace trap {

namespace {

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t torus_gap(std::uint64_t a, std::uint64_t b, std::uint64_t side) {
  const std::uint64_t d = a > b ? a - b : b - a;
  return d < side - d ? d : side - d;
}

}  // namespace

Topology Topology::complete(std::uint64_t vertices) {
  if (vertices < 2) throw std::invalid_argument("complete graph needs at least 2 vertices");
  return Topology(Family::complete, vertices);
}

Topology Topology::hypercube(unsigned dimension) {
  if (dimension < 1 || dimension > 63) {
    throw std::invalid_argument("hypercube dimension must be in [1, 63]");
  }
  return Topology(Family::hypercube, dimension);
}

Topology Topology::torus2d(unsigned log_side) {
  if (log_side < 1 || log_side > 31) {
    throw std::invalid_argument("torus log-side must be in [1, 31]");
  }
  return Topology(Family::torus2d, log_side);
}

Topology Topology::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("topology must look like family:size, got '" + std::string(text) + "'");
  }
  const auto family = text.substr(0, colon);
  const auto size = parse_u64(text.substr(colon + 1), "topology size");
  if (family == "complete") return complete(size);
  if (family == "hypercube") {
    if (size > 63) throw std::invalid_argument("hypercube dimension must be in [1, 63]");
    return hypercube(static_cast<unsigned>(size));
  }
  if (family == "torus2d") {
    if (size > 31) throw std::invalid_argument("torus log-side must be in [1, 31]");
    return torus2d(static_cast<unsigned>(size));
  }
  throw std::invalid_argument("unknown topology family '" + std::string(family) + "'");
}

std::string Topology::to_string() const {
  switch (family_) {
    case Family::complete: return "complete:" + std::to_string(size_);
    case Family::hypercube: return "hypercube:" + std::to_string(size_);
    case Family::torus2d: return "torus2d:" + std::to_string(size_);
  }
  return {};
}

std::uint64_t Topology::vertex_count() const {
  switch (family_) {
    case Family::complete: return size_;
    case Family::hypercube: return std::uint64_t{1} << size_;
    case Family::torus2d: return std::uint64_t{1} << (2 * size_);
  }
  return 0;
}

std::uint64_t Topology::degree() const {
  switch (family_) {
    case Family::complete: return size_ - 1;
    case Family::hypercube: return size_;
    case Family::torus2d: return 4;
  }
  return 0;
}

std::uint64_t Topology::distance(VertexId u, VertexId v) const {
  switch (family_) {
    case Family::complete: return u == v ? 0 : 1;
    case Family::hypercube: return static_cast<std::uint64_t>(std::popcount(u ^ v));
    case Family::torus2d: {
      const auto [ux, uy] = unpack(u);
      const auto [vx, vy] = unpack(v);
      return torus_gap(ux, vx, side()) + torus_gap(uy, vy, side());
    }
  }
  return 0;
}

}  // namespace trap
