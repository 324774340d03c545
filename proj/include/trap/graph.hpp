#pragma once

// Implicit graph families. Vertices are 64-bit labels and are never
// enumerated, so every operation here is O(1) in the vertex count.
//
//   complete(N)  labels 0..N-1, degree N-1
//   hypercube(n) n-bit masks, bit i set <=> spin i is -1; label 0 is the
//                all-plus configuration. Degree n.
//   torus2d(n)   side L = 2^n, label x | (y << n). Degree 4.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "trap/rng.hpp"

namespace trap {

using VertexId = std::uint64_t;

enum class Family { complete, hypercube, torus2d };

class Topology {
 public:
  static Topology complete(std::uint64_t vertices);
  static Topology hypercube(unsigned dimension);
  static Topology torus2d(unsigned log_side);

  /// Parses "complete:N", "hypercube:n" or "torus2d:n".
  static Topology parse(std::string_view text);
  std::string to_string() const;

  Family family() const { return family_; }
  /// N for complete graphs, n for the hypercube and the torus.
  std::uint64_t size() const { return size_; }

  std::uint64_t vertex_count() const;
  std::uint64_t degree() const;
  bool contains(VertexId v) const { return v < vertex_count(); }

  /// The distinguished start vertex: label 0 in every family.
  static constexpr VertexId origin() { return 0; }

  /// Neighbor selected by 64 random bits; uniform over the degree() neighbors
  /// up to the 2^-64 granularity of scale_to. Never returns v.
  VertexId neighbor(VertexId v, std::uint64_t bits) const {
    switch (family_) {
      case Family::complete: {
        const std::uint64_t u = scale_to(bits, size_ - 1);
        return u < v ? u : u + 1;
      }
      case Family::hypercube:
        return v ^ (std::uint64_t{1} << scale_to(bits, size_));
      case Family::torus2d:
        return torus_step(v, bits >> 62);
    }
    return v;
  }

  VertexId sample_neighbor(VertexId v, Stream& rand) const { return neighbor(v, rand.next()); }

  std::uint64_t distance(VertexId u, VertexId v) const;

  // Torus helpers.
  std::uint64_t side() const { return std::uint64_t{1} << size_; }
  VertexId pack(std::uint64_t x, std::uint64_t y) const { return x | (y << size_); }
  std::pair<std::uint64_t, std::uint64_t> unpack(VertexId v) const {
    return {v & (side() - 1), v >> size_};
  }
  /// dir: 0 = +x, 1 = -x, 2 = +y, 3 = -y.
  VertexId torus_step(VertexId v, std::uint64_t dir) const {
    const std::uint64_t mask = side() - 1;
    std::uint64_t x = v & mask;
    std::uint64_t y = v >> size_;
    switch (dir) {
      case 0: x = (x + 1) & mask; break;
      case 1: x = (x - 1) & mask; break;
      case 2: y = (y + 1) & mask; break;
      default: y = (y - 1) & mask; break;
    }
    return x | (y << size_);
  }

  // Hypercube helpers.
  /// Spin i of v as +1 / -1.
  int spin(VertexId v, unsigned i) const { return (v >> i) & 1u ? -1 : 1; }
  /// The vertex with the first k spins flipped.
  static VertexId flipped_prefix(unsigned k) {
    return k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  }

  bool operator==(const Topology&) const = default;

 private:
  Topology(Family f, std::uint64_t size) : family_(f), size_(size) {}

  Family family_;
  std::uint64_t size_;
};

}  // namespace trap
