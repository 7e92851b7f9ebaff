#ifndef DONUT_SSN_SYNTH_HPP
#define DONUT_SSN_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "donut_ssn/model.hpp"

namespace donut {

// Random streams ----------------------------------------------------------
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so every
// variate below is derived from raw engine output with explicit formulas to
// keep generated networks identical across standard libraries.

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }

  /// Poisson variate by Knuth's product method, with large means split into
  /// independent chunks so exp(-mean) never underflows.
  std::uint64_t poisson(double mean) {
    constexpr double kChunk = 500.0;
    std::uint64_t total = 0;
    while (mean > 0.0) {
      const double m = std::min(mean, kChunk);
      mean -= m;
      const double limit = std::exp(-m);
      double p = uniform_open_low();
      while (p > limit) {
        ++total;
        p *= uniform_open_low();
      }
    }
    return total;
  }

  /// A pair of independent standard normals (Box-Muller).
  std::pair<double, double> normal_pair() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open_low()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(angle), r * std::sin(angle)};
  }

 private:
  std::mt19937_64 engine_;
};

// Specs -------------------------------------------------------------------

struct PoissonSpec {
  double intensity = 100.0;  // expected node count over the unit square
  double decay_scale = 0.15;
  double base_prob = 0.9;
  std::uint64_t seed = 0;

  bool valid() const {
    return intensity > 0.0 && decay_scale > 0.0 && base_prob > 0.0 &&
           base_prob <= 1.0;
  }
};

struct ClusterSpec {
  // Sit mid-sector N, NW and SE of the extent center they produce.
  std::vector<Point> centers{{0.50, 0.85}, {0.15, 0.85}, {0.85, 0.15}};
  double per_cluster_mean = 15.0;
  double spread = 0.05;
  double decay_scale = 0.10;
  double base_prob = 0.9;
  std::uint64_t seed = 0;

  bool valid() const {
    return !centers.empty() && per_cluster_mean > 0.0 && spread > 0.0 &&
           decay_scale > 0.0 && base_prob > 0.0 && base_prob <= 1.0;
  }
};

/// Connection probability beta * exp(-d / lambda).
inline double connection_probability(double distance, double base_prob,
                                     double decay_scale) {
  return base_prob * std::exp(-distance / decay_scale);
}

namespace detail {

inline std::string synth_node_id(std::size_t i) { return "n" + std::to_string(i); }

/// Visits every unordered pair once in (i, j > i) order, drawing exactly one
/// uniform per pair.
inline std::vector<Edge> sample_decay_edges(const std::vector<Node>& nodes,
                                            double base_prob,
                                            double decay_scale,
                                            RandomStream& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const double dx = nodes[j].x - nodes[i].x;
      const double dy = nodes[j].y - nodes[i].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (rng.uniform() < connection_probability(d, base_prob, decay_scale))
        edges.push_back(Edge{nodes[i].id, nodes[j].id});
    }
  }
  return edges;
}

}  // namespace detail

/// Poisson point process on the unit square with distance-decay links.
/// Undirected, planar.
inline SpatialNetwork generate_poisson(const PoissonSpec& spec) {
  if (!spec.valid()) throw Error("invalid Poisson network spec");
  RandomStream rng(spec.seed);
  const auto n = rng.poisson(spec.intensity);
  std::vector<Node> nodes;
  nodes.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    nodes.push_back(Node{detail::synth_node_id(i), x, y});
  }
  auto edges = detail::sample_decay_edges(nodes, spec.base_prob,
                                          spec.decay_scale, rng);
  return validate_network(std::move(nodes), std::move(edges), false, false);
}

/// A clustered network together with the cluster index of every node.
struct ClusteredSample {
  SpatialNetwork network;
  std::vector<std::size_t> cluster_of;
};

inline ClusteredSample sample_clustered(const ClusterSpec& spec) {
  if (!spec.valid()) throw Error("invalid clustered network spec");
  RandomStream rng(spec.seed);
  std::vector<Node> nodes;
  std::vector<std::size_t> membership;
  for (std::size_t c = 0; c < spec.centers.size(); ++c) {
    const auto n = rng.poisson(spec.per_cluster_mean);
    for (std::uint64_t i = 0; i < n; ++i) {
      auto [zx, zy] = rng.normal_pair();
      const double x = std::clamp(spec.centers[c].x + spec.spread * zx, 0.0, 1.0);
      const double y = std::clamp(spec.centers[c].y + spec.spread * zy, 0.0, 1.0);
      nodes.push_back(Node{detail::synth_node_id(nodes.size()), x, y});
      membership.push_back(c);
    }
  }
  auto edges = detail::sample_decay_edges(nodes, spec.base_prob,
                                          spec.decay_scale, rng);
  return {validate_network(std::move(nodes), std::move(edges), false, false),
          std::move(membership)};
}

/// Gaussian clusters clipped to the unit square with distance-decay links.
/// Undirected, planar.
inline SpatialNetwork generate_clustered(const ClusterSpec& spec) {
  return sample_clustered(spec).network;
}

}  // namespace donut

#endif  // DONUT_SSN_SYNTH_HPP
