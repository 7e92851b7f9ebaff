#ifndef DONUT_SSN_AGGREGATE_HPP
#define DONUT_SSN_AGGREGATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "donut_ssn/model.hpp"

namespace donut {

/// Mean Earth radius in metres (IUGG).
inline constexpr double kEarthRadiusMeters = 6371008.8;

/// Angles closer than this (degrees) to a sector boundary are treated as
/// lying on it, so that points constructed at exactly 22.5 + 45k degrees
/// land in the same sector regardless of trig round-off.
inline constexpr double kBoundarySnapDegrees = 1e-9;

/// One directed counting event for an edge seen from an in-viewport origin.
struct Contribution {
  std::size_t edge_index = 0;
  std::string origin;
  Direction direction = Direction::E;
  double length = 0.0;
  double normalized_length = 0.0;
  DistanceBucket bucket = DistanceBucket::Near;
};

struct AggregationConfig {
  Thresholds thresholds;
  bool include_self_loops = false;
  bool geographic = false;
};

/// Sector of `point` as seen from `center`. Sector k (E=0, counter-clockwise)
/// covers [45k - 22.5, 45k + 22.5) degrees; the zero vector maps to E.
inline Direction direction_of(Point point, Point center) {
  const double dx = point.x - center.x;
  const double dy = point.y - center.y;
  if (dx == 0.0 && dy == 0.0) return Direction::E;

  double theta = std::atan2(dy, dx) * (180.0 / std::numbers::pi);
  if (theta < 0.0) theta += 360.0;

  // Position in units of sectors, shifted so boundaries fall on integers.
  double s = (theta + 22.5) / 45.0;
  const double nearest = std::round(s);
  if (std::abs(s - nearest) * 45.0 < kBoundarySnapDegrees) s = nearest;
  const auto k = static_cast<int>(std::floor(s)) % 8;
  return static_cast<Direction>(k);
}

/// Haversine great-circle distance in metres between two lon/lat points
/// given in degrees.
inline double haversine_meters(Point a, Point b) {
  if (std::abs(a.y) > 90.0) throw LatitudeOutOfRange(a.y);
  if (std::abs(b.y) > 90.0) throw LatitudeOutOfRange(b.y);
  constexpr double rad = std::numbers::pi / 180.0;
  const double phi1 = a.y * rad;
  const double phi2 = b.y * rad;
  const double dphi = (b.y - a.y) * rad;
  const double dlambda = (b.x - a.x) * rad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(std::min(1.0, h)));
}

inline double edge_length(const Node& a, const Node& b, bool geographic) {
  if (geographic) return haversine_meters(a.position(), b.position());
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Collects one contribution per (edge, in-viewport origin) pair. Directed
/// edges count from their source only; undirected edges count from each
/// endpoint that is inside the viewport. Lengths always use both true
/// endpoints, even when the far endpoint is outside. normalized_length and
/// bucket are left at their defaults; see normalize_lengths().
inline std::vector<Contribution> select_contributions(
    const SpatialNetwork& network, const Viewport& viewport,
    const AggregationConfig& config) {
  if (!viewport.valid()) throw InvalidViewport();
  const auto& nodes = network.nodes();
  const auto& edges = network.edges();
  const auto& ends = network.endpoints();
  const Point center = viewport.center();

  std::vector<bool> inside(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    inside[i] = viewport.contains(nodes[i].position());

  std::vector<Contribution> out;
  auto emit = [&](std::size_t edge_index, std::size_t origin, double length) {
    out.push_back(Contribution{
        .edge_index = edge_index,
        .origin = nodes[origin].id,
        .direction = direction_of(nodes[origin].position(), center),
        .length = length,
    });
  };

  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = ends[e];
    const bool loop = u == v;
    if (loop && !config.include_self_loops) continue;
    if (!inside[u] && !inside[v]) continue;

    const double length = edge_length(nodes[u], nodes[v], config.geographic);
    if (inside[u]) emit(e, u, length);
    // A loop is a single event even when undirected.
    if (!network.directed() && !loop && inside[v]) emit(e, v, length);
  }
  return out;
}

struct LengthRange {
  double min = 0.0;
  double max = 0.0;
};

/// Min-max normalizes the raw lengths in place. All lengths equal (including
/// a single contribution) normalizes to 0. Returns the observed range, or
/// nothing for an empty input.
inline std::optional<LengthRange> normalize_lengths(
    std::span<Contribution> contributions) {
  if (contributions.empty()) return std::nullopt;
  LengthRange range{contributions[0].length, contributions[0].length};
  for (const auto& c : contributions) {
    range.min = std::min(range.min, c.length);
    range.max = std::max(range.max, c.length);
  }
  const double span = range.max - range.min;
  for (auto& c : contributions) {
    c.normalized_length = span > 0.0 ? (c.length - range.min) / span : 0.0;
    // Guards against round-off nudging the maximum past 1.
    c.normalized_length = std::clamp(c.normalized_length, 0.0, 1.0);
  }
  return range;
}

inline DistanceBucket bucket_of(double normalized_length,
                                const Thresholds& thresholds) {
  if (normalized_length <= thresholds.near_max) return DistanceBucket::Near;
  if (normalized_length <= thresholds.medium_max) return DistanceBucket::Medium;
  return DistanceBucket::Far;
}

/// Full pipeline: select, normalize over the selection, bucket, count.
inline DonutAggregate aggregate_donut(const SpatialNetwork& network,
                                      const Viewport& viewport,
                                      const AggregationConfig& config) {
  if (!config.thresholds.valid()) throw InvalidThresholds();

  auto contributions = select_contributions(network, viewport, config);
  const auto range = normalize_lengths(contributions);

  DonutAggregate agg;
  agg.thresholds = config.thresholds;
  agg.viewport = viewport;
  agg.directed = network.directed();
  for (auto& c : contributions) {
    c.bucket = bucket_of(c.normalized_length, config.thresholds);
    ++agg.at(c.direction, c.bucket);
  }
  agg.contribution_total = contributions.size();
  if (range) {
    agg.length_min = range->min;
    agg.length_max = range->max;
  }
  for (const Node& n : network.nodes())
    if (viewport.contains(n.position())) ++agg.node_count;
  return agg;
}

/// Convenience overload taking the geographic flag from the network.
inline DonutAggregate aggregate_donut(const SpatialNetwork& network,
                                      const Viewport& viewport,
                                      const Thresholds& thresholds = {},
                                      bool include_self_loops = false) {
  return aggregate_donut(network, viewport,
                         AggregationConfig{thresholds, include_self_loops,
                                           network.geographic()});
}

/// Entry point shared by the CLI and the HTTP service: aggregates over `bbox`,
/// or over the full network extent when no bbox is given.
inline DonutAggregate donut_for(const SpatialNetwork& network,
                                const std::optional<Viewport>& bbox,
                                const Thresholds& thresholds,
                                bool include_self_loops) {
  if (!thresholds.valid()) throw InvalidThresholds();
  const Viewport viewport = bbox ? *bbox : extent_of(network);
  return aggregate_donut(network, viewport, thresholds, include_self_loops);
}

}  // namespace donut

#endif  // DONUT_SSN_AGGREGATE_HPP
