#ifndef DONUT_SSN_MODEL_HPP
#define DONUT_SSN_MODEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace donut {

// Errors -----------------------------------------------------------------

/// Base class of every error raised by the library. `what()` is a
/// human-readable message suitable for stderr or an HTTP 400 body.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateNodeId : public Error {
 public:
  explicit DuplicateNodeId(std::string id)
      : Error("duplicate node id \"" + id + "\""), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class DanglingEdge : public Error {
 public:
  DanglingEdge(std::string missing_id, std::size_t edge_index)
      : Error("edge " + std::to_string(edge_index) +
              " references unknown node \"" + missing_id + "\""),
        missing_id_(std::move(missing_id)),
        edge_index_(edge_index) {}
  const std::string& missing_id() const { return missing_id_; }
  std::size_t edge_index() const { return edge_index_; }

 private:
  std::string missing_id_;
  std::size_t edge_index_;
};

class NonFiniteCoordinate : public Error {
 public:
  explicit NonFiniteCoordinate(std::string id)
      : Error("node \"" + id + "\" has a non-finite coordinate"),
        id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class LatitudeOutOfRange : public Error {
 public:
  explicit LatitudeOutOfRange(double latitude)
      : Error("latitude " + std::to_string(latitude) +
              " outside [-90, 90]"),
        latitude_(latitude) {}
  double latitude() const { return latitude_; }

 private:
  double latitude_;
};

class EmptyNetwork : public Error {
 public:
  EmptyNetwork() : Error("network has no nodes") {}
};

class InvalidThresholds : public Error {
 public:
  InvalidThresholds()
      : Error("thresholds must satisfy 0 <= near_max <= medium_max <= 1") {}
};

class InvalidViewport : public Error {
 public:
  InvalidViewport()
      : Error("viewport must be finite with min_x <= max_x and min_y <= max_y") {}
};

// Plain value types -------------------------------------------------------

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Node {
  std::string id;
  double x = 0.0;
  double y = 0.0;

  Point position() const { return {x, y}; }
  friend bool operator==(const Node&, const Node&) = default;
};

/// An edge from node `src` (u) to node `dst` (v). For undirected networks
/// the order carries no meaning.
struct Edge {
  std::string src;
  std::string dst;

  bool is_self_loop() const { return src == dst; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Axis-aligned region of interest. Containment is closed on all sides.
struct Viewport {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  Point center() const {
    return {(min_x + max_x) / 2.0, (min_y + max_y) / 2.0};
  }
  bool contains(Point p) const {
    return min_x <= p.x && p.x <= max_x && min_y <= p.y && p.y <= max_y;
  }
  bool valid() const {
    return std::isfinite(min_x) && std::isfinite(min_y) &&
           std::isfinite(max_x) && std::isfinite(max_y) && min_x <= max_x &&
           min_y <= max_y;
  }

  friend bool operator==(const Viewport&, const Viewport&) = default;
};

inline Viewport checked_viewport(double min_x, double min_y, double max_x,
                                 double max_y) {
  Viewport v{min_x, min_y, max_x, max_y};
  if (!v.valid()) throw InvalidViewport();
  return v;
}

/// Compass sectors. The numeric value is the counter-clockwise sector index
/// starting at East, so sector k is centered on 45k degrees.
enum class Direction : std::uint8_t { E = 0, NE, N, NW, W, SW, S, SE };

inline constexpr std::size_t kDirectionCount = 8;

/// Serialization order: clockwise from North.
inline constexpr std::array<Direction, kDirectionCount> kCanonicalDirections{
    Direction::N, Direction::NE, Direction::E, Direction::SE,
    Direction::S, Direction::SW, Direction::W, Direction::NW};

inline constexpr std::string_view to_string(Direction d) {
  constexpr std::array<std::string_view, kDirectionCount> names{
      "E", "NE", "N", "NW", "W", "SW", "S", "SE"};
  return names[static_cast<std::size_t>(d)];
}

inline std::optional<Direction> direction_from_string(std::string_view s) {
  for (std::size_t k = 0; k < kDirectionCount; ++k) {
    auto d = static_cast<Direction>(k);
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

inline constexpr Direction rotate_ccw(Direction d, int steps = 1) {
  int k = (static_cast<int>(d) + steps) % 8;
  if (k < 0) k += 8;
  return static_cast<Direction>(k);
}

inline constexpr Direction opposite(Direction d) { return rotate_ccw(d, 4); }

enum class DistanceBucket : std::uint8_t { Near = 0, Medium, Far };

inline constexpr std::size_t kBucketCount = 3;
inline constexpr std::array<DistanceBucket, kBucketCount> kBuckets{
    DistanceBucket::Near, DistanceBucket::Medium, DistanceBucket::Far};

inline constexpr std::string_view to_string(DistanceBucket b) {
  constexpr std::array<std::string_view, kBucketCount> names{"near", "medium",
                                                             "far"};
  return names[static_cast<std::size_t>(b)];
}

/// Upper bounds (inclusive) of the Near and Medium buckets on the
/// normalized length scale.
struct Thresholds {
  double near_max = 0.35;
  double medium_max = 0.60;

  bool valid() const {
    return 0.0 <= near_max && near_max <= medium_max && medium_max <= 1.0;
  }
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

inline Thresholds checked_thresholds(double near_max, double medium_max) {
  Thresholds t{near_max, medium_max};
  if (!t.valid()) throw InvalidThresholds();
  return t;
}

// SpatialNetwork ----------------------------------------------------------

/// A validated, immutable geolocated graph. Construct via validate_network().
class SpatialNetwork {
 public:
  SpatialNetwork() = default;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool directed() const { return directed_; }
  bool geographic() const { return geographic_; }

  /// Index of the node with the given id, if any.
  std::optional<std::size_t> find(std::string_view id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].id == id) return i;
    return std::nullopt;
  }

  /// Endpoint indices of each edge, parallel to edges().
  const std::vector<std::pair<std::size_t, std::size_t>>& endpoints() const {
    return endpoints_;
  }

  friend bool operator==(const SpatialNetwork& a, const SpatialNetwork& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ &&
           a.directed_ == b.directed_ && a.geographic_ == b.geographic_;
  }

 private:
  friend SpatialNetwork validate_network(std::vector<Node>, std::vector<Edge>,
                                         bool, bool);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
  bool directed_ = false;
  bool geographic_ = false;
};

/// Checks every network invariant and returns the immutable network.
/// Geographic networks additionally require |y| <= 90.
inline SpatialNetwork validate_network(std::vector<Node> nodes,
                                       std::vector<Edge> edges, bool directed,
                                       bool geographic) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (!std::isfinite(n.x) || !std::isfinite(n.y))
      throw NonFiniteCoordinate(n.id);
    if (geographic && std::abs(n.y) > 90.0) throw LatitudeOutOfRange(n.y);
    if (n.id.empty()) throw Error("node " + std::to_string(i) + " has an empty id");
    if (!index.emplace(n.id, i).second) throw DuplicateNodeId(n.id);
  }

  std::vector<std::pair<std::size_t, std::size_t>> endpoints;
  endpoints.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto src = index.find(edges[i].src);
    if (src == index.end()) throw DanglingEdge(edges[i].src, i);
    auto dst = index.find(edges[i].dst);
    if (dst == index.end()) throw DanglingEdge(edges[i].dst, i);
    endpoints.emplace_back(src->second, dst->second);
  }

  SpatialNetwork net;
  net.nodes_ = std::move(nodes);
  net.edges_ = std::move(edges);
  net.endpoints_ = std::move(endpoints);
  net.directed_ = directed;
  net.geographic_ = geographic;
  return net;
}

/// Tight bounding box of all node coordinates.
inline Viewport extent_of(const SpatialNetwork& network) {
  const auto& nodes = network.nodes();
  if (nodes.empty()) throw EmptyNetwork();
  Viewport v{nodes[0].x, nodes[0].y, nodes[0].x, nodes[0].y};
  for (const Node& n : nodes) {
    v.min_x = std::min(v.min_x, n.x);
    v.min_y = std::min(v.min_y, n.y);
    v.max_x = std::max(v.max_x, n.x);
    v.max_y = std::max(v.max_y, n.y);
  }
  return v;
}

// DonutAggregate ----------------------------------------------------------

/// The 8 x 3 sector/bucket count matrix plus its context.
struct DonutAggregate {
  std::array<std::array<std::uint64_t, kBucketCount>, kDirectionCount> counts{};
  std::uint64_t node_count = 0;
  std::uint64_t contribution_total = 0;
  std::optional<double> length_min;
  std::optional<double> length_max;
  Thresholds thresholds;
  Viewport viewport;
  bool directed = false;

  std::uint64_t& at(Direction d, DistanceBucket b) {
    return counts[static_cast<std::size_t>(d)][static_cast<std::size_t>(b)];
  }
  std::uint64_t at(Direction d, DistanceBucket b) const {
    return counts[static_cast<std::size_t>(d)][static_cast<std::size_t>(b)];
  }
  std::uint64_t sector_total(Direction d) const {
    std::uint64_t s = 0;
    for (auto b : kBuckets) s += at(d, b);
    return s;
  }
  std::uint64_t bucket_total(DistanceBucket b) const {
    std::uint64_t s = 0;
    for (std::size_t k = 0; k < kDirectionCount; ++k)
      s += at(static_cast<Direction>(k), b);
    return s;
  }
  std::uint64_t max_cell() const {
    std::uint64_t m = 0;
    for (const auto& row : counts)
      for (auto c : row) m = std::max(m, c);
    return m;
  }

  friend bool operator==(const DonutAggregate&, const DonutAggregate&) = default;
};

}  // namespace donut

#endif  // DONUT_SSN_MODEL_HPP
