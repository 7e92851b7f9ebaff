#include "donut_ssn/model.hpp"

#include <gtest/gtest.h>

#include <limits>

#include "random_networks.hpp"

namespace donut {
namespace {

TEST(ValidateNetwork, AcceptsMinimalNetwork) {
  auto net = validate_network({{"A", 0, 0}, {"B", 1, 0}}, {{"A", "B"}}, false, false);
  EXPECT_EQ(net.nodes().size(), 2u);
  EXPECT_EQ(net.edges().size(), 1u);
  EXPECT_FALSE(net.directed());
  EXPECT_FALSE(net.geographic());
  EXPECT_EQ(net.endpoints()[0], (std::pair<std::size_t, std::size_t>{0, 1}));
}

TEST(ValidateNetwork, RejectsDuplicateNodeId) {
  try {
    validate_network({{"A", 0, 0}, {"A", 1, 1}}, {}, false, false);
    FAIL() << "expected DuplicateNodeId";
  } catch (const DuplicateNodeId& e) {
    EXPECT_EQ(e.id(), "A");
  }
}

TEST(ValidateNetwork, RejectsDanglingEdge) {
  try {
    validate_network({{"A", 0, 0}, {"B", 1, 0}}, {{"A", "B"}, {"A", "C"}}, true,
                     false);
    FAIL() << "expected DanglingEdge";
  } catch (const DanglingEdge& e) {
    EXPECT_EQ(e.missing_id(), "C");
    EXPECT_EQ(e.edge_index(), 1u);
  }
}

TEST(ValidateNetwork, RejectsNonFiniteCoordinates) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate_network({{"A", nan, 0}}, {}, false, false),
               NonFiniteCoordinate);
  EXPECT_THROW(validate_network({{"A", 0, -inf}}, {}, false, false),
               NonFiniteCoordinate);
}

TEST(ValidateNetwork, RejectsEmptyId) {
  EXPECT_THROW(validate_network({{"", 0, 0}}, {}, false, false), Error);
}

TEST(ValidateNetwork, GeographicLatitudeRange) {
  EXPECT_NO_THROW(validate_network({{"A", 179, 90}, {"B", -180, -90}}, {}, false, true));
  EXPECT_THROW(validate_network({{"A", 0, 90.5}}, {}, false, true), LatitudeOutOfRange);
  // Planar mode has no such restriction.
  EXPECT_NO_THROW(validate_network({{"A", 0, 900}}, {}, false, false));
}

TEST(ValidateNetwork, KeepsSelfLoopsAndDuplicateEdges) {
  auto net = validate_network({{"A", 0, 0}, {"B", 1, 0}},
                              {{"A", "A"}, {"A", "B"}, {"A", "B"}}, false, false);
  EXPECT_EQ(net.edges().size(), 3u);
  EXPECT_TRUE(net.edges()[0].is_self_loop());
}

TEST(ExtentOf, TightBox) {
  auto net = validate_network({{"a", 0, 0}, {"b", 2, 1}}, {}, false, false);
  EXPECT_EQ(extent_of(net), (Viewport{0, 0, 2, 1}));
}

TEST(ExtentOf, SingleNodeIsDegenerate) {
  auto net = validate_network({{"a", 3, 4}}, {}, false, false);
  EXPECT_EQ(extent_of(net), (Viewport{3, 4, 3, 4}));
}

TEST(ExtentOf, MixedSigns) {
  auto net = validate_network({{"a", -1, 5}, {"b", 2, -3}, {"c", 0, 0}}, {}, false,
                              false);
  EXPECT_EQ(extent_of(net), (Viewport{-1, -3, 2, 5}));
}

TEST(ExtentOf, EmptyNetworkThrows) {
  EXPECT_THROW(extent_of(SpatialNetwork{}), EmptyNetwork);
}

TEST(ExtentOf, TranslationEquivariant) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto net = testing_support::random_network(seed);
    // Powers of two keep the shifted coordinates exact.
    const double dx = 0.25 * static_cast<double>(seed % 7) - 1.0;
    const double dy = -2.0 + 0.5 * static_cast<double>(seed % 5);
    std::vector<Node> moved;
    for (const auto& n : net.nodes()) moved.push_back({n.id, n.x + dx, n.y + dy});
    auto shifted = validate_network(moved, net.edges(), false, false);
    const Viewport a = extent_of(net);
    const Viewport b = extent_of(shifted);
    EXPECT_DOUBLE_EQ(b.min_x, a.min_x + dx);
    EXPECT_DOUBLE_EQ(b.min_y, a.min_y + dy);
    EXPECT_DOUBLE_EQ(b.max_x, a.max_x + dx);
    EXPECT_DOUBLE_EQ(b.max_y, a.max_y + dy);
  }
}

TEST(Viewport, ClosedContainmentAndCenter) {
  Viewport v{-1, -1, 2, 1};
  EXPECT_EQ(v.center(), (Point{0.5, 0}));
  EXPECT_TRUE(v.contains({-1, -1}));
  EXPECT_TRUE(v.contains({2, 1}));
  EXPECT_FALSE(v.contains({2.0000001, 0}));
  EXPECT_THROW(checked_viewport(1, 0, 0, 1), InvalidViewport);
}

TEST(Thresholds, Validity) {
  EXPECT_TRUE(Thresholds{}.valid());
  EXPECT_EQ(Thresholds{}.near_max, 0.35);
  EXPECT_EQ(Thresholds{}.medium_max, 0.60);
  EXPECT_TRUE((Thresholds{0.5, 0.5}.valid()));
  EXPECT_FALSE((Thresholds{0.5, 0.4}.valid()));
  EXPECT_FALSE((Thresholds{-0.1, 0.4}.valid()));
  EXPECT_FALSE((Thresholds{0.1, 1.1}.valid()));
  EXPECT_THROW(checked_thresholds(0.7, 0.6), InvalidThresholds);
}

TEST(Direction, CanonicalOrderAndNames) {
  std::string joined;
  for (Direction d : kCanonicalDirections) joined += std::string(to_string(d)) + " ";
  EXPECT_EQ(joined, "N NE E SE S SW W NW ");
  EXPECT_EQ(rotate_ccw(Direction::E), Direction::NE);
  EXPECT_EQ(rotate_ccw(Direction::SE), Direction::E);
  EXPECT_EQ(opposite(Direction::NE), Direction::SW);
  EXPECT_EQ(direction_from_string("NW"), Direction::NW);
  EXPECT_FALSE(direction_from_string("X").has_value());
}

}  // namespace
}  // namespace donut
