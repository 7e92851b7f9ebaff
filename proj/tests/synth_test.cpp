#include "donut_ssn/synth.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace donut {
namespace {

// Mean edge count of the default Poisson generator, from
// tests/oracles/expected_edges.py.
constexpr double kExpectedPoissonEdges = 420.881249;

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(Spearman, Sanity) {
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {9, 4, 1, 0}), -1.0);
}

TEST(RandomStream, UniformRangeAndDeterminism) {
  RandomStream a(7), b(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
  }
}

TEST(RandomStream, PoissonMoments) {
  RandomStream rng(11);
  for (double mean : {3.0, 100.0, 1200.0}) {
    const int n = 4000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      s += k;
      s2 += k * k;
    }
    const double m = s / n;
    const double var = s2 / n - m * m;
    EXPECT_NEAR(m, mean, 5 * std::sqrt(mean / n)) << mean;
    EXPECT_NEAR(var / mean, 1.0, 0.1) << mean;
  }
}

TEST(RandomStream, NormalMoments) {
  RandomStream rng(5);
  const int n = 20000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    auto [a, b] = rng.normal_pair();
    s += a + b;
    s2 += a * a + b * b;
  }
  EXPECT_NEAR(s / (2 * n), 0.0, 0.03);
  EXPECT_NEAR(s2 / (2 * n), 1.0, 0.03);
}

TEST(ConnectionProbability, Values) {
  EXPECT_DOUBLE_EQ(connection_probability(0.0, 0.9, 0.15), 0.9);
  EXPECT_DOUBLE_EQ(connection_probability(0.15, 0.9, 0.15), 0.9 * std::exp(-1.0));
  EXPECT_LT(connection_probability(0.3, 0.9, 0.15), connection_probability(0.2, 0.9, 0.15));
}

TEST(GeneratePoisson, Deterministic) {
  PoissonSpec spec;
  spec.seed = 99;
  EXPECT_EQ(generate_poisson(spec), generate_poisson(spec));
  PoissonSpec other = spec;
  other.seed = 100;
  EXPECT_FALSE(generate_poisson(spec) == generate_poisson(other));
}

void expect_simple_unit_square(const SpatialNetwork& net) {
  EXPECT_FALSE(net.directed());
  EXPECT_FALSE(net.geographic());
  for (std::size_t i = 0; i < net.nodes().size(); ++i) {
    const Node& n = net.nodes()[i];
    EXPECT_EQ(n.id, "n" + std::to_string(i));
    EXPECT_GE(n.x, 0.0);
    EXPECT_LE(n.x, 1.0);
    EXPECT_GE(n.y, 0.0);
    EXPECT_LE(n.y, 1.0);
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [a, b] : net.endpoints()) {
    EXPECT_LT(a, b);  // no self-loops, emitted in i < j order
    EXPECT_TRUE(seen.insert({a, b}).second);
  }
}

TEST(GeneratePoisson, SimpleGraphInUnitSquare) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PoissonSpec spec;
    spec.seed = seed;
    expect_simple_unit_square(generate_poisson(spec));
  }
}

TEST(GeneratePoisson, MeanEdgeCountMatchesIntegral) {
  double total = 0;
  const int runs = 1000;
  for (int seed = 0; seed < runs; ++seed) {
    PoissonSpec spec;
    spec.seed = static_cast<std::uint64_t>(seed);
    total += static_cast<double>(generate_poisson(spec).edges().size());
  }
  const double mean = total / runs;
  EXPECT_NEAR(mean, kExpectedPoissonEdges, 0.05 * kExpectedPoissonEdges);
}

TEST(GeneratePoisson, BaseProbabilityOneAndHugeScaleIsComplete) {
  PoissonSpec spec;
  spec.intensity = 20;
  spec.base_prob = 1.0;
  spec.decay_scale = 1e300;
  spec.seed = 3;
  const auto net = generate_poisson(spec);
  const auto n = net.nodes().size();
  EXPECT_EQ(net.edges().size(), n * (n - 1) / 2);
}

TEST(GeneratePoisson, DistanceDecayInConnectionFrequency) {
  constexpr int kBins = 10;
  constexpr double kWidth = 0.08;
  std::array<double, kBins> pairs{}, links{};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PoissonSpec spec;
    spec.seed = seed;
    const auto net = generate_poisson(spec);
    std::set<std::pair<std::size_t, std::size_t>> linked(net.endpoints().begin(),
                                                         net.endpoints().end());
    const auto& nodes = net.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        const double d = std::hypot(nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y);
        const auto bin = static_cast<std::size_t>(d / kWidth);
        if (bin >= kBins) continue;
        pairs[bin] += 1;
        if (linked.count({i, j})) links[bin] += 1;
      }
  }
  std::vector<double> dist, freq;
  for (int b = 0; b < kBins; ++b) {
    dist.push_back((b + 0.5) * kWidth);
    freq.push_back(links[b] / pairs[b]);
  }
  EXPECT_LE(spearman(dist, freq), -0.8);
}

TEST(GenerateClustered, Deterministic) {
  ClusterSpec spec;
  spec.seed = 42;
  EXPECT_EQ(generate_clustered(spec), generate_clustered(spec));
  expect_simple_unit_square(generate_clustered(spec));
}

TEST(GenerateClustered, MembershipIsContiguousPerCluster) {
  ClusterSpec spec;
  spec.seed = 1;
  const auto sample = sample_clustered(spec);
  ASSERT_EQ(sample.cluster_of.size(), sample.network.nodes().size());
  EXPECT_TRUE(std::is_sorted(sample.cluster_of.begin(), sample.cluster_of.end()));
}

TEST(GenerateClustered, VanishingSpreadCollapsesOntoCenters) {
  ClusterSpec spec;
  spec.spread = 1e-12;
  spec.seed = 8;
  const auto sample = sample_clustered(spec);
  for (std::size_t i = 0; i < sample.cluster_of.size(); ++i) {
    const Point c = spec.centers[sample.cluster_of[i]];
    EXPECT_NEAR(sample.network.nodes()[i].x, c.x, 1e-9);
    EXPECT_NEAR(sample.network.nodes()[i].y, c.y, 1e-9);
  }
}

// Not guaranteed per instance: seed 13 lands at 0.885. The fixed seed and the
// pooled rate both clear 0.9 and no seed falls far below it.
TEST(GenerateClustered, MostLinksStayInsideClusters) {
  auto intra_fraction = [](std::uint64_t seed, std::size_t* intra_out,
                           std::size_t* total_out) {
    ClusterSpec spec;
    spec.seed = seed;
    const auto sample = sample_clustered(spec);
    std::size_t intra = 0;
    for (auto [a, b] : sample.network.endpoints())
      if (sample.cluster_of[a] == sample.cluster_of[b]) ++intra;
    *intra_out += intra;
    *total_out += sample.network.edges().size();
    return static_cast<double>(intra) /
           static_cast<double>(sample.network.edges().size());
  };
  std::size_t intra = 0, total = 0, scratch_i = 0, scratch_t = 0;
  EXPECT_GE(intra_fraction(42, &scratch_i, &scratch_t), 0.9);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_GE(intra_fraction(seed, &intra, &total), 0.85) << seed;
  EXPECT_GE(static_cast<double>(intra) / static_cast<double>(total), 0.9);
}

TEST(Specs, InvalidRejected) {
  PoissonSpec p;
  p.base_prob = 1.5;
  EXPECT_THROW(generate_poisson(p), Error);
  ClusterSpec c;
  c.centers.clear();
  EXPECT_THROW(generate_clustered(c), Error);
  c = ClusterSpec{};
  c.spread = 0;
  EXPECT_THROW(generate_clustered(c), Error);
}

}  // namespace
}  // namespace donut
