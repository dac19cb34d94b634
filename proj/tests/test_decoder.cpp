#include <gtest/gtest.h>

#include <bit>
#include <functional>
#include <random>

#include "gladiator/blossom.hpp"
#include "gladiator/decoder.hpp"

using namespace gladiator;

namespace {

MatchingProblem random_problem(std::mt19937& rng, int n, double density) {
  MatchingProblem p;
  std::uniform_int_distribution<int> cost(1, 12);
  std::bernoulli_distribution keep(density);
  for (int i = 0; i < n; ++i) p.boundary_cost.push_back(cost(rng));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (keep(rng)) p.edges.push_back({i, j, cost(rng)});
  return p;
}

bool valid_matching(const std::vector<int>& mate) {
  for (std::size_t i = 0; i < mate.size(); ++i)
    if (mate[i] >= 0 && mate[static_cast<std::size_t>(mate[i])] != static_cast<int>(i)) return false;
  return true;
}

// Brute-force maximum weight over all matchings of a small graph.
long long brute_max_weight(const std::vector<WeightedEdge>& edges) {
  long long best = 0;
  std::function<void(std::size_t, std::uint32_t, long long)> rec = [&](std::size_t k, std::uint32_t used,
                                                                       long long w) {
    best = std::max(best, w);
    for (std::size_t e = k; e < edges.size(); ++e) {
      const std::uint32_t m = (1u << edges[e].i) | (1u << edges[e].j);
      if (used & m) continue;
      rec(e + 1, used | m, w + edges[e].weight);
    }
  };
  rec(0, 0, 0);
  return best;
}

// Final-row syndrome for a data-only error with no measurement noise.
ShotSyndrome data_error_syndrome(const CodeLayout& L, int rounds, int when, const std::vector<QubitId>& xs,
                                 const std::vector<QubitId>& zs) {
  NoiseParams n;
  n.p = 0.0;
  n.lr = 0.0;
  Simulator sim(L, n);
  SimState s = sim.new_shot(1, 0, false);
  std::vector<std::vector<std::uint8_t>> dets;
  for (int r = 0; r < rounds; ++r) {
    if (r == when) {
      for (QubitId q : xs) s.frame.flip_x(q);
      for (QubitId q : zs) s.frame.flip_z(q);
    }
    dets.push_back(sim.run_round(s, {}).detectors);
  }
  if (when >= rounds) {
    for (QubitId q : xs) s.frame.flip_x(q);
    for (QubitId q : zs) s.frame.flip_z(q);
  }
  const std::vector<std::uint8_t> last = s.last_measurement;
  return make_syndrome(L, dets, last, sim.final_readout(s));
}

}  // namespace

TEST(Blossom, MatchesBruteForceOnSmallGraphs) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    std::vector<WeightedEdge> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng() % 3 == 0) edges.push_back({i, j, static_cast<long long>(1 + rng() % 20)});
    const auto mate = max_weight_matching(n, edges);
    ASSERT_EQ(mate.size(), static_cast<std::size_t>(n));
    ASSERT_TRUE(valid_matching(mate));
    long long w = 0;
    for (const auto& e : edges)
      if (mate[static_cast<std::size_t>(e.i)] == e.j) w += e.weight;
    EXPECT_EQ(w, brute_max_weight(edges)) << trial;
  }
}

TEST(Blossom, OddCycleNeedsBlossom) {
  // Triangle plus pendant: the best matching uses the pendant edge.
  const std::vector<WeightedEdge> edges{{0, 1, 5}, {1, 2, 5}, {0, 2, 5}, {2, 3, 4}};
  const auto mate = max_weight_matching(4, edges);
  EXPECT_EQ(mate[2], 3);
  EXPECT_TRUE(mate[0] == 1 && mate[1] == 0);
  EXPECT_THROW(max_weight_matching(2, {{0, 5, 1}}), std::invalid_argument);
}

TEST(Blossom, MaxCardinality) {
  const std::vector<WeightedEdge> edges{{0, 1, 2}, {1, 2, 10}, {2, 3, 2}};
  const auto heavy = max_weight_matching(4, edges);
  EXPECT_EQ(heavy[1], 2);
  const auto full = max_weight_matching(4, edges, true);
  EXPECT_EQ(full[0], 1);
  EXPECT_EQ(full[2], 3);
}

TEST(Matching, BlossomAgreesWithSubsetDp) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 14);
    const MatchingProblem p = random_problem(rng, n, 0.2 + 0.6 * (trial % 5) / 4.0);
    const auto dp = solve_matching_dp(p);
    const auto bl = solve_matching_blossom(p);
    const auto mixed = solve_matching(p);
    ASSERT_TRUE(valid_matching(bl));
    ASSERT_TRUE(valid_matching(mixed));
    EXPECT_EQ(matching_cost(p, bl), matching_cost(p, dp)) << trial;
    EXPECT_EQ(matching_cost(p, mixed), matching_cost(p, dp)) << trial;
  }
}

TEST(Matching, LargeInstanceIsConsistent) {
  std::mt19937 rng(3);
  const MatchingProblem p = random_problem(rng, 200, 0.05);
  const auto bl = solve_matching_blossom(p);
  ASSERT_TRUE(valid_matching(bl));
  long base = 0;
  for (int c : p.boundary_cost) base += c;
  EXPECT_LE(matching_cost(p, bl), base);
  EXPECT_EQ(matching_cost(p, solve_matching(p)), matching_cost(p, bl));
  EXPECT_THROW(solve_matching_dp(random_problem(rng, 21, 0.1)), std::invalid_argument);
}

TEST(SurfaceDecoderTest, QuietShotHasNoFailure) {
  const CodeLayout L = build_surface_code(5);
  const ShotSyndrome s = data_error_syndrome(L, 5, 99, {}, {});
  for (const auto& row : s.detectors)
    for (auto d : row) EXPECT_EQ(d, 0);
  EXPECT_FALSE(s.x_flip);
  EXPECT_FALSE(s.z_flip);
  EXPECT_FALSE(decode_surface(s, L));
  EXPECT_THROW(SurfaceDecoder(build_color_code(3)), std::invalid_argument);
}

TEST(SurfaceDecoderTest, CorrectsEverySingleDataError) {
  for (int d : {3, 5}) {
    const CodeLayout L = build_surface_code(d);
    const SurfaceDecoder dec(L);
    for (int when : {0, 2, 4}) {
      for (QubitId q = 0; q < L.n_data(); ++q) {
        EXPECT_FALSE(dec.logical_failure(data_error_syndrome(L, 4, when, {q}, {}))) << d << " X" << q;
        EXPECT_FALSE(dec.logical_failure(data_error_syndrome(L, 4, when, {}, {q}))) << d << " Z" << q;
        EXPECT_FALSE(dec.logical_failure(data_error_syndrome(L, 4, when, {q}, {q}))) << d << " Y" << q;
      }
    }
  }
}

TEST(SurfaceDecoderTest, CorrectsSingleMeasurementErrors) {
  const CodeLayout L = build_surface_code(3);
  const SurfaceDecoder dec(L);
  for (int t = 0; t < 4; ++t)
    for (std::size_t a = 0; a < L.n_ancilla(); ++a) {
      ShotSyndrome s = data_error_syndrome(L, 5, 99, {}, {});
      s.detectors[static_cast<std::size_t>(t)][a] ^= 1;
      s.detectors[static_cast<std::size_t>(t) + 1][a] ^= 1;
      EXPECT_FALSE(dec.logical_failure(s)) << t << " " << a;
    }
}

TEST(SurfaceDecoderTest, LogicalOperatorsAreFailures) {
  const CodeLayout L = build_surface_code(3);
  const SurfaceDecoder dec(L);
  // The full logical is invisible to the checks.
  const ShotSyndrome full = data_error_syndrome(L, 3, 1, L.logical_x, {});
  EXPECT_TRUE(full.x_flip);
  for (const auto& row : full.detectors)
    for (auto d : row) EXPECT_EQ(d, 0);
  EXPECT_TRUE(dec.logical_failure(full));
  // Two thirds of it decode to the wrong coset.
  const std::vector<QubitId> chain{L.logical_x[0], L.logical_x[1]};
  EXPECT_TRUE(dec.logical_failure(data_error_syndrome(L, 3, 1, chain, {})));
  const std::vector<QubitId> zchain{L.logical_z[1], L.logical_z[2]};
  EXPECT_TRUE(dec.logical_failure(data_error_syndrome(L, 3, 1, {}, zchain)));
}

TEST(SurfaceDecoderTest, MatchesMaximumLikelihoodOnLowWeightErrors) {
  const CodeLayout L = build_surface_code(3);
  const SurfaceDecoder dec(L);
  for (CheckType type : {CheckType::Z, CheckType::X}) {
    const MlLookupDecoder ml(L, type);
    std::vector<std::size_t> checks;
    for (std::size_t a = 0; a < L.n_ancilla(); ++a)
      if (L.ancilla_type[a] == type) checks.push_back(a);
    int compared = 0;
    for (std::uint32_t e = 0; e < (1u << L.n_data()); ++e) {
      if (std::popcount(e) > 2) continue;
      const std::uint32_t syn = ml.syndrome_of(e);
      std::vector<std::pair<std::size_t, int>> defects;
      for (std::size_t i = 0; i < checks.size(); ++i)
        if ((syn >> i) & 1u) defects.emplace_back(checks[i], 0);
      const bool predicted = dec.predict(type, defects);
      if (std::popcount(e) <= 1) EXPECT_EQ(predicted, ml.logical_of(e)) << e;
      if (ml.ambiguous(syn)) continue;
      EXPECT_EQ(predicted, ml.predict(syn)) << "error " << e;
      ++compared;
    }
    EXPECT_GT(compared, 20);
  }
}

TEST(SurfaceDecoderTest, SyndromeFinalRowUsesReadout) {
  const CodeLayout L = build_surface_code(3);
  // An X error after the last round is seen only through the data readout.
  const ShotSyndrome s = data_error_syndrome(L, 3, 3, {4}, {});
  for (std::size_t t = 0; t + 1 < s.detectors.size(); ++t)
    for (auto d : s.detectors[t]) EXPECT_EQ(d, 0);
  int fired = 0;
  for (std::size_t a = 0; a < L.n_ancilla(); ++a) fired += s.detectors.back()[a];
  EXPECT_EQ(fired, 2);
  EXPECT_FALSE(decode_surface(s, L));
}
