#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "gladiator/errors.hpp"
#include "gladiator/specgraph.hpp"

using namespace gladiator;

namespace {

NoiseParams noise_at(double p, double lr) {
  NoiseParams n;
  n.p = p;
  n.lr = lr;
  return n;
}

std::map<std::uint32_t, double> leakage_outcomes(const std::vector<Fault>& faults) {
  std::map<std::uint32_t, double> w;
  for (const auto& f : faults)
    if (f.label == EdgeLabel::Leakage)
      for (const auto& [bits, weight] : f.outcomes) w[bits] += weight;
  return w;
}

const Fault* find_fault(const std::vector<Fault>& faults, const std::string& desc) {
  for (const auto& f : faults)
    if (f.description == desc) return &f;
  return nullptr;
}

long binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(WindowKey, RelativeToPrecedingMeasurement) {
  // Detectors d1 = 0011, d2 = 1100: measurements go 0011 then 1111.
  EXPECT_EQ(window_key(0b0011, 0b1100, 4), 0b0011'1111u);
  EXPECT_EQ(window_key(0b0011, 0b0110, 4), 0b0011'0101u);
  EXPECT_EQ(window_key(0, 0b1001, 4), 0b1001u);
  for (std::uint32_t d = 0; d < 256; ++d)
    EXPECT_EQ(window_key_to_detectors(window_key(d >> 4, d & 15u, 4), 4), d);
}

TEST(PatternKey, Formatting) {
  EXPECT_EQ((PatternKey{4, 1, 0b0110}.str()), "0110");
  EXPECT_EQ((PatternKey{4, 2, 0b0011'0101}.str()), "0011 0101");
  EXPECT_EQ((PatternKey{3, 2, 0b101'001}.str()), "101 001");
}

TEST(FaultEnumeration, LeakageBeforeCnot3) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  const auto faults = enumerate_fault_locations(4, n, 1);
  const Fault* f = find_fault(faults, "data leak before CNOT 3");
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->label, EdgeLabel::Leakage);
  ASSERT_EQ(f->outcomes.size(), 4u);
  std::vector<std::uint32_t> bits;
  for (const auto& [b, w] : f->outcomes) {
    bits.push_back(b);
    EXPECT_DOUBLE_EQ(w, n.p_leak() / 4);
  }
  EXPECT_EQ(bits, (std::vector<std::uint32_t>{0b0000, 0b0001, 0b0010, 0b0011}));
}

TEST(FaultEnumeration, LeakageBeforeEachCnot) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  for (int a = 1; a <= 6; ++a) {
    const auto faults = enumerate_fault_locations(a, n, 1);
    for (int k = 1; k <= a; ++k) {
      const Fault* f = find_fault(faults, "data leak before CNOT " + std::to_string(k));
      ASSERT_NE(f, nullptr);
      EXPECT_EQ(f->outcomes.size(), std::size_t{1} << (a - k + 1));
      EXPECT_NEAR(f->weight(), n.p_leak(), 1e-18);
      for (const auto& [b, w] : f->outcomes) EXPECT_LT(b, 1u << (a - k + 1));
    }
    const Fault* late = find_fault(faults, "data leak after CNOT " + std::to_string(a));
    ASSERT_NE(late, nullptr);
    ASSERT_EQ(late->outcomes.size(), 1u);
    EXPECT_EQ(late->outcomes[0].first, 0u);
  }
}

TEST(FaultEnumeration, LeakageWeightOf0110) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  const auto w = leakage_outcomes(enumerate_fault_locations(4, n, 1));
  EXPECT_NEAR(w.at(0b0110), (1.0 / 16 + 1.0 / 8) * n.p_leak(), 1e-18);
  EXPECT_NEAR(w.at(0b0110), 1.875e-5, 1e-18);
  EXPECT_NEAR(w.at(0b1001), n.p_leak() / 16, 1e-18);
}

TEST(FaultEnumeration, DataXAfterSecondCnotGives0011) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  const auto faults = enumerate_fault_locations(4, n, 1);
  const Fault* f = find_fault(faults, "data X after CNOT 2");
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->outcomes[0].first, 0b0011u);
  double first_order = 0.0;
  for (const auto& g : faults)
    if (g.label == EdgeLabel::NonLeakage && g.order == 1 && g.outcomes[0].first == 0b0011u)
      first_order += g.outcomes[0].second;
  EXPECT_GE(first_order, n.p);
}

TEST(FaultEnumeration, FirstOrderDeterministicEffects) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  const auto faults = enumerate_fault_locations(4, n, 1);
  // X after CNOT k flips targets k+1..4.
  const std::uint32_t expect[] = {0b1111, 0b0111, 0b0011, 0b0001, 0b0000};
  for (int k = 0; k <= 4; ++k) {
    const Fault* f = find_fault(faults, "data X after CNOT " + std::to_string(k));
    ASSERT_NE(f, nullptr);
    EXPECT_EQ(f->outcomes[0].first, expect[k]);
  }
  for (int j = 1; j <= 4; ++j) {
    const Fault* f = find_fault(faults, "readout flip on ancilla " + std::to_string(j));
    ASSERT_NE(f, nullptr);
    EXPECT_EQ(f->outcomes[0].first, 1u << (4 - j));
  }
}

TEST(FaultEnumeration, SecondOrderPairsAllFirstOrderFaults) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  for (int rounds : {1, 2}) {
    for (int a = 1; a <= 4; ++a) {
      const auto faults = enumerate_fault_locations(a, n, rounds);
      const long n1 = std::count_if(faults.begin(), faults.end(), [](const Fault& f) {
        return f.label == EdgeLabel::NonLeakage && f.order == 1;
      });
      const long n2 = std::count_if(faults.begin(), faults.end(),
                                    [](const Fault& f) { return f.order == 2; });
      EXPECT_EQ(n1, rounds * (3 * a + 1));
      EXPECT_EQ(n2, binomial(static_cast<int>(n1), 2));
    }
  }
}

TEST(FaultEnumeration, TwoRoundLeakagePersists) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  const auto faults = enumerate_fault_locations(4, n, 2);
  const Fault* late = find_fault(faults, "data leak after CNOT 4 (round 1)");
  ASSERT_NE(late, nullptr);
  // Silent in round 1, fair coins on every round-2 detector.
  EXPECT_EQ(late->outcomes.size(), 16u);
  for (const auto& [b, w] : late->outcomes) {
    EXPECT_EQ(b >> 4, 0u);
    EXPECT_DOUBLE_EQ(w, n.p_leak() / 16);
  }
}

TEST(FaultEnumeration, RejectsBadArguments) {
  const NoiseParams n;
  EXPECT_THROW(enumerate_fault_locations(0, n, 1), std::invalid_argument);
  EXPECT_THROW(enumerate_fault_locations(4, n, 3), std::invalid_argument);
}

TEST(TransitionGraphs, LeakageBeforeCnot4FromBaseZero) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  auto [leak, nonleak] = build_graphs(4, n, 1);
  // Every leakage fault that can reach 0001 from the clean base contributes.
  const double direct = n.p_leak() * (1.0 / 2 + 1.0 / 4 + 1.0 / 8 + 1.0 / 16);
  EXPECT_NEAR(leak.edges.at({0u, 0b0001u}), direct, 1e-18);
  const auto faults = enumerate_fault_locations(4, n, 1);
  const Fault* f = find_fault(faults, "data leak before CNOT 4");
  ASSERT_NE(f, nullptr);
  ASSERT_EQ(f->outcomes.size(), 2u);
  EXPECT_EQ(f->outcomes[0].first, 0u);
  EXPECT_EQ(f->outcomes[1].first, 1u);
  EXPECT_DOUBLE_EQ(f->outcomes[0].second, n.p_leak() / 2);
  EXPECT_DOUBLE_EQ(f->outcomes[1].second, n.p_leak() / 2);
}

TEST(TransitionGraphs, NoLeakageRateMeansNoLeakageWeight) {
  const NoiseParams n = noise_at(1e-3, 0.0);
  for (int rounds : {1, 2}) {
    auto [leak, nonleak] = build_graphs(4, n, rounds);
    EXPECT_EQ(leak.total_weight(), 0.0);
    EXPECT_GT(nonleak.total_weight(), 0.0);
  }
}

TEST(TransitionGraphs, OutgoingNonLeakageFromBaseZeroMatchesClosedForm) {
  for (double p : {1e-3, 3e-3}) {
    const NoiseParams n = noise_at(p, 0.1);
    for (int rounds : {1, 2})
      for (int a = 1; a <= 4; ++a) {
        auto [leak, nonleak] = build_graphs(a, n, rounds);
        const int n1 = rounds * (3 * a + 1);
        const double expect = n1 * p + static_cast<double>(binomial(n1, 2)) * p * p;
        EXPECT_NEAR(nonleak.outgoing(0), expect, 1e-12 * expect) << a << " " << rounds;
      }
  }
}

TEST(TransitionGraphs, MergingPreservesTotalWeight) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  for (int rounds : {1, 2})
    for (int a = 1; a <= 4; ++a) {
      auto [leak, nonleak] = build_graphs(a, n, rounds);
      for (const TransitionGraph* g : {&leak, &nonleak}) {
        EXPECT_LT(g->edges.size(), g->added_edges);
        EXPECT_NEAR(g->total_weight(), g->added_weight, 1e-12 * g->added_weight);
        double incoming = 0.0;
        for (double w : g->incoming()) incoming += w;
        EXPECT_NEAR(incoming, g->added_weight, 1e-12 * g->added_weight);
      }
    }
}

TEST(TransitionGraphs, PriorsWeightOtherBases) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  auto [leak, nonleak] = build_graphs(4, n, 1);
  // 0011 is one data X away from the clean base; 0101 needs two faults.
  double from_0011 = leak.outgoing(0b0011);
  double from_0101 = leak.outgoing(0b0101);
  EXPECT_GT(from_0011, 0.0);
  EXPECT_EQ(from_0101, 0.0);
  EXPECT_NEAR(leak.outgoing(0), 5 * n.p_leak(), 1e-15);
}

TEST(LabelPatterns, SurfaceFourBitMemberships) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  const PatternTable t = build_gladiator_table({4}, n, 1.0).at(4);
  EXPECT_FALSE(t.contains(0b0011));
  EXPECT_TRUE(t.contains(0b1001));
  EXPECT_TRUE(t.contains(0b0110));
  for (std::uint32_t k = 0; k < 16; ++k) {
    EXPECT_EQ(t.contains(k), t.w_leak[k] > t.w_nonleak[k]);
    EXPECT_GE(t.w_leak[k], 0.0);
  }
  EXPECT_GE(t.w_leak[0b0110], (1.0 / 16 + 1.0 / 8) * n.p_leak());
}

TEST(LabelPatterns, ThresholdLimits) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  for (int rounds : {1, 2}) {
    auto [leak, nonleak] = build_graphs(4, n, rounds);
    PatternTable inf = label_patterns(leak, nonleak, std::numeric_limits<double>::infinity());
    EXPECT_EQ(inf.count(), 0u);
    if (rounds == 1) EXPECT_EQ(label_patterns(leak, nonleak, 1e300).count(), 0u);
    PatternTable low = label_patterns(leak, nonleak, 0.0);
    for (std::uint32_t k = 0; k < low.size(); ++k) EXPECT_EQ(low.contains(k), low.w_leak[k] > 0.0);
    PatternTable tight = label_patterns(leak, nonleak, 1e-9);
    EXPECT_GE(tight.count(), label_patterns(leak, nonleak, 1.0).count());
  }
}

TEST(LabelPatterns, ThresholdIsMonotone) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  auto [leak, nonleak] = build_graphs(4, n, 2);
  std::size_t prev = label_patterns(leak, nonleak, 1e-3).count();
  for (double tau : {1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    PatternTable t = label_patterns(leak, nonleak, tau);
    EXPECT_LE(t.count(), prev);
    prev = t.count();
  }
}

TEST(LabelPatterns, EmptyLeakageGraphFlagsNothing) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  for (int rounds : {1, 2})
    for (int a = 1; a <= 4; ++a) {
      auto [leak, nonleak] = build_graphs(a, n, rounds);
      leak.edges.clear();
      for (double tau : {1e-6, 1.0}) EXPECT_EQ(label_patterns(leak, nonleak, tau).count(), 0u);
    }
}

TEST(LabelPatterns, MismatchedGraphsRejected) {
  const NoiseParams n;
  auto g4 = build_graphs(4, n, 1);
  auto g3 = build_graphs(3, n, 1);
  EXPECT_THROW(label_patterns(g4.first, g3.second, 1.0), std::invalid_argument);
}

TEST(LabelPatterns, ScalingCovariance) {
  for (int rounds : {1, 2})
    for (int a = 1; a <= 4; ++a) {
      auto t3 = rounds == 1 ? build_gladiator_table({a}, noise_at(1e-3, 0.1), 1.0)
                            : build_gladiator_d_table({a}, noise_at(1e-3, 0.1), 1.0);
      auto t4 = rounds == 1 ? build_gladiator_table({a}, noise_at(1e-4, 0.1), 1.0)
                            : build_gladiator_d_table({a}, noise_at(1e-4, 0.1), 1.0);
      // First-order weights scale by exactly the common factor.
      const auto f3 = enumerate_fault_locations(a, noise_at(1e-3, 0.1), rounds);
      const auto f4 = enumerate_fault_locations(a, noise_at(1e-4, 0.1), rounds);
      ASSERT_EQ(f3.size(), f4.size());
      for (std::size_t i = 0; i < f3.size(); ++i)
        if (f3[i].order == 1) EXPECT_NEAR(f4[i].weight(), 0.1 * f3[i].weight(), 1e-15);
      // The flag decision is compared only where first-order terms dominate.
      for (std::uint32_t k = 0; k < t3.at(a).size(); ++k) {
        const double r3 = t3.at(a).w_leak[k] / t3.at(a).w_nonleak[k];
        const double r4 = t4.at(a).w_leak[k] / t4.at(a).w_nonleak[k];
        const bool decided = t3.at(a).w_nonleak[k] > 0.0 && std::abs(std::log(r3)) > 0.5 &&
                             std::abs(std::log(r4)) > 0.5 &&
                             std::abs(std::log(r3 / r4)) < 0.1;
        if (decided) EXPECT_EQ(t3.at(a).contains(k), t4.at(a).contains(k)) << a << ":" << k;
      }
    }
}

TEST(LabelPatterns, FlaggedSetGrowsWithLeakageRate) {
  for (int rounds : {1, 2}) {
    const std::vector<int> arities{2, 3, 4};
    auto lo = rounds == 1 ? build_gladiator_table(arities, noise_at(1e-3, 0.01), 1.0)
                          : build_gladiator_d_table(arities, noise_at(1e-3, 0.01), 1.0);
    auto mid = rounds == 1 ? build_gladiator_table(arities, noise_at(1e-3, 0.1), 1.0)
                           : build_gladiator_d_table(arities, noise_at(1e-3, 0.1), 1.0);
    auto hi = rounds == 1 ? build_gladiator_table(arities, noise_at(1e-3, 1.0), 1.0)
                          : build_gladiator_d_table(arities, noise_at(1e-3, 1.0), 1.0);
    for (int a : arities)
      for (std::uint32_t k = 0; k < hi.at(a).size(); ++k) {
        if (lo.at(a).contains(k)) EXPECT_TRUE(hi.at(a).contains(k));
        if (lo.at(a).contains(k)) EXPECT_TRUE(mid.at(a).contains(k));
        // W_L is linear in lr; W_NL only sees lr through the quiescent edge.
        EXPECT_NEAR(hi.at(a).w_leak[k], 10 * mid.at(a).w_leak[k], 1e-12);
        if (k != 0) EXPECT_DOUBLE_EQ(hi.at(a).w_nonleak[k], mid.at(a).w_nonleak[k]);
      }
  }
}

TEST(EraserTable, PopcountRuleForAritiesOneToSix) {
  for (int a = 1; a <= 6; ++a) {
    long expect = 0;
    for (int k = (a + 1) / 2; k <= a; ++k) expect += binomial(a, k);
    const PatternTable t1 = build_eraser_table(a, 1);
    EXPECT_EQ(static_cast<long>(t1.count()), expect) << a;
    for (std::uint32_t b = 0; b < t1.size(); ++b)
      EXPECT_EQ(t1.contains(b), 2 * std::popcount(b) >= a) << a << ":" << b;
    if (a <= 5) {
      const PatternTable t2 = build_eraser_table(a, 2);
      EXPECT_EQ(static_cast<long>(t2.count()), expect * expect) << a;
    }
  }
  EXPECT_EQ(build_eraser_table(4, 1).count(), 11u);
  EXPECT_EQ(build_eraser_table(3, 1).count(), 4u);
  EXPECT_EQ(build_eraser_table(4, 2).count(), 121u);
  EXPECT_TRUE(eraser_rule(1, 1));
  EXPECT_FALSE(eraser_rule(1, 0));
}

TEST(EraserTable, TwoRoundKeysUseDetectorsPerRound) {
  const PatternTable t = build_eraser_table(4, 2);
  // Detectors 0011 then 0011 again: measurements 0011, 0000.
  EXPECT_TRUE(t.contains(window_key(0b0011, 0b0011, 4)));
  EXPECT_FALSE(t.contains(window_key(0b0011, 0b0001, 4)));
}

TEST(TableFile, WriteReadRoundTrip) {
  const NoiseParams n = noise_at(1e-3, 0.1);
  for (const PatternTable& t :
       {build_gladiator_table({4}, n, 1.0).at(4), build_gladiator_d_table({3}, n, 1.0).at(3),
        build_eraser_table(4, 2)}) {
    std::stringstream ss;
    write_table(t, ss);
    const std::string text = ss.str();
    EXPECT_EQ(text.rfind("# pattern table\n", 0), 0u);
    EXPECT_NE(text.find(std::string("version ") + kToolVersion), std::string::npos);
    PatternTable r = read_table(ss);
    EXPECT_EQ(r.flag, t.flag);
    EXPECT_EQ(r.arity, t.arity);
    EXPECT_EQ(r.rounds, t.rounds);
    EXPECT_EQ(r.source, t.source);
    EXPECT_DOUBLE_EQ(r.p, t.p);
    EXPECT_DOUBLE_EQ(r.lr, t.lr);
    EXPECT_DOUBLE_EQ(r.tau, t.tau);
    std::stringstream again;
    write_table(r, again);
    if (t.w_leak.empty()) EXPECT_EQ(again.str(), text);
  }
}

TEST(TableFile, ParseErrors) {
  std::istringstream no_arity("# pattern table\n0011\n");
  EXPECT_THROW(read_table(no_arity), ParseError);
  std::istringstream width("arity 4\nrounds 1\n011\n");
  EXPECT_THROW(read_table(width), ParseError);
  std::istringstream junk("arity 4\nrounds 1\nbogus 3\n");
  try {
    read_table(junk);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}
