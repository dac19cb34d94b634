#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gladiator/noise_sim.hpp"

namespace gladiator {

inline constexpr const char* kToolVersion = "1.0.0";

// Pattern bits: bit k (MSB first) belongs to the k-th scheduled adjacent
// ancilla. Two-round keys are (round-1 bits, round-2 bits), both taken
// relative to the measurement preceding the window; in detector terms the
// key is (d1, d1 ^ d2).
struct PatternKey {
  int arity = 0;
  int rounds = 1;
  std::uint32_t bits = 0;

  int width() const { return arity * rounds; }
  std::string str() const;
  bool operator==(const PatternKey&) const = default;
  auto operator<=>(const PatternKey&) const = default;
};

std::uint32_t window_key(std::uint32_t det_prev, std::uint32_t det_cur, int arity);
// Inverse of window_key: returns (d1 << arity) | d2.
std::uint32_t window_key_to_detectors(std::uint32_t key, int arity);

enum class EdgeLabel { Leakage, NonLeakage };

struct Fault {
  std::string description;
  EdgeLabel label = EdgeLabel::NonLeakage;
  int order = 1;
  // Detector-pattern outcomes with their weights.
  std::vector<std::pair<std::uint32_t, double>> outcomes;

  double weight() const;
};

// Nodes are detector patterns 0..2^(arity*rounds)-1.
struct TransitionGraph {
  int arity = 0;
  int rounds = 1;
  EdgeLabel label = EdgeLabel::NonLeakage;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> edges;
  // Weight of the no-fault self-loop on the all-zeros node.
  double quiescent = 0.0;
  // Sum of every weight passed to add_edge, before merging.
  double added_weight = 0.0;
  std::size_t added_edges = 0;

  std::uint32_t node_count() const { return 1u << (arity * rounds); }
  void add_edge(std::uint32_t src, std::uint32_t dst, double w);
  double total_weight() const;
  double outgoing(std::uint32_t src) const;
  std::vector<double> incoming() const;
};

struct GraphOptions {
  bool second_order = true;
  bool quiescent_edge = true;
};

std::vector<Fault> enumerate_fault_locations(int arity, const NoiseParams& noise, int rounds);

std::pair<TransitionGraph, TransitionGraph> build_graphs(int arity, const NoiseParams& noise,
                                                         int rounds,
                                                         const GraphOptions& opts = {});

struct PatternTable {
  std::string source = "gladiator";  // or "eraser"
  std::string code = "generic";
  int arity = 0;
  int rounds = 1;
  double p = 0.0;
  double lr = 0.0;
  double tau = 1.0;
  std::vector<std::uint8_t> flag;  // indexed by key bits
  std::vector<double> w_leak;      // empty for rule-based tables
  std::vector<double> w_nonleak;

  std::uint32_t size() const { return static_cast<std::uint32_t>(flag.size()); }
  bool contains(std::uint32_t bits) const { return bits < flag.size() && flag[bits]; }
  std::size_t count() const;
  std::vector<std::uint32_t> flagged() const;
};

PatternTable label_patterns(const TransitionGraph& leakage, const TransitionGraph& nonleakage,
                            double tau);

using TableSet = std::map<int, PatternTable>;

TableSet build_gladiator_table(const std::vector<int>& arities, const NoiseParams& noise,
                               double tau);
TableSet build_gladiator_d_table(const std::vector<int>& arities, const NoiseParams& noise,
                                 double tau);

bool eraser_rule(int arity, std::uint32_t bits);
PatternTable build_eraser_table(int arity, int rounds);

void write_table(const PatternTable& table, std::ostream& out);
PatternTable read_table(std::istream& in);

}  // namespace gladiator
