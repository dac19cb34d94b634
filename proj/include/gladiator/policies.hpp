#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "gladiator/codes.hpp"
#include "gladiator/noise_sim.hpp"
#include "gladiator/specgraph.hpp"

namespace gladiator {

enum class PolicyKind {
  NoLrc,
  AlwaysLrc,
  Staggered,
  MlrOnly,
  Eraser,
  EraserM,
  Gladiator,
  GladiatorM,
  GladiatorD,
  GladiatorDM
};

struct Policy {
  PolicyKind kind = PolicyKind::NoLrc;
  int stagger = 0;  // Staggered(n) only

  bool uses_mlr() const;
  bool needs_single_tables() const;
  bool needs_double_tables() const;
  bool operator==(const Policy&) const = default;
};

// Accepts no-lrc, always, staggered:<n>, mlr, eraser, eraser+m, gladiator,
// gladiator+m, gladiator-d, gladiator-d+m. Throws ConfigError otherwise.
Policy parse_policy(const std::string& text);
std::string to_string(const Policy& policy);

struct PolicyTables {
  TableSet single;
  TableSet twofold;
};

// Detector pattern of one data qubit, first scheduled ancilla as MSB.
std::uint32_t data_pattern(const CodeLayout& layout, QubitId q,
                           const std::vector<std::uint8_t>& detectors);

class PolicyState {
 public:
  PolicyState(const Policy& policy, const CodeLayout& layout, const PolicyTables* tables,
              const ColorGrouping* grouping);

  void observe(const RoundRecord& record);
  // Qubits to LRC at the start of the next round, sorted and unique.
  std::vector<QubitId> decide();

  // Data qubits flagged by pattern speculation in the latest decision.
  const std::vector<QubitId>& speculated_data() const { return speculated_; }
  int round_counter() const { return round_counter_; }
  std::size_t history_size() const { return history_.size(); }

 private:
  Policy policy_;
  const CodeLayout* layout_;
  const PolicyTables* tables_;
  const ColorGrouping* grouping_;
  std::deque<RoundRecord> history_;  // at most two records
  std::vector<QubitId> speculated_;
  int round_counter_ = 0;
};

// Validates that every table this policy needs exists for the layout.
void check_policy_inputs(const Policy& policy, const CodeLayout& layout, const PolicyTables* tables,
                         const ColorGrouping* grouping);

std::vector<QubitId> decide(const Policy& policy, PolicyState& state, const CodeLayout& layout);

}  // namespace gladiator
