#include "gladiator/policies.hpp"

#include <algorithm>

#include "gladiator/errors.hpp"

namespace gladiator {

bool Policy::uses_mlr() const {
  return kind == PolicyKind::MlrOnly || kind == PolicyKind::EraserM ||
         kind == PolicyKind::GladiatorM || kind == PolicyKind::GladiatorDM;
}

bool Policy::needs_single_tables() const {
  return kind == PolicyKind::Gladiator || kind == PolicyKind::GladiatorM;
}

bool Policy::needs_double_tables() const {
  return kind == PolicyKind::GladiatorD || kind == PolicyKind::GladiatorDM;
}

Policy parse_policy(const std::string& text) {
  static const std::pair<const char*, PolicyKind> names[] = {
      {"no-lrc", PolicyKind::NoLrc},         {"always", PolicyKind::AlwaysLrc},
      {"mlr", PolicyKind::MlrOnly},          {"eraser", PolicyKind::Eraser},
      {"eraser+m", PolicyKind::EraserM},     {"gladiator", PolicyKind::Gladiator},
      {"gladiator+m", PolicyKind::GladiatorM}, {"gladiator-d", PolicyKind::GladiatorD},
      {"gladiator-d+m", PolicyKind::GladiatorDM}};
  for (const auto& [name, kind] : names)
    if (text == name) return {kind, 0};
  const std::string prefix = "staggered:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string num = text.substr(prefix.size());
    if (!num.empty() && num.find_first_not_of("0123456789") == std::string::npos && num.size() < 6) {
      const int n = std::stoi(num);
      if (n >= 1) return {PolicyKind::Staggered, n};
    }
    throw ConfigError("staggered policy needs a positive group count, got '" + text + "'");
  }
  throw ConfigError("unknown policy '" + text + "'");
}

std::string to_string(const Policy& policy) {
  switch (policy.kind) {
    case PolicyKind::NoLrc: return "no-lrc";
    case PolicyKind::AlwaysLrc: return "always";
    case PolicyKind::Staggered: return "staggered:" + std::to_string(policy.stagger);
    case PolicyKind::MlrOnly: return "mlr";
    case PolicyKind::Eraser: return "eraser";
    case PolicyKind::EraserM: return "eraser+m";
    case PolicyKind::Gladiator: return "gladiator";
    case PolicyKind::GladiatorM: return "gladiator+m";
    case PolicyKind::GladiatorD: return "gladiator-d";
    case PolicyKind::GladiatorDM: return "gladiator-d+m";
  }
  return "unknown";
}

std::uint32_t data_pattern(const CodeLayout& layout, QubitId q,
                           const std::vector<std::uint8_t>& detectors) {
  std::uint32_t bits = 0;
  for (QubitId anc : layout.data_adjacency[q]) bits = (bits << 1) | detectors[layout.ancilla_index(anc)];
  return bits;
}

void check_policy_inputs(const Policy& policy, const CodeLayout& layout, const PolicyTables* tables,
                         const ColorGrouping* grouping) {
  if (policy.kind == PolicyKind::Staggered) {
    if (!grouping || grouping->group_count != policy.stagger)
      throw ConfigError("staggered policy needs a coloring with " + std::to_string(policy.stagger) +
                        " groups");
  }
  const bool single = policy.needs_single_tables();
  const bool twofold = policy.needs_double_tables();
  if (!single && !twofold) return;
  if (!tables) throw ConfigError("policy " + to_string(policy) + " needs pattern tables");
  for (int a : layout.arities()) {
    const TableSet& set = single ? tables->single : tables->twofold;
    auto it = set.find(a);
    if (it == set.end())
      throw ConfigError("missing " + std::string(single ? "single" : "two") +
                        "-round pattern table for arity " + std::to_string(a));
    if (it->second.rounds != (single ? 1 : 2) || it->second.arity != a)
      throw ConfigError("pattern table shape mismatch for arity " + std::to_string(a));
  }
}

PolicyState::PolicyState(const Policy& policy, const CodeLayout& layout, const PolicyTables* tables,
                         const ColorGrouping* grouping)
    : policy_(policy), layout_(&layout), tables_(tables), grouping_(grouping) {
  check_policy_inputs(policy, layout, tables, grouping);
}

void PolicyState::observe(const RoundRecord& record) {
  history_.push_back(record);
  while (history_.size() > 2) history_.pop_front();
}

std::vector<QubitId> PolicyState::decide() {
  const CodeLayout& L = *layout_;
  std::vector<QubitId> out;
  speculated_.clear();
  const int round = round_counter_++;

  switch (policy_.kind) {
    case PolicyKind::NoLrc:
    case PolicyKind::MlrOnly:
      break;
    case PolicyKind::AlwaysLrc:
      for (QubitId q = 0; q < L.n_qubits(); ++q) out.push_back(q);
      break;
    case PolicyKind::Staggered:
      out = grouping_->groups[static_cast<std::size_t>(round % policy_.stagger)];
      break;
    case PolicyKind::Eraser:
    case PolicyKind::EraserM:
    case PolicyKind::Gladiator:
    case PolicyKind::GladiatorM: {
      if (history_.empty()) break;
      const auto& det = history_.back().detectors;
      const bool eraser = policy_.kind == PolicyKind::Eraser || policy_.kind == PolicyKind::EraserM;
      for (QubitId q = 0; q < L.n_data(); ++q) {
        const int arity = static_cast<int>(L.data_adjacency[q].size());
        const std::uint32_t bits = data_pattern(L, q, det);
        const bool hit = eraser ? eraser_rule(arity, bits) : tables_->single.at(arity).contains(bits);
        if (hit) speculated_.push_back(q);
      }
      break;
    }
    case PolicyKind::GladiatorD:
    case PolicyKind::GladiatorDM: {
      if (history_.size() < 2) break;
      const auto& prev = history_.front().detectors;
      const auto& cur = history_.back().detectors;
      for (QubitId q = 0; q < L.n_data(); ++q) {
        const int arity = static_cast<int>(L.data_adjacency[q].size());
        const std::uint32_t key = window_key(data_pattern(L, q, prev), data_pattern(L, q, cur), arity);
        if (tables_->twofold.at(arity).contains(key)) speculated_.push_back(q);
      }
      break;
    }
  }
  out.insert(out.end(), speculated_.begin(), speculated_.end());

  if (policy_.uses_mlr() && !history_.empty()) {
    const auto& flags = history_.back().mlr_flags;
    for (std::size_t a = 0; a < flags.size(); ++a)
      if (flags[a]) out.push_back(L.ancilla_qubits[a]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<QubitId> decide(const Policy&, PolicyState& state, const CodeLayout&) {
  return state.decide();
}

}  // namespace gladiator
