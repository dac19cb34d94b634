#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gladiator/codes.hpp"
#include "gladiator/noise_sim.hpp"
#include "gladiator/policies.hpp"

namespace gladiator {

struct RoundAccount {
  long fn = 0;
  long fp = 0;
  long tp = 0;
};

RoundAccount account_round(const RoundRecord& record, const std::vector<QubitId>& schedule_next);

struct ExperimentConfig {
  CodeKind code = CodeKind::Surface;
  std::string code_path;  // External codes
  int distance = 3;
  NoiseParams noise;
  int rounds = 30;
  long shots = 1000;
  Policy policy;
  double tau = 1.0;
  std::uint64_t seed = 1;
  bool leakage_sampling = false;
  int jobs = 1;
  // Decode logical errors when the code supports it.
  bool compute_ler = true;
  // Latencies in CNOT durations.
  double lrc_latency = 2.0;
  double readout_latency = 2.0;
  // Dump round records of the first trace_shots shots.
  long trace_shots = 0;
};

struct ExperimentResult {
  long shots = 0;
  int rounds = 0;
  std::size_t n_data = 0;
  std::size_t n_qubits = 0;
  double dlp = 0.0;
  long fn_count = 0;
  long fp_count = 0;
  long tp_count = 0;
  long lrc_count = 0;
  double lrc_rate = 0.0;
  std::optional<double> ler;
  std::optional<double> ler_stderr;
  long logical_failures = 0;
  std::optional<double> lambda;
  double cycle_time_norm = 1.0;
  // Speculated data-qubit events, and those with an MLR-flagged neighbour.
  long speculated_events = 0;
  long speculated_with_mlr = 0;
  std::optional<double> mobility_estimate;
  std::vector<std::string> trace;  // JSON lines
};

// Everything run_experiment needs that is independent of the shot loop.
struct ExperimentSetup {
  CodeLayout layout;
  PolicyTables tables;
  std::optional<ColorGrouping> grouping;
};

CodeLayout make_layout(const ExperimentConfig& config);
ExperimentSetup prepare_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentSetup& setup);

double suppression_factor(const std::map<int, double>& ler_by_distance);

enum class MobilityRegime { Low, High };
std::string to_string(MobilityRegime regime);

struct MobilityEstimate {
  double estimate = 0.0;
  MobilityRegime regime = MobilityRegime::Low;
};

inline constexpr double kMobilityThreshold = 0.05;

MobilityEstimate estimate_mobility(const std::vector<ExperimentResult>& results,
                                   double threshold = kMobilityThreshold);

// CSV output: one row per experiment cell, fixed column order.
const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result);
std::string result_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace gladiator
