#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gladiator/codes.hpp"

namespace gladiator {

enum class LeakedReadout { Random, One, Last };

struct NoiseParams {
  double p = 1e-3;
  double lr = 0.1;
  double mobility = 0.10;
  double mlr = 10.0;
  bool reset_clears_leakage = false;
  double lrc_error_scale = 1.0;
  LeakedReadout leaked_readout = LeakedReadout::Random;

  double p_leak() const { return lr * p; }
  // Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

// Per-shot random stream: mt19937_64 seeded by splitmix64 of (seed, shot_index).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t shot_index);

  std::uint64_t next() { return engine_(); }
  bool bernoulli(double p);
  // Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n);
  bool coin() { return next() >> 63; }

 private:
  std::mt19937_64 engine_;
};

class PauliFrame {
 public:
  PauliFrame() = default;
  explicit PauliFrame(std::size_t n) : x_((n + 63) / 64, 0), z_((n + 63) / 64, 0) {}

  bool x(std::size_t q) const { return (x_[q >> 6] >> (q & 63)) & 1u; }
  bool z(std::size_t q) const { return (z_[q >> 6] >> (q & 63)) & 1u; }
  void flip_x(std::size_t q) { x_[q >> 6] ^= std::uint64_t{1} << (q & 63); }
  void flip_z(std::size_t q) { z_[q >> 6] ^= std::uint64_t{1} << (q & 63); }
  void clear(std::size_t q) {
    x_[q >> 6] &= ~(std::uint64_t{1} << (q & 63));
    z_[q >> 6] &= ~(std::uint64_t{1} << (q & 63));
  }
  // Pauli index 0..3 = I, X, Y, Z.
  void apply(std::size_t q, unsigned pauli) {
    if (pauli == 1 || pauli == 2) flip_x(q);
    if (pauli == 2 || pauli == 3) flip_z(q);
  }
  bool operator==(const PauliFrame&) const = default;

 private:
  std::vector<std::uint64_t> x_, z_;
};

struct SimState {
  PauliFrame frame;
  std::vector<std::uint8_t> leaked;
  std::vector<std::uint8_t> last_measurement;  // per ancilla
  int round_index = 0;
  Rng rng{0, 0};
};

struct RoundRecord {
  int round = 0;
  std::vector<std::uint8_t> measurements;  // per ancilla
  std::vector<std::uint8_t> mlr_flags;     // per ancilla
  std::vector<std::uint8_t> detectors;     // per ancilla
  std::vector<std::uint8_t> true_leaked_data;
  std::vector<std::uint8_t> true_leaked_ancilla;
  std::vector<QubitId> lrcs_applied;
};

// Final transversal readout of the data qubits; leaked qubits read as a
// uniformly random Pauli.
struct DataReadout {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> z;
};

struct CnotOp {
  QubitId control;
  QubitId target;
};

class Simulator {
 public:
  Simulator(const CodeLayout& layout, const NoiseParams& noise);

  const CodeLayout& layout() const { return *layout_; }
  const NoiseParams& noise() const { return noise_; }
  const std::vector<CnotOp>& cnots() const { return cnots_; }

  SimState new_shot(std::uint64_t seed, std::uint64_t shot_index, bool leakage_sampling) const;
  void apply_cnot(SimState& state, QubitId control, QubitId target) const;
  RoundRecord run_round(SimState& state, const std::vector<QubitId>& lrc_schedule) const;
  void apply_lrcs(SimState& state, const std::vector<QubitId>& schedule,
                  std::vector<QubitId>* applied) const;
  DataReadout final_readout(SimState& state) const;

 private:
  void depolarize1(SimState& state, QubitId q, double p) const;

  const CodeLayout* layout_;
  NoiseParams noise_;
  std::vector<CnotOp> cnots_;
};

// Free-function forms of the simulator operations.
SimState new_shot(const CodeLayout& layout, const NoiseParams& noise, std::uint64_t seed,
                  std::uint64_t shot_index, bool leakage_sampling);
void apply_cnot(SimState& state, const NoiseParams& noise, QubitId control, QubitId target);
RoundRecord run_round(SimState& state, const CodeLayout& layout, const NoiseParams& noise,
                      const std::vector<QubitId>& lrc_schedule);

}  // namespace gladiator
