#include "gladiator/noise_sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace gladiator {

void NoiseParams::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p)) throw std::invalid_argument("p must lie in [0,1]");
  if (lr < 0.0 || !in_unit(p_leak())) throw std::invalid_argument("lr*p must lie in [0,1]");
  if (!in_unit(mobility)) throw std::invalid_argument("mobility must lie in [0,1]");
  if (mlr < 0.0) throw std::invalid_argument("mlr must be nonnegative");
  if (lrc_error_scale < 0.0) throw std::invalid_argument("lrc_error_scale must be nonnegative");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t shot_index)
    : engine_(splitmix64(splitmix64(seed) ^ shot_index)) {}

bool Rng::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return next() < static_cast<std::uint64_t>(p * 18446744073709551616.0);
}

std::uint32_t Rng::below(std::uint32_t n) {
  return static_cast<std::uint32_t>(((next() >> 32) * n) >> 32);
}

namespace {

void cnot_impl(SimState& s, const NoiseParams& noise, QubitId c, QubitId t) {
  const bool lc = s.leaked[c];
  const bool lt = s.leaked[t];
  if (lc && !lt) {
    if (s.rng.bernoulli(noise.mobility))
      s.leaked[t] = 1;
    else
      s.frame.apply(t, s.rng.below(4));
  } else if (lt && !lc) {
    s.frame.apply(c, s.rng.below(4));
  } else if (!lc && !lt) {
    if (s.frame.x(c)) s.frame.flip_x(t);
    if (s.frame.z(t)) s.frame.flip_z(c);
    if (s.rng.bernoulli(noise.p)) {
      const unsigned k = 1 + s.rng.below(15);
      s.frame.apply(c, k / 4);
      s.frame.apply(t, k % 4);
    }
  }
  const double pl = noise.p_leak();
  if (!s.leaked[c] && s.rng.bernoulli(pl)) s.leaked[c] = 1;
  if (!s.leaked[t] && s.rng.bernoulli(pl)) s.leaked[t] = 1;
}

}  // namespace

Simulator::Simulator(const CodeLayout& layout, const NoiseParams& noise)
    : layout_(&layout), noise_(noise) {
  noise_.validate();
  struct Timed {
    int step;
    std::size_t anc;
    CnotOp op;
  };
  std::vector<Timed> ops;
  for (std::size_t a = 0; a < layout.n_ancilla(); ++a) {
    const QubitId anc = layout.ancilla_qubits[a];
    for (std::size_t i = 0; i < layout.stabilizers[a].size(); ++i) {
      const QubitId q = layout.stabilizers[a][i];
      CnotOp op = layout.ancilla_type[a] == CheckType::Z ? CnotOp{q, anc} : CnotOp{anc, q};
      ops.push_back({layout.cnot_steps[a][i], a, op});
    }
  }
  std::stable_sort(ops.begin(), ops.end(), [](const Timed& x, const Timed& y) {
    return x.step != y.step ? x.step < y.step : x.anc < y.anc;
  });
  for (const auto& t : ops) cnots_.push_back(t.op);
}

SimState Simulator::new_shot(std::uint64_t seed, std::uint64_t shot_index,
                             bool leakage_sampling) const {
  SimState s;
  s.frame = PauliFrame(layout_->n_qubits());
  s.leaked.assign(layout_->n_qubits(), 0);
  s.last_measurement.assign(layout_->n_ancilla(), 0);
  s.rng = Rng(seed, shot_index);
  if (leakage_sampling)
    s.leaked[s.rng.below(static_cast<std::uint32_t>(layout_->n_data()))] = 1;
  return s;
}

void Simulator::apply_cnot(SimState& state, QubitId control, QubitId target) const {
  cnot_impl(state, noise_, control, target);
}

void Simulator::depolarize1(SimState& s, QubitId q, double p) const {
  if (s.rng.bernoulli(p)) s.frame.apply(q, 1 + s.rng.below(3));
}

void Simulator::apply_lrcs(SimState& s, const std::vector<QubitId>& schedule,
                           std::vector<QubitId>* applied) const {
  const double scale = noise_.lrc_error_scale;
  for (QubitId q : schedule) {
    if (s.leaked[q]) {
      // The qubit returns to the computational subspace in an unknown state.
      s.leaked[q] = 0;
      s.frame.apply(q, s.rng.below(4));
    }
    depolarize1(s, q, noise_.p * scale);
    if (s.rng.bernoulli(noise_.p_leak() * scale)) s.leaked[q] = 1;
    if (applied) applied->push_back(q);
  }
}

RoundRecord Simulator::run_round(SimState& s, const std::vector<QubitId>& lrc_schedule) const {
  const CodeLayout& L = *layout_;
  const std::size_t n = L.n_data();
  const std::size_t m = L.n_ancilla();
  RoundRecord rec;
  rec.round = s.round_index;

  // (a) LRCs scheduled from earlier rounds.
  apply_lrcs(s, lrc_schedule, &rec.lrcs_applied);

  // (b) Round-start data noise.
  for (QubitId q = 0; q < n; ++q) {
    if (s.leaked[q]) continue;
    depolarize1(s, q, noise_.p);
    if (s.rng.bernoulli(noise_.p_leak())) s.leaked[q] = 1;
  }

  // (c) Ancilla initialisation; the error is the basis flip the readout sees.
  for (std::size_t a = 0; a < m; ++a) {
    const QubitId anc = L.ancilla_qubits[a];
    s.frame.clear(anc);
    if (s.leaked[anc]) continue;
    if (s.rng.bernoulli(noise_.p)) {
      if (L.ancilla_type[a] == CheckType::Z)
        s.frame.flip_x(anc);
      else
        s.frame.flip_z(anc);
    }
  }

  // (d) Syndrome extraction.
  for (const CnotOp& op : cnots_) cnot_impl(s, noise_, op.control, op.target);

  // (e) Measurement, (f) reset, (g) detectors.
  rec.measurements.assign(m, 0);
  rec.mlr_flags.assign(m, 0);
  rec.detectors.assign(m, 0);
  const double blind = std::min(1.0, noise_.mlr * noise_.p);
  for (std::size_t a = 0; a < m; ++a) {
    const QubitId anc = L.ancilla_qubits[a];
    std::uint8_t bit = 0;
    if (s.leaked[anc]) {
      switch (noise_.leaked_readout) {
        case LeakedReadout::Random: bit = s.rng.coin(); break;
        case LeakedReadout::One: bit = 1; break;
        case LeakedReadout::Last: bit = s.last_measurement[a]; break;
      }
      rec.mlr_flags[a] = !s.rng.bernoulli(blind);
      if (noise_.reset_clears_leakage) s.leaked[anc] = 0;
    } else {
      bit = L.ancilla_type[a] == CheckType::Z ? s.frame.x(anc) : s.frame.z(anc);
      bit ^= s.rng.bernoulli(noise_.p);
    }
    rec.measurements[a] = bit;
    rec.detectors[a] = bit ^ s.last_measurement[a];
    s.last_measurement[a] = bit;
  }

  rec.true_leaked_data.assign(s.leaked.begin(), s.leaked.begin() + static_cast<std::ptrdiff_t>(n));
  rec.true_leaked_ancilla.assign(s.leaked.begin() + static_cast<std::ptrdiff_t>(n), s.leaked.end());
  ++s.round_index;
  return rec;
}

DataReadout Simulator::final_readout(SimState& s) const {
  const std::size_t n = layout_->n_data();
  DataReadout out;
  out.x.resize(n);
  out.z.resize(n);
  for (QubitId q = 0; q < n; ++q) {
    if (s.leaked[q]) {
      const unsigned pauli = s.rng.below(4);
      out.x[q] = pauli == 1 || pauli == 2;
      out.z[q] = pauli == 2 || pauli == 3;
    } else {
      out.x[q] = s.frame.x(q);
      out.z[q] = s.frame.z(q);
    }
  }
  return out;
}

SimState new_shot(const CodeLayout& layout, const NoiseParams& noise, std::uint64_t seed,
                  std::uint64_t shot_index, bool leakage_sampling) {
  return Simulator(layout, noise).new_shot(seed, shot_index, leakage_sampling);
}

void apply_cnot(SimState& state, const NoiseParams& noise, QubitId control, QubitId target) {
  cnot_impl(state, noise, control, target);
}

RoundRecord run_round(SimState& state, const CodeLayout& layout, const NoiseParams& noise,
                      const std::vector<QubitId>& lrc_schedule) {
  return Simulator(layout, noise).run_round(state, lrc_schedule);
}

}  // namespace gladiator
