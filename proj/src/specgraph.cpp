#include "gladiator/specgraph.hpp"

#include <bit>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gladiator/errors.hpp"

namespace gladiator {

std::string PatternKey::str() const {
  std::string s;
  for (int i = width() - 1; i >= 0; --i) {
    s.push_back((bits >> i) & 1u ? '1' : '0');
    if (rounds == 2 && i == arity) s.push_back(' ');
  }
  return s;
}

std::uint32_t window_key(std::uint32_t det_prev, std::uint32_t det_cur, int arity) {
  return (det_prev << arity) | (det_prev ^ det_cur);
}

std::uint32_t window_key_to_detectors(std::uint32_t key, int arity) {
  const std::uint32_t lo = key & ((1u << arity) - 1);
  const std::uint32_t hi = key >> arity;
  return (hi << arity) | (hi ^ lo);
}

double Fault::weight() const {
  double w = 0.0;
  for (const auto& o : outcomes) w += o.second;
  return w;
}

void TransitionGraph::add_edge(std::uint32_t src, std::uint32_t dst, double w) {
  edges[{src, dst}] += w;
  added_weight += w;
  ++added_edges;
}

double TransitionGraph::total_weight() const {
  double w = 0.0;
  for (const auto& e : edges) w += e.second;
  return w;
}

double TransitionGraph::outgoing(std::uint32_t src) const {
  double w = 0.0;
  for (auto it = edges.lower_bound({src, 0}); it != edges.end() && it->first.first == src; ++it)
    w += it->second;
  return w;
}

std::vector<double> TransitionGraph::incoming() const {
  std::vector<double> in(node_count(), 0.0);
  for (const auto& [key, w] : edges) in[key.second] += w;
  return in;
}

namespace {

// Bits lo..hi (1-based CNOT positions, position 1 = MSB) of an arity-a pattern.
std::uint32_t mask(int a, int lo, int hi) {
  std::uint32_t m = 0;
  for (int k = lo; k <= hi; ++k) m |= 1u << (a - k);
  return m;
}

std::string describe(const char* what, int k, int round, int rounds) {
  std::string s = what + std::to_string(k);
  if (rounds == 2) s += " (round " + std::to_string(round) + ")";
  return s;
}

}  // namespace

std::vector<Fault> enumerate_fault_locations(int arity, const NoiseParams& noise, int rounds) {
  if (arity < 1) throw std::invalid_argument("arity must be >= 1");
  if (rounds != 1 && rounds != 2) throw std::invalid_argument("rounds must be 1 or 2");
  const int a = arity;
  const std::uint32_t A = 1u << a;
  const double p = noise.p;
  const double pl = noise.p_leak();
  auto pack = [a](std::uint32_t r1, std::uint32_t r2) { return (r1 << a) | r2; };

  std::vector<Fault> faults;
  auto leak = [&](std::string desc) -> Fault& {
    faults.push_back({std::move(desc), EdgeLabel::Leakage, 1, {}});
    return faults.back();
  };
  std::vector<Fault> pauli;
  auto nonleak = [&](std::string desc, std::uint32_t effect) {
    pauli.push_back({std::move(desc), EdgeLabel::NonLeakage, 1, {{effect, p}}});
  };

  // Data leakage before CNOT k randomises targets k..a; k = a+1 is after the
  // last CNOT and stays silent this round.
  for (int round = 1; round <= rounds; ++round) {
    for (int k = 1; k <= a + 1; ++k) {
      const int free_bits = a - k + 1;
      const std::uint32_t outcomes = 1u << free_bits;
      Fault& f = leak(k <= a ? describe("data leak before CNOT ", k, round, rounds)
                             : describe("data leak after CNOT ", a, round, rounds));
      if (rounds == 1) {
        for (std::uint32_t r = 0; r < outcomes; ++r) f.outcomes.emplace_back(r, pl / outcomes);
      } else if (round == 1) {
        // Still leaked next round: every round-2 detector is a fair coin.
        for (std::uint32_t r = 0; r < outcomes; ++r)
          for (std::uint32_t s = 0; s < A; ++s)
            f.outcomes.emplace_back(pack(r, s), pl / outcomes / A);
      } else {
        for (std::uint32_t r = 0; r < outcomes; ++r) f.outcomes.emplace_back(pack(0, r), pl / outcomes);
      }
    }
  }

  // Data X error after CNOT k (k = 0 is the round-start depolarisation).
  for (int round = 1; round <= rounds; ++round)
    for (int k = 0; k <= a; ++k) {
      const std::uint32_t seen = mask(a, k + 1, a);
      std::uint32_t effect = seen;
      if (rounds == 2) effect = round == 1 ? pack(seen, mask(a, 1, k)) : pack(0, seen);
      nonleak(describe("data X after CNOT ", k, round, rounds), effect);
    }

  // Ancilla readout flips and init errors.
  for (int round = 1; round <= rounds; ++round)
    for (int j = 1; j <= a; ++j) {
      const std::uint32_t e = mask(a, j, j);
      std::uint32_t meas = e, init = e;
      if (rounds == 2) {
        meas = round == 1 ? pack(e, e) : pack(0, e);
        init = round == 1 ? pack(e, e) : pack(0, e);
      }
      nonleak(describe("readout flip on ancilla ", j, round, rounds), meas);
      nonleak(describe("init error on ancilla ", j, round, rounds), init);
    }

  const std::size_t first = pauli.size();
  for (std::size_t i = 0; i < first; ++i)
    for (std::size_t j = i + 1; j < first; ++j)
      pauli.push_back({pauli[i].description + " + " + pauli[j].description, EdgeLabel::NonLeakage,
                       2, {{pauli[i].outcomes[0].first ^ pauli[j].outcomes[0].first, p * p}}});

  faults.insert(faults.end(), pauli.begin(), pauli.end());
  return faults;
}

std::pair<TransitionGraph, TransitionGraph> build_graphs(int arity, const NoiseParams& noise,
                                                         int rounds, const GraphOptions& opts) {
  const auto faults = enumerate_fault_locations(arity, noise, rounds);
  TransitionGraph leakage;
  leakage.arity = arity;
  leakage.rounds = rounds;
  leakage.label = EdgeLabel::Leakage;
  TransitionGraph nonleakage = leakage;
  nonleakage.label = EdgeLabel::NonLeakage;

  // Base priors: the no-error base plus every first-order Pauli outcome.
  std::map<std::uint32_t, double> priors{{0u, 1.0}};
  double first_order_total = 0.0;
  for (const auto& f : faults) {
    if (f.order != 1) continue;
    first_order_total += f.weight();
    if (f.label == EdgeLabel::NonLeakage && f.outcomes[0].first != 0)
      priors[f.outcomes[0].first] += f.outcomes[0].second;
  }

  for (const auto& [base, prior] : priors)
    for (const auto& f : faults) {
      if (f.label != EdgeLabel::Leakage) continue;
      for (const auto& [bits, w] : f.outcomes) leakage.add_edge(base, bits ^ base, prior * w);
    }

  // Pauli transitions are taken from the quiescent base only.
  for (const auto& f : faults) {
    if (f.label != EdgeLabel::NonLeakage || (f.order == 2 && !opts.second_order)) continue;
    for (const auto& [bits, w] : f.outcomes) nonleakage.add_edge(0, bits, w);
  }
  if (opts.quiescent_edge) nonleakage.quiescent = 1.0 - first_order_total;
  return {std::move(leakage), std::move(nonleakage)};
}

std::size_t PatternTable::count() const {
  std::size_t c = 0;
  for (auto f : flag) c += f;
  return c;
}

std::vector<std::uint32_t> PatternTable::flagged() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < flag.size(); ++i)
    if (flag[i]) out.push_back(i);
  return out;
}

PatternTable label_patterns(const TransitionGraph& leakage, const TransitionGraph& nonleakage,
                            double tau) {
  if (leakage.arity != nonleakage.arity || leakage.rounds != nonleakage.rounds)
    throw std::invalid_argument("graphs cover different node sets");
  const std::vector<double> wl = leakage.incoming();
  std::vector<double> wnl = nonleakage.incoming();
  wnl[0] += nonleakage.quiescent;

  PatternTable t;
  t.arity = leakage.arity;
  t.rounds = leakage.rounds;
  t.tau = tau;
  const std::uint32_t n = leakage.node_count();
  t.flag.assign(n, 0);
  t.w_leak.assign(n, 0.0);
  t.w_nonleak.assign(n, 0.0);
  for (std::uint32_t det = 0; det < n; ++det) {
    const std::uint32_t key =
        t.rounds == 2 ? window_key(det >> t.arity, det & ((1u << t.arity) - 1), t.arity) : det;
    t.w_leak[key] = wl[det];
    t.w_nonleak[key] = wnl[det];
    t.flag[key] = wl[det] > tau * wnl[det];
  }
  return t;
}

namespace {

TableSet build_tables(const std::vector<int>& arities, const NoiseParams& noise, double tau,
                      int rounds) {
  TableSet out;
  for (int a : arities) {
    auto [leak, nonleak] = build_graphs(a, noise, rounds);
    PatternTable t = label_patterns(leak, nonleak, tau);
    t.p = noise.p;
    t.lr = noise.lr;
    out.emplace(a, std::move(t));
  }
  return out;
}

}  // namespace

TableSet build_gladiator_table(const std::vector<int>& arities, const NoiseParams& noise,
                               double tau) {
  return build_tables(arities, noise, tau, 1);
}

TableSet build_gladiator_d_table(const std::vector<int>& arities, const NoiseParams& noise,
                                 double tau) {
  return build_tables(arities, noise, tau, 2);
}

bool eraser_rule(int arity, std::uint32_t bits) {
  return std::popcount(bits) >= (arity + 1) / 2;
}

PatternTable build_eraser_table(int arity, int rounds) {
  if (arity < 1) throw std::invalid_argument("arity must be >= 1");
  if (rounds != 1 && rounds != 2) throw std::invalid_argument("rounds must be 1 or 2");
  PatternTable t;
  t.source = "eraser";
  t.arity = arity;
  t.rounds = rounds;
  const std::uint32_t n = 1u << (arity * rounds);
  t.flag.assign(n, 0);
  const std::uint32_t low = (1u << arity) - 1;
  for (std::uint32_t key = 0; key < n; ++key) {
    if (rounds == 1) {
      t.flag[key] = eraser_rule(arity, key);
    } else {
      const std::uint32_t det = window_key_to_detectors(key, arity);
      t.flag[key] = eraser_rule(arity, det >> arity) && eraser_rule(arity, det & low);
    }
  }
  return t;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_table(const PatternTable& t, std::ostream& out) {
  out << "# pattern table\n";
  out << "version " << kToolVersion << "\n";
  out << "source " << t.source << "\n";
  out << "code " << t.code << "\n";
  out << "arity " << t.arity << "\n";
  out << "rounds " << t.rounds << "\n";
  out << "p " << fmt_double(t.p) << "\n";
  out << "lr " << fmt_double(t.lr) << "\n";
  out << "tau " << fmt_double(t.tau) << "\n";
  out << "flagged " << t.count() << " of " << t.size() << "\n";
  const bool weighted = !t.w_leak.empty();
  for (std::uint32_t key : t.flagged()) {
    out << PatternKey{t.arity, t.rounds, key}.str();
    if (weighted) out << " W_L=" << fmt_double(t.w_leak[key]) << " W_NL=" << fmt_double(t.w_nonleak[key]);
    out << "\n";
  }
}

PatternTable read_table(std::istream& in) {
  PatternTable t;
  std::string line;
  int lineno = 0;
  bool sized = false;
  auto ensure_sized = [&] {
    if (sized) return;
    if (t.arity < 1 || (t.rounds != 1 && t.rounds != 2))
      throw ParseError(lineno, "arity/rounds must precede patterns");
    t.flag.assign(1u << (t.arity * t.rounds), 0);
    sized = true;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "version" || key == "flagged") continue;
    if (key == "source") ss >> t.source;
    else if (key == "code") ss >> t.code;
    else if (key == "arity") ss >> t.arity;
    else if (key == "rounds") ss >> t.rounds;
    else if (key == "p") ss >> t.p;
    else if (key == "lr") ss >> t.lr;
    else if (key == "tau") ss >> t.tau;
    else if (key.find_first_not_of("01") == std::string::npos) {
      ensure_sized();
      std::string bits = key;
      if (t.rounds == 2) {
        std::string rest;
        if (!(ss >> rest)) throw ParseError(lineno, "two-round pattern needs two halves");
        bits += rest;
      }
      if (static_cast<int>(bits.size()) != t.arity * t.rounds)
        throw ParseError(lineno, "pattern width mismatch");
      t.flag[std::stoul(bits, nullptr, 2)] = 1;
    } else {
      throw ParseError(lineno, "unknown table entry '" + key + "'");
    }
    if (ss.fail()) throw ParseError(lineno, "malformed value for '" + key + "'");
  }
  ensure_sized();
  return t;
}

}  // namespace gladiator
