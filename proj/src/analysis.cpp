#include "gladiator/analysis.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "gladiator/decoder.hpp"
#include "gladiator/errors.hpp"

namespace gladiator {

RoundAccount account_round(const RoundRecord& record, const std::vector<QubitId>& schedule_next) {
  RoundAccount acc;
  const std::size_t n = record.true_leaked_data.size();
  auto leaked = [&](QubitId q) {
    return q < n ? record.true_leaked_data[q] != 0 : record.true_leaked_ancilla.at(q - n) != 0;
  };
  std::vector<char> scheduled(n + record.true_leaked_ancilla.size(), 0);
  for (QubitId q : schedule_next) {
    scheduled.at(q) = 1;
    if (leaked(q))
      ++acc.tp;
    else
      ++acc.fp;
  }
  for (QubitId q = 0; q < n; ++q)
    if (record.true_leaked_data[q] && !scheduled[q]) ++acc.fn;
  return acc;
}

CodeLayout make_layout(const ExperimentConfig& config) {
  switch (config.code) {
    case CodeKind::Surface: return build_surface_code(config.distance);
    case CodeKind::Color666: return build_color_code(config.distance);
    case CodeKind::External: return load_code(config.code_path);
  }
  throw ConfigError("unknown code kind");
}

ExperimentSetup prepare_experiment(const ExperimentConfig& config) {
  ExperimentSetup setup;
  setup.layout = make_layout(config);
  const auto arities = setup.layout.arities();
  if (config.policy.needs_single_tables())
    setup.tables.single = build_gladiator_table(arities, config.noise, config.tau);
  if (config.policy.needs_double_tables())
    setup.tables.twofold = build_gladiator_d_table(arities, config.noise, config.tau);
  if (config.policy.kind == PolicyKind::Staggered)
    setup.grouping = color_groups(setup.layout, config.policy.stagger);
  return setup;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, prepare_experiment(config));
}

namespace {

struct Partial {
  long leaked_data_rounds = 0;
  long fn = 0, fp = 0, tp = 0, lrcs = 0;
  long failures = 0;
  long spec_events = 0, spec_with_mlr = 0;
};

std::string bitstring(const std::vector<std::uint8_t>& v) {
  std::string s;
  for (auto b : v) s.push_back(b ? '1' : '0');
  return s;
}

std::string trace_line(long shot, const RoundRecord& rec, const std::vector<QubitId>& next) {
  nlohmann::ordered_json j;
  j["shot"] = shot;
  j["round"] = rec.round;
  j["measurements"] = bitstring(rec.measurements);
  j["detectors"] = bitstring(rec.detectors);
  j["mlr_flags"] = bitstring(rec.mlr_flags);
  j["leaked_data"] = bitstring(rec.true_leaked_data);
  j["leaked_ancilla"] = bitstring(rec.true_leaked_ancilla);
  j["lrcs_applied"] = rec.lrcs_applied;
  j["schedule_next"] = next;
  return j.dump();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentSetup& setup) {
  if (config.rounds < 1) throw ConfigError("rounds must be positive");
  if (config.shots < 1) throw ConfigError("shots must be positive");
  if (config.jobs < 1) throw ConfigError("jobs must be positive");
  config.noise.validate();
  const CodeLayout& layout = setup.layout;
  const ColorGrouping* grouping = setup.grouping ? &*setup.grouping : nullptr;
  check_policy_inputs(config.policy, layout, &setup.tables, grouping);

  const Simulator sim(layout, config.noise);
  std::unique_ptr<SurfaceDecoder> decoder;
  if (config.compute_ler && layout.kind == CodeKind::Surface) decoder = std::make_unique<SurfaceDecoder>(layout);

  constexpr long kBlock = 64;
  const long blocks = (config.shots + kBlock - 1) / kBlock;
  std::vector<Partial> partials(static_cast<std::size_t>(blocks));
  std::vector<std::vector<std::string>> traces(static_cast<std::size_t>(std::min(config.trace_shots, config.shots)));
  std::atomic<long> next_block{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      for (long b; (b = next_block.fetch_add(1)) < blocks;) {
        Partial& part = partials[static_cast<std::size_t>(b)];
        const long end = std::min(config.shots, (b + 1) * kBlock);
        for (long shot = b * kBlock; shot < end; ++shot) {
          SimState state = sim.new_shot(config.seed, static_cast<std::uint64_t>(shot), config.leakage_sampling);
          PolicyState policy(config.policy, layout, &setup.tables, grouping);
          std::vector<QubitId> schedule;
          std::vector<std::vector<std::uint8_t>> det_rounds;
          if (decoder) det_rounds.reserve(static_cast<std::size_t>(config.rounds));
          for (int r = 0; r < config.rounds; ++r) {
            RoundRecord rec = sim.run_round(state, schedule);
            policy.observe(rec);
            std::vector<QubitId> next = policy.decide();
            const RoundAccount acc = account_round(rec, next);
            part.fn += acc.fn;
            part.fp += acc.fp;
            part.tp += acc.tp;
            part.lrcs += static_cast<long>(next.size());
            for (auto l : rec.true_leaked_data) part.leaked_data_rounds += l;
            for (QubitId q : policy.speculated_data()) {
              ++part.spec_events;
              for (QubitId anc : layout.data_adjacency[q])
                if (rec.mlr_flags[layout.ancilla_index(anc)]) {
                  ++part.spec_with_mlr;
                  break;
                }
            }
            if (shot < static_cast<long>(traces.size()))
              traces[static_cast<std::size_t>(shot)].push_back(trace_line(shot, rec, next));
            if (decoder) det_rounds.push_back(std::move(rec.detectors));
            schedule = std::move(next);
          }
          // Pending LRCs run before the final transversal readout.
          sim.apply_lrcs(state, schedule, nullptr);
          if (decoder) {
            const DataReadout readout = sim.final_readout(state);
            const ShotSyndrome syn = make_syndrome(layout, det_rounds, state.last_measurement, readout);
            part.failures += decoder->logical_failure(syn);
          }
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next_block = blocks;
    }
  };

  const int threads = static_cast<int>(std::min<long>(config.jobs, blocks));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  Partial total;
  for (const Partial& p : partials) {
    total.leaked_data_rounds += p.leaked_data_rounds;
    total.fn += p.fn;
    total.fp += p.fp;
    total.tp += p.tp;
    total.lrcs += p.lrcs;
    total.failures += p.failures;
    total.spec_events += p.spec_events;
    total.spec_with_mlr += p.spec_with_mlr;
  }

  ExperimentResult res;
  res.shots = config.shots;
  res.rounds = config.rounds;
  res.n_data = layout.n_data();
  res.n_qubits = layout.n_qubits();
  const double shot_rounds = static_cast<double>(config.shots) * config.rounds;
  res.dlp = static_cast<double>(total.leaked_data_rounds) / (shot_rounds * static_cast<double>(layout.n_data()));
  res.fn_count = total.fn;
  res.fp_count = total.fp;
  res.tp_count = total.tp;
  res.lrc_count = total.lrcs;
  res.lrc_rate = static_cast<double>(total.lrcs) / shot_rounds;
  if (decoder) {
    res.logical_failures = total.failures;
    const double ler = static_cast<double>(total.failures) / static_cast<double>(config.shots);
    res.ler = ler;
    res.ler_stderr = std::sqrt(ler * (1.0 - ler) / static_cast<double>(config.shots));
  }
  const double base = layout.num_steps() + config.readout_latency;
  res.cycle_time_norm = (base + res.lrc_rate * config.lrc_latency) / base;
  res.speculated_events = total.spec_events;
  res.speculated_with_mlr = total.spec_with_mlr;
  if (total.spec_events > 0)
    res.mobility_estimate = static_cast<double>(total.spec_with_mlr) / static_cast<double>(total.spec_events);
  for (auto& t : traces)
    for (auto& line : t) res.trace.push_back(std::move(line));
  return res;
}

double suppression_factor(const std::map<int, double>& ler_by_distance) {
  double log_sum = 0.0;
  int pairs = 0;
  for (const auto& [d, eps] : ler_by_distance) {
    auto next = ler_by_distance.find(d + 2);
    if (next == ler_by_distance.end()) continue;
    if (eps <= 0.0 || next->second <= 0.0) throw std::invalid_argument("suppression factor needs nonzero LER");
    log_sum += std::log(eps / next->second);
    ++pairs;
  }
  if (pairs == 0) throw std::invalid_argument("suppression factor needs two consecutive odd distances");
  return std::exp(log_sum / pairs);
}

std::string to_string(MobilityRegime regime) { return regime == MobilityRegime::High ? "High" : "Low"; }

MobilityEstimate estimate_mobility(const std::vector<ExperimentResult>& results, double threshold) {
  long events = 0, hits = 0;
  for (const auto& r : results) {
    events += r.speculated_events;
    hits += r.speculated_with_mlr;
  }
  if (events == 0) throw std::invalid_argument("no speculated data-qubit events to estimate mobility from");
  MobilityEstimate m;
  m.estimate = static_cast<double>(hits) / static_cast<double>(events);
  m.regime = m.estimate >= threshold ? MobilityRegime::High : MobilityRegime::Low;
  return m;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "code",      "distance",        "rounds",     "shots",     "policy",    "p",
      "lr",        "mobility",        "mlr",        "tau",       "seed",      "leakage_sampling",
      "dlp",       "fn_count",        "fp_count",   "tp_count",  "lrc_rate",  "ler",
      "ler_stderr", "logical_failures", "lambda",   "cycle_time_norm", "mobility_estimate"};
  return cols;
}

void write_csv_header(std::ostream& out) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::string code_label(const ExperimentConfig& c) {
  return c.code == CodeKind::External ? "file:" + c.code_path : to_string(c.code);
}

}  // namespace

void write_csv_row(std::ostream& out, const ExperimentConfig& c, const ExperimentResult& r) {
  out << code_label(c) << ',' << c.distance << ',' << c.rounds << ',' << c.shots << ',' << to_string(c.policy)
      << ',' << num(c.noise.p) << ',' << num(c.noise.lr) << ',' << num(c.noise.mobility) << ','
      << num(c.noise.mlr) << ',' << num(c.tau) << ',' << c.seed << ',' << (c.leakage_sampling ? 1 : 0) << ','
      << num(r.dlp) << ',' << r.fn_count << ',' << r.fp_count << ',' << r.tp_count << ',' << num(r.lrc_rate)
      << ',' << opt(r.ler) << ',' << opt(r.ler_stderr) << ',' << (r.ler ? std::to_string(r.logical_failures) : "")
      << ',' << opt(r.lambda) << ',' << num(r.cycle_time_norm) << ',' << opt(r.mobility_estimate) << "\n";
}

std::string result_json(const ExperimentConfig& c, const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["code"] = code_label(c);
  j["distance"] = c.distance;
  j["rounds"] = c.rounds;
  j["shots"] = c.shots;
  j["policy"] = to_string(c.policy);
  j["p"] = c.noise.p;
  j["lr"] = c.noise.lr;
  j["mobility"] = c.noise.mobility;
  j["mlr"] = c.noise.mlr;
  j["tau"] = c.tau;
  j["seed"] = c.seed;
  j["leakage_sampling"] = c.leakage_sampling;
  j["dlp"] = r.dlp;
  j["fn_count"] = r.fn_count;
  j["fp_count"] = r.fp_count;
  j["tp_count"] = r.tp_count;
  j["lrc_rate"] = r.lrc_rate;
  j["ler"] = r.ler ? nlohmann::ordered_json(*r.ler) : nlohmann::ordered_json();
  j["ler_stderr"] = r.ler_stderr ? nlohmann::ordered_json(*r.ler_stderr) : nlohmann::ordered_json();
  j["lambda"] = r.lambda ? nlohmann::ordered_json(*r.lambda) : nlohmann::ordered_json();
  j["cycle_time_norm"] = r.cycle_time_norm;
  j["mobility_estimate"] =
      r.mobility_estimate ? nlohmann::ordered_json(*r.mobility_estimate) : nlohmann::ordered_json();
  return j.dump();
}

}  // namespace gladiator
