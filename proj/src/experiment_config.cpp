#include "gladiator/experiment_config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gladiator/errors.hpp"

namespace gladiator {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

CodeKind parse_code_spec(const std::string& text, std::string* path) {
  if (text == "surface") return CodeKind::Surface;
  if (text == "color") return CodeKind::Color666;
  const std::string prefix = "file:";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size()) {
    if (path) *path = text.substr(prefix.size());
    return CodeKind::External;
  }
  throw ConfigError("unknown code '" + text + "' (expected surface, color or file:<path>)");
}

std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return v.substr(b, v.find_last_not_of(" \t\r") - b + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void validate_config(const ExperimentConfig& c) {
  if (c.code != CodeKind::External && (c.distance < 3 || c.distance % 2 == 0))
    throw ConfigError("distance must be odd and >= 3");
  if (c.code == CodeKind::External && c.code_path.empty()) throw ConfigError("external code needs a file path");
  if (c.rounds < 1) throw ConfigError("rounds must be positive");
  if (c.shots < 1) throw ConfigError("shots must be positive");
  if (c.jobs < 1) throw ConfigError("jobs must be positive");
  if (!(c.tau > 0.0)) throw ConfigError("tau must be positive");
  if (c.lrc_latency < 0.0 || c.readout_latency < 0.0) throw ConfigError("latencies must be nonnegative");
  try {
    c.noise.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> describe_config(const ExperimentConfig& c) {
  const char* readout = c.noise.leaked_readout == LeakedReadout::Random ? "random"
                        : c.noise.leaked_readout == LeakedReadout::One  ? "one"
                                                                        : "last";
  return {{"code", c.code == CodeKind::External ? "file:" + c.code_path : to_string(c.code)},
          {"distance", std::to_string(c.distance)},
          {"p", num(c.noise.p)},
          {"lr", num(c.noise.lr)},
          {"mobility", num(c.noise.mobility)},
          {"mlr", num(c.noise.mlr)},
          {"reset-clears-leakage", c.noise.reset_clears_leakage ? "true" : "false"},
          {"lrc-error-scale", num(c.noise.lrc_error_scale)},
          {"leaked-readout", readout},
          {"rounds", std::to_string(c.rounds)},
          {"shots", std::to_string(c.shots)},
          {"policy", to_string(c.policy)},
          {"tau", num(c.tau)},
          {"seed", std::to_string(c.seed)},
          {"leakage-sampling", c.leakage_sampling ? "true" : "false"},
          {"lrc-latency", num(c.lrc_latency)},
          {"readout-latency", num(c.readout_latency)},
          {"version", kToolVersion}};
}

std::string table_cache_name(CodeKind code, int arity, int rounds, const NoiseParams& noise, double tau) {
  return to_string(code) + "_a" + std::to_string(arity) + "_r" + std::to_string(rounds) + "_p" +
         num(noise.p) + "_lr" + num(noise.lr) + "_tau" + num(tau) + "_v" + kToolVersion + ".table";
}

TableSet cached_tables(const std::string& dir, CodeKind code, const std::vector<int>& arities, int rounds,
                       const NoiseParams& noise, double tau) {
  TableSet out;
  for (int a : arities) {
    std::filesystem::path file;
    if (!dir.empty()) {
      file = std::filesystem::path(dir) / table_cache_name(code, a, rounds, noise, tau);
      if (std::ifstream in(file); in) {
        PatternTable t = read_table(in);
        if (t.arity == a && t.rounds == rounds) {
          out.emplace(a, std::move(t));
          continue;
        }
      }
    }
    TableSet built = rounds == 1 ? build_gladiator_table({a}, noise, tau) : build_gladiator_d_table({a}, noise, tau);
    PatternTable t = std::move(built.at(a));
    t.code = to_string(code);
    if (!dir.empty()) {
      std::filesystem::create_directories(dir);
      std::ofstream os(file);
      if (!os) throw ConfigError("cannot write table cache " + file.string());
      write_table(t, os);
    }
    out.emplace(a, std::move(t));
  }
  return out;
}

ExperimentSetup prepare_cached(const ExperimentConfig& config, const std::string& tables_dir) {
  ExperimentSetup setup;
  setup.layout = make_layout(config);
  const auto arities = setup.layout.arities();
  if (config.policy.needs_single_tables())
    setup.tables.single = cached_tables(tables_dir, config.code, arities, 1, config.noise, config.tau);
  if (config.policy.needs_double_tables())
    setup.tables.twofold = cached_tables(tables_dir, config.code, arities, 2, config.noise, config.tau);
  if (config.policy.kind == PolicyKind::Staggered)
    setup.grouping = color_groups(setup.layout, config.policy.stagger);
  return setup;
}

}  // namespace gladiator
