#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gladiator/analysis.hpp"
#include "gladiator/specgraph.hpp"

namespace gladiator {

// "surface", "color" or "file:<path>".
CodeKind parse_code_spec(const std::string& text, std::string* path);

// Flat key=value lines; '#' starts a comment. Throws ParseError.
std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in);

// Throws ConfigError on the first invalid field.
void validate_config(const ExperimentConfig& config);

// Fully resolved configuration as ordered key=value pairs.
std::vector<std::pair<std::string, std::string>> describe_config(const ExperimentConfig& config);

// Cache file name for one table; keyed by every parameter the table depends on.
std::string table_cache_name(CodeKind code, int arity, int rounds, const NoiseParams& noise,
                             double tau);

// Loads tables from dir when present, otherwise builds and stores them.
// An empty dir disables caching.
TableSet cached_tables(const std::string& dir, CodeKind code, const std::vector<int>& arities,
                       int rounds, const NoiseParams& noise, double tau);

// Prepares an experiment using the table cache for pattern tables.
ExperimentSetup prepare_cached(const ExperimentConfig& config, const std::string& tables_dir);

}  // namespace gladiator
