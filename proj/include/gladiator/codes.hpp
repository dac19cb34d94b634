#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gladiator {

using QubitId = std::uint32_t;

enum class CodeKind { Surface, Color666, External };
enum class CheckType { X, Z };

std::string to_string(CodeKind kind);

struct Coord {
  int x = 0;
  int y = 0;
  bool operator==(const Coord&) const = default;
};

// Qubit ids are dense: data qubits are 0..n_data-1, ancillas follow.
// Ancilla-indexed vectors use (id - n_data) as the index.
struct CodeLayout {
  CodeKind kind = CodeKind::External;
  std::string name;
  int distance = 1;

  std::vector<QubitId> data_qubits;
  std::vector<QubitId> ancilla_qubits;
  std::vector<CheckType> ancilla_type;

  // Per ancilla: data ids in CNOT order, with the time step of each CNOT.
  std::vector<std::vector<QubitId>> stabilizers;
  std::vector<std::vector<int>> cnot_steps;

  // Per data qubit: adjacent ancilla ids in CNOT-time order (MSB first).
  std::vector<std::vector<QubitId>> data_adjacency;

  // Optional geometry, one entry per qubit when present.
  std::vector<Coord> coords;

  // Logical operator supports (data ids); empty when unknown.
  std::vector<QubitId> logical_x;
  std::vector<QubitId> logical_z;

  std::size_t n_data() const { return data_qubits.size(); }
  std::size_t n_ancilla() const { return ancilla_qubits.size(); }
  std::size_t n_qubits() const { return n_data() + n_ancilla(); }
  bool is_data(QubitId q) const { return q < n_data(); }
  std::size_t ancilla_index(QubitId q) const { return q - n_data(); }
  int num_steps() const;

  // Arities present among data qubits, ascending.
  std::vector<int> arities() const;

  bool operator==(const CodeLayout&) const = default;
};

struct ColorGrouping {
  std::vector<std::vector<QubitId>> groups;
  int group_count = 0;
};

CodeLayout build_surface_code(int d);
CodeLayout build_color_code(int d);

// Derives data_adjacency from stabilizers and cnot_steps, then validates.
void finalize_layout(CodeLayout& layout);

// Throws std::invalid_argument when data_adjacency is not the transpose of
// stabilizers or ids are out of range.
void validate_layout(const CodeLayout& layout);

CodeLayout load_code(const std::string& path);
CodeLayout parse_code(std::istream& in);
void save_code(const CodeLayout& layout, std::ostream& out);

// Conflict graph used for staggered LRC grouping.
std::vector<std::vector<QubitId>> king_neighbors(const CodeLayout& layout);

ColorGrouping color_groups(const CodeLayout& layout, int n);

}  // namespace gladiator
