#include "gladiator/codes.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gladiator/errors.hpp"

namespace gladiator {

std::string to_string(CodeKind kind) {
  switch (kind) {
    case CodeKind::Surface: return "surface";
    case CodeKind::Color666: return "color";
    case CodeKind::External: return "external";
  }
  return "unknown";
}

int CodeLayout::num_steps() const {
  int steps = 0;
  for (const auto& s : cnot_steps)
    for (int t : s) steps = std::max(steps, t + 1);
  return steps;
}

std::vector<int> CodeLayout::arities() const {
  std::vector<int> out;
  for (const auto& adj : data_adjacency) out.push_back(static_cast<int>(adj.size()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

void check_odd_distance(int d) {
  if (d < 3 || d % 2 == 0)
    throw std::invalid_argument("distance must be odd and >= 3, got " + std::to_string(d));
}

// Parity of |support ∩ check| for every check of the given type.
bool commutes_with_all(const CodeLayout& layout, const std::vector<QubitId>& support,
                       CheckType type) {
  std::vector<char> in(layout.n_data(), 0);
  for (QubitId q : support) in[q] = 1;
  for (std::size_t a = 0; a < layout.n_ancilla(); ++a) {
    if (layout.ancilla_type[a] != type) continue;
    int overlap = 0;
    for (QubitId q : layout.stabilizers[a]) overlap += in[q];
    if (overlap % 2) return false;
  }
  return true;
}

}  // namespace

void finalize_layout(CodeLayout& layout) {
  const std::size_t n = layout.n_data();
  std::vector<std::vector<std::pair<int, QubitId>>> timed(n);
  for (std::size_t a = 0; a < layout.n_ancilla(); ++a) {
    const auto& stab = layout.stabilizers[a];
    for (std::size_t i = 0; i < stab.size(); ++i) {
      if (stab[i] >= n)
        throw std::invalid_argument("stabilizer of ancilla " +
                                    std::to_string(layout.ancilla_qubits[a]) +
                                    " references unknown data qubit " + std::to_string(stab[i]));
      timed[stab[i]].emplace_back(layout.cnot_steps[a][i], layout.ancilla_qubits[a]);
    }
  }
  layout.data_adjacency.assign(n, {});
  for (std::size_t q = 0; q < n; ++q) {
    std::sort(timed[q].begin(), timed[q].end());
    for (const auto& [step, anc] : timed[q]) layout.data_adjacency[q].push_back(anc);
  }
  validate_layout(layout);
}

void validate_layout(const CodeLayout& layout) {
  const std::size_t n = layout.n_data();
  const std::size_t m = layout.n_ancilla();
  for (std::size_t i = 0; i < n; ++i)
    if (layout.data_qubits[i] != i) throw std::invalid_argument("data qubit ids must be 0..n_data-1");
  for (std::size_t i = 0; i < m; ++i)
    if (layout.ancilla_qubits[i] != n + i)
      throw std::invalid_argument("ancilla ids must follow data ids contiguously");
  if (layout.ancilla_type.size() != m || layout.stabilizers.size() != m ||
      layout.cnot_steps.size() != m)
    throw std::invalid_argument("per-ancilla tables have inconsistent sizes");
  if (layout.data_adjacency.size() != n)
    throw std::invalid_argument("data_adjacency size differs from data qubit count");

  std::map<std::pair<QubitId, QubitId>, int> forward;
  for (std::size_t a = 0; a < m; ++a) {
    const auto& stab = layout.stabilizers[a];
    if (stab.empty()) throw std::invalid_argument("empty stabilizer");
    if (layout.cnot_steps[a].size() != stab.size())
      throw std::invalid_argument("cnot_steps size differs from stabilizer size");
    for (QubitId q : stab) {
      if (q >= n) throw std::invalid_argument("stabilizer references unknown data qubit " + std::to_string(q));
      if (forward[{q, layout.ancilla_qubits[a]}]++)
        throw std::invalid_argument("duplicate data qubit in stabilizer");
    }
  }
  std::size_t backward = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (layout.data_adjacency[q].empty())
      throw std::invalid_argument("data qubit " + std::to_string(q) + " is in no stabilizer");
    for (QubitId anc : layout.data_adjacency[q]) {
      auto it = forward.find({static_cast<QubitId>(q), anc});
      if (it == forward.end() || it->second != 1)
        throw std::invalid_argument("data_adjacency is not the transpose of stabilizers");
      ++backward;
    }
  }
  if (backward != forward.size())
    throw std::invalid_argument("data_adjacency is not the transpose of stabilizers");
  if (layout.coords.size() && layout.coords.size() != n + m)
    throw std::invalid_argument("coords must cover every qubit");
}

CodeLayout build_surface_code(int d) {
  check_odd_distance(d);
  CodeLayout layout;
  layout.kind = CodeKind::Surface;
  layout.name = "surface_d" + std::to_string(d);
  layout.distance = d;

  const QubitId n = static_cast<QubitId>(d * d);
  for (QubitId q = 0; q < n; ++q) {
    layout.data_qubits.push_back(q);
    layout.coords.push_back({2 * static_cast<int>(q % d) + 1, 2 * static_cast<int>(q / d) + 1});
  }
  auto data_at = [d](int x, int y) -> int {
    if (x < 0 || y < 0 || x > 2 * d || y > 2 * d || x % 2 == 0 || y % 2 == 0) return -1;
    return (y / 2) * d + x / 2;
  };

  // Direction offsets (y grows northwards).
  const Coord nw{-1, 1}, ne{1, 1}, sw{-1, -1}, se{1, -1};
  const Coord z_order[4] = {nw, sw, ne, se};
  const Coord x_order[4] = {nw, ne, sw, se};

  for (int b = 0; b <= d; ++b) {
    for (int a = 0; a <= d; ++a) {
      const CheckType type = (a + b) % 2 == 0 ? CheckType::Z : CheckType::X;
      const bool interior = a >= 1 && a <= d - 1 && b >= 1 && b <= d - 1;
      const bool top_bottom = (b == 0 || b == d) && a >= 1 && a <= d - 1 && type == CheckType::X;
      const bool left_right = (a == 0 || a == d) && b >= 1 && b <= d - 1 && type == CheckType::Z;
      if (!interior && !top_bottom && !left_right) continue;
      const Coord* order = type == CheckType::Z ? z_order : x_order;
      std::vector<QubitId> stab;
      std::vector<int> steps;
      for (int t = 0; t < 4; ++t) {
        int q = data_at(2 * a + order[t].x, 2 * b + order[t].y);
        if (q < 0) continue;
        stab.push_back(static_cast<QubitId>(q));
        steps.push_back(t);
      }
      layout.ancilla_qubits.push_back(n + static_cast<QubitId>(layout.ancilla_qubits.size()));
      layout.ancilla_type.push_back(type);
      layout.stabilizers.push_back(std::move(stab));
      layout.cnot_steps.push_back(std::move(steps));
      layout.coords.push_back({2 * a, 2 * b});
    }
  }
  finalize_layout(layout);

  // Logical operators are a full row or column; pick whichever commutes.
  std::vector<QubitId> row, col;
  for (int i = 0; i < d; ++i) {
    row.push_back(static_cast<QubitId>(i));
    col.push_back(static_cast<QubitId>(i * d));
  }
  layout.logical_z = commutes_with_all(layout, row, CheckType::X) ? row : col;
  layout.logical_x = commutes_with_all(layout, row, CheckType::Z) ? row : col;
  return layout;
}

CodeLayout build_color_code(int d) {
  check_odd_distance(d);
  // Triangular lattice points (a, b); hexagon centres are the points with
  // (a - b) mod 3 == 0, the remaining points are data qubits.
  const int top = 3 * (d - 1) / 2 - 1;
  auto in_region = [top](int a, int b) { return a >= -1 && b >= 0 && a + b <= top; };
  auto is_face = [](int a, int b) { return ((a - b) % 3 + 3) % 3 == 0; };
  const int nbr[6][2] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};

  CodeLayout layout;
  layout.kind = CodeKind::Color666;
  layout.name = "color_d" + std::to_string(d);
  layout.distance = d;

  std::map<std::pair<int, int>, QubitId> data_id;
  for (int b = 0; b <= top + 1; ++b)
    for (int a = -1; a <= top; ++a)
      if (in_region(a, b) && !is_face(a, b)) {
        QubitId q = static_cast<QubitId>(data_id.size());
        data_id[{a, b}] = q;
        layout.data_qubits.push_back(q);
        layout.coords.push_back({a, b});
      }
  const QubitId n = static_cast<QubitId>(layout.data_qubits.size());

  std::vector<std::vector<int>> used(n);
  for (int b = -2; b <= top + 2; ++b) {
    for (int a = -3; a <= top + 2; ++a) {
      if (!is_face(a, b)) continue;
      std::vector<QubitId> stab;
      for (const auto& o : nbr) {
        auto it = data_id.find({a + o[0], b + o[1]});
        if (it != data_id.end()) stab.push_back(it->second);
      }
      if (stab.size() < 4) continue;
      std::vector<int> steps;
      int t = 0;
      for (QubitId q : stab) {
        while (std::find(used[q].begin(), used[q].end(), t) != used[q].end()) ++t;
        used[q].push_back(t);
        steps.push_back(t++);
      }
      layout.ancilla_qubits.push_back(n + static_cast<QubitId>(layout.ancilla_qubits.size()));
      layout.ancilla_type.push_back(CheckType::Z);
      layout.stabilizers.push_back(std::move(stab));
      layout.cnot_steps.push_back(std::move(steps));
      layout.coords.push_back({a, b});
    }
  }
  finalize_layout(layout);
  return layout;
}

CodeLayout load_code(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open code file: " + path);
  return parse_code(in);
}

CodeLayout parse_code(std::istream& in) {
  CodeLayout layout;
  layout.kind = CodeKind::External;
  std::size_t n_data = 0, n_anc = 0;
  bool have_header = false;
  std::vector<char> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string head;
    if (!(ss >> head)) continue;
    if (!have_header) {
      long long nd = -1, na = -1;
      if (head != "code" || !(ss >> layout.name >> nd >> na) || nd <= 0 || na < 0)
        throw ParseError(lineno, "expected header 'code <name> <n_data> <n_ancilla>'");
      n_data = static_cast<std::size_t>(nd);
      n_anc = static_cast<std::size_t>(na);
      for (std::size_t q = 0; q < n_data; ++q) layout.data_qubits.push_back(static_cast<QubitId>(q));
      for (std::size_t a = 0; a < n_anc; ++a)
        layout.ancilla_qubits.push_back(static_cast<QubitId>(n_data + a));
      layout.ancilla_type.assign(n_anc, CheckType::Z);
      layout.stabilizers.assign(n_anc, {});
      layout.cnot_steps.assign(n_anc, {});
      seen.assign(n_anc, 0);
      have_header = true;
      continue;
    }
    if (head == "distance") {
      if (!(ss >> layout.distance) || layout.distance < 1)
        throw ParseError(lineno, "invalid distance");
      continue;
    }
    long long id = -1;
    try {
      std::size_t pos = 0;
      id = std::stoll(head, &pos);
      if (pos != head.size()) id = -1;
    } catch (const std::exception&) {
      id = -1;
    }
    if (id < static_cast<long long>(n_data) || id >= static_cast<long long>(n_data + n_anc))
      throw ParseError(lineno, "ancilla id '" + head + "' out of range");
    const std::size_t a = static_cast<std::size_t>(id) - n_data;
    if (seen[a]++) throw ParseError(lineno, "duplicate ancilla " + head);
    std::string type;
    if (!(ss >> type) || (type != "X" && type != "Z"))
      throw ParseError(lineno, "expected check type X or Z");
    layout.ancilla_type[a] = type == "X" ? CheckType::X : CheckType::Z;
    std::string tok;
    while (ss >> tok) {
      long long q = -1, step = static_cast<long long>(layout.stabilizers[a].size());
      auto at = tok.find('@');
      try {
        q = std::stoll(tok.substr(0, at));
        if (at != std::string::npos) step = std::stoll(tok.substr(at + 1));
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad data qubit token '" + tok + "'");
      }
      if (q < 0 || q >= static_cast<long long>(n_data))
        throw ParseError(lineno, "data qubit " + std::to_string(q) + " not declared");
      if (step < 0) throw ParseError(lineno, "negative CNOT step");
      layout.stabilizers[a].push_back(static_cast<QubitId>(q));
      layout.cnot_steps[a].push_back(static_cast<int>(step));
    }
    if (layout.stabilizers[a].empty()) throw ParseError(lineno, "ancilla has no data qubits");
  }
  if (!have_header) throw ParseError(lineno, "missing header");
  for (std::size_t a = 0; a < n_anc; ++a)
    if (!seen[a]) throw ParseError(lineno, "ancilla " + std::to_string(n_data + a) + " not described");
  try {
    finalize_layout(layout);
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
  return layout;
}

void save_code(const CodeLayout& layout, std::ostream& out) {
  out << "# kind " << to_string(layout.kind) << "\n";
  out << "code " << layout.name << ' ' << layout.n_data() << ' ' << layout.n_ancilla() << "\n";
  out << "distance " << layout.distance << "\n";
  for (std::size_t a = 0; a < layout.n_ancilla(); ++a) {
    out << layout.ancilla_qubits[a] << ' ' << (layout.ancilla_type[a] == CheckType::X ? 'X' : 'Z');
    for (std::size_t i = 0; i < layout.stabilizers[a].size(); ++i)
      out << ' ' << layout.stabilizers[a][i] << '@' << layout.cnot_steps[a][i];
    out << "\n";
  }
}

std::vector<std::vector<QubitId>> king_neighbors(const CodeLayout& layout) {
  const std::size_t total = layout.n_qubits();
  std::vector<std::vector<QubitId>> nb(total);
  if (layout.kind == CodeKind::Surface && layout.coords.size() == total) {
    // Rotate into the square qubit grid, where CNOT partners are orthogonal
    // neighbours, then take the 8-neighbourhood.
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t j = i + 1; j < total; ++j) {
        const Coord& a = layout.coords[i];
        const Coord& b = layout.coords[j];
        const int du = ((a.x + a.y) - (b.x + b.y)) / 2;
        const int dv = ((a.x - a.y) - (b.x - b.y)) / 2;
        if (std::max(std::abs(du), std::abs(dv)) == 1) {
          nb[i].push_back(static_cast<QubitId>(j));
          nb[j].push_back(static_cast<QubitId>(i));
        }
      }
    return nb;
  }
  // Without a square grid: interaction-graph distance <= 2.
  std::vector<std::vector<QubitId>> direct(total);
  for (std::size_t a = 0; a < layout.n_ancilla(); ++a)
    for (QubitId q : layout.stabilizers[a]) {
      direct[layout.ancilla_qubits[a]].push_back(q);
      direct[q].push_back(layout.ancilla_qubits[a]);
    }
  for (std::size_t i = 0; i < total; ++i) {
    std::vector<QubitId> acc = direct[i];
    for (QubitId j : direct[i]) acc.insert(acc.end(), direct[j].begin(), direct[j].end());
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    acc.erase(std::remove(acc.begin(), acc.end(), static_cast<QubitId>(i)), acc.end());
    nb[i] = std::move(acc);
  }
  return nb;
}

ColorGrouping color_groups(const CodeLayout& layout, int n) {
  if (n < 1) throw std::invalid_argument("group count must be positive");
  const std::size_t total = layout.n_qubits();
  const auto nb = king_neighbors(layout);

  std::vector<QubitId> order(total);
  std::iota(order.begin(), order.end(), 0);
  if (layout.coords.size() == total) {
    std::stable_sort(order.begin(), order.end(), [&](QubitId a, QubitId b) {
      const Coord& ca = layout.coords[a];
      const Coord& cb = layout.coords[b];
      const int ua = ca.x + ca.y, ub = cb.x + cb.y;
      if (ua != ub) return ua < ub;
      return ca.x - ca.y < cb.x - cb.y;
    });
  }

  // On the square qubit grid the parity class of (u, v) is tried first,
  // which keeps greedy within four colors.
  const bool grid = layout.kind == CodeKind::Surface && layout.coords.size() == total;
  std::vector<int> color(total, -1);
  for (QubitId q : order) {
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (QubitId o : nb[q])
      if (color[o] >= 0 && color[o] < n) taken[static_cast<std::size_t>(color[o])] = 1;
    int c = n;
    if (grid) {
      const Coord& p = layout.coords[q];
      const int u = (((p.x + p.y) / 2) % 2 + 2) % 2;
      const int v = (((p.x - p.y) / 2) % 2 + 2) % 2;
      const int hint = (2 * u + v) % n;
      if (!taken[static_cast<std::size_t>(hint)]) c = hint;
    }
    if (c == n) {
      c = 0;
      while (c < n && taken[static_cast<std::size_t>(c)]) ++c;
    }
    if (c == n)
      throw std::runtime_error("greedy coloring with " + std::to_string(n) +
                               " colors is infeasible for layout " + layout.name);
    color[q] = c;
  }
  ColorGrouping grouping;
  grouping.group_count = n;
  grouping.groups.assign(static_cast<std::size_t>(n), {});
  for (QubitId q = 0; q < total; ++q) grouping.groups[static_cast<std::size_t>(color[q])].push_back(q);
  return grouping;
}

}  // namespace gladiator
