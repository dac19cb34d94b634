#include "gladiator/decoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gladiator/blossom.hpp"

namespace gladiator {

ShotSyndrome make_syndrome(const CodeLayout& layout,
                           const std::vector<std::vector<std::uint8_t>>& round_detectors,
                           const std::vector<std::uint8_t>& last_measurements,
                           const DataReadout& readout) {
  ShotSyndrome s;
  s.detectors = round_detectors;
  std::vector<std::uint8_t> last(layout.n_ancilla(), 0);
  for (std::size_t a = 0; a < layout.n_ancilla(); ++a) {
    const auto& frame = layout.ancilla_type[a] == CheckType::Z ? readout.x : readout.z;
    std::uint8_t v = 0;
    for (QubitId q : layout.stabilizers[a]) v ^= frame[q];
    last[a] = v ^ last_measurements[a];
  }
  s.detectors.push_back(std::move(last));
  for (QubitId q : layout.logical_z) s.x_flip ^= readout.x[q] != 0;
  for (QubitId q : layout.logical_x) s.z_flip ^= readout.z[q] != 0;
  return s;
}

long matching_cost(const MatchingProblem& problem, const std::vector<int>& mate) {
  long cost = 0;
  for (std::size_t i = 0; i < mate.size(); ++i) {
    if (mate[i] < 0) {
      cost += problem.boundary_cost[i];
    } else if (static_cast<std::size_t>(mate[i]) > i) {
      bool found = false;
      for (const auto& e : problem.edges)
        if (e.i == static_cast<int>(i) && e.j == mate[i]) {
          cost += e.cost;
          found = true;
          break;
        }
      if (!found) throw std::logic_error("matching uses an absent edge");
    }
  }
  return cost;
}

std::vector<int> solve_matching_dp(const MatchingProblem& problem) {
  const int n = static_cast<int>(problem.boundary_cost.size());
  if (n > 20) throw std::invalid_argument("subset DP limited to 20 defects");
  constexpr int kAbsent = std::numeric_limits<int>::max();
  std::vector<int> w(static_cast<std::size_t>(n * n), kAbsent);
  for (const auto& e : problem.edges) {
    w[static_cast<std::size_t>(e.i * n + e.j)] = std::min(w[static_cast<std::size_t>(e.i * n + e.j)], e.cost);
    w[static_cast<std::size_t>(e.j * n + e.i)] = w[static_cast<std::size_t>(e.i * n + e.j)];
  }
  const std::uint32_t full = (1u << n) - 1;
  std::vector<long> dp(full + 1, 0);
  std::vector<int> choice(full + 1, -1);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int i = std::countr_zero(mask);
    const std::uint32_t rest = mask & ~(1u << i);
    long best = problem.boundary_cost[static_cast<std::size_t>(i)] + dp[rest];
    int pick = -1;
    for (std::uint32_t m = rest; m; m &= m - 1) {
      const int j = std::countr_zero(m);
      const int c = w[static_cast<std::size_t>(i * n + j)];
      if (c == kAbsent) continue;
      const long v = c + dp[rest & ~(1u << j)];
      if (v < best) {
        best = v;
        pick = j;
      }
    }
    dp[mask] = best;
    choice[mask] = pick;
  }
  std::vector<int> mate(static_cast<std::size_t>(n), -1);
  for (std::uint32_t mask = full; mask;) {
    const int i = std::countr_zero(mask);
    const int j = choice[mask];
    mask &= ~(1u << i);
    if (j >= 0) {
      mate[static_cast<std::size_t>(i)] = j;
      mate[static_cast<std::size_t>(j)] = i;
      mask &= ~(1u << j);
    }
  }
  return mate;
}

std::vector<int> solve_matching_blossom(const MatchingProblem& problem) {
  // Cost = sum of boundary costs minus the gain of each matched pair, so a
  // maximum-gain matching is a minimum-cost one.
  const int n = static_cast<int>(problem.boundary_cost.size());
  std::vector<WeightedEdge> edges;
  for (const auto& e : problem.edges) {
    const long long gain = static_cast<long long>(problem.boundary_cost[static_cast<std::size_t>(e.i)]) +
                           problem.boundary_cost[static_cast<std::size_t>(e.j)] - e.cost;
    if (gain > 0) edges.push_back({e.i, e.j, gain});
  }
  return max_weight_matching(n, edges);
}

namespace {

constexpr int kDpLimit = 10;

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

std::vector<int> solve_matching(const MatchingProblem& problem) {
  const int n = static_cast<int>(problem.boundary_cost.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& e : problem.edges) {
    const int a = find_root(parent, e.i), b = find_root(parent, e.j);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  // Components of the candidate graph are independent subproblems.
  std::vector<std::vector<int>> comps(static_cast<std::size_t>(n));
  std::vector<int> local(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& c = comps[static_cast<std::size_t>(find_root(parent, i))];
    local[static_cast<std::size_t>(i)] = static_cast<int>(c.size());
    c.push_back(i);
  }
  std::vector<MatchingProblem> sub(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    sub[static_cast<std::size_t>(find_root(parent, i))].boundary_cost.push_back(
        problem.boundary_cost[static_cast<std::size_t>(i)]);
  for (const auto& e : problem.edges)
    sub[static_cast<std::size_t>(find_root(parent, e.i))].edges.push_back(
        {local[static_cast<std::size_t>(e.i)], local[static_cast<std::size_t>(e.j)], e.cost});

  std::vector<int> mate(static_cast<std::size_t>(n), -1);
  for (int r = 0; r < n; ++r) {
    const auto& members = comps[static_cast<std::size_t>(r)];
    if (members.size() < 2) continue;
    const auto& sp = sub[static_cast<std::size_t>(r)];
    const auto m = static_cast<int>(members.size()) <= kDpLimit ? solve_matching_dp(sp)
                                                                 : solve_matching_blossom(sp);
    for (std::size_t k = 0; k < members.size(); ++k)
      mate[static_cast<std::size_t>(members[k])] = m[k] < 0 ? -1 : members[static_cast<std::size_t>(m[k])];
  }
  return mate;
}

SurfaceDecoder::SurfaceDecoder(const CodeLayout& layout) : layout_(&layout) {
  if (layout.kind != CodeKind::Surface) throw std::invalid_argument("decoder supports surface codes only");
  if (layout.logical_x.empty() || layout.logical_z.empty())
    throw std::invalid_argument("layout lacks logical operators");
  z_graph_ = build(CheckType::Z);
  x_graph_ = build(CheckType::X);
}

SurfaceDecoder::Graph SurfaceDecoder::build(CheckType type) const {
  const CodeLayout& L = *layout_;
  Graph g;
  g.local.assign(L.n_ancilla(), -1);
  int m = 0;
  for (std::size_t a = 0; a < L.n_ancilla(); ++a)
    if (L.ancilla_type[a] == type) g.local[a] = m++;

  // Errors flagged by these checks anticommute with the opposite logical.
  const auto& logical = type == CheckType::Z ? L.logical_z : L.logical_x;
  std::vector<std::uint8_t> on_logical(L.n_data(), 0);
  for (QubitId q : logical) on_logical[q] = 1;

  struct Arc {
    int to;
    std::uint8_t parity;
  };
  std::vector<std::vector<Arc>> adj(static_cast<std::size_t>(m));
  std::vector<std::uint8_t> boundary_arc(static_cast<std::size_t>(m), 0);
  std::vector<char> has_boundary(static_cast<std::size_t>(m), 0);
  for (QubitId q = 0; q < L.n_data(); ++q) {
    std::vector<int> cs;
    for (QubitId anc : L.data_adjacency[q]) {
      const int c = g.local[L.ancilla_index(anc)];
      if (c >= 0) cs.push_back(c);
    }
    if (cs.size() == 2) {
      adj[static_cast<std::size_t>(cs[0])].push_back({cs[1], on_logical[q]});
      adj[static_cast<std::size_t>(cs[1])].push_back({cs[0], on_logical[q]});
    } else if (cs.size() == 1 && !has_boundary[static_cast<std::size_t>(cs[0])]) {
      has_boundary[static_cast<std::size_t>(cs[0])] = 1;
      boundary_arc[static_cast<std::size_t>(cs[0])] = on_logical[q];
    }
  }

  auto bfs = [&](std::vector<int> sources, std::vector<std::uint8_t> src_parity, std::vector<int> src_dist,
                 std::vector<int>& dist, std::vector<std::uint8_t>& par) {
    dist.assign(static_cast<std::size_t>(m), -1);
    par.assign(static_cast<std::size_t>(m), 0);
    // Sources may start at distance 1 (boundary); process by distance.
    std::vector<std::size_t> order(sources.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return src_dist[x] < src_dist[y]; });
    std::deque<int> queue;
    for (std::size_t k : order) {
      const int s = sources[k];
      if (dist[static_cast<std::size_t>(s)] >= 0) continue;
      dist[static_cast<std::size_t>(s)] = src_dist[k];
      par[static_cast<std::size_t>(s)] = src_parity[k];
      queue.push_back(s);
    }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const Arc& arc : adj[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(arc.to)] >= 0) continue;
        dist[static_cast<std::size_t>(arc.to)] = dist[static_cast<std::size_t>(u)] + 1;
        par[static_cast<std::size_t>(arc.to)] = par[static_cast<std::size_t>(u)] ^ arc.parity;
        queue.push_back(arc.to);
      }
    }
  };

  g.dist.resize(static_cast<std::size_t>(m));
  g.parity.resize(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) bfs({c}, {0}, {0}, g.dist[static_cast<std::size_t>(c)], g.parity[static_cast<std::size_t>(c)]);
  std::vector<int> srcs;
  std::vector<std::uint8_t> sp;
  std::vector<int> sd;
  for (int c = 0; c < m; ++c)
    if (has_boundary[static_cast<std::size_t>(c)]) {
      srcs.push_back(c);
      sp.push_back(boundary_arc[static_cast<std::size_t>(c)]);
      sd.push_back(1);
    }
  bfs(srcs, sp, sd, g.bdist, g.bparity);
  for (int c = 0; c < m; ++c) {
    if (g.bdist[static_cast<std::size_t>(c)] < 0) throw std::logic_error("check graph has no boundary path");
    for (int o = 0; o < m; ++o)
      if (g.dist[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)] < 0)
        throw std::logic_error("check graph is disconnected");
  }
  return g;
}

bool SurfaceDecoder::predict(CheckType type, const std::vector<std::pair<std::size_t, int>>& defects) const {
  const Graph& g = type == CheckType::Z ? z_graph_ : x_graph_;
  MatchingProblem prob;
  std::vector<int> check(defects.size());
  for (std::size_t i = 0; i < defects.size(); ++i) {
    check[i] = g.local.at(defects[i].first);
    if (check[i] < 0) throw std::invalid_argument("defect on a check of the other type");
    prob.boundary_cost.push_back(g.bdist[static_cast<std::size_t>(check[i])]);
  }
  // A pair edge that costs at least both boundary paths is never needed.
  for (std::size_t i = 0; i < defects.size(); ++i)
    for (std::size_t j = i + 1; j < defects.size(); ++j) {
      const int w = g.dist[static_cast<std::size_t>(check[i])][static_cast<std::size_t>(check[j])] +
                    std::abs(defects[i].second - defects[j].second);
      if (w < prob.boundary_cost[i] + prob.boundary_cost[j])
        prob.edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
    }
  const auto mate = solve_matching(prob);
  bool flip = false;
  for (std::size_t i = 0; i < mate.size(); ++i) {
    if (mate[i] < 0)
      flip ^= g.bparity[static_cast<std::size_t>(check[i])] != 0;
    else if (static_cast<std::size_t>(mate[i]) > i)
      flip ^= g.parity[static_cast<std::size_t>(check[i])][static_cast<std::size_t>(check[static_cast<std::size_t>(mate[i])])] != 0;
  }
  return flip;
}

bool SurfaceDecoder::logical_failure(const ShotSyndrome& syndrome) const {
  const CodeLayout& L = *layout_;
  std::vector<std::pair<std::size_t, int>> zdef, xdef;
  for (std::size_t t = 0; t < syndrome.detectors.size(); ++t)
    for (std::size_t a = 0; a < L.n_ancilla(); ++a) {
      if (!syndrome.detectors[t][a]) continue;
      (L.ancilla_type[a] == CheckType::Z ? zdef : xdef).emplace_back(a, static_cast<int>(t));
    }
  const bool x_wrong = predict(CheckType::Z, zdef) != syndrome.x_flip;
  const bool z_wrong = predict(CheckType::X, xdef) != syndrome.z_flip;
  return x_wrong || z_wrong;
}

bool decode_surface(const ShotSyndrome& syndrome, const CodeLayout& layout) {
  return SurfaceDecoder(layout).logical_failure(syndrome);
}

MlLookupDecoder::MlLookupDecoder(const CodeLayout& layout, CheckType type) {
  const std::size_t n = layout.n_data();
  if (n > 20) throw std::invalid_argument("lookup decoder limited to 20 data qubits");
  for (std::size_t a = 0; a < layout.n_ancilla(); ++a) {
    if (layout.ancilla_type[a] != type) continue;
    std::uint32_t m = 0;
    for (QubitId q : layout.stabilizers[a]) m |= 1u << q;
    check_masks_.push_back(m);
  }
  for (QubitId q : type == CheckType::Z ? layout.logical_z : layout.logical_x) logical_mask_ |= 1u << q;

  // Lowest error weight per (syndrome, class), then its multiplicity.
  const std::size_t syndromes = std::size_t{1} << check_masks_.size();
  constexpr int kNone = 1 << 20;
  std::vector<int> min_w(2 * syndromes, kNone);
  std::vector<long> mult(2 * syndromes, 0);
  for (std::uint32_t e = 0; e < (1u << n); ++e) {
    const std::size_t idx = 2 * syndrome_of(e) + logical_of(e);
    const int w = std::popcount(e);
    if (w < min_w[idx]) {
      min_w[idx] = w;
      mult[idx] = 1;
    } else if (w == min_w[idx]) {
      ++mult[idx];
    }
  }
  table_.assign(syndromes, 0);
  ambiguous_.assign(syndromes, 0);
  for (std::size_t s = 0; s < syndromes; ++s) {
    const int w0 = min_w[2 * s], w1 = min_w[2 * s + 1];
    const bool pick1 = w1 < w0 || (w1 == w0 && mult[2 * s + 1] > mult[2 * s]);
    table_[s] = pick1;
    ambiguous_[s] = w0 == w1;
  }
}

std::uint32_t MlLookupDecoder::syndrome_of(std::uint32_t error) const {
  std::uint32_t s = 0;
  for (std::size_t i = 0; i < check_masks_.size(); ++i)
    s |= static_cast<std::uint32_t>(std::popcount(error & check_masks_[i]) & 1) << i;
  return s;
}

bool MlLookupDecoder::logical_of(std::uint32_t error) const {
  return std::popcount(error & logical_mask_) & 1;
}

}  // namespace gladiator
