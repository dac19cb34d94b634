#pragma once

#include <vector>

namespace gladiator {

struct WeightedEdge {
  int i = 0;
  int j = 0;
  long long weight = 0;
};

// Maximum-weight matching in a general graph (Edmonds' blossom algorithm,
// O(n^3) primal-dual). Returns mate[v] or -1. With max_cardinality the result
// is the heaviest among maximum-cardinality matchings. Integer weights only.
std::vector<int> max_weight_matching(int n_vertices, const std::vector<WeightedEdge>& edges,
                                     bool max_cardinality = false);

}  // namespace gladiator
