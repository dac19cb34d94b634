#pragma once

#include <cstdint>
#include <vector>

#include "gladiator/codes.hpp"
#include "gladiator/noise_sim.hpp"

namespace gladiator {

// Detector rows for every noisy round plus a final row reconstructed from the
// transversal data readout, and the true logical flips of that readout.
struct ShotSyndrome {
  std::vector<std::vector<std::uint8_t>> detectors;  // [round][ancilla index]
  bool x_flip = false;  // X-error logical flip (seen by Z checks)
  bool z_flip = false;  // Z-error logical flip (seen by X checks)
};

ShotSyndrome make_syndrome(const CodeLayout& layout,
                           const std::vector<std::vector<std::uint8_t>>& round_detectors,
                           const std::vector<std::uint8_t>& last_measurements,
                           const DataReadout& readout);

// Exact minimum-weight matching of defects with a boundary, given integer
// pair costs and boundary costs; returns the matched partner of each defect
// (-1 = boundary). Uses subset dynamic programming for small instances and
// a weighted blossom matcher otherwise.
struct MatchingProblem {
  std::vector<int> boundary_cost;
  // Candidate pair edges (i < j); absent pairs are never matched together.
  struct Edge {
    int i, j, cost;
  };
  std::vector<Edge> edges;
};
std::vector<int> solve_matching(const MatchingProblem& problem);
std::vector<int> solve_matching_blossom(const MatchingProblem& problem);
std::vector<int> solve_matching_dp(const MatchingProblem& problem);
long matching_cost(const MatchingProblem& problem, const std::vector<int>& mate);

class SurfaceDecoder {
 public:
  explicit SurfaceDecoder(const CodeLayout& layout);

  // Predicted logical flip for defects (check ancilla index, time) of one type.
  bool predict(CheckType type, const std::vector<std::pair<std::size_t, int>>& defects) const;
  // True when decoding leaves a logical X or Z error.
  bool logical_failure(const ShotSyndrome& syndrome) const;

 private:
  struct Graph {
    std::vector<int> local;  // ancilla index -> check index, -1 if other type
    std::vector<std::vector<int>> dist;
    std::vector<std::vector<std::uint8_t>> parity;
    std::vector<int> bdist;
    std::vector<std::uint8_t> bparity;
  };
  Graph build(CheckType type) const;

  const CodeLayout* layout_;
  Graph z_graph_;
  Graph x_graph_;
};

bool decode_surface(const ShotSyndrome& syndrome, const CodeLayout& layout);

// Maximum-likelihood lookup for a single round of perfect syndrome data on
// small codes: returns the predicted logical flip for each syndrome value.
class MlLookupDecoder {
 public:
  MlLookupDecoder(const CodeLayout& layout, CheckType type);
  bool predict(std::uint32_t syndrome) const { return table_.at(syndrome); }
  std::uint32_t syndrome_of(std::uint32_t error) const;
  bool logical_of(std::uint32_t error) const;
  // True when the minimum-weight classes for this syndrome tie.
  bool ambiguous(std::uint32_t syndrome) const { return ambiguous_.at(syndrome); }

 private:
  std::vector<std::uint32_t> check_masks_;
  std::uint32_t logical_mask_ = 0;
  std::vector<std::uint8_t> table_;
  std::vector<std::uint8_t> ambiguous_;
};

}  // namespace gladiator
