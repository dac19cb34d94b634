#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "gladiator/specgraph.hpp"

namespace gladiator {

// Variable x_i is bit i of the input; x_0 is the least-significant pattern
// bit and the highest variables hold the index tag.
struct TaggedPattern {
  int width = 0;
  std::uint32_t bits = 0;
  auto operator<=>(const TaggedPattern&) const = default;
};

// A product term: literal on x_i iff bit i of care is set, polarity from value.
struct Term {
  std::uint32_t care = 0;
  std::uint32_t value = 0;

  bool covers(std::uint32_t input) const { return (input & care) == value; }
  int literals() const;
  auto operator<=>(const Term&) const = default;
};

struct DnfExpression {
  int width = 0;
  std::vector<Term> terms;  // empty list = constant false
};

// Prefix of (width - arity - 1) ones then a zero, followed by the pattern.
std::uint32_t tag_bits(int arity, std::uint32_t bits, int width);
std::set<TaggedPattern> tag(const TableSet& tables, int target_width);
// Every tagged vector that encodes some pattern of the given arities.
std::set<std::uint32_t> valid_encodings(const std::vector<int>& arities, int target_width);

DnfExpression minimize(const std::set<std::uint32_t>& on_set, int width,
                       const std::set<std::uint32_t>& dont_care = {});
DnfExpression minimize(const std::set<TaggedPattern>& flagged, int width);

bool evaluate(const DnfExpression& expr, std::uint32_t input);
std::vector<std::uint8_t> truth_table(const DnfExpression& expr);

// Prime implicants of on_set ∪ dont_care that cover at least one on-set minterm.
std::vector<Term> prime_implicants(const std::set<std::uint32_t>& on_set, int width,
                                   const std::set<std::uint32_t>& dont_care = {});

std::string to_string(const DnfExpression& expr);
void write_dnf(const DnfExpression& expr, std::ostream& out);
// Width defaults to the highest variable index + 1 when zero.
DnfExpression parse_dnf(std::istream& in, int width = 0);
DnfExpression parse_dnf(const std::string& text, int width = 0);

int lut_estimate(int d, int luts_per_checker = 10, int deadline_slots = 100);

}  // namespace gladiator
