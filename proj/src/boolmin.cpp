#include "gladiator/boolmin.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gladiator/errors.hpp"

namespace gladiator {

int Term::literals() const { return std::popcount(care); }

std::uint32_t tag_bits(int arity, std::uint32_t bits, int width) {
  if (arity < 1 || arity + 1 > width) throw std::invalid_argument("tag width too small for arity");
  const int ones = width - arity - 1;
  return (((1u << ones) - 1) << (arity + 1)) | bits;
}

std::set<TaggedPattern> tag(const TableSet& tables, int target_width) {
  std::set<TaggedPattern> out;
  for (const auto& [arity, table] : tables) {
    const int w = table.arity * table.rounds;
    for (std::uint32_t bits : table.flagged()) out.insert({target_width, tag_bits(w, bits, target_width)});
  }
  return out;
}

std::set<std::uint32_t> valid_encodings(const std::vector<int>& arities, int target_width) {
  std::set<std::uint32_t> out;
  for (int a : arities)
    for (std::uint32_t b = 0; b < (1u << a); ++b) out.insert(tag_bits(a, b, target_width));
  return out;
}

std::vector<Term> prime_implicants(const std::set<std::uint32_t>& on_set, int width,
                                   const std::set<std::uint32_t>& dont_care) {
  if (width < 0 || width > 20) throw std::invalid_argument("unsupported width");
  const std::uint32_t full = width == 32 ? ~0u : (1u << width) - 1;
  std::set<Term> current;
  for (auto m : on_set) current.insert({full, m});
  for (auto m : dont_care) current.insert({full, m});

  std::set<Term> primes;
  while (!current.empty()) {
    std::set<Term> next;
    std::set<Term> merged;
    // Bucket by care mask; two terms merge when they differ in one cared bit.
    std::map<std::uint32_t, std::vector<Term>> by_care;
    for (const Term& t : current) by_care[t.care].push_back(t);
    for (auto& [care, terms] : by_care) {
      std::set<std::uint32_t> values;
      for (const Term& t : terms) values.insert(t.value);
      for (const Term& t : terms) {
        for (std::uint32_t bit = 1; bit <= care && bit != 0; bit <<= 1) {
          if (!(care & bit) || (t.value & bit)) continue;
          if (values.count(t.value | bit)) {
            next.insert({care & ~bit, t.value & ~bit});
            merged.insert(t);
            merged.insert({care, t.value | bit});
          }
        }
      }
    }
    for (const Term& t : current)
      if (!merged.count(t)) primes.insert(t);
    current = std::move(next);
  }
  std::vector<Term> out;
  for (const Term& t : primes)
    for (auto m : on_set)
      if (t.covers(m)) {
        out.push_back(t);
        break;
      }
  return out;
}

namespace {

using Bits = std::vector<std::uint64_t>;

bool any(const Bits& b) {
  for (auto w : b)
    if (w) return true;
  return false;
}

int count(const Bits& b) {
  int c = 0;
  for (auto w : b) c += std::popcount(w);
  return c;
}

struct Cost {
  std::size_t terms = 0;
  int literals = 0;
  std::vector<Term> sorted;
  bool operator<(const Cost& o) const {
    if (terms != o.terms) return terms < o.terms;
    if (literals != o.literals) return literals < o.literals;
    return sorted < o.sorted;
  }
};

class CoverSearch {
 public:
  CoverSearch(const std::vector<Term>& primes, const std::vector<std::uint32_t>& rows)
      : primes_(primes), words_((rows.size() + 63) / 64) {
    cover_.assign(primes.size(), Bits(words_, 0));
    for (std::size_t c = 0; c < primes.size(); ++c)
      for (std::size_t r = 0; r < rows.size(); ++r)
        if (primes[c].covers(rows[r])) cover_[c][r / 64] |= std::uint64_t{1} << (r % 64);
    rows_ = rows.size();
  }

  std::vector<Term> solve() {
    Bits uncovered(words_, 0);
    for (std::size_t r = 0; r < rows_; ++r) uncovered[r / 64] |= std::uint64_t{1} << (r % 64);
    std::vector<char> banned(primes_.size(), 0);
    std::vector<std::size_t> chosen;
    recurse(uncovered, banned, chosen);
    std::vector<Term> out;
    for (std::size_t c : best_) out.push_back(primes_[c]);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  // Node budget for the exact search; past it the best cover so far is kept.
  static constexpr long kNodeLimit = 2'000'000;

  Cost cost_of(const std::vector<std::size_t>& cols) const {
    Cost c;
    c.terms = cols.size();
    for (std::size_t i : cols) {
      c.literals += primes_[i].literals();
      c.sorted.push_back(primes_[i]);
    }
    std::sort(c.sorted.begin(), c.sorted.end());
    return c;
  }

  void recurse(Bits uncovered, std::vector<char> banned, std::vector<std::size_t> chosen) {
    if (++nodes_ > kNodeLimit && have_best_) return;
    // Essential columns: a row with a single remaining candidate.
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (!((uncovered[r / 64] >> (r % 64)) & 1u)) continue;
        std::size_t only = primes_.size();
        int n = 0;
        for (std::size_t c = 0; c < primes_.size() && n < 2; ++c)
          if (!banned[c] && ((cover_[c][r / 64] >> (r % 64)) & 1u)) {
            only = c;
            ++n;
          }
        if (n == 0) return;
        if (n == 1) {
          chosen.push_back(only);
          banned[only] = 1;
          for (std::size_t w = 0; w < words_; ++w) uncovered[w] &= ~cover_[only][w];
          changed = true;
        }
      }
    }
    if (!any(uncovered)) {
      Cost c = cost_of(chosen);
      if (!have_best_ || c < best_cost_) {
        best_cost_ = std::move(c);
        best_ = chosen;
        have_best_ = true;
      }
      return;
    }
    // Lower bound on additional terms.
    int max_gain = 0;
    for (std::size_t c = 0; c < primes_.size(); ++c) {
      if (banned[c]) continue;
      int gain = 0;
      for (std::size_t w = 0; w < words_; ++w) gain += std::popcount(cover_[c][w] & uncovered[w]);
      max_gain = std::max(max_gain, gain);
    }
    const std::size_t bound = chosen.size() + (count(uncovered) + max_gain - 1) / max_gain;
    if (have_best_ && bound > best_cost_.terms) return;

    // Branch on the row with the fewest candidates.
    std::size_t pick = rows_;
    int fewest = 1 << 30;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!((uncovered[r / 64] >> (r % 64)) & 1u)) continue;
      int n = 0;
      for (std::size_t c = 0; c < primes_.size(); ++c)
        if (!banned[c] && ((cover_[c][r / 64] >> (r % 64)) & 1u)) ++n;
      if (n < fewest) {
        fewest = n;
        pick = r;
      }
    }
    for (std::size_t c = 0; c < primes_.size(); ++c) {
      if (banned[c] || !((cover_[c][pick / 64] >> (pick % 64)) & 1u)) continue;
      Bits next = uncovered;
      for (std::size_t w = 0; w < words_; ++w) next[w] &= ~cover_[c][w];
      auto next_chosen = chosen;
      next_chosen.push_back(c);
      auto next_banned = banned;
      next_banned[c] = 1;
      recurse(next, next_banned, next_chosen);
      // Later branches exclude c; the branch above already covered it.
      banned[c] = 1;
    }
  }

  const std::vector<Term>& primes_;
  std::size_t words_;
  std::size_t rows_ = 0;
  std::vector<Bits> cover_;
  std::vector<std::size_t> best_;
  Cost best_cost_;
  bool have_best_ = false;
  long nodes_ = 0;
};

}  // namespace

DnfExpression minimize(const std::set<std::uint32_t>& on_set, int width,
                       const std::set<std::uint32_t>& dont_care) {
  DnfExpression expr;
  expr.width = width;
  for (auto m : on_set)
    if (width < 32 && (m >> width)) throw std::invalid_argument("minterm exceeds width");
  if (on_set.empty()) return expr;
  std::set<std::uint32_t> dc;
  for (auto m : dont_care)
    if (!on_set.count(m)) dc.insert(m);
  const auto primes = prime_implicants(on_set, width, dc);
  std::vector<std::uint32_t> rows(on_set.begin(), on_set.end());
  expr.terms = CoverSearch(primes, rows).solve();
  return expr;
}

DnfExpression minimize(const std::set<TaggedPattern>& flagged, int width) {
  std::set<std::uint32_t> on;
  for (const auto& t : flagged) {
    if (t.width != width) throw std::invalid_argument("tagged pattern width mismatch");
    on.insert(t.bits);
  }
  return minimize(on, width);
}

bool evaluate(const DnfExpression& expr, std::uint32_t input) {
  for (const Term& t : expr.terms)
    if (t.covers(input)) return true;
  return false;
}

std::vector<std::uint8_t> truth_table(const DnfExpression& expr) {
  std::vector<std::uint8_t> out(std::size_t{1} << expr.width);
  for (std::uint32_t v = 0; v < out.size(); ++v) out[v] = evaluate(expr, v);
  return out;
}

std::string to_string(const DnfExpression& expr) {
  std::ostringstream ss;
  write_dnf(expr, ss);
  return ss.str();
}

void write_dnf(const DnfExpression& expr, std::ostream& out) {
  for (const Term& t : expr.terms) {
    if (!t.care) {
      out << "1\n";
      continue;
    }
    bool first = true;
    for (int i = 0; i < 32; ++i) {
      if (!((t.care >> i) & 1u)) continue;
      if (!first) out << " & ";
      out << (((t.value >> i) & 1u) ? "" : "!") << 'x' << i;
      first = false;
    }
    out << "\n";
  }
}

DnfExpression parse_dnf(std::istream& in, int width) {
  DnfExpression expr;
  int max_var = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
               line.end());
    if (line.empty()) continue;
    Term term;
    if (line != "1") {
      std::istringstream ss(line);
      std::string lit;
      while (std::getline(ss, lit, '&')) {
        bool neg = false;
        std::size_t pos = 0;
        if (pos < lit.size() && (lit[pos] == '!' || lit[pos] == '~')) {
          neg = true;
          ++pos;
        }
        if (pos >= lit.size() || lit[pos] != 'x') throw ParseError(lineno, "bad literal '" + lit + "'");
        int idx = -1;
        try {
          std::size_t used = 0;
          idx = std::stoi(lit.substr(pos + 1), &used);
          if (used != lit.size() - pos - 1) idx = -1;
        } catch (const std::exception&) {
          idx = -1;
        }
        if (idx < 0 || idx > 31) throw ParseError(lineno, "bad variable in '" + lit + "'");
        const std::uint32_t bit = 1u << idx;
        if (term.care & bit) {
          if (((term.value & bit) != 0) == neg) throw ParseError(lineno, "contradictory literals");
          continue;
        }
        term.care |= bit;
        if (!neg) term.value |= bit;
        max_var = std::max(max_var, idx);
      }
    }
    expr.terms.push_back(term);
  }
  expr.width = width > 0 ? width : max_var + 1;
  if (max_var >= expr.width) throw ParseError(lineno, "variable index exceeds width");
  return expr;
}

DnfExpression parse_dnf(const std::string& text, int width) {
  std::istringstream ss(text);
  return parse_dnf(ss, width);
}

int lut_estimate(int d, int luts_per_checker, int deadline_slots) {
  if (d < 1 || deadline_slots < 1) throw std::invalid_argument("d and deadline_slots must be positive");
  const long long q = static_cast<long long>(d) * d;
  return luts_per_checker * static_cast<int>((q + deadline_slots - 1) / deadline_slots);
}

}  // namespace gladiator
