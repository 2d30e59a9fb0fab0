// Backward closure: relation sets that would close every open branch of a
// failed proof, filtered down to plausible explanations.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "natab/kb.hpp"
#include "natab/problem.hpp"
#include "natab/tableau.hpp"

namespace natab {

enum class AbductionMode { shared, hitting };
std::string_view mode_name(AbductionMode m);
std::optional<AbductionMode> parse_mode(std::string_view s);

struct FilterSet {
  bool shape = true;
  bool comparable = true;
  bool lexicalized = true;
  bool kb_consistent = true;
  bool drop_b_dis_ab = true;
  bool sentence_consistent = true;

  static FilterSet all() { return {}; }
  static FilterSet none() { return {false, false, false, false, false, false}; }
  // Comma-separated names; "all", "none", and "-name" to switch one off.
  static FilterSet parse(std::string_view list);
  std::string text() const;
  friend bool operator==(const FilterSet&, const FilterSet&) = default;
};

struct AbductionConfig {
  AbductionMode mode = AbductionMode::shared;
  FilterSet filters;
  std::size_t sentence_check_budget = 20;
  std::size_t max_tsets = 64;
  std::size_t hard_ceiling = 4096;
};

struct BasisRelation {
  Relation relation;
  std::size_t branch;  // leaf node id
  EntryId first;       // T entry
  EntryId second;
};

struct TSet {
  std::vector<Relation> relations;  // sorted, unique
  std::string problem_id;
  std::optional<int> impact;
  std::size_t atomic_term_count = 0;
  bool minimal = false;

  static TSet of(std::vector<Relation> rels, std::string problem_id = {});
  // "{boy.n <= young.adj, hedgehog.n <= small.adj}"
  std::string text() const;
  bool subset_of(const TSet& other) const;
};

// Orders by atomic term count, then relation list.
bool tset_less(const TSet& a, const TSet& b);

class CombinatorialLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AbductionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Candidate relations that would close `branch` on their own, one per
// distinct relation (first witness pair kept).
std::vector<BasisRelation> branch_basis(const Tableau& t, const Branch& branch, const KB& kb,
                                        const AbductionConfig& cfg);

// Non-empty subsets of the relations common to every basis.
std::vector<TSet> shared_tsets(const std::vector<std::vector<BasisRelation>>& bases,
                               const AbductionConfig& cfg);

// Sets that pick at least one relation from every basis and nothing else.
// Minimal ones are flagged. Throws CombinatorialLimitError past the ceiling.
std::vector<TSet> hitting_tsets(const std::vector<std::vector<BasisRelation>>& bases,
                                const AbductionConfig& cfg);

// Every subset of the basis union that closes all open branches of t, which
// also covers branches closed only by several relations together. Same
// ordering, flags and limits as above.
std::vector<TSet> hitting_tsets(const Tableau& t, const KB& kb, const AbductionConfig& cfg);

// False when some sentence of the problem, signed T on its own, closes under
// kb extended with ts.
bool sentence_consistent(const TSet& ts, const Problem& problem, const KB& kb,
                         const AbductionConfig& cfg);

// True when some relation of ts conflicts with kb plus the rest of ts.
bool internally_conflicting(const TSet& ts, const KB& kb);

// Verified, inclusion-minimal explanations for a failed gold E/C problem.
std::vector<TSet> abduce(const Problem& problem, const ProverVerdict& verdict, const KB& kb,
                         const AbductionConfig& cfg);

// The tableau whose closure yields the gold label.
const Tableau& gold_tableau(const ProverVerdict& v, Label gold);

}  // namespace natab
