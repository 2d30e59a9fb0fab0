// Signed natural-logic tableau: rule application under a budget, closure
// against a KB, and three-way classification of inference problems.

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "natab/kb.hpp"
#include "natab/llf.hpp"

namespace natab {

enum class Sign { T, F };
std::string_view sign_name(Sign s);

enum class Label { entailment, contradiction, neutral };
std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view s);

using EntryId = std::size_t;

struct Origin {
  std::string rule;  // "init" for root entries
  std::vector<EntryId> premises;
  std::optional<Term> entity;
};

struct Entry {
  EntryId id = 0;
  Term term;
  std::vector<Term> args;
  Sign sign = Sign::T;
  Origin origin;

  // "cradle.v : [c1,c2] : T"
  std::string text() const;
};

enum class ClosureRule { id, sub, dis };
std::string_view closure_rule_name(ClosureRule r);

struct Closure {
  ClosureRule rule;
  EntryId first;
  EntryId second;
};

struct AppliedRecord {
  std::string rule;
  EntryId entry;
  std::string entity;
  friend auto operator<=>(const AppliedRecord&, const AppliedRecord&) = default;
};

enum class BranchStatus { open, closed, saturated };
std::string_view branch_status_name(BranchStatus s);

struct Branch {
  std::size_t id = 0;    // tree node of the leaf
  std::vector<EntryId> entries;
  std::vector<Term> entities;
  std::set<AppliedRecord> applied;
  BranchStatus status = BranchStatus::open;
  std::optional<Closure> closure;
};

struct TreeNode {
  std::vector<EntryId> entries;
  std::vector<std::size_t> children;
};

struct RuleApplication {
  std::string rule;
  EntryId premise;
  std::optional<Term> entity;
  std::size_t branch;  // leaf node id at application time
  std::vector<std::vector<EntryId>> produced;  // one list per child
};

class Tableau {
 public:
  Tableau() = default;

  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& entry(EntryId id) const { return entries_.at(id - 1); }
  // Leaves in left-to-right order.
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<RuleApplication>& log() const { return log_; }
  const KB& kb() const { return kb_; }

  std::size_t budget_used() const { return budget_used_; }
  std::size_t budget_max() const { return budget_max_; }
  bool budget_exhausted() const { return budget_exhausted_; }

  // True when there is at least one branch and every branch is closed.
  bool closed() const;
  std::vector<const Branch*> open_branches() const;

 private:
  friend Tableau init_tableau(const std::vector<Term>&, const std::optional<Term>&, Sign,
                              const KB&, std::size_t);
  friend Tableau saturate(Tableau);
  friend class Saturator;

  std::vector<Entry> entries_;
  std::vector<Branch> branches_;
  std::vector<TreeNode> nodes_;
  std::vector<RuleApplication> log_;
  KB kb_;
  std::size_t budget_used_ = 0;
  std::size_t budget_max_ = 0;
  bool budget_exhausted_ = false;
  std::size_t next_entity_ = 1;
};

constexpr std::size_t kDefaultBudget = 50;

class FreeVariableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Root branch holding the premises signed T and, when given, the hypothesis
// with `hypothesis_sign`. Throws FreeVariableError for open terms.
Tableau init_tableau(const std::vector<Term>& premises, const std::optional<Term>& hypothesis,
                     Sign hypothesis_sign, const KB& kb, std::size_t budget = kDefaultBudget);

Tableau saturate(Tableau t);

// First closing pair on the branch, scanning pairs in entry order.
std::optional<Closure> check_closure(const Branch& branch, const std::vector<Entry>& entries,
                                     const KB& kb);
std::optional<Closure> check_closure(const Tableau& t, const Branch& branch);

// Independent re-check of a closure's side condition.
bool closure_holds(const Closure& c, const Entry& a, const Entry& b, const KB& kb);

struct ProverVerdict {
  Label label = Label::neutral;
  Tableau entail_tableau;  // hypothesis signed F
  Tableau contra_tableau;  // hypothesis signed T
  bool both_closed = false;
  bool budget_exhausted = false;
};

ProverVerdict classify(const std::vector<Term>& premises, const Term& hypothesis, const KB& kb,
                       std::size_t budget = kDefaultBudget);

enum class ExportFormat { text, dot };
std::optional<ExportFormat> parse_export_format(std::string_view s);

std::string export_proof(const Tableau& t, ExportFormat format);
std::string export_proof(const Tableau& t, std::string_view format);

}  // namespace natab
