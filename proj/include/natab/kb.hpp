// Knowledge base of lexical relations (subsumption and disjointness).

#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "natab/llf.hpp"

namespace natab {

enum class RelationKind { sub, dis };

struct Relation {
  RelationKind kind;
  Term left;
  Term right;

  static Relation sub(Term a, Term b) { return {RelationKind::sub, std::move(a), std::move(b)}; }
  // Disjointness is symmetric; the lexicographically smaller side goes left.
  static Relation dis(Term a, Term b) {
    if (b < a) std::swap(a, b);
    return {RelationKind::dis, std::move(a), std::move(b)};
  }

  // "sub boy.n person.n"
  std::string text() const;
  // "boy.n <= person.n" / "clean.adj | dirty.adj"
  std::string pretty() const;

  friend bool operator==(const Relation&, const Relation&) = default;
  friend std::strong_ordering operator<=>(const Relation& a, const Relation& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.left <=> b.left; c != 0) return c;
    return a.right <=> b.right;
  }
};

struct Provenance {
  enum class Source { initial, learned };
  Source source = Source::initial;
  std::string problem_id;
  int epoch = 0;

  static Provenance initial() { return {}; }
  static Provenance learned(std::string problem, int epoch) {
    return {Source::learned, std::move(problem), epoch};
  }
  std::string text() const;

  friend bool operator==(const Provenance&, const Provenance&) = default;
  friend auto operator<=>(const Provenance&, const Provenance&) = default;
};

class KbError : public std::runtime_error {
 public:
  enum class Kind { parse, conflict, invalid, io };
  KbError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct KbOptions {
  // Store relations whose sides have different head categories.
  bool allow_cross_category = false;
  // Conflict checks against the closure instead of raw edges.
  bool strict = false;
};

// Immutable value. Queries are safe from concurrent readers; the derived
// reachability tables are built once per value.
class KB {
 public:
  KB() : KB(KbOptions{}) {}
  explicit KB(KbOptions opts);

  const KbOptions& options() const { return opts_; }
  const std::set<Relation>& relations() const { return data_->relations; }
  const std::map<Relation, Provenance>& provenance() const { return data_->provenance; }
  std::size_t size() const { return data_->relations.size(); }
  bool empty() const { return data_->relations.empty(); }
  bool contains(const Relation& r) const { return data_->relations.count(r) > 0; }

  bool entails_sub(const Term& a, const Term& b) const;
  bool entails_dis(const Term& a, const Term& b) const;
  bool conflicts_with(const Relation& r) const;

  // Throws KbError(invalid) when r cannot be stored in this KB.
  void check_storable(const Relation& r) const;
  bool storable(const Relation& r) const;

  // Hypothetical extension used while searching: no storage validation and
  // no conflict check. Provenance of the extra relations is "initial".
  KB assume(const std::vector<Relation>& extra) const;

  KB with_options(KbOptions opts) const;

 private:
  friend KB add_relation(const KB& kb, const Relation& r, const Provenance& source);

  struct Data {
    std::set<Relation> relations;
    std::map<Relation, Provenance> provenance;
    // Strict supersets reachable through sub edges.
    std::unordered_map<Term, std::set<Term>> up;
    std::unordered_map<Term, std::vector<Term>> dis_partners;
    std::set<std::pair<Term, Term>> sub_edges;
  };
  static std::shared_ptr<const Data> build(std::set<Relation> rels,
                                           std::map<Relation, Provenance> prov);
  bool raw_conflict(const Relation& r) const;

  KbOptions opts_;
  std::shared_ptr<const Data> data_;
};

// Returns kb extended with r. Idempotent for relations already present.
// Throws KbError(conflict) when conflicts_with(kb, r), KbError(invalid) when
// r is not storable.
KB add_relation(const KB& kb, const Relation& r, const Provenance& source);

// B | (M B) for a lexical modifier M, in either orientation.
bool is_trivial_subsective_dis(const Relation& r);

KB parse_kb(std::string_view text, KbOptions opts = {});
KB load_kb(const std::filesystem::path& path, KbOptions opts = {});
std::string format_kb(const KB& kb);
void save_kb(const KB& kb, const std::filesystem::path& path);

// Parses "sub <term> <term>" / "dis <term> <term>" (no comment).
Relation parse_relation(std::string_view line);

// Closure-level consistency scan: each finding is one human-readable line.
std::vector<std::string> kb_consistency_report(const KB& kb);

}  // namespace natab
