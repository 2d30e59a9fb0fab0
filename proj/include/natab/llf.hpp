// Lambda logical forms: terms, concrete syntax, beta reduction and the
// lexical-shape analyses used by the relation filters.

#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace natab {

enum class LexCategory { noun, verb, adjAdv, det, prep, aux, conn, other };

// Surface tag of a lexical constant. adj and adv share the adjAdv category
// but are kept apart so that formatting round-trips.
enum class LexTag { n, v, adj, adv, det, prep, aux, conn, entity };

LexCategory category_of(LexTag tag);
std::string_view tag_name(LexTag tag);
std::string_view category_name(LexCategory cat);

enum class Shape { A, AB, ABC_left, ABC_right, Other };
std::string_view shape_name(Shape s);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Immutable lambda term with structural sharing. Equality, ordering and
// hashing go through the canonical text, which determines the tree.
class Term {
 public:
  enum class Kind { lex, var, lam, app };

  // Placeholder: the variable "_".
  Term();

  static Term lex(std::string lemma, LexTag tag);
  static Term var(std::string name);
  static Term lam(std::string var, Term body);
  static Term app(Term fun, Term arg);
  // Left-associated application f a1 a2 ... an.
  static Term apply(Term fun, const std::vector<Term>& args);
  // Reserved prover constant c<index>.
  static Term entity(std::size_t index);

  Kind kind() const { return node_->kind; }
  bool is_lex() const { return kind() == Kind::lex; }
  bool is_var() const { return kind() == Kind::var; }
  bool is_lam() const { return kind() == Kind::lam; }
  bool is_app() const { return kind() == Kind::app; }
  bool is_entity() const { return is_lex() && node_->tag == LexTag::entity; }

  // lex: lemma; var: name; lam: bound variable.
  const std::string& name() const { return node_->name; }
  LexTag tag() const { return node_->tag; }
  LexCategory category() const { return category_of(node_->tag); }

  Term body() const;  // lam only
  Term fun() const;   // app only
  Term arg() const;   // app only

  const std::string& text() const { return node_->text; }
  std::size_t hash() const { return node_->hash; }
  std::size_t size() const { return node_->size; }

  friend bool operator==(const Term& a, const Term& b) {
    return a.node_ == b.node_ || (a.hash() == b.hash() && a.text() == b.text());
  }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    return a.text() <=> b.text();
  }

 private:
  struct Node {
    Kind kind;
    std::string name;
    LexTag tag = LexTag::n;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
    std::string text;
    std::size_t hash = 0;
    std::size_t size = 1;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Term make(Node n);

  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

struct ParseOptions {
  // Accept unbound c<digits> tokens as prover entity constants.
  bool allow_entities = false;
  // Reject terms with free variables.
  bool require_closed = true;
};

Term parse_llf(std::string_view text, const ParseOptions& opts = {});

// Parses one term starting at `pos` (skipping leading whitespace/comments)
// and advances `pos` past it. Used by line formats that embed terms.
Term parse_llf_prefix(std::string_view text, std::size_t& pos,
                      const ParseOptions& opts = {});

std::string format_llf(const Term& t);

std::set<std::string> free_vars(const Term& t);
bool is_closed(const Term& t);

// Capture-avoiding substitution t[var := value].
Term substitute(const Term& t, const std::string& var, const Term& value);

Term beta_reduce(const Term& t);
bool is_beta_normal(const Term& t);
bool alpha_equivalent(const Term& a, const Term& b);

// Decomposes f a1 ... an into (f, [a1..an]) where f is not an application.
std::pair<Term, std::vector<Term>> spine(const Term& t);

Shape term_shape(const Term& t);
// Throws std::invalid_argument when the shape is Other.
LexCategory head_category(const Term& t);
bool is_fully_lexicalized(const Term& t);
bool contains_entity(const Term& t);
// Occurrences of lexical constants (the "atomic terms" of a relation side).
std::size_t lexical_leaf_count(const Term& t);
// All lemmas of lexical leaves, entity constants excluded.
std::set<std::string> lemmas(const Term& t);

}  // namespace natab

template <>
struct std::hash<natab::Term> {
  std::size_t operator()(const natab::Term& t) const noexcept { return t.hash(); }
};
