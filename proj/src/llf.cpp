#include "natab/llf.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>

namespace natab {

LexCategory category_of(LexTag tag) {
  switch (tag) {
    case LexTag::n: return LexCategory::noun;
    case LexTag::v: return LexCategory::verb;
    case LexTag::adj:
    case LexTag::adv: return LexCategory::adjAdv;
    case LexTag::det: return LexCategory::det;
    case LexTag::prep: return LexCategory::prep;
    case LexTag::aux: return LexCategory::aux;
    case LexTag::conn: return LexCategory::conn;
    case LexTag::entity: return LexCategory::other;
  }
  return LexCategory::other;
}

std::string_view tag_name(LexTag tag) {
  switch (tag) {
    case LexTag::n: return "n";
    case LexTag::v: return "v";
    case LexTag::adj: return "adj";
    case LexTag::adv: return "adv";
    case LexTag::det: return "det";
    case LexTag::prep: return "prep";
    case LexTag::aux: return "aux";
    case LexTag::conn: return "conn";
    case LexTag::entity: return "";
  }
  return "";
}

std::string_view category_name(LexCategory cat) {
  switch (cat) {
    case LexCategory::noun: return "noun";
    case LexCategory::verb: return "verb";
    case LexCategory::adjAdv: return "adjAdv";
    case LexCategory::det: return "det";
    case LexCategory::prep: return "prep";
    case LexCategory::aux: return "aux";
    case LexCategory::conn: return "conn";
    case LexCategory::other: return "other";
  }
  return "other";
}

std::string_view shape_name(Shape s) {
  switch (s) {
    case Shape::A: return "A";
    case Shape::AB: return "AB";
    case Shape::ABC_left: return "(AB)C";
    case Shape::ABC_right: return "A(BC)";
    case Shape::Other: return "Other";
  }
  return "Other";
}

ParseError::ParseError(const std::string& msg, std::size_t line, std::size_t column)
    : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                         std::to_string(column)),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Term construction

Term Term::make(Node n) {
  switch (n.kind) {
    case Kind::lex:
      n.text = n.tag == LexTag::entity ? n.name : n.name + "." + std::string(tag_name(n.tag));
      n.size = 1;
      break;
    case Kind::var:
      n.text = n.name;
      n.size = 1;
      break;
    case Kind::lam:
      n.text = "(lam " + n.name + " " + n.left->text + ")";
      n.size = 1 + n.left->size;
      break;
    case Kind::app:
      // Application spines print flat: (f a b) rather than ((f a) b).
      if (n.left->kind == Kind::app) {
        n.text = n.left->text.substr(0, n.left->text.size() - 1) + " " + n.right->text + ")";
      } else {
        n.text = "(" + n.left->text + " " + n.right->text + ")";
      }
      n.size = 1 + n.left->size + n.right->size;
      break;
  }
  n.hash = std::hash<std::string>{}(n.text);
  return Term(std::make_shared<const Node>(std::move(n)));
}

Term::Term() : Term(var("_")) {}

Term Term::lex(std::string lemma, LexTag tag) {
  if (lemma.empty()) throw std::invalid_argument("empty lemma");
  Node n{Kind::lex, std::move(lemma), tag, nullptr, nullptr, {}, 0, 1};
  return make(std::move(n));
}

Term Term::var(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty variable name");
  Node n{Kind::var, std::move(name), LexTag::n, nullptr, nullptr, {}, 0, 1};
  return make(std::move(n));
}

Term Term::lam(std::string var, Term body) {
  Node n{Kind::lam, std::move(var), LexTag::n, body.node_, nullptr, {}, 0, 1};
  return make(std::move(n));
}

Term Term::app(Term fun, Term arg) {
  Node n{Kind::app, {}, LexTag::n, fun.node_, arg.node_, {}, 0, 1};
  return make(std::move(n));
}

Term Term::apply(Term fun, const std::vector<Term>& args) {
  for (const auto& a : args) fun = app(fun, a);
  return fun;
}

Term Term::entity(std::size_t index) { return lex("c" + std::to_string(index), LexTag::entity); }

Term Term::body() const {
  if (!is_lam()) throw std::logic_error("body() on non-abstraction");
  return Term(node_->left);
}

Term Term::fun() const {
  if (!is_app()) throw std::logic_error("fun() on non-application");
  return Term(node_->left);
}

Term Term::arg() const {
  if (!is_app()) throw std::logic_error("arg() on non-application");
  return Term(node_->right);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_reserved_entity_name(std::string_view s) {
  if (s.size() < 2 || s[0] != 'c') return false;
  return std::all_of(s.begin() + 1, s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '\'';
  });
}

std::optional<LexTag> parse_tag(std::string_view s) {
  static const std::map<std::string_view, LexTag> tags = {
      {"n", LexTag::n},       {"v", LexTag::v},       {"adj", LexTag::adj},
      {"adv", LexTag::adv},   {"det", LexTag::det},   {"prep", LexTag::prep},
      {"aux", LexTag::aux},   {"conn", LexTag::conn}};
  auto it = tags.find(s);
  if (it == tags.end()) return std::nullopt;
  return it->second;
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t pos, const ParseOptions& opts)
      : text_(text), pos_(pos), opts_(opts) {}

  Term parse_term() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (text_[pos_] == ')') fail("unexpected ')'");
    if (text_[pos_] == '(') return parse_list();
    return parse_atom();
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t pos() const { return pos_; }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }

  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }

 private:
  std::string_view read_token() {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  Term parse_atom() {
    std::size_t start = pos_;
    std::string_view tok = read_token();
    if (tok.empty()) fail("expected a term");
    auto dot = tok.rfind('.');
    if (dot != std::string_view::npos) {
      std::string_view lemma = tok.substr(0, dot);
      std::string_view tag = tok.substr(dot + 1);
      if (lemma.empty()) fail_at("empty lemma in '" + std::string(tok) + "'", start);
      auto t = parse_tag(tag);
      if (!t) fail_at("unknown category tag '" + std::string(tag) + "'", start + dot + 1);
      return Term::lex(std::string(lemma), *t);
    }
    if (tok == "lam") fail_at("'lam' outside binder position", start);
    std::string name(tok);
    bool bound = std::find(scope_.begin(), scope_.end(), name) != scope_.end();
    if (!bound && is_reserved_entity_name(name)) {
      if (opts_.allow_entities) return Term::lex(name, LexTag::entity);
      fail_at("reserved entity constant '" + name + "' in input", start);
    }
    if (!is_identifier(name)) fail_at("malformed token '" + name + "'", start);
    if (!bound && opts_.require_closed) fail_at("unbound variable '" + name + "'", start);
    return Term::var(name);
  }

  Term parse_list() {
    std::size_t open = pos_;
    ++pos_;  // '('
    skip_space();
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') {
      std::size_t save = pos_;
      std::string_view tok = read_token();
      if (tok == "lam") {
        skip_space();
        std::size_t vpos = pos_;
        std::string_view v = read_token();
        if (v.empty()) fail_at("expected a variable after 'lam'", vpos);
        std::string vname(v);
        if (!is_identifier(vname) || vname.find('.') != std::string::npos)
          fail_at("malformed binder '" + vname + "'", vpos);
        if (is_reserved_entity_name(vname))
          fail_at("reserved name '" + vname + "' used as a variable", vpos);
        scope_.push_back(vname);
        Term body = parse_term();
        scope_.pop_back();
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')' to close 'lam'");
        ++pos_;
        return Term::lam(vname, body);
      }
      pos_ = save;
    }
    std::vector<Term> items;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) fail_at("unterminated '('", open);
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      items.push_back(parse_term());
    }
    if (items.empty()) fail_at("empty application '()'", open);
    if (items.size() == 1) fail_at("application needs at least one argument", open);
    Term t = items[0];
    for (std::size_t i = 1; i < items.size(); ++i) t = Term::app(t, items[i]);
    return t;
  }

  std::string_view text_;
  std::size_t pos_;
  const ParseOptions& opts_;
  std::vector<std::string> scope_;
};

}  // namespace

Term parse_llf(std::string_view text, const ParseOptions& opts) {
  Parser p(text, 0, opts);
  Term t = p.parse_term();
  p.skip_space();
  if (p.pos() != text.size()) p.fail("trailing input after term");
  return t;
}

Term parse_llf_prefix(std::string_view text, std::size_t& pos, const ParseOptions& opts) {
  Parser p(text, pos, opts);
  Term t = p.parse_term();
  pos = p.pos();
  return t;
}

std::string format_llf(const Term& t) { return t.text(); }

// ---------------------------------------------------------------------------
// Variables and substitution

namespace {

void collect_free(const Term& t, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::lex: return;
    case Term::Kind::var:
      if (std::find(bound.begin(), bound.end(), t.name()) == bound.end()) out.insert(t.name());
      return;
    case Term::Kind::lam:
      bound.push_back(t.name());
      collect_free(t.body(), bound, out);
      bound.pop_back();
      return;
    case Term::Kind::app:
      collect_free(t.fun(), bound, out);
      collect_free(t.arg(), bound, out);
      return;
  }
}

void collect_names(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::lex: return;
    case Term::Kind::var: out.insert(t.name()); return;
    case Term::Kind::lam:
      out.insert(t.name());
      collect_names(t.body(), out);
      return;
    case Term::Kind::app:
      collect_names(t.fun(), out);
      collect_names(t.arg(), out);
      return;
  }
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (std::size_t i = 1;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

}  // namespace

std::set<std::string> free_vars(const Term& t) {
  std::vector<std::string> bound;
  std::set<std::string> out;
  collect_free(t, bound, out);
  return out;
}

bool is_closed(const Term& t) { return free_vars(t).empty(); }

namespace {

Term subst_impl(const Term& t, const std::string& x, const Term& s,
                const std::set<std::string>& fv_s) {
  switch (t.kind()) {
    case Term::Kind::lex: return t;
    case Term::Kind::var: return t.name() == x ? s : t;
    case Term::Kind::app: {
      Term f = subst_impl(t.fun(), x, s, fv_s);
      Term a = subst_impl(t.arg(), x, s, fv_s);
      if (f == t.fun() && a == t.arg()) return t;
      return Term::app(f, a);
    }
    case Term::Kind::lam: {
      const std::string& y = t.name();
      if (y == x) return t;
      Term body = t.body();
      if (!free_vars(body).count(x)) return t;
      if (fv_s.count(y)) {
        std::set<std::string> avoid = fv_s;
        collect_names(body, avoid);
        avoid.insert(x);
        std::string y2 = fresh_name(y, avoid);
        body = subst_impl(body, y, Term::var(y2), {y2});
        return Term::lam(y2, subst_impl(body, x, s, fv_s));
      }
      return Term::lam(y, subst_impl(body, x, s, fv_s));
    }
  }
  return t;
}

}  // namespace

Term substitute(const Term& t, const std::string& var, const Term& value) {
  return subst_impl(t, var, value, free_vars(value));
}

Term beta_reduce(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::lex:
    case Term::Kind::var: return t;
    case Term::Kind::lam: {
      Term b = beta_reduce(t.body());
      return b == t.body() ? t : Term::lam(t.name(), b);
    }
    case Term::Kind::app: {
      Term f = beta_reduce(t.fun());
      if (f.is_lam()) return beta_reduce(substitute(f.body(), f.name(), t.arg()));
      Term a = beta_reduce(t.arg());
      if (f == t.fun() && a == t.arg()) return t;
      return Term::app(f, a);
    }
  }
  return t;
}

bool is_beta_normal(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::lex:
    case Term::Kind::var: return true;
    case Term::Kind::lam: return is_beta_normal(t.body());
    case Term::Kind::app:
      return !t.fun().is_lam() && is_beta_normal(t.fun()) && is_beta_normal(t.arg());
  }
  return true;
}

namespace {

bool alpha_impl(const Term& a, const Term& b, std::vector<std::string>& sa,
                std::vector<std::string>& sb) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::lex: return a == b;
    case Term::Kind::var: {
      auto ia = std::find(sa.rbegin(), sa.rend(), a.name());
      auto ib = std::find(sb.rbegin(), sb.rend(), b.name());
      bool fa = ia == sa.rend(), fb = ib == sb.rend();
      if (fa || fb) return fa && fb && a.name() == b.name();
      return std::distance(sa.rbegin(), ia) == std::distance(sb.rbegin(), ib);
    }
    case Term::Kind::lam: {
      sa.push_back(a.name());
      sb.push_back(b.name());
      bool r = alpha_impl(a.body(), b.body(), sa, sb);
      sa.pop_back();
      sb.pop_back();
      return r;
    }
    case Term::Kind::app:
      return alpha_impl(a.fun(), b.fun(), sa, sb) && alpha_impl(a.arg(), b.arg(), sa, sb);
  }
  return false;
}

}  // namespace

bool alpha_equivalent(const Term& a, const Term& b) {
  std::vector<std::string> sa, sb;
  return alpha_impl(a, b, sa, sb);
}

std::pair<Term, std::vector<Term>> spine(const Term& t) {
  std::vector<Term> args;
  Term h = t;
  while (h.is_app()) {
    args.push_back(h.arg());
    h = h.fun();
  }
  std::reverse(args.begin(), args.end());
  return {h, args};
}

// ---------------------------------------------------------------------------
// Shape analysis

namespace {

// Function words (determiners, auxiliaries, connectives) never form part of
// a lexical relation side.
bool is_plain_lex(const Term& t) {
  if (!t.is_lex() || t.is_entity()) return false;
  auto c = t.category();
  return c != LexCategory::det && c != LexCategory::aux && c != LexCategory::conn;
}

bool is_noun_or_verb(LexCategory c) { return c == LexCategory::noun || c == LexCategory::verb; }

// Head leaf of a compound: a verb in function position takes its argument
// (verb-object); otherwise a noun/verb argument is the head of its modifier.
Term head_leaf(const Term& t) {
  if (t.is_lex()) return t;
  Term f = head_leaf(t.fun());
  if (f.category() == LexCategory::verb) return f;
  Term x = head_leaf(t.arg());
  if (is_noun_or_verb(x.category())) return x;
  return f;
}

}  // namespace

Shape term_shape(const Term& t) {
  if (is_plain_lex(t)) return Shape::A;
  if (!t.is_app()) return Shape::Other;
  const Term f = t.fun();
  const Term a = t.arg();
  if (is_plain_lex(f) && is_plain_lex(a)) return Shape::AB;
  if (f.is_app() && is_plain_lex(f.fun()) && is_plain_lex(f.arg()) && is_plain_lex(a))
    return Shape::ABC_left;
  if (is_plain_lex(f) && a.is_app() && is_plain_lex(a.fun()) && is_plain_lex(a.arg()))
    return Shape::ABC_right;
  return Shape::Other;
}

LexCategory head_category(const Term& t) {
  if (term_shape(t) == Shape::Other)
    throw std::invalid_argument("no lexical head for term of shape Other: " + t.text());
  return head_leaf(t).category();
}

bool is_fully_lexicalized(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::lex: return !t.is_entity();
    case Term::Kind::var:
    case Term::Kind::lam: return false;
    case Term::Kind::app: return is_fully_lexicalized(t.fun()) && is_fully_lexicalized(t.arg());
  }
  return false;
}

bool contains_entity(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::lex: return t.is_entity();
    case Term::Kind::var: return false;
    case Term::Kind::lam: return contains_entity(t.body());
    case Term::Kind::app: return contains_entity(t.fun()) || contains_entity(t.arg());
  }
  return false;
}

std::size_t lexical_leaf_count(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::lex: return 1;
    case Term::Kind::var: return 0;
    case Term::Kind::lam: return lexical_leaf_count(t.body());
    case Term::Kind::app: return lexical_leaf_count(t.fun()) + lexical_leaf_count(t.arg());
  }
  return 0;
}

namespace {
void collect_lemmas(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::lex:
      if (!t.is_entity()) out.insert(t.name());
      return;
    case Term::Kind::var: return;
    case Term::Kind::lam: collect_lemmas(t.body(), out); return;
    case Term::Kind::app:
      collect_lemmas(t.fun(), out);
      collect_lemmas(t.arg(), out);
      return;
  }
}
}  // namespace

std::set<std::string> lemmas(const Term& t) {
  std::set<std::string> out;
  collect_lemmas(t, out);
  return out;
}

}  // namespace natab
