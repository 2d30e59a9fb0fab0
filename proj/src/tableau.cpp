#include "natab/tableau.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace natab {

std::string_view sign_name(Sign s) { return s == Sign::T ? "T" : "F"; }

std::string_view label_name(Label l) {
  switch (l) {
    case Label::entailment: return "entailment";
    case Label::contradiction: return "contradiction";
    case Label::neutral: return "neutral";
  }
  return "neutral";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "entailment") return Label::entailment;
  if (s == "contradiction") return Label::contradiction;
  if (s == "neutral") return Label::neutral;
  return std::nullopt;
}

std::string_view closure_rule_name(ClosureRule r) {
  switch (r) {
    case ClosureRule::id: return "id";
    case ClosureRule::sub: return "sub";
    case ClosureRule::dis: return "dis";
  }
  return "id";
}

std::string_view branch_status_name(BranchStatus s) {
  switch (s) {
    case BranchStatus::open: return "open";
    case BranchStatus::closed: return "closed";
    case BranchStatus::saturated: return "saturated";
  }
  return "open";
}

namespace {

std::string args_text(const std::vector<Term>& args) {
  std::string out = "[";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].text();
  }
  return out + "]";
}

}  // namespace

std::string Entry::text() const {
  return term.text() + " : " + args_text(args) + " : " + std::string(sign_name(sign));
}

bool Tableau::closed() const {
  if (branches_.empty()) return false;
  return std::all_of(branches_.begin(), branches_.end(),
                     [](const Branch& b) { return b.status == BranchStatus::closed; });
}

std::vector<const Branch*> Tableau::open_branches() const {
  std::vector<const Branch*> out;
  for (const auto& b : branches_)
    if (b.status != BranchStatus::closed) out.push_back(&b);
  return out;
}

// ---------------------------------------------------------------------------
// Rules

namespace {

// An entry before it is stored: normalized term, arguments, sign.
struct Proto {
  Term term;
  std::vector<Term> args;
  Sign sign;

  std::string key() const {
    return term.text() + " " + args_text(args) + (sign == Sign::T ? " T" : " F");
  }
};

std::string entry_key(const Entry& e) { return Proto{e.term, e.args, e.sign}.key(); }

// Beta-normal term with trailing entity arguments moved into the argument
// list. A copula is dropped and an abstraction consumes its first argument
// in the same step, so these never show up as separate entries.
Proto normalize(const Term& term, std::vector<Term> args, Sign sign) {
  Term t = beta_reduce(term);
  for (;;) {
    if (t.is_app() && t.arg().is_entity()) {
      args.insert(args.begin(), t.arg());
      t = t.fun();
    } else if (!args.empty() && t.is_app() && t.fun().is_lex() &&
               t.fun().category() == LexCategory::aux) {
      t = t.arg();
    } else if (!args.empty() && t.is_lam()) {
      t = beta_reduce(substitute(t.body(), t.name(), args.front()));
      args.erase(args.begin());
    } else {
      break;
    }
  }
  return {t, std::move(args), sign};
}

enum class RuleClass { linear, branching, gamma };

struct RuleMatch {
  std::string rule;
  RuleClass cls;
  bool new_entity = false;
};

bool lex_is(const Term& t, LexCategory cat) { return t.is_lex() && t.category() == cat; }

bool is_lemma(const Term& t, std::initializer_list<std::string_view> names) {
  if (!t.is_lex()) return false;
  return std::find(names.begin(), names.end(), t.name()) != names.end();
}

std::optional<RuleMatch> match_rule(const Term& term, const std::vector<Term>& args, Sign sign) {
  const bool T = sign == Sign::T;
  if (term.is_lam()) {
    if (!args.empty()) return RuleMatch{"lambda_pull", RuleClass::linear};
    return std::nullopt;
  }
  if (!term.is_app()) return std::nullopt;
  auto [head, sargs] = spine(term);

  if (lex_is(head, LexCategory::det) && sargs.size() == 2 && args.empty()) {
    if (is_lemma(head, {"a", "an", "some"}))
      return T ? RuleMatch{"exists_T", RuleClass::linear, true}
               : RuleMatch{"exists_F", RuleClass::gamma};
    if (is_lemma(head, {"every"}))
      return T ? RuleMatch{"forall_T", RuleClass::gamma}
               : RuleMatch{"forall_F", RuleClass::linear, true};
    if (is_lemma(head, {"no"}))
      return T ? RuleMatch{"no_T", RuleClass::gamma} : RuleMatch{"no_F", RuleClass::linear, true};
    return std::nullopt;
  }
  if (args.empty()) return std::nullopt;
  if (lex_is(head, LexCategory::aux) && sargs.size() == 1)
    return RuleMatch{"aux", RuleClass::linear};
  if (lex_is(head, LexCategory::prep) && is_lemma(head, {"by"}) && sargs.size() == 2 &&
      sargs[0].is_entity())
    return RuleMatch{"pss", RuleClass::linear};
  if (lex_is(head, LexCategory::conn) && is_lemma(head, {"which", "who", "that"}) &&
      sargs.size() == 2)
    return T ? RuleMatch{"which_T", RuleClass::linear} : RuleMatch{"which_F", RuleClass::branching};
  if (lex_is(head, LexCategory::adjAdv) && sargs.size() == 1)
    return T ? RuleMatch{"mod_T", RuleClass::linear} : RuleMatch{"mod_F", RuleClass::branching};
  return std::nullopt;
}

// Children of a rule instance, each a list of normalized entries.
std::vector<std::vector<Proto>> rule_children(const std::string& rule, const Term& term,
                                              const std::vector<Term>& args, Sign sign,
                                              const std::optional<Term>& entity) {
  const Sign X = sign;
  auto tail = [&](std::size_t from) {
    return std::vector<Term>(args.begin() + static_cast<std::ptrdiff_t>(from), args.end());
  };
  if (rule == "lambda_pull") {
    Term body = substitute(term.body(), term.name(), args[0]);
    return {{normalize(body, tail(1), X)}};
  }
  auto [head, sargs] = spine(term);
  if (rule == "exists_T" || rule == "no_F")
    return {{normalize(sargs[0], {*entity}, Sign::T), normalize(sargs[1], {*entity}, Sign::T)}};
  if (rule == "forall_F")
    return {{normalize(sargs[0], {*entity}, Sign::T), normalize(sargs[1], {*entity}, Sign::F)}};
  if (rule == "exists_F" || rule == "no_T")
    return {{normalize(sargs[0], {*entity}, Sign::F)}, {normalize(sargs[1], {*entity}, Sign::F)}};
  if (rule == "forall_T")
    return {{normalize(sargs[0], {*entity}, Sign::F)}, {normalize(sargs[1], {*entity}, Sign::T)}};
  if (rule == "aux") return {{normalize(sargs[0], args, X)}};
  if (rule == "pss") {
    std::vector<Term> moved{args[0], sargs[0]};
    for (std::size_t i = 1; i < args.size(); ++i) moved.push_back(args[i]);
    return {{normalize(sargs[1], moved, X)}};
  }
  if (rule == "which_T") return {{normalize(sargs[0], args, X), normalize(sargs[1], args, X)}};
  if (rule == "which_F") return {{normalize(sargs[0], args, X)}, {normalize(sargs[1], args, X)}};
  if (rule == "mod_T") return {{normalize(head, args, X), normalize(sargs[0], args, X)}};
  if (rule == "mod_F") return {{normalize(head, args, X)}, {normalize(sargs[0], args, X)}};
  throw std::logic_error("unknown rule " + rule);
}

std::optional<ClosureRule> closes(const Term& ta, const std::vector<Term>& aa, Sign sa,
                                  const Term& tb, const std::vector<Term>& ab, Sign sb,
                                  const KB& kb) {
  if (aa != ab) return std::nullopt;
  if (sa != sb) {
    const Term& pos = sa == Sign::T ? ta : tb;
    const Term& neg = sa == Sign::T ? tb : ta;
    if (pos == neg) return ClosureRule::id;
    if (kb.entails_sub(pos, neg)) return ClosureRule::sub;
    return std::nullopt;
  }
  if (sa == Sign::T && ta != tb && kb.entails_dis(ta, tb)) return ClosureRule::dis;
  return std::nullopt;
}

// Local unfolding of a rule child without introducing entities: used to
// judge whether instantiating a quantifier with an old entity makes progress.
std::vector<Proto> expand_local(const std::vector<Proto>& seed) {
  constexpr std::size_t kLimit = 64;
  std::vector<Proto> out;
  std::unordered_set<std::string> seen;
  std::vector<Proto> todo(seed.rbegin(), seed.rend());
  while (!todo.empty() && out.size() < kLimit) {
    Proto p = std::move(todo.back());
    todo.pop_back();
    if (!seen.insert(p.key()).second) continue;
    out.push_back(p);
    auto m = match_rule(p.term, p.args, p.sign);
    if (!m || m->cls == RuleClass::gamma || m->new_entity) continue;
    for (auto& child : rule_children(m->rule, p.term, p.args, p.sign, std::nullopt))
      for (auto& q : child) todo.push_back(std::move(q));
  }
  return out;
}

}  // namespace

bool closure_holds(const Closure& c, const Entry& a, const Entry& b, const KB& kb) {
  auto r = closes(a.term, a.args, a.sign, b.term, b.args, b.sign, kb);
  return r && *r == c.rule;
}

std::optional<Closure> check_closure(const Branch& branch, const std::vector<Entry>& entries,
                                     const KB& kb) {
  for (std::size_t j = 0; j < branch.entries.size(); ++j) {
    const Entry& b = entries.at(branch.entries[j] - 1);
    for (std::size_t i = 0; i < j; ++i) {
      const Entry& a = entries.at(branch.entries[i] - 1);
      if (auto r = closes(a.term, a.args, a.sign, b.term, b.args, b.sign, kb))
        return Closure{*r, a.id, b.id};
    }
  }
  return std::nullopt;
}

std::optional<Closure> check_closure(const Tableau& t, const Branch& branch) {
  return check_closure(branch, t.entries(), t.kb());
}

// ---------------------------------------------------------------------------
// Saturation

class Saturator {
 public:
  explicit Saturator(Tableau& t) : t_(t) {}

  void run() {
    for (;;) {
      auto it = std::find_if(t_.branches_.begin(), t_.branches_.end(),
                             [](const Branch& b) { return b.status == BranchStatus::open; });
      if (it == t_.branches_.end()) return;
      std::size_t bi = static_cast<std::size_t>(it - t_.branches_.begin());
      auto inst = next_instance(t_.branches_[bi]);
      if (!inst) {
        t_.branches_[bi].status = BranchStatus::saturated;
        continue;
      }
      if (!apply(bi, *inst)) return;
    }
  }

 private:
  struct Instance {
    std::string rule;
    EntryId entry;
    std::optional<Term> entity;
    bool new_entity = false;
  };

  static bool applied(const Branch& b, const std::string& rule, EntryId id,
                      const std::string& entity = {}) {
    return b.applied.count(AppliedRecord{rule, id, entity}) > 0;
  }

  static bool ever_applied(const Branch& b, const std::string& rule, EntryId id) {
    auto it = b.applied.lower_bound(AppliedRecord{rule, id, {}});
    return it != b.applied.end() && it->rule == rule && it->entry == id;
  }

  // Some child, unfolded locally, closes against the branch or itself.
  bool makes_progress(const Branch& b, const std::vector<std::vector<Proto>>& children) const {
    for (const auto& child : children) {
      std::vector<Proto> derived = expand_local(child);
      for (std::size_t i = 0; i < derived.size(); ++i) {
        const Proto& d = derived[i];
        for (EntryId id : b.entries) {
          const Entry& e = t_.entry(id);
          if (closes(d.term, d.args, d.sign, e.term, e.args, e.sign, t_.kb_)) return true;
        }
        for (std::size_t j = 0; j < i; ++j) {
          const Proto& o = derived[j];
          if (closes(d.term, d.args, d.sign, o.term, o.args, o.sign, t_.kb_)) return true;
        }
      }
    }
    return false;
  }

  std::optional<Instance> next_instance(const Branch& b) const {
    // Linear rules, oldest entry first.
    for (EntryId id : b.entries) {
      const Entry& e = t_.entry(id);
      auto m = match_rule(e.term, e.args, e.sign);
      if (m && m->cls == RuleClass::linear && !applied(b, m->rule, id))
        return Instance{m->rule, id, std::nullopt, m->new_entity};
    }
    // Branching rules and quantifier instances that make progress. Among the
    // latter the oldest entity wins, so a quantifier that keeps feeding new
    // entities cannot starve the others.
    std::optional<Instance> best;
    std::size_t best_pos = 0;
    for (EntryId id : b.entries) {
      const Entry& e = t_.entry(id);
      auto m = match_rule(e.term, e.args, e.sign);
      if (!m) continue;
      if (m->cls == RuleClass::branching && !applied(b, m->rule, id) && !best)
        return Instance{m->rule, id, std::nullopt, false};
      if (m->cls == RuleClass::gamma) {
        for (std::size_t pos = 0; pos < b.entities.size(); ++pos) {
          if (best && pos >= best_pos) break;
          const Term& o = b.entities[pos];
          if (applied(b, m->rule, id, o.text())) continue;
          if (makes_progress(b, rule_children(m->rule, e.term, e.args, e.sign, o))) {
            best = Instance{m->rule, id, o, false};
            best_pos = pos;
            break;
          }
        }
      }
    }
    if (best) return best;
    // A quantifier never instantiated on this branch gets the oldest entity.
    for (EntryId id : b.entries) {
      const Entry& e = t_.entry(id);
      auto m = match_rule(e.term, e.args, e.sign);
      if (m && m->cls == RuleClass::gamma && !b.entities.empty() &&
          !ever_applied(b, m->rule, id))
        return Instance{m->rule, id, b.entities.front(), false};
    }
    return std::nullopt;
  }

  // Adds `p` to the branch unless closed; returns false once closed.
  bool push_entry(Branch& b, std::size_t node, const Proto& p, Origin origin) {
    Entry e{t_.entries_.size() + 1, p.term, p.args, p.sign, std::move(origin)};
    t_.entries_.push_back(e);
    b.entries.push_back(e.id);
    t_.nodes_[node].entries.push_back(e.id);
    for (std::size_t i = 0; i + 1 < b.entries.size(); ++i) {
      const Entry& a = t_.entry(b.entries[i]);
      if (auto r = closes(a.term, a.args, a.sign, e.term, e.args, e.sign, t_.kb_)) {
        b.status = BranchStatus::closed;
        b.closure = Closure{*r, a.id, e.id};
        return false;
      }
    }
    return true;
  }

  // Returns false when the budget stops saturation.
  bool apply(std::size_t bi, const Instance& inst) {
    Branch& b = t_.branches_[bi];
    const Entry premise = t_.entry(inst.entry);
    std::optional<Term> entity =
        inst.new_entity ? std::optional<Term>(Term::entity(t_.next_entity_)) : inst.entity;
    auto children = rule_children(inst.rule, premise.term, premise.args, premise.sign, entity);

    std::unordered_set<std::string> present;
    for (EntryId id : b.entries) present.insert(entry_key(t_.entry(id)));
    for (auto& child : children) {
      std::vector<Proto> fresh;
      std::unordered_set<std::string> local;
      for (auto& p : child) {
        auto k = p.key();
        if (!present.count(k) && local.insert(k).second) fresh.push_back(std::move(p));
      }
      child = std::move(fresh);
    }
    AppliedRecord record{inst.rule, inst.entry, inst.entity ? inst.entity->text() : std::string()};
    bool redundant = std::any_of(children.begin(), children.end(),
                                 [](const auto& c) { return c.empty(); });
    if (redundant) {
      b.applied.insert(record);
      return true;
    }
    if (t_.budget_used_ >= t_.budget_max_) {
      t_.budget_exhausted_ = true;
      return false;
    }
    ++t_.budget_used_;
    if (inst.new_entity) {
      ++t_.next_entity_;
      b.entities.push_back(*entity);
    }
    b.applied.insert(record);

    Origin origin{inst.rule, {inst.entry}, entity};
    RuleApplication app{inst.rule, inst.entry, entity, b.id, {}};

    if (children.size() == 1) {
      std::vector<EntryId> produced;
      for (const auto& p : children[0]) {
        bool open = push_entry(b, b.id, p, origin);
        produced.push_back(t_.entries_.size());
        if (!open) break;
      }
      app.produced.push_back(std::move(produced));
      t_.log_.push_back(std::move(app));
      return true;
    }

    const Branch parent = b;
    std::vector<Branch> split;
    for (const auto& child : children) {
      std::size_t node = t_.nodes_.size();
      t_.nodes_.push_back({});
      t_.nodes_[parent.id].children.push_back(node);
      Branch nb = parent;
      nb.id = node;
      std::vector<EntryId> produced;
      for (const auto& p : child) {
        bool open = push_entry(nb, node, p, origin);
        produced.push_back(t_.entries_.size());
        if (!open) break;
      }
      app.produced.push_back(std::move(produced));
      split.push_back(std::move(nb));
    }
    auto pos = t_.branches_.erase(t_.branches_.begin() + static_cast<std::ptrdiff_t>(bi));
    t_.branches_.insert(pos, split.begin(), split.end());
    t_.log_.push_back(std::move(app));
    return true;
  }

  Tableau& t_;
};

Tableau init_tableau(const std::vector<Term>& premises, const std::optional<Term>& hypothesis,
                     Sign hypothesis_sign, const KB& kb, std::size_t budget) {
  std::vector<std::pair<Term, Sign>> roots;
  for (const auto& p : premises) roots.emplace_back(p, Sign::T);
  if (hypothesis) roots.emplace_back(*hypothesis, hypothesis_sign);
  for (const auto& [term, sign] : roots) {
    auto fv = free_vars(term);
    if (!fv.empty())
      throw FreeVariableError("free variable '" + *fv.begin() + "' in " + term.text());
  }

  Tableau t;
  t.kb_ = kb;
  t.budget_max_ = budget;
  t.nodes_.push_back({});
  Branch root;
  root.id = 0;
  std::unordered_set<std::string> seen;
  for (const auto& [term, sign] : roots) {
    Proto p = normalize(term, {}, sign);
    if (!seen.insert(p.key()).second) continue;
    Entry e{t.entries_.size() + 1, p.term, p.args, p.sign, Origin{"init", {}, std::nullopt}};
    t.entries_.push_back(e);
    root.entries.push_back(e.id);
    t.nodes_[0].entries.push_back(e.id);
  }
  if (auto c = check_closure(root, t.entries_, kb)) {
    root.status = BranchStatus::closed;
    root.closure = c;
  }
  t.branches_.push_back(std::move(root));
  return t;
}

Tableau saturate(Tableau t) {
  Saturator(t).run();
  return t;
}

ProverVerdict classify(const std::vector<Term>& premises, const Term& hypothesis, const KB& kb,
                       std::size_t budget) {
  ProverVerdict v;
  v.entail_tableau = saturate(init_tableau(premises, hypothesis, Sign::F, kb, budget));
  v.contra_tableau = saturate(init_tableau(premises, hypothesis, Sign::T, kb, budget));
  const bool ent = v.entail_tableau.closed();
  const bool con = v.contra_tableau.closed();
  v.both_closed = ent && con;
  v.budget_exhausted = v.entail_tableau.budget_exhausted() || v.contra_tableau.budget_exhausted();
  if (con) {
    v.label = Label::contradiction;
  } else if (ent) {
    v.label = Label::entailment;
  } else {
    v.label = Label::neutral;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Export

std::optional<ExportFormat> parse_export_format(std::string_view s) {
  if (s == "text") return ExportFormat::text;
  if (s == "dot") return ExportFormat::dot;
  return std::nullopt;
}

namespace {

std::string origin_text(const Entry& e) {
  if (e.origin.rule == "init") return "";
  std::string out = "  <- " + e.origin.rule + "(";
  for (std::size_t i = 0; i < e.origin.premises.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(e.origin.premises[i]);
  }
  if (e.origin.entity) out += ", " + e.origin.entity->text();
  return out + ")";
}

std::string closure_text(const Closure& c) {
  return "\xC3\x97 (" + std::string(closure_rule_name(c.rule)) + ": " + std::to_string(c.first) +
         ", " + std::to_string(c.second) + ")";
}

std::string leaf_text(const Branch& b) {
  switch (b.status) {
    case BranchStatus::closed: return closure_text(*b.closure);
    case BranchStatus::saturated: return "open (saturated)";
    case BranchStatus::open: return "open (unfinished)";
  }
  return "";
}

std::string header(const Tableau& t) {
  if (t.nodes().empty()) return "# tableau: empty\n";
  std::size_t open = t.open_branches().size();
  std::ostringstream out;
  out << "# tableau: " << (t.closed() ? "closed" : "open") << ", " << t.branches().size()
      << " branches (" << open << " open), budget " << t.budget_used() << "/" << t.budget_max();
  if (t.budget_exhausted()) out << ", budget exhausted";
  out << "\n";
  return out.str();
}

const Branch* leaf_branch(const Tableau& t, std::size_t node) {
  for (const auto& b : t.branches())
    if (b.id == node) return &b;
  return nullptr;
}

void render_text(const Tableau& t, std::size_t node, std::size_t depth, std::string& out) {
  const std::string indent(2 * depth, ' ');
  for (EntryId id : t.nodes()[node].entries) {
    const Entry& e = t.entry(id);
    out += indent + std::to_string(id) + ": " + e.text() + origin_text(e) + "\n";
  }
  if (const Branch* b = leaf_branch(t, node)) out += indent + leaf_text(*b) + "\n";
  for (std::size_t c : t.nodes()[node].children) render_text(t, c, depth + 1, out);
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void render_dot(const Tableau& t, std::size_t node, const std::string& parent, std::string& out) {
  std::string prev = parent;
  auto link = [&](const std::string& to) {
    if (!prev.empty()) out += "  " + prev + " -> " + to + ";\n";
    prev = to;
  };
  if (t.nodes()[node].entries.empty()) {
    std::string id = "s" + std::to_string(node);
    out += "  " + id + " [label=\"\", shape=point];\n";
    link(id);
  }
  for (EntryId eid : t.nodes()[node].entries) {
    const Entry& e = t.entry(eid);
    std::string id = "e" + std::to_string(eid);
    out += "  " + id + " [label=\"" + dot_escape(std::to_string(eid) + ": " + e.text()) + "\"];\n";
    link(id);
  }
  if (const Branch* b = leaf_branch(t, node)) {
    std::string id = "l" + std::to_string(node);
    std::string label;
    if (b->status == BranchStatus::closed) {
      label = "\xC3\x97(" + std::string(closure_rule_name(b->closure->rule)) + ") " +
              std::to_string(b->closure->first) + "," + std::to_string(b->closure->second);
    } else {
      label = b->status == BranchStatus::saturated ? "open" : "open (unfinished)";
    }
    out += "  " + id + " [label=\"" + dot_escape(label) + "\", shape=plaintext];\n";
    link(id);
  }
  for (std::size_t c : t.nodes()[node].children) render_dot(t, c, prev, out);
}

}  // namespace

std::string export_proof(const Tableau& t, ExportFormat format) {
  if (format == ExportFormat::text) {
    std::string out = header(t);
    if (!t.nodes().empty()) render_text(t, 0, 0, out);
    return out;
  }
  std::string out = "digraph tableau {\n";
  out += "  node [shape=box, fontname=\"monospace\"];\n";
  if (!t.nodes().empty()) render_dot(t, 0, "", out);
  out += "}\n";
  return out;
}

std::string export_proof(const Tableau& t, std::string_view format) {
  auto f = parse_export_format(format);
  if (!f) throw std::invalid_argument("unknown export format '" + std::string(format) + "'");
  return export_proof(t, *f);
}

}  // namespace natab
