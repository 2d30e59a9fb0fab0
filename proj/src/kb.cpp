#include "natab/kb.hpp"

#include <deque>
#include <fstream>
#include <sstream>

namespace natab {

std::string Relation::text() const {
  return std::string(kind == RelationKind::sub ? "sub " : "dis ") + left.text() + " " +
         right.text();
}

std::string Relation::pretty() const {
  return left.text() + (kind == RelationKind::sub ? " <= " : " | ") + right.text();
}

std::string Provenance::text() const {
  if (source == Source::initial) return "initial";
  return "learned problem=" + problem_id + " epoch=" + std::to_string(epoch);
}

KB::KB(KbOptions opts) : opts_(opts), data_(build({}, {})) {}

std::shared_ptr<const KB::Data> KB::build(std::set<Relation> rels,
                                          std::map<Relation, Provenance> prov) {
  auto d = std::make_shared<Data>();
  std::unordered_map<Term, std::vector<Term>> succ;
  for (const auto& r : rels) {
    if (r.kind == RelationKind::sub) {
      succ[r.left].push_back(r.right);
      d->sub_edges.emplace(r.left, r.right);
    } else {
      d->dis_partners[r.left].push_back(r.right);
      d->dis_partners[r.right].push_back(r.left);
    }
  }
  for (const auto& [start, _] : succ) {
    std::set<Term>& seen = d->up[start];
    std::deque<Term> todo{start};
    while (!todo.empty()) {
      Term t = todo.front();
      todo.pop_front();
      auto it = succ.find(t);
      if (it == succ.end()) continue;
      for (const auto& n : it->second)
        if (seen.insert(n).second) todo.push_back(n);
    }
    seen.erase(start);
  }
  d->relations = std::move(rels);
  d->provenance = std::move(prov);
  return d;
}

bool KB::entails_sub(const Term& a, const Term& b) const {
  if (a == b) return true;
  auto it = data_->up.find(a);
  return it != data_->up.end() && it->second.count(b) > 0;
}

bool KB::entails_dis(const Term& a, const Term& b) const {
  if (data_->dis_partners.empty()) return false;
  auto check_from = [&](const Term& x) {
    auto it = data_->dis_partners.find(x);
    if (it == data_->dis_partners.end()) return false;
    for (const auto& p : it->second)
      if (entails_sub(b, p)) return true;
    return false;
  };
  if (check_from(a)) return true;
  auto up = data_->up.find(a);
  if (up == data_->up.end()) return false;
  for (const auto& x : up->second)
    if (check_from(x)) return true;
  return false;
}

bool KB::raw_conflict(const Relation& r) const {
  if (r.kind == RelationKind::dis)
    return data_->sub_edges.count({r.left, r.right}) || data_->sub_edges.count({r.right, r.left});
  return contains(Relation::dis(r.left, r.right));
}

bool KB::conflicts_with(const Relation& r) const {
  if (!opts_.strict) return raw_conflict(r);
  if (r.kind == RelationKind::dis)
    return entails_sub(r.left, r.right) || entails_sub(r.right, r.left);
  return entails_dis(r.left, r.right);
}

void KB::check_storable(const Relation& r) const {
  for (const Term* side : {&r.left, &r.right}) {
    if (!is_fully_lexicalized(*side))
      throw KbError(KbError::Kind::invalid, "relation side is not fully lexicalized: " + side->text());
    if (term_shape(*side) == Shape::Other)
      throw KbError(KbError::Kind::invalid, "relation side has unsupported shape: " + side->text());
  }
  if (r.left == r.right)
    throw KbError(KbError::Kind::invalid, "trivial relation: " + r.pretty());
  if (!opts_.allow_cross_category && head_category(r.left) != head_category(r.right))
    throw KbError(KbError::Kind::invalid, "cross-category relation: " + r.pretty());
}

bool KB::storable(const Relation& r) const {
  try {
    check_storable(r);
    return true;
  } catch (const KbError&) {
    return false;
  }
}

KB KB::assume(const std::vector<Relation>& extra) const {
  auto rels = data_->relations;
  auto prov = data_->provenance;
  bool changed = false;
  for (const auto& r : extra) {
    if (rels.insert(r).second) {
      prov.emplace(r, Provenance::initial());
      changed = true;
    }
  }
  if (!changed) return *this;
  KB out(opts_);
  out.data_ = build(std::move(rels), std::move(prov));
  return out;
}

KB KB::with_options(KbOptions opts) const {
  KB out = *this;
  out.opts_ = opts;
  return out;
}

KB add_relation(const KB& kb, const Relation& r, const Provenance& source) {
  kb.check_storable(r);
  if (kb.contains(r)) return kb;
  if (kb.conflicts_with(r))
    throw KbError(KbError::Kind::conflict, "relation " + r.pretty() + " conflicts with the KB");
  auto rels = kb.data_->relations;
  auto prov = kb.data_->provenance;
  rels.insert(r);
  prov.emplace(r, source);
  KB out(kb.opts_);
  out.data_ = KB::build(std::move(rels), std::move(prov));
  return out;
}

bool is_trivial_subsective_dis(const Relation& r) {
  if (r.kind != RelationKind::dis) return false;
  auto modifies = [](const Term& outer, const Term& inner) {
    return outer.is_app() && outer.arg() == inner && outer.fun().is_lex() &&
           !outer.fun().is_entity();
  };
  return modifies(r.left, r.right) || modifies(r.right, r.left);
}

// ---------------------------------------------------------------------------
// Line format

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Provenance parse_provenance(std::string_view comment) {
  comment = trim(comment);
  if (comment.rfind("learned", 0) != 0) return Provenance::initial();
  Provenance p;
  p.source = Provenance::Source::learned;
  std::istringstream in{std::string(comment.substr(7))};
  std::string field;
  while (in >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "problem") p.problem_id = val;
    if (key == "epoch") {
      try {
        p.epoch = std::stoi(val);
      } catch (const std::exception&) {
        p.epoch = 0;
      }
    }
  }
  return p;
}

}  // namespace

Relation parse_relation(std::string_view line) {
  line = trim(line);
  std::size_t sp = line.find_first_of(" \t");
  if (sp == std::string_view::npos) throw KbError(KbError::Kind::parse, "expected 'sub' or 'dis' followed by two terms");
  std::string_view kw = line.substr(0, sp);
  RelationKind kind;
  if (kw == "sub") {
    kind = RelationKind::sub;
  } else if (kw == "dis") {
    kind = RelationKind::dis;
  } else {
    throw KbError(KbError::Kind::parse, "unknown relation keyword '" + std::string(kw) + "'");
  }
  std::size_t pos = sp;
  try {
    Term a = parse_llf_prefix(line, pos);
    Term b = parse_llf_prefix(line, pos);
    if (!trim(line.substr(pos)).empty())
      throw KbError(KbError::Kind::parse, "trailing input after second term");
    return kind == RelationKind::sub ? Relation::sub(a, b) : Relation::dis(a, b);
  } catch (const ParseError& e) {
    throw KbError(KbError::Kind::parse, e.what());
  }
}

KB parse_kb(std::string_view text, KbOptions opts) {
  struct Item {
    Relation rel;
    Provenance prov;
    std::size_t line;
  };
  std::map<Relation, Item> items;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    std::string_view comment;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      comment = line.substr(hash + 1);
      line = line.substr(0, hash);
    }
    if (trim(line).empty()) continue;
    Relation r = [&] {
      try {
        return parse_relation(line);
      } catch (const KbError& e) {
        throw KbError(KbError::Kind::parse, "line " + std::to_string(line_no) + ": " + e.what());
      }
    }();
    Provenance p = parse_provenance(comment);
    auto [it, inserted] = items.emplace(r, Item{r, p, line_no});
    if (!inserted && p < it->second.prov) it->second = Item{r, p, line_no};
    if (end == text.size()) break;
  }

  // Conflicts are checked over the whole set so the outcome does not depend
  // on line order.
  KB kb(opts);
  for (const auto& [rel, item] : items) {
    try {
      kb.check_storable(rel);
    } catch (const KbError& e) {
      throw KbError(KbError::Kind::invalid, "line " + std::to_string(item.line) + ": " + e.what());
    }
  }
  for (const auto& [rel, item] : items) {
    if (rel.kind != RelationKind::dis) continue;
    for (const auto& s : {Relation::sub(rel.left, rel.right), Relation::sub(rel.right, rel.left)}) {
      auto it = items.find(s);
      if (it != items.end())
        throw KbError(KbError::Kind::conflict,
                      "conflict between line " + std::to_string(it->second.line) + " (" +
                          s.pretty() + ") and line " + std::to_string(item.line) + " (" +
                          rel.pretty() + ")");
    }
  }
  for (const auto& [rel, item] : items) kb = add_relation(kb, rel, item.prov);
  return kb;
}

KB load_kb(const std::filesystem::path& path, KbOptions opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw KbError(KbError::Kind::io, "cannot open KB file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kb(ss.str(), opts);
}

std::string format_kb(const KB& kb) {
  std::string out;
  for (const auto& r : kb.relations()) {
    out += r.text();
    auto it = kb.provenance().find(r);
    out += "  # ";
    out += it == kb.provenance().end() ? "initial" : it->second.text();
    out += "\n";
  }
  return out;
}

void save_kb(const KB& kb, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw KbError(KbError::Kind::io, "cannot write KB file " + path.string());
  out << format_kb(kb);
}

std::vector<std::string> kb_consistency_report(const KB& kb) {
  std::vector<std::string> findings;
  std::set<Term> terms;
  for (const auto& r : kb.relations()) {
    terms.insert(r.left);
    terms.insert(r.right);
  }
  for (const auto& t : terms)
    if (kb.entails_dis(t, t)) findings.push_back("self-exclusive term: " + t.text());
  for (const auto& r : kb.relations()) {
    if (r.kind == RelationKind::dis &&
        (kb.entails_sub(r.left, r.right) || kb.entails_sub(r.right, r.left)))
      findings.push_back("disjoint terms related by subsumption: " + r.pretty());
  }
  return findings;
}

}  // namespace natab
