#include "natab/abduction.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace natab {

std::string_view mode_name(AbductionMode m) { return m == AbductionMode::shared ? "shared" : "hitting"; }

std::optional<AbductionMode> parse_mode(std::string_view s) {
  if (s == "shared") return AbductionMode::shared;
  if (s == "hitting") return AbductionMode::hitting;
  return std::nullopt;
}

namespace {

const std::vector<std::pair<std::string_view, bool FilterSet::*>> kFilterNames = {
    {"shape", &FilterSet::shape},
    {"comparable", &FilterSet::comparable},
    {"lexicalized", &FilterSet::lexicalized},
    {"kb_consistent", &FilterSet::kb_consistent},
    {"drop_B_dis_AB", &FilterSet::drop_b_dis_ab},
    {"sentence_consistent", &FilterSet::sentence_consistent},
};

}  // namespace

FilterSet FilterSet::parse(std::string_view list) {
  FilterSet out = none();
  bool first = true;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view item = list.substr(start, end - start);
    start = end + 1;
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) {
      if (end == list.size()) break;
      continue;
    }
    bool off = item.front() == '-';
    if (off) {
      item.remove_prefix(1);
      // A leading removal starts from the full set.
      if (first) out = all();
    }
    first = false;
    if (item == "all") {
      out = off ? none() : all();
    } else if (item == "none") {
      out = off ? all() : none();
    } else {
      auto it = std::find_if(kFilterNames.begin(), kFilterNames.end(),
                             [&](const auto& p) { return p.first == item; });
      if (it == kFilterNames.end())
        throw std::invalid_argument("unknown filter '" + std::string(item) + "'");
      out.*(it->second) = !off;
    }
    if (end == list.size()) break;
  }
  return out;
}

std::string FilterSet::text() const {
  std::string out;
  for (const auto& [name, member] : kFilterNames) {
    if (!(this->*member)) continue;
    if (!out.empty()) out += ",";
    out += name;
  }
  return out.empty() ? "none" : out;
}

TSet TSet::of(std::vector<Relation> rels, std::string problem_id) {
  std::sort(rels.begin(), rels.end());
  rels.erase(std::unique(rels.begin(), rels.end()), rels.end());
  TSet ts;
  ts.relations = std::move(rels);
  ts.problem_id = std::move(problem_id);
  for (const auto& r : ts.relations)
    ts.atomic_term_count += lexical_leaf_count(r.left) + lexical_leaf_count(r.right);
  return ts;
}

std::string TSet::text() const {
  std::string out = "{";
  for (std::size_t i = 0; i < relations.size(); ++i) {
    if (i) out += ", ";
    out += relations[i].pretty();
  }
  return out + "}";
}

bool TSet::subset_of(const TSet& other) const {
  return std::includes(other.relations.begin(), other.relations.end(), relations.begin(),
                       relations.end());
}

bool tset_less(const TSet& a, const TSet& b) {
  if (a.atomic_term_count != b.atomic_term_count)
    return a.atomic_term_count < b.atomic_term_count;
  return a.relations < b.relations;
}

// ---------------------------------------------------------------------------
// Bases

namespace {

bool comparable(const Term& a, const Term& b) {
  if (term_shape(a) == Shape::Other || term_shape(b) == Shape::Other) return false;
  LexCategory ca = head_category(a);
  if (ca != head_category(b)) return false;
  return ca == LexCategory::noun || ca == LexCategory::verb || ca == LexCategory::adjAdv;
}

bool passes_filters(const Relation& r, const KB& kb, const FilterSet& f) {
  for (const Term* side : {&r.left, &r.right}) {
    // Entities never belong in a stored relation.
    if (contains_entity(*side)) return false;
    if (f.lexicalized && !is_fully_lexicalized(*side)) return false;
    if (f.shape && term_shape(*side) == Shape::Other) return false;
  }
  if (r.left == r.right) return false;
  if (f.comparable && !comparable(r.left, r.right)) return false;
  if (f.kb_consistent && kb.conflicts_with(r)) return false;
  if (f.drop_b_dis_ab && is_trivial_subsective_dis(r)) return false;
  return true;
}

}  // namespace

std::vector<BasisRelation> branch_basis(const Tableau& t, const Branch& branch, const KB& kb,
                                        const AbductionConfig& cfg) {
  // Candidates come from same-argument pairs on every open branch, so that a
  // relation read off one branch is also credited to another branch it closes
  // through the KB.
  std::set<Relation> candidates;
  for (const Branch& b : t.branches()) {
    if (b.status == BranchStatus::closed) continue;
    const auto& ids = b.entries;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Entry& x = t.entry(ids[i]);
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const Entry& y = t.entry(ids[j]);
        if (x.args != y.args) continue;
        std::optional<Relation> cand;
        if (x.sign == Sign::T && y.sign == Sign::F) {
          cand = Relation::sub(x.term, y.term);
        } else if (x.sign == Sign::F && y.sign == Sign::T) {
          cand = Relation::sub(y.term, x.term);
        } else if (x.sign == Sign::T && y.sign == Sign::T && x.term != y.term) {
          cand = Relation::dis(x.term, y.term);
        }
        if (cand && !candidates.count(*cand) && passes_filters(*cand, kb, cfg.filters))
          candidates.insert(*cand);
      }
    }
  }
  std::vector<BasisRelation> out;
  for (const auto& r : candidates) {
    auto c = check_closure(branch, t.entries(), kb.assume({r}));
    if (c) out.push_back(BasisRelation{r, branch.id, c->first, c->second});
  }
  return out;
}

// ---------------------------------------------------------------------------
// T-sets

namespace {

std::vector<Relation> relation_union(const std::vector<std::vector<BasisRelation>>& bases) {
  std::set<Relation> all;
  for (const auto& b : bases)
    for (const auto& r : b) all.insert(r.relation);
  return {all.begin(), all.end()};
}

void flag_minimal(std::vector<TSet>& sets) {
  for (auto& s : sets) {
    s.minimal = std::none_of(sets.begin(), sets.end(), [&](const TSet& o) {
      return o.relations.size() < s.relations.size() && o.subset_of(s);
    });
  }
}

bool size_then_lex(const TSet& a, const TSet& b) {
  if (a.relations.size() != b.relations.size()) return a.relations.size() < b.relations.size();
  return a.relations < b.relations;
}

}  // namespace

std::vector<TSet> shared_tsets(const std::vector<std::vector<BasisRelation>>& bases,
                               const AbductionConfig& cfg) {
  if (bases.empty()) return {};
  std::set<Relation> common;
  for (const auto& r : bases.front()) common.insert(r.relation);
  for (std::size_t i = 1; i < bases.size(); ++i) {
    std::set<Relation> here;
    for (const auto& r : bases[i])
      if (common.count(r.relation)) here.insert(r.relation);
    common = std::move(here);
  }
  std::vector<Relation> items(common.begin(), common.end());
  std::vector<TSet> out;
  // Subsets by size, each size in lexicographic index order.
  for (std::size_t size = 1; size <= items.size() && out.size() < cfg.max_tsets; ++size) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    for (;;) {
      std::vector<Relation> rels;
      for (std::size_t i : idx) rels.push_back(items[i]);
      out.push_back(TSet::of(std::move(rels)));
      if (out.size() >= cfg.max_tsets) break;
      std::size_t k = size;
      while (k > 0 && idx[k - 1] == items.size() - size + k - 1) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t i = k; i < size; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  for (auto& t : out) t.minimal = t.relations.size() == 1;
  return out;
}

std::vector<TSet> hitting_tsets(const std::vector<std::vector<BasisRelation>>& bases,
                                const AbductionConfig& cfg) {
  if (bases.empty()) return {};
  for (const auto& b : bases)
    if (b.empty()) return {};
  std::vector<Relation> items = relation_union(bases);
  const std::size_t n = items.size();
  // member[b] lists item indices of basis b; last[b] is its largest index.
  std::vector<std::vector<std::size_t>> members(bases.size());
  std::vector<std::size_t> last(bases.size(), 0);
  std::vector<std::vector<std::size_t>> owners(n);
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (const auto& r : bases[b]) {
      std::size_t i = static_cast<std::size_t>(
          std::lower_bound(items.begin(), items.end(), r.relation) - items.begin());
      members[b].push_back(i);
      owners[i].push_back(b);
      last[b] = std::max(last[b], i);
    }
  }
  std::vector<std::vector<std::size_t>> closing_at(n);
  for (std::size_t b = 0; b < bases.size(); ++b) closing_at[last[b]].push_back(b);

  std::vector<std::vector<std::size_t>> found;
  std::vector<std::size_t> hits(bases.size(), 0);
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      found.push_back(chosen);
      if (found.size() > cfg.hard_ceiling)
        throw CombinatorialLimitError("more than " + std::to_string(cfg.hard_ceiling) +
                                      " T-sets");
      return;
    }
    // Include item i.
    chosen.push_back(i);
    for (std::size_t b : owners[i]) ++hits[b];
    rec(i + 1);
    for (std::size_t b : owners[i]) --hits[b];
    chosen.pop_back();
    // Exclude item i unless that leaves a basis unhit for good.
    for (std::size_t b : closing_at[i])
      if (hits[b] == 0) return;
    rec(i + 1);
  };
  rec(0);

  std::vector<TSet> out;
  for (const auto& f : found) {
    std::vector<Relation> rels;
    for (std::size_t i : f) rels.push_back(items[i]);
    out.push_back(TSet::of(std::move(rels)));
  }
  std::sort(out.begin(), out.end(), size_then_lex);
  flag_minimal(out);
  if (out.size() > cfg.max_tsets) out.resize(cfg.max_tsets);
  return out;
}

std::vector<TSet> hitting_tsets(const Tableau& t, const KB& kb, const AbductionConfig& cfg) {
  auto open = t.open_branches();
  if (open.empty()) return {};
  std::set<Relation> pool;
  for (const Branch* b : open)
    for (const auto& r : branch_basis(t, *b, kb, cfg)) pool.insert(r.relation);
  std::vector<Relation> items(pool.begin(), pool.end());
  const std::size_t n = items.size();

  auto closes_all = [&](const std::vector<Relation>& rels) {
    KB ext = kb.assume(rels);
    for (const Branch* b : open)
      if (!check_closure(*b, t.entries(), ext)) return false;
    return true;
  };
  if (n == 0 || !closes_all(items)) return {};

  // Closing is monotone in the relation set, so a branch of the search is
  // dead as soon as the chosen items plus all later ones stop closing.
  std::vector<std::vector<std::size_t>> found;
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      found.push_back(chosen);
      if (found.size() > cfg.hard_ceiling)
        throw CombinatorialLimitError("more than " + std::to_string(cfg.hard_ceiling) +
                                      " T-sets");
      return;
    }
    chosen.push_back(i);
    rec(i + 1);
    chosen.pop_back();
    std::vector<Relation> rest;
    for (std::size_t k : chosen) rest.push_back(items[k]);
    for (std::size_t k = i + 1; k < n; ++k) rest.push_back(items[k]);
    if (closes_all(rest)) rec(i + 1);
  };
  rec(0);

  std::vector<TSet> out;
  for (const auto& f : found) {
    std::vector<Relation> rels;
    for (std::size_t i : f) rels.push_back(items[i]);
    out.push_back(TSet::of(std::move(rels)));
  }
  std::sort(out.begin(), out.end(), size_then_lex);
  flag_minimal(out);
  if (out.size() > cfg.max_tsets) out.resize(cfg.max_tsets);
  return out;
}

// ---------------------------------------------------------------------------
// Filters on whole sets

bool sentence_consistent(const TSet& ts, const Problem& problem, const KB& kb,
                         const AbductionConfig& cfg) {
  if (ts.relations.empty()) return true;
  KB ext = kb.assume(ts.relations);
  std::vector<Term> sentences = problem.premises;
  sentences.push_back(problem.hypothesis);
  for (const auto& s : sentences) {
    if (!saturate(init_tableau({s}, std::nullopt, Sign::T, ext, cfg.sentence_check_budget))
             .closed())
      continue;
    // Only inconsistency introduced by the T-set counts.
    if (!saturate(init_tableau({s}, std::nullopt, Sign::T, kb, cfg.sentence_check_budget))
             .closed())
      return false;
  }
  return true;
}

bool internally_conflicting(const TSet& ts, const KB& kb) {
  KB strict = kb.with_options({kb.options().allow_cross_category, true});
  for (std::size_t i = 0; i < ts.relations.size(); ++i) {
    std::vector<Relation> rest;
    for (std::size_t j = 0; j < ts.relations.size(); ++j)
      if (j != i) rest.push_back(ts.relations[j]);
    if (strict.assume(rest).conflicts_with(ts.relations[i])) return true;
  }
  return false;
}

const Tableau& gold_tableau(const ProverVerdict& v, Label gold) {
  if (gold == Label::entailment) return v.entail_tableau;
  if (gold == Label::contradiction) return v.contra_tableau;
  throw AbductionError("abduction needs an entailment or contradiction gold label");
}

std::vector<TSet> abduce(const Problem& problem, const ProverVerdict& verdict, const KB& kb,
                         const AbductionConfig& cfg) {
  const Tableau& t = gold_tableau(verdict, problem.gold);
  if (t.closed())
    throw AbductionError("problem " + problem.id + " is already proved under the KB");

  std::vector<TSet> sets;
  if (cfg.mode == AbductionMode::shared) {
    std::vector<std::vector<BasisRelation>> bases;
    for (const Branch* b : t.open_branches()) bases.push_back(branch_basis(t, *b, kb, cfg));
    sets = shared_tsets(bases, cfg);
  } else {
    sets = hitting_tsets(t, kb, cfg);
  }

  std::vector<TSet> kept;
  for (auto& s : sets) {
    if (internally_conflicting(s, kb)) continue;
    if (cfg.filters.sentence_consistent && !sentence_consistent(s, problem, kb, cfg)) continue;
    kept.push_back(std::move(s));
  }
  std::vector<TSet> minimal;
  for (const auto& s : kept) {
    bool has_smaller = std::any_of(kept.begin(), kept.end(), [&](const TSet& o) {
      return o.relations.size() < s.relations.size() && o.subset_of(s);
    });
    if (!has_smaller) minimal.push_back(s);
  }
  std::vector<TSet> out;
  for (auto& s : minimal) {
    KB ext = kb.assume(s.relations);
    if (classify(problem.premises, problem.hypothesis, ext, t.budget_max()).label != problem.gold)
      continue;
    s.problem_id = problem.id;
    s.minimal = true;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), tset_less);
  return out;
}

}  // namespace natab
