#include "doctest.h"

#include <chrono>

#include "natab/abduction.hpp"
#include "natab/harness.hpp"
#include "support/oracles.hpp"

using namespace natab;

namespace {

Term T(const char* s) { return parse_llf(s); }
Relation Sub(const char* a, const char* b) { return Relation::sub(T(a), T(b)); }
Relation Dis(const char* a, const char* b) { return Relation::dis(T(a), T(b)); }

KB paper_kb() { return load_kb(NATAB_DATA_DIR "/kb/paper.kb"); }
Problem variant() { return load_problem_file(NATAB_DATA_DIR "/problems/hedgehog_variant.json").front(); }

AbductionConfig hitting_cfg(const char* filters = "all") {
  AbductionConfig cfg;
  cfg.mode = AbductionMode::hitting;
  cfg.filters = FilterSet::parse(filters);
  return cfg;
}

std::set<Relation> relations_of(const std::vector<BasisRelation>& basis) {
  std::set<Relation> out;
  for (const auto& b : basis) out.insert(b.relation);
  return out;
}

std::vector<std::vector<BasisRelation>> bases_of(const Tableau& t, const KB& kb, const AbductionConfig& cfg) {
  std::vector<std::vector<BasisRelation>> out;
  for (const auto* b : t.open_branches()) out.push_back(branch_basis(t, *b, kb, cfg));
  return out;
}

std::vector<BasisRelation> synthetic(std::initializer_list<Relation> rels) {
  std::vector<BasisRelation> out;
  for (const auto& r : rels) out.push_back({r, 0, 0, 0});
  return out;
}

}  // namespace

TEST_CASE("filter lists") {
  CHECK(FilterSet::parse("all") == FilterSet::all());
  CHECK(FilterSet::parse("none") == FilterSet::none());
  FilterSet f = FilterSet::parse("all,-comparable");
  CHECK_FALSE(f.comparable);
  CHECK(f.shape);
  CHECK(FilterSet::parse("-comparable") == f);
  CHECK(FilterSet::parse("shape,lexicalized").text() == "shape,lexicalized");
  CHECK(FilterSet::parse(f.text()) == f);
  CHECK(FilterSet::none().text() == "none");
  CHECK_THROWS_AS(FilterSet::parse("all,-bogus"), std::invalid_argument);
  CHECK(parse_mode("hitting") == AbductionMode::hitting);
  CHECK_FALSE(parse_mode("greedy"));
}

TEST_CASE("T-set bookkeeping") {
  TSet a = TSet::of({Sub("hedgehog.n", "small.adj"), Sub("boy.n", "young.adj"), Sub("boy.n", "young.adj")});
  CHECK(a.relations.size() == 2);
  CHECK(a.atomic_term_count == 4);
  CHECK(a.text() == "{boy.n <= young.adj, hedgehog.n <= small.adj}");
  TSet b = TSet::of({Sub("boy.n", "(young.adj person.n)"), Sub("hedgehog.n", "small.adj")});
  CHECK(b.atomic_term_count == 5);
  CHECK(tset_less(a, b));
  CHECK_FALSE(tset_less(b, a));
  CHECK(TSet::of({Sub("boy.n", "young.adj")}).subset_of(a));
  CHECK_FALSE(b.subset_of(a));
}

TEST_CASE("worked-example bases with the comparability filter off") {
  KB kb = paper_kb();
  Problem p = variant();
  auto v = classify(p.premises, p.hypothesis, kb, 50);
  auto bases = bases_of(v.entail_tableau, kb, hitting_cfg("all,-comparable"));
  REQUIRE(bases.size() == 2);
  CHECK(relations_of(bases[0]) == std::set<Relation>{Sub("boy.n", "(young.adj person.n)"), Sub("boy.n", "young.adj")});
  CHECK(relations_of(bases[1]) ==
        std::set<Relation>{Sub("hedgehog.n", "(small.adj animal.n)"), Sub("hedgehog.n", "small.adj")});
  // Every basis relation closes its branch on its own.
  const auto& t = v.entail_tableau;
  for (std::size_t i = 0; i < bases.size(); ++i)
    for (const auto& b : bases[i]) {
      auto c = check_closure(*t.open_branches()[i], t.entries(), kb.assume({b.relation}));
      REQUIRE(c);
      CHECK(c->first == b.first);
      CHECK(c->second == b.second);
    }
}

TEST_CASE("comparability filter drops cross-category candidates") {
  KB kb = paper_kb();
  Problem p = variant();
  auto v = classify(p.premises, p.hypothesis, kb, 50);
  auto bases = bases_of(v.entail_tableau, kb, hitting_cfg("all"));
  REQUIRE(bases.size() == 2);
  CHECK(relations_of(bases[0]) == std::set<Relation>{Sub("boy.n", "(young.adj person.n)")});
  CHECK(relations_of(bases[1]) == std::set<Relation>{Sub("hedgehog.n", "(small.adj animal.n)")});
}

TEST_CASE("per-relation filters") {
  KB kb = paper_kb();
  // A branch holding small animal, animal and hedgehog for one entity.
  auto t = saturate(init_tableau({T("(a.det (small.adj hedgehog.n) run.v)")}, T("(a.det (small.adj animal.n) sleep.v)"),
                                 Sign::T, kb, 50));
  REQUIRE_FALSE(t.open_branches().empty());
  auto none = relations_of(branch_basis(t, *t.open_branches()[0], kb, hitting_cfg("none")));
  auto all = relations_of(branch_basis(t, *t.open_branches()[0], kb, hitting_cfg("all")));
  // B | AB is trivially false for subsective modifiers.
  CHECK(none.count(Dis("(small.adj animal.n)", "animal.n")));
  CHECK_FALSE(all.count(Dis("(small.adj animal.n)", "animal.n")));
  CHECK(all.size() < none.size());
  for (const auto& r : all) {
    CHECK(kb.storable(r));
    CHECK_FALSE(kb.conflicts_with(r));
    CHECK_FALSE(is_trivial_subsective_dis(r));
  }
  // hedgehog | animal contradicts hedgehog <= animal.
  // A hedgehog that is an animal; the open branch has both as true of c1.
  auto t2 = saturate(init_tableau({T("(a.det hedgehog.n (be.aux animal.n))")}, T("(a.det hedgehog.n sleep.v)"),
                                  Sign::F, kb, 50));
  REQUIRE_FALSE(t2.open_branches().empty());
  bool seen_raw = false;
  for (const auto* b : t2.open_branches()) {
    auto raw = relations_of(branch_basis(t2, *b, KB{}, hitting_cfg("none")));
    seen_raw = seen_raw || raw.count(Dis("hedgehog.n", "animal.n"));
    CHECK_FALSE(relations_of(branch_basis(t2, *b, kb, hitting_cfg("all"))).count(Dis("hedgehog.n", "animal.n")));
  }
  CHECK(seen_raw);
}

TEST_CASE("cross-category pair gives an empty basis") {
  // The open branch holds boy:[c1]:T against run:[c1]:F and nothing else.
  auto t = saturate(init_tableau({T("(a.det boy.n boy.n)")}, T("(a.det boy.n run.v)"), Sign::F, KB{}, 50));
  auto open = t.open_branches();
  REQUIRE(open.size() == 1);
  CHECK(branch_basis(t, *open[0], KB{}, hitting_cfg("all")).empty());
  CHECK(relations_of(branch_basis(t, *open[0], KB{}, hitting_cfg("all,-comparable"))) ==
        std::set<Relation>{Sub("boy.n", "run.v")});
  // Unfiltered, the sentence-level pair is a candidate too.
  CHECK(relations_of(branch_basis(t, *open[0], KB{}, hitting_cfg("none"))).size() == 2);
}

TEST_CASE("shared T-sets") {
  Relation r1 = Sub("a.n", "b.n"), r2 = Sub("c.n", "d.n"), r3 = Sub("e.n", "f.n");
  AbductionConfig cfg;
  auto one = shared_tsets({synthetic({r1, r2})}, cfg);
  REQUIRE(one.size() == 3);
  CHECK(one[0].relations == std::vector<Relation>{r1});
  CHECK(one[1].relations == std::vector<Relation>{r2});
  CHECK(one[2].relations == std::vector<Relation>{r1, r2});
  auto two = shared_tsets({synthetic({r1, r2}), synthetic({r1, r3})}, cfg);
  REQUIRE(two.size() == 1);
  CHECK(two[0].relations == std::vector<Relation>{r1});
  CHECK(shared_tsets({synthetic({r1}), synthetic({r2})}, cfg).empty());
  CHECK(shared_tsets({}, cfg).empty());
  cfg.max_tsets = 2;
  CHECK(shared_tsets({synthetic({r1, r2, r3})}, cfg).size() == 2);
}

TEST_CASE("hitting T-sets from bases") {
  Relation r1 = Sub("a.n", "b.n"), r2 = Sub("c.n", "d.n"), r3 = Sub("e.n", "f.n"), r4 = Sub("g.n", "h.n");
  AbductionConfig cfg = hitting_cfg();
  auto single = hitting_tsets({synthetic({r1})}, cfg);
  REQUIRE(single.size() == 1);
  CHECK(single[0].minimal);
  auto forced = hitting_tsets({synthetic({r1}), synthetic({r2})}, cfg);
  REQUIRE(forced.size() == 1);
  CHECK(forced[0].relations == std::vector<Relation>{r1, r2});
  auto nine = hitting_tsets({synthetic({r1, r2}), synthetic({r3, r4})}, cfg);
  CHECK(nine.size() == 9);
  CHECK(std::count_if(nine.begin(), nine.end(), [](const TSet& t) { return t.minimal; }) == 4);
  CHECK(hitting_tsets({synthetic({r1}), {}}, cfg).empty());
  // Sorted by size, minimal flags exact.
  for (std::size_t i = 1; i < nine.size(); ++i) CHECK(nine[i - 1].relations.size() <= nine[i].relations.size());
  for (const auto& t : nine) {
    bool has_smaller = std::any_of(nine.begin(), nine.end(), [&](const TSet& o) {
      return o.relations.size() < t.relations.size() && o.subset_of(t);
    });
    CHECK(t.minimal == !has_smaller);
  }
}

TEST_CASE("hitting enumeration respects the hard ceiling") {
  std::vector<BasisRelation> big;
  for (int i = 0; i < 14; ++i) {
    std::string a = "a" + std::to_string(i) + ".n";
    big.push_back({Sub(a.c_str(), "z.n"), 0, 0, 0});
  }
  AbductionConfig cfg = hitting_cfg();
  CHECK_THROWS_AS(hitting_tsets({big}, cfg), CombinatorialLimitError);
  cfg.hard_ceiling = 1 << 15;
  auto sets = hitting_tsets({big}, cfg);
  CHECK(sets.size() == cfg.max_tsets);
}

TEST_CASE("worked example: nine T-sets, four minimal, shared mode empty") {
  KB kb = paper_kb();
  Problem p = variant();
  auto start = std::chrono::steady_clock::now();
  auto v = classify(p.premises, p.hypothesis, kb, 50);
  auto cfg = hitting_cfg("all,-comparable");
  auto sets = hitting_tsets(v.entail_tableau, kb, cfg);
  CHECK(sets.size() == 9);
  CHECK(std::count_if(sets.begin(), sets.end(), [](const TSet& t) { return t.minimal; }) == 4);
  bool found = std::any_of(sets.begin(), sets.end(), [&](const TSet& t) {
    return t.relations == std::vector<Relation>{Sub("boy.n", "young.adj"), Sub("hedgehog.n", "small.adj")};
  });
  CHECK(found);
  // The basis-only enumeration agrees here.
  auto from_bases = hitting_tsets(bases_of(v.entail_tableau, kb, cfg), cfg);
  REQUIRE(from_bases.size() == sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) CHECK(from_bases[i].relations == sets[i].relations);
  AbductionConfig shared = cfg;
  shared.mode = AbductionMode::shared;
  CHECK(shared_tsets(bases_of(v.entail_tableau, kb, shared), shared).empty());
  CHECK(abduce(p, v, kb, shared).empty());
  auto out = abduce(p, v, kb, cfg);
  REQUIRE(out.size() == 4);
  CHECK(out[0].relations == std::vector<Relation>{Sub("boy.n", "young.adj"), Sub("hedgehog.n", "small.adj")});
  CHECK(out[0].atomic_term_count == 4);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 1.0);
  // With comparability on only the noun-headed explanation survives.
  auto strict = abduce(p, v, kb, hitting_cfg("all"));
  REQUIRE(strict.size() == 1);
  CHECK(strict[0].relations ==
        std::vector<Relation>{Sub("boy.n", "(young.adj person.n)"), Sub("hedgehog.n", "(small.adj animal.n)")});
}

TEST_CASE("hitting enumeration matches brute force on random problems") {
  auto stats = oracle::hitting_vs_brute_force(1, 100);
  CHECK(stats.problems == 100);
  CHECK(stats.with_tsets > 30);
  CHECK_MESSAGE(stats.mismatches == 0, (stats.details.empty() ? std::string() : stats.details.front()));
}

TEST_CASE("every brute-force disagreement comes from a changed proof search") {
  int problems = 0, mismatches = 0, explained = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto s = oracle::hitting_vs_brute_force(seed, 100);
    problems += s.problems;
    mismatches += s.mismatches;
    explained += s.search_changed;
  }
  MESSAGE("problems=" << problems << " mismatches=" << mismatches);
  CHECK(problems == 2000);
  CHECK(explained == mismatches);
}

TEST_CASE("shared T-sets are among the hitting T-sets") {
  std::mt19937_64 rng(5);
  int compared = 0;
  for (int i = 0; i < 400; ++i) {
    auto rp = oracle::random_problem(rng);
    auto t = saturate(init_tableau(rp.premises, rp.hypothesis, Sign::F, rp.kb, 50));
    if (t.open_branches().empty() || t.budget_exhausted()) continue;
    AbductionConfig cfg = hitting_cfg();
    cfg.max_tsets = 4096;
    cfg.hard_ceiling = 1 << 16;
    std::vector<TSet> hit;
    try {
      hit = hitting_tsets(t, rp.kb, cfg);
    } catch (const CombinatorialLimitError&) {
      continue;
    }
    std::set<std::vector<Relation>> hs;
    for (const auto& h : hit) hs.insert(h.relations);
    for (const auto& s : shared_tsets(bases_of(t, rp.kb, cfg), cfg)) CHECK(hs.count(s.relations));
    ++compared;
  }
  CHECK(compared > 50);
}

TEST_CASE("sentence consistency") {
  Problem p;
  p.id = "panda";
  p.premises = {T("(a.det (baby.adj panda.n) play.v)")};
  p.hypothesis = T("(a.det panda.n play.v)");
  p.gold = Label::entailment;
  AbductionConfig cfg;
  CHECK_FALSE(sentence_consistent(TSet::of({Dis("baby.adj", "panda.n")}), p, KB{}, cfg));
  CHECK(sentence_consistent(TSet::of({Sub("dog.n", "animal.n")}), p, KB{}, cfg));
  Problem v = variant();
  CHECK_FALSE(sentence_consistent(TSet::of({Dis("young.adj", "person.n")}), v, paper_kb(), cfg));
  CHECK(sentence_consistent(TSet::of({Sub("boy.n", "young.adj")}), v, paper_kb(), cfg));
}

TEST_CASE("sentence consistency rejects the trap explanation in the corpus") {
  auto corpus = load_problems(NATAB_DATA_DIR "/problems/desk.jsonl");
  auto it = std::find_if(corpus.begin(), corpus.end(), [](const Problem& p) { return p.id == "c09-small-brown-puppy"; });
  REQUIRE(it != corpus.end());
  KB kb = load_kb(NATAB_DATA_DIR "/kb/seed.kb");
  auto v = classify(it->premises, it->hypothesis, kb, 50);
  Relation trap = Dis("brown.adj", "small.adj");
  CHECK_FALSE(sentence_consistent(TSet::of({trap}), *it, kb, AbductionConfig{}));
  auto contains_trap = [&](const std::vector<TSet>& sets) {
    return std::any_of(sets.begin(), sets.end(), [&](const TSet& t) {
      return std::find(t.relations.begin(), t.relations.end(), trap) != t.relations.end();
    });
  };
  CHECK(contains_trap(abduce(*it, v, kb, hitting_cfg("all,-sentence_consistent"))));
  CHECK_FALSE(contains_trap(abduce(*it, v, kb, hitting_cfg("all"))));
}

TEST_CASE("internal conflicts") {
  KB kb;
  CHECK(internally_conflicting(TSet::of({Sub("a.n", "b.n"), Dis("a.n", "b.n")}), kb));
  CHECK(internally_conflicting(TSet::of({Sub("a.n", "b.n"), Sub("b.n", "c.n"), Dis("a.n", "c.n")}), kb));
  CHECK_FALSE(internally_conflicting(TSet::of({Sub("a.n", "b.n"), Dis("c.n", "b.n")}), kb));
  KB with = parse_kb("sub a.n b.n\n");
  CHECK(internally_conflicting(TSet::of({Sub("b.n", "c.n"), Dis("a.n", "c.n")}), with));
}

TEST_CASE("abduction preconditions") {
  KB kb = paper_kb();
  Problem p = load_problem_file(NATAB_DATA_DIR "/problems/hedgehog.json").front();
  auto v = classify(p.premises, p.hypothesis, kb, 50);
  CHECK_THROWS_AS(abduce(p, v, kb, hitting_cfg()), AbductionError);
  Problem n = variant();
  n.gold = Label::neutral;
  CHECK_THROWS_AS(abduce(n, classify(n.premises, n.hypothesis, kb, 50), kb, hitting_cfg()), AbductionError);
}

TEST_CASE("abduction laws on the desk corpus") {
  KB kb = load_kb(NATAB_DATA_DIR "/kb/seed.kb");
  auto corpus = load_problems(NATAB_DATA_DIR "/problems/desk.jsonl");
  int with_sets = 0, over_limit = 0;
  for (const char* mode : {"shared", "hitting"}) {
    for (const char* filters : {"all", "all,-comparable"}) {
      AbductionConfig cfg;
      cfg.mode = *parse_mode(mode);
      cfg.filters = FilterSet::parse(filters);
      for (const auto& p : corpus) {
        if (p.gold == Label::neutral) continue;
        auto v = classify(p.premises, p.hypothesis, kb, 50);
        if (gold_tableau(v, p.gold).closed()) continue;
        std::vector<TSet> sets;
        try {
          sets = abduce(p, v, kb, cfg);
        } catch (const CombinatorialLimitError&) {
          ++over_limit;
          continue;
        }
        if (!sets.empty()) ++with_sets;
        for (std::size_t i = 0; i < sets.size(); ++i) {
          const auto& s = sets[i];
          // Verification: the gold label follows.
          CHECK_MESSAGE(classify(p.premises, p.hypothesis, kb.assume(s.relations), 50).label == p.gold, p.id);
          CHECK(s.problem_id == p.id);
          CHECK(s.minimal);
          if (i > 0) CHECK_FALSE(tset_less(s, sets[i - 1]));
          for (const auto& o : sets)
            if (&o != &s) CHECK_FALSE((o.subset_of(s) && o.relations.size() < s.relations.size()));
          for (const auto& r : s.relations) {
            CHECK(is_fully_lexicalized(r.left));
            CHECK(term_shape(r.right) != Shape::Other);
            CHECK_FALSE(kb.conflicts_with(r));
            CHECK_FALSE(is_trivial_subsective_dis(r));
            if (cfg.filters.comparable) CHECK(head_category(r.left) == head_category(r.right));
          }
          CHECK_FALSE(internally_conflicting(s, kb));
          CHECK(sentence_consistent(s, p, kb, cfg));
        }
      }
    }
  }
  CHECK(with_sets > 10);
  CHECK(over_limit <= 1);
}
