#include "doctest.h"

#include <random>

#include "natab/llf.hpp"
#include "support/oracles.hpp"

using namespace natab;

TEST_CASE("parse and format round-trip") {
  const char* inputs[] = {
      "hedgehog.n",
      "(a.det hedgehog.n run.v)",
      "(a.det hedgehog.n (be.aux (lam x (a.det boy.n (lam y (by.prep y cradle.v x))))))",
      "(every.det (young.adj person.n) (lam x (no.det (small.adj animal.n) (lam y (hold.v y x)))))",
      "(quickly.adv run.v)",
  };
  for (const char* s : inputs) {
    Term t = parse_llf(s);
    CHECK(format_llf(t) == s);
    CHECK(parse_llf(format_llf(t)) == t);
  }
}

TEST_CASE("application is left-associated and whitespace/comments are ignored") {
  Term t = parse_llf("  (hold.v\n  ; object first\n  a.n b.n)  ");
  CHECK(t == Term::app(Term::app(Term::lex("hold", LexTag::v), Term::lex("a", LexTag::n)),
                       Term::lex("b", LexTag::n)));
  auto [head, args] = spine(t);
  CHECK(head.text() == "hold.v");
  REQUIRE(args.size() == 2);
  CHECK(args[0].text() == "a.n");
}

TEST_CASE("parse errors carry positions") {
  auto fails = [](const char* s, std::size_t line, std::size_t col) {
    try {
      parse_llf(s);
      FAIL("expected ParseError for " << s);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() == col);
    }
  };
  fails("(a.det dog.n", 1, 1);
  fails("(a.det dog.x run.v)", 1, 12);
  fails("(a.det dog.n x)", 1, 14);
  fails("()", 1, 1);
  fails("(dog.n)", 1, 1);
  fails("(a.det dog.n run.v))", 1, 20);
  fails("(lam c1 dog.n)", 1, 6);
  fails("c3", 1, 1);
  fails("\n  )", 2, 3);
}

TEST_CASE("entity constants only when allowed") {
  ParseOptions opts;
  opts.allow_entities = true;
  Term t = parse_llf("(cradle.v c1 c2)", opts);
  CHECK(contains_entity(t));
  CHECK_FALSE(is_fully_lexicalized(t));
  CHECK(t.fun().arg() == Term::entity(1));
}

TEST_CASE("free variables and closedness") {
  ParseOptions opts;
  opts.require_closed = false;
  Term t = parse_llf("(lam x (hold.v x y))", opts);
  CHECK(free_vars(t) == std::set<std::string>{"y"});
  CHECK_FALSE(is_closed(t));
  CHECK(is_closed(parse_llf("(lam x (hold.v x x))")));
  CHECK_THROWS_AS(parse_llf("(lam x (hold.v x y))"), ParseError);
}

TEST_CASE("substitution avoids capture") {
  ParseOptions opts;
  opts.require_closed = false;
  Term t = parse_llf("(lam y (hold.v x y))", opts);
  Term r = substitute(t, "x", Term::var("y"));
  // The bound y must be renamed so the substituted y stays free.
  CHECK(free_vars(r) == std::set<std::string>{"y"});
  REQUIRE(r.is_lam());
  CHECK(r.name() != "y");
  CHECK(alpha_equivalent(r, parse_llf("(lam z (hold.v y z))", opts)));
}

TEST_CASE("beta reduction of a worked example") {
  Term t = parse_llf("((lam x (lam y (by.prep y cradle.v x))) hedgehog.n boy.n)");
  Term r = beta_reduce(t);
  CHECK(format_llf(r) == "(by.prep boy.n cradle.v hedgehog.n)");
  CHECK(is_beta_normal(r));
  CHECK_FALSE(is_beta_normal(t));
  CHECK(beta_reduce(r) == r);
}

TEST_CASE("alpha equivalence") {
  CHECK(alpha_equivalent(parse_llf("(lam x (run.v x))"), parse_llf("(lam z (run.v z))")));
  CHECK_FALSE(alpha_equivalent(parse_llf("(lam x (lam y (hold.v x y)))"),
                               parse_llf("(lam x (lam y (hold.v y x)))")));
  CHECK(alpha_equivalent(parse_llf("(lam x (lam x (hold.v x x)))"),
                         parse_llf("(lam a (lam b (hold.v b b)))")));
}

TEST_CASE("beta reduction agrees with a de Bruijn reducer under random redex order") {
  std::mt19937_64 rng(7);
  oracle::TermGen<std::mt19937_64> gen(rng);
  auto e = oracle::base_type();
  std::vector<oracle::TypePtr> types{e, oracle::arrow(e, e), oracle::arrow(oracle::arrow(e, e), e)};
  int nontrivial = 0;
  for (int i = 0; i < 400; ++i) {
    Term t = gen.gen(types[static_cast<std::size_t>(i) % types.size()], 5);
    Term ours = beta_reduce(t);
    CHECK(is_beta_normal(ours));
    auto expected = oracle::db_text(oracle::to_db(ours));
    for (int order = 0; order < 3; ++order) {
      auto theirs = oracle::db_normalize_random(oracle::to_db(t), rng);
      CHECK_MESSAGE(oracle::db_text(theirs) == expected, format_llf(t));
    }
    if (!(ours == t)) ++nontrivial;
  }
  CHECK(nontrivial > 100);
}

TEST_CASE("shapes and head categories") {
  CHECK(term_shape(parse_llf("boy.n")) == Shape::A);
  CHECK(term_shape(parse_llf("(young.adj person.n)")) == Shape::AB);
  CHECK(term_shape(parse_llf("(very.adv young.adj person.n)")) == Shape::ABC_left);
  CHECK(term_shape(parse_llf("(young.adj (brown.adj dog.n))")) == Shape::ABC_right);
  CHECK(term_shape(parse_llf("(a.det dog.n (lam x (run.v x)))")) == Shape::Other);
  CHECK(head_category(parse_llf("(young.adj person.n)")) == LexCategory::noun);
  CHECK(head_category(parse_llf("young.adj")) == LexCategory::adjAdv);
  CHECK(head_category(parse_llf("(quickly.adv run.v)")) == LexCategory::verb);
  CHECK(head_category(parse_llf("(play.v guitar.n)")) == LexCategory::verb);
  CHECK_THROWS_AS(head_category(parse_llf("(a.det dog.n run.v)")), std::invalid_argument);
}

TEST_CASE("lexical leaves and lemmas") {
  Term t = parse_llf("(young.adj (young.adj person.n))");
  CHECK(lexical_leaf_count(t) == 3);
  CHECK(lemmas(t) == std::set<std::string>{"young", "person"});
}

TEST_CASE("terms hash and compare by canonical text") {
  Term a = parse_llf("(a.det dog.n run.v)");
  Term b = Term::apply(Term::lex("a", LexTag::det), {Term::lex("dog", LexTag::n), Term::lex("run", LexTag::v)});
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  CHECK(std::hash<Term>{}(a) == std::hash<Term>{}(b));
  CHECK_FALSE(Term::lex("run", LexTag::v) == Term::lex("run", LexTag::n));
}
