#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "prs/term.hpp"

using namespace prs;

TEST_CASE("canonicalization identities") {
  CHECK(parse_term("X || eps") == parse_term("X"));
  CHECK(parse_term("X.(eps)") == parse_term("X"));
  CHECK(parse_term("Y || X") == parse_term("X || Y"));
  CHECK(parse_term("X.(Y || eps)") == parse_term("X.(Y)"));
}

TEST_CASE("associativity and flattening") {
  Term a = parse_term("X || Y || Z");
  Term b = Term::par(parse_term("Z || X"), parse_term("Y"));
  CHECK(a == b);
  CHECK(a.spine_total() == 3);
}

TEST_CASE("idempotent canonical encode/decode") {
  for (const char* s : {"eps", "X", "X.(Y)", "X || Y.(Z || W)", "A.(B.(C)) || A.(B.(C))"}) {
    Term t = parse_term(s);
    CHECK(parse_term(t.str()) == t);
  }
}

TEST_CASE("classification flags") {
  CHECK(parse_term("X || Y").is_parallel());
  CHECK_FALSE(parse_term("X.(Y)").is_parallel());
  CHECK(parse_term("X.(Y.(Z))").is_sequential());
  CHECK_FALSE(parse_term("X.(Y || Z)").is_sequential());
  CHECK(Term::eps().is_parallel());
  CHECK(Term::eps().is_sequential());
}

TEST_CASE("subterms") {
  CHECK(subterms(Term::eps()) == std::set<Term>{Term::eps()});
  Term xy = parse_term("X.(Y)");
  CHECK(subterms(xy) == std::set<Term>{xy, parse_term("Y")});
  Term par2 = parse_term("X || Y");
  CHECK(subterms(par2) ==
        std::set<Term>{parse_term("X"), parse_term("Y"), par2});
  // duplicate spines: X || X has subterms {X, X||X}
  Term xx = parse_term("X || X");
  CHECK(subterms(xx) == std::set<Term>{parse_term("X"), xx});
}

TEST_CASE("substitute") {
  CHECK(substitute(parse_term("X"), parse_term("X"), parse_term("Y.(Z)")) ==
        std::set<Term>{parse_term("Y.(Z)")});
  CHECK(substitute(parse_term("X||X"), parse_term("X"), parse_term("Y")) ==
        std::set<Term>{parse_term("Y||X")});
  CHECK(substitute(parse_term("W.(X)"), parse_term("X"), Term::eps()) ==
        std::set<Term>{parse_term("W")});
  CHECK_THROWS_AS(substitute(parse_term("X"), parse_term("Y"), Term::eps()),
                  std::invalid_argument);
}

TEST_CASE("seq_set") {
  CHECK(seq_set(Term::eps()).empty());
  CHECK(seq_set(parse_term("X.(Y || Z)")) ==
        std::set<Term>{parse_term("X.(Y)"), parse_term("X.(Z)")});
  CHECK(seq_set(parse_term("X || Y")) ==
        std::set<Term>{parse_term("X"), parse_term("Y")});
  for (Term t : seq_set(parse_term("A.(B || C.(D)) || E")))
    CHECK(t.is_sequential());
}

TEST_CASE("last and compose") {
  CHECK(last(parse_term("X")) == intern("X"));
  CHECK(last(parse_term("X.(Y.(Z))")) == intern("Z"));
  // compose grafts the right term onto the innermost variable
  CHECK(compose(parse_term("X"), parse_term("Y")) == parse_term("Y"));
  CHECK(compose(parse_term("X.(Y)"), parse_term("Z")) == parse_term("X.(Z)"));
  CHECK(compose(parse_term("X.(Y)"), parse_term("Y.(Z)")) == parse_term("X.(Y.(Z))"));
}

namespace {

Term random_seq_term(std::mt19937_64& rng, int depth) {
  static const char* vars[] = {"A", "B", "C", "D"};
  Sym v = intern(vars[rng() % 4]);
  if (depth <= 0 || rng() % 3 == 0) return Term::var(v);
  return Term::seq(v, random_seq_term(rng, depth - 1));
}

}  // namespace

TEST_CASE("compose is associative and agrees with substitute at last") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Term a = random_seq_term(rng, 3);
    Term b = random_seq_term(rng, 3);
    Term c = random_seq_term(rng, 3);
    CHECK(compose(compose(a, b), c) == compose(a, compose(b, c)));
    CHECK(last(compose(a, b)) == last(b));
    auto sub = substitute(a, Term::var(last(a)), b);
    CHECK(sub == std::set<Term>{compose(a, b)});
  }
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_term("X ||"), ParseError);
  CHECK_THROWS_AS(parse_term("X.(Y"), ParseError);
  CHECK_THROWS_AS(parse_term(""), ParseError);
  CHECK_THROWS_AS(parse_term("X Y"), ParseError);
  CHECK_THROWS_AS(parse_term("_bad"), ParseError);
}
