#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "prs/altl.hpp"

using namespace prs;

namespace {

Label L(const char* a) { return Label::act(intern(a)); }

LassoRun run(std::vector<const char*> stem, std::vector<const char*> cycle) {
  LassoRun r;
  for (auto a : stem) r.stem.push_back(L(a));
  for (auto a : cycle) r.cycle.push_back(L(a));
  return r;
}

Mbrs load(const char* name) {
  return parse_system_file(std::string(PRSMC_DATA_DIR) + "/" + name);
}

// random fragment formulas over a small alphabet
Formula random_prop(std::mt19937_64& rng, int depth) {
  static const char* acts[] = {"a", "b", "c"};
  switch (depth <= 0 ? rng() % 2 : rng() % 4) {
    case 0: return FormulaNode::diamond(L(acts[rng() % 3]));
    case 1: return FormulaNode::truth();
    case 2: return FormulaNode::negate(random_prop(rng, depth - 1));
    default:
      return FormulaNode::conj(random_prop(rng, depth - 1), random_prop(rng, depth - 1));
  }
}

Formula random_fragment(std::mt19937_64& rng, int depth) {
  if (depth <= 0 || rng() % 3 == 0) {
    switch (rng() % 4) {
      case 0: return FormulaNode::eventually(random_prop(rng, 1));
      case 1: return FormulaNode::inf_often(random_prop(rng, 1));
      case 2: return FormulaNode::always(random_prop(rng, 1));
      default:
        return FormulaNode::eventually(FormulaNode::always(random_prop(rng, 1)));
    }
  }
  switch (rng() % 3) {
    case 0: return FormulaNode::negate(random_fragment(rng, depth - 1));
    case 1:
      return FormulaNode::conj(random_fragment(rng, depth - 1), random_fragment(rng, depth - 1));
    default:
      return FormulaNode::disj(random_fragment(rng, depth - 1), random_fragment(rng, depth - 1));
  }
}

LassoRun random_run(std::mt19937_64& rng) {
  static const char* acts[] = {"a", "b", "c"};
  LassoRun r;
  size_t slen = rng() % 4, clen = 1 + rng() % 4;
  for (size_t i = 0; i < slen; ++i) r.stem.push_back(L(acts[rng() % 3]));
  for (size_t i = 0; i < clen; ++i) r.cycle.push_back(L(acts[rng() % 3]));
  return r;
}

}  // namespace

TEST_CASE("parser shapes") {
  Formula f = parse_formula("GF <b>");
  CHECK(f->kind == FKind::GF);
  CHECK(f->lhs->kind == FKind::Diamond);

  Formula g = parse_formula("F(<a> & !<b>) | G <c>");
  CHECK(g->kind == FKind::Or);
  CHECK(g->lhs->kind == FKind::F);
  CHECK(g->lhs->lhs->kind == FKind::And);
  CHECK(g->rhs->kind == FKind::G);

  Formula h = parse_formula("F+ <a>");
  CHECK(h->kind == FKind::FPlus);

  Formula u = parse_formula("<a> U <b>");
  CHECK(u->kind == FKind::Until);

  CHECK(parse_formula("FG <a>")->kind == FKind::F);
  CHECK_THROWS_AS(parse_formula("GF"), ParseError);
  CHECK_THROWS_AS(parse_formula("<a> &"), ParseError);
}

TEST_CASE("eval on lasso runs") {
  LassoRun r = run({"a"}, {"b", "c", "d", "a"});
  CHECK(eval(parse_formula("GF <b>"), r));
  CHECK_FALSE(eval(parse_formula("F+ <b>"), r));
  CHECK(eval(parse_formula("F+ <a>"), run({"a"}, {"b"})));
  CHECK(eval(parse_formula("<a> U <b>"), run({"a", "a"}, {"b"})));
  CHECK_FALSE(eval(parse_formula("<a> U <b>"), run({"a", "c"}, {"b"})));
  CHECK(eval(parse_formula("G(<a> | <b>)"), run({}, {"a", "b"})));
  CHECK(eval(parse_formula("FG <a>"), run({"b"}, {"a"})));
  CHECK_FALSE(eval(parse_formula("FG <a>"), run({}, {"a", "b"})));
}

TEST_CASE("eval respects the boolean algebra") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    Formula f1 = random_fragment(rng, 2);
    Formula f2 = random_fragment(rng, 2);
    LassoRun r = random_run(rng);
    CHECK(eval(FormulaNode::negate(f1), r) == !eval(f1, r));
    CHECK(eval(FormulaNode::conj(f1, f2), r) == (eval(f1, r) && eval(f2, r)));
    CHECK(eval(FormulaNode::eventually(f1), r) ==
          (eval(FormulaNode::fplus(f1), r) || eval(FormulaNode::inf_often(f1), r)));
  }
}

TEST_CASE("prop_denote") {
  std::vector<Label> sigma = {L("a"), L("b"), L("c")};
  CHECK(prop_denote(parse_formula("<a>"), sigma) == std::set<Label>{L("a")});
  CHECK(prop_denote(parse_formula("!<a>"), sigma) == std::set<Label>{L("b"), L("c")});
  CHECK(prop_denote(parse_formula("<a> & <b>"), sigma).empty());
  CHECK(prop_denote(parse_formula("true"), sigma).size() == 3);
  CHECK_THROWS_AS(prop_denote(parse_formula("F <a>"), sigma), std::invalid_argument);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Formula p = random_prop(rng, 3);
    auto d = prop_denote(p, sigma);
    auto nd = prop_denote(FormulaNode::negate(p), sigma);
    CHECK(d.size() + nd.size() == sigma.size());
    for (const Label& l : d) CHECK_FALSE(nd.count(l));
  }
}

TEST_CASE("bridge property: prop satisfaction is firstact membership") {
  std::mt19937_64 rng(17);
  std::vector<Label> sigma = {L("a"), L("b"), L("c")};
  for (int i = 0; i < 100; ++i) {
    Formula p = random_prop(rng, 2);
    LassoRun r = random_run(rng);
    auto d = prop_denote(p, sigma);
    CHECK(eval(p, r) == (d.count(r.stem.empty() ? r.cycle[0] : r.stem[0]) > 0));
  }
}

TEST_CASE("ac_rules") {
  Mbrs s1 = load("S1.prs");
  CHECK(ac_rules(s1, parse_formula("<b>")) == std::vector<RuleId>{*s1.find_rule("r2")});
  CHECK(ac_rules(s1, parse_formula("true")).size() == 4);
  CHECK(ac_rules(s1, parse_formula("!<b>")) ==
        std::vector<RuleId>{*s1.find_rule("r1"), *s1.find_rule("r3"), *s1.find_rule("r5")});
}

TEST_CASE("fragment membership") {
  CHECK(in_fragment(parse_formula("!GF<a> | GF<b>")));
  CHECK_FALSE(in_fragment(parse_formula("G(<a> U <b>)")));
  CHECK(in_fragment(parse_formula("F(<a>&<b>) & !F<c>")));
  CHECK(in_fragment(parse_formula("G <a>")));
  CHECK(in_fragment(parse_formula("FG <a>")));
  CHECK_FALSE(in_fragment(parse_formula("<a>")));
  CHECK_FALSE(in_fragment(parse_formula("F+ <a>")));
  CHECK_FALSE(in_fragment(parse_formula("F F <a>")));
}

TEST_CASE("negate_to_dnf structure") {
  // !GF b = FG !b = F+ b | G !b
  auto ds = negate_to_dnf(parse_formula("GF <b>"));
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].fplus.size() == 1);
  CHECK(ds[0].gf.empty());
  CHECK(ds[0].g->kind == FKind::True);
  CHECK(formula_str(ds[0].fplus[0]) == "<b>");
  CHECK(ds[1].fplus.empty());
  CHECK(formula_str(ds[1].g) == "!(<b>)");

  // !(!F a) = F a = F+ a | GF a
  auto ds2 = negate_to_dnf(parse_formula("!F <a>"));
  REQUIRE(ds2.size() == 2);
  CHECK(ds2[0].fplus.size() == 1);
  CHECK(ds2[1].gf.size() == 1);

  CHECK_THROWS_AS(negate_to_dnf(parse_formula("<a> U <b>")), std::invalid_argument);
}

TEST_CASE("negate_to_dnf is semantically the negation") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 300; ++i) {
    Formula f = random_fragment(rng, 3);
    LassoRun r = random_run(rng);
    auto ds = negate_to_dnf(f);
    bool any = false;
    for (const Disjunct& d : ds) {
      bool v = eval(d.as_formula(), r);
      // a disjunct holds iff all of its parts hold independently
      bool parts = true;
      for (const Formula& p : d.fplus) parts &= eval(FormulaNode::fplus(p), r);
      for (const Formula& p : d.gf) parts &= eval(FormulaNode::inf_often(p), r);
      parts &= eval(FormulaNode::always(d.g), r);
      CHECK(v == parts);
      any |= v;
    }
    CHECK(any == !eval(f, r));
  }
}

TEST_CASE("disjunct_to_mbrs") {
  Mbrs s1 = load("S1.prs");
  {
    Disjunct d;
    d.fplus = {parse_formula("<b>")};
    d.g = FormulaNode::truth();
    auto dm = disjunct_to_mbrs(s1, d);
    CHECK(dm.mbrs.n == 2);
    CHECK(dm.k == KSet::single(1));
    CHECK(dm.komega == KSet());
    CHECK(dm.mbrs.component(1) == std::vector<RuleId>{*s1.find_rule("r2")});
    CHECK(dm.mbrs.component(2).empty());
  }
  {
    Disjunct d;
    d.g = parse_formula("!<b>");
    auto dm = disjunct_to_mbrs(s1, d);
    CHECK(dm.mbrs.n == 1);
    CHECK(dm.k == KSet());
    CHECK(dm.komega == KSet());
    CHECK(dm.mbrs.component(1) == std::vector<RuleId>{*s1.find_rule("r2")});
  }
  {
    Disjunct d;
    d.gf = {parse_formula("<c>")};
    d.g = FormulaNode::truth();
    auto dm = disjunct_to_mbrs(s1, d);
    CHECK(dm.mbrs.n == 2);
    CHECK(dm.k == KSet::single(1));
    CHECK(dm.komega == KSet::single(1));
    CHECK(dm.mbrs.component(1) == std::vector<RuleId>{*s1.find_rule("r3")});
  }
}
