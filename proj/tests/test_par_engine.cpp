#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "prs/par_engine.hpp"

using namespace prs;

namespace {

Mbrs load(const char* name) {
  return parse_system_file(std::string(PRSMC_DATA_DIR) + "/" + name);
}

KSet ks(std::initializer_list<uint32_t> xs) {
  KSet k;
  for (uint32_t x : xs) k = k.with(x);
  return k;
}

// the parallel restriction of a normal-form system, keeping components
Mbrs par_part(const Mbrs& m) {
  Mbrs out = m;
  out.rules.clear();
  out.cmp.clear();
  for (RuleId r = 0; r < m.rules.size(); ++r)
    if (m.rules[r].is_par()) out.add_rule(m.rules[r], m.cmp[r]);
  return out;
}

void check_finite_witness(const Mbrs& m, const Verdict& v, KSet K) {
  REQUIRE(v.finite.has_value());
  CHECK(replay(m, *v.finite));
  CHECK(maximal(m, v.finite->rule_seq()) == K);
}

std::vector<char> all_rstar(const Mbrs& m) { return std::vector<char>(m.rules.size(), 1); }

}  // namespace

TEST_CASE("par_reach_cover") {
  Mbrs s2 = load("S2.prs");
  auto v = par_reach_cover(s2, intern("X"), intern("Y"), KSet());
  REQUIRE(v.yes());
  check_finite_witness(s2, v, KSet());
  CHECK_FALSE(v.finite->steps.empty());
  // the end term must cover Y
  CHECK(par_includes(v.finite->end(), Term::var(intern("Y"))));

  Mbrs p1 = par_part(load("S1.prs"));
  CHECK(par_reach_cover(p1, intern("X"), intern("Z"), KSet()).no());
  CHECK(par_reach_cover(p1, intern("X"), intern("Z"), ks({2})).no());
  // untouchable component: Re_1 has no PAR rule
  CHECK(par_reach_cover(p1, intern("X"), intern("Y"), ks({1})).no());
}

TEST_CASE("par_reach_cover needs a nonempty derivation") {
  Mbrs m = parse_system_text(
      "alphabet a b\nvars X B\nrule r1 : X -a-> B\nrule r2 : B -b-> X\n");
  // X covers X only through the loop X -> B -> X
  auto v = par_reach_cover(m, intern("X"), intern("X"), KSet());
  REQUIRE(v.yes());
  CHECK(v.finite->steps.size() == 2);
}

TEST_CASE("par_reach_empty") {
  Mbrs m = parse_system_text("alphabet b\nvars Y\nrule r : Y -b-> eps\n");
  auto v = par_reach_empty(m, intern("Y"), KSet());
  REQUIRE(v.yes());
  CHECK(v.finite->end() == Term::eps());

  // S2: X persists (no rule consumes it) -> exact No by persistence pruning
  Mbrs s2 = load("S2.prs");
  CHECK(par_reach_empty(s2, intern("X"), KSet()).no());
  CHECK(par_reach_empty(s2, intern("X"), ks({1})).no());

  Mbrs p1 = par_part(load("S1.prs"));
  auto v2 = par_reach_empty(p1, intern("Z"), ks({2}));
  REQUIRE(v2.yes());
  check_finite_witness(p1, v2, ks({2}));
}

TEST_CASE("par_reach_var") {
  Mbrs m = parse_system_text("alphabet a\nvars X Y\nrule r : X -a-> Y\naccepting 1 : r\n");
  CHECK(par_reach_var(m, intern("X"), intern("Y"), ks({1})).yes());
  CHECK(par_reach_var(m, intern("X"), intern("Y"), KSet()).no());
  // null derivation reaches X itself
  auto v = par_reach_var(m, intern("X"), intern("X"), KSet());
  REQUIRE(v.yes());
  CHECK(v.finite->steps.empty());

  // a null derivation reaches the start variable itself even when no loop
  // back exists (X -> Y is the only move in the parallel part of S1)
  Mbrs p1 = par_part(load("S1.prs"));
  auto v2 = par_reach_var(p1, intern("X"), intern("X"), KSet());
  REQUIRE(v2.yes());
  CHECK(v2.finite->steps.empty());
}

TEST_CASE("par_finite_accepting") {
  Mbrs s2 = load("S2.prs");
  CHECK(par_finite_accepting(s2, intern("X"), KSet()).yes());
  auto v = par_finite_accepting(s2, intern("X"), ks({1}));
  REQUIRE(v.yes());
  check_finite_witness(s2, v, ks({1}));

  Mbrs p1 = par_part(load("S1.prs"));
  CHECK(par_finite_accepting(p1, intern("X"), ks({1})).no());
}

TEST_CASE("par_infinite_mixed on S2") {
  Mbrs s2 = load("S2.prs");
  auto v = par_infinite_mixed(s2, s2, intern("X"), ks({1}), ks({1}), all_rstar(s2));
  REQUIRE(v.yes());
  REQUIRE(v.stem.has_value());
  REQUIRE(v.cycle.has_value());
  CHECK(replay(s2, *v.stem));
  CHECK(replay(s2, *v.cycle));
  CHECK_FALSE(v.cycle->steps.empty());
  // self-covering: the cycle end covers its start
  CHECK(par_includes(v.cycle->end(), v.cycle->start));

  // K = Komega = {} : pump r1 alone forever
  auto v2 = par_infinite_mixed(s2, s2, intern("X"), KSet(), KSet(), all_rstar(s2));
  REQUIRE(v2.yes());

  // Komega not within K
  CHECK(par_infinite_mixed(s2, s2, intern("X"), KSet(), ks({1}), all_rstar(s2)).no());
}

TEST_CASE("par_infinite_mixed pump replays three rounds") {
  Mbrs s2 = load("S2.prs");
  auto v = par_infinite_mixed(s2, s2, intern("X"), ks({1}), ks({1}), all_rstar(s2));
  REQUIRE(v.yes());
  Term cur = v.cycle->start;
  auto rules = v.cycle->rule_seq();
  Term base = cur;
  for (int round = 0; round < 3; ++round) {
    for (RuleId r : rules) {
      auto nexts = apply_rule(s2, cur, r);
      REQUIRE_FALSE(nexts.empty());
      // choose the successor that keeps everything parallel-composed
      bool advanced = false;
      for (Term t : nexts) {
        if (par_includes(t, base) || round == 2) {
          cur = t;
          advanced = true;
          break;
        }
      }
      REQUIRE(advanced);
    }
    CHECK(par_includes(cur, base));
  }
}

TEST_CASE("par_infinite_mixed finite disjunct via non-rstar rule") {
  Mbrs m = parse_system_text(
      "alphabet a\nvars X Y\nrule r1 : X -a-> Y\naccepting 1 : r1\n");
  Mbrs m2 = m;
  for (KSet& k : m2.cmp) k = KSet();  // mp2 has empty components
  std::vector<char> rstar(m.rules.size(), 1);
  rstar[*m.find_rule("r1")] = 0;  // r1 counts as an added rule
  // finite sigma = [r1]: maximal_mp1 {1} = K, nothing infinite, non-rstar hit
  auto v = par_infinite_mixed(m, m2, intern("X"), ks({1}), KSet(), rstar);
  REQUIRE(v.yes());
  REQUIRE(v.finite.has_value());
  CHECK(replay(m, *v.finite));

  // with every rule in rstar, sigma must be infinite, but Y is a dead end
  auto v2 = par_infinite_mixed(m, m2, intern("X"), ks({1}), KSet(), all_rstar(m));
  CHECK(v2.no());
}

TEST_CASE("km soundness: omega-free nodes are concrete") {
  Mbrs s2 = load("S2.prs");
  ParView view(s2, KSet::full(1));
  std::vector<uint32_t> m0(view.n_vars(), 0);
  m0[view.index_of(intern("X"))] = 1;
  KmTree t = build_km(view, m0, 4000);
  CHECK(t.complete);
  bool any_omega = false;
  for (uint32_t n = 0; n < t.nodes.size(); ++n) {
    if (!KmTree::omega_free(t.nodes[n])) {
      any_omega = true;
      continue;
    }
    auto d = km_concretize(view, t, n, t.nodes[n].m);
    REQUIRE(d.has_value());
    CHECK(replay(s2, *d));
    CHECK(d->end() == view.term_of(t.nodes[n].m));
  }
  CHECK(any_omega);  // S2 is unbounded, so omega must appear
}

TEST_CASE("km concretize pumps enough tokens") {
  // X -a-> X||Y pumps Y; covering {Y:3} needs three pump rounds
  Mbrs s2 = load("S2.prs");
  ParView view(s2, KSet::full(1));
  std::vector<uint32_t> m0(view.n_vars(), 0);
  m0[view.index_of(intern("X"))] = 1;
  KmTree t = build_km(view, m0, 4000);
  std::vector<uint32_t> demand(view.n_vars(), 0);
  demand[view.index_of(intern("Y"))] = 3;
  bool found = false;
  for (uint32_t n = 0; n < t.nodes.size() && !found; ++n) {
    if (t.nodes[n].m[view.index_of(intern("Y"))] == KM_OMEGA) {
      auto d = km_concretize(view, t, n, demand);
      REQUIRE(d.has_value());
      CHECK(replay(s2, *d));
      auto end = view.marking_of(d->end());
      CHECK(end[view.index_of(intern("Y"))] >= 3);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("engine agrees with oracle on closed random parallel systems") {
  std::mt19937_64 rng(41);
  const char* vars[] = {"A", "B", "C"};
  int checked = 0;
  for (int it = 0; it < 60; ++it) {
    // random parallel system, small
    std::string text = "alphabet a b c d\nvars A B C\n";
    size_t nrules = 2 + rng() % 4;
    std::vector<std::string> rule_names;
    for (size_t r = 0; r < nrules; ++r) {
      std::string lhs = vars[rng() % 3];
      if (rng() % 4 == 0) lhs += std::string(" || ") + vars[rng() % 3];
      std::string rhs;
      size_t n_rhs = rng() % 3;
      for (size_t i = 0; i < n_rhs; ++i) rhs += (i ? " || " : "") + std::string(vars[rng() % 3]);
      if (rhs.empty()) rhs = "eps";
      const char* acts[] = {"a", "b", "c", "d"};
      text += "rule r" + std::to_string(r) + " : " + lhs + " -" + acts[rng() % 4] + "-> " + rhs + "\n";
      rule_names.push_back("r" + std::to_string(r));
    }
    text += "accepting 1 :";
    for (const auto& rn : rule_names)
      if (rng() % 2) text += " " + rn;
    text += "\n";
    Mbrs m = parse_system_text(text);

    StateGraph g = explore(m, Term::var(intern("A")), 3000);
    if (!g.closed) continue;
    ++checked;
    for (uint32_t kbits = 0; kbits < 2; ++kbits) {
      KSet K(kbits);
      auto eng = par_finite_accepting(m, intern("A"), K);
      auto orc = bf_finite_accepting(m, intern("A"), K, OracleBudget{20000, 24});
      if (orc.unknown()) continue;
      CHECK(eng.yes() == orc.yes());
      if (eng.yes()) check_finite_witness(m, eng, K);
    }
  }
  CHECK(checked > 10);
}
