// Bounded brute-force ground truth: explicit state-space exploration,
// exhaustive accepting-derivation search over (term, touched-components)
// products, generalized-Büchi lasso detection, and fragment model checking
// by enumeration of realizable label-set patterns.
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "prs/altl.hpp"
#include "prs/system.hpp"

namespace prs {

// Tri-valued answer of every engine and decision procedure.  Yes always
// carries a replayable witness; No is only emitted after a provably
// exhaustive search (or an exact structural refutation).
struct Verdict {
  enum class V : uint8_t { Yes, No, Unknown } v = V::Unknown;
  std::optional<Derivation> finite;  // finite witness
  std::optional<Derivation> stem;    // lasso witness: stem, then cycle from its end;
  std::optional<Derivation> cycle;   // the cycle ends at (or covers) its start term
  std::optional<LassoRun> run;       // counterexample action word (model checking)
  std::string note;

  bool yes() const { return v == V::Yes; }
  bool no() const { return v == V::No; }
  bool unknown() const { return v == V::Unknown; }
  const char* str() const {
    return v == V::Yes ? "Yes" : v == V::No ? "No" : "Unknown";
  }

  static Verdict mk_yes() { return Verdict{V::Yes, {}, {}, {}, {}, ""}; }
  static Verdict mk_yes(Derivation d) { return Verdict{V::Yes, std::move(d), {}, {}, {}, ""}; }
  static Verdict mk_yes(Derivation s, Derivation c) {
    return Verdict{V::Yes, {}, std::move(s), std::move(c), {}, ""};
  }
  static Verdict mk_no(std::string note = "") {
    return Verdict{V::No, {}, {}, {}, {}, std::move(note)};
  }
  static Verdict mk_unknown(std::string note) {
    return Verdict{V::Unknown, {}, {}, {}, {}, std::move(note)};
  }
};

struct OracleBudget {
  size_t nodes = 20000;    // state / product-state cap
  size_t depth = 14;       // finite-search depth cap
};

struct StateGraph {
  std::vector<Term> nodes;
  std::unordered_map<Term, uint32_t, TermHash> index;
  std::vector<std::vector<std::pair<RuleId, uint32_t>>> edges;
  bool closed = true;
  std::vector<Term> frontier;  // terms that were not expanded

  uint32_t node_of(Term t) const { return index.at(t); }
};

// BFS closure of start under successors, stopping at the node budget.
StateGraph explore(const Mbrs& m, Term start, size_t node_budget);

// (K, {})-accepting finite derivation from X, exhaustive over the
// (term, touched) product with rules restricted to cmp <= K.
Verdict bf_finite_accepting(const Mbrs& m, Sym X, KSet K, const OracleBudget& b = {});

// (K, Komega)-accepting infinite derivation from X on the explored graph:
// generalized-Büchi search over stem products and cycle SCCs.
Verdict bf_infinite_accepting(const Mbrs& m, Sym X, KSet K, KSet Komega,
                              const OracleBudget& b = {});

// Realizable (occurring, infinitely-occurring) label-set patterns of
// infinite runs from a start term, each with a representative lasso.
// Fragment satisfaction of an infinite run depends only on this pair.
struct RunPattern {
  std::vector<Label> all;  // labels occurring at least once
  std::vector<Label> inf;  // labels occurring infinitely often
  Derivation stem;
  Derivation cycle;
  LassoRun run;
};

struct RunPatterns {
  std::vector<RunPattern> patterns;
  bool complete = true;  // graph and product both closed within budget
  std::string limitation;
};

RunPatterns compute_run_patterns(const Mbrs& m, Term start, const OracleBudget& b = {});

// X satisfies f over infinite runs; f must be in the fragment.  No carries
// a violating lasso run.
Verdict bf_model_check(const Mbrs& m, Sym X, const Formula& f, const OracleBudget& b = {});
Verdict bf_model_check(const Formula& f, const RunPatterns& rp);

}  // namespace prs
