// Top-level decision procedures: finite acceptance via the parallel
// abstraction, infinite acceptance by induction on |K|+|Kw| over the
// construction pair plus the sequential abstraction, and fragment model
// checking by disjunct decomposition.
#pragma once

#include <map>
#include <memory>

#include "prs/altl.hpp"
#include "prs/construct.hpp"
#include "prs/oracle.hpp"
#include "prs/seq_engine.hpp"

namespace prs {

// Replays a rule sequence from a term, searching over the possible rewrite
// positions; returns a concrete derivation when the sequence is applicable.
std::optional<Derivation> replay_rules(const Mbrs& m, Term start,
                                       const std::vector<RuleId>& rules,
                                       size_t node_budget = 200000);

// Yes verdicts carry their certificates in the Verdict itself: problem1
// fills `finite` with the expanded source-system derivation; problem2 fills
// `stem` (the replay prefix) and `cycle` (the first unrolling of a
// repeatable rule sequence).
class Decider {
 public:
  explicit Decider(Mbrs m, EngineBudget b = {});

  const Mbrs& system() const { return m_; }

  // (K, {})-accepting finite derivation from X; Yes carries the expanded
  // source-system witness.
  Verdict problem1(Sym X, KSet K);

  // (K, Komega)-accepting infinite derivation from X; Yes carries the
  // expanded lasso (stem + first cycle unrolling).
  Verdict problem2(Sym X, KSet K, KSet Komega);

  // X satisfies f over infinite runs (fragment only).  No carries the
  // counterexample lasso of the first satisfiable disjunct.
  Verdict model_check_infinite(Sym X, const Formula& f);

  // constructions, exposed for dumping and tests
  const ConstructedMbrs& par_construction(KSet K);
  const ConstructedMbrs& seq_construction(KSet K);
  const ParOmega& omega_construction(KSet K, KSet Komega);

 private:
  Mbrs m_;
  EngineBudget b_;
  std::map<uint32_t, std::unique_ptr<ConstructedMbrs>> mk_;
  std::map<uint32_t, std::unique_ptr<ConstructedMbrs>> mseq_;
  std::map<uint64_t, std::unique_ptr<ParOmega>> momega_;
  std::map<std::tuple<Sym, uint32_t, uint32_t>, Verdict> memo_;

  // rule-sequence expansion of constructed-system derivations
  std::vector<RuleId> expand_par_rules(const ConstructedMbrs& ck, const std::vector<RuleId>& rules,
                                       std::vector<RuleId>* loop_extras) const;
  std::vector<RuleId> expand_seq_rules(const ConstructedMbrs& seq,
                                       const std::vector<RuleId>& rules) const;
};

// single-shot conveniences
Verdict problem1(const Mbrs& m, Sym X, KSet K, const EngineBudget& b = {});
Verdict problem2(const Mbrs& m, Sym X, KSet K, KSet Komega, const EngineBudget& b = {});
Verdict model_check_infinite(const Mbrs& m, Sym X, const Formula& f, const EngineBudget& b = {});

}  // namespace prs
