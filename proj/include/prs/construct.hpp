// The effective constructions: saturation of a normal-form MBRS into its
// parallel abstraction, the infinite-extension pair over the fresh variable
// _ZINF_, and the sequential abstraction, plus expansion of constructed-rule
// witnesses back into source-system derivations.
#pragma once

#include <functional>
#include <map>

#include "prs/par_engine.hpp"
#include "prs/system.hpp"

namespace prs {

// How an added rule is justified: a concrete source-system derivation that
// the rule collapses.  Inner derivations are stored already expanded into
// the source system, so expansion is a single splice.
struct RuleRecipe {
  enum class Kind {
    CollapseAny,  // X -K'-> _ZF_ : trigger push + inner derivation (any end)
    CollapseEps,  // X -K'-> Y    : trigger push + inner derivation to eps
    CollapsePop,  // X -K'-> W'   : trigger push + inner to bare W + pop rule
    SeqCover,     // X -K'-> Y    : cover derivation ending at t || Y
    ZInf          // X -(Kb,Kbw)-> _ZINF_ : trigger push + inner lasso
  };
  Kind kind;
  RuleId trigger = 0;            // push rule id in the source system
  std::optional<RuleId> pop;     // pop rule id in the source system
  Derivation inner;              // derivation in the source system
  std::optional<Derivation> inner_cycle;  // ZInf: the cycle part
};

struct ConstructedMbrs {
  Mbrs mbrs;
  size_t n_source = 0;                // rules [0, n_source) come from the source
  std::vector<RuleId> source_ids;     // their ids in the source system
  std::map<RuleId, RuleRecipe> recipes;
  bool under_saturated = false;       // some engine query answered Unknown
  std::string limitation;

  bool is_source(RuleId r) const { return r < n_source; }
};

// Fig.-1-style saturation: the least parallel MBRS extending the PAR rules
// of m that collapses every finished or abandoned subderivation under a
// push rule, bounded by the component set K.
ConstructedMbrs build_parallel_mbrs(const Mbrs& m, KSet K, const EngineBudget& b = {});

// The infinite-extension pair sharing one support: `par` carries the
// finite-maximal components, `par_inf` the infinitely-often assignment of
// the added _ZINF_ rules.  decide_smaller answers, for a variable Z and
// exact sets (K1, K1w) with |K1|+|K1w| < |K|+|Kw|, whether the source
// system has a (K1, K1w)-accepting infinite derivation from Z; a Yes must
// carry the expanded lasso (stem/cycle in the source system).
struct ParOmega {
  ConstructedMbrs par;
  Mbrs par_inf;
  std::vector<char> rstar;  // flags the rules of the underlying M^K_PAR
};

using DecideSmaller = std::function<Verdict(Sym, KSet, KSet)>;

ParOmega build_par_omega(const Mbrs& m, const ConstructedMbrs& mk, KSet K, KSet Kw,
                         const DecideSmaller& decide_smaller);

// The sequential abstraction: all push rules of m plus a rename X -K'-> Y
// for every cover derivation X ->sigma t || Y in the parallel abstraction
// with |sigma| > 0 and maximal K' within K.
ConstructedMbrs build_seq_mbrs(const Mbrs& m, const ConstructedMbrs& mk, KSet K,
                               const EngineBudget& b = {});

// Expands a derivation of a constructed parallel system into the source
// system: source rules pass through, every added rule splices its recipe;
// fresh-variable tokens turn into the residual subterms they abstract.
// The result replays in the source system and has the same maximal.
Derivation expand_witness(const Mbrs& source, const ConstructedMbrs& ck, const Derivation& d);

// Subset enumeration in the construction's canonical order: increasing
// cardinality, then numeric bitset order.
std::vector<KSet> subsets_of(KSet k);

}  // namespace prs
