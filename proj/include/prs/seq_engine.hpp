// Exact decision procedures for the sequential MBRSs arising from the
// construction (push and rename rules only).  With those shapes the
// innermost variable is the only rewritable position and buried variables
// never reactivate, so a finite graph over (top variable, touched
// components) captures the dynamics exactly.
#pragma once

#include "prs/oracle.hpp"
#include "prs/system.hpp"

namespace prs {

struct TopGraph {
  std::vector<Sym> vars;
  // edge via rule: rename X -> Y keeps the top at Y; push X -> Y.(Z) buries
  // Y and exposes Z
  struct Edge {
    RuleId rule;
    uint32_t to;  // index into vars
  };
  std::vector<std::vector<Edge>> adj;
  uint32_t index_of(Sym v) const;
};

// Builds the top-symbol graph.  Throws std::invalid_argument when the
// system contains pop (X.(Y) -> Z) or erase (X -> eps) rules, which never
// occur in the constructed sequential systems.
TopGraph top_graph(const Mbrs& ms);

// Y is reachable from X through a derivation with finite maximal exactly K
// (target shape X1.(X2.(...Xn.(Y)...))).  Exact; Yes carries the derivation
// over sequential terms.
Verdict seq_reachable_var(const Mbrs& ms, Sym X, Sym Y, KSet K);

// All (Y, K') pairs reachable from X with K' within `bound`, each with a
// witness; used to batch condition-A of the decision procedure.
std::vector<std::pair<std::pair<Sym, KSet>, Derivation>> seq_reachable_all(const Mbrs& ms,
                                                                           Sym X, KSet bound);

// (K, Komega)-accepting infinite derivation from X; exact, witness lasso.
Verdict seq_infinite_accepting(const Mbrs& ms, Sym X, KSet K, KSet Komega);

}  // namespace prs
