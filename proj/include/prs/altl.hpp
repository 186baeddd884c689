// Action-based LTL: formula AST, parser, exact evaluation on ultimately
// periodic runs, the F/GF fragment test, and the normalization of negated
// fragment formulas into F+/GF/G disjuncts.
#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "prs/system.hpp"

namespace prs {

enum class FKind : uint8_t { True, Diamond, Not, And, Or, Until, G, F, GF, FPlus };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FKind kind;
  Label action;         // Diamond
  Formula lhs, rhs;     // rhs only for And/Or/Until

  static Formula truth();
  static Formula diamond(Label a, Formula f);
  static Formula diamond(Label a);  // <a>true
  static Formula negate(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula until(Formula a, Formula b);
  static Formula always(Formula f);     // G
  static Formula eventually(Formula f); // F
  static Formula inf_often(Formula f);  // GF
  static Formula fplus(Formula f);      // F+
};

std::string formula_str(const Formula& f);

// Propositional formulas: true | <a>true | !psi | psi & psi.
bool is_propositional(const Formula& f);

// Infinite action word stem . cycle^omega.
struct LassoRun {
  std::vector<Label> stem;
  std::vector<Label> cycle;  // nonempty
};

// Exact satisfaction of f by the infinite word (position 0).
bool eval(const Formula& f, const LassoRun& run);

// [[psi]]_Sigma for propositional psi.  Throws on non-propositional input.
std::set<Label> prop_denote(const Formula& psi, const std::vector<Label>& sigma);

// Rules of m whose label satisfies psi (over the labels occurring in m plus
// the declared alphabet).
std::vector<RuleId> ac_rules(const Mbrs& m, const Formula& psi);

// Membership in the fragment: boolean combinations of F psi and GF psi over
// propositional psi; G psi and FG psi are accepted as the derivable sugar.
bool in_fragment(const Formula& f);

// The fragment extended with F+ psi atoms.  Satisfaction of these formulas
// by an infinite run depends only on which labels occur and which occur
// infinitely often, which is what the oracle's pattern enumeration decides.
bool in_extended_fragment(const Formula& f);

// One conjunct bundle F+psi_1 .. & GF eta_1 .. & G zeta.
struct Disjunct {
  std::vector<Formula> fplus;
  std::vector<Formula> gf;
  Formula g;  // True when no G-conjunct arises

  Formula as_formula() const;
};

// Negation-normal DNF of !f for fragment f; the disjunction of the results
// is equivalent to !f on infinite runs.  Throws std::invalid_argument when
// f is not in the fragment, std::length_error past the disjunct limit.
std::vector<Disjunct> negate_to_dnf(const Formula& f, size_t limit = 256);

// The Theorem-3.1 target system: components AC(psi_1..m1), AC(eta_1..m2),
// AC(!zeta); K = {1..m1+m2}, Komega = {m1+1..m1+m2}.
struct DisjunctMbrs {
  Mbrs mbrs;
  KSet k;
  KSet komega;
};
DisjunctMbrs disjunct_to_mbrs(const Mbrs& m, const Disjunct& d);

// Formula grammar:
//   f := true | <IDENT> | !f | f & f | f "|" f | F f | G f | GF f | FG f
//        | F+ f | f U f | (f)
Formula parse_formula(std::string_view text);

}  // namespace prs
