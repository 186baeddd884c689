// Process rewrite systems with accepting components (multi-Büchi rewrite
// systems), their labelled-transition-system semantics, derivations and
// subderivations, and the finite/infinite maximal calculus on rule
// sequences.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prs/term.hpp"

namespace prs {

// Subset of the accepting components {1..n}, n <= 31.  Bit i-1 stands for
// component i.
struct KSet {
  uint32_t bits = 0;

  KSet() = default;
  explicit KSet(uint32_t b) : bits(b) {}
  static KSet empty() { return KSet(); }
  static KSet single(uint32_t i) { return KSet(1u << (i - 1)); }
  static KSet full(uint32_t n) { return KSet(n >= 32 ? ~0u : (1u << n) - 1); }

  bool contains(uint32_t i) const { return bits & (1u << (i - 1)); }
  bool subset_of(KSet o) const { return (bits & ~o.bits) == 0; }
  bool empty_set() const { return bits == 0; }
  uint32_t count() const { return uint32_t(__builtin_popcount(bits)); }

  KSet operator|(KSet o) const { return KSet(bits | o.bits); }
  KSet operator&(KSet o) const { return KSet(bits & o.bits); }
  KSet minus(KSet o) const { return KSet(bits & ~o.bits); }
  KSet with(uint32_t i) const { return KSet(bits | (1u << (i - 1))); }
  bool operator==(const KSet&) const = default;
  auto operator<=>(const KSet&) const = default;

  std::vector<uint32_t> members() const;
  std::string str() const;  // "{1,2}"; "{}" when empty
};

struct KSetHash {
  size_t operator()(KSet k) const { return std::hash<uint32_t>{}(k.bits); }
};

// Rule labels live in the disjoint union of the action alphabet, the K-set
// labels of the first construction, and the K-set pairs of the infinite
// extension.
struct Label {
  enum class Kind : uint8_t { Action, Kset, Kpair } kind = Kind::Action;
  Sym action = 0;  // when Action
  KSet k1, k2;     // Kset uses k1; Kpair uses both

  static Label act(Sym a) { return Label{Kind::Action, a, {}, {}}; }
  static Label kset(KSet k) { return Label{Kind::Kset, 0, k, {}}; }
  static Label kpair(KSet k, KSet kw) { return Label{Kind::Kpair, 0, k, kw}; }

  bool operator==(const Label&) const = default;
  auto operator<=>(const Label&) const = default;
  std::string str() const;
};

using RuleId = uint32_t;

enum class RuleShape : uint8_t {
  Par,    // devoid of sequential composition (and not of the shared shapes)
  Push,   // X -> Y.(Z)
  Pop,    // X.(Y) -> Z
  Both,   // X -> Y or X -> eps: both PAR and SEQ
  General // anything else
};

struct Rule {
  std::string name;
  Term lhs;  // != eps
  Label label;
  Term rhs;

  RuleShape shape() const;
  bool is_par() const;  // PAR rules include the Both shapes
  bool is_seq() const;  // SEQ rules include the Both shapes
};

enum class SystemClass : uint8_t { Parallel, Sequential, NormalForm, General };

struct Mbrs {
  std::vector<Sym> vars;
  std::vector<Label> alphabet;  // declared actions; constructed labels implicit
  std::vector<Rule> rules;
  uint32_t n = 0;                      // number of accepting components
  std::vector<KSet> cmp;               // per-rule component membership

  RuleId add_rule(Rule r, KSet components);
  void add_var(Sym v);
  bool has_var(Sym v) const;
  std::optional<RuleId> find_rule(std::string_view name) const;
  std::optional<RuleId> find_rule(Term lhs, const Label& label, Term rhs) const;
  std::vector<RuleId> component(uint32_t i) const;  // Re_i^A, 1-based
};

SystemClass classify(const Mbrs& m);
const char* to_string(SystemClass c);
// Every rule is a PAR rule or a SEQ rule (the parallel and sequential
// classes are special cases).
bool in_normal_form(const Mbrs& m);

// --- LTS semantics ----------------------------------------------------------

// All one-step successors of t, canonicalized and deduplicated.
std::vector<std::pair<RuleId, Term>> successors(const Mbrs& m, Term t);
// Successors through one given rule.
std::vector<Term> apply_rule(const Mbrs& m, Term t, RuleId r);
bool is_step(const Mbrs& m, Term from, RuleId r, Term to);

// All levels at which r is applicable in the step from -> to; the maximum is
// the level of application.  Throws when the pair is not a valid step.
std::vector<uint32_t> application_levels(const Mbrs& m, Term from, RuleId r, Term to);

// --- derivations ------------------------------------------------------------

struct Step {
  RuleId rule;
  Term to;
};

struct Derivation {
  Term start;
  std::vector<Step> steps;

  Term end() const { return steps.empty() ? start : steps.back().to; }
  std::vector<RuleId> rule_seq() const;
  size_t size() const { return steps.size(); }
};

// Checks that every step is a genuine one-step derivation.
bool replay(const Mbrs& m, const Derivation& d);

// Ultimately periodic rule sequence stem . cycle^omega; finite when the
// cycle is empty.
struct LassoSequence {
  std::vector<RuleId> stem;
  std::vector<RuleId> cycle;
};

// --- maximal calculus -------------------------------------------------------

KSet maximal(const Mbrs& m, const std::vector<RuleId>& seq);
KSet inf_maximal(const Mbrs& m, const LassoSequence& seq);

// Exactly the shuffle set Interleaving(s1, s2); throws std::length_error
// when |s1|+|s2| exceeds the bound.
std::vector<std::vector<RuleId>> interleavings(const std::vector<RuleId>& s1,
                                               const std::vector<RuleId>& s2,
                                               size_t bound = 16);

// --- subderivations ---------------------------------------------------------

// Occurrence of a spine head.(tail) in the term reached after `prefix` steps
// of a derivation.
struct SpineOccurrence {
  size_t prefix;  // steps consumed before the pivot term
  Sym head;
  Term tail;
};

// The deterministic subderivation from the pivot's tail: follows the tracked
// occurrence, preferring the reading that leaves it untouched.  Throws when
// the occurrence is not present or the derivation does not replay.
Derivation subderivation(const Mbrs& m, const Derivation& d, const SpineOccurrence& pivot);

// All subderivations obtainable by resolving each step's ambiguity either
// way, up to `limit` results (oracle helper).
std::vector<Derivation> subderivations_all(const Mbrs& m, const Derivation& d,
                                           const SpineOccurrence& pivot, size_t limit = 64);

// --- system file format -----------------------------------------------------

// Line-oriented format:
//   alphabet a b c
//   vars X Y Z
//   rule r1 : X -a-> Y
//   accepting 1 : r1 r2
//   # comment
// Constructed labels print as -{1,2}-> and -{1}/{}->.
Mbrs parse_system(std::istream& in);
Mbrs parse_system_file(const std::string& path);
Mbrs parse_system_text(const std::string& text);
std::string dump_system(const Mbrs& m);

}  // namespace prs
