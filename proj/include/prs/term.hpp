// Canonical process terms over a set of process variables, closed under
// parallel composition (associative, commutative, identity eps) and
// sequential composition X.(t).  Terms are hash-consed: structurally equal
// canonical terms share one id, so equality and hashing are O(1) and
// coincide with the term equivalence generated by AC of `||`, the identity
// laws for eps, and X.(eps) = X.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace prs {

// Interned symbol (variable or action name).
using Sym = uint32_t;

enum class VarKind : uint8_t { User, ZhatF, ZhatInf };

// Global string interner.  Thread-safe; ids are stable for the process
// lifetime.  The two reserved fresh variables have fixed names that no user
// identifier can take (user names must start with a letter).
Sym intern(std::string_view name);
const std::string& sym_name(Sym s);
Sym zhat_f();    // the reserved variable "_ZF_"
Sym zhat_inf();  // the reserved variable "_ZINF_"
VarKind var_kind(Sym s);
bool valid_user_name(std::string_view name);

class Term;

// One sequential spine head.(tail); tail may be eps, in which case the
// spine denotes the bare variable.
struct Spine {
  Sym head;
  uint32_t tail_id;  // Term id; 0 is eps
};

struct SpineCount {
  uint32_t spine;  // spine id
  uint32_t count;  // > 0
};

class Term {
 public:
  Term() : id_(0) {}  // eps

  static Term eps() { return Term(); }
  static Term var(Sym v);
  // head.(tail); collapses to the bare variable when tail is eps.
  static Term seq(Sym head, Term tail);
  // Parallel composition (flattening, eps identity).
  static Term par(Term a, Term b);
  static Term par(const std::vector<Term>& ts);

  bool is_eps() const { return id_ == 0; }
  bool is_var() const;                  // single bare variable
  std::optional<Sym> as_var() const;
  bool is_parallel() const;             // no sequential composition anywhere
  bool is_sequential() const;           // no parallel composition anywhere
  bool contains(Sym v) const;           // v occurs anywhere in the term
  uint32_t size() const;                // number of variable occurrences

  // Canonical multiset of spines (sorted by the fixed spine order).
  const std::vector<SpineCount>& spines() const;
  uint32_t spine_total() const;  // spines counted with multiplicity

  uint32_t id() const { return id_; }
  static Term from_id(uint32_t id) { return Term(id); }

  friend bool operator==(Term a, Term b) { return a.id_ == b.id_; }
  friend bool operator!=(Term a, Term b) { return a.id_ != b.id_; }
  // Structural (canonical) order, independent of interning order.
  friend bool operator<(Term a, Term b) { return compare(a, b) < 0; }
  static int compare(Term a, Term b);

  std::string str() const;  // concrete syntax; eps prints as "eps"

 private:
  explicit Term(uint32_t id) : id_(id) {}
  uint32_t id_;
};

struct TermHash {
  size_t operator()(Term t) const { return std::hash<uint32_t>{}(t.id()); }
};

Spine spine_at(uint32_t spine_id);
Term spine_term(uint32_t spine_id);  // the spine as a term of its own
int compare_spines(uint32_t a, uint32_t b);

// Rebuild a term from an arbitrary (spine, count) collection.
Term make_term(std::vector<SpineCount> sc);

// --- multiset helpers on the parallel structure ---------------------------

// a with the multiset b removed; nullopt when b is not included in a.
std::optional<Term> par_minus(Term a, Term b);
bool par_includes(Term a, Term b);  // spines(b) <= spines(a) pointwise

// --- Appendix-style term utilities ----------------------------------------

// The set of subterms per the inductive definition (canonical, deduplicated).
std::set<Term> subterms(Term t);
bool is_subterm(Term st, Term t);

// All terms obtained by replacing one occurrence of st in t with repl.
// Throws std::invalid_argument when st is not a subterm of t.
std::set<Term> substitute(Term t, Term st, Term repl);

// SEQ(t): the purely sequential spines extracted from t.
std::set<Term> seq_set(Term t);

// Innermost variable of a nonempty purely sequential term.
Sym last(Term seq_term);

// t o t': splice t' at the innermost variable of t.  Both arguments must be
// nonempty purely sequential terms.
Term compose(Term a, Term b);

// --- concrete syntax --------------------------------------------------------

struct ParseError : std::exception {
  std::string message;
  size_t pos = 0;
  explicit ParseError(std::string msg, size_t p = 0) : message(std::move(msg)), pos(p) {}
  const char* what() const noexcept override { return message.c_str(); }
};

// Parses `eps | VAR | VAR.(term) | term || term`.  Unknown-variable checking
// is the caller's business; every syntactically valid identifier is accepted
// and interned.
Term parse_term(std::string_view text);

}  // namespace prs
