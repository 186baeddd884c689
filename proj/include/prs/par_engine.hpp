// Decision procedures for parallel MBRSs: markings, Karp-Miller coverability
// with touched-component control, exact-reachability fallbacks with static
// persistence pruning, and self-covering detection for infinite acceptance.
#pragma once

#include <map>
#include <set>

#include "prs/oracle.hpp"
#include "prs/system.hpp"

namespace prs {

constexpr uint32_t KM_OMEGA = UINT32_MAX;

struct EngineBudget {
  size_t km_nodes = 20000;
  size_t bfs_nodes = 20000;
  size_t split_candidates = 512;  // nested self-covering searches
  size_t pump_nodes = 4000;       // nodes per nested search
  size_t concretize_rounds = 4000;
};

// Dense-marking view of a parallel MBRS restricted to the rules whose
// components fit the query.  The second component set is used by the
// two-MBRS queries and stays empty otherwise.
class ParView {
 public:
  ParView(const Mbrs& m, KSet restrict1, const Mbrs* m2 = nullptr, KSet restrict2 = KSet());

  const Mbrs& mbrs() const { return *m_; }
  size_t n_vars() const { return vars_.size(); }
  Sym var_at(uint32_t i) const { return vars_[i]; }
  uint32_t index_of(Sym v) const;

  struct PRule {
    RuleId id;
    std::vector<uint32_t> pre, post;
    uint64_t bits;  // cmp1 | cmp2 << 32
  };
  const std::vector<PRule>& rules() const { return rules_; }

  std::vector<uint32_t> marking_of(Term t) const;
  Term term_of(const std::vector<uint32_t>& marking) const;
  // no usable rule strictly decreases v, so its tokens never vanish
  bool persistent(uint32_t v) const { return persistent_[v] != 0; }

  static KSet bits1(uint64_t b) { return KSet(uint32_t(b & 0x7fffffffu)); }
  static KSet bits2(uint64_t b) { return KSet(uint32_t((b >> 32) & 0x7fffffffu)); }

 private:
  const Mbrs* m_;
  std::vector<Sym> vars_;
  std::map<Sym, uint32_t> vindex_;
  std::vector<PRule> rules_;
  std::vector<char> persistent_;
};

// Karp-Miller structure over (control, omega-marking) nodes.  The control
// packs the touched component sets plus a "started" bit so that |sigma|>0
// queries remain plain coverability questions.
struct KmTree {
  static constexpr uint64_t STARTED = uint64_t(1) << 63;

  struct Pump {
    uint32_t ancestor;                // index of the covered path ancestor
    std::vector<uint32_t> coords;     // coordinates accelerated to omega
  };
  struct Node {
    std::vector<uint32_t> m;  // KM_OMEGA entries allowed
    uint64_t ctrl;
    int parent;  // -1 for the root
    RuleId via;  // rule of the edge from parent
    std::vector<Pump> pumps;
  };
  std::vector<Node> nodes;
  bool complete = true;

  static KSet touched1(const Node& n) { return ParView::bits1(n.ctrl); }
  static KSet touched2(const Node& n) { return ParView::bits2(n.ctrl); }
  static bool started(const Node& n) { return (n.ctrl & STARTED) != 0; }
  static bool omega_free(const Node& n) {
    for (uint32_t c : n.m)
      if (c == KM_OMEGA) return false;
    return true;
  }
};

KmTree build_km(const ParView& view, const std::vector<uint32_t>& start, size_t node_budget);

// Concrete derivation from the root to a marking >= demand along the tree
// path of `node`, pumping acceleration loops as needed.
std::optional<Derivation> km_concretize(const ParView& view, const KmTree& tree, uint32_t node,
                                        const std::vector<uint32_t>& demand,
                                        size_t round_budget = 4000);

// All finite-derivation queries from one start variable over one restricted
// rule set: Karp-Miller for coverability-style questions, bounded exact
// search with persistence pruning for the exact-reachability ones.
class ParStartQueries {
 public:
  ParStartQueries(const Mbrs& mp, Sym start, KSet restrict_to, const EngineBudget& b = {});

  // some derivation with maximal exactly K (any target term); exact
  Verdict any_target(KSet K) const;
  // X ->sigma t || Y with |sigma| > 0 and maximal exactly K; exact
  Verdict cover(Sym Y, KSet K) const;
  // X ->sigma eps with maximal exactly K; Unknown when neither the bounded
  // search closes nor the KM set refutes
  Verdict to_eps(KSet K) const;
  // X ->sigma Y with maximal exactly K; same regime
  Verdict to_var(Sym Y, KSet K) const;

  const KmTree& tree() const { return tree_; }
  const ParView& view() const { return view_; }
  bool exhaustive() const { return tree_.complete && bfs_closed_; }

 private:
  ParView view_;
  EngineBudget b_;
  KmTree tree_;
  // exact-search results
  std::map<uint32_t, Derivation> eps_by_touched_;
  std::map<std::pair<Sym, uint32_t>, Derivation> var_by_touched_;
  bool bfs_closed_ = true;
  bool start_persistent_ = false;  // start marking holds a never-consumed variable
  std::set<uint32_t> km_ctrls_;                     // touched sets present in the tree
  std::map<Sym, std::set<uint32_t>> km_cover_var_;  // touched sets covering each var
};

// --- the five spec-level queries ----------------------------------------------

Verdict par_reach_cover(const Mbrs& mp, Sym X, Sym Y, KSet K, const EngineBudget& b = {});
Verdict par_reach_empty(const Mbrs& mp, Sym X, KSet K, const EngineBudget& b = {});
Verdict par_reach_var(const Mbrs& mp, Sym X, Sym Y, KSet K, const EngineBudget& b = {});
Verdict par_finite_accepting(const Mbrs& mp, Sym X, KSet K, const EngineBudget& b = {});

// A derivation X ->sigma with maximal_mp1(sigma) = K,
// inf_maximal_mp1(sigma) | maximal_mp2(sigma) = Komega, and sigma infinite
// or containing a rule r with !rstar[r].  mp1 and mp2 must share support.
// Yes carries either a finite witness or a stem plus a self-covering cycle.
Verdict par_infinite_mixed(const Mbrs& mp1, const Mbrs& mp2, Sym X, KSet K, KSet Komega,
                           const std::vector<char>& rstar, const EngineBudget& b = {});

}  // namespace prs
