#include "prs/par_engine.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

#include "prs/buchi.hpp"

namespace prs {

namespace {

bool leq(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    uint64_t x = a[i] == KM_OMEGA ? UINT64_MAX : a[i];
    uint64_t y = b[i] == KM_OMEGA ? UINT64_MAX : b[i];
    if (x > y) return false;
  }
  return true;
}

}  // namespace

ParView::ParView(const Mbrs& m, KSet restrict1, const Mbrs* m2, KSet restrict2) : m_(&m) {
  if (classify(m) != SystemClass::Parallel)
    throw std::invalid_argument("par engine: system is not parallel");
  if (m2 && (m2->rules.size() != m.rules.size()))
    throw std::invalid_argument("par engine: supports differ");
  for (Sym v : m.vars) {
    vindex_.emplace(v, uint32_t(vars_.size()));
    if (vindex_.at(v) == vars_.size()) vars_.push_back(v);
  }
  auto fill = [&](Term t, std::vector<uint32_t>& dst) {
    for (const auto& sc : t.spines()) {
      Spine sp = spine_at(sc.spine);
      auto it = vindex_.find(sp.head);
      if (it == vindex_.end()) throw std::invalid_argument("rule uses undeclared variable");
      dst[it->second] += sc.count;
    }
  };
  for (RuleId r = 0; r < m.rules.size(); ++r) {
    if (!m.cmp[r].subset_of(restrict1)) continue;
    if (m2 && !m2->cmp[r].subset_of(restrict2)) continue;
    PRule pr;
    pr.id = r;
    pr.pre.assign(vars_.size(), 0);
    pr.post.assign(vars_.size(), 0);
    fill(m.rules[r].lhs, pr.pre);
    fill(m.rules[r].rhs, pr.post);
    pr.bits = uint64_t(m.cmp[r].bits);
    if (m2) pr.bits |= uint64_t(m2->cmp[r].bits) << 32;
    rules_.push_back(std::move(pr));
  }
  // v is persistent when no usable rule strictly decreases its count, so
  // tokens of v can never vanish
  persistent_.assign(vars_.size(), 1);
  for (const PRule& r : rules_)
    for (uint32_t v = 0; v < vars_.size(); ++v)
      if (r.post[v] < r.pre[v]) persistent_[v] = 0;
}

uint32_t ParView::index_of(Sym v) const {
  auto it = vindex_.find(v);
  if (it == vindex_.end()) throw std::invalid_argument("unknown variable");
  return it->second;
}

std::vector<uint32_t> ParView::marking_of(Term t) const {
  std::vector<uint32_t> out(vars_.size(), 0);
  if (!t.is_parallel()) throw std::invalid_argument("not a parallel term");
  for (const auto& sc : t.spines()) out[index_of(spine_at(sc.spine).head)] += sc.count;
  return out;
}

Term ParView::term_of(const std::vector<uint32_t>& marking) const {
  std::vector<Term> parts;
  for (uint32_t v = 0; v < marking.size(); ++v)
    for (uint32_t k = 0; k < marking[v]; ++k) parts.push_back(Term::var(vars_[v]));
  return Term::par(parts);
}

// --- Karp-Miller ---------------------------------------------------------------

KmTree build_km(const ParView& view, const std::vector<uint32_t>& start, size_t node_budget) {
  KmTree t;
  t.nodes.push_back(KmTree::Node{start, 0, -1, 0, {}});
  std::map<uint64_t, std::vector<uint32_t>> by_ctrl;
  by_ctrl[0].push_back(0);
  std::deque<uint32_t> queue{0};

  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    for (const auto& rule : view.rules()) {
      const auto& m = t.nodes[v].m;
      bool enabled = true;
      for (uint32_t i = 0; i < m.size() && enabled; ++i)
        if (m[i] != KM_OMEGA && m[i] < rule.pre[i]) enabled = false;
      if (!enabled) continue;

      std::vector<uint32_t> child(m);
      for (uint32_t i = 0; i < child.size(); ++i)
        if (child[i] != KM_OMEGA) child[i] = child[i] - rule.pre[i] + rule.post[i];
      uint64_t ctrl = t.nodes[v].ctrl | rule.bits | KmTree::STARTED;

      // eager acceleration against covered path ancestors
      std::vector<KmTree::Pump> pumps;
      bool changed = true;
      while (changed) {
        changed = false;
        for (int a = int(v); a != -1; a = t.nodes[a].parent) {
          if (t.nodes[a].ctrl != ctrl) continue;
          if (!leq(t.nodes[a].m, child)) continue;
          std::vector<uint32_t> coords;
          for (uint32_t i = 0; i < child.size(); ++i)
            if (child[i] != KM_OMEGA && child[i] > t.nodes[a].m[i]) coords.push_back(i);
          if (coords.empty()) continue;
          for (uint32_t i : coords) child[i] = KM_OMEGA;
          pumps.push_back(KmTree::Pump{uint32_t(a), std::move(coords)});
          changed = true;
        }
      }

      // domination: drop the child when an existing node already covers it
      bool dominated = false;
      for (uint32_t n : by_ctrl[ctrl]) {
        if (leq(child, t.nodes[n].m)) {
          dominated = true;
          break;
        }
      }
      if (dominated) continue;

      if (t.nodes.size() >= node_budget) {
        t.complete = false;
        return t;
      }
      uint32_t id = uint32_t(t.nodes.size());
      t.nodes.push_back(KmTree::Node{std::move(child), ctrl, int(v), rule.id, std::move(pumps)});
      by_ctrl[ctrl].push_back(id);
      queue.push_back(id);
    }
  }
  return t;
}

// --- concretization --------------------------------------------------------------

namespace {

struct PathLoop {
  size_t start_pos, end_pos;          // positions in the root..node path
  std::vector<uint32_t> coords;
  size_t k = 1;
};

struct Emitted {
  RuleId rule;
  size_t pos;  // path position of the underlying edge
};

struct Emitter {
  const std::vector<RuleId>& path_rules;            // rule per position (1-based)
  const std::vector<std::vector<size_t>>& loops_at;  // loop ids ending at position
  const std::vector<PathLoop>& loops;
  std::vector<Emitted> out;
  std::vector<char> active;
  bool overflow = false;

  void emit_range(size_t lo, size_t hi) {
    for (size_t pos = lo + 1; pos <= hi && !overflow; ++pos) {
      if (out.size() > 2000000) {
        overflow = true;
        return;
      }
      out.push_back(Emitted{path_rules[pos], pos});
      for (size_t lid : loops_at[pos]) {
        if (active[lid]) continue;
        active[lid] = 1;
        for (size_t i = 0; i < loops[lid].k && !overflow; ++i)
          emit_range(loops[lid].start_pos, loops[lid].end_pos);
        active[lid] = 0;
      }
    }
  }
};

}  // namespace

std::optional<Derivation> km_concretize(const ParView& view, const KmTree& tree, uint32_t node,
                                        const std::vector<uint32_t>& demand,
                                        size_t round_budget) {
  // path root..node
  std::vector<uint32_t> path;
  for (int cur = int(node); cur != -1; cur = tree.nodes[cur].parent)
    path.push_back(uint32_t(cur));
  std::reverse(path.begin(), path.end());
  std::vector<size_t> pos_of(tree.nodes.size(), SIZE_MAX);
  for (size_t i = 0; i < path.size(); ++i) pos_of[path[i]] = i;

  std::vector<RuleId> path_rules(path.size(), 0);
  std::vector<PathLoop> loops;
  std::vector<std::vector<size_t>> loops_at(path.size());
  std::map<RuleId, const ParView::PRule*> rule_of;
  for (const auto& r : view.rules()) rule_of[r.id] = &r;

  for (size_t i = 1; i < path.size(); ++i) {
    const KmTree::Node& n = tree.nodes[path[i]];
    path_rules[i] = n.via;
    for (const auto& p : n.pumps) {
      size_t sp = pos_of[p.ancestor];
      assert(sp != SIZE_MAX);
      loops.push_back(PathLoop{sp, i, p.coords, 1});
      loops_at[i].push_back(loops.size() - 1);
    }
  }

  const std::vector<uint32_t>& start = tree.nodes[path[0]].m;
  for (size_t round = 0; round < round_budget; ++round) {
    Emitter em{path_rules, loops_at, loops, {}, std::vector<char>(loops.size(), 0), false};
    em.emit_range(0, path.size() - 1);
    if (em.overflow) return std::nullopt;

    // simulate
    std::vector<uint32_t> m = start;
    std::optional<std::pair<uint32_t, std::pair<size_t, uint32_t>>> failure;  // var,(pos,need)
    for (const Emitted& e : em.out) {
      const ParView::PRule& r = *rule_of.at(e.rule);
      bool ok = true;
      for (uint32_t i = 0; i < m.size(); ++i) {
        if (m[i] < r.pre[i]) {
          failure = {i, {e.pos, r.pre[i] - m[i]}};
          ok = false;
          break;
        }
      }
      if (!ok) break;
      for (uint32_t i = 0; i < m.size(); ++i) m[i] = m[i] - r.pre[i] + r.post[i];
    }
    if (!failure) {
      for (uint32_t i = 0; i < m.size(); ++i)
        if (m[i] < demand[i]) {
          failure = {i, {path.size(), demand[i] - m[i]}};
          break;
        }
    }
    if (!failure) {
      // success: rebuild as a derivation over terms
      Derivation d;
      d.start = view.term_of(start);
      std::vector<uint32_t> cur = start;
      for (const Emitted& e : em.out) {
        const ParView::PRule& r = *rule_of.at(e.rule);
        for (uint32_t i = 0; i < cur.size(); ++i) cur[i] = cur[i] - r.pre[i] + r.post[i];
        d.steps.push_back(Step{e.rule, view.term_of(cur)});
      }
      return d;
    }
    // bump the nearest loop that pumps the missing coordinate
    uint32_t var = failure->first;
    size_t fail_pos = failure->second.first;
    uint32_t deficit = failure->second.second;
    int best = -1;
    for (size_t l = 0; l < loops.size(); ++l) {
      if (std::find(loops[l].coords.begin(), loops[l].coords.end(), var) ==
          loops[l].coords.end())
        continue;
      if (loops[l].end_pos <= fail_pos &&
          (best == -1 || loops[l].end_pos > loops[best].end_pos))
        best = int(l);
    }
    if (best == -1) {
      for (size_t l = 0; l < loops.size(); ++l)
        if (std::find(loops[l].coords.begin(), loops[l].coords.end(), var) !=
            loops[l].coords.end()) {
          best = int(l);
          break;
        }
    }
    if (best == -1) return std::nullopt;
    loops[best].k += std::max<uint32_t>(1, deficit);
  }
  return std::nullopt;
}

// --- per-start query bundle -------------------------------------------------------

ParStartQueries::ParStartQueries(const Mbrs& mp, Sym start, KSet restrict_to,
                                 const EngineBudget& b)
    : view_(mp, restrict_to), b_(b) {
  std::vector<uint32_t> m0(view_.n_vars(), 0);
  m0[view_.index_of(start)] = 1;
  start_persistent_ = view_.persistent(view_.index_of(start));
  tree_ = build_km(view_, m0, b.km_nodes);
  for (const auto& n : tree_.nodes) {
    km_ctrls_.insert(KmTree::touched1(n).bits);
    for (uint32_t v = 0; v < view_.n_vars(); ++v)
      if (n.m[v] >= 1) km_cover_var_[view_.var_at(v)].insert(KmTree::touched1(n).bits);
  }

  // bounded exact search over (marking, touched) with persistence pruning
  struct PNode {
    std::vector<uint32_t> m;
    uint32_t touched;
  };
  std::map<std::pair<std::vector<uint32_t>, uint32_t>, uint32_t> index;
  std::vector<PNode> nodes{{m0, 0}};
  std::vector<std::pair<uint32_t, RuleId>> parent{{0, 0}};
  index.emplace(std::make_pair(m0, 0u), 0u);
  std::deque<uint32_t> queue{0};

  auto n_persistent = [&](const std::vector<uint32_t>& m) {
    uint32_t total = 0;
    for (uint32_t v = 0; v < m.size(); ++v)
      if (view_.persistent(v)) total += m[v];
    return total;
  };
  auto record = [&](uint32_t id) {
    const PNode& pn = nodes[id];
    uint32_t weight = 0;
    for (uint32_t c : pn.m) weight += c;
    auto derive = [&]() {
      std::vector<RuleId> rev;
      for (uint32_t cur = id; cur != 0; cur = parent[cur].first)
        rev.push_back(parent[cur].second);
      std::reverse(rev.begin(), rev.end());
      Derivation d;
      d.start = view_.term_of(m0);
      std::vector<uint32_t> m = m0;
      std::map<RuleId, const ParView::PRule*> rule_of;
      for (const auto& r : view_.rules()) rule_of[r.id] = &r;
      for (RuleId rid : rev) {
        const auto& r = *rule_of.at(rid);
        for (uint32_t i = 0; i < m.size(); ++i) m[i] = m[i] - r.pre[i] + r.post[i];
        d.steps.push_back(Step{rid, view_.term_of(m)});
      }
      return d;
    };
    if (weight == 0 && !eps_by_touched_.count(pn.touched))
      eps_by_touched_.emplace(pn.touched, derive());
    if (weight == 1) {
      for (uint32_t v = 0; v < pn.m.size(); ++v)
        if (pn.m[v] == 1) {
          auto key = std::make_pair(view_.var_at(v), pn.touched);
          if (!var_by_touched_.count(key)) var_by_touched_.emplace(key, derive());
        }
    }
  };
  record(0);

  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    for (const auto& rule : view_.rules()) {
      const auto& m = nodes[v].m;
      bool enabled = true;
      for (uint32_t i = 0; i < m.size() && enabled; ++i)
        if (m[i] < rule.pre[i]) enabled = false;
      if (!enabled) continue;
      PNode child;
      child.m = m;
      for (uint32_t i = 0; i < m.size(); ++i) child.m[i] = child.m[i] - rule.pre[i] + rule.post[i];
      child.touched = nodes[v].touched | uint32_t(rule.bits);
      if (n_persistent(child.m) >= 2) continue;  // can never reach eps or a bare variable
      auto key = std::make_pair(child.m, child.touched);
      if (index.count(key)) continue;
      if (nodes.size() >= b.bfs_nodes) {
        bfs_closed_ = false;
        continue;
      }
      uint32_t id = uint32_t(nodes.size());
      index.emplace(key, id);
      nodes.push_back(std::move(child));
      parent.emplace_back(v, rule.id);
      record(id);
      queue.push_back(id);
    }
  }
}

Verdict ParStartQueries::any_target(KSet K) const {
  for (uint32_t n = 0; n < tree_.nodes.size(); ++n) {
    if (KmTree::touched1(tree_.nodes[n]) != K) continue;
    std::vector<uint32_t> demand(view_.n_vars(), 0);
    if (auto d = km_concretize(view_, tree_, n, demand, b_.concretize_rounds))
      return Verdict::mk_yes(std::move(*d));
  }
  if (tree_.complete) return Verdict::mk_no();
  return Verdict::mk_unknown("KM tree truncated");
}

Verdict ParStartQueries::cover(Sym Y, KSet K) const {
  uint32_t y = UINT32_MAX;
  try {
    y = view_.index_of(Y);
  } catch (const std::invalid_argument&) {
    return Verdict::mk_no("target variable absent");
  }
  std::vector<uint32_t> demand(view_.n_vars(), 0);
  demand[y] = 1;
  for (uint32_t n = 0; n < tree_.nodes.size(); ++n) {
    const auto& node = tree_.nodes[n];
    if (!KmTree::started(node) || KmTree::touched1(node) != K) continue;
    if (node.m[y] < 1) continue;  // omega compares greater
    if (auto d = km_concretize(view_, tree_, n, demand, b_.concretize_rounds))
      return Verdict::mk_yes(std::move(*d));
  }
  if (tree_.complete) return Verdict::mk_no();
  return Verdict::mk_unknown("KM tree truncated");
}

Verdict ParStartQueries::to_eps(KSet K) const {
  auto it = eps_by_touched_.find(K.bits);
  if (it != eps_by_touched_.end()) return Verdict::mk_yes(it->second);
  if (start_persistent_) return Verdict::mk_no("start contains a persistent variable");
  if (bfs_closed_) return Verdict::mk_no();
  if (tree_.complete && !km_ctrls_.count(K.bits))
    return Verdict::mk_no("control refuted by coverability");
  return Verdict::mk_unknown("exact search truncated");
}

Verdict ParStartQueries::to_var(Sym Y, KSet K) const {
  auto it = var_by_touched_.find(std::make_pair(Y, K.bits));
  if (it != var_by_touched_.end()) return Verdict::mk_yes(it->second);
  if (bfs_closed_) return Verdict::mk_no();
  if (tree_.complete) {
    auto cv = km_cover_var_.find(Y);
    if (cv == km_cover_var_.end() || !cv->second.count(K.bits))
      return Verdict::mk_no("cover refuted by coverability");
  }
  return Verdict::mk_unknown("exact search truncated");
}

// --- spec-level wrappers -----------------------------------------------------------

namespace {

// every component of K must be touchable at all
bool component_feasible(const Mbrs& mp, KSet K) {
  for (uint32_t i : K.members()) {
    bool any = false;
    for (RuleId r = 0; r < mp.rules.size() && !any; ++r)
      any = mp.cmp[r].contains(i) && mp.cmp[r].subset_of(K);
    if (!any) return false;
  }
  return true;
}

}  // namespace

Verdict par_reach_cover(const Mbrs& mp, Sym X, Sym Y, KSet K, const EngineBudget& b) {
  if (!component_feasible(mp, K)) return Verdict::mk_no("untouchable component");
  return ParStartQueries(mp, X, K, b).cover(Y, K);
}

Verdict par_reach_empty(const Mbrs& mp, Sym X, KSet K, const EngineBudget& b) {
  if (!component_feasible(mp, K)) return Verdict::mk_no("untouchable component");
  return ParStartQueries(mp, X, K, b).to_eps(K);
}

Verdict par_reach_var(const Mbrs& mp, Sym X, Sym Y, KSet K, const EngineBudget& b) {
  if (!component_feasible(mp, K)) return Verdict::mk_no("untouchable component");
  return ParStartQueries(mp, X, K, b).to_var(Y, K);
}

Verdict par_finite_accepting(const Mbrs& mp, Sym X, KSet K, const EngineBudget& b) {
  if (K.empty_set()) return Verdict::mk_yes(Derivation{Term::var(X), {}});
  if (!component_feasible(mp, K)) return Verdict::mk_no("untouchable component");
  return ParStartQueries(mp, X, K, b).any_target(K);
}

// --- infinite mixed query -----------------------------------------------------------

Verdict par_infinite_mixed(const Mbrs& mp1, const Mbrs& mp2, Sym X, KSet K, KSet Komega,
                           const std::vector<char>& rstar, const EngineBudget& b) {
  if (mp1.rules.size() != mp2.rules.size())
    throw std::invalid_argument("par_infinite_mixed: supports differ");
  for (RuleId r = 0; r < mp1.rules.size(); ++r)
    if (mp1.rules[r].lhs != mp2.rules[r].lhs || mp1.rules[r].rhs != mp2.rules[r].rhs ||
        !(mp1.rules[r].label == mp2.rules[r].label))
      throw std::invalid_argument("par_infinite_mixed: supports differ");
  if (rstar.size() != mp1.rules.size())
    throw std::invalid_argument("par_infinite_mixed: rstar size mismatch");
  if (!Komega.subset_of(K)) return Verdict::mk_no("Komega not a subset of K");

  // static feasibility of every required component
  for (uint32_t i : K.members()) {
    bool any = false;
    for (RuleId r = 0; r < mp1.rules.size() && !any; ++r)
      any = mp1.cmp[r].contains(i) && mp1.cmp[r].subset_of(K) && mp2.cmp[r].subset_of(Komega);
    if (!any) return Verdict::mk_no("untouchable component");
  }
  for (uint32_t i : Komega.members()) {
    bool any = false;
    for (RuleId r = 0; r < mp1.rules.size() && !any; ++r) {
      bool usable = mp1.cmp[r].subset_of(K) && mp2.cmp[r].subset_of(Komega);
      any = usable && ((mp1.cmp[r].contains(i) && mp1.cmp[r].subset_of(Komega)) ||
                       mp2.cmp[r].contains(i));
    }
    if (!any) return Verdict::mk_no("untouchable omega component");
  }

  ParView view(mp1, K, &mp2, Komega);
  uint32_t x = view.index_of(X);
  std::vector<uint32_t> m0(view.n_vars(), 0);
  m0[x] = 1;

  constexpr uint64_t HIT = uint64_t(1) << 31;
  auto rule_bits = [&](const ParView::PRule& r) -> uint64_t {
    return r.bits | (rstar[r.id] ? 0 : HIT);
  };

  // concrete product search over (marking, T1, T2, hit)
  struct PNode {
    std::vector<uint32_t> m;
    uint64_t ctrl;
  };
  std::map<std::pair<std::vector<uint32_t>, uint64_t>, uint32_t> index;
  std::vector<PNode> nodes{{m0, 0}};
  std::vector<std::pair<uint32_t, RuleId>> parent{{0, 0}};
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> edges;  // (rule idx, node)
  edges.emplace_back();
  index.emplace(std::make_pair(m0, uint64_t(0)), 0u);
  std::deque<uint32_t> queue{0};
  bool closed = true;

  std::map<RuleId, const ParView::PRule*> rule_of;
  for (const auto& r : view.rules()) rule_of[r.id] = &r;

  auto derivation_to = [&](uint32_t id) {
    std::vector<RuleId> rev;
    for (uint32_t cur = id; cur != 0; cur = parent[cur].first) rev.push_back(parent[cur].second);
    std::reverse(rev.begin(), rev.end());
    Derivation d;
    d.start = view.term_of(m0);
    std::vector<uint32_t> m = m0;
    for (RuleId rid : rev) {
      const auto& r = *rule_of.at(rid);
      for (uint32_t i = 0; i < m.size(); ++i) m[i] = m[i] - r.pre[i] + r.post[i];
      d.steps.push_back(Step{rid, view.term_of(m)});
    }
    return d;
  };

  auto finite_hit = [&](uint64_t ctrl) {
    return ParView::bits1(ctrl) == K && ParView::bits2(ctrl) == Komega && (ctrl & HIT);
  };
  if (finite_hit(nodes[0].ctrl)) return Verdict::mk_yes(derivation_to(0));

  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    for (uint32_t ri = 0; ri < view.rules().size(); ++ri) {
      const auto& rule = view.rules()[ri];
      const auto& m = nodes[v].m;
      bool enabled = true;
      for (uint32_t i = 0; i < m.size() && enabled; ++i)
        if (m[i] < rule.pre[i]) enabled = false;
      if (!enabled) continue;
      PNode child;
      child.m = m;
      for (uint32_t i = 0; i < m.size(); ++i) child.m[i] = child.m[i] - rule.pre[i] + rule.post[i];
      child.ctrl = nodes[v].ctrl | rule_bits(rule);
      auto key = std::make_pair(child.m, child.ctrl);
      auto it = index.find(key);
      if (it != index.end()) {
        edges[v].emplace_back(ri, it->second);
        continue;
      }
      if (nodes.size() >= b.bfs_nodes) {
        closed = false;
        continue;
      }
      uint32_t id = uint32_t(nodes.size());
      index.emplace(key, id);
      nodes.push_back(std::move(child));
      parent.emplace_back(v, rule.id);
      edges.emplace_back();
      edges[v].emplace_back(ri, id);
      if (finite_hit(nodes[id].ctrl)) return Verdict::mk_yes(derivation_to(id));
      queue.push_back(id);
    }
  }

  if (closed) {
    // exact cycle analysis: edges whose cmp1 fits Komega, annotated with cmp1
    AnnotatedGraph cg;
    cg.ensure(nodes.size());
    for (uint32_t u = 0; u < nodes.size(); ++u)
      for (const auto& [ri, w] : edges[u]) {
        const auto& rule = view.rules()[ri];
        if (ParView::bits1(rule.bits).subset_of(Komega))
          cg.add_edge(u, w, rule.id, uint32_t(ParView::bits1(rule.bits).bits));
      }
    CycleSearch cycles(cg);
    for (uint32_t s = 0; s < nodes.size(); ++s) {
      if (ParView::bits1(nodes[s].ctrl) != K) continue;
      KSet need = Komega.minus(ParView::bits2(nodes[s].ctrl));
      auto cyc = cycles.covering_cycle(s, need.bits);
      if (!cyc) continue;
      Derivation stem = derivation_to(s);
      Derivation cycle;
      cycle.start = stem.end();
      std::vector<uint32_t> m = nodes[s].m;
      for (const CycleStep& cs : *cyc) {
        const auto& r = *rule_of.at(cs.payload);
        for (uint32_t i = 0; i < m.size(); ++i) m[i] = m[i] - r.pre[i] + r.post[i];
        cycle.steps.push_back(Step{cs.payload, view.term_of(m)});
      }
      return Verdict::mk_yes(std::move(stem), std::move(cycle));
    }
    return Verdict::mk_no();
  }

  // truncated: look for pumpable witnesses from split candidates
  size_t tried = 0;
  for (uint32_t s = 0; s < nodes.size() && tried < b.split_candidates; ++s) {
    if (ParView::bits1(nodes[s].ctrl) != K) continue;
    ++tried;
    const std::vector<uint32_t>& base = nodes[s].m;
    KSet t2 = ParView::bits2(nodes[s].ctrl);
    // nested search: rules with cmp1 within Komega; state (marking, c1|c2)
    struct QNode {
      std::vector<uint32_t> m;
      uint64_t bits;
    };
    std::map<std::pair<std::vector<uint32_t>, uint64_t>, uint32_t> qindex;
    std::vector<QNode> qnodes{{base, 0}};
    std::vector<std::pair<uint32_t, RuleId>> qparent{{0, 0}};
    qindex.emplace(std::make_pair(base, uint64_t(0)), 0u);
    std::deque<uint32_t> qq{0};
    while (!qq.empty()) {
      uint32_t v = qq.front();
      qq.pop_front();
      for (const auto& rule : view.rules()) {
        if (!ParView::bits1(rule.bits).subset_of(Komega)) continue;
        const auto& m = qnodes[v].m;
        bool enabled = true;
        for (uint32_t i = 0; i < m.size() && enabled; ++i)
          if (m[i] < rule.pre[i]) enabled = false;
        if (!enabled) continue;
        QNode child;
        child.m = m;
        for (uint32_t i = 0; i < m.size(); ++i)
          child.m[i] = child.m[i] - rule.pre[i] + rule.post[i];
        child.bits = qnodes[v].bits | rule.bits;
        auto key = std::make_pair(child.m, child.bits);
        if (qindex.count(key)) continue;
        if (qnodes.size() >= b.pump_nodes) break;
        uint32_t id = uint32_t(qnodes.size());
        qindex.emplace(key, id);
        qnodes.push_back(child);
        qparent.emplace_back(v, rule.id);
        // covering state with the omega components complete?
        KSet covered = t2 | ParView::bits1(child.bits) | ParView::bits2(child.bits);
        if (covered == Komega && leq(base, child.m)) {
          Derivation stem = derivation_to(s);
          Derivation cycle;
          cycle.start = stem.end();
          std::vector<uint32_t> cm = base;
          std::vector<RuleId> rev;
          for (uint32_t cur = id; cur != 0; cur = qparent[cur].first)
            rev.push_back(qparent[cur].second);
          std::reverse(rev.begin(), rev.end());
          for (RuleId rid : rev) {
            const auto& r = *rule_of.at(rid);
            for (uint32_t i = 0; i < cm.size(); ++i) cm[i] = cm[i] - r.pre[i] + r.post[i];
            cycle.steps.push_back(Step{rid, view.term_of(cm)});
          }
          return Verdict::mk_yes(std::move(stem), std::move(cycle));
        }
        qq.push_back(id);
      }
    }
  }

  // refutation by coverability of the control states
  KmTree km = build_km(view, m0, b.km_nodes);
  if (km.complete) {
    bool split_possible = false;
    for (const auto& n : km.nodes)
      if (KmTree::touched1(n) == K) split_possible = true;
    if (!split_possible) return Verdict::mk_no("refuted by coverability");
  }
  return Verdict::mk_unknown("product search truncated");
}

}  // namespace prs
