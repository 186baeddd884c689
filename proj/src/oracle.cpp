#include "prs/oracle.hpp"

#include <algorithm>
#include <memory>
#include <deque>
#include <map>
#include <set>

#include "prs/buchi.hpp"

namespace prs {

StateGraph explore(const Mbrs& m, Term start, size_t node_budget) {
  StateGraph g;
  g.nodes.push_back(start);
  g.index.emplace(start, 0);
  g.edges.emplace_back();
  std::deque<uint32_t> queue{0};
  size_t expanded = 0;
  while (!queue.empty()) {
    if (expanded >= node_budget) {
      g.closed = false;
      for (uint32_t v : queue) g.frontier.push_back(g.nodes[v]);
      break;
    }
    uint32_t v = queue.front();
    queue.pop_front();
    ++expanded;
    for (const auto& [r, t] : successors(m, g.nodes[v])) {
      auto [it, fresh] = g.index.emplace(t, uint32_t(g.nodes.size()));
      if (fresh) {
        g.nodes.push_back(t);
        g.edges.emplace_back();
        queue.push_back(it->second);
      }
      g.edges[v].emplace_back(r, it->second);
    }
  }
  return g;
}

// --- finite acceptance --------------------------------------------------------

Verdict bf_finite_accepting(const Mbrs& m, Sym X, KSet K, const OracleBudget& b) {
  if (K.empty_set()) return Verdict::mk_yes(Derivation{Term::var(X), {}});

  struct Node {
    Term t;
    KSet touched;
  };
  std::map<std::pair<Term, uint32_t>, uint32_t> index;  // -> node id
  std::vector<Node> nodes{{Term::var(X), KSet()}};
  std::vector<std::pair<uint32_t, Step>> parent{{0, Step{}}};  // (pred id, step)
  std::vector<uint32_t> depth{0};
  index.emplace(std::make_pair(nodes[0].t, 0u), 0u);
  std::deque<uint32_t> queue{0};
  bool truncated = false;

  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    if (nodes[v].touched == K) {
      // rebuild the derivation
      std::vector<Step> steps;
      for (uint32_t cur = v; cur != 0; cur = parent[cur].first)
        steps.push_back(parent[cur].second);
      std::reverse(steps.begin(), steps.end());
      return Verdict::mk_yes(Derivation{Term::var(X), std::move(steps)});
    }
    if (depth[v] >= b.depth) {
      truncated = true;
      continue;
    }
    for (const auto& [r, t] : successors(m, nodes[v].t)) {
      if (!m.cmp[r].subset_of(K)) continue;
      KSet touched = nodes[v].touched | m.cmp[r];
      auto key = std::make_pair(t, touched.bits);
      if (index.count(key)) continue;
      if (nodes.size() >= b.nodes) {
        truncated = true;
        continue;
      }
      uint32_t id = uint32_t(nodes.size());
      index.emplace(key, id);
      nodes.push_back(Node{t, touched});
      parent.emplace_back(v, Step{r, t});
      depth.push_back(depth[v] + 1);
      queue.push_back(id);
    }
  }
  if (truncated)
    return Verdict::mk_unknown("finite-accepting search exhausted depth " +
                               std::to_string(b.depth) + " / " + std::to_string(b.nodes) +
                               " product nodes");
  return Verdict::mk_no();
}

// --- infinite acceptance ------------------------------------------------------

namespace {

Derivation path_to_derivation(const StateGraph& g, Term start,
                              const std::vector<CycleStep>& steps) {
  Derivation d;
  d.start = start;
  for (const CycleStep& s : steps) d.steps.push_back(Step{s.payload, g.nodes[s.to]});
  return d;
}

}  // namespace

Verdict bf_infinite_accepting(const Mbrs& m, Sym X, KSet K, KSet Komega,
                              const OracleBudget& b) {
  if (!Komega.subset_of(K)) return Verdict::mk_no("Komega not a subset of K");
  StateGraph g = explore(m, Term::var(X), b.nodes);

  // cycle candidates: SCCs of the Komega-restricted edge graph
  AnnotatedGraph cg;
  cg.ensure(g.nodes.size());
  for (uint32_t u = 0; u < g.nodes.size(); ++u)
    for (const auto& [r, w] : g.edges[u])
      if (m.cmp[r].subset_of(Komega)) cg.add_edge(u, w, r, m.cmp[r].bits);
  CycleSearch cycles(cg);

  // stem product: (node, touched <= K) over cmp <= K edges
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> index;
  struct PNode {
    uint32_t node;
    KSet touched;
  };
  std::vector<PNode> nodes{{g.node_of(Term::var(X)), KSet()}};
  std::vector<std::pair<uint32_t, Step>> parent{{0, Step{}}};
  index.emplace(std::make_pair(nodes[0].node, 0u), 0u);
  std::deque<uint32_t> queue{0};
  bool truncated = !g.closed;

  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    const PNode& pn = nodes[v];
    if ((pn.touched | Komega) == K) {
      auto cyc = cycles.covering_cycle(pn.node, Komega.bits);
      if (cyc) {
        std::vector<Step> steps;
        for (uint32_t cur = v; cur != 0; cur = parent[cur].first)
          steps.push_back(parent[cur].second);
        std::reverse(steps.begin(), steps.end());
        Derivation stem{Term::var(X), std::move(steps)};
        Derivation cycle = path_to_derivation(g, stem.end(), *cyc);
        return Verdict::mk_yes(std::move(stem), std::move(cycle));
      }
    }
    for (const auto& [r, w] : g.edges[pn.node]) {
      if (!m.cmp[r].subset_of(K)) continue;
      KSet touched = pn.touched | m.cmp[r];
      auto key = std::make_pair(w, touched.bits);
      if (index.count(key)) continue;
      if (nodes.size() >= b.nodes * 4) {
        truncated = true;
        continue;
      }
      uint32_t id = uint32_t(nodes.size());
      index.emplace(key, id);
      nodes.push_back(PNode{w, touched});
      parent.emplace_back(v, Step{r, g.nodes[w]});
      queue.push_back(id);
    }
  }
  if (truncated)
    return Verdict::mk_unknown("state graph truncated at " + std::to_string(b.nodes) +
                               " nodes");
  return Verdict::mk_no();
}

// --- run patterns and model checking ------------------------------------------

RunPatterns compute_run_patterns(const Mbrs& m, Term start, const OracleBudget& b) {
  RunPatterns out;
  StateGraph g = explore(m, start, b.nodes);
  if (!g.closed) {
    out.complete = false;
    out.limitation = "state graph truncated at " + std::to_string(b.nodes) + " nodes";
  }

  // distinct labels occurring on rules
  std::vector<Label> labels;
  auto label_bit = [&](const Label& l) -> uint32_t {
    auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) {
      labels.push_back(l);
      return uint32_t(labels.size() - 1);
    }
    return uint32_t(it - labels.begin());
  };
  std::vector<uint32_t> rule_bit(m.rules.size());
  for (RuleId r = 0; r < m.rules.size(); ++r) rule_bit[r] = label_bit(m.rules[r].label);
  if (labels.size() > 20) {
    out.complete = false;
    out.limitation = "too many distinct labels for pattern enumeration";
    return out;
  }

  // per cycle-label-set I: SCCs of the I-restricted graph
  // (shared CycleSearch per I, computed lazily)
  std::map<uint32_t, std::unique_ptr<CycleSearch>> cyc_by_set;
  std::map<uint32_t, std::unique_ptr<AnnotatedGraph>> graph_by_set;
  auto cycles_for = [&](uint32_t iset) -> CycleSearch& {
    auto it = cyc_by_set.find(iset);
    if (it != cyc_by_set.end()) return *it->second;
    auto ag = std::make_unique<AnnotatedGraph>();
    ag->ensure(g.nodes.size());
    for (uint32_t u = 0; u < g.nodes.size(); ++u)
      for (const auto& [r, w] : g.edges[u])
        if ((uint32_t(1) << rule_bit[r]) & iset)
          ag->add_edge(u, w, r, uint32_t(1) << rule_bit[r]);
    auto cs = std::make_unique<CycleSearch>(*ag);
    auto& ref = *cs;
    graph_by_set.emplace(iset, std::move(ag));
    cyc_by_set.emplace(iset, std::move(cs));
    return ref;
  };

  // stem product (node, seen-label-set)
  struct PNode {
    uint32_t node;
    uint32_t seen;
  };
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> index;
  std::vector<PNode> nodes{{g.node_of(start), 0}};
  std::vector<std::pair<uint32_t, Step>> parent{{0, Step{}}};
  index.emplace(std::make_pair(nodes[0].node, 0u), 0u);
  std::deque<uint32_t> queue{0};
  size_t product_budget = b.nodes * 16;

  std::set<std::pair<uint32_t, uint32_t>> seen_patterns;  // (all, inf)
  auto emit = [&](uint32_t pid, uint32_t iset, const std::vector<CycleStep>& cyc) {
    uint32_t all = nodes[pid].seen | iset;
    if (!seen_patterns.emplace(all, iset).second) return;
    RunPattern pat;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (all & (1u << i)) pat.all.push_back(labels[i]);
      if (iset & (1u << i)) pat.inf.push_back(labels[i]);
    }
    std::vector<Step> steps;
    for (uint32_t cur = pid; cur != 0; cur = parent[cur].first)
      steps.push_back(parent[cur].second);
    std::reverse(steps.begin(), steps.end());
    pat.stem = Derivation{start, std::move(steps)};
    pat.cycle = path_to_derivation(g, pat.stem.end(), cyc);
    for (RuleId r : pat.stem.rule_seq()) pat.run.stem.push_back(m.rules[r].label);
    for (RuleId r : pat.cycle.rule_seq()) pat.run.cycle.push_back(m.rules[r].label);
    out.patterns.push_back(std::move(pat));
  };

  uint32_t all_isets = uint32_t(1) << labels.size();
  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    // try every cycle label set at this node
    for (uint32_t iset = 1; iset < all_isets; ++iset) {
      if (seen_patterns.count({nodes[v].seen | iset, iset})) continue;
      CycleSearch& cs = cycles_for(iset);
      int s = cs.scc_of(nodes[v].node);
      if (!cs.scc_has_edge(s) || (iset & ~cs.scc_bits(s))) continue;
      auto cyc = cs.covering_cycle(nodes[v].node, iset);
      if (cyc) emit(v, iset, *cyc);
    }
    for (const auto& [r, w] : g.edges[nodes[v].node]) {
      uint32_t seen = nodes[v].seen | (uint32_t(1) << rule_bit[r]);
      auto key = std::make_pair(w, seen);
      if (index.count(key)) continue;
      if (nodes.size() >= product_budget) {
        out.complete = false;
        out.limitation = "label product truncated";
        continue;
      }
      uint32_t id = uint32_t(nodes.size());
      index.emplace(key, id);
      nodes.push_back(PNode{w, seen});
      parent.emplace_back(v, Step{r, g.nodes[w]});
      queue.push_back(id);
    }
  }
  return out;
}

Verdict bf_model_check(const Formula& f, const RunPatterns& rp) {
  if (!in_extended_fragment(f))
    throw std::invalid_argument("bf_model_check: formula not in fragment");
  for (const RunPattern& p : rp.patterns) {
    if (!eval(f, p.run)) {
      Verdict v = Verdict::mk_no("counterexample run");
      v.stem = p.stem;
      v.cycle = p.cycle;
      v.run = p.run;
      return v;
    }
  }
  if (!rp.complete) return Verdict::mk_unknown(rp.limitation);
  return Verdict::mk_yes();
}

Verdict bf_model_check(const Mbrs& m, Sym X, const Formula& f, const OracleBudget& b) {
  return bf_model_check(f, compute_run_patterns(m, Term::var(X), b));
}

}  // namespace prs
