#include "prs/seq_engine.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "prs/buchi.hpp"

namespace prs {

uint32_t TopGraph::index_of(Sym v) const {
  auto it = std::find(vars.begin(), vars.end(), v);
  if (it == vars.end()) throw std::invalid_argument("unknown variable");
  return uint32_t(it - vars.begin());
}

TopGraph top_graph(const Mbrs& ms) {
  TopGraph g;
  g.vars = ms.vars;
  g.adj.resize(g.vars.size());
  for (RuleId r = 0; r < ms.rules.size(); ++r) {
    const Rule& rule = ms.rules[r];
    auto lv = rule.lhs.as_var();
    if (!lv) throw std::invalid_argument("seq engine: unsupported rule shape (lhs)");
    uint32_t from = g.index_of(*lv);
    if (auto rv = rule.rhs.as_var()) {
      g.adj[from].push_back(TopGraph::Edge{r, g.index_of(*rv)});
    } else if (rule.shape() == RuleShape::Push) {
      Spine sp = spine_at(rule.rhs.spines()[0].spine);
      Sym z = *Term::from_id(sp.tail_id).as_var();
      g.adj[from].push_back(TopGraph::Edge{r, g.index_of(z)});
    } else {
      throw std::invalid_argument("seq engine: pop and erase rules are unsupported");
    }
  }
  return g;
}

namespace {

// stem product (top variable, touched) with parent links for witnesses
struct SeqProduct {
  struct Node {
    uint32_t var;
    uint32_t touched;
  };
  std::vector<Node> nodes;
  std::vector<std::pair<uint32_t, RuleId>> parent;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> index;

  // rules applied along the path to `id`
  std::vector<RuleId> rules_to(uint32_t id) const {
    std::vector<RuleId> out;
    for (uint32_t cur = id; cur != 0; cur = parent[cur].first) out.push_back(parent[cur].second);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

SeqProduct seq_product(const Mbrs& ms, const TopGraph& g, Sym X, KSet bound) {
  SeqProduct p;
  p.nodes.push_back({g.index_of(X), 0});
  p.parent.emplace_back(0, 0);
  p.index.emplace(std::make_pair(p.nodes[0].var, 0u), 0u);
  std::deque<uint32_t> queue{0};
  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    for (const auto& e : g.adj[p.nodes[v].var]) {
      if (!ms.cmp[e.rule].subset_of(bound)) continue;
      uint32_t touched = p.nodes[v].touched | ms.cmp[e.rule].bits;
      auto key = std::make_pair(e.to, touched);
      if (p.index.count(key)) continue;
      uint32_t id = uint32_t(p.nodes.size());
      p.index.emplace(key, id);
      p.nodes.push_back({e.to, touched});
      p.parent.emplace_back(v, e.rule);
      queue.push_back(id);
    }
  }
  return p;
}

// rebuild the sequential terms along a rule path: each rule rewrites the
// innermost variable, which compose realizes directly
Derivation derivation_from_rules(const Mbrs& ms, Term start, const std::vector<RuleId>& rules) {
  Derivation d;
  d.start = start;
  Term cur = start;
  for (RuleId r : rules) {
    cur = compose(cur, ms.rules[r].rhs);
    d.steps.push_back(Step{r, cur});
  }
  return d;
}

}  // namespace

Verdict seq_reachable_var(const Mbrs& ms, Sym X, Sym Y, KSet K) {
  TopGraph g = top_graph(ms);
  uint32_t y;
  try {
    y = g.index_of(Y);
  } catch (const std::invalid_argument&) {
    return Verdict::mk_no("target variable absent");
  }
  SeqProduct p = seq_product(ms, g, X, K);
  auto it = p.index.find(std::make_pair(y, K.bits));
  if (it == p.index.end()) return Verdict::mk_no();
  return Verdict::mk_yes(derivation_from_rules(ms, Term::var(X), p.rules_to(it->second)));
}

std::vector<std::pair<std::pair<Sym, KSet>, Derivation>> seq_reachable_all(const Mbrs& ms,
                                                                           Sym X, KSet bound) {
  TopGraph g = top_graph(ms);
  SeqProduct p = seq_product(ms, g, X, bound);
  std::vector<std::pair<std::pair<Sym, KSet>, Derivation>> out;
  for (uint32_t id = 0; id < p.nodes.size(); ++id) {
    out.emplace_back(std::make_pair(g.vars[p.nodes[id].var], KSet(p.nodes[id].touched)),
                     derivation_from_rules(ms, Term::var(X), p.rules_to(id)));
  }
  return out;
}

Verdict seq_infinite_accepting(const Mbrs& ms, Sym X, KSet K, KSet Komega) {
  if (!Komega.subset_of(K)) return Verdict::mk_no("Komega not a subset of K");
  TopGraph g = top_graph(ms);

  AnnotatedGraph cg;
  cg.ensure(g.vars.size());
  for (uint32_t u = 0; u < g.vars.size(); ++u)
    for (const auto& e : g.adj[u])
      if (ms.cmp[e.rule].subset_of(Komega)) cg.add_edge(u, e.to, e.rule, ms.cmp[e.rule].bits);
  CycleSearch cycles(cg);

  SeqProduct p = seq_product(ms, g, X, K);
  for (uint32_t id = 0; id < p.nodes.size(); ++id) {
    if ((KSet(p.nodes[id].touched) | Komega) != K) continue;
    auto cyc = cycles.covering_cycle(p.nodes[id].var, Komega.bits);
    if (!cyc) continue;
    Derivation stem = derivation_from_rules(ms, Term::var(X), p.rules_to(id));
    std::vector<RuleId> cycle_rules;
    for (const CycleStep& cs : *cyc) cycle_rules.push_back(cs.payload);
    Derivation cycle = derivation_from_rules(ms, stem.end(), cycle_rules);
    return Verdict::mk_yes(std::move(stem), std::move(cycle));
  }
  return Verdict::mk_no();
}

}  // namespace prs
