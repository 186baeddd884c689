#include "prs/buchi.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace prs {

namespace {

// Iterative Tarjan.
std::vector<int> tarjan(const AnnotatedGraph& g) {
  size_t n = g.size();
  std::vector<int> scc(n, -1);
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<uint32_t> stack;
  int next_index = 0, next_scc = 0;

  struct Frame {
    uint32_t v;
    size_t edge;
  };
  for (uint32_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < g.adj[f.v].size()) {
        uint32_t w = g.adj[f.v][f.edge].to;
        ++f.edge;
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back(Frame{w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          while (true) {
            uint32_t w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            scc[w] = next_scc;
            if (w == f.v) break;
          }
          ++next_scc;
        }
        uint32_t v = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  return scc;
}

}  // namespace

CycleSearch::CycleSearch(const AnnotatedGraph& g) : g_(g), scc_(tarjan(g)) {
  int n_scc = 0;
  for (int s : scc_) n_scc = std::max(n_scc, s + 1);
  bits_.assign(n_scc, 0);
  has_edge_.assign(n_scc, 0);
  for (uint32_t u = 0; u < g_.size(); ++u)
    for (const auto& e : g_.adj[u])
      if (scc_[u] == scc_[e.to]) {
        bits_[scc_[u]] |= e.bits;
        has_edge_[scc_[u]] = 1;
      }
}

std::vector<CycleStep> CycleSearch::path_in_scc(uint32_t u, uint32_t w) const {
  if (u == w) return {};
  int s = scc_[u];
  std::deque<uint32_t> queue{u};
  std::vector<std::pair<uint32_t, const AnnotatedGraph::Edge*>> parent(g_.size(), {0, nullptr});
  std::vector<char> seen(g_.size(), 0);
  seen[u] = 1;
  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    for (const auto& e : g_.adj[v]) {
      if (scc_[e.to] != s || seen[e.to]) continue;
      seen[e.to] = 1;
      parent[e.to] = {v, &e};
      if (e.to == w) {
        std::vector<CycleStep> path;
        uint32_t cur = w;
        while (cur != u) {
          path.push_back(CycleStep{parent[cur].second->payload, cur});
          cur = parent[cur].first;
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(e.to);
    }
  }
  throw std::logic_error("path_in_scc: nodes not in one SCC");
}

std::optional<std::vector<CycleStep>> CycleSearch::covering_cycle(uint32_t v, uint32_t need) const {
  int s = scc_[v];
  if (!has_edge_[s]) return std::nullopt;
  if ((need & ~bits_[s]) != 0) return std::nullopt;

  std::vector<CycleStep> cycle;
  uint32_t cur = v;
  uint32_t missing = need;
  // visit one edge per still-missing bit, then close the loop
  while (missing) {
    uint32_t bit = missing & ~(missing - 1);
    bool found = false;
    for (uint32_t u = 0; u < g_.size() && !found; ++u) {
      if (scc_[u] != s) continue;
      for (const auto& e : g_.adj[u]) {
        if (scc_[e.to] != s || !(e.bits & bit)) continue;
        auto leg = path_in_scc(cur, u);
        cycle.insert(cycle.end(), leg.begin(), leg.end());
        cycle.push_back(CycleStep{e.payload, e.to});
        missing &= ~e.bits;
        cur = e.to;
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;  // unreachable given the bits_ check
  }
  if (cycle.empty()) {
    // no required bits: take any single intra-SCC edge and close the loop
    for (uint32_t u = 0; u < g_.size() && cycle.empty(); ++u) {
      if (scc_[u] != s) continue;
      for (const auto& e : g_.adj[u]) {
        if (scc_[e.to] != s) continue;
        auto leg = path_in_scc(v, u);
        cycle.insert(cycle.end(), leg.begin(), leg.end());
        cycle.push_back(CycleStep{e.payload, e.to});
        cur = e.to;
        break;
      }
    }
  }
  auto back = path_in_scc(cur, v);
  cycle.insert(cycle.end(), back.begin(), back.end());
  return cycle;
}

}  // namespace prs
