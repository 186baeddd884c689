// Generic digraph search used by the oracle and both engines: SCC
// decomposition plus extraction of cycles through a given node that cover a
// required set of edge-annotation bits.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace prs {

struct AnnotatedGraph {
  struct Edge {
    uint32_t to;
    uint32_t payload;  // caller's edge id (e.g. a rule)
    uint32_t bits;     // annotation mask
  };
  std::vector<std::vector<Edge>> adj;

  size_t size() const { return adj.size(); }
  void ensure(size_t n) {
    if (adj.size() < n) adj.resize(n);
  }
  void add_edge(uint32_t from, uint32_t to, uint32_t payload, uint32_t bits) {
    ensure(std::max<size_t>(from, to) + 1);
    adj[from].push_back(Edge{to, payload, bits});
  }
};

struct CycleStep {
  uint32_t payload;
  uint32_t to;
};

class CycleSearch {
 public:
  explicit CycleSearch(const AnnotatedGraph& g);

  int scc_of(uint32_t v) const { return scc_[v]; }
  uint32_t scc_bits(int scc) const { return bits_[scc]; }
  bool scc_has_edge(int scc) const { return has_edge_[scc]; }

  // A nonempty cycle v -> v inside v's SCC whose edge bits cover `need`;
  // nullopt when the SCC lacks an edge for some required bit (or any edge).
  std::optional<std::vector<CycleStep>> covering_cycle(uint32_t v, uint32_t need) const;

 private:
  const AnnotatedGraph& g_;
  std::vector<int> scc_;
  std::vector<uint32_t> bits_;
  std::vector<char> has_edge_;

  // shortest path u -> w inside one SCC (possibly empty when u == w)
  std::vector<CycleStep> path_in_scc(uint32_t u, uint32_t w) const;
};

}  // namespace prs
