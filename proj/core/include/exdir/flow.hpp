#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "exdir/graph.hpp"
#include "exdir/rational.hpp"

namespace exdir {

// One violated valid-state condition; an empty report means valid.
struct FlowViolation {
  std::string condition;  // "capacity" | "level-drop" | "deficit-level" | "excess-level"
  std::string detail;
};

struct FlowValidity {
  std::vector<FlowViolation> violations;
  bool valid() const { return violations.empty(); }
};

struct FlowCounters {
  int64_t pushes = 0;
  int64_t pulls = 0;
  int64_t relabels = 0;
  int64_t deg_weighted_relabels = 0;
  int64_t work() const { return pushes + pulls + deg_weighted_relabels; }
};

// Default level cap: ceil(10 ln(2m) / phi) + 2, enough headroom for the
// level-gap argument behind PruneOrCertify.
int64_t h_default(int64_t m, Rational phi);

// Dynamic valid-state structure: maintains an anti-symmetric integer
// pseudo-flow f and levels l over a shrinking induced subgraph so that after
// every public operation
//   - capacity bounds hold,
//   - every alive edge (u,v) inside V-tilde with l(u) > l(v)+1 is saturated
//     (and carries nothing against a downward gap),
//   - vertices with negative excess sit at level 0,
//   - vertices with positive excess sit at level h.
//
// PushRelabel moves positive excess toward level 0 (selection: lowest level,
// then lowest id; lowest EdgeId among admissible arcs), PullRelabel moves
// negative excess toward level h (highest level, then lowest id). All
// arithmetic is 64-bit integer.
class FlowEngine {
public:
  // Requires sink[v] >= deg(v) on the view's alive subgraph.
  FlowEngine(GraphView g, std::vector<int64_t> cap, std::vector<int64_t> source,
             std::vector<int64_t> sink, int64_t h);

  // Convenience: uniform capacity, zero sources.
  FlowEngine(GraphView g, int64_t uniform_cap, std::vector<int64_t> sink, int64_t h);

  void increase_source(std::span<const std::pair<Vertex, int64_t>> delta);
  void remove_vertices(std::span<const Vertex> s);
  // Function-restriction of the network to the surviving edge set: flow on
  // dying edges is dropped, then PullRelabel and PushRelabel restore
  // validity. (Lemma 3.1's interface has no edge removal; pruning needs it.)
  void remove_edges(std::span<const EdgeId> es);

  std::pair<int64_t, int64_t> excess(Vertex v) const;  // (positive, negative)
  FlowValidity check_valid_state() const;

  int64_t h() const { return h_; }
  int n() const { return static_cast<int>(level_.size()); }
  bool in_tilde(Vertex v) const { return in_tilde_[v] != 0; }
  int64_t level(Vertex v) const { return level_[v]; }
  bool edge_in_network(EdgeId e) const { return in_net_[e] != 0; }
  int64_t flow(EdgeId e) const { return flow_[e]; }
  int64_t capacity(EdgeId e) const { return cap_[e]; }
  int64_t source(Vertex v) const { return src_[v]; }
  int64_t sink(Vertex v) const { return snk_[v]; }
  int64_t net_out(Vertex v) const { return net_out_[v]; }
  int64_t network_degree(Vertex v) const { return adeg_[v]; }
  int64_t count_at_h() const { return count_at_h_; }
  GraphView graph() const { return g_; }

  const FlowCounters& counters() const { return counters_; }
  // Accumulated right-hand side of the Lemma 3.1 run-time bound:
  // ||Delta||_1 + sum_t [ min(c(V-tilde_{t+1}, S_t), c(S_t, V-tilde_{t+1})) + sink(S_t) ].
  int64_t work_budget() const { return budget_; }

  // One line per vertex (id, l, source, sink, excess+, excess-), one per
  // network edge (id, f, c); golden-file format.
  void dump(std::ostream& out) const;

  // Test seams for the validity checker's negative controls. They corrupt
  // internal bookkeeping; only check_valid_state is meaningful afterwards.
  void debug_set_level(Vertex v, int64_t lvl) { level_[v] = lvl; }
  void debug_set_flow(EdgeId e, int64_t f) { flow_[e] = f; }

private:
  struct Arc {
    EdgeId e;
    Vertex other;
    bool out;  // arc direction from the owner's perspective (view-oriented)
  };

  int64_t excess_pos(Vertex v) const {
    int64_t x = src_[v] - net_out_[v] - snk_[v];
    return x > 0 ? x : 0;
  }
  int64_t excess_neg(Vertex v) const {
    int64_t x = net_out_[v] - src_[v];
    return x > 0 ? x : 0;
  }

  void push_relabel();
  void pull_relabel();
  void refresh(Vertex v);
  void set_level(Vertex v, int64_t lvl);
  void drop_edge(EdgeId e);  // zero flow, leave network, fix adeg/net_out
  void touch_epoch() { ++epoch_; }
  void ensure_arc_reset(Vertex v);

  GraphView g_;
  int64_t h_;
  std::vector<int64_t> cap_, flow_;
  std::vector<char> in_net_;
  std::vector<int64_t> src_, snk_, net_out_, adeg_;
  std::vector<int64_t> level_;
  std::vector<char> in_tilde_;
  std::vector<std::vector<Arc>> arcs_;  // sorted by EdgeId, self-loops excluded
  std::vector<size_t> cur_push_, cur_pull_;
  std::vector<uint64_t> arc_epoch_;
  uint64_t epoch_ = 0;

  // Membership mirrors of the excess predicates, keyed (level, id).
  std::set<std::pair<int64_t, Vertex>> active_, deficit_;
  std::vector<char> in_active_, in_deficit_;

  int64_t count_at_h_ = 0;
  int64_t budget_ = 0;
  FlowCounters counters_;
};

// A flow path (or discarded cycle) in the decomposition of a nonnegative
// per-edge flow into unit paths.
struct UnitPath {
  Vertex start, end;
  std::vector<EdgeId> edges;
};

// Greedy unit-path decomposition: from each vertex in ascending id order,
// while it has unconsumed net out-surplus (capped by want_starts), walk
// positive remaining flow along lowest-EdgeId arcs, cancel cycles on
// revisit, end where out-flow is exhausted. Consumes `remaining`.
std::vector<UnitPath> decompose_unit_paths(GraphView g, std::vector<int64_t>& remaining,
                                           std::span<const int64_t> want_starts);

}  // namespace exdir
