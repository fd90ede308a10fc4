#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "exdir/errors.hpp"

namespace exdir {

using Vertex = int32_t;
using EdgeId = int32_t;

// Cut counts for a vertex set S, both orientations, alive edges only.
struct CutStats {
  int64_t e_fwd = 0;   // |E(S, S-bar)|
  int64_t e_bwd = 0;   // |E(S-bar, S)|
  int64_t vol_s = 0;
  int64_t vol_sbar = 0;
};

// Mutable directed multigraph with self-loops. Deleted edges are
// tombstoned, never compacted: EdgeIds stay stable across deletion streams
// and embedding paths keep referencing them by id.
//
// Degree convention: deg(v) counts alive in- plus out-incident edges; a
// self-loop contributes 1 to each side (2 total).
class DiGraph {
public:
  DiGraph() = default;
  explicit DiGraph(int n) { resize(n); }

  void resize(int n) {
    n_ = n;
    out_.resize(n);
    in_.resize(n);
    deg_.resize(n, 0);
  }

  Vertex add_vertex() {
    out_.emplace_back();
    in_.emplace_back();
    deg_.push_back(0);
    return n_++;
  }

  EdgeId add_edge(Vertex tail, Vertex head) {
    check_vertex(tail);
    check_vertex(head);
    EdgeId id = static_cast<EdgeId>(tails_.size());
    tails_.push_back(tail);
    heads_.push_back(head);
    alive_.push_back(1);
    out_[tail].push_back(id);
    in_[head].push_back(id);
    deg_[tail]++;
    deg_[head]++;
    ++alive_count_;
    return id;
  }

  void kill_edge(EdgeId e) {
    check_edge(e);
    if (!alive_[e]) return;
    alive_[e] = 0;
    deg_[tails_[e]]--;
    deg_[heads_[e]]--;
    --alive_count_;
  }

  int n() const { return n_; }
  int edge_rows() const { return static_cast<int>(tails_.size()); }  // incl. dead
  int64_t alive_edges() const { return alive_count_; }

  Vertex tail(EdgeId e) const { check_edge(e); return tails_[e]; }
  Vertex head(EdgeId e) const { check_edge(e); return heads_[e]; }
  bool alive(EdgeId e) const { check_edge(e); return alive_[e] != 0; }
  int64_t degree(Vertex v) const { check_vertex(v); return deg_[v]; }

  // Incidence lists include tombstoned edges; callers filter with alive().
  std::span<const EdgeId> out_edges(Vertex v) const { check_vertex(v); return out_[v]; }
  std::span<const EdgeId> in_edges(Vertex v) const { check_vertex(v); return in_[v]; }

  void check_vertex(Vertex v) const {
    if (v < 0 || v >= n_) throw BoundsError("vertex " + std::to_string(v) + " out of range");
  }
  void check_edge(EdgeId e) const {
    if (e < 0 || e >= static_cast<EdgeId>(tails_.size()))
      throw BoundsError("edge " + std::to_string(e) + " out of range");
  }

private:
  int n_ = 0;
  std::vector<Vertex> tails_, heads_;
  std::vector<char> alive_;
  std::vector<std::vector<EdgeId>> out_, in_;
  std::vector<int64_t> deg_;
  int64_t alive_count_ = 0;
};

// Orientation view. reverse(reverse(G)) == G by construction; EdgeIds are
// those of the base graph.
struct GraphView {
  const DiGraph* g = nullptr;
  bool reversed = false;

  int n() const { return g->n(); }
  int edge_rows() const { return g->edge_rows(); }
  int64_t alive_edges() const { return g->alive_edges(); }
  Vertex tail(EdgeId e) const { return reversed ? g->head(e) : g->tail(e); }
  Vertex head(EdgeId e) const { return reversed ? g->tail(e) : g->head(e); }
  bool alive(EdgeId e) const { return g->alive(e); }
  int64_t degree(Vertex v) const { return g->degree(v); }
  std::span<const EdgeId> out_edges(Vertex v) const {
    return reversed ? g->in_edges(v) : g->out_edges(v);
  }
  std::span<const EdgeId> in_edges(Vertex v) const {
    return reversed ? g->out_edges(v) : g->in_edges(v);
  }
};

inline GraphView view_of(const DiGraph& g) { return GraphView{&g, false}; }
inline GraphView reverse(GraphView v) { return GraphView{v.g, !v.reversed}; }

// View of G[V-tilde]: only alive edges with both endpoints inside.
struct InducedView {
  GraphView base;
  std::vector<char> mask;  // size base.n()

  bool contains(Vertex v) const { return mask[v] != 0; }
  bool edge_alive(EdgeId e) const {
    return base.alive(e) && mask[base.tail(e)] && mask[base.head(e)];
  }
  int64_t alive_edges() const;
  int64_t degree(Vertex v) const;  // within the induced subgraph
};

InducedView induce(GraphView g, std::span<const Vertex> vtilde);

CutStats cut_stats(GraphView g, std::span<const Vertex> s);
CutStats cut_stats(const InducedView& g, std::span<const Vertex> s);

int64_t volume(GraphView g, std::span<const Vertex> s);

// True iff the alive edges contain no directed cycle; a self-loop is a cycle.
bool is_dag(GraphView g);

// (G minus drop) / classes. classes must partition V(G); intra-class and
// dropped edges are omitted, parallel edges kept, class i becomes vertex i.
DiGraph contract(GraphView g, const std::vector<std::vector<Vertex>>& classes,
                 std::span<const EdgeId> drop);

// Alive subgraph induced on verts, materialized with id maps back to base.
struct Subgraph {
  DiGraph graph;
  std::vector<Vertex> to_base_vertex;    // local -> base
  std::vector<Vertex> from_base_vertex;  // base -> local or -1
  std::vector<EdgeId> to_base_edge;      // local -> base
};

Subgraph materialize(GraphView g, std::span<const Vertex> verts);

// Edge-list text format: optional "n m" header, then "u v" per line,
// '#'-prefixed comments allowed.
DiGraph parse_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const DiGraph& g);

// Deletion stream: one EdgeId per line, applied in order; '#' comments.
std::vector<EdgeId> parse_deletion_stream(std::istream& in, const DiGraph& g);

}  // namespace exdir
