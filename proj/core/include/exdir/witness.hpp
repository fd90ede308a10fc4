#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "exdir/graph.hpp"
#include "exdir/rational.hpp"

namespace exdir {

// Witness multigraph W plus embedding Pi into a host graph (in the host
// view's orientation). Self-loops carry empty paths and congest nothing;
// they exist only for degree accounting. Dead W-edges stay indexed so ids
// remain stable.
class Witness {
public:
  struct WEdge {
    Vertex tail, head;
    std::vector<EdgeId> path;  // host edges; empty iff tail == head
    bool alive = true;
  };

  Witness() = default;
  explicit Witness(int host_n) : n_(host_n) {}

  int add_edge(Vertex tail, Vertex head, std::vector<EdgeId> path);
  int add_self_loop(Vertex v) { return add_edge(v, v, {}); }

  // Builds the reverse indexes; call once after the last add_edge. Adding
  // more edges afterwards keeps the indexes current.
  void finalize(int host_edge_rows);

  int n() const { return n_; }
  int edge_rows() const { return static_cast<int>(edges_.size()); }
  const WEdge& edge(int w) const { return edges_[w]; }
  bool alive(int w) const { return edges_[w].alive; }
  int64_t alive_count() const { return alive_count_; }

  int64_t degree(Vertex v) const { return wdeg_[v]; }       // alive, loop counts 2
  int64_t congestion(EdgeId host_e) const { return congestion_[host_e]; }
  int64_t max_congestion() const;
  std::vector<int> users(EdgeId host_e) const;  // alive W-edges whose path uses host_e
  std::span<const int> incident(Vertex v) const { return vertex_inc_[v]; }

  // Alive W-edges whose path intersects d (the live preimage of d under Pi).
  std::vector<int> preimage(std::span<const EdgeId> d) const;

  // deg restricted to the sub-multigraph Pi^-1(d): endpoint counts of the
  // live preimage, one per endpoint.
  std::vector<int64_t> preimage_degree(std::span<const EdgeId> d) const;

  // Kills every alive W-edge whose path intersects d; returns the killed set.
  std::vector<int> remove_edges(std::span<const EdgeId> d);

  // Kills W-edges with an endpoint outside vert_alive or whose path uses a
  // host edge with an endpoint outside; returns the killed set.
  std::vector<int> restrict_to(const std::vector<char>& vert_alive, GraphView host);

  void kill(int w);

  int64_t total_volume(std::span<const Vertex> s) const;

private:
  int n_ = 0;
  std::vector<WEdge> edges_;
  int64_t alive_count_ = 0;
  std::vector<int64_t> wdeg_;
  std::vector<int64_t> congestion_;
  std::vector<std::vector<int>> users_;       // host EdgeId -> w ids (incl. dead)
  std::vector<std::vector<int>> vertex_inc_;  // vertex -> w ids (incl. dead)
  bool finalized_ = false;
};

struct BiWitness {
  Witness fwd;  // out-witness for the host orientation
  Witness bwd;  // out-witness for the reversed host
};

struct WitnessReport {
  struct Issue {
    std::string check;  // "path" | "congestion" | "degree" | "expansion"
    std::string detail;
  };
  std::vector<Issue> issues;
  bool ok() const { return issues.empty(); }
};

// Checks the witness definition against the host view: (a) every alive
// non-loop W-edge embeds along a simple alive path from its tail to its
// head; (b) congestion <= psi/phi; (c) deg_host(v) <= deg_W(v) <=
// deg_host(v)/psi; (d) exact mode only: W has no psi-out-sparse cut
// (requires host n <= 20).
WitnessReport verify_witness(GraphView host, const Witness& w, Rational phi, Rational psi,
                             bool exact);
// Host restricted to an induced vertex set.
WitnessReport verify_witness(const InducedView& host, const Witness& w, Rational phi,
                             Rational psi, bool exact);

// Materializes the alive W-edges as a DiGraph on the host's vertex set.
DiGraph witness_graph(const Witness& w);

std::string witness_to_json(const Witness& w);
Witness witness_from_json(const std::string& json_text, int host_n, int host_edge_rows);

}  // namespace exdir
