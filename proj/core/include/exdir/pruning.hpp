#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "exdir/flow.hpp"
#include "exdir/graph.hpp"
#include "exdir/rational.hpp"
#include "exdir/witness.hpp"

namespace exdir {

// The level sweep behind PruneOrCertify, as a pure function: starting from
// the top level h, absorb whole levels into S and stop at the first i with
// vol({l >= i}) < (1 + phi) * vol(S). Degrees are those of the graph the
// cut is certified on; vertices outside in_tilde are ignored. Returns S
// ascending. Requires a level-h vertex.
std::vector<Vertex> prune_sweep(std::span<const int64_t> level, std::span<const int64_t> degree,
                                std::span<const char> in_tilde, Rational phi, int64_t h);

// One set pruned off by AdjustPartition, in prune order.
struct PruneRecord {
  std::vector<Vertex> verts;  // ascending
  int64_t vol_g;              // volume under the instance's original degrees
  int64_t vol_w0;             // volume under the original witness degrees
  int64_t er_added;
};

// Event log line for the benchmark harness: direction, |S|, vol_G(S),
// |E^r| delta.
struct PruneEvent {
  bool backward;
  int64_t size;
  int64_t vol_g;
  int64_t er_delta;
};

// One-directional expander pruning: maintains a valid flow state over
// (G \ D)[V-tilde] with capacity ceil(16/(phi psi^2)) per edge and sink
// deg_W, injects ceil(4/psi) units of source per endpoint of every witness
// edge lost to a deletion or to the boundary of a vertex removal, and peels
// level-h vertices off via PruneOrCertify until none remain.
class DirPruning {
public:
  DirPruning(GraphView g, Witness witness, Rational phi, Rational psi, int64_t h,
             bool backward = false);

  // |live preimage| of d; the budget guard is
  // (4/psi) * (preimage_deleted + increment) < e0 / 14.
  int64_t guard_increment(std::span<const EdgeId> d) const;
  bool guard_allows(int64_t increment) const;

  // D must consist of alive, undeleted edges inside V-tilde.
  void remove_edges(std::span<const EdgeId> d);
  // External removal: s joins the removed set (not the pruned partition).
  void remove_vertices(std::span<const Vertex> s);

  // Rebuilds the certificate witness from W0 plus a unit-path decomposition
  // of the current flow; requires no level-h vertex.
  Witness extract_witness() const;

  bool in_tilde(Vertex v) const { return engine_->in_tilde(v); }
  std::vector<Vertex> tilde_vertices() const;
  int64_t tilde_size() const { return tilde_size_; }
  const std::vector<PruneRecord>& prunes() const { return prunes_; }
  const std::vector<EdgeId>& e_r() const { return e_r_; }
  const std::vector<PruneEvent>& event_log() const { return events_; }
  const Witness& witness() const { return wit_; }
  const FlowEngine& engine() const { return *engine_; }
  bool deleted(EdgeId e) const { return deleted_[e] != 0; }
  int64_t preimage_deleted() const { return preimage_deleted_; }
  int64_t preimage_boundary_external() const { return preimage_sboundary_; }
  int64_t initial_edges() const { return e0_; }
  int64_t cap_unit() const { return cap_unit_; }
  int64_t src_unit() const { return src_unit_; }
  Rational phi() const { return phi_; }
  Rational psi() const { return psi_; }
  GraphView graph() const { return g_; }
  int64_t witness_volume0(std::span<const Vertex> s) const;

private:
  void remove_vertices_impl(std::span<const Vertex> s);
  void adjust_partition();
  std::vector<Vertex> prune_or_certify() const;

  GraphView g_;
  Rational phi_, psi_;
  int64_t h_;
  bool backward_;
  int64_t cap_unit_, src_unit_;
  Witness wit_;
  std::vector<int64_t> wdeg0_;
  std::optional<FlowEngine> engine_;
  std::vector<char> deleted_;
  std::vector<char> in_s_;  // externally removed
  std::vector<PruneRecord> prunes_;
  std::vector<EdgeId> e_r_;
  std::vector<PruneEvent> events_;
  int64_t tilde_size_ = 0;
  int64_t e0_ = 0;
  int64_t preimage_deleted_ = 0;
  int64_t preimage_sboundary_ = 0;
};

// Bidirected pruning: a forward instance on the host orientation and a
// backward instance on the reversed view, kept in lockstep ­— after every
// operation both active sets agree.
class BiPruning {
public:
  BiPruning(const DiGraph& host, BiWitness bw, Rational phi, Rational psi, int64_t h);

  void remove_edges(std::span<const EdgeId> d);

  std::vector<Vertex> core() const { return fwd_.tilde_vertices(); }
  int64_t core_size() const { return fwd_.tilde_size(); }
  const DirPruning& fwd() const { return fwd_; }
  const DirPruning& bwd() const { return bwd_; }

  // All pruned sets with their DAG-order position: backward prunes in prune
  // order, then the core, then forward prunes in reverse prune order.
  struct Block {
    std::vector<Vertex> verts;
    bool backward;
    bool is_core;
  };
  std::vector<Block> ordered_blocks() const;

  // E^r as a host EdgeId set (both instances merged).
  std::vector<EdgeId> e_r() const;

  BiWitness extract_witnesses() const;

  int64_t preimage_deleted_total() const {
    return fwd_.preimage_deleted() + bwd_.preimage_deleted();
  }

private:
  void sync();

  DirPruning fwd_, bwd_;
};

}  // namespace exdir
