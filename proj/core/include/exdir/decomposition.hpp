#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "exdir/cut_oracle.hpp"
#include "exdir/graph.hpp"
#include "exdir/pruning.hpp"
#include "exdir/rational.hpp"
#include "exdir/witness.hpp"

namespace exdir {

// One expander cluster. Trivial clusters (singletons) carry no witness and
// are exempt from witness checks. An empty vertex set marks a retired
// cluster slot (ids stay stable for the dynamic structure).
struct Cluster {
  std::vector<Vertex> verts;  // host ids, ascending
  std::optional<BiWitness> witness;
  Rational phi{0, 1};
  Rational psi{0, 1};
  bool trivial() const { return verts.size() <= 1; }
};

struct Decomposition {
  Rational beta{1, 1};
  Rational phi{1, 10};
  Rational psi{1, 2};  // weakest cluster psi
  std::vector<Cluster> clusters;
  std::vector<int> order;  // non-empty cluster ids, upstream first
  std::vector<EdgeId> e_r;
  std::vector<EdgeId> deleted;

  std::string to_json(bool include_witnesses = true) const;
  static Decomposition from_json(const std::string& text, const DiGraph& host);
};

struct DecompConfig {
  OracleConfig oracle;
  OracleKind kind = OracleKind::Auto;
  double beta_c1 = 1.0;          // declared beta = ceil(c1 * log2(m)^6)
  Rational restart_c{1, 4};      // restart threshold = ceil(c * phi * psi * e)
  int64_t h_max = 100000;        // engine level cap for desk-scale feasibility
  int threads = 1;
  int parallel_depth = 3;
};

// Static decomposition: recurse on oracle cuts, certify-and-prune fake
// edges otherwise, recurse on pruned sets, splice sub-orders in place.
Decomposition expander_decomposition(const DiGraph& host, Rational phi, const DecompConfig& cfg);

// Work metric for scaling checks: flow-engine and oracle operation counts
// accumulated across the most recent expander_decomposition call on this
// thread (not wall clock).
int64_t last_decomposition_work();

// Dynamic maintenance under edge deletions: per-cluster pruning instances,
// re-decomposition of pruned-off sets, refinement within an epoch.
class DynamicDecomposition {
public:
  DynamicDecomposition(DiGraph& host, Decomposition d, DecompConfig cfg);

  // Tombstones d; forwards intra-cluster deletions to the owning cluster's
  // pruning state. Throws RestartRequired at the epoch threshold (before
  // mutating anything) and ParseError on a dead edge.
  void remove_edge(EdgeId d);

  const Decomposition& current() const { return d_; }
  int64_t deletions() const { return deletions_; }
  int64_t restart_threshold() const { return threshold_; }
  const std::vector<EdgeId>& deleted_this_epoch() const { return deleted_epoch_; }

private:
  struct Runtime {
    Subgraph sub;
    std::optional<BiPruning> bp;
    std::unordered_map<EdgeId, EdgeId> host_to_local;
    size_t fwd_prunes_seen = 0, bwd_prunes_seen = 0;
    size_t fwd_er_seen = 0, bwd_er_seen = 0;
  };

  void build_runtime(int cid);
  void absorb_new_prunes(int cid);
  void rebuild_cluster(int cid);
  void splice(int cid, bool before, const Subgraph& piece, Decomposition sub);
  int order_pos(int cid) const;

  DiGraph* host_;
  Decomposition d_;
  DecompConfig cfg_;
  std::vector<std::unique_ptr<Runtime>> rt_;
  std::vector<int> owner_;
  std::vector<EdgeId> deleted_epoch_;
  int64_t deletions_ = 0;
  int64_t threshold_ = 1;
};

struct MaintainStats {
  int64_t deletions = 0;
  int64_t restarts = 0;
  int64_t prune_events = 0;
  int64_t engine_work = 0;
};

// Builds the initial decomposition, applies the deletion stream, restarts
// from scratch when an epoch's budget is spent. on_snapshot runs after the
// initial build and after every deletion; epoch increments on restart.
MaintainStats maintain(
    DiGraph& host, Rational phi, std::span<const EdgeId> stream, const DecompConfig& cfg,
    const std::function<void(const Decomposition&, int64_t step, int64_t epoch)>& on_snapshot);

}  // namespace exdir
