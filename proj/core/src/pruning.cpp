#include "exdir/pruning.hpp"

#include <algorithm>
#include <cassert>

namespace exdir {

DirPruning::DirPruning(GraphView g, Witness witness, Rational phi, Rational psi, int64_t h,
                       bool backward)
    : g_(g), phi_(phi), psi_(psi), h_(h), backward_(backward), wit_(std::move(witness)) {
  if (phi_.num <= 0 || psi_.num <= 0) throw ContractViolation("pruning: phi, psi must be positive");
  cap_unit_ = ceil_of(Rational(16) / (phi_ * psi_ * psi_));
  src_unit_ = ceil_of(Rational(4) / psi_);
  WitnessReport wr = verify_witness(g_, wit_, phi_, psi_, /*exact=*/false);
  if (!wr.ok())
    throw ContractViolation("pruning: witness error: " + wr.issues.front().check + ": " +
                            wr.issues.front().detail);
  wdeg0_.assign(g_.n(), 0);
  std::vector<int64_t> snk(g_.n(), 0);
  for (Vertex v = 0; v < g_.n(); ++v) wdeg0_[v] = snk[v] = wit_.degree(v);
  deleted_.assign(g_.edge_rows(), 0);
  in_s_.assign(g_.n(), 0);
  e0_ = g_.alive_edges();
  tilde_size_ = g_.n();
  engine_.emplace(g_, cap_unit_, std::move(snk), h_);
  // Init routes nothing (sources are zero), so no partition adjustment yet.
  assert(engine_->count_at_h() == 0 || h_ == 0);
}

int64_t DirPruning::guard_increment(std::span<const EdgeId> d) const {
  return static_cast<int64_t>(wit_.preimage(d).size());
}

bool DirPruning::guard_allows(int64_t increment) const {
  // 4/psi * (preimage_deleted + increment) < e0 / 14
  Rational lhs = Rational(4) / psi_ * Rational(preimage_deleted_ + increment);
  return lhs < Rational(e0_) / Rational(14);
}

std::vector<Vertex> DirPruning::tilde_vertices() const {
  std::vector<Vertex> out;
  out.reserve(tilde_size_);
  for (Vertex v = 0; v < g_.n(); ++v)
    if (engine_->in_tilde(v)) out.push_back(v);
  return out;
}

int64_t DirPruning::witness_volume0(std::span<const Vertex> s) const {
  int64_t vol = 0;
  for (Vertex v : s) vol += wdeg0_[v];
  return vol;
}

void DirPruning::remove_edges(std::span<const EdgeId> d) {
  for (EdgeId e : d) {
    g_.g->check_edge(e);
    if (!g_.alive(e) || deleted_[e] || !engine_->edge_in_network(e))
      throw ContractViolation("remove_edges: edge " + std::to_string(e) +
                              " not inside E(V-tilde) \\ D");
  }
  std::vector<int> killed = wit_.preimage(d);
  if (!guard_allows(static_cast<int64_t>(killed.size())))
    throw BudgetExceeded("pruning: 4/psi |Pi^-1(D)| budget exhausted");
  for (EdgeId e : d) deleted_[e] = 1;
  engine_->remove_edges(d);
  for (int w : killed) wit_.kill(w);
  preimage_deleted_ += static_cast<int64_t>(killed.size());
  std::vector<int64_t> delta(g_.n(), 0);
  for (int w : killed) {
    delta[wit_.edge(w).tail] += src_unit_;
    delta[wit_.edge(w).head] += src_unit_;
  }
  std::vector<std::pair<Vertex, int64_t>> dl;
  for (Vertex v = 0; v < g_.n(); ++v)
    if (delta[v] > 0) {
      assert(engine_->in_tilde(v) && "alive witness edge with endpoint outside V-tilde");
      dl.push_back({v, delta[v]});
    }
  engine_->increase_source(dl);
  adjust_partition();
}

void DirPruning::remove_vertices(std::span<const Vertex> s) {
  for (Vertex v : s) {
    g_.g->check_vertex(v);
    if (!engine_->in_tilde(v))
      throw ContractViolation("remove_vertices: vertex " + std::to_string(v) + " not active");
    in_s_[v] = 1;
  }
  int64_t before = preimage_sboundary_;
  remove_vertices_impl(s);
  (void)before;
  adjust_partition();
}

void DirPruning::remove_vertices_impl(std::span<const Vertex> s) {
  std::vector<char> rm(g_.n(), 0);
  for (Vertex v : s) rm[v] = 1;
  // Boundary edges E_{G \ D}(V-tilde \ S, S) in this instance's orientation.
  std::vector<EdgeId> boundary;
  for (Vertex v : s)
    for (EdgeId e : g_.in_edges(v)) {
      if (!engine_->edge_in_network(e)) continue;
      Vertex t = g_.tail(e);
      if (!rm[t]) boundary.push_back(e);
    }
  std::vector<int> killed_b = wit_.preimage(boundary);
  engine_->remove_vertices(s);
  tilde_size_ -= static_cast<int64_t>(s.size());
  std::vector<char> alive_mask(g_.n(), 0);
  for (Vertex v = 0; v < g_.n(); ++v) alive_mask[v] = engine_->in_tilde(v) ? 1 : 0;
  wit_.restrict_to(alive_mask, g_);
  preimage_sboundary_ += static_cast<int64_t>(killed_b.size());
  std::vector<int64_t> delta(g_.n(), 0);
  for (int w : killed_b) {
    Vertex a = wit_.edge(w).tail, b = wit_.edge(w).head;
    if (alive_mask[a]) delta[a] += src_unit_;
    if (alive_mask[b]) delta[b] += src_unit_;
  }
  std::vector<std::pair<Vertex, int64_t>> dl;
  for (Vertex v = 0; v < g_.n(); ++v)
    if (delta[v] > 0) dl.push_back({v, delta[v]});
  engine_->increase_source(dl);
}

void DirPruning::adjust_partition() {
  while (engine_->count_at_h() > 0) {
    std::vector<Vertex> s = prune_or_certify();
    assert(!s.empty());
    int64_t vol_g = 0;
    for (Vertex v : s) vol_g += g_.degree(v);
    std::vector<char> rm(g_.n(), 0);
    for (Vertex v : s) rm[v] = 1;
    std::vector<EdgeId> out_boundary;
    for (Vertex v : s)
      for (EdgeId e : g_.out_edges(v)) {
        if (!engine_->edge_in_network(e)) continue;
        if (!rm[g_.head(e)]) out_boundary.push_back(e);
      }
    e_r_.insert(e_r_.end(), out_boundary.begin(), out_boundary.end());
    prunes_.push_back(PruneRecord{s, vol_g, witness_volume0(s),
                                  static_cast<int64_t>(out_boundary.size())});
    events_.push_back(PruneEvent{backward_, static_cast<int64_t>(s.size()), vol_g,
                                 static_cast<int64_t>(out_boundary.size())});
    remove_vertices_impl(s);
  }
}

std::vector<Vertex> prune_sweep(std::span<const int64_t> level, std::span<const int64_t> degree,
                                std::span<const char> in_tilde, Rational phi, int64_t h) {
  std::vector<std::pair<int64_t, Vertex>> by_level;
  for (Vertex v = 0; v < static_cast<Vertex>(level.size()); ++v)
    if (in_tilde[v]) by_level.push_back({-level[v], v});
  std::sort(by_level.begin(), by_level.end());
  assert(!by_level.empty() && -by_level[0].first == h && "prune_sweep needs a level-h vertex");
  (void)h;
  std::vector<Vertex> s;
  int64_t vol_s = 0;
  size_t i = 0;
  const size_t total = by_level.size();
  // Absorb whole levels from the top; stop at the first i where
  // vol({l >= i}) < (1 + phi) * vol(S). Missing levels have volume zero, so
  // with vol(S) > 0 any gap below the current block stops the sweep.
  int64_t cur_level = -by_level[0].first;
  while (i < total) {
    int64_t lvl = -by_level[i].first;
    if (!s.empty()) {
      // check the gap levels (lvl_prev-1 down to lvl) and this block
      if (lvl < cur_level - 1 && vol_s > 0) break;
      int64_t block_vol = 0;
      size_t j = i;
      while (j < total && -by_level[j].first == lvl) {
        block_vol += degree[by_level[j].second];
        ++j;
      }
      // vol({l >= lvl}) = vol_s + block_vol < (1+phi) vol_s ?
      Rational lhs(vol_s + block_vol);
      Rational rhs = (Rational(1) + phi) * Rational(vol_s);
      if (lhs < rhs) break;
    }
    // absorb the block at lvl
    while (i < total && -by_level[i].first == lvl) {
      s.push_back(by_level[i].second);
      vol_s += degree[by_level[i].second];
      ++i;
    }
    cur_level = lvl;
  }
  std::sort(s.begin(), s.end());
  return s;
}

std::vector<Vertex> DirPruning::prune_or_certify() const {
  assert(engine_->count_at_h() > 0 && "prune_or_certify needs a level-h vertex");
  const int n = g_.n();
  std::vector<int64_t> level(n), degree(n);
  std::vector<char> tilde(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    level[v] = engine_->level(v);
    // Volumes in the sweep use the instance's original degrees: a vertex
    // whose whole neighborhood was deleted still weighs vol_G(v), which is
    // what keeps the sweep from swallowing the entire active set.
    degree[v] = g_.degree(v);
    tilde[v] = engine_->in_tilde(v) ? 1 : 0;
  }
  return prune_sweep(level, degree, tilde, phi_, h_);
}

Witness DirPruning::extract_witness() const {
  if (engine_->count_at_h() > 0)
    throw ContractViolation("extract_witness: a level-h vertex remains");
  Witness out(g_.n());
  for (int w = 0; w < wit_.edge_rows(); ++w) {
    if (!wit_.alive(w)) continue;
    const auto& we = wit_.edge(w);
    out.add_edge(we.tail, we.head, we.path);
  }
  std::vector<int64_t> remaining(g_.edge_rows(), 0);
  for (EdgeId e = 0; e < g_.edge_rows(); ++e)
    if (engine_->edge_in_network(e)) remaining[e] = engine_->flow(e);
  std::vector<int64_t> want(g_.n(), 0);
  for (Vertex v = 0; v < g_.n(); ++v) {
    if (!engine_->in_tilde(v)) continue;
    int64_t surplus = engine_->net_out(v);
    if (surplus < 0) surplus = 0;
    want[v] = std::min(surplus, engine_->source(v));
  }
  std::vector<UnitPath> paths = decompose_unit_paths(g_, remaining, want);
  std::vector<int64_t> started(g_.n(), 0);
  for (auto& p : paths) {
    assert(!p.edges.empty() && p.start != p.end);
    started[p.start]++;
    out.add_edge(p.start, p.end, std::move(p.edges));
  }
  for (Vertex v = 0; v < g_.n(); ++v) {
    if (!engine_->in_tilde(v)) continue;
    for (int64_t k = started[v]; k < engine_->source(v); ++k) out.add_self_loop(v);
  }
  out.finalize(g_.edge_rows());
  return out;
}

BiPruning::BiPruning(const DiGraph& host, BiWitness bw, Rational phi, Rational psi, int64_t h)
    : fwd_(view_of(host), std::move(bw.fwd), phi, psi, h, /*backward=*/false),
      bwd_(reverse(view_of(host)), std::move(bw.bwd), phi, psi, h, /*backward=*/true) {
  sync();  // idles: both active sets start full
}

void BiPruning::remove_edges(std::span<const EdgeId> d) {
  int64_t k1 = fwd_.guard_increment(d);
  int64_t k2 = bwd_.guard_increment(d);
  if (!fwd_.guard_allows(k1) || !bwd_.guard_allows(k2))
    throw BudgetExceeded("bidirected pruning: deletion budget exhausted");
  fwd_.remove_edges(d);
  bwd_.remove_edges(d);
  sync();
}

void BiPruning::sync() {
  while (true) {
    std::vector<Vertex> d1, d2;
    for (Vertex v = 0; v < fwd_.graph().n(); ++v) {
      bool a = fwd_.in_tilde(v), b = bwd_.in_tilde(v);
      if (a && !b) d1.push_back(v);
      if (b && !a) d2.push_back(v);
    }
    if (d1.empty() && d2.empty()) break;
    if (!d1.empty()) fwd_.remove_vertices(d1);
    if (!d2.empty()) bwd_.remove_vertices(d2);
  }
}

std::vector<BiPruning::Block> BiPruning::ordered_blocks() const {
  // Both instances may prune the same vertices before the sync loop informs
  // the other side; each vertex is emitted once, first claim wins.
  std::vector<char> claimed(fwd_.graph().n(), 0);
  for (Vertex v : core()) claimed[v] = 1;
  auto claim = [&](const std::vector<Vertex>& verts) {
    std::vector<Vertex> mine;
    for (Vertex v : verts)
      if (!claimed[v]) {
        claimed[v] = 1;
        mine.push_back(v);
      }
    return mine;
  };
  std::vector<Block> blocks;
  for (const auto& p : bwd_.prunes()) {
    std::vector<Vertex> verts = claim(p.verts);
    if (!verts.empty()) blocks.push_back(Block{std::move(verts), true, false});
  }
  blocks.push_back(Block{core(), false, true});
  std::vector<Block> fwd_blocks;
  for (const auto& p : fwd_.prunes()) {
    std::vector<Vertex> verts = claim(p.verts);
    if (!verts.empty()) fwd_blocks.push_back(Block{std::move(verts), false, false});
  }
  for (auto it = fwd_blocks.rbegin(); it != fwd_blocks.rend(); ++it)
    blocks.push_back(std::move(*it));
  return blocks;
}

std::vector<EdgeId> BiPruning::e_r() const {
  std::vector<EdgeId> ids(fwd_.e_r());
  ids.insert(ids.end(), bwd_.e_r().begin(), bwd_.e_r().end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

BiWitness BiPruning::extract_witnesses() const {
  return BiWitness{fwd_.extract_witness(), bwd_.extract_witness()};
}

}  // namespace exdir
