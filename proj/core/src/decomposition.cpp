#include "exdir/decomposition.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <future>

#include "exdir/rng.hpp"
#include "exdir/verification.hpp"
#include "nlohmann/json.hpp"

namespace exdir {

namespace {

thread_local int64_t t_work = 0;

uint64_t hash_verts(std::span<const Vertex> verts) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (Vertex v : verts) {
    h ^= static_cast<uint64_t>(v) + 1;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rational degraded_phi(Rational phi, Rational psi) {
  return phi * psi * psi * psi * psi / Rational(400);
}
Rational degraded_psi(Rational psi) { return psi * psi / Rational(20); }

struct SubResult {
  std::vector<Cluster> clusters;
  std::vector<int> order;  // indices into clusters
  std::vector<EdgeId> e_r;
  Rational psi_min{1, 2};
  int64_t work = 0;
};

void merge_into(SubResult& into, SubResult piece) {
  int off = static_cast<int>(into.clusters.size());
  for (auto& c : piece.clusters) into.clusters.push_back(std::move(c));
  for (int id : piece.order) into.order.push_back(id + off);
  into.e_r.insert(into.e_r.end(), piece.e_r.begin(), piece.e_r.end());
  into.psi_min = std::min(into.psi_min, piece.psi_min);
  into.work += piece.work;
}

Cluster make_trivial(Vertex v, Rational phi) {
  Cluster c;
  c.verts = {v};
  c.phi = phi;
  c.psi = Rational(1, 2);
  return c;
}

// Remaps a witness over a materialized subgraph back to host ids.
Witness remap_witness(const Witness& w, const Subgraph& sub, int host_n, int host_edge_rows) {
  Witness out(host_n);
  for (int i = 0; i < w.edge_rows(); ++i) {
    if (!w.alive(i)) continue;
    const auto& we = w.edge(i);
    std::vector<EdgeId> path;
    path.reserve(we.path.size());
    for (EdgeId e : we.path) {
      assert(e < static_cast<EdgeId>(sub.to_base_edge.size()) && "fake edge escaped into witness");
      path.push_back(sub.to_base_edge[e]);
    }
    out.add_edge(sub.to_base_vertex[we.tail], sub.to_base_vertex[we.head], std::move(path));
  }
  out.finalize(host_edge_rows);
  return out;
}

SubResult decompose_rec(const DiGraph& host, std::vector<Vertex> verts, Rational phi,
                        const DecompConfig& cfg, int depth);

SubResult decompose_certified(const DiGraph& host, const Subgraph& sub, Certified cert,
                              Rational phi, const DecompConfig& cfg, int depth) {
  SubResult res;
  DiGraph aug = std::move(cert.augmented);
  const int64_t m_aug = aug.alive_edges();
  std::vector<EdgeId> fake_ids;
  for (const auto& f : cert.fakes) fake_ids.push_back(f.id);

  BiPruning bp(aug, std::move(cert.bw), phi, cert.psi_out,
               std::min(h_default(m_aug, phi), cfg.h_max));
  if (!fake_ids.empty()) bp.remove_edges(fake_ids);

  const bool pristine = fake_ids.empty() && bp.fwd().prunes().empty() &&
                        bp.bwd().prunes().empty();
  int core_cluster = -1;
  std::vector<Vertex> core = bp.core();
  if (!core.empty()) {
    Cluster c;
    c.verts.reserve(core.size());
    for (Vertex v : core) c.verts.push_back(sub.to_base_vertex[v]);
    if (c.verts.size() > 1) {
      BiWitness ext = bp.extract_witnesses();
      // The extracted paths avoid deleted (fake) edges; localize via a
      // temporary subgraph view of aug restricted to the real edge range.
      Subgraph shim;
      shim.to_base_vertex = sub.to_base_vertex;
      shim.to_base_edge = sub.to_base_edge;
      c.witness = BiWitness{remap_witness(ext.fwd, shim, host.n(), host.edge_rows()),
                            remap_witness(ext.bwd, shim, host.n(), host.edge_rows())};
    }
    if (pristine) {
      c.phi = phi;
      c.psi = cert.psi_out;
    } else {
      c.phi = degraded_phi(phi, cert.psi_out);
      c.psi = degraded_psi(cert.psi_out);
    }
    res.psi_min = std::min(res.psi_min, c.verts.size() > 1 ? c.psi : Rational(1, 2));
    res.clusters.push_back(std::move(c));
    core_cluster = 0;
  }
  for (EdgeId e : bp.e_r()) {
    assert(e < static_cast<EdgeId>(sub.to_base_edge.size()));
    res.e_r.push_back(sub.to_base_edge[e]);
  }
  res.work += bp.fwd().engine().counters().work() + bp.bwd().engine().counters().work();

  // Block order: backward prunes, core, forward prunes (latest first).
  for (const auto& block : bp.ordered_blocks()) {
    if (block.is_core) {
      if (core_cluster >= 0) res.order.push_back(core_cluster);
      continue;
    }
    if (block.verts.empty()) continue;
    std::vector<Vertex> host_verts;
    host_verts.reserve(block.verts.size());
    for (Vertex v : block.verts) host_verts.push_back(sub.to_base_vertex[v]);
    merge_into(res, decompose_rec(host, std::move(host_verts), phi, cfg, depth + 1));
  }
  return res;
}

SubResult decompose_rec(const DiGraph& host, std::vector<Vertex> verts, Rational phi,
                        const DecompConfig& cfg, int depth) {
  SubResult res;
  if (verts.empty()) return res;
  if (verts.size() == 1) {
    res.clusters.push_back(make_trivial(verts[0], phi));
    res.order.push_back(0);
    return res;
  }
  Subgraph sub = materialize(view_of(host), verts);
  if (sub.graph.alive_edges() == 0) {
    for (size_t i = 0; i < verts.size(); ++i) {
      res.clusters.push_back(make_trivial(sub.to_base_vertex[i], phi));
      res.order.push_back(static_cast<int>(i));
    }
    return res;
  }
  OracleConfig ocfg = cfg.oracle;
  ocfg.seed = Rng::derive(cfg.oracle.seed, hash_verts(sub.to_base_vertex));
  CutOrWitness result = [&]() -> CutOrWitness {
    try {
      return run_oracle(view_of(sub.graph), phi, ocfg, cfg.kind);
    } catch (const OracleFailure&) {
      if (sub.graph.n() <= kExactLimit) return brute_force_oracle(view_of(sub.graph), phi, ocfg);
      throw;
    }
  }();

  auto handle_cut = [&](const BalancedCut& cut) {
    std::vector<char> in_a(sub.graph.n(), 0);
    for (Vertex v : cut.a) in_a[v] = 1;
    std::vector<Vertex> a_host, b_host;
    for (Vertex v = 0; v < sub.graph.n(); ++v)
      (in_a[v] ? a_host : b_host).push_back(sub.to_base_vertex[v]);
    for (EdgeId e = 0; e < sub.graph.edge_rows(); ++e) {
      bool ta = in_a[sub.graph.tail(e)], ha = in_a[sub.graph.head(e)];
      bool is_cut = cut.cut_is_fwd ? (ta && !ha) : (!ta && ha);
      if (is_cut) res.e_r.push_back(sub.to_base_edge[e]);
    }
    SubResult ra, rb;
    if (cfg.threads > 1 && depth < cfg.parallel_depth) {
      auto fut = std::async(std::launch::async, [&]() {
        t_work = 0;
        SubResult r = decompose_rec(host, a_host, phi, cfg, depth + 1);
        r.work += t_work;
        return r;
      });
      rb = decompose_rec(host, b_host, phi, cfg, depth + 1);
      ra = fut.get();
    } else {
      ra = decompose_rec(host, a_host, phi, cfg, depth + 1);
      rb = decompose_rec(host, b_host, phi, cfg, depth + 1);
    }
    // Surviving cross edges point from the first block to the second.
    if (cut.cut_is_fwd) {
      merge_into(res, std::move(rb));
      merge_into(res, std::move(ra));
    } else {
      merge_into(res, std::move(ra));
      merge_into(res, std::move(rb));
    }
  };

  if (std::holds_alternative<BalancedCut>(result)) {
    handle_cut(std::get<BalancedCut>(result));
    return res;
  }

  Certified& cert = std::get<Certified>(result);
  // Pruning guard precheck: the oracle's fake set must fit the budget.
  std::vector<EdgeId> fake_ids;
  for (const auto& f : cert.fakes) fake_ids.push_back(f.id);
  int64_t k_fwd = static_cast<int64_t>(cert.bw.fwd.preimage(fake_ids).size());
  int64_t k_bwd = static_cast<int64_t>(cert.bw.bwd.preimage(fake_ids).size());
  Rational lhs = Rational(4) / cert.psi_out * Rational(std::max(k_fwd, k_bwd));
  if (!fake_ids.empty() && !(lhs < Rational(cert.augmented.alive_edges()) / Rational(14))) {
    if (sub.graph.n() <= kExactLimit) {
      CutOrWitness again = brute_force_oracle(view_of(sub.graph), phi, ocfg);
      if (std::holds_alternative<BalancedCut>(again)) {
        handle_cut(std::get<BalancedCut>(again));
        return res;
      }
      cert = std::move(std::get<Certified>(again));
    } else {
      throw OracleFailure("certified fake set exceeds the pruning budget");
    }
  }
  merge_into(res, decompose_certified(host, sub, std::move(cert), phi, cfg, depth));
  return res;
}

}  // namespace

int64_t last_decomposition_work() { return t_work; }

Decomposition expander_decomposition(const DiGraph& host, Rational phi,
                                     const DecompConfig& cfg) {
  if (phi.num <= 0) throw ContractViolation("expander_decomposition: phi must be positive");
  std::vector<Vertex> all(host.n());
  for (Vertex v = 0; v < host.n(); ++v) all[v] = v;
  t_work = 0;
  SubResult r = decompose_rec(host, std::move(all), phi, cfg, 0);
  Decomposition d;
  d.phi = phi;
  d.psi = r.psi_min;
  double l2 = std::log2(static_cast<double>(std::max<int64_t>(host.alive_edges(), 2)));
  d.beta = Rational(static_cast<int64_t>(std::ceil(cfg.beta_c1 * std::pow(l2, 6))));
  d.clusters = std::move(r.clusters);
  d.order = std::move(r.order);
  d.e_r = std::move(r.e_r);
  std::sort(d.e_r.begin(), d.e_r.end());
  d.e_r.erase(std::unique(d.e_r.begin(), d.e_r.end()), d.e_r.end());
  for (EdgeId e = 0; e < host.edge_rows(); ++e)
    if (!host.alive(e)) d.deleted.push_back(e);
  t_work += r.work;
  return d;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json witness_json_obj(const Witness& w) {
  nlohmann::ordered_json j;
  j["n"] = w.n();
  auto& arr = j["w_edges"] = nlohmann::ordered_json::array();
  for (int i = 0; i < w.edge_rows(); ++i) {
    if (!w.alive(i)) continue;
    const auto& we = w.edge(i);
    nlohmann::ordered_json je;
    je["tail"] = we.tail;
    je["head"] = we.head;
    je["path"] = we.path;
    arr.push_back(std::move(je));
  }
  return j;
}

Witness witness_from_obj(const nlohmann::json& j, int host_n, int host_edge_rows) {
  Witness w(host_n);
  for (const auto& je : j.at("w_edges")) {
    std::vector<EdgeId> path = je.at("path").get<std::vector<EdgeId>>();
    for (EdgeId e : path)
      if (e < 0 || e >= host_edge_rows) throw ParseError("witness path edge out of range");
    w.add_edge(je.at("tail").get<Vertex>(), je.at("head").get<Vertex>(), std::move(path));
  }
  w.finalize(host_edge_rows);
  return w;
}

}  // namespace

std::string Decomposition::to_json(bool include_witnesses) const {
  nlohmann::ordered_json j;
  j["params"] = {{"beta", beta.str()}, {"phi", phi.str()}, {"psi", psi.str()}};
  // compact ids: emit only live clusters, in id order, remapping order refs
  std::vector<int> remap(clusters.size(), -1);
  auto& arr = j["clusters"] = nlohmann::ordered_json::array();
  int next = 0;
  for (size_t i = 0; i < clusters.size(); ++i) {
    const Cluster& c = clusters[i];
    if (c.verts.empty()) continue;
    remap[i] = next++;
    nlohmann::ordered_json jc;
    jc["id"] = remap[i];
    jc["vertices"] = c.verts;
    jc["phi"] = c.phi.str();
    jc["psi"] = c.psi.str();
    if (include_witnesses && c.witness.has_value()) {
      jc["witness"] = {{"fwd", witness_json_obj(c.witness->fwd)},
                       {"bwd", witness_json_obj(c.witness->bwd)}};
    }
    arr.push_back(std::move(jc));
  }
  auto& jo = j["order"] = nlohmann::ordered_json::array();
  for (int id : order) {
    assert(remap[id] >= 0);
    jo.push_back(remap[id]);
  }
  j["e_r"] = e_r;
  j["deleted"] = deleted;
  return j.dump(2);
}

Decomposition Decomposition::from_json(const std::string& text, const DiGraph& host) {
  nlohmann::json j = nlohmann::json::parse(text);
  Decomposition d;
  d.beta = Rational::parse(j.at("params").at("beta").get<std::string>());
  d.phi = Rational::parse(j.at("params").at("phi").get<std::string>());
  d.psi = Rational::parse(j.at("params").at("psi").get<std::string>());
  for (const auto& jc : j.at("clusters")) {
    Cluster c;
    c.verts = jc.at("vertices").get<std::vector<Vertex>>();
    for (Vertex v : c.verts) host.check_vertex(v);
    c.phi = Rational::parse(jc.at("phi").get<std::string>());
    c.psi = Rational::parse(jc.at("psi").get<std::string>());
    if (jc.contains("witness")) {
      c.witness = BiWitness{
          witness_from_obj(jc.at("witness").at("fwd"), host.n(), host.edge_rows()),
          witness_from_obj(jc.at("witness").at("bwd"), host.n(), host.edge_rows())};
    }
    int id = jc.at("id").get<int>();
    if (id != static_cast<int>(d.clusters.size()))
      throw ParseError("decomposition json: cluster ids must be dense and ordered");
    d.clusters.push_back(std::move(c));
  }
  d.order = j.at("order").get<std::vector<int>>();
  d.e_r = j.at("e_r").get<std::vector<EdgeId>>();
  for (EdgeId e : d.e_r) host.check_edge(e);
  d.deleted = j.at("deleted").get<std::vector<EdgeId>>();
  for (EdgeId e : d.deleted) host.check_edge(e);
  return d;
}

// ---------------------------------------------------------------------------

DynamicDecomposition::DynamicDecomposition(DiGraph& host, Decomposition d, DecompConfig cfg)
    : host_(&host), d_(std::move(d)), cfg_(std::move(cfg)) {
  owner_.assign(host.n(), -1);
  for (size_t ci = 0; ci < d_.clusters.size(); ++ci)
    for (Vertex v : d_.clusters[ci].verts) owner_[v] = static_cast<int>(ci);
  for (Vertex v = 0; v < host.n(); ++v)
    if (owner_[v] < 0) throw ContractViolation("dynamic: clusters do not cover V");
  rt_.resize(d_.clusters.size());
  for (size_t ci = 0; ci < d_.clusters.size(); ++ci) build_runtime(static_cast<int>(ci));
  threshold_ = std::max<int64_t>(
      1, ceil_of(cfg_.restart_c * d_.phi * d_.psi * Rational(host.alive_edges())));
}

void DynamicDecomposition::build_runtime(int cid) {
  const Cluster& c = d_.clusters[cid];
  if (c.trivial()) return;
  if (!c.witness.has_value())
    throw ContractViolation("dynamic: non-trivial cluster without witness");
  auto rt = std::make_unique<Runtime>();
  rt->sub = materialize(view_of(*host_), c.verts);
  std::vector<EdgeId> from_base_edge(host_->edge_rows(), -1);
  for (size_t i = 0; i < rt->sub.to_base_edge.size(); ++i) {
    from_base_edge[rt->sub.to_base_edge[i]] = static_cast<EdgeId>(i);
    rt->host_to_local[rt->sub.to_base_edge[i]] = static_cast<EdgeId>(i);
  }
  auto localize = [&](const Witness& w) {
    Witness lw(rt->sub.graph.n());
    for (int i = 0; i < w.edge_rows(); ++i) {
      if (!w.alive(i)) continue;
      const auto& we = w.edge(i);
      Vertex t = rt->sub.from_base_vertex[we.tail], h = rt->sub.from_base_vertex[we.head];
      if (t < 0 || h < 0) throw ContractViolation("dynamic: witness endpoint outside cluster");
      std::vector<EdgeId> path;
      for (EdgeId e : we.path) {
        EdgeId le = from_base_edge[e];
        if (le < 0) throw ContractViolation("dynamic: witness path leaves the cluster");
        path.push_back(le);
      }
      lw.add_edge(t, h, std::move(path));
    }
    lw.finalize(rt->sub.graph.edge_rows());
    return lw;
  };
  BiWitness local{localize(c.witness->fwd), localize(c.witness->bwd)};
  int64_t h = std::min(h_default(rt->sub.graph.alive_edges(), c.phi), cfg_.h_max);
  rt->bp.emplace(rt->sub.graph, std::move(local), c.phi, c.psi, h);
  rt_[cid] = std::move(rt);
}

int DynamicDecomposition::order_pos(int cid) const {
  for (size_t i = 0; i < d_.order.size(); ++i)
    if (d_.order[i] == cid) return static_cast<int>(i);
  return -1;
}

void DynamicDecomposition::remove_edge(EdgeId d) {
  host_->check_edge(d);
  if (!host_->alive(d)) throw ParseError("deletion references dead edge " + std::to_string(d));
  if (deletions_ >= threshold_) throw RestartRequired("epoch deletion budget reached");
  host_->kill_edge(d);
  deleted_epoch_.push_back(d);
  d_.deleted.push_back(d);
  ++deletions_;
  Vertex t = host_->tail(d), h = host_->head(d);
  if (owner_[t] != owner_[h]) return;  // inter-cluster (possibly E^r): tombstone only
  int cid = owner_[t];
  if (!rt_[cid]) return;  // trivial cluster self-loop
  Runtime& rt = *rt_[cid];
  auto it = rt.host_to_local.find(d);
  assert(it != rt.host_to_local.end());
  try {
    std::vector<EdgeId> one{it->second};
    rt.bp->remove_edges(one);
  } catch (const BudgetExceeded&) {
    rebuild_cluster(cid);
    return;
  }
  absorb_new_prunes(cid);
}

void DynamicDecomposition::splice(int cid, bool before, const Subgraph& piece,
                                  Decomposition sub) {
  // import clusters and e_r from a sub-decomposition over `piece`
  std::vector<int> new_ids(sub.clusters.size(), -1);
  for (size_t i = 0; i < sub.clusters.size(); ++i) {
    Cluster& c = sub.clusters[i];
    if (c.verts.empty()) continue;
    Cluster mapped;
    mapped.phi = c.phi;
    mapped.psi = c.psi;
    for (Vertex v : c.verts) mapped.verts.push_back(piece.to_base_vertex[v]);
    if (c.witness.has_value()) {
      mapped.witness =
          BiWitness{remap_witness(c.witness->fwd, piece, host_->n(), host_->edge_rows()),
                    remap_witness(c.witness->bwd, piece, host_->n(), host_->edge_rows())};
    }
    new_ids[i] = static_cast<int>(d_.clusters.size());
    for (Vertex v : mapped.verts) owner_[v] = new_ids[i];
    if (!mapped.trivial()) d_.psi = std::min(d_.psi, mapped.psi);
    d_.clusters.push_back(std::move(mapped));
    rt_.push_back(nullptr);
  }
  for (EdgeId e : sub.e_r) d_.e_r.push_back(piece.to_base_edge[e]);
  int pos = order_pos(cid);
  assert(pos >= 0);
  std::vector<int> seg;
  for (int id : sub.order)
    if (new_ids[id] >= 0) seg.push_back(new_ids[id]);
  d_.order.insert(d_.order.begin() + (before ? pos : pos + 1), seg.begin(), seg.end());
  for (int id : seg)
    if (!d_.clusters[id].trivial()) build_runtime(id);
}

void DynamicDecomposition::absorb_new_prunes(int cid) {
  Runtime& rt = *rt_[cid];
  BiPruning& bp = *rt.bp;
  // new E^r contributions, stable order
  auto take_er = [&](const DirPruning& dp, size_t& seen) {
    for (; seen < dp.e_r().size(); ++seen)
      d_.e_r.push_back(rt.sub.to_base_edge[dp.e_r()[seen]]);
  };
  take_er(bp.fwd(), rt.fwd_er_seen);
  take_er(bp.bwd(), rt.bwd_er_seen);

  // new pruned sets: re-decompose and splice around the core. A vertex can
  // show up in both directions' prune records; ownership settles the claim.
  auto handle = [&](const DirPruning& dp, size_t& seen, bool backward) {
    for (; seen < dp.prunes().size(); ++seen) {
      std::vector<Vertex> host_verts;
      for (Vertex v : dp.prunes()[seen].verts) {
        Vertex hv = rt.sub.to_base_vertex[v];
        if (owner_[hv] == cid) host_verts.push_back(hv);
      }
      if (host_verts.empty()) continue;
      for (Vertex hv : host_verts) owner_[hv] = -2;  // leaving cid; splice() re-owns
      Subgraph piece = materialize(view_of(*host_), host_verts);
      Decomposition subd = expander_decomposition(piece.graph, d_.phi, cfg_);
      splice(cid, backward, piece, std::move(subd));
    }
  };
  handle(bp.fwd(), rt.fwd_prunes_seen, /*backward=*/false);
  handle(bp.bwd(), rt.bwd_prunes_seen, /*backward=*/true);

  // refresh the core cluster
  std::vector<Vertex> core;
  for (Vertex v : bp.core()) core.push_back(rt.sub.to_base_vertex[v]);
  Cluster& c = d_.clusters[cid];
  if (core.empty()) {
    c.verts.clear();
    c.witness.reset();
    int pos = order_pos(cid);
    if (pos >= 0) d_.order.erase(d_.order.begin() + pos);
    rt_[cid].reset();
    return;
  }
  c.verts = core;
  if (core.size() > 1) {
    BiWitness ext = bp.extract_witnesses();
    c.witness = BiWitness{remap_witness(ext.fwd, rt.sub, host_->n(), host_->edge_rows()),
                          remap_witness(ext.bwd, rt.sub, host_->n(), host_->edge_rows())};
    c.phi = degraded_phi(bp.fwd().phi(), bp.fwd().psi());
    c.psi = degraded_psi(bp.fwd().psi());
    d_.psi = std::min(d_.psi, c.psi);
  } else {
    c.witness.reset();
    rt_[cid].reset();
  }
}

void DynamicDecomposition::rebuild_cluster(int cid) {
  std::vector<Vertex> verts = d_.clusters[cid].verts;
  Subgraph piece = materialize(view_of(*host_), verts);
  Decomposition subd = expander_decomposition(piece.graph, d_.phi, cfg_);
  splice(cid, /*before=*/false, piece, std::move(subd));
  Cluster& c = d_.clusters[cid];
  c.verts.clear();
  c.witness.reset();
  int pos = order_pos(cid);
  if (pos >= 0) d_.order.erase(d_.order.begin() + pos);
  rt_[cid].reset();
}

MaintainStats maintain(
    DiGraph& host, Rational phi, std::span<const EdgeId> stream, const DecompConfig& cfg,
    const std::function<void(const Decomposition&, int64_t step, int64_t epoch)>& on_snapshot) {
  MaintainStats stats;
  int64_t epoch = 0;
  auto dd = std::make_unique<DynamicDecomposition>(
      host, expander_decomposition(host, phi, cfg), cfg);
  if (on_snapshot) on_snapshot(dd->current(), -1, epoch);
  for (size_t i = 0; i < stream.size(); ++i) {
    try {
      dd->remove_edge(stream[i]);
    } catch (const RestartRequired&) {
      ++epoch;
      ++stats.restarts;
      dd = std::make_unique<DynamicDecomposition>(
          host, expander_decomposition(host, phi, cfg), cfg);
      dd->remove_edge(stream[i]);
    }
    ++stats.deletions;
    if (on_snapshot) on_snapshot(dd->current(), static_cast<int64_t>(i), epoch);
  }
  return stats;
}

}  // namespace exdir
