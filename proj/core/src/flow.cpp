#include "exdir/flow.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>

namespace exdir {

int64_t h_default(int64_t m, Rational phi) {
  if (m < 1) m = 1;
  if (phi.num <= 0) throw ContractViolation("h_default: phi must be positive");
  double v = 10.0 * std::log(2.0 * static_cast<double>(m)) * phi.den / phi.num;
  return static_cast<int64_t>(std::ceil(v)) + 2;
}

FlowEngine::FlowEngine(GraphView g, int64_t uniform_cap, std::vector<int64_t> sink, int64_t h)
    : FlowEngine(g, std::vector<int64_t>(g.edge_rows(), uniform_cap),
                 std::vector<int64_t>(g.n(), 0), std::move(sink), h) {}

FlowEngine::FlowEngine(GraphView g, std::vector<int64_t> cap, std::vector<int64_t> source,
                       std::vector<int64_t> sink, int64_t h)
    : g_(g), h_(h), cap_(std::move(cap)), src_(std::move(source)), snk_(std::move(sink)) {
  const int n = g_.n();
  const int m = g_.edge_rows();
  if (h_ < 1) throw ContractViolation("flow engine: h must be positive");
  if (static_cast<int>(cap_.size()) != m || static_cast<int>(src_.size()) != n ||
      static_cast<int>(snk_.size()) != n)
    throw ContractViolation("flow engine: capacity/source/sink size mismatch");
  flow_.assign(m, 0);
  in_net_.assign(m, 0);
  net_out_.assign(n, 0);
  adeg_.assign(n, 0);
  level_.assign(n, 0);
  in_tilde_.assign(n, 1);
  arcs_.resize(n);
  cur_push_.assign(n, 0);
  cur_pull_.assign(n, 0);
  arc_epoch_.assign(n, 0);
  in_active_.assign(n, 0);
  in_deficit_.assign(n, 0);

  for (EdgeId e = 0; e < m; ++e) {
    if (!g_.alive(e)) continue;
    in_net_[e] = 1;
    adeg_[g_.tail(e)]++;
    adeg_[g_.head(e)]++;
    if (cap_[e] < 0) throw ContractViolation("flow engine: negative capacity");
  }
  for (Vertex v = 0; v < n; ++v) {
    if (src_[v] < 0) throw ContractViolation("flow engine: negative source");
    if (snk_[v] < adeg_[v])
      throw ContractViolation("flow engine: sink below degree at vertex " + std::to_string(v));
    budget_ += src_[v];
    for (EdgeId e : g_.out_edges(v))
      if (g_.alive(e) && g_.head(e) != v) arcs_[v].push_back(Arc{e, g_.head(e), true});
    for (EdgeId e : g_.in_edges(v))
      if (g_.alive(e) && g_.tail(e) != v) arcs_[v].push_back(Arc{e, g_.tail(e), false});
    std::sort(arcs_[v].begin(), arcs_[v].end(),
              [](const Arc& a, const Arc& b) { return a.e < b.e; });
  }
  if (h_ == 0) count_at_h_ = n;
  for (Vertex v = 0; v < n; ++v) refresh(v);
  push_relabel();
}

void FlowEngine::refresh(Vertex v) {
  bool want_active = in_tilde_[v] && level_[v] < h_ && excess_pos(v) > 0;
  bool want_deficit = in_tilde_[v] && level_[v] > 0 && excess_neg(v) > 0;
  if (want_active && !in_active_[v]) {
    active_.insert({level_[v], v});
    in_active_[v] = 1;
  } else if (!want_active && in_active_[v]) {
    active_.erase({level_[v], v});
    in_active_[v] = 0;
  }
  if (want_deficit && !in_deficit_[v]) {
    deficit_.insert({level_[v], v});
    in_deficit_[v] = 1;
  } else if (!want_deficit && in_deficit_[v]) {
    deficit_.erase({level_[v], v});
    in_deficit_[v] = 0;
  }
}

void FlowEngine::set_level(Vertex v, int64_t lvl) {
  assert(lvl >= 0 && lvl <= h_);
  if (in_active_[v]) {
    active_.erase({level_[v], v});
    in_active_[v] = 0;
  }
  if (in_deficit_[v]) {
    deficit_.erase({level_[v], v});
    in_deficit_[v] = 0;
  }
  if (in_tilde_[v]) {
    if (level_[v] == h_) --count_at_h_;
    if (lvl == h_) ++count_at_h_;
  }
  level_[v] = lvl;
  refresh(v);
}

void FlowEngine::ensure_arc_reset(Vertex v) {
  if (arc_epoch_[v] != epoch_) {
    arc_epoch_[v] = epoch_;
    cur_push_[v] = 0;
    cur_pull_[v] = 0;
  }
}

void FlowEngine::push_relabel() {
  touch_epoch();
  while (!active_.empty()) {
    Vertex v = active_.begin()->second;  // lowest level, then lowest id
    ensure_arc_reset(v);
    size_t& i = cur_push_[v];
    bool pushed = false;
    for (; i < arcs_[v].size(); ++i) {
      const Arc& a = arcs_[v][i];
      if (!in_net_[a.e] || !in_tilde_[a.other]) continue;
      if (level_[a.other] != level_[v] - 1) continue;
      int64_t residual = a.out ? cap_[a.e] - flow_[a.e] : flow_[a.e];
      if (residual <= 0) continue;
      int64_t slack = adeg_[a.other] - excess_pos(a.other);
      if (slack < 0) slack = 0;
      int64_t psi = std::min({excess_pos(v), residual, slack});
      // Minimum-level selection keeps targets inactive, so slack >= 1.
      assert(psi >= 1 && "zero-width push");
      flow_[a.e] += a.out ? psi : -psi;
      net_out_[v] += psi;
      net_out_[a.other] -= psi;
      counters_.pushes++;
      refresh(v);
      refresh(a.other);
      pushed = true;
      break;
    }
    if (!pushed) {
      counters_.relabels++;
      counters_.deg_weighted_relabels += adeg_[v];
      cur_push_[v] = 0;
      set_level(v, level_[v] + 1);
    }
  }
}

void FlowEngine::pull_relabel() {
  touch_epoch();
  while (!deficit_.empty()) {
    int64_t top = std::prev(deficit_.end())->first;
    Vertex v = deficit_.lower_bound({top, std::numeric_limits<Vertex>::min()})->second;
    ensure_arc_reset(v);
    size_t& i = cur_pull_[v];
    bool pulled = false;
    for (; i < arcs_[v].size(); ++i) {
      const Arc& a = arcs_[v][i];
      if (!in_net_[a.e] || !in_tilde_[a.other]) continue;
      if (level_[a.other] != level_[v] + 1) continue;
      // Residual toward v: spare capacity on in-edges, live flow on out-edges.
      int64_t residual = a.out ? flow_[a.e] : cap_[a.e] - flow_[a.e];
      if (residual <= 0) continue;
      int64_t psi = std::min({excess_neg(v), residual, adeg_[a.other]});
      assert(psi >= 1 && "zero-width pull");
      flow_[a.e] += a.out ? -psi : psi;
      net_out_[a.other] += psi;
      net_out_[v] -= psi;
      counters_.pulls++;
      refresh(v);
      refresh(a.other);
      pulled = true;
      break;
    }
    if (!pulled) {
      counters_.relabels++;
      counters_.deg_weighted_relabels += adeg_[v];
      cur_pull_[v] = 0;
      set_level(v, level_[v] - 1);
    }
  }
}

void FlowEngine::drop_edge(EdgeId e) {
  assert(in_net_[e]);
  Vertex t = g_.tail(e), h = g_.head(e);
  if (flow_[e] != 0) {
    net_out_[t] -= flow_[e];
    net_out_[h] += flow_[e];
    flow_[e] = 0;
  }
  in_net_[e] = 0;
  adeg_[t]--;
  adeg_[h]--;
}

void FlowEngine::increase_source(std::span<const std::pair<Vertex, int64_t>> delta) {
  for (auto [v, d] : delta) {
    g_.g->check_vertex(v);
    if (d < 0) throw ContractViolation("increase_source: negative delta");
    if (d > 0 && !in_tilde_[v])
      throw ContractViolation("increase_source: vertex " + std::to_string(v) + " was removed");
    src_[v] += d;
    budget_ += d;
    refresh(v);
  }
  push_relabel();
}

void FlowEngine::remove_vertices(std::span<const Vertex> s) {
  std::vector<char> rm(n(), 0);
  for (Vertex v : s) {
    g_.g->check_vertex(v);
    if (!in_tilde_[v])
      throw ContractViolation("remove_vertices: vertex " + std::to_string(v) + " not active");
    rm[v] = 1;
  }
  // Collect every network edge incident to S once.
  std::vector<char> seen(g_.edge_rows(), 0);
  std::vector<EdgeId> dying;
  for (Vertex v : s) {
    for (EdgeId e : g_.out_edges(v))
      if (in_net_[e] && !seen[e]) {
        seen[e] = 1;
        dying.push_back(e);
      }
    for (EdgeId e : g_.in_edges(v))
      if (in_net_[e] && !seen[e]) {
        seen[e] = 1;
        dying.push_back(e);
      }
  }
  // Lemma 3.1 budget term, evaluated on the edges about to leave.
  int64_t c_out = 0, c_in = 0, nabla = 0;
  for (Vertex v : s) nabla += snk_[v];
  for (EdgeId e : dying) {
    bool ts = rm[g_.tail(e)], hs = rm[g_.head(e)];
    if (ts && !hs) c_out += cap_[e];
    if (!ts && hs) c_in += cap_[e];
  }
  budget_ += std::min(c_out, c_in) + nabla;
  std::vector<Vertex> touched;
  for (EdgeId e : dying) {
    Vertex t = g_.tail(e), hd = g_.head(e);
    drop_edge(e);
    if (!rm[t]) touched.push_back(t);
    if (!rm[hd]) touched.push_back(hd);
  }
  for (Vertex v : s) {
    if (in_active_[v]) {
      active_.erase({level_[v], v});
      in_active_[v] = 0;
    }
    if (in_deficit_[v]) {
      deficit_.erase({level_[v], v});
      in_deficit_[v] = 0;
    }
    if (level_[v] == h_) --count_at_h_;
    in_tilde_[v] = 0;
  }
  for (Vertex v : touched) refresh(v);
  pull_relabel();
  push_relabel();
}

void FlowEngine::remove_edges(std::span<const EdgeId> es) {
  std::vector<Vertex> touched;
  for (EdgeId e : es) {
    g_.g->check_edge(e);
    if (!in_net_[e]) throw ContractViolation("remove_edges: edge " + std::to_string(e) +
                                             " not in the network");
    Vertex t = g_.tail(e), hd = g_.head(e);
    drop_edge(e);
    touched.push_back(t);
    touched.push_back(hd);
  }
  for (Vertex v : touched) refresh(v);
  pull_relabel();
  push_relabel();
}

std::pair<int64_t, int64_t> FlowEngine::excess(Vertex v) const {
  g_.g->check_vertex(v);
  if (!in_tilde_[v])
    throw ContractViolation("excess: vertex " + std::to_string(v) + " was removed");
  return {excess_pos(v), excess_neg(v)};
}

FlowValidity FlowEngine::check_valid_state() const {
  FlowValidity r;
  for (EdgeId e = 0; e < g_.edge_rows(); ++e) {
    if (!in_net_[e]) continue;
    if (flow_[e] < 0 || flow_[e] > cap_[e])
      r.violations.push_back({"capacity", "edge " + std::to_string(e) + " f=" +
                                              std::to_string(flow_[e]) + " c=" +
                                              std::to_string(cap_[e])});
    Vertex u = g_.tail(e), v = g_.head(e);
    if (level_[u] > level_[v] + 1 && flow_[e] != cap_[e])
      r.violations.push_back({"level-drop", "edge " + std::to_string(e) + " unsaturated across drop"});
    if (level_[v] > level_[u] + 1 && flow_[e] != 0)
      r.violations.push_back({"level-drop", "edge " + std::to_string(e) + " carries flow uphill gap"});
  }
  for (Vertex v = 0; v < n(); ++v) {
    if (!in_tilde_[v]) continue;
    if (excess_neg(v) > 0 && level_[v] != 0)
      r.violations.push_back({"deficit-level", "vertex " + std::to_string(v) + " deficit at level " +
                                                   std::to_string(level_[v])});
    if (excess_pos(v) > 0 && level_[v] != h_)
      r.violations.push_back({"excess-level", "vertex " + std::to_string(v) + " excess at level " +
                                                  std::to_string(level_[v])});
  }
  return r;
}

void FlowEngine::dump(std::ostream& out) const {
  for (Vertex v = 0; v < n(); ++v) {
    if (!in_tilde_[v]) continue;
    out << "v " << v << " " << level_[v] << " " << src_[v] << " " << snk_[v] << " "
        << excess_pos(v) << " " << excess_neg(v) << "\n";
  }
  for (EdgeId e = 0; e < g_.edge_rows(); ++e) {
    if (!in_net_[e]) continue;
    out << "e " << e << " " << flow_[e] << " " << cap_[e] << "\n";
  }
}

std::vector<UnitPath> decompose_unit_paths(GraphView g, std::vector<int64_t>& remaining,
                                           std::span<const int64_t> want_starts) {
  const int n = g.n();
  std::vector<std::vector<EdgeId>> outs(n);
  for (Vertex v = 0; v < n; ++v) {
    for (EdgeId e : g.out_edges(v))
      if (e < static_cast<EdgeId>(remaining.size()) && remaining[e] > 0) outs[v].push_back(e);
    std::sort(outs[v].begin(), outs[v].end());
  }
  std::vector<size_t> ptr(n, 0);
  std::vector<int> on_walk(n, -1);  // position in the current walk's vertex stack
  std::vector<UnitPath> paths;
  for (Vertex v = 0; v < n; ++v) {
    for (int64_t k = 0; k < want_starts[v]; ++k) {
      UnitPath p;
      p.start = v;
      std::vector<Vertex> vstack{v};
      on_walk[v] = 0;
      Vertex cur = v;
      while (true) {
        size_t& i = ptr[cur];
        while (i < outs[cur].size() && remaining[outs[cur][i]] == 0) ++i;
        if (i == outs[cur].size()) break;  // out-flow exhausted: path ends here
        EdgeId e = outs[cur][i];
        remaining[e]--;
        Vertex nxt = g.head(e);
        if (on_walk[nxt] >= 0) {
          // flow cycle: cancel the loop portion, keep walking from nxt
          int keep = on_walk[nxt];
          for (size_t j = keep + 1; j < vstack.size(); ++j) on_walk[vstack[j]] = -1;
          vstack.resize(keep + 1);
          p.edges.resize(keep);
          cur = nxt;
          continue;
        }
        p.edges.push_back(e);
        vstack.push_back(nxt);
        on_walk[nxt] = static_cast<int>(vstack.size()) - 1;
        cur = nxt;
      }
      for (Vertex w : vstack) on_walk[w] = -1;
      p.end = cur;
      if (p.edges.empty()) {
        // all of v's outgoing units were canceled as cycles; the remaining
        // start requests at v would repeat this empty walk
        assert(ptr[v] == outs[v].size() || remaining[outs[v][ptr[v]]] == 0);
        break;
      }
      paths.push_back(std::move(p));
    }
  }
  return paths;
}

}  // namespace exdir
