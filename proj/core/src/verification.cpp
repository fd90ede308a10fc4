#include "exdir/verification.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "exdir/decomposition.hpp"
#include "exdir/witness.hpp"
#include "nlohmann/json.hpp"

namespace exdir {

namespace {

struct Dense {
  int n = 0;
  std::vector<std::pair<Vertex, Vertex>> edges;  // alive, no filtering left to do
  std::vector<int64_t> deg;
};

Dense densify(GraphView g) {
  Dense d;
  d.n = g.n();
  d.deg.assign(d.n, 0);
  for (EdgeId e = 0; e < g.edge_rows(); ++e) {
    if (!g.alive(e)) continue;
    d.edges.emplace_back(g.tail(e), g.head(e));
    d.deg[g.tail(e)]++;
    d.deg[g.head(e)]++;
  }
  return d;
}

Dense densify(const InducedView& g) {
  Dense d;
  d.n = g.base.n();
  d.deg.assign(d.n, 0);
  for (EdgeId e = 0; e < g.base.edge_rows(); ++e) {
    if (!g.edge_alive(e)) continue;
    d.edges.emplace_back(g.base.tail(e), g.base.head(e));
    d.deg[g.base.tail(e)]++;
    d.deg[g.base.head(e)]++;
  }
  return d;
}

// ratio a/b < c/d with b,d > 0
bool ratio_less(int64_t a, int64_t b, int64_t c, int64_t d) {
  return static_cast<__int128>(a) * d < static_cast<__int128>(c) * b;
}

struct Sweep {
  bool found_min = false, found_out = false;
  int64_t min_e = 0, min_vol = 1;    // Def.-style minimum ratio
  int64_t out_e = 0, out_vol = 1;    // out-expansion minimum ratio
  uint32_t min_mask = 0, out_mask = 0;
};

// Gray-code sweep over all nonempty proper subsets, maintaining the cut
// counts incrementally (cost deg(v) per step).
Sweep sweep_cuts(const Dense& g) {
  if (g.n > kExactLimit) throw SizeError("cut enumeration needs n <= 20");
  Sweep s;
  if (g.n <= 1) return s;
  int64_t total_vol = 0;
  for (int64_t d : g.deg) total_vol += d;
  int64_t m = static_cast<int64_t>(g.edges.size());
  std::vector<std::vector<std::pair<Vertex, int>>> inc(g.n);  // (other, +1 out / -1 in)
  for (auto [t, h] : g.edges) {
    if (t == h) continue;  // self-loops never cross a cut
    inc[t].push_back({h, +1});
    inc[h].push_back({t, -1});
  }
  uint32_t in_s = 0;
  int64_t e_fwd = 0, e_bwd = 0, vol_s = 0;
  const uint32_t count = 1u << g.n;
  for (uint32_t i = 1; i < count; ++i) {
    int v = __builtin_ctz(i);
    bool entering = !(in_s >> v & 1);
    for (auto [w, dir] : inc[v]) {
      bool ws = in_s >> w & 1;
      if (dir > 0) {  // edge v -> w
        if (entering)
          ws ? e_bwd-- : e_fwd++;
        else
          ws ? e_bwd++ : e_fwd--;
      } else {  // edge w -> v
        if (entering)
          ws ? e_fwd-- : e_bwd++;
        else
          ws ? e_fwd++ : e_bwd--;
      }
    }
    in_s ^= 1u << v;
    vol_s += entering ? g.deg[v] : -g.deg[v];
    if (in_s == 0 || in_s == count - 1) continue;
    int64_t vol_sbar = total_vol - vol_s;
    int64_t mn_e = std::min(e_fwd, e_bwd);
    int64_t mn_vol = std::min(vol_s, vol_sbar);
    if (mn_vol > 0 && (!s.found_min || ratio_less(mn_e, mn_vol, s.min_e, s.min_vol) ||
                       (!ratio_less(s.min_e, s.min_vol, mn_e, mn_vol) && in_s < s.min_mask))) {
      s.found_min = true;
      s.min_e = mn_e;
      s.min_vol = mn_vol;
      s.min_mask = in_s;
    }
    if (vol_s > 0 && vol_s <= m &&
        (!s.found_out || ratio_less(e_fwd, vol_s, s.out_e, s.out_vol) ||
         (!ratio_less(s.out_e, s.out_vol, e_fwd, vol_s) && in_s < s.out_mask))) {
      s.found_out = true;
      s.out_e = e_fwd;
      s.out_vol = vol_s;
      s.out_mask = in_s;
    }
  }
  return s;
}

std::vector<Vertex> mask_to_set(uint32_t mask, int n) {
  std::vector<Vertex> out;
  for (int v = 0; v < n; ++v)
    if (mask >> v & 1) out.push_back(v);
  return out;
}

ExpansionResult expansion_from(const Dense& g, bool out_variant) {
  Sweep s = sweep_cuts(g);
  ExpansionResult r;
  bool found = out_variant ? s.found_out : s.found_min;
  if (!found) {
    r.infinite = true;
    return r;
  }
  if (out_variant) {
    r.value = Rational(s.out_e, s.out_vol);
    r.cut = mask_to_set(s.out_mask, g.n);
  } else {
    r.value = Rational(s.min_e, s.min_vol);
    r.cut = mask_to_set(s.min_mask, g.n);
  }
  return r;
}

}  // namespace

void enumerate_cuts(
    GraphView g,
    const std::function<void(uint32_t, int64_t, int64_t, int64_t, int64_t)>& fn) {
  Dense d = densify(g);
  if (d.n > kExactLimit) throw SizeError("cut enumeration needs n <= 20");
  if (d.n <= 1) return;
  int64_t total_vol = 0;
  for (int64_t dg : d.deg) total_vol += dg;
  std::vector<std::vector<std::pair<Vertex, int>>> inc(d.n);
  for (auto [t, h] : d.edges) {
    if (t == h) continue;
    inc[t].push_back({h, +1});
    inc[h].push_back({t, -1});
  }
  uint32_t in_s = 0;
  int64_t e_fwd = 0, e_bwd = 0, vol_s = 0;
  const uint32_t count = 1u << d.n;
  for (uint32_t i = 1; i < count; ++i) {
    int v = __builtin_ctz(i);
    bool entering = !(in_s >> v & 1);
    for (auto [w, dir] : inc[v]) {
      bool ws = in_s >> w & 1;
      if (dir > 0) {
        if (entering)
          ws ? e_bwd-- : e_fwd++;
        else
          ws ? e_bwd++ : e_fwd--;
      } else {
        if (entering)
          ws ? e_fwd-- : e_bwd++;
        else
          ws ? e_fwd++ : e_bwd--;
      }
    }
    in_s ^= 1u << v;
    vol_s += entering ? d.deg[v] : -d.deg[v];
    if (in_s == 0 || in_s == count - 1) continue;
    fn(in_s, e_fwd, e_bwd, vol_s, total_vol - vol_s);
  }
}

ExpansionResult brute_force_expansion(GraphView g) { return expansion_from(densify(g), false); }
ExpansionResult brute_force_expansion(const InducedView& g) {
  return expansion_from(densify(g), false);
}
ExpansionResult brute_force_out_expansion(GraphView g) {
  return expansion_from(densify(g), true);
}
ExpansionResult brute_force_out_expansion(const InducedView& g) {
  return expansion_from(densify(g), true);
}

bool check_lemma_helper(GraphView g, std::span<const Vertex> s, std::span<const EdgeId> d,
                        Rational phi) {
  if (g.n() > kExactLimit) throw SizeError("lemma helper check needs n <= 20");
  int64_t vol = volume(g, s);
  int64_t m = g.alive_edges();
  if (vol > m) return true;  // outside the out-expander side condition
  // vol >= 4|D|/(3 phi)?
  Rational threshold = Rational(4 * static_cast<int64_t>(d.size())) / (Rational(3) * phi);
  if (Rational(vol) < threshold) return true;  // antecedent false
  // count e_{G \ D}(S, V\S)
  std::vector<char> in_s(g.n(), 0);
  for (Vertex v : s) in_s[v] = 1;
  std::vector<char> dropped(g.edge_rows(), 0);
  for (EdgeId e : d) dropped[e] = 1;
  int64_t crossing = 0;
  for (EdgeId e = 0; e < g.edge_rows(); ++e)
    if (g.alive(e) && !dropped[e] && in_s[g.tail(e)] && !in_s[g.head(e)]) ++crossing;
  return Rational(crossing) >= phi / Rational(4) * Rational(vol);
}

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["overall"] = overall();
  auto& arr = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["measured"] = c.measured;
    jc["threshold"] = c.threshold;
    jc["location"] = c.location;
    arr.push_back(std::move(jc));
  }
  return j.dump(2);
}

void VerificationReport::print_table(std::ostream& out) const {
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.location.empty()) out << " [" << c.location << "]";
    out << ": " << c.measured;
    if (!c.threshold.empty()) out << " vs " << c.threshold;
    out << "\n";
  }
  out << (overall() ? "OVERALL PASS" : "OVERALL FAIL") << "\n";
}

VerificationReport verify_decomposition(const DiGraph& host, const Decomposition& d,
                                        Rational beta_budget, Rational phi_floor,
                                        Rational psi_floor, int exact_limit) {
  VerificationReport rep;
  // partition (empty cluster slots are retired ids and ignored)
  std::vector<int> owner(host.n(), -1);
  bool partition_ok = true;
  size_t live = 0;
  for (size_t ci = 0; ci < d.clusters.size(); ++ci) {
    if (!d.clusters[ci].verts.empty()) ++live;
    for (Vertex v : d.clusters[ci].verts) {
      if (v < 0 || v >= host.n() || owner[v] != -1) partition_ok = false;
      else owner[v] = static_cast<int>(ci);
    }
  }
  for (Vertex v = 0; v < host.n(); ++v)
    if (owner[v] == -1) partition_ok = false;
  rep.add("partition", partition_ok, partition_ok ? "covers V once" : "broken", "exact");
  if (!partition_ok) return rep;

  // order is a permutation of the live cluster ids
  {
    std::vector<char> seen(d.clusters.size(), 0);
    bool ok = d.order.size() == live;
    for (int id : d.order) {
      if (id < 0 || id >= static_cast<int>(d.clusters.size()) || seen[id] ||
          d.clusters[id].verts.empty())
        ok = false;
      else
        seen[id] = 1;
    }
    rep.add("order-permutation", ok, ok ? "ok" : "broken", "exact");
    if (!ok) return rep;
  }

  // per-cluster quality
  for (size_t ci = 0; ci < d.clusters.size(); ++ci) {
    const Cluster& c = d.clusters[ci];
    std::string loc = "cluster " + std::to_string(ci);
    if (c.verts.size() <= 1) continue;  // trivial clusters are exempt
    bool declared_ok = c.phi >= phi_floor && c.psi >= psi_floor;
    rep.add("declared-quality", declared_ok,
            "(" + c.phi.str() + "," + c.psi.str() + ")",
            "(" + phi_floor.str() + "," + psi_floor.str() + ")", loc);
    Subgraph sub = materialize(view_of(host), c.verts);
    if (!c.witness.has_value()) {
      rep.add("witness-present", false, "missing", "required", loc);
      continue;
    }
    // Localize witness edges to the materialized subgraph for checking.
    bool exact = static_cast<int>(c.verts.size()) <= exact_limit;
    if (exact) {
      ExpansionResult ex = brute_force_expansion(view_of(sub.graph));
      bool pass = ex.infinite || ex.value >= c.phi;
      rep.add("cluster-expansion", pass, ex.infinite ? "inf" : ex.value.str(), c.phi.str(), loc);
    }
    std::vector<EdgeId> from_base_edge(host.edge_rows(), -1);
    for (size_t i = 0; i < sub.to_base_edge.size(); ++i)
      from_base_edge[sub.to_base_edge[i]] = static_cast<EdgeId>(i);
    auto localize = [&](const Witness& w, bool rev, bool* ok) {
      Witness lw(sub.graph.n());
      *ok = true;
      for (int i = 0; i < w.edge_rows(); ++i) {
        if (!w.alive(i)) continue;
        const auto& we = w.edge(i);
        Vertex t = sub.from_base_vertex[we.tail], h = sub.from_base_vertex[we.head];
        if (t < 0 || h < 0) {
          *ok = false;
          continue;
        }
        std::vector<EdgeId> path;
        for (EdgeId e : we.path) {
          EdgeId le = from_base_edge[e];
          if (le < 0) *ok = false;
          path.push_back(le);
        }
        if (*ok) lw.add_edge(t, h, std::move(path));
      }
      lw.finalize(sub.graph.edge_rows());
      (void)rev;
      return lw;
    };
    bool ok1 = true, ok2 = true;
    Witness wf = localize(c.witness->fwd, false, &ok1);
    Witness wb = localize(c.witness->bwd, true, &ok2);
    GraphView sv = view_of(sub.graph);
    WitnessReport rf = ok1 ? verify_witness(sv, wf, c.phi, c.psi, exact)
                           : WitnessReport{{{"path", "edges outside cluster"}}};
    WitnessReport rb = ok2 ? verify_witness(reverse(sv), wb, c.phi, c.psi, exact)
                           : WitnessReport{{{"path", "edges outside cluster"}}};
    rep.add("witness-fwd", rf.ok(), rf.ok() ? "ok" : rf.issues.front().check + ": " +
            rf.issues.front().detail, "structural", loc);
    rep.add("witness-bwd", rb.ok(), rb.ok() ? "ok" : rb.issues.front().check + ": " +
            rb.issues.front().detail, "structural", loc);
  }

  // |E^r| budget against the decomposition's own phi parameter
  {
    int64_t m = host.alive_edges();
    Rational budget = beta_budget * d.phi * Rational(m);
    bool pass = le_rational(static_cast<int64_t>(d.e_r.size()), budget);
    rep.add("er-budget", pass, std::to_string(d.e_r.size()), budget.str());
  }

  // contraction DAG + topological order
  {
    std::vector<std::vector<Vertex>> classes;
    std::vector<int> pos(d.clusters.size(), -1);
    for (size_t i = 0; i < d.order.size(); ++i) pos[d.order[i]] = static_cast<int>(i);
    classes.reserve(d.clusters.size());
    for (const auto& c : d.clusters) classes.push_back(c.verts);
    std::vector<EdgeId> drop(d.e_r.begin(), d.e_r.end());
    DiGraph contracted = contract(view_of(host), classes, drop);
    bool dag = is_dag(view_of(contracted));
    rep.add("contraction-dag", dag, dag ? "acyclic" : "cycle", "DAG");
    bool topo = true;
    for (EdgeId e = 0; e < contracted.edge_rows(); ++e)
      if (contracted.alive(e) && pos[contracted.tail(e)] >= pos[contracted.head(e)]) topo = false;
    rep.add("order-topological", topo, topo ? "ok" : "backward edge survives", "exact");
  }
  return rep;
}

bool verify_refinement(const Decomposition& older, const Decomposition& newer,
                       std::span<const EdgeId> deleted_between) {
  int n = 0;
  for (const auto& c : older.clusters)
    for (Vertex v : c.verts) n = std::max(n, v + 1);
  std::vector<int> old_owner(n, -1);
  for (size_t ci = 0; ci < older.clusters.size(); ++ci)
    for (Vertex v : older.clusters[ci].verts) old_owner[v] = static_cast<int>(ci);
  for (const auto& c : newer.clusters) {
    if (c.verts.empty()) continue;
    if (c.verts.front() >= n || old_owner[c.verts.front()] < 0) return false;
    int own = old_owner[c.verts.front()];
    for (Vertex v : c.verts)
      if (v >= n || old_owner[v] != own) return false;
  }
  std::vector<EdgeId> allowed(newer.e_r.begin(), newer.e_r.end());
  allowed.insert(allowed.end(), deleted_between.begin(), deleted_between.end());
  std::sort(allowed.begin(), allowed.end());
  for (EdgeId e : older.e_r)
    if (!std::binary_search(allowed.begin(), allowed.end(), e)) return false;
  return true;
}

}  // namespace exdir
