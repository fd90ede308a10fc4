#include "exdir/witness.hpp"

#include <algorithm>
#include <sstream>

#include "exdir/verification.hpp"
#include "nlohmann/json.hpp"

namespace exdir {

int Witness::add_edge(Vertex tail, Vertex head, std::vector<EdgeId> path) {
  if (tail < 0 || tail >= n_ || head < 0 || head >= n_)
    throw BoundsError("witness edge endpoint out of range");
  if (tail == head && !path.empty())
    throw ContractViolation("witness self-loop with nonempty path");
  int w = static_cast<int>(edges_.size());
  edges_.push_back(WEdge{tail, head, std::move(path), true});
  ++alive_count_;
  if (finalized_) {
    wdeg_.resize(n_, 0);
    wdeg_[tail]++;
    wdeg_[head]++;
    vertex_inc_[tail].push_back(w);
    if (head != tail) vertex_inc_[head].push_back(w);
    for (EdgeId e : edges_[w].path) {
      congestion_[e]++;
      users_[e].push_back(w);
    }
  }
  return w;
}

void Witness::finalize(int host_edge_rows) {
  wdeg_.assign(n_, 0);
  congestion_.assign(host_edge_rows, 0);
  users_.assign(host_edge_rows, {});
  vertex_inc_.assign(n_, {});
  for (int w = 0; w < edge_rows(); ++w) {
    const WEdge& we = edges_[w];
    if (!we.alive) continue;
    wdeg_[we.tail]++;
    wdeg_[we.head]++;
    vertex_inc_[we.tail].push_back(w);
    if (we.head != we.tail) vertex_inc_[we.head].push_back(w);
    for (EdgeId e : we.path) {
      congestion_[e]++;
      users_[e].push_back(w);
    }
  }
  finalized_ = true;
}

int64_t Witness::max_congestion() const {
  int64_t mx = 0;
  for (int64_t c : congestion_) mx = std::max(mx, c);
  return mx;
}

std::vector<int> Witness::users(EdgeId host_e) const {
  std::vector<int> out;
  for (int w : users_[host_e])
    if (edges_[w].alive) out.push_back(w);
  return out;
}

void Witness::kill(int w) {
  WEdge& we = edges_[w];
  if (!we.alive) return;
  we.alive = false;
  --alive_count_;
  wdeg_[we.tail]--;
  wdeg_[we.head]--;
  for (EdgeId e : we.path) congestion_[e]--;
}

std::vector<int> Witness::preimage(std::span<const EdgeId> d) const {
  std::vector<int> hit;
  for (EdgeId e : d)
    for (int w : users_[e])
      if (edges_[w].alive) hit.push_back(w);
  std::sort(hit.begin(), hit.end());
  hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
  return hit;
}

std::vector<int64_t> Witness::preimage_degree(std::span<const EdgeId> d) const {
  std::vector<int64_t> deg(n_, 0);
  for (int w : preimage(d)) {
    deg[edges_[w].tail]++;
    deg[edges_[w].head]++;
  }
  return deg;
}

std::vector<int> Witness::remove_edges(std::span<const EdgeId> d) {
  std::vector<int> hit = preimage(d);
  for (int w : hit) kill(w);
  return hit;
}

std::vector<int> Witness::restrict_to(const std::vector<char>& vert_alive, GraphView host) {
  std::vector<int> killed;
  for (int w = 0; w < edge_rows(); ++w) {
    const WEdge& we = edges_[w];
    if (!we.alive) continue;
    bool dead = !vert_alive[we.tail] || !vert_alive[we.head];
    if (!dead)
      for (EdgeId e : we.path)
        if (!vert_alive[host.tail(e)] || !vert_alive[host.head(e)]) {
          dead = true;
          break;
        }
    if (dead) {
      kill(w);
      killed.push_back(w);
    }
  }
  return killed;
}

int64_t Witness::total_volume(std::span<const Vertex> s) const {
  int64_t vol = 0;
  for (Vertex v : s) vol += wdeg_[v];
  return vol;
}

DiGraph witness_graph(const Witness& w) {
  DiGraph g(w.n());
  for (int i = 0; i < w.edge_rows(); ++i)
    if (w.alive(i)) g.add_edge(w.edge(i).tail, w.edge(i).head);
  return g;
}

namespace {

// Shared core over an edge-liveness predicate.
template <typename HostDeg, typename EdgeOk>
WitnessReport verify_impl(GraphView host, HostDeg host_deg, EdgeOk edge_ok, const Witness& w,
                          Rational phi, Rational psi, bool exact) {
  WitnessReport rep;
  if (phi.num <= 0 || psi.num <= 0) {
    rep.issues.push_back({"degree", "phi and psi must be positive"});
    return rep;
  }
  // (a) path validity and simplicity
  std::vector<int64_t> recount(host.edge_rows(), 0);
  std::vector<int> visit_mark(host.n(), -1);
  for (int i = 0; i < w.edge_rows(); ++i) {
    if (!w.alive(i)) continue;
    const auto& we = w.edge(i);
    if (we.tail == we.head) continue;  // loops carry no path
    if (we.path.empty()) {
      rep.issues.push_back({"path", "w-edge " + std::to_string(i) + " has no path"});
      continue;
    }
    Vertex at = we.tail;
    bool ok = true;
    visit_mark[at] = i;
    for (EdgeId e : we.path) {
      if (!edge_ok(e) || host.tail(e) != at) {
        ok = false;
        break;
      }
      at = host.head(e);
      if (visit_mark[at] == i) {  // revisited: not a simple path
        ok = false;
        break;
      }
      visit_mark[at] = i;
      recount[e]++;
    }
    if (ok && at != we.head) ok = false;
    if (!ok)
      rep.issues.push_back({"path", "w-edge " + std::to_string(i) + " path broken or nonsimple"});
  }
  // (b) congestion <= psi/phi, from an independent recount
  Rational budget = psi / phi;
  for (EdgeId e = 0; e < host.edge_rows(); ++e) {
    if (recount[e] != w.congestion(e))
      rep.issues.push_back(
          {"congestion", "index mismatch on host edge " + std::to_string(e)});
    if (!le_rational(recount[e], budget)) {
      rep.issues.push_back({"congestion", "host edge " + std::to_string(e) + " carries " +
                                              std::to_string(recount[e]) + " > " + budget.str()});
      break;
    }
  }
  // (c) degree sandwich deg_G <= deg_W <= deg_G/psi
  for (Vertex v = 0; v < host.n(); ++v) {
    int64_t dg = host_deg(v);
    int64_t dw = w.degree(v);
    if (dw < dg) {
      rep.issues.push_back({"degree", "vertex " + std::to_string(v) + " deg_W=" +
                                          std::to_string(dw) + " < deg_G=" + std::to_string(dg)});
      continue;
    }
    // dw <= dg/psi  <=>  dw * psi.num <= dg * psi.den
    if (static_cast<__int128>(dw) * psi.num > static_cast<__int128>(dg) * psi.den)
      rep.issues.push_back({"degree", "vertex " + std::to_string(v) + " deg_W=" +
                                          std::to_string(dw) + " > deg_G/psi"});
  }
  // (d) exact mode: W itself is a psi-out-expander
  if (exact) {
    if (host.n() > kExactLimit) throw SizeError("exact witness check needs n <= 20");
    DiGraph wg = witness_graph(w);
    ExpansionResult ex = brute_force_out_expansion(view_of(wg));
    if (!ex.infinite && ex.value < psi)
      rep.issues.push_back({"expansion", "W has out-expansion " + ex.value.str() + " < " +
                                             psi.str()});
  }
  return rep;
}

}  // namespace

WitnessReport verify_witness(GraphView host, const Witness& w, Rational phi, Rational psi,
                             bool exact) {
  return verify_impl(
      host, [&](Vertex v) { return host.degree(v); },
      [&](EdgeId e) { return host.alive(e); }, w, phi, psi, exact);
}

WitnessReport verify_witness(const InducedView& host, const Witness& w, Rational phi,
                             Rational psi, bool exact) {
  return verify_impl(
      host.base, [&](Vertex v) { return host.degree(v); },
      [&](EdgeId e) { return host.edge_alive(e); }, w, phi, psi, exact);
}

std::string witness_to_json(const Witness& w) {
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
  return j.dump();
}

Witness witness_from_json(const std::string& json_text, int host_n, int host_edge_rows) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, /*allow_exceptions=*/true);
  if (!j.contains("w_edges")) throw ParseError("witness json: missing w_edges");
  Witness w(host_n);
  for (const auto& je : j["w_edges"]) {
    Vertex t = je.at("tail").get<Vertex>();
    Vertex h = je.at("head").get<Vertex>();
    std::vector<EdgeId> path = je.at("path").get<std::vector<EdgeId>>();
    for (EdgeId e : path)
      if (e < 0 || e >= host_edge_rows) throw ParseError("witness json: path edge out of range");
    w.add_edge(t, h, std::move(path));
  }
  w.finalize(host_edge_rows);
  return w;
}

}  // namespace exdir
