#include "exdir/cut_oracle.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <ostream>

#include "exdir/flow.hpp"
#include "exdir/rng.hpp"
#include "exdir/verification.hpp"

namespace exdir {

namespace {

void check_input(GraphView g) {
  if (g.reversed) throw ContractViolation("oracle input must be in host orientation");
  for (EdgeId e = 0; e < g.edge_rows(); ++e)
    if (!g.alive(e)) throw ContractViolation("oracle input must have no tombstoned edges");
}

double log2m(int64_t m) { return std::log2(static_cast<double>(std::max<int64_t>(m, 2))); }

DiGraph copy_graph(GraphView g) {
  DiGraph out(g.n());
  for (EdgeId e = 0; e < g.edge_rows(); ++e) out.add_edge(g.tail(e), g.head(e));
  return out;
}

BiWitness identity_witness(const DiGraph& g) {
  BiWitness bw{Witness(g.n()), Witness(g.n())};
  for (EdgeId e = 0; e < g.edge_rows(); ++e) {
    if (g.tail(e) == g.head(e)) {
      // loop copies carry empty paths and keep the degree accounting exact
      bw.fwd.add_self_loop(g.tail(e));
      bw.bwd.add_self_loop(g.tail(e));
      continue;
    }
    bw.fwd.add_edge(g.tail(e), g.head(e), {e});
    bw.bwd.add_edge(g.head(e), g.tail(e), {e});  // reversed-view orientation
  }
  bw.fwd.finalize(g.edge_rows());
  bw.bwd.finalize(g.edge_rows());
  return bw;
}

Rational identity_psi(const DiGraph& aug) {
  ExpansionResult fo = brute_force_out_expansion(view_of(aug));
  ExpansionResult bo = brute_force_out_expansion(reverse(view_of(aug)));
  Rational psi(1, 2);
  if (!fo.infinite) psi = std::min(psi, fo.value);
  if (!bo.infinite) psi = std::min(psi, bo.value);
  return psi;
}

Certified certify_identity(GraphView g, Rational phi, std::vector<FakeEdge> fakes) {
  Certified c;
  c.augmented = copy_graph(g);
  for (auto& f : fakes) {
    EdgeId id = c.augmented.add_edge(f.tail, f.head);
    assert(id == f.id);
    (void)id;
  }
  c.bw = identity_witness(c.augmented);
  c.fakes = std::move(fakes);
  c.psi_out = identity_psi(c.augmented);
  if (c.psi_out < phi)
    throw OracleFailure("identity certificate collapsed below phi");  // unreachable
  c.preimage_fake = 2 * static_cast<int64_t>(c.fakes.size());
  return c;
}

// ---------------------------------------------------------------------------
// Bounded-height preflow used by the matching player.

struct Preflow {
  struct Arc {
    EdgeId e;
    Vertex other;
    bool out;
  };

  Preflow(GraphView g, int64_t cap, std::vector<int64_t> delta, std::vector<int64_t> nabla,
          int hcap)
      : g_(g), cap_(cap), delta_(std::move(delta)), nabla_(std::move(nabla)), hcap_(hcap) {
    const int n = g_.n();
    flow_.assign(g_.edge_rows(), 0);
    net_out_.assign(n, 0);
    level_.assign(n, 0);
    arcs_.resize(n);
    cur_.assign(n, 0);
    for (Vertex v = 0; v < n; ++v) {
      for (EdgeId e : g_.out_edges(v))
        if (g_.head(e) != v) arcs_[v].push_back({e, g_.head(e), true});
      for (EdgeId e : g_.in_edges(v))
        if (g_.tail(e) != v) arcs_[v].push_back({e, g_.tail(e), false});
      std::sort(arcs_[v].begin(), arcs_[v].end(),
                [](const Arc& a, const Arc& b) { return a.e < b.e; });
    }
    buckets_.assign(hcap_ + 1, {});
    for (Vertex v = 0; v < n; ++v)
      if (excess(v) > 0) buckets_[0].push_back(v);
    run();
  }

  int64_t mass(Vertex v) const { return delta_[v] - net_out_[v]; }
  int64_t excess(Vertex v) const { return std::max<int64_t>(mass(v) - nabla_[v], 0); }
  int64_t stuck_total() const {
    int64_t s = 0;
    for (Vertex v = 0; v < g_.n(); ++v) s += excess(v);
    return s;
  }

  GraphView g_;
  int64_t cap_;
  std::vector<int64_t> delta_, nabla_, flow_, net_out_, level_;
  std::vector<std::vector<Arc>> arcs_;
  std::vector<size_t> cur_;
  std::vector<std::vector<Vertex>> buckets_;
  int hcap_;

private:
  void run() {
    int lo = 0;
    while (lo <= hcap_) {
      if (buckets_[lo].empty()) {
        ++lo;
        continue;
      }
      Vertex v = buckets_[lo].back();
      buckets_[lo].pop_back();
      if (level_[v] != lo || excess(v) <= 0 || level_[v] >= hcap_) continue;
      size_t& i = cur_[v];
      bool pushed = false;
      for (; i < arcs_[v].size(); ++i) {
        const Arc& a = arcs_[v][i];
        if (level_[a.other] != level_[v] - 1) continue;
        int64_t residual = a.out ? cap_ - flow_[a.e] : flow_[a.e];
        if (residual <= 0) continue;
        int64_t psi = std::min(excess(v), residual);
        flow_[a.e] += a.out ? psi : -psi;
        net_out_[v] += psi;
        net_out_[a.other] -= psi;
        if (excess(a.other) > 0 && level_[a.other] < hcap_) {
          buckets_[level_[a.other]].push_back(a.other);
          lo = std::min(lo, static_cast<int>(level_[a.other]));
        }
        pushed = true;
        break;
      }
      if (!pushed) {
        level_[v]++;
        cur_[v] = 0;
      }
      if (excess(v) > 0 && level_[v] < hcap_) buckets_[level_[v]].push_back(v);
    }
  }
};

}  // namespace

// ---------------------------------------------------------------------------

CutOrWitness brute_force_oracle(GraphView g, Rational phi, const OracleConfig& cfg) {
  check_input(g);
  const int n = g.n();
  if (n > cfg.n_bf || n > kExactLimit)
    throw SizeError("brute_force_oracle: n exceeds the exact threshold");
  const int64_t m = g.alive_edges();
  if (m == 0) return certify_identity(g, phi, {});

  const double l2 = log2m(m);
  const double bal_thr = cfg.c_bal * static_cast<double>(m) / std::max(1.0, l2 * l2 * l2 * l2);
  const double sparse_thr = cfg.c_cut * phi.to_double() * l2 * l2;

  bool found = false;
  uint32_t best_mask = 0;
  int64_t best_e = 0, best_vol = 1;
  CutStats best_stats;
  enumerate_cuts(g, [&](uint32_t mask, int64_t ef, int64_t eb, int64_t vs, int64_t vsb) {
    if (static_cast<double>(vs) < bal_thr || static_cast<double>(vsb) < bal_thr) return;
    int64_t mn_e = std::min(ef, eb);
    int64_t mn_vol = std::min(vs, vsb);
    if (mn_vol <= 0) return;
    if (static_cast<double>(mn_e) > sparse_thr * static_cast<double>(mn_vol)) return;
    if (!found || static_cast<__int128>(mn_e) * best_vol < static_cast<__int128>(best_e) * mn_vol ||
        (static_cast<__int128>(mn_e) * best_vol == static_cast<__int128>(best_e) * mn_vol &&
         mask < best_mask)) {
      found = true;
      best_mask = mask;
      best_e = mn_e;
      best_vol = mn_vol;
      best_stats = CutStats{ef, eb, vs, vsb};
    }
  });
  if (found) {
    BalancedCut cut;
    for (int v = 0; v < n; ++v)
      if (best_mask >> v & 1) cut.a.push_back(v);
    cut.stats = best_stats;
    cut.cut_is_fwd = best_stats.e_fwd <= best_stats.e_bwd;
    return cut;
  }

  ExpansionResult ex = brute_force_expansion(g);
  if (ex.infinite || ex.value >= phi) return certify_identity(g, phi, {});

  // Only unbalanced sparse cuts remain: repair with fake edges until the
  // exact expansion reaches phi.
  int64_t budget = static_cast<int64_t>(cfg.c_fake * static_cast<double>(m) / (l2 * l2));
  DiGraph aug = copy_graph(g);
  std::vector<FakeEdge> fakes;
  while (true) {
    ExpansionResult cur = brute_force_expansion(view_of(aug));
    if (cur.infinite || cur.value >= phi) break;
    if (static_cast<int64_t>(fakes.size()) >= budget)
      throw OracleFailure("brute_force_oracle: fake budget exhausted");
    std::vector<char> in_s(n, 0);
    for (Vertex v : cur.cut) in_s[v] = 1;
    CutStats st = cut_stats(view_of(aug), cur.cut);
    Vertex lo_in = cur.cut.front();
    Vertex lo_out = 0;
    while (in_s[lo_out]) ++lo_out;
    FakeEdge f;
    if (st.e_fwd <= st.e_bwd) {
      f = {lo_in, lo_out, 0};
    } else {
      f = {lo_out, lo_in, 0};
    }
    f.id = aug.add_edge(f.tail, f.head);
    fakes.push_back(f);
  }
  Certified c;
  c.augmented = std::move(aug);
  c.bw = identity_witness(c.augmented);
  c.fakes = std::move(fakes);
  c.psi_out = identity_psi(c.augmented);
  c.preimage_fake = 2 * static_cast<int64_t>(c.fakes.size());
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct RoundOutcome {
  bool cut_found = false;
  BalancedCut cut;
};

}  // namespace

CutOrWitness cut_matching_oracle(GraphView g, Rational phi, const OracleConfig& cfg) {
  check_input(g);
  const int n = g.n();
  const int64_t m = g.alive_edges();
  if (m < 2) throw ContractViolation("cut_matching_oracle needs m >= 2");
  if (phi.num <= 0) throw ContractViolation("phi must be positive");

  const double l2 = log2m(m);
  const int rounds = std::max(2, static_cast<int>(std::ceil(cfg.rounds_mult * l2 * l2)));
  const int hcap =
      std::max(4, static_cast<int>(std::ceil(8.0 * cfg.height_mult * std::log2(2.0 * m))));
  const double bal_thr = cfg.c_bal * static_cast<double>(m) / std::max(1.0, l2 * l2 * l2 * l2);
  const double sparse_thr = cfg.c_cut * phi.to_double() * l2 * l2;
  // The T matchings must jointly respect the certified congestion budget
  // psi_out/phi, so each round routes at its share of it (a full 1/phi per
  // round could never certify once T >= 2).
  const Rational psi_planned =
      std::min({Rational(1, 2), Rational(1, (rounds + 1) / 2), Rational(1, rounds / 2)});
  const int64_t cap_round = floor_of(psi_planned / phi / Rational(rounds));
  if (cap_round < 1)
    throw OracleFailure("cut_matching_oracle: phi too large for " + std::to_string(rounds) +
                        " rounds (congestion budget " + (psi_planned / phi).str() + ")");
  // Fake budget: keep 4/psi |Pi^-1(F)| < e/14 satisfiable downstream, capped
  // by the configured c_fake * m / log^2 m.
  int64_t budget = floor_of(psi_planned * Rational(m) / Rational(56));
  budget = std::min(budget,
                    static_cast<int64_t>(cfg.c_fake * static_cast<double>(m) / (l2 * l2)));

  // Endpoint split: vertex v owns deg(v) endpoint nodes.
  std::vector<int64_t> base(n + 1, 0);
  for (Vertex v = 0; v < n; ++v) base[v + 1] = base[v] + g.degree(v);
  const int64_t N = base[n];
  assert(N == 2 * m);
  std::vector<Vertex> owner(N);
  for (Vertex v = 0; v < n; ++v)
    for (int64_t i = base[v]; i < base[v + 1]; ++i) owner[i] = v;

  Rng rng(Rng::derive(cfg.seed, 0x9d5c));
  const int K = std::max(1, cfg.num_projections);
  std::vector<std::vector<double>> proj(K, std::vector<double>(N));
  for (auto& vec : proj)
    for (auto& x : vec) x = rng.gaussian();

  Witness w_fwd(n), w_bwd(n);
  std::vector<FakeEdge> fakes;
  int r_fwd = 0, r_bwd = 0;
  std::vector<int64_t> order_idx(N);

  for (int round = 0; round < rounds; ++round) {
    const bool fwd_round = round % 2 == 0;
    GraphView dir = fwd_round ? g : reverse(g);
    Witness& w_dir = fwd_round ? w_fwd : w_bwd;
    (fwd_round ? r_fwd : r_bwd)++;

    // Cut player: bisect endpoints by the current projection.
    const std::vector<double>& x = proj[round % K];
    std::iota(order_idx.begin(), order_idx.end(), 0);
    std::sort(order_idx.begin(), order_idx.end(), [&](int64_t a, int64_t b) {
      if (x[a] != x[b]) return x[a] < x[b];
      return a < b;
    });
    std::vector<char> side(N, 0);  // 1 = B (sink side)
    for (int64_t i = N / 2; i < N; ++i) side[order_idx[i]] = 1;
    std::vector<int64_t> na(n, 0), nb(n, 0);
    std::vector<std::vector<int64_t>> a_eps(n), b_eps(n);
    for (int64_t i = 0; i < N; ++i) {
      if (side[i]) {
        nb[owner[i]]++;
        b_eps[owner[i]].push_back(i);
      } else {
        na[owner[i]]++;
        a_eps[owner[i]].push_back(i);
      }
    }

    // Matching player: route A -> B in the round's orientation.
    Preflow pf(dir, cap_round, na, nb, hcap);
    int64_t stuck = pf.stuck_total();

    if (stuck > 0) {
      // Look for a balanced sparse level cut before spending fakes.
      std::vector<std::vector<Vertex>> at_level(hcap + 1);
      for (Vertex v = 0; v < n; ++v) at_level[pf.level_[v]].push_back(v);
      std::vector<char> in_s(n, 0);
      int64_t ef = 0, eb = 0, vol_s = 0;
      int64_t total_vol = 0;
      for (Vertex v = 0; v < n; ++v) total_vol += g.degree(v);
      bool found = false;
      int64_t best_e = 0, best_vol = 1;
      std::vector<char> best_set;
      CutStats best_stats;
      for (int i = hcap; i >= 1; --i) {
        for (Vertex v : at_level[i]) {
          for (EdgeId e : g.out_edges(v)) {
            if (in_s[g.head(e)])
              eb--;
            else if (g.head(e) != v)
              ef++;
          }
          for (EdgeId e : g.in_edges(v)) {
            if (in_s[g.tail(e)])
              ef--;
            else if (g.tail(e) != v)
              eb++;
          }
          in_s[v] = 1;
          vol_s += g.degree(v);
        }
        if (vol_s == 0 || vol_s == total_vol) continue;
        if (static_cast<double>(vol_s) < bal_thr ||
            static_cast<double>(total_vol - vol_s) < bal_thr)
          continue;
        int64_t mn_e = std::min(ef, eb);
        int64_t mn_vol = std::min(vol_s, total_vol - vol_s);
        if (static_cast<double>(mn_e) > sparse_thr * static_cast<double>(mn_vol)) continue;
        if (!found ||
            static_cast<__int128>(mn_e) * best_vol < static_cast<__int128>(best_e) * mn_vol) {
          found = true;
          best_e = mn_e;
          best_vol = mn_vol;
          best_set = in_s;
          best_stats = CutStats{ef, eb, vol_s, total_vol - vol_s};
        }
      }
      if (found) {
        BalancedCut cut;
        for (Vertex v = 0; v < n; ++v)
          if (best_set[v]) cut.a.push_back(v);
        if (!fwd_round) {
          // counts were accumulated in the reversed orientation
          std::swap(best_stats.e_fwd, best_stats.e_bwd);
        }
        cut.stats = best_stats;
        cut.cut_is_fwd = best_stats.e_fwd <= best_stats.e_bwd;
        if (cfg.trace)
          *cfg.trace << "cut-matching: round " << round << " found balanced cut |A|="
                     << cut.a.size() << "\n";
        return cut;
      }
    }

    // Extract the routed matching.
    std::vector<int64_t> remaining = pf.flow_;
    std::vector<int64_t> want(n, 0);
    for (Vertex v = 0; v < n; ++v) want[v] = std::max<int64_t>(pf.net_out_[v], 0);
    std::vector<UnitPath> paths = decompose_unit_paths(dir, remaining, want);
    std::vector<int64_t> sink_used(n, 0), a_used(n, 0);
    std::vector<std::pair<int64_t, int64_t>> avg_pairs;
    std::vector<int64_t> leftover_a;
    int64_t routed = 0;
    for (auto& p : paths) {
      int64_t a_ep = a_eps[p.start][a_used[p.start]++];
      if (sink_used[p.end] < nb[p.end]) {
        int64_t b_ep = b_eps[p.end][sink_used[p.end]++];
        w_dir.add_edge(p.start, p.end, std::move(p.edges));
        avg_pairs.push_back({a_ep, b_ep});
        ++routed;
      } else {
        leftover_a.push_back(a_ep);
      }
    }
    // Local absorption: unstarted source units matched to spare sink slots
    // at the same vertex become witness self-loops.
    for (Vertex v = 0; v < n; ++v) {
      int64_t local = na[v] - a_used[v];
      int64_t slots = nb[v] - sink_used[v];
      int64_t self_pairs = std::min(local, slots);
      for (int64_t k = 0; k < self_pairs; ++k) {
        int64_t a_ep = a_eps[v][a_used[v]++];
        int64_t b_ep = b_eps[v][sink_used[v]++];
        w_dir.add_self_loop(v);
        avg_pairs.push_back({a_ep, b_ep});
        ++routed;
      }
      while (a_used[v] < na[v]) leftover_a.push_back(a_eps[v][a_used[v]++]);
    }
    std::vector<int64_t> leftover_b;
    for (Vertex v = 0; v < n; ++v)
      while (sink_used[v] < nb[v]) leftover_b.push_back(b_eps[v][sink_used[v]++]);
    assert(leftover_a.size() == leftover_b.size());
    std::sort(leftover_a.begin(), leftover_a.end());
    std::sort(leftover_b.begin(), leftover_b.end());
    if (static_cast<int64_t>(fakes.size() + leftover_a.size()) > budget) {
      throw OracleFailure("cut_matching_oracle: fake budget exhausted (needed " +
                          std::to_string(fakes.size() + leftover_a.size()) + " > " +
                          std::to_string(budget) + ")");
    }
    for (size_t k = 0; k < leftover_a.size(); ++k) {
      Vertex va = owner[leftover_a[k]], vb = owner[leftover_b[k]];
      // fake edge in host orientation
      FakeEdge f = fwd_round ? FakeEdge{va, vb, 0} : FakeEdge{vb, va, 0};
      f.id = static_cast<EdgeId>(g.edge_rows() + static_cast<int64_t>(fakes.size()));
      fakes.push_back(f);
      w_dir.add_edge(va, vb, {f.id});
      avg_pairs.push_back({leftover_a[k], leftover_b[k]});
    }
    if (cfg.trace)
      *cfg.trace << "cut-matching: round " << round << (fwd_round ? " fwd" : " bwd")
                 << " routed=" << routed << "/" << N / 2 << " fakes+=" << leftover_a.size()
                 << "\n";
    // Averaging step along the matching.
    for (auto& vec : proj)
      for (auto [a, b] : avg_pairs) {
        double avg = 0.5 * (vec[a] + vec[b]);
        vec[a] = avg;
        vec[b] = avg;
      }
  }

  Certified c;
  c.augmented = copy_graph(g);
  for (auto& f : fakes) {
    EdgeId id = c.augmented.add_edge(f.tail, f.head);
    assert(id == f.id);
    (void)id;
  }
  w_fwd.finalize(c.augmented.edge_rows());
  w_bwd.finalize(c.augmented.edge_rows());
  c.psi_out = std::min({Rational(1, 2), Rational(1, r_fwd), Rational(1, r_bwd)});
  int64_t cong = std::max(w_fwd.max_congestion(), w_bwd.max_congestion());
  if (!le_rational(cong, c.psi_out / phi))
    throw OracleFailure("cut_matching_oracle: congestion " + std::to_string(cong) +
                        " exceeds psi/phi = " + (c.psi_out / phi).str());
  GraphView av = view_of(c.augmented);
  WitnessReport rf = verify_witness(av, w_fwd, phi, c.psi_out, false);
  WitnessReport rb = verify_witness(reverse(av), w_bwd, phi, c.psi_out, false);
  if (!rf.ok() || !rb.ok()) {
    const auto& bad = !rf.ok() ? rf.issues.front() : rb.issues.front();
    throw OracleFailure("cut_matching_oracle: witness check failed: " + bad.check + ": " +
                        bad.detail);
  }
  c.preimage_fake = static_cast<int64_t>(fakes.size());
  c.bw = BiWitness{std::move(w_fwd), std::move(w_bwd)};
  c.fakes = std::move(fakes);
  if (cfg.trace)
    *cfg.trace << "cut-matching: certified psi_out=" << c.psi_out.str() << " fakes="
               << c.fakes.size() << " congestion=" << cong << "\n";
  return c;
}

CutOrWitness run_oracle(GraphView g, Rational phi, const OracleConfig& cfg, OracleKind kind) {
  if (kind == OracleKind::Brute || (kind == OracleKind::Auto && g.n() <= cfg.n_bf))
    return brute_force_oracle(g, phi, cfg);
  OracleConfig attempt = cfg;
  for (int t = 0;; ++t) {
    try {
      return cut_matching_oracle(g, phi, attempt);
    } catch (const OracleFailure&) {
      if (t >= cfg.max_reseeds) throw;
      attempt.seed = Rng::derive(cfg.seed, 7000 + t);
    }
  }
}

}  // namespace exdir
