#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "exdir/generators.hpp"
#include "exdir/pruning.hpp"
#include "exdir/rng.hpp"
#include "exdir/verification.hpp"

using namespace exdir;

namespace {

Witness identity(GraphView g) {
  Witness w(g.n());
  for (EdgeId e = 0; e < g.edge_rows(); ++e) {
    if (!g.alive(e)) continue;
    if (g.tail(e) == g.head(e))
      w.add_self_loop(g.tail(e));
    else
      w.add_edge(g.tail(e), g.head(e), {e});
  }
  w.finalize(g.edge_rows());
  return w;
}

BiWitness identity_bi(const DiGraph& g) {
  return BiWitness{identity(view_of(g)), identity(reverse(view_of(g)))};
}

DiGraph multi_clique(int n, int mult) {
  DiGraph g(n);
  for (int k = 0; k < mult; ++k)
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v)
        if (u != v) g.add_edge(u, v);
  return g;
}

// A robust multigraph expander with one weakly attached pendant vertex:
// K6 x mult on {0..5} plus vertex 6 linked to 0 and 1 by one bidirected
// edge each. The last four edge ids are the pendant links.
DiGraph pendant_host(int mult) {
  DiGraph g = multi_clique(6, mult);
  Vertex p = g.add_vertex();
  g.add_edge(0, p);
  g.add_edge(p, 0);
  g.add_edge(1, p);
  g.add_edge(p, 1);
  return g;
}

}  // namespace

TEST_CASE("prune_sweep matches the hand traces") {
  const int64_t h = 9;
  std::vector<char> tilde{1, 1, 1, 1};
  std::vector<int64_t> unit{1, 1, 1, 1};
  SUBCASE("two at the top") {
    std::vector<int64_t> lvl{h, h, 0, 0};
    auto s = prune_sweep(lvl, unit, tilde, Rational(1, 10), h);
    CHECK(s == std::vector<Vertex>{0, 1});
  }
  SUBCASE("one at the top, gap below") {
    std::vector<int64_t> lvl{h, 0, 0, 0};
    auto s = prune_sweep(lvl, unit, tilde, Rational(1, 10), h);
    CHECK(s == std::vector<Vertex>{0});
  }
  SUBCASE("everything at the top") {
    std::vector<int64_t> lvl{h, h, h, h};
    auto s = prune_sweep(lvl, unit, tilde, Rational(1, 10), h);
    CHECK(s == std::vector<Vertex>{0, 1, 2, 3});
  }
  SUBCASE("threshold keeps a heavy bottom") {
    // adjacent levels: top 2 vertices, then a level of volume 2 -> the
    // check 2+2 < 1.1*2 fails, absorb; then empty level stops the sweep
    std::vector<int64_t> lvl{h, h, h - 1, h - 1};
    auto s = prune_sweep(lvl, unit, tilde, Rational(1, 10), h);
    CHECK(s == std::vector<Vertex>{0, 1, 2, 3});
  }
}

TEST_CASE("dir_new initializes idle") {
  DiGraph g = gen_bidirected_clique(4);
  DirPruning dp(view_of(g), identity(view_of(g)), Rational(1, 8), Rational(1, 4),
                h_default(12, Rational(1, 8)));
  CHECK(dp.tilde_size() == 4);
  CHECK(dp.prunes().empty());
  CHECK(dp.e_r().empty());
  for (Vertex v = 0; v < 4; ++v) CHECK(dp.engine().level(v) == 0);
}

TEST_CASE("integer units follow the ceil formulas") {
  DiGraph g = gen_bidirected_clique(4);
  DirPruning dp(view_of(g), identity(view_of(g)), Rational(1, 8), Rational(1, 2), 64);
  CHECK(dp.cap_unit() == 512);  // ceil(16 * 8 * 4)
  CHECK(dp.src_unit() == 8);    // ceil(4 / (1/2))
}

TEST_CASE("witness structural failure is rejected at construction") {
  DiGraph g = gen_bidirected_clique(3);
  Witness broken(3);
  broken.add_edge(0, 1, {1});  // wrong path
  broken.finalize(g.edge_rows());
  CHECK_THROWS_AS(
      DirPruning(view_of(g), std::move(broken), Rational(1, 8), Rational(1, 4), 16),
      ContractViolation);
}

TEST_CASE("remove_edges: no-op and absorbed deletions") {
  DiGraph g = multi_clique(6, 8);  // 240 edges
  DirPruning dp(view_of(g), identity(view_of(g)), Rational(1, 8), Rational(1, 4),
                h_default(g.alive_edges(), Rational(1, 8)));
  SUBCASE("empty deletion is a no-op") {
    dp.remove_edges(std::vector<EdgeId>{});
    CHECK(dp.prunes().empty());
    CHECK(dp.engine().counters().work() == 0);
  }
  SUBCASE("one deletion gets absorbed by sink slack") {
    dp.remove_edges(std::vector<EdgeId>{0});
    CHECK(dp.prunes().empty());
    CHECK(dp.tilde_size() == 6);
    CHECK(dp.preimage_deleted() == 1);
    // the remaining graph is still a strong expander
    InducedView iv = induce(view_of(g), dp.tilde_vertices());
    (void)iv;
    ExpansionResult ex = brute_force_expansion(view_of(g));
    CHECK((ex.infinite || ex.value >= Rational(1, 8)));
  }
  SUBCASE("guard trips before the budget is breached") {
    // budget: 16 * |Pi^-1| < 240/14 = 17.1 -> at most 1 killed witness edge
    CHECK_THROWS_AS(dp.remove_edges(std::vector<EdgeId>{0, 1}), BudgetExceeded);
    // failed call must not have mutated anything
    CHECK(dp.preimage_deleted() == 0);
    CHECK(dp.engine().edge_in_network(0));
  }
}

TEST_CASE("isolating the pendant prunes exactly the pendant") {
  DiGraph g = pendant_host(32);  // 964 edges, budget 16*4 = 64 < 68.8
  const EdgeId first_pendant = static_cast<EdgeId>(g.edge_rows() - 4);
  Rational phi(1, 8), psi(1, 4);
  DirPruning dp(view_of(g), identity(view_of(g)), phi, psi,
                h_default(g.alive_edges(), phi));
  std::vector<EdgeId> d{first_pendant, first_pendant + 1, first_pendant + 2,
                        first_pendant + 3};
  dp.remove_edges(d);
  REQUIRE(dp.prunes().size() == 1);
  CHECK(dp.prunes()[0].verts == std::vector<Vertex>{6});
  CHECK(dp.prunes()[0].vol_g == 4);
  CHECK(dp.prunes()[0].vol_w0 == 4);
  CHECK(dp.tilde_size() == 6);
  CHECK(dp.e_r().empty());  // the pruned vertex had no surviving edges
  // Theorem-style bounds on this trace
  CHECK(dp.prunes()[0].vol_w0 <= 4 * dp.preimage_deleted());
  // and the event log recorded it
  REQUIRE(dp.event_log().size() == 1);
  CHECK(dp.event_log()[0].size == 1);

  // extract: W0 plus source self-loops, valid for the surviving core
  Witness wt = dp.extract_witness();
  InducedView core = induce(view_of(g), dp.tilde_vertices());
  WitnessReport rep = verify_witness(core, wt, phi * psi * psi * psi * psi / Rational(400),
                                     psi * psi / Rational(20), false);
  CHECK(rep.ok());
}

TEST_CASE("extract_witness with no deletions returns the witness unchanged") {
  DiGraph g = gen_bidirected_clique(5);
  DirPruning dp(view_of(g), identity(view_of(g)), Rational(1, 8), Rational(1, 4), 32);
  Witness wt = dp.extract_witness();
  CHECK(wt.alive_count() == g.alive_edges());
  for (Vertex v = 0; v < g.n(); ++v) CHECK(wt.degree(v) == g.degree(v));
}

TEST_CASE("external remove_vertices shrinks and stays consistent") {
  // remove the lightly attached pendant; the injected sources are absorbed
  // by the survivors' sink slack and nothing cascades
  DiGraph g = pendant_host(8);
  Rational phi(1, 8), psi(1, 4);
  DirPruning dp(view_of(g), identity(view_of(g)), phi, psi,
                h_default(g.alive_edges(), phi));
  dp.remove_vertices(std::vector<Vertex>{6});
  CHECK(dp.tilde_size() == 6);
  CHECK_FALSE(dp.in_tilde(6));
  CHECK(dp.engine().check_valid_state().valid());
  // witness restricted: no alive witness edge touches the removed vertex
  for (int i = 0; i < dp.witness().edge_rows(); ++i)
    if (dp.witness().alive(i)) {
      CHECK(dp.witness().edge(i).tail != 6);
      CHECK(dp.witness().edge(i).head != 6);
    }
  CHECK_THROWS_AS(dp.remove_vertices(std::vector<Vertex>{6}), ContractViolation);
}

TEST_CASE("bi pruning keeps both active sets in lockstep") {
  DiGraph g = pendant_host(32);
  const EdgeId first_pendant = static_cast<EdgeId>(g.edge_rows() - 4);
  Rational phi(1, 8), psi(1, 4);
  BiPruning bp(g, identity_bi(g), phi, psi, h_default(g.alive_edges(), phi));
  CHECK(bp.core_size() == 7);
  bp.remove_edges(std::vector<EdgeId>{first_pendant, first_pendant + 1, first_pendant + 2,
                                      first_pendant + 3});
  CHECK(bp.core_size() == 6);
  CHECK(bp.fwd().tilde_vertices() == bp.bwd().tilde_vertices());
  // both directions may prune {6} before the sync loop runs
  int64_t total_prunes = static_cast<int64_t>(bp.fwd().prunes().size() +
                                              bp.bwd().prunes().size());
  CHECK(total_prunes >= 1);
  auto blocks = bp.ordered_blocks();
  // blocks: possibly [ {6} bwd ], core, possibly [ {6} fwd ]
  REQUIRE(blocks.size() == 2);
  bool core_seen = false;
  for (auto& b : blocks) core_seen |= b.is_core;
  CHECK(core_seen);

  BiWitness ext = bp.extract_witnesses();
  InducedView core = induce(view_of(g), bp.core());
  Rational phi2 = phi * psi * psi * psi * psi / Rational(400);
  Rational psi2 = psi * psi / Rational(20);
  CHECK(verify_witness(core, ext.fwd, phi2, psi2, false).ok());
  InducedView rcore{reverse(view_of(g)), core.mask};
  CHECK(verify_witness(rcore, ext.bwd, phi2, psi2, false).ok());
}

TEST_CASE("bi remove_edges leaves no state change when the guard trips") {
  DiGraph g = multi_clique(6, 8);
  BiPruning bp(g, identity_bi(g), Rational(1, 8), Rational(1, 4),
               h_default(g.alive_edges(), Rational(1, 8)));
  CHECK_THROWS_AS(bp.remove_edges(std::vector<EdgeId>{0, 1, 2}), BudgetExceeded);
  CHECK(bp.core_size() == 6);
  CHECK(bp.fwd().preimage_deleted() == 0);
  CHECK(bp.bwd().preimage_deleted() == 0);
}

TEST_CASE("per-call sparsity claim holds on randomized pendant traces") {
  // Delete random subsets of the pendant links across random multi-expander
  // hosts and assert e_{G-D}(S, V-tilde \ S) <= (phi/2) vol_G(S) per prune.
  Rng rng(77);
  for (int it = 0; it < 20; ++it) {
    int mult = 32 + static_cast<int>(rng.below(8));
    DiGraph g = pendant_host(mult);
    Rational phi(1, 8), psi(1, 4);
    DirPruning dp(view_of(g), identity(view_of(g)), phi, psi,
                  h_default(g.alive_edges(), phi));
    std::vector<EdgeId> d;
    for (EdgeId e = static_cast<EdgeId>(g.edge_rows() - 4); e < g.edge_rows(); ++e)
      d.push_back(e);
    dp.remove_edges(d);
    int64_t er_total = 0;
    int64_t volp_total = 0;
    for (const auto& p : dp.prunes()) {
      Rational lhs(p.er_added);
      Rational rhs = phi / Rational(2) * Rational(p.vol_g);
      CHECK(lhs <= rhs);
      er_total += p.er_added;
      volp_total += p.vol_g;
    }
    if (volp_total > 0)
      CHECK(Rational(er_total) <= phi / Rational(4) * Rational(volp_total));
  }
}
