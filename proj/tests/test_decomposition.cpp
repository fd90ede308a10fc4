#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "exdir/decomposition.hpp"
#include "exdir/generators.hpp"
#include "exdir/rng.hpp"
#include "exdir/verification.hpp"

using namespace exdir;

namespace {

DecompConfig brute_cfg(uint64_t seed = 0) {
  DecompConfig cfg;
  cfg.kind = OracleKind::Brute;
  cfg.oracle.n_bf = 20;
  cfg.oracle.seed = seed;
  return cfg;
}

DiGraph two_k4_bridge() {
  DiGraph g = gen_bidirected_clique(4);
  int base = g.n();
  for (int i = 0; i < 4; ++i) g.add_vertex();
  for (Vertex u = 0; u < 4; ++u)
    for (Vertex v = 0; v < 4; ++v)
      if (u != v) g.add_edge(base + u, base + v);
  g.add_edge(0, base);  // one forward edge between the cliques
  return g;
}

bool passes(const DiGraph& g, const Decomposition& d) {
  return verify_decomposition(g, d, d.beta, Rational(1, 1000000), Rational(1, 1000),
                              kExactLimit)
      .overall();
}

}  // namespace

TEST_CASE("single vertex: one trivial cluster") {
  DiGraph g(1);
  Decomposition d = expander_decomposition(g, Rational(1, 10), brute_cfg());
  CHECK(d.clusters.size() == 1);
  CHECK(d.e_r.empty());
  CHECK(passes(g, d));
}

TEST_CASE("directed 3-path: singletons in path order, empty E^r") {
  DiGraph g = gen_dag_path(3);
  Decomposition d = expander_decomposition(g, Rational(1, 10), brute_cfg());
  REQUIRE(d.order.size() == 3);
  CHECK(d.e_r.empty());
  // topological: vertex 0's cluster first
  std::vector<Vertex> seq;
  for (int id : d.order) seq.push_back(d.clusters[id].verts.at(0));
  CHECK(seq == std::vector<Vertex>{0, 1, 2});
  CHECK(passes(g, d));
}

TEST_CASE("two K4s with one bridge: two clusters, budget respected") {
  DiGraph g = two_k4_bridge();
  Decomposition d = expander_decomposition(g, Rational(1, 10), brute_cfg());
  int nontrivial = 0;
  for (const auto& c : d.clusters)
    if (c.verts.size() > 1) ++nontrivial;
  CHECK(nontrivial == 2);
  CHECK(le_rational(static_cast<int64_t>(d.e_r.size()),
                    d.beta * d.phi * Rational(g.alive_edges())));
  CHECK(passes(g, d));
}

TEST_CASE("decomposition json round trips and stays verifiable") {
  DiGraph g = two_k4_bridge();
  Decomposition d = expander_decomposition(g, Rational(1, 10), brute_cfg());
  std::string js = d.to_json();
  Decomposition back = Decomposition::from_json(js, g);
  CHECK(back.to_json() == js);
  CHECK(passes(g, back));
}

TEST_CASE("same seed, same output") {
  DiGraph g = gen_two_communities(12, 4, 2, 3);
  DecompConfig cfg;
  cfg.kind = OracleKind::Auto;
  cfg.oracle.seed = 17;
  cfg.oracle.rounds_mult = 0.05;
  Decomposition a = expander_decomposition(g, Rational(1, 32), cfg);
  Decomposition b = expander_decomposition(g, Rational(1, 32), cfg);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("cut-matching end to end on a mid-size expander") {
  DiGraph g = gen_random_dregular(128, 8, 29);
  DecompConfig cfg;
  cfg.kind = OracleKind::CutMatching;
  cfg.oracle.seed = 4;
  cfg.oracle.rounds_mult = 0.05;
  Rational phi(1, 128);
  Decomposition d = expander_decomposition(g, phi, cfg);
  CHECK(verify_decomposition(g, d, d.beta, Rational(1, 100000000), Rational(1, 100000),
                             kExactLimit)
            .overall());
  CHECK(le_rational(static_cast<int64_t>(d.e_r.size()),
                    d.beta * phi * Rational(g.alive_edges())));
}

TEST_CASE("dynamic_new rejects corrupted witnesses") {
  DiGraph g = two_k4_bridge();
  Decomposition d = expander_decomposition(g, Rational(1, 10), brute_cfg());
  for (auto& c : d.clusters) {
    if (!c.witness.has_value()) continue;
    Witness w(c.witness->fwd.n());
    bool swapped = false;
    for (int i = 0; i < c.witness->fwd.edge_rows(); ++i) {
      const auto& we = c.witness->fwd.edge(i);
      if (!swapped && !we.path.empty()) {
        w.add_edge(we.head, we.tail, we.path);
        swapped = true;
      } else {
        w.add_edge(we.tail, we.head, we.path);
      }
    }
    w.finalize(g.edge_rows());
    c.witness->fwd = std::move(w);
    break;
  }
  DiGraph host = two_k4_bridge();
  CHECK_THROWS_AS(DynamicDecomposition(host, d, brute_cfg()), ContractViolation);
}

TEST_CASE("dynamic deletions: tombstones, splits, refinement") {
  DiGraph g = two_k4_bridge();
  Decomposition d0 = expander_decomposition(g, Rational(1, 10), brute_cfg());
  DecompConfig cfg = brute_cfg();
  cfg.restart_c = Rational(50);  // keep this test inside one epoch
  DynamicDecomposition dd(g, d0, cfg);

  SUBCASE("deleting the bridge is a pure tombstone") {
    EdgeId bridge = 24;  // the forward edge between the cliques
    REQUIRE(g.tail(bridge) == 0);
    REQUIRE(g.head(bridge) == 4);
    Decomposition before = dd.current();
    dd.remove_edge(bridge);
    CHECK_FALSE(g.alive(bridge));
    CHECK(dd.current().order == before.order);
    CHECK(passes(g, dd.current()));
    CHECK(verify_refinement(before, dd.current(), std::vector<EdgeId>{bridge}));
    CHECK_THROWS_AS(dd.remove_edge(bridge), ParseError);
  }

  SUBCASE("a stream of intra-cluster deletions keeps refining") {
    Decomposition prev = dd.current();
    Rng rng(13);
    int steps = 0;
    for (EdgeId e = 0; e < g.edge_rows() && steps < 8; ++e) {
      if (!g.alive(e)) continue;
      if (rng.below(3) != 0) continue;
      try {
        dd.remove_edge(e);
      } catch (const RestartRequired&) {
        break;
      }
      ++steps;
      CHECK(passes(g, dd.current()));
      CHECK(verify_refinement(prev, dd.current(), std::vector<EdgeId>{e}));
      prev = dd.current();
    }
    CHECK(steps > 0);
  }
}

TEST_CASE("maintain: empty stream emits the static snapshot once") {
  DiGraph g = two_k4_bridge();
  int snapshots = 0;
  MaintainStats stats = maintain(g, Rational(1, 10), std::vector<EdgeId>{}, brute_cfg(),
                                 [&](const Decomposition& d, int64_t step, int64_t epoch) {
                                   ++snapshots;
                                   CHECK(step == -1);
                                   CHECK(epoch == 0);
                                   CHECK(passes(g, d));
                                 });
  CHECK(snapshots == 1);
  CHECK(stats.deletions == 0);
  CHECK(stats.restarts == 0);
}

TEST_CASE("maintain: long stream crosses a restart and keeps verifying") {
  DiGraph g = gen_bidirected_clique(6);
  DecompConfig cfg = brute_cfg(1);
  std::vector<EdgeId> stream;
  Rng rng(2);
  for (EdgeId e = 0; e < 12; ++e) stream.push_back(e);
  int64_t last_epoch = 0;
  Decomposition prev;
  bool have_prev = false;
  MaintainStats stats =
      maintain(g, Rational(1, 10), stream, cfg,
               [&](const Decomposition& d, int64_t step, int64_t epoch) {
                 CHECK(passes(g, d));
                 if (have_prev && epoch == last_epoch && step >= 0) {
                   std::vector<EdgeId> delta{stream[static_cast<size_t>(step)]};
                   CHECK(verify_refinement(prev, d, delta));
                 }
                 prev = d;
                 have_prev = true;
                 last_epoch = epoch;
               });
  CHECK(stats.deletions == 12);
  CHECK(stats.restarts >= 1);  // K6's budget cannot absorb 12 deletions in one epoch
}
