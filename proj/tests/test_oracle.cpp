#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "exdir/cut_oracle.hpp"
#include "exdir/generators.hpp"
#include "exdir/verification.hpp"

using namespace exdir;

namespace {

DiGraph two_cliques_bridged(int k, bool both_ways) {
  DiGraph g = gen_bidirected_clique(k);
  int base = g.n();
  for (int i = 0; i < k; ++i) g.add_vertex();
  for (Vertex u = 0; u < k; ++u)
    for (Vertex v = 0; v < k; ++v)
      if (u != v) g.add_edge(base + u, base + v);
  g.add_edge(0, base);
  if (both_ways) g.add_edge(base, 0);
  return g;
}

bool same_witness_shape(const Certified& a, const Certified& b) {
  if (a.fakes.size() != b.fakes.size()) return false;
  if (a.bw.fwd.edge_rows() != b.bw.fwd.edge_rows()) return false;
  for (int i = 0; i < a.bw.fwd.edge_rows(); ++i) {
    if (a.bw.fwd.edge(i).tail != b.bw.fwd.edge(i).tail) return false;
    if (a.bw.fwd.edge(i).head != b.bw.fwd.edge(i).head) return false;
    if (a.bw.fwd.edge(i).path != b.bw.fwd.edge(i).path) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("brute force certifies bidirected K6 at phi = 1/10") {
  DiGraph g = gen_bidirected_clique(6);
  OracleConfig cfg;
  CutOrWitness r = brute_force_oracle(view_of(g), Rational(1, 10), cfg);
  REQUIRE(std::holds_alternative<Certified>(r));
  const Certified& c = std::get<Certified>(r);
  CHECK(c.fakes.empty());
  CHECK(c.psi_out >= Rational(1, 10));
  CHECK(verify_witness(view_of(c.augmented), c.bw.fwd, Rational(1, 10), c.psi_out, true).ok());
  CHECK(verify_witness(reverse(view_of(c.augmented)), c.bw.bwd, Rational(1, 10), c.psi_out, true)
            .ok());
}

TEST_CASE("brute force splits two bridged K4s") {
  DiGraph g = two_cliques_bridged(4, true);
  OracleConfig cfg;
  CutOrWitness r = brute_force_oracle(view_of(g), Rational(1, 10), cfg);
  REQUIRE(std::holds_alternative<BalancedCut>(r));
  const BalancedCut& cut = std::get<BalancedCut>(r);
  CHECK(cut.a.size() == 4);
  CHECK(std::min(cut.stats.e_fwd, cut.stats.e_bwd) == 1);
}

TEST_CASE("single directed edge yields a degenerate 0-sparse cut") {
  DiGraph g(2);
  g.add_edge(0, 1);
  OracleConfig cfg;
  CutOrWitness r = brute_force_oracle(view_of(g), Rational(1, 10), cfg);
  REQUIRE(std::holds_alternative<BalancedCut>(r));
  const BalancedCut& cut = std::get<BalancedCut>(r);
  CHECK(std::min(cut.stats.e_fwd, cut.stats.e_bwd) == 0);
}

TEST_CASE("brute force never certifies below phi") {
  // directed cycle has expansion 1/2; phi above that must not certify
  DiGraph g = gen_directed_cycle(6);
  OracleConfig cfg;
  cfg.c_cut = 10.0;  // let the cut branch take anything sparse
  CutOrWitness r = brute_force_oracle(view_of(g), Rational(3, 4), cfg);
  CHECK(std::holds_alternative<BalancedCut>(r));
}

TEST_CASE("brute force fake repair under a forced balance threshold") {
  // K4 with a pendant: the only sparse cuts are unbalanced; with c_bal high
  // enough no balanced cut qualifies, so the oracle must repair with fakes.
  DiGraph g = gen_bidirected_clique(4);
  Vertex p = g.add_vertex();
  g.add_edge(3, p);
  g.add_edge(p, 3);
  OracleConfig cfg;
  cfg.c_bal = 400.0;  // balance threshold above every cut
  cfg.c_fake = 300.0;
  CutOrWitness r = brute_force_oracle(view_of(g), Rational(2, 5), cfg);
  REQUIRE(std::holds_alternative<Certified>(r));
  const Certified& c = std::get<Certified>(r);
  CHECK(!c.fakes.empty());
  ExpansionResult ex = brute_force_expansion(view_of(c.augmented));
  CHECK((ex.infinite || ex.value >= Rational(2, 5)));
  CHECK(verify_witness(view_of(c.augmented), c.bw.fwd, Rational(2, 5), c.psi_out, true).ok());
}

TEST_CASE("cut-matching certifies a random regular expander") {
  DiGraph g = gen_random_dregular(64, 8, 11);  // 512 edges
  OracleConfig cfg;
  cfg.seed = 3;
  cfg.rounds_mult = 0.05;  // 4 rounds at this size
  Rational phi(1, 64);
  CutOrWitness r = cut_matching_oracle(view_of(g), phi, cfg);
  REQUIRE(std::holds_alternative<Certified>(r));
  const Certified& c = std::get<Certified>(r);
  CHECK(verify_witness(view_of(c.augmented), c.bw.fwd, phi, c.psi_out, false).ok());
  CHECK(verify_witness(reverse(view_of(c.augmented)), c.bw.bwd, phi, c.psi_out, false).ok());
  // fake budget per the contract
  CHECK(c.preimage_fake <= std::max<int64_t>(1, static_cast<int64_t>(
                               cfg.c_fake * 512.0 / (9.0 * 9.0))));
  // witness degrees track the round count exactly
  int64_t r_fwd = 0;
  for (int i = 0; i < c.bw.fwd.edge_rows(); ++i)
    if (c.bw.fwd.alive(i) && c.bw.fwd.edge(i).tail == 0) ++r_fwd;
  CHECK(c.bw.fwd.degree(0) % g.degree(0) == 0);
}

TEST_CASE("cut-matching separates two sparse communities") {
  DiGraph g = gen_two_communities(32, 8, 2, 19);
  OracleConfig cfg;
  cfg.seed = 5;
  cfg.rounds_mult = 0.05;
  Rational phi(1, 64);
  CutOrWitness r = cut_matching_oracle(view_of(g), phi, cfg);
  REQUIRE(std::holds_alternative<BalancedCut>(r));
  const BalancedCut& cut = std::get<BalancedCut>(r);
  // the balanced side splits off roughly one community
  CHECK(cut.stats.vol_s >= 64);
  CHECK(cut.stats.vol_sbar >= 64);
  CHECK(std::min(cut.stats.e_fwd, cut.stats.e_bwd) <= 8);
}

TEST_CASE("cut-matching is deterministic under a fixed seed") {
  DiGraph g = gen_random_dregular(32, 6, 23);
  OracleConfig cfg;
  cfg.seed = 42;
  cfg.rounds_mult = 0.05;
  CutOrWitness a = cut_matching_oracle(view_of(g), Rational(1, 48), cfg);
  CutOrWitness b = cut_matching_oracle(view_of(g), Rational(1, 48), cfg);
  REQUIRE(a.index() == b.index());
  if (std::holds_alternative<Certified>(a))
    CHECK(same_witness_shape(std::get<Certified>(a), std::get<Certified>(b)));
  else
    CHECK(std::get<BalancedCut>(a).a == std::get<BalancedCut>(b).a);
}

TEST_CASE("oracle input contracts") {
  DiGraph g = gen_bidirected_clique(3);
  OracleConfig cfg;
  CHECK_THROWS_AS(brute_force_oracle(reverse(view_of(g)), Rational(1, 4), cfg),
                  ContractViolation);
  DiGraph big = gen_random_dregular(32, 4, 1);
  CHECK_THROWS_AS(brute_force_oracle(view_of(big), Rational(1, 4), cfg), SizeError);
  DiGraph one(2);
  one.add_edge(0, 1);
  CHECK_THROWS_AS(cut_matching_oracle(view_of(one), Rational(1, 4), cfg), ContractViolation);
}

TEST_CASE("auto mode dispatches by size") {
  OracleConfig cfg;
  cfg.rounds_mult = 0.05;
  cfg.seed = 9;
  DiGraph small = gen_bidirected_clique(5);
  CutOrWitness r = run_oracle(view_of(small), Rational(1, 10), cfg, OracleKind::Auto);
  CHECK(std::holds_alternative<Certified>(r));  // exact certify, no fakes
  CHECK(std::get<Certified>(r).fakes.empty());
}
