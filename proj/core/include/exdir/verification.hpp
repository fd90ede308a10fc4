#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "exdir/graph.hpp"
#include "exdir/rational.hpp"

namespace exdir {

struct Decomposition;

// Result of exhaustive cut enumeration. `infinite` on single-vertex (or
// edgeless) instances where no cut qualifies.
struct ExpansionResult {
  bool infinite = false;
  Rational value{0, 1};
  std::vector<Vertex> cut;  // a minimizing S, ascending ids
};

constexpr int kExactLimit = 20;  // 2^20 cuts, milliseconds at desk scale

// Visits every nonempty proper subset with its cut counts; masks arrive in
// Gray-code order. fn(mask, e_fwd, e_bwd, vol_s, vol_sbar).
void enumerate_cuts(
    GraphView g,
    const std::function<void(uint32_t, int64_t, int64_t, int64_t, int64_t)>& fn);

// min over nonempty proper S of min(e(S,Sb), e(Sb,S)) / min(vol(S), vol(Sb)).
ExpansionResult brute_force_expansion(GraphView g);
ExpansionResult brute_force_expansion(const InducedView& g);

// min over S with 0 < vol(S) <= e(G) of e(S,Sb) / vol(S).
ExpansionResult brute_force_out_expansion(GraphView g);
ExpansionResult brute_force_out_expansion(const InducedView& g);

// Contrapositive of the deletion helper lemma, for one S: within the
// out-expander domain vol_G(S) <= e(G),
//   vol_G(S) >= 4|D|/(3 phi)  implies  e_{G \ D}(S, V \ S) >= (phi/4) vol_G(S).
// S outside the domain passes vacuously.
bool check_lemma_helper(GraphView g, std::span<const Vertex> s, std::span<const EdgeId> d,
                        Rational phi);

struct VerificationReport {
  struct Check {
    std::string name;
    bool pass;
    std::string measured;
    std::string threshold;
    std::string location;
  };
  std::vector<Check> checks;
  bool overall() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void add(std::string name, bool pass, std::string measured, std::string threshold,
           std::string location = "") {
    checks.push_back({std::move(name), pass, std::move(measured), std::move(threshold),
                      std::move(location)});
  }
  std::string to_json() const;
  void print_table(std::ostream& out) const;
};

// Checks an expander decomposition of the host's alive subgraph:
//   - the cluster vertex sets partition V,
//   - every cluster declares quality at least (phi_floor, psi_floor),
//   - clusters of size <= exact_limit pass brute-force expansion at their
//     declared phi,
//   - every non-trivial cluster's witnesses pass structural checks (exact
//     expansion too when small enough),
//   - |E^r| <= beta_budget * phi_floor * e(alive graph),
//   - the contraction minus (deleted + E^r) is a DAG and the stored order
//     is topological.
VerificationReport verify_decomposition(const DiGraph& host, const Decomposition& d,
                                        Rational beta_budget, Rational phi_floor,
                                        Rational psi_floor, int exact_limit);

// Refinement: every new cluster inside an old one, and old E^r present in
// new E^r plus the deletions that separate the two snapshots.
bool verify_refinement(const Decomposition& older, const Decomposition& newer,
                       std::span<const EdgeId> deleted_between);

}  // namespace exdir
