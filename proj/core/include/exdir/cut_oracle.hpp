#pragma once

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "exdir/graph.hpp"
#include "exdir/rational.hpp"
#include "exdir/witness.hpp"

namespace exdir {

struct FakeEdge {
  Vertex tail, head;
  EdgeId id;  // id in the augmented graph (input edges keep their ids)
};

// A certificate that the input plus the fake edges is a phi-expander: one
// out-witness per orientation, embedded into `augmented`, at the reported
// exact psi_out.
struct Certified {
  DiGraph augmented;
  BiWitness bw;
  std::vector<FakeEdge> fakes;
  Rational psi_out;
  int64_t preimage_fake;  // |Pi^-1(F)|, summed over both witnesses
};

struct BalancedCut {
  std::vector<Vertex> a;
  CutStats stats;
  bool cut_is_fwd;  // which orientation achieved the sparsity bound
};

using CutOrWitness = std::variant<Certified, BalancedCut>;

struct OracleConfig {
  uint64_t seed = 0;
  double rounds_mult = 0.1;     // T = max(2, ceil(rounds_mult * log2(m)^2))
  double height_mult = 1.0;     // matching flows run at ceil(8 * mult * log2(2m))
  double c_fake = 4.0;          // secondary fake budget cap c_fake * m / log2(m)^2
  double c_bal = 0.25;          // balance: vol >= c_bal * m / log2(m)^4
  double c_cut = 0.1;           // sparsity: min-cut ratio <= c_cut * phi * log2(m)^2
  int n_bf = 12;                // auto mode switches to brute force at this size
  int num_projections = 4;
  int max_reseeds = 2;
  std::ostream* trace = nullptr;
};

enum class OracleKind { Auto, Brute, CutMatching };

// Exact realization of the cut-or-certify contract for n <= n_bf (<= 20):
// enumerate all cuts; return the sparsest balanced cut if one meets the
// bounds, else certify with the identity witness (plus a deterministic
// fake-edge repair loop when only unbalanced sparse cuts exist).
//
// The input view must be non-reversed with no tombstoned edges.
CutOrWitness brute_force_oracle(GraphView g, Rational phi, const OracleConfig& cfg);

// Randomized cut-matching game on the endpoint-split representation.
CutOrWitness cut_matching_oracle(GraphView g, Rational phi, const OracleConfig& cfg);

CutOrWitness run_oracle(GraphView g, Rational phi, const OracleConfig& cfg, OracleKind kind);

}  // namespace exdir
