#pragma once

#include <cstdint>
#include <string>

#include "exdir/graph.hpp"

namespace exdir {

// Seed-deterministic test-corpus generators. "bidirected" means both
// orientations of each undirected edge are present as separate edges.

DiGraph gen_bidirected_clique(int n);
DiGraph gen_directed_cycle(int n);
DiGraph gen_dag_path(int n);

// Pairing-model random d-regular undirected graph, bidirected; n*d must be
// even. Self-loops and parallel edges may occur and are kept.
DiGraph gen_random_dregular(int n, int d, uint64_t seed);

// Two random d-regular communities of n vertices each joined by `cross`
// bidirected edges.
DiGraph gen_two_communities(int n, int d, int cross, uint64_t seed);

// Dispatch by generator name; throws ParseError on unknown names.
DiGraph generate(const std::string& name, int n, int d, int extra, uint64_t seed);

}  // namespace exdir
