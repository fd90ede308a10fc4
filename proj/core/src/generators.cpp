#include "exdir/generators.hpp"

#include <numeric>
#include <vector>

#include "exdir/errors.hpp"
#include "exdir/rng.hpp"

namespace exdir {

DiGraph gen_bidirected_clique(int n) {
  DiGraph g(n);
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = 0; v < n; ++v)
      if (u != v) g.add_edge(u, v);
  return g;
}

DiGraph gen_directed_cycle(int n) {
  DiGraph g(n);
  for (Vertex v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n);
  return g;
}

DiGraph gen_dag_path(int n) {
  DiGraph g(n);
  for (Vertex v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

namespace {

// Undirected pairing model appended into g at vertex offset.
void pair_model_into(DiGraph& g, int n, int d, int offset, Rng& rng) {
  std::vector<Vertex> stubs(static_cast<size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < d; ++k) stubs[static_cast<size_t>(v) * d + k] = v;
  rng.shuffle(stubs);
  for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
    Vertex a = stubs[i] + offset, b = stubs[i + 1] + offset;
    g.add_edge(a, b);
    g.add_edge(b, a);
  }
}

}  // namespace

DiGraph gen_random_dregular(int n, int d, uint64_t seed) {
  if (n < 1 || d < 1 || (static_cast<int64_t>(n) * d) % 2 != 0)
    throw ParseError("random-dregular needs n>=1, d>=1, n*d even");
  DiGraph g(n);
  Rng rng(seed);
  pair_model_into(g, n, d, 0, rng);
  return g;
}

DiGraph gen_two_communities(int n, int d, int cross, uint64_t seed) {
  if (n < 1 || d < 1 || cross < 0 || (static_cast<int64_t>(n) * d) % 2 != 0)
    throw ParseError("two-communities needs n>=1, d>=1, n*d even, cross>=0");
  DiGraph g(2 * n);
  Rng rng(seed);
  pair_model_into(g, n, d, 0, rng);
  pair_model_into(g, n, d, n, rng);
  for (int k = 0; k < cross; ++k) {
    Vertex a = static_cast<Vertex>(rng.below(n));
    Vertex b = static_cast<Vertex>(rng.below(n)) + n;
    g.add_edge(a, b);
    g.add_edge(b, a);
  }
  return g;
}

DiGraph generate(const std::string& name, int n, int d, int extra, uint64_t seed) {
  if (name == "bidirected-clique") return gen_bidirected_clique(n);
  if (name == "directed-cycle") return gen_directed_cycle(n);
  if (name == "dag-path") return gen_dag_path(n);
  if (name == "random-dregular") return gen_random_dregular(n, d, seed);
  if (name == "two-communities") return gen_two_communities(n, d, extra, seed);
  throw ParseError("unknown generator '" + name + "'");
}

}  // namespace exdir
