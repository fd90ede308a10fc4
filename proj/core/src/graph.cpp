#include "exdir/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace exdir {

namespace {

std::vector<char> make_mask(int n, std::span<const Vertex> s, const DiGraph& g) {
  std::vector<char> mask(n, 0);
  for (Vertex v : s) {
    g.check_vertex(v);
    mask[v] = 1;
  }
  return mask;
}

}  // namespace

int64_t InducedView::alive_edges() const {
  int64_t cnt = 0;
  for (EdgeId e = 0; e < base.edge_rows(); ++e)
    if (edge_alive(e)) ++cnt;
  return cnt;
}

int64_t InducedView::degree(Vertex v) const {
  if (!mask[v]) return 0;
  int64_t d = 0;
  for (EdgeId e : base.out_edges(v))
    if (edge_alive(e)) ++d;
  for (EdgeId e : base.in_edges(v))
    if (edge_alive(e)) ++d;
  return d;
}

InducedView induce(GraphView g, std::span<const Vertex> vtilde) {
  return InducedView{g, make_mask(g.n(), vtilde, *g.g)};
}

CutStats cut_stats(GraphView g, std::span<const Vertex> s) {
  std::vector<char> in_s = make_mask(g.n(), s, *g.g);
  CutStats st;
  for (EdgeId e = 0; e < g.edge_rows(); ++e) {
    if (!g.alive(e)) continue;
    bool t = in_s[g.tail(e)], h = in_s[g.head(e)];
    if (t && !h) st.e_fwd++;
    if (!t && h) st.e_bwd++;
  }
  for (Vertex v = 0; v < g.n(); ++v)
    (in_s[v] ? st.vol_s : st.vol_sbar) += g.degree(v);
  return st;
}

CutStats cut_stats(const InducedView& g, std::span<const Vertex> s) {
  std::vector<char> in_s = make_mask(g.base.n(), s, *g.base.g);
  CutStats st;
  for (EdgeId e = 0; e < g.base.edge_rows(); ++e) {
    if (!g.edge_alive(e)) continue;
    bool t = in_s[g.base.tail(e)], h = in_s[g.base.head(e)];
    if (t && !h) st.e_fwd++;
    if (!t && h) st.e_bwd++;
  }
  for (Vertex v = 0; v < g.base.n(); ++v) {
    if (!g.contains(v)) continue;
    (in_s[v] ? st.vol_s : st.vol_sbar) += g.degree(v);
  }
  return st;
}

int64_t volume(GraphView g, std::span<const Vertex> s) {
  int64_t vol = 0;
  for (Vertex v : s) vol += g.degree(v);
  return vol;
}

bool is_dag(GraphView g) {
  // Kahn's algorithm over alive edges.
  int n = g.n();
  std::vector<int64_t> indeg(n, 0);
  for (EdgeId e = 0; e < g.edge_rows(); ++e) {
    if (!g.alive(e)) continue;
    if (g.tail(e) == g.head(e)) return false;
    indeg[g.head(e)]++;
  }
  std::vector<Vertex> stack;
  for (Vertex v = 0; v < n; ++v)
    if (indeg[v] == 0) stack.push_back(v);
  int seen = 0;
  while (!stack.empty()) {
    Vertex v = stack.back();
    stack.pop_back();
    ++seen;
    for (EdgeId e : g.out_edges(v)) {
      if (!g.alive(e)) continue;
      if (--indeg[g.head(e)] == 0) stack.push_back(g.head(e));
    }
  }
  return seen == n;
}

DiGraph contract(GraphView g, const std::vector<std::vector<Vertex>>& classes,
                 std::span<const EdgeId> drop) {
  int n = g.n();
  std::vector<int> cls(n, -1);
  for (size_t i = 0; i < classes.size(); ++i) {
    for (Vertex v : classes[i]) {
      g.g->check_vertex(v);
      if (cls[v] != -1) throw ContractViolation("contract: classes not disjoint at vertex " +
                                                std::to_string(v));
      cls[v] = static_cast<int>(i);
    }
  }
  for (Vertex v = 0; v < n; ++v)
    if (cls[v] == -1) throw ContractViolation("contract: vertex " + std::to_string(v) +
                                              " not covered by any class");
  std::vector<char> dropped(g.edge_rows(), 0);
  for (EdgeId e : drop) {
    g.g->check_edge(e);
    dropped[e] = 1;
  }
  DiGraph out(static_cast<int>(classes.size()));
  for (EdgeId e = 0; e < g.edge_rows(); ++e) {
    if (!g.alive(e) || dropped[e]) continue;
    int a = cls[g.tail(e)], b = cls[g.head(e)];
    if (a != b) out.add_edge(a, b);
  }
  return out;
}

Subgraph materialize(GraphView g, std::span<const Vertex> verts) {
  Subgraph sub;
  sub.from_base_vertex.assign(g.n(), -1);
  sub.to_base_vertex.assign(verts.begin(), verts.end());
  std::sort(sub.to_base_vertex.begin(), sub.to_base_vertex.end());
  sub.graph.resize(static_cast<int>(sub.to_base_vertex.size()));
  for (size_t i = 0; i < sub.to_base_vertex.size(); ++i) {
    Vertex v = sub.to_base_vertex[i];
    g.g->check_vertex(v);
    sub.from_base_vertex[v] = static_cast<Vertex>(i);
  }
  for (EdgeId e = 0; e < g.edge_rows(); ++e) {
    if (!g.alive(e)) continue;
    Vertex t = sub.from_base_vertex[g.tail(e)], h = sub.from_base_vertex[g.head(e)];
    if (t < 0 || h < 0) continue;
    sub.graph.add_edge(t, h);
    sub.to_base_edge.push_back(e);
  }
  return sub;
}

DiGraph parse_edge_list(std::istream& in) {
  std::string line;
  int lineno = 0;
  std::vector<std::pair<long long, long long>> rows;
  std::vector<int> row_lines;
  while (std::getline(in, line)) {
    ++lineno;
    size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ls(line);
    long long a, b;
    if (!(ls >> a >> b)) throw ParseError("expected two integers", lineno);
    std::string rest;
    if (ls >> rest) throw ParseError("trailing token '" + rest + "'", lineno);
    rows.emplace_back(a, b);
    row_lines.push_back(lineno);
  }
  // The first row is an "n m" header iff n >= 1 and m matches the number of
  // remaining rows (at least one). This keeps "0 0" a self-loop and
  // "0 1\n0 1" a pair of parallel edges while accepting "3 2\n0 1\n1 2";
  // ids >= n under an identified header are a hard error.
  size_t first_edge = 0;
  int header_n = -1;
  if (rows.size() >= 2 && rows[0].first >= 1 &&
      rows[0].second == static_cast<long long>(rows.size() - 1)) {
    header_n = static_cast<int>(rows[0].first);
    first_edge = 1;
  }
  long long max_id = -1;
  for (size_t i = first_edge; i < rows.size(); ++i) {
    auto [a, b] = rows[i];
    if (a < 0 || b < 0) throw ParseError("negative vertex id", row_lines[i]);
    if (header_n >= 0 && (a >= header_n || b >= header_n))
      throw ParseError("vertex id exceeds header n=" + std::to_string(header_n), row_lines[i]);
    max_id = std::max({max_id, a, b});
  }
  DiGraph g(header_n >= 0 ? header_n : static_cast<int>(max_id + 1));
  for (size_t i = first_edge; i < rows.size(); ++i)
    g.add_edge(static_cast<Vertex>(rows[i].first), static_cast<Vertex>(rows[i].second));
  return g;
}

void write_edge_list(std::ostream& out, const DiGraph& g) {
  out << g.n() << " " << g.alive_edges() << "\n";
  for (EdgeId e = 0; e < g.edge_rows(); ++e)
    if (g.alive(e)) out << g.tail(e) << " " << g.head(e) << "\n";
}

std::vector<EdgeId> parse_deletion_stream(std::istream& in, const DiGraph& g) {
  std::string line;
  int lineno = 0;
  std::vector<EdgeId> ids;
  while (std::getline(in, line)) {
    ++lineno;
    size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ls(line);
    long long e;
    if (!(ls >> e)) throw ParseError("expected an edge id", lineno);
    std::string rest;
    if (ls >> rest) throw ParseError("trailing token '" + rest + "'", lineno);
    if (e < 0 || e >= g.edge_rows()) throw ParseError("edge id out of range", lineno);
    ids.push_back(static_cast<EdgeId>(e));
  }
  return ids;
}

}  // namespace exdir
