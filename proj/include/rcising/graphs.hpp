#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <rcising/lattice.hpp>
#include <rcising/union_find.hpp>

// Tiny explicit graphs for the exact oracles.
namespace rcising::graphs {

inline Graph complete2() { return Graph::from_edges(2, {{0, 1}}, "K2"); }

inline Graph path(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph::from_edges(n, e, "P" + std::to_string(n));
}

inline Graph cycle(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  e.push_back({0, static_cast<Vertex>(n - 1)});
  return Graph::from_edges(n, e, "C" + std::to_string(n));
}

// The 2x2 periodic square lattice. Wrapping makes every nearest-neighbour pair
// adjacent through two distinct bonds, so this is the 4-cycle with each edge
// doubled (d·L^d = 8 edges). Vertex (i, j) has index 2i + j.
inline Graph torus2x2() {
  return Graph::from_edges(4, {{0, 1}, {0, 1}, {0, 2}, {0, 2}, {1, 3}, {1, 3}, {2, 3}, {2, 3}}, "T2x2");
}

inline bool is_connected(const Graph& g) {
  if (g.num_vertices() == 0) return false;
  UnionFind uf(g.num_vertices());
  for (const auto& e : g.edges()) uf.unite(e.u, e.v);
  return uf.set_size(0) == g.num_vertices();
}

// Text form "n:u-v,u-v,..." used by fixtures and CSV output.
inline std::string describe(const Graph& g) {
  std::ostringstream os;
  os << g.num_vertices() << ':';
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    if (i) os << ',';
    os << g.edge(static_cast<EdgeId>(i)).u << '-' << g.edge(static_cast<EdgeId>(i)).v;
  }
  return os.str();
}

inline Graph parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("graph text must look like 'n:u-v,...'");
  const std::size_t n = std::stoul(text.substr(0, colon));
  std::vector<Edge> edges;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) throw ConfigError("bad edge '" + item + "'");
    edges.push_back({static_cast<Vertex>(std::stoul(item.substr(0, dash))),
                     static_cast<Vertex>(std::stoul(item.substr(dash + 1)))});
  }
  return Graph::from_edges(n, std::move(edges), text);
}

// All connected simple graphs with at most max_vertices vertices and at most
// max_edges edges, one representative per isomorphism class. The representative
// is the labelling with the lexicographically smallest sorted edge list.
inline std::vector<Graph> connected_corpus(std::size_t max_vertices = 5, std::size_t max_edges = 6) {
  std::vector<Graph> out;
  for (std::size_t n = 1; n <= max_vertices; ++n) {
    std::vector<Edge> all;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = u + 1; v < n; ++v) all.push_back({u, v});
    std::set<std::vector<std::pair<Vertex, Vertex>>> seen;
    std::vector<Vertex> perm(n);
    for (std::uint32_t mask = 0; mask < (1u << all.size()); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) > max_edges) continue;
      std::vector<Edge> es;
      for (std::size_t i = 0; i < all.size(); ++i)
        if (mask >> i & 1u) es.push_back(all[i]);
      const Graph g = Graph::from_edges(n, es);
      if (!is_connected(g)) continue;
      std::iota(perm.begin(), perm.end(), 0u);
      std::vector<std::pair<Vertex, Vertex>> best;
      do {
        std::vector<std::pair<Vertex, Vertex>> relabelled;
        for (const auto& e : es) {
          Vertex a = perm[e.u], b = perm[e.v];
          relabelled.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(relabelled.begin(), relabelled.end());
        if (best.empty() || relabelled < best) best = relabelled;
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (!seen.insert(best).second) continue;
    }
    for (const auto& canon : seen) {
      std::vector<Edge> es;
      for (auto [a, b] : canon) es.push_back({a, b});
      Graph g = Graph::from_edges(n, es);
      out.push_back(Graph::from_edges(n, es, describe(g)));
    }
  }
  return out;
}

// All even subsets of {0..n-1} of the given sizes, in lexicographic order.
inline std::vector<VertexSet> even_subsets(std::size_t n, std::initializer_list<std::size_t> sizes) {
  std::vector<VertexSet> out;
  for (std::size_t k : sizes) {
    if (k > n) continue;
    std::vector<Vertex> pick(k);
    std::vector<bool> sel(n, false);
    std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(k), true);
    std::vector<VertexSet> bucket;
    do {
      VertexSet s;
      for (Vertex i = 0; i < n; ++i)
        if (sel[i]) s.push_back(i);
      bucket.push_back(s);
    } while (std::prev_permutation(sel.begin(), sel.end()));
    out.insert(out.end(), bucket.begin(), bucket.end());
  }
  return out;
}

}  // namespace rcising::graphs
