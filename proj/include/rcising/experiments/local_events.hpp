#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include <rcising/currents.hpp>
#include <rcising/lattice.hpp>
#include <rcising/rng.hpp>
#include <rcising/samplers.hpp>
#include <rcising/union_find.hpp>

namespace rcising::experiments {

// An event that reads the trace on a fixed list of edges. The predicate sees a
// BondConfig indexed by position in `edges`.
struct LocalEvent {
  std::string name;
  std::vector<EdgeId> edges;
  std::function<bool(const BondConfig&)> holds;

  VertexSet vertices(const Graph& g) const {
    std::vector<Vertex> vs;
    for (EdgeId e : edges) {
      vs.push_back(g.edge(e).u);
      vs.push_back(g.edge(e).v);
    }
    return make_vertex_set(std::move(vs));
  }
};

inline EdgeId edge_between(const Graph& g, Vertex a, Vertex b) {
  for (EdgeId e : g.incident(a))
    if (g.edge(e).other(a) == b) return e;
  throw ConfigError("no edge between the requested vertices");
}

// Edges with both endpoints in Λ_r.
inline std::vector<EdgeId> box_edges(const Graph& g, int r) {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (g.sup_norm(g.edge(e).u) <= r && g.sup_norm(g.edge(e).v) <= r) out.push_back(e);
  return out;
}

// Edges with both endpoints outside Λ_r.
inline std::vector<EdgeId> outside_edges(const Graph& g, int r) {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (g.sup_norm(g.edge(e).u) > r && g.sup_norm(g.edge(e).v) > r) out.push_back(e);
  return out;
}

// The event {edge (a, b) open in the trace}.
inline LocalEvent edge_open_event(const Graph& g, Vertex a, Vertex b, std::string name = "edge_open") {
  return {std::move(name), {edge_between(g, a, b)}, [](const BondConfig& c) { return c[0]; }};
}

// The event {0 is joined to ∂Λ_n by open edges inside Λ_n}.
inline LocalEvent box_crossing_event(const Graph& g, int n, std::string name = "box_crossing") {
  require(n >= 1, "box crossing needs n >= 1");
  const std::vector<EdgeId> edges = box_edges(g, n);
  const Vertex o = g.origin();
  const Graph* gp = &g;
  return {std::move(name), edges, [gp, edges, o, n](const BondConfig& c) {
            UnionFind uf(gp->num_vertices());
            for (std::size_t i = 0; i < edges.size(); ++i)
              if (c[i]) uf.unite(gp->edge(edges[i]).u, gp->edge(edges[i]).v);
            for (EdgeId e : edges)
              for (Vertex v : {gp->edge(e).u, gp->edge(e).v})
                if (gp->sup_norm(v) == n && uf.find(v) == uf.find(o)) return true;
            return false;
          }};
}

// The event {edge (a, a + e1) open} for a = (r + 1) e1, which lies outside Λ_r.
inline LocalEvent far_edge_event(const Graph& g, int r, std::string name = "far_edge") {
  Coord a(static_cast<std::size_t>(g.dimension()), 0);
  a[0] = r + 1;
  Coord b = a;
  b[0] = r + 2;
  return edge_open_event(g, g.vertex_at(a), g.vertex_at(b), std::move(name));
}

inline LocalEvent always_event(std::string name = "always") {
  return {std::move(name), {}, [](const BondConfig&) { return true; }};
}

// Trace of the current on the event's edges, sprinkling even edges only there.
// With fk set, each edge is further maxed with Bernoulli(1 - e^{-β}).
inline BondConfig local_trace(const std::vector<std::uint8_t>& odd, const std::vector<EdgeId>& edges, double beta,
                              Philox& rng, bool fk = false) {
  const double q = even_open_probability(beta);
  const double p = -std::expm1(-beta);
  BondConfig c(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    bool open = odd[edges[i]] || rng.bernoulli(q);
    if (fk) open = rng.bernoulli(p) || open;
    c.open[i] = open ? 1 : 0;
  }
  return c;
}

}  // namespace rcising::experiments
