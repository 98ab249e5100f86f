#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <rcising/error.hpp>

namespace rcising {

using Vertex = std::uint32_t;
using EdgeId = std::uint32_t;
using VertexSet = std::vector<Vertex>;  // sorted, no duplicates
using Coord = std::vector<int>;

struct Edge {
  Vertex u;
  Vertex v;
  Vertex other(Vertex w) const noexcept { return w == u ? v : u; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class Geometry { Explicit, FreeBox, Torus };

inline const char* to_string(Geometry g) {
  switch (g) {
    case Geometry::FreeBox: return "box";
    case Geometry::Torus: return "torus";
    default: return "explicit";
  }
}

inline VertexSet make_vertex_set(std::vector<Vertex> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Symmetric difference of two sorted vertex sets.
inline VertexSet symmetric_difference(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Finite graph with a fixed edge order: edge ids ARE ranks, so e < f means e ≺ f.
// Lattice graphs additionally carry coordinates; explicit graphs (tiny oracle
// test graphs) may contain parallel edges but never self-loops.
class Graph {
 public:
  Graph() = default;

  // Explicit graph; edges keep the given order as their rank.
  static Graph from_edges(std::size_t num_vertices, std::vector<Edge> edges, std::string name = {}) {
    Graph g;
    g.n_ = num_vertices;
    g.name_ = std::move(name);
    for (auto& e : edges) {
      require(e.u < num_vertices && e.v < num_vertices, "edge endpoint out of range");
      require(e.u != e.v, "self-loops are not allowed");
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    g.edges_ = std::move(edges);
    g.build_incidence();
    return g;
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  // Incident edges of v in increasing rank.
  std::span<const EdgeId> incident(Vertex v) const { return incident_[v]; }
  std::size_t degree(Vertex v) const { return incident_[v].size(); }
  const std::string& name() const noexcept { return name_; }

  Geometry geometry() const noexcept { return geometry_; }
  int dimension() const noexcept { return dim_; }
  // Box radius n for FreeBox, side L for Torus.
  int size() const noexcept { return size_; }
  bool has_coordinates() const noexcept { return geometry_ != Geometry::Explicit; }

  Coord coord(Vertex v) const {
    return Coord(coords_.begin() + static_cast<std::ptrdiff_t>(v) * dim_,
                 coords_.begin() + static_cast<std::ptrdiff_t>(v + 1) * dim_);
  }
  int coord(Vertex v, int axis) const { return coords_[static_cast<std::size_t>(v) * dim_ + axis]; }

  // Vertex at the given coordinates; torus coordinates are reduced mod L.
  Vertex vertex_at(const Coord& x) const {
    require(has_coordinates() && static_cast<int>(x.size()) == dim_, "coordinate dimension mismatch");
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) {
      int c = x[a];
      if (geometry_ == Geometry::Torus) {
        c = ((c % size_) + size_) % size_;
      } else {
        require(std::abs(c) <= size_, "coordinate outside the box");
        c += size_;
      }
      idx = idx * static_cast<std::size_t>(side()) + static_cast<std::size_t>(c);
    }
    return static_cast<Vertex>(idx);
  }

  // The origin, and the unit vector e_1 (first coordinate).
  Vertex origin() const { return vertex_at(Coord(static_cast<std::size_t>(dim_), 0)); }
  Vertex unit(int axis = 0, int sign = 1) const {
    Coord x(static_cast<std::size_t>(dim_), 0);
    x[axis] = sign;
    return vertex_at(x);
  }

  // Displacement y - x, wrapped into (-L/2, L/2] on a torus.
  Coord displacement(Vertex x, Vertex y) const {
    Coord d(static_cast<std::size_t>(dim_));
    for (int a = 0; a < dim_; ++a) {
      int t = coord(y, a) - coord(x, a);
      if (geometry_ == Geometry::Torus) t = wrap(t);
      d[a] = t;
    }
    return d;
  }

  // ℓ∞ norm of the (wrapped) position; Λ_m = {x : sup_norm(x) <= m}.
  int sup_norm(Vertex v) const {
    int m = 0;
    for (int a = 0; a < dim_; ++a) {
      int c = coord(v, a);
      if (geometry_ == Geometry::Torus) c = wrap(c);
      m = std::max(m, std::abs(c));
    }
    return m;
  }

  double euclidean_norm(Vertex v) const {
    double s = 0;
    for (int a = 0; a < dim_; ++a) {
      int c = coord(v, a);
      if (geometry_ == Geometry::Torus) c = wrap(c);
      s += static_cast<double>(c) * c;
    }
    return std::sqrt(s);
  }

  // Upper bound on the graph diameter; used for the burn-in heuristic.
  std::size_t diameter_estimate() const {
    if (geometry_ == Geometry::FreeBox) return static_cast<std::size_t>(2 * size_ * dim_);
    if (geometry_ == Geometry::Torus) return static_cast<std::size_t>((size_ / 2) * dim_);
    return n_;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_ && a.geometry_ == b.geometry_ && a.dim_ == b.dim_ &&
           a.size_ == b.size_;
  }

 private:
  friend Graph build_lattice(int d, int size, Geometry geometry);

  int side() const noexcept { return geometry_ == Geometry::Torus ? size_ : 2 * size_ + 1; }
  int wrap(int t) const noexcept {
    t = ((t % size_) + size_) % size_;
    return 2 * t > size_ ? t - size_ : t;
  }

  void build_incidence() {
    incident_.assign(n_, {});
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      incident_[edges_[e].u].push_back(e);
      incident_[edges_[e].v].push_back(e);
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> incident_;
  std::string name_;
  Geometry geometry_ = Geometry::Explicit;
  int dim_ = 0;
  int size_ = 0;
  std::vector<int> coords_;
};

// Free box Λ_n = [-n, n]^d (size = n >= 0) or torus (Z/LZ)^d (size = L >= 3).
// Vertices are indexed row-major over coordinates (first axis slowest) and
// edges are sorted lexicographically by their endpoint coordinates, which with
// this indexing is the lexicographic order of (min index, max index).
inline Graph build_lattice(int d, int size, Geometry geometry) {
  require(d >= 1, "dimension must be >= 1");
  require(geometry != Geometry::Explicit, "build_lattice needs FreeBox or Torus");
  if (geometry == Geometry::FreeBox) require(size >= 0, "box radius must be >= 0");
  if (geometry == Geometry::Torus)
    require(size >= 3, "torus side must be >= 3 (smaller sides create loops or parallel edges)");

  Graph g;
  g.geometry_ = geometry;
  g.dim_ = d;
  g.size_ = size;
  g.name_ = std::string(to_string(geometry)) + "-d" + std::to_string(d) + "-" + std::to_string(size);
  const int side = g.side();
  std::size_t n = 1;
  for (int a = 0; a < d; ++a) n *= static_cast<std::size_t>(side);
  require(n < (std::size_t{1} << 31), "lattice too large");
  g.n_ = n;
  g.coords_.resize(n * static_cast<std::size_t>(d));
  const int offset = geometry == Geometry::Torus ? 0 : -size;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t rest = v;
    for (int a = d - 1; a >= 0; --a) {
      g.coords_[v * d + a] = static_cast<int>(rest % side) + offset;
      rest /= side;
    }
  }
  std::vector<Edge> edges;
  edges.reserve(n * static_cast<std::size_t>(d));
  std::size_t stride = n;
  std::vector<std::size_t> strides(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    stride /= side;
    strides[a] = stride;
  }
  for (std::size_t v = 0; v < n; ++v) {
    for (int a = 0; a < d; ++a) {
      const int c = g.coords_[v * d + a] - offset;
      std::size_t w;
      if (c + 1 < side) {
        w = v + strides[a];
      } else if (geometry == Geometry::Torus) {
        w = v - static_cast<std::size_t>(side - 1) * strides[a];
      } else {
        continue;
      }
      edges.push_back({static_cast<Vertex>(std::min(v, w)), static_cast<Vertex>(std::max(v, w))});
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
  g.edges_ = std::move(edges);
  g.build_incidence();
  return g;
}

// Rank of each edge under ≺. Edge ids are ranks, so this is the identity map;
// it exists so callers can hold the order as data (e.g. to compare two builds).
inline std::vector<std::uint32_t> canonical_edge_order(const Graph& g) {
  std::vector<std::uint32_t> rank(g.num_edges());
  std::iota(rank.begin(), rank.end(), 0u);
  return rank;
}

// Λ_m, Ann(m, M) = Λ_M \ Λ_m, or the vertex boundary ∂Λ_m.
struct Region {
  enum class Kind { Box, Annulus, Boundary };
  Kind kind = Kind::Box;
  double inner = 0;  // m
  double outer = 0;  // M (annulus only)

  static Region box(double m) { return {Kind::Box, m, m}; }
  static Region annulus(double m, double M) { return {Kind::Annulus, m, M}; }
  static Region boundary(double m) { return {Kind::Boundary, m, m}; }
};

inline bool in_box(const Graph& g, Vertex v, double m) { return g.sup_norm(v) <= m; }

inline VertexSet region_vertices(const Graph& g, const Region& r) {
  require(g.has_coordinates(), "regions need a lattice graph");
  const double reach = r.kind == Region::Kind::Annulus ? r.outer : r.inner;
  const int fit = g.geometry() == Geometry::Torus ? (g.size() - 1) / 2 : g.size();
  if (reach > fit) throw ConfigError("region exceeds the graph");
  if (r.kind == Region::Kind::Annulus) require(r.inner < r.outer, "annulus needs m < M");
  VertexSet out;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    const int s = g.sup_norm(v);
    switch (r.kind) {
      case Region::Kind::Box:
        if (s <= r.inner) out.push_back(v);
        break;
      case Region::Kind::Annulus:
        if (s <= r.outer && !(s <= r.inner)) out.push_back(v);
        break;
      case Region::Kind::Boundary: {
        // x ∈ Λ_m with a lattice neighbour outside Λ_m.
        if (s > r.inner) break;
        for (int a = 0; a < g.dimension(); ++a) {
          int c = g.coord(v, a);
          if (g.geometry() == Geometry::Torus) c = c * 2 > g.size() ? c - g.size() : c;
          if (std::abs(c) + 1 > r.inner) {
            out.push_back(v);
            break;
          }
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace rcising
