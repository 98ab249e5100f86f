#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <rcising/error.hpp>
#include <initializer_list>

#include <rcising/lattice.hpp>
#include <rcising/union_find.hpp>

namespace rcising {

// A current: nonnegative integer multiplicity per edge (indexed by EdgeId).
struct Current {
  std::vector<std::uint32_t> multiplicity;

  Current() = default;
  explicit Current(std::size_t num_edges) : multiplicity(num_edges, 0) {}
  explicit Current(std::vector<std::uint32_t> m) : multiplicity(std::move(m)) {}
  Current(std::initializer_list<std::uint32_t> m) : multiplicity(m) {}
  std::size_t size() const noexcept { return multiplicity.size(); }
  std::uint32_t operator[](EdgeId e) const { return multiplicity[e]; }
};

// Per-edge reduction of a current: n_e = 0, n_e even and positive, or n_e odd.
enum class Parity : std::uint8_t { Zero, EvenPositive, Odd };

inline constexpr char parity_char(Parity p) {
  return p == Parity::Zero ? '0' : (p == Parity::EvenPositive ? 'e' : 'o');
}

inline Parity parity_of(std::uint32_t multiplicity) {
  if (multiplicity == 0) return Parity::Zero;
  return (multiplicity & 1u) ? Parity::Odd : Parity::EvenPositive;
}

class ParityState {
 public:
  ParityState() = default;
  explicit ParityState(std::size_t num_edges, Parity fill = Parity::Zero) : state_(num_edges, fill) {}
  explicit ParityState(const Current& n) : state_(n.size()) {
    for (std::size_t e = 0; e < n.size(); ++e) state_[e] = parity_of(n.multiplicity[e]);
  }

  std::size_t size() const noexcept { return state_.size(); }
  Parity operator[](EdgeId e) const { return state_[e]; }
  Parity& operator[](EdgeId e) { return state_[e]; }
  bool odd(EdgeId e) const { return state_[e] == Parity::Odd; }
  bool open(EdgeId e) const { return state_[e] != Parity::Zero; }

  // One character per edge in rank order: '0' zero, 'e' even positive, 'o' odd.
  std::string to_string() const {
    std::string s(state_.size(), '0');
    for (std::size_t e = 0; e < state_.size(); ++e) s[e] = parity_char(state_[e]);
    return s;
  }

  static ParityState from_string(std::string_view s) {
    ParityState p(s.size());
    for (std::size_t e = 0; e < s.size(); ++e) {
      switch (s[e]) {
        case '0': p.state_[e] = Parity::Zero; break;
        case 'e': p.state_[e] = Parity::EvenPositive; break;
        case 'o': p.state_[e] = Parity::Odd; break;
        default: throw ConfigError("parity strings use only '0', 'e', 'o'");
      }
    }
    return p;
  }

  friend bool operator==(const ParityState&, const ParityState&) = default;

 private:
  std::vector<Parity> state_;
};

// Percolation configuration on the edges.
struct BondConfig {
  std::vector<std::uint8_t> open;

  BondConfig() = default;
  explicit BondConfig(std::size_t num_edges, bool fill = false) : open(num_edges, fill ? 1 : 0) {}
  std::size_t size() const noexcept { return open.size(); }
  bool operator[](EdgeId e) const { return open[e] != 0; }
  friend bool operator==(const BondConfig&, const BondConfig&) = default;
};

// Total weight of each multiplicity class: Σ β^k/k! over k = 0, even k > 0, odd k.
struct ClassWeights {
  double zero = 1.0;
  double even_positive = 0.0;
  double odd = 0.0;

  explicit ClassWeights(double beta)
      : even_positive(std::cosh(beta) - 1.0), odd(std::sinh(beta)) {
    // cosh β - 1 loses digits for small β; use the series form there.
    if (beta < 1e-2) {
      const double b2 = beta * beta;
      even_positive = b2 / 2 * (1 + b2 / 12 * (1 + b2 / 30 * (1 + b2 / 56)));
    }
  }
  double operator()(Parity p) const noexcept {
    return p == Parity::Zero ? zero : (p == Parity::EvenPositive ? even_positive : odd);
  }
  double even_total() const noexcept { return zero + even_positive; }  // cosh β
};

inline std::uint32_t vertex_parity_count(const Graph& g, const ParityState& p, Vertex v) {
  std::uint32_t c = 0;
  for (EdgeId e : g.incident(v)) c += p.odd(e) ? 1u : 0u;
  return c;
}

// ∂n: vertices whose incident multiplicities sum to an odd number.
inline VertexSet sources(const Graph& g, const ParityState& p) {
  require(p.size() == g.num_edges(), "parity state does not match the graph");
  std::vector<std::uint8_t> odd(g.num_vertices(), 0);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (p.odd(e)) {
      odd[g.edge(e).u] ^= 1;
      odd[g.edge(e).v] ^= 1;
    }
  }
  VertexSet s;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (odd[v]) s.push_back(v);
  return s;
}

inline VertexSet sources(const Graph& g, const Current& n) { return sources(g, ParityState(n)); }

// ln w_β(n) = Σ_e (n_e ln β - ln n_e!).
inline double log_weight(const Current& n, double beta) {
  require(beta > 0, "beta must be positive");
  const double lb = std::log(beta);
  double s = 0;
  for (auto k : n.multiplicity) {
    if (k == 0) continue;
    s += k * lb - std::lgamma(static_cast<double>(k) + 1.0);
  }
  return s;
}

inline BondConfig trace(const ParityState& p) {
  BondConfig c(p.size());
  for (std::size_t e = 0; e < p.size(); ++e) c.open[e] = p.open(static_cast<EdgeId>(e)) ? 1 : 0;
  return c;
}

inline BondConfig trace(const Current& n) {
  BondConfig c(n.size());
  for (std::size_t e = 0; e < n.size(); ++e) c.open[e] = n.multiplicity[e] > 0 ? 1 : 0;
  return c;
}

// Edgewise union of two percolation configurations (the trace of n1 + n2).
inline BondConfig merge(const BondConfig& a, const BondConfig& b) {
  BondConfig c(a.size());
  for (std::size_t e = 0; e < a.size(); ++e) c.open[e] = a.open[e] | b.open[e];
  return c;
}

struct Clusters {
  std::vector<std::uint32_t> label;  // cluster id per vertex, ids dense from 0
  std::uint32_t count = 0;
  bool connected(Vertex x, Vertex y) const { return label[x] == label[y]; }
};

inline Clusters clusters(const Graph& g, const BondConfig& c) {
  require(c.size() == g.num_edges(), "bond configuration does not match the graph");
  UnionFind uf(g.num_vertices());
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (c[e]) uf.unite(g.edge(e).u, g.edge(e).v);
  Clusters out;
  out.label.assign(g.num_vertices(), UINT32_MAX);
  std::vector<std::uint32_t> root_label(g.num_vertices(), UINT32_MAX);
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    auto r = uf.find(v);
    if (root_label[r] == UINT32_MAX) root_label[r] = out.count++;
    out.label[v] = root_label[r];
  }
  return out;
}

inline bool connected(const Graph& g, const BondConfig& c, Vertex x, Vertex y) {
  if (x == y) return true;
  UnionFind uf(g.num_vertices());
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (c[e]) uf.unite(g.edge(e).u, g.edge(e).v);
  return uf.same(x, y);
}

// F_S: every cluster of c meets S an even number of times.
inline bool fs_event(const Graph& g, const BondConfig& c, const VertexSet& S) {
  require(S.size() % 2 == 0, "F_S needs an even source set");
  if (S.empty()) return true;
  const Clusters cl = clusters(g, c);
  std::vector<std::uint8_t> hits(cl.count, 0);
  for (Vertex s : S) hits[cl.label[s]] ^= 1;
  for (auto h : hits)
    if (h) return false;
  return true;
}

struct Step {
  EdgeId edge;
  Vertex from;
  Vertex to;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Backbone {
  std::vector<Step> path;        // Γ, oriented from x to y
  std::vector<EdgeId> explored;  // Γ̄ ⊇ Γ, sorted by rank

  // x_0, x_1, ..., x_k.
  std::vector<Vertex> vertices() const {
    std::vector<Vertex> vs;
    if (path.empty()) return vs;
    vs.push_back(path.front().from);
    for (const auto& s : path) vs.push_back(s.to);
    return vs;
  }
};

// Backbone exploration: from the current endpoint take the ≺-earliest
// unexplored incident odd edge; every unexplored incident edge preceding it is
// marked explored (it is necessarily even). Stops on first arrival at y.
// "Incident edges preceding x_i x_{i+1}" is read at every step i, including i = 0.
inline Backbone explore_backbone(const Graph& g, const ParityState& p, Vertex x, Vertex y) {
  require(x != y, "backbone endpoints must differ");
  const VertexSet s = sources(g, p);
  if (s != make_vertex_set({x, y}))
    throw ConfigError("backbone exploration needs sources exactly {x, y}");

  std::vector<std::uint8_t> explored(g.num_edges(), 0);
  Backbone bb;
  Vertex at = x;
  while (at != y) {
    EdgeId next = UINT32_MAX;
    for (EdgeId e : g.incident(at)) {  // increasing rank
      if (explored[e]) continue;
      explored[e] = 1;
      if (p.odd(e)) {
        next = e;
        break;
      }
    }
    // Parity guarantees an unexplored odd edge at every vertex reached before y.
    if (next == UINT32_MAX) throw std::logic_error("backbone exploration stalled");
    const Vertex to = g.edge(next).other(at);
    bb.path.push_back({next, at, to});
    at = to;
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (explored[e]) bb.explored.push_back(e);
  return bb;
}

// p with the edges of Γ̄ reset to Zero.
inline ParityState remove_explored(const ParityState& p, const Backbone& bb) {
  ParityState q = p;
  for (EdgeId e : bb.explored) q[e] = Parity::Zero;
  return q;
}

}  // namespace rcising
