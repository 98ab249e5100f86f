#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <rcising/currents.hpp>
#include <rcising/error.hpp>
#include <rcising/lattice.hpp>
#include <rcising/oracles/parity_enum.hpp>
#include <rcising/oracles/spin.hpp>
#include <rcising/oracles/trace_law.hpp>
#include <rcising/union_find.hpp>

namespace rcising::oracles {

// ---------------------------------------------------------------------------
// Switching lemma

struct SwitchingReport {
  std::string graph;
  VertexSet s1, s2;
  std::string event;
  double lhs = 0;
  double rhs = 0;
  double abs_diff = 0;
};

struct NamedBondEvent {
  std::string name;
  BondPredicate pred;
};

// Both sides of the switching identity
//   Σ_{∂n1=S1, ∂n2=S2} F(n1+n2) w(n1) w(n2)
//     = Σ_{∂n1=S1ΔS2, ∂n2=∅} F(n1+n2) w(n1) w(n2) 1[n1+n2 ∈ F_{S2}]
// for trace-measurable F, one report per event. The two sides share nothing
// but the graph: each is built from its own joint trace law.
inline std::vector<SwitchingReport> verify_switching(const Graph& g, double beta, const VertexSet& s1,
                                                     const VertexSet& s2,
                                                     const std::vector<NamedBondEvent>& events) {
  require(s1.size() % 2 == 0 && s2.size() % 2 == 0, "switching lemma needs even source sets");
  const TraceLaw left = joint_trace_law(g, beta, s1, s2);
  const TraceLaw right = joint_trace_law(g, beta, symmetric_difference(s1, s2), {});
  const std::size_t m = g.num_edges();
  std::vector<std::uint8_t> fs(left.size());
  for (std::uint32_t mask = 0; mask < fs.size(); ++mask) fs[mask] = fs_event(g, mask_to_bonds(mask, m), s2) ? 1 : 0;

  std::vector<SwitchingReport> out;
  for (const auto& ev : events) {
    SwitchingReport r{g.name(), s1, s2, ev.name};
    for (std::uint32_t mask = 0; mask < left.size(); ++mask) {
      if (left[mask] == 0 && (right[mask] == 0 || !fs[mask])) continue;
      if (!ev.pred(mask_to_bonds(mask, m))) continue;
      r.lhs += left[mask];
      if (fs[mask]) r.rhs += right[mask];
    }
    r.abs_diff = std::abs(r.lhs - r.rhs);
    out.push_back(std::move(r));
  }
  return out;
}

inline SwitchingReport verify_switching(const Graph& g, double beta, const VertexSet& s1, const VertexSet& s2,
                                        const BondPredicate& f, std::string name = "F") {
  return verify_switching(g, beta, s1, s2, {{std::move(name), f}}).front();
}

inline std::string set_label(const VertexSet& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ";" : "") + std::to_string(s[i]);
  return out;
}

// F = 1, every pair-connectivity indicator, and F_{S'} for every S' of size 2 or 4.
// The graph must outlive the returned predicates.
inline std::vector<NamedBondEvent> standard_switching_events(const Graph& g) {
  std::vector<NamedBondEvent> ev{{"one", [](const BondConfig&) { return true; }}};
  std::vector<VertexSet> pairs, sets;
  for (Vertex a = 0; a < g.num_vertices(); ++a)
    for (Vertex b = a + 1; b < g.num_vertices(); ++b) pairs.push_back({a, b});
  for (const VertexSet& pair : pairs)
    ev.push_back({"conn(" + set_label(pair) + ")",
                  [&g, pair](const BondConfig& c) { return connected(g, c, pair[0], pair[1]); }});
  sets = pairs;
  const std::size_t n = g.num_vertices();
  for (Vertex a = 0; a < n; ++a)
    for (Vertex b = a + 1; b < n; ++b)
      for (Vertex c = b + 1; c < n; ++c)
        for (Vertex d = c + 1; d < n; ++d) sets.push_back({a, b, c, d});
  for (const VertexSet& s : sets)
    ev.push_back({"F(" + set_label(s) + ")", [&g, s](const BondConfig& c) { return fs_event(g, c, s); }});
  return ev;
}

// ---------------------------------------------------------------------------
// Ursell four-point function

inline double ursell4(const Graph& g, double beta, Vertex x1, Vertex x2, Vertex x3, Vertex x4) {
  return SpinSum(g, beta).ursell4(x1, x2, x3, x4);
}

// P^{S1,S2}[a ↔ b in the trace of n1 + n2]; 0 when either partition function vanishes.
inline double joint_connection_probability(const Graph& g, double beta, const VertexSet& s1,
                                           const VertexSet& s2, Vertex a, Vertex b) {
  const TraceLaw law = joint_trace_law(g, beta, s1, s2);
  const double z = total(law);
  if (z <= 0) return 0;
  const auto ind = tabulate(g, [&](const BondConfig& c) { return connected(g, c, a, b); });
  return masked_sum(law, ind) / z;
}

struct UrsellCheck {
  double lhs;  // U_4(o, y, u, v) from spin sums
  double rhs;  // -2 ⟨σoσu⟩⟨σvσy⟩ P^{ou,vy}[C(u) ∩ C(v) ≠ ∅]
};

inline UrsellCheck ursell_representation_check(const Graph& g, double beta, Vertex o, Vertex y, Vertex u,
                                               Vertex v) {
  const SpinSum spins(g, beta);
  const double lhs = spins.ursell4(o, y, u, v);
  const VertexSet s1 = symmetric_difference({o}, {u});
  const VertexSet s2 = symmetric_difference({v}, {y});
  const double p = joint_connection_probability(g, beta, s1, s2, u, v);
  return {lhs, -2.0 * spins.two_point(o, u) * spins.two_point(v, y) * p};
}

// ---------------------------------------------------------------------------
// Backbone decomposition and chain rule

struct BackboneDecomposition {
  // γ as its edge sequence from x, with ρ(γ) = Z^{xy}[Γ = γ] / Z^∅.
  std::map<std::vector<EdgeId>, double> rho;
  double two_point_spin = 0;  // ⟨σxσy⟩ from spin sums
  double rho_total = 0;       // Σ_γ ρ(γ)
  Vertex x = 0, y = 0;

  std::vector<Vertex> vertices(const Graph& g, const std::vector<EdgeId>& path) const {
    std::vector<Vertex> vs{x};
    for (EdgeId e : path) vs.push_back(g.edge(e).other(vs.back()));
    return vs;
  }
};

inline BackboneDecomposition backbone_weights(const Graph& g, double beta, Vertex x, Vertex y) {
  require(x != y, "backbone sources must differ");
  BackboneDecomposition out;
  out.x = x;
  out.y = y;
  const double z0 = partition_function(g, beta, {});
  for_each_parity_state(g, beta, make_vertex_set({x, y}), [&](const ParityState& p, double w) {
    const Backbone bb = explore_backbone(g, p, x, y);
    std::vector<EdgeId> key;
    key.reserve(bb.path.size());
    for (const auto& s : bb.path) key.push_back(s.edge);
    out.rho[key] += w / z0;
  });
  for (const auto& [path, r] : out.rho) out.rho_total += r;
  out.two_point_spin = SpinSum(g, beta).two_point(x, y);
  return out;
}

// Whether the vertex sequence visits u at some step and v at the same or a later step.
inline bool passes_in_order(const std::vector<Vertex>& vs, Vertex u, Vertex v) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i] != u) continue;
    for (std::size_t j = i; j < vs.size(); ++j)
      if (vs[j] == v) return true;
  }
  return false;
}

struct ChainRuleProbe {
  double lhs;    // P^{xy}[Γ passes through u, then through v]
  double bound;  // ⟨σxσu⟩⟨σuσv⟩⟨σvσy⟩ / ⟨σxσy⟩
};

inline ChainRuleProbe chain_rule_probe(const Graph& g, double beta, Vertex x, Vertex y, Vertex u, Vertex v) {
  const BackboneDecomposition bd = backbone_weights(g, beta, x, y);
  if (bd.rho_total <= 0) throw ZeroMassError("x and y are not connected: P^{xy} undefined");
  double hit = 0;
  for (const auto& [path, r] : bd.rho)
    if (passes_in_order(bd.vertices(g, path), u, v)) hit += r;
  const SpinSum spins(g, beta);
  const double bound =
      spins.two_point(x, u) * spins.two_point(u, v) * spins.two_point(v, y) / spins.two_point(x, y);
  return {hit / bd.rho_total, bound};
}

// ---------------------------------------------------------------------------
// FK-Ising

enum class Boundary { Free, Wired };

struct FkSpec {
  Boundary boundary = Boundary::Free;
  double beta = 0;
  VertexSet conditioning;  // S; condition on F_S (empty: no conditioning)
  VertexSet wired;         // vertices joined outside G when boundary is Wired
};

// φ^ξ_{G,β}[ω | F_S] over all masks, normalised.
inline std::vector<double> fk_law(const Graph& g, const FkSpec& spec) {
  require(spec.conditioning.size() % 2 == 0, "conditioning set must be even");
  require(spec.beta >= 0, "beta must be nonnegative");
  check_vertex_mask_fits(g);
  const std::size_t m = g.num_edges();
  if (m > kMaxMaskEdges)
    throw OracleSizeError("FK enumeration supports at most " + std::to_string(kMaxMaskEdges) + " edges");
  const double p = std::expm1(2 * spec.beta);
  const std::size_t n = g.num_vertices();
  std::vector<double> law(std::size_t{1} << m, 0.0);
  UnionFind uf;
  std::vector<std::uint32_t> roots;
  for (std::uint32_t mask = 0; mask < law.size(); ++mask) {
    const BondConfig c = mask_to_bonds(mask, m);
    if (!fs_event(g, c, spec.conditioning)) continue;
    uf.reset(n + 1);
    if (spec.boundary == Boundary::Wired)
      for (Vertex w : spec.wired) uf.unite(w, static_cast<std::uint32_t>(n));
    for (EdgeId e = 0; e < m; ++e)
      if (c[e]) uf.unite(g.edge(e).u, g.edge(e).v);
    // k^ξ(ω): components meeting G, i.e. distinct roots over vertices of G.
    roots.clear();
    for (Vertex v = 0; v < n; ++v) roots.push_back(uf.find(v));
    std::sort(roots.begin(), roots.end());
    const int k = static_cast<int>(std::unique(roots.begin(), roots.end()) - roots.begin());
    law[mask] = std::ldexp(std::pow(p, __builtin_popcount(mask)), k);
  }
  const double z = total(law);
  if (z <= 0) throw ZeroMassError("conditioning event has zero FK mass");
  for (double& x : law) x /= z;
  return law;
}

inline double fk_exact(const Graph& g, const FkSpec& spec, const BondPredicate& event) {
  const auto law = fk_law(g, spec);
  return masked_sum(law, tabulate(g, event));
}

// Law of η = max(trace(n), ω) with n ~ P^S and ω i.i.d. Bernoulli(1 - e^{-β}),
// built from the explicit ParityState enumeration.
inline std::vector<double> sprinkled_trace_law(const Graph& g, double beta, const VertexSet& S) {
  const std::size_t m = g.num_edges();
  TraceLaw t(std::size_t{1} << m, 0.0);
  for_each_parity_state(g, beta, S, [&](const ParityState& p, double w) { t[bonds_to_mask(trace(p))] += w; });
  const double z = total(t);
  if (z <= 0) throw ZeroMassError("no current on this graph has the requested sources (Z^S = 0)");
  // P(η) = Σ_{m ⊆ η} T[m] q^{|E \ m|} (p/q)^{|η \ m|}, q = e^{-β}, p = 1 - q.
  const double q = std::exp(-beta);
  for (std::uint32_t mask = 0; mask < t.size(); ++mask)
    t[mask] *= std::pow(q, static_cast<double>(m - __builtin_popcount(mask))) / z;
  weighted_zeta(t, m, std::expm1(beta));
  return t;
}

struct CouplingCheck {
  double lhs;  // law of η
  double rhs;  // φ^0[· | F_S]
};

inline CouplingCheck coupling_exact_check(const Graph& g, double beta, const VertexSet& S,
                                          const BondPredicate& event) {
  const auto ind = tabulate(g, event);
  return {masked_sum(sprinkled_trace_law(g, beta, S), ind),
          masked_sum(fk_law(g, {Boundary::Free, beta, S, {}}), ind)};
}

inline double coupling_tv_distance(const Graph& g, double beta, const VertexSet& S) {
  const auto a = sprinkled_trace_law(g, beta, S);
  const auto b = fk_law(g, {Boundary::Free, beta, S, {}});
  double tv = 0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return tv / 2;
}

// ---------------------------------------------------------------------------
// Derivative of the inverse susceptibility

struct DerivativeReport {
  double chi = 0;
  double fd = 0;               // central difference of -dχ^{-1}/dβ, step h
  double fd_richardson = 0;    // Richardson combination of steps h and h/2
  double discretization = 0;   // |fd - fd_richardson|
  double spin_form = 0;        // (1/χ²) Σ_y Σ_{edges uv} ⟨σoσy; σuσv⟩
  double current_form = std::numeric_limits<double>::quiet_NaN();  // torus only
};

inline double inverse_susceptibility(const Graph& g, double beta, Vertex o) {
  return 1.0 / susceptibility(SpinSum(g, beta), o);
}

// χ_G(β) = Σ_x ⟨σoσx⟩_{G,β} with o the origin. The current form
//   (2d/χ²) Σ_{x,y} ⟨σoσx⟩⟨σ_{e1}σy⟩ P^{ox,e1y}[C(o) ∩ C(e1) = ∅]
// relies on translation and lattice symmetries, so it is computed on tori only.
inline DerivativeReport derivative_identity_probe(const Graph& g, double beta, double h,
                                                  bool with_current_form = true) {
  require(g.has_coordinates(), "derivative probe needs a lattice graph");
  require(h > 0 && beta - h > 0, "need 0 < h < beta");
  if (with_current_form && g.geometry() != Geometry::Torus)
    throw ConfigError("the current form of the derivative identity needs a torus");
  const Vertex o = g.origin();
  DerivativeReport r;

  const auto central = [&](double step) {
    return (inverse_susceptibility(g, beta - step, o) - inverse_susceptibility(g, beta + step, o)) / (2 * step);
  };
  r.fd = central(h);
  r.fd_richardson = (4 * central(h / 2) - r.fd) / 3;
  r.discretization = std::abs(r.fd - r.fd_richardson);

  const SpinSum spins(g, beta);
  r.chi = susceptibility(spins, o);
  double cov = 0;
  for (Vertex y = 0; y < g.num_vertices(); ++y) {
    const double oy = spins.two_point(o, y);
    for (const auto& e : g.edges())
      cov += spins.expectation(spin_mask({o, y, e.u, e.v})) - oy * spins.two_point(e.u, e.v);
  }
  r.spin_form = cov / (r.chi * r.chi);

  if (with_current_form) {
    const Vertex e1 = g.unit(0);
    const auto avoid = tabulate(g, [&](const BondConfig& c) { return !connected(g, c, o, e1); });
    double acc = 0;
    for (Vertex x = 0; x < g.num_vertices(); ++x) {
      const double gx = spins.two_point(o, x);
      for (Vertex y = 0; y < g.num_vertices(); ++y) {
        const double gy = spins.two_point(e1, y);
        const TraceLaw law = joint_trace_law(g, beta, symmetric_difference({o}, {x}),
                                             symmetric_difference({e1}, {y}));
        const double z = total(law);
        if (z <= 0) continue;
        acc += gx * gy * masked_sum(law, avoid) / z;
      }
    }
    r.current_form = 2.0 * g.dimension() * acc / (r.chi * r.chi);
  }
  return r;
}

}  // namespace rcising::oracles
