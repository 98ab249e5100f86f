#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <rcising/currents.hpp>
#include <rcising/error.hpp>
#include <rcising/lattice.hpp>

namespace rcising::oracles {

inline constexpr std::size_t kMaxParityEdges = 12;
inline constexpr std::size_t kMaxMaskEdges = 20;

inline void check_vertex_mask_fits(const Graph& g) {
  if (g.num_vertices() > 32)
    throw OracleSizeError("exact enumeration supports at most 32 vertices");
}

// Odd-edge masks O with ∂O = S, by walking all 2^|E| subsets with an
// incrementally maintained vertex-parity mask.
inline std::vector<std::uint32_t> odd_subsets(const Graph& g, const VertexSet& S) {
  check_vertex_mask_fits(g);
  const std::size_t m = g.num_edges();
  if (m > kMaxMaskEdges)
    throw OracleSizeError("subset enumeration supports at most " + std::to_string(kMaxMaskEdges) + " edges");
  std::uint32_t target = 0;
  for (Vertex v : S) target ^= 1u << v;
  std::vector<std::uint32_t> ends(m);
  for (EdgeId e = 0; e < m; ++e) ends[e] = (1u << g.edge(e).u) ^ (1u << g.edge(e).v);
  std::vector<std::uint32_t> out;
  std::vector<std::uint32_t> boundary(std::size_t{1} << m);
  boundary[0] = 0;
  if (target == 0) out.push_back(0);
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    const auto low = static_cast<unsigned>(__builtin_ctz(mask));
    boundary[mask] = boundary[mask & (mask - 1)] ^ ends[low];
    if (boundary[mask] == target) out.push_back(mask);
  }
  return out;
}

// Visits every ParityState with sources S together with its weight
// Π_e ClassWeights(state_e) (the sum of w_β(n) over the currents it represents).
inline void for_each_parity_state(const Graph& g, double beta, const VertexSet& S,
                                  const std::function<void(const ParityState&, double)>& visit) {
  if (g.num_edges() > kMaxParityEdges)
    throw OracleSizeError("parity enumeration supports at most " + std::to_string(kMaxParityEdges) +
                          " edges (graph has " + std::to_string(g.num_edges()) + ")");
  require(S.size() % 2 == 0, "source set must be even");
  const ClassWeights w(beta);
  const std::size_t m = g.num_edges();
  ParityState p(m);
  std::vector<EdgeId> even;
  for (std::uint32_t odd : odd_subsets(g, S)) {
    even.clear();
    double base = 1.0;
    for (EdgeId e = 0; e < m; ++e) {
      if (odd >> e & 1u) {
        p[e] = Parity::Odd;
        base *= w.odd;
      } else {
        even.push_back(e);
      }
    }
    for (std::uint32_t sub = 0; sub < (1u << even.size()); ++sub) {
      double weight = base;
      for (std::size_t i = 0; i < even.size(); ++i) {
        if (sub >> i & 1u) {
          p[even[i]] = Parity::EvenPositive;
          weight *= w.even_positive;
        } else {
          p[even[i]] = Parity::Zero;
        }
      }
      visit(p, weight);
    }
  }
}

inline double partition_function(const Graph& g, double beta, const VertexSet& S) {
  double z = 0;
  for_each_parity_state(g, beta, S, [&](const ParityState&, double w) { z += w; });
  return z;
}

using StatePredicate = std::function<bool(const ParityState&, const BondConfig&)>;

struct EventProbability {
  double probability;
  double partition;  // Z^S
};

// P^S_{G,β}[E] for an event measurable with respect to (parity, trace).
inline EventProbability current_event_prob(const Graph& g, double beta, const VertexSet& S,
                                           const StatePredicate& event) {
  double z = 0, hit = 0;
  for_each_parity_state(g, beta, S, [&](const ParityState& p, double w) {
    z += w;
    if (event(p, trace(p))) hit += w;
  });
  if (z <= 0) throw ZeroMassError("no current on this graph has the requested sources (Z^S = 0)");
  return {hit / z, z};
}

// ⟨σ_S⟩ = Z^S / Z^∅.
inline double correlation_via_currents(const Graph& g, double beta, const VertexSet& S) {
  require(S.size() % 2 == 0, "source set must be even");
  if (S.empty()) return 1.0;
  return partition_function(g, beta, S) / partition_function(g, beta, {});
}

}  // namespace rcising::oracles
