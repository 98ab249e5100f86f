#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <rcising/currents.hpp>
#include <rcising/oracles/parity_enum.hpp>

// Laws of the trace of a current (or of the sum of two independent currents)
// as unnormalised weights over edge masks. Bit e of a mask is 1 when edge e is
// open. Everything is a sum of positive terms, so no cancellation occurs.
namespace rcising::oracles {

using TraceLaw = std::vector<double>;

inline BondConfig mask_to_bonds(std::uint32_t mask, std::size_t num_edges) {
  BondConfig c(num_edges);
  for (std::size_t e = 0; e < num_edges; ++e) c.open[e] = (mask >> e) & 1u;
  return c;
}

inline std::uint32_t bonds_to_mask(const BondConfig& c) {
  std::uint32_t m = 0;
  for (std::size_t e = 0; e < c.size(); ++e)
    if (c[static_cast<EdgeId>(e)]) m |= 1u << e;
  return m;
}

// T[m] <- Σ_{U ⊆ m} T[U] r^{|m \ U|}.
inline void weighted_zeta(TraceLaw& t, std::size_t num_edges, double r) {
  const std::size_t size = std::size_t{1} << num_edges;
  for (std::size_t bit = 1; bit < size; bit <<= 1)
    for (std::size_t m = 0; m < size; ++m)
      if (m & bit) t[m] += r * t[m ^ bit];
}

// Trace law of P^S: T[m] = Σ_{O ⊆ m, ∂O = S} sinh^{|O|} (cosh - 1)^{|m \ O|}; Σ_m T[m] = Z^S.
inline TraceLaw single_trace_law(const Graph& g, double beta, const VertexSet& S) {
  const ClassWeights w(beta);
  const std::size_t m = g.num_edges();
  TraceLaw t(std::size_t{1} << m, 0.0);
  for (std::uint32_t odd : odd_subsets(g, S)) t[odd] = std::pow(w.odd, __builtin_popcount(odd));
  weighted_zeta(t, m, w.even_positive);
  return t;
}

// Trace law of n1 + n2 under P^{S1} ⊗ P^{S2}; Σ_m T[m] = Z^{S1} Z^{S2}.
// With odd sets O1, O2 fixed, an edge odd in exactly one current carries
// sinh·cosh, in both sinh², and an edge odd in neither is closed with weight 1
// or open with weight cosh² - 1 = sinh².
inline TraceLaw joint_trace_law(const Graph& g, double beta, const VertexSet& S1, const VertexSet& S2) {
  const ClassWeights w(beta);
  const std::size_t m = g.num_edges();
  const auto odd1 = odd_subsets(g, S1);
  const auto odd2 = S1 == S2 ? odd1 : odd_subsets(g, S2);
  const double s = w.odd;
  const double c = w.even_total();
  std::vector<double> spow(2 * m + 1, 1.0), cpow(m + 1, 1.0);
  for (std::size_t k = 1; k < spow.size(); ++k) spow[k] = spow[k - 1] * s;
  for (std::size_t k = 1; k < cpow.size(); ++k) cpow[k] = cpow[k - 1] * c;
  TraceLaw t(std::size_t{1} << m, 0.0);
  for (std::uint32_t a : odd1) {
    const int na = __builtin_popcount(a);
    for (std::uint32_t b : odd2) t[a | b] += spow[na + __builtin_popcount(b)] * cpow[__builtin_popcount(a ^ b)];
  }
  weighted_zeta(t, m, s * s);
  return t;
}

inline double total(const TraceLaw& t) {
  double z = 0;
  for (double x : t) z += x;
  return z;
}

// Indicator of a bond predicate, tabulated over all masks.
using BondPredicate = std::function<bool(const BondConfig&)>;

inline std::vector<std::uint8_t> tabulate(const Graph& g, const BondPredicate& pred) {
  const std::size_t m = g.num_edges();
  std::vector<std::uint8_t> ind(std::size_t{1} << m);
  for (std::uint32_t mask = 0; mask < ind.size(); ++mask) ind[mask] = pred(mask_to_bonds(mask, m)) ? 1 : 0;
  return ind;
}

inline double masked_sum(const TraceLaw& t, const std::vector<std::uint8_t>& ind) {
  double s = 0;
  for (std::size_t m = 0; m < t.size(); ++m)
    if (ind[m]) s += t[m];
  return s;
}

}  // namespace rcising::oracles
