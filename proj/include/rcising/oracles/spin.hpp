#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <rcising/error.hpp>
#include <rcising/lattice.hpp>

namespace rcising::oracles {

inline constexpr std::size_t kMaxSpinVertices = 22;

// Vertex bitmask of σ_S. Repeated vertices cancel (σ_x² = 1).
inline std::uint32_t spin_mask(std::initializer_list<Vertex> vs) {
  std::uint32_t m = 0;
  for (Vertex v : vs) m ^= 1u << v;
  return m;
}

inline std::uint32_t spin_mask(const VertexSet& vs) {
  std::uint32_t m = 0;
  for (Vertex v : vs) m ^= 1u << v;
  return m;
}

// Free-boundary Ising measure on G by direct summation over {-1,+1}^V.
// Bit v of a configuration index is 1 when σ_v = -1.
class SpinSum {
 public:
  SpinSum(const Graph& g, double beta) : n_(g.num_vertices()) {
    if (n_ > kMaxSpinVertices)
      throw OracleSizeError("spin summation supports at most " + std::to_string(kMaxSpinVertices) +
                            " vertices (graph has " + std::to_string(n_) + ")");
    const std::size_t states = std::size_t{1} << n_;
    weight_.resize(states);
    const double shift = beta * static_cast<double>(g.num_edges());
    for (std::size_t s = 0; s < states; ++s) {
      long agree = 0;
      for (const auto& e : g.edges()) agree += ((s >> e.u ^ s >> e.v) & 1u) ? -1 : 1;
      weight_[s] = std::exp(beta * static_cast<double>(agree) - shift);
    }
    z_ = 0;
    for (double w : weight_) z_ += w;
  }

  // ⟨σ_S⟩ for the vertex mask S.
  double expectation(std::uint32_t mask) const {
    if (mask == 0) return 1.0;
    double s = 0;
    for (std::size_t c = 0; c < weight_.size(); ++c)
      s += (__builtin_popcount(static_cast<std::uint32_t>(c) & mask) & 1) ? -weight_[c] : weight_[c];
    return s / z_;
  }

  double expectation(const VertexSet& S) const { return expectation(spin_mask(S)); }
  double two_point(Vertex x, Vertex y) const { return expectation(spin_mask({x, y})); }

  // U_4(a, b, c, d) = ⟨σaσbσcσd⟩ - ⟨σaσb⟩⟨σcσd⟩ - ⟨σaσc⟩⟨σbσd⟩ - ⟨σaσd⟩⟨σbσc⟩.
  double ursell4(Vertex a, Vertex b, Vertex c, Vertex d) const {
    return expectation(spin_mask({a, b, c, d})) - two_point(a, b) * two_point(c, d) -
           two_point(a, c) * two_point(b, d) - two_point(a, d) * two_point(b, c);
  }

  std::size_t num_vertices() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<double> weight_;
  double z_ = 0;
};

inline double spin_expectation(const Graph& g, double beta, const VertexSet& S) {
  require(S.size() % 2 == 0, "spin_expectation needs an even set S");
  if (S.empty()) return 1.0;
  return SpinSum(g, beta).expectation(S);
}

// χ_G(β) = Σ_x ⟨σ_o σ_x⟩ for a base vertex o.
inline double susceptibility(const SpinSum& spins, Vertex o) {
  double chi = 0;
  for (Vertex x = 0; x < spins.num_vertices(); ++x) chi += spins.two_point(o, x);
  return chi;
}

}  // namespace rcising::oracles
