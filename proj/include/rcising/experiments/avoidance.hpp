#pragma once

#include <cmath>
#include <vector>

#include <rcising/samplers.hpp>
#include <rcising/stats.hpp>

namespace rcising::experiments {

struct AvoidanceResult {
  std::vector<int> ks;
  std::vector<EstimateResult> a_k;  // P[A_k]
  EstimateResult full;              // P[C(0) ∩ C(e1) = ∅] within the graph
  std::vector<EstimateResult> gap;  // P[A_k] - P[full], per k
  std::size_t n_samples = 0;
  double acceptance_rate = 0;
  bool undersampled = false;
};

// Cluster of `from` in the trace of n1 + n2, restricted to edges whose
// endpoints both satisfy `inside`; reports whether `target` is reached. Edge
// states are drawn lazily from the parities and cached for the current sample,
// so nested restrictions see the same configuration.
class MergedTrace {
 public:
  MergedTrace(const Graph& g, double beta)
      : g_(&g), edge_stamp_(g.num_edges(), 0), edge_open_(g.num_edges(), 0), vertex_stamp_(g.num_vertices(), 0) {
    const double q = even_open_probability(beta);
    both_even_open_ = 1.0 - (1.0 - q) * (1.0 - q);
  }

  void new_sample(const std::vector<std::uint8_t>* odd1, const std::vector<std::uint8_t>* odd2, Philox* rng) {
    odd1_ = odd1;
    odd2_ = odd2;
    rng_ = rng;
    ++sample_;
  }

  bool open(EdgeId e) {
    if (edge_stamp_[e] != sample_) {
      edge_stamp_[e] = sample_;
      edge_open_[e] = ((*odd1_)[e] || (*odd2_)[e] || rng_->bernoulli(both_even_open_)) ? 1 : 0;
    }
    return edge_open_[e];
  }

  template <class Inside>
  bool connects(Vertex from, Vertex target, Inside&& inside) {
    ++search_;
    stack_.clear();
    stack_.push_back(from);
    vertex_stamp_[from] = search_;
    while (!stack_.empty()) {
      const Vertex v = stack_.back();
      stack_.pop_back();
      if (v == target) return true;
      for (EdgeId e : g_->incident(v)) {
        const Vertex w = g_->edge(e).other(v);
        if (vertex_stamp_[w] == search_ || !inside(w) || !open(e)) continue;
        vertex_stamp_[w] = search_;
        stack_.push_back(w);
      }
    }
    return false;
  }

 private:
  const Graph* g_;
  const std::vector<std::uint8_t>* odd1_ = nullptr;
  const std::vector<std::uint8_t>* odd2_ = nullptr;
  Philox* rng_ = nullptr;
  double both_even_open_ = 0;
  std::uint64_t sample_ = 0, search_ = 0;
  std::vector<std::uint64_t> edge_stamp_;
  std::vector<std::uint8_t> edge_open_;
  std::vector<std::uint64_t> vertex_stamp_;
  std::vector<Vertex> stack_;
};

// Under P^{ox, e y} (two independent currents), estimates P[A_k] for each k,
// where A_k asks that o and e are not connected in the trace of n1 + n2
// restricted to Λ_k, and the same event in the whole graph.
inline AvoidanceResult avoidance_estimate(const Graph& g, double beta, Vertex o, Vertex e, Vertex x, Vertex y,
                                          std::vector<int> ks, const SamplerConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.num_vertices();
  require(o < n && e < n && x < n && y < n, "avoidance vertices out of range");
  require(o != e, "avoidance needs two distinct base points");
  require(x != o && x != e, "degenerate sources: x must differ from 0 and e1");
  require(y != e && y != o && y != x, "degenerate sources: y must differ from e1, 0 and x");
  std::sort(ks.begin(), ks.end());
  if (!ks.empty()) {
    require(g.has_coordinates(), "A_k needs lattice coordinates");
    const int radius = g.geometry() == Geometry::Torus ? g.size() / 2 : g.size();
    for (int k : ks) require(k >= 1 && 2 * k <= radius, "k must satisfy 1 <= k <= radius/2");
  }

  const std::uint64_t per_sweep = cfg.visits_per_sweep ? cfg.visits_per_sweep : n;
  WormChain c1(g, beta, make_vertex_set({o, x}), Philox(cfg.seed, 0));
  WormChain c2(g, beta, make_vertex_set({e, y}), Philox(cfg.seed, 1));
  Philox rng(cfg.seed, 2);
  c1.advance_visits(cfg.burn_in * per_sweep);
  c2.advance_visits(cfg.burn_in * per_sweep);

  MergedTrace merged(g, beta);
  std::vector<std::vector<double>> ak(ks.size()), gap(ks.size());
  std::vector<double> full;
  for (std::uint64_t s = cfg.burn_in; s < cfg.sweeps; ++s) {
    c1.advance_visits(per_sweep);
    c2.advance_visits(per_sweep);
    if ((s - cfg.burn_in) % cfg.thinning) continue;
    merged.new_sample(&c1.odd(), &c2.odd(), &rng);
    const double f = merged.connects(o, e, [](Vertex) { return true; }) ? 0.0 : 1.0;
    full.push_back(f);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const int k = ks[i];
      const double a = merged.connects(o, e, [&](Vertex v) { return g.sup_norm(v) <= k; }) ? 0.0 : 1.0;
      ak[i].push_back(a);
      gap[i].push_back(a - f);
    }
  }

  AvoidanceResult r;
  r.ks = ks;
  r.n_samples = full.size();
  r.acceptance_rate = 0.5 * (c1.acceptance_rate() + c2.acceptance_rate());
  r.full = batch_means(full);
  r.full.seed = cfg.seed;
  r.undersampled = r.full.undersampled || r.full.unreliable;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    r.a_k.push_back(batch_means(ak[i]));
    r.a_k.back().seed = cfg.seed;
    r.gap.push_back(batch_means(gap[i]));
    r.undersampled = r.undersampled || r.a_k.back().undersampled || r.a_k.back().unreliable;
  }
  return r;
}

// Lattice form: base points 0 and e1.
inline AvoidanceResult avoidance_estimate(const Graph& g, double beta, Vertex x, Vertex y, std::vector<int> ks,
                                          const SamplerConfig& cfg) {
  return avoidance_estimate(g, beta, g.origin(), g.unit(0), x, y, std::move(ks), cfg);
}

}  // namespace rcising::experiments
