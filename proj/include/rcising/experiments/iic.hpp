#pragma once

#include <cmath>
#include <vector>

#include <rcising/experiments/local_events.hpp>
#include <rcising/parallel.hpp>
#include <rcising/samplers.hpp>
#include <rcising/stats.hpp>

namespace rcising::experiments {

struct IicRow {
  Vertex x = 0;
  double prob = 0;
  double se = 0;
  std::size_t n_samples = 0;
  EstimateResult diagnostics;
};

struct IicDelta {
  std::size_t i = 0, j = 0;  // row indices
  double delta = 0;
  double se = 0;  // combined, rows treated as independent
};

struct IicScan {
  std::vector<IicRow> rows;
  std::vector<IicDelta> deltas;
};

inline IicDelta iic_delta(const IicScan& s, std::size_t i, std::size_t j) {
  return {i, j, std::abs(s.rows[i].prob - s.rows[j].prob), std::hypot(s.rows[i].se, s.rows[j].se)};
}

// P^{0x}[event] for each x, from a worm with sources {0, x}. The event reads the
// trace on its own edges only, so even edges are sprinkled there and nowhere
// else. With fk set, the trace is maxed with Bernoulli(1 - e^{-β}) edges, which
// gives FK-Ising conditioned on 0 <-> x.
inline IicScan iic_stabilization_scan(const Graph& g, double beta, const LocalEvent& event, int support_radius,
                                      const std::vector<Vertex>& xs, const SamplerConfig& cfg, bool fk = false,
                                      unsigned threads = 1) {
  cfg.validate();
  require(!xs.empty(), "iic scan needs at least one source");
  const Vertex o = g.has_coordinates() ? g.origin() : 0;
  const VertexSet support = event.vertices(g);
  for (Vertex x : xs) {
    require(x < g.num_vertices() && x != o, "iic sources must be distinct from the origin");
    require(!std::binary_search(support.begin(), support.end(), x), "source lies inside the event support");
    if (g.has_coordinates()) require(g.sup_norm(x) > support_radius, "source lies inside the event support box");
  }
  if (g.has_coordinates())
    for (Vertex v : support) require(g.sup_norm(v) <= support_radius, "event edges leave the support box");

  const std::uint64_t per_sweep = cfg.visits_per_sweep ? cfg.visits_per_sweep : g.num_vertices();
  IicScan scan;
  scan.rows = parallel_map<IicRow>(xs.size(), threads, [&](std::size_t i) {
    WormChain chain(g, beta, make_vertex_set({o, xs[i]}), Philox(cfg.seed, 2 * i));
    Philox sprinkle(cfg.seed, 2 * i + 1);
    chain.advance_visits(cfg.burn_in * per_sweep);
    std::vector<double> hits;
    for (std::uint64_t s = cfg.burn_in; s < cfg.sweeps; ++s) {
      chain.advance_visits(per_sweep);
      if ((s - cfg.burn_in) % cfg.thinning) continue;
      hits.push_back(event.holds(local_trace(chain.odd(), event.edges, beta, sprinkle, fk)) ? 1.0 : 0.0);
    }
    IicRow row;
    row.x = xs[i];
    row.diagnostics = batch_means(hits);
    row.diagnostics.seed = cfg.seed;
    row.diagnostics.acceptance_rate = chain.acceptance_rate();
    row.prob = row.diagnostics.mean;
    row.se = row.diagnostics.std_error;
    row.n_samples = hits.size();
    return row;
  });
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) scan.deltas.push_back(iic_delta(scan, i, j));
  return scan;
}

}  // namespace rcising::experiments
