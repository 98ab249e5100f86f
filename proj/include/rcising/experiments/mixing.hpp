#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <rcising/experiments/local_events.hpp>
#include <rcising/parallel.hpp>
#include <rcising/samplers.hpp>
#include <rcising/stats.hpp>

namespace rcising::experiments {

// Source pairs for the probe. With x and y unset the measure is sourceless and
// the swap deltas are reported as zero.
struct MixingSources {
  std::optional<Vertex> x, y;          // base pair
  std::optional<Vertex> x_alt, y_alt;  // replacements used by the swap deltas
};

struct MixingRow {
  int n = 0, N = 0;
  double p_e = 0, p_f = 0, p_ef = 0;
  double covariance_delta = 0;  // |P[E ∩ F] - P[E] P[F]|
  double covariance_se = 0;     // jackknife over batches
  double y_swap_delta = 0;      // |P^{xy}[E] - P^{xy'}[E]|
  double y_swap_se = 0;
  double x_swap_delta = 0;      // |P^{xy}[F] - P^{x'y}[F]|
  double x_swap_se = 0;
  std::size_t n_samples = 0;
  bool unreliable = false;
};

namespace detail {

struct MixingSeries {
  std::vector<double> e, f, ef;
  double acceptance_rate = 0;
};

inline MixingSeries run_mixing_chain(const Graph& g, double beta, const VertexSet& S, const LocalEvent& E,
                                     const LocalEvent& F, const SamplerConfig& cfg, std::uint64_t stream, bool fk) {
  const std::uint64_t per_sweep = cfg.visits_per_sweep ? cfg.visits_per_sweep : g.num_vertices();
  WormChain chain(g, beta, S, Philox(cfg.seed, 2 * stream));
  Philox sprinkle(cfg.seed, 2 * stream + 1);
  chain.advance_visits(cfg.burn_in * per_sweep);
  MixingSeries out;
  for (std::uint64_t s = cfg.burn_in; s < cfg.sweeps; ++s) {
    chain.advance_visits(per_sweep);
    if ((s - cfg.burn_in) % cfg.thinning) continue;
    const bool e = E.holds(local_trace(chain.odd(), E.edges, beta, sprinkle, fk));
    const bool f = F.holds(local_trace(chain.odd(), F.edges, beta, sprinkle, fk));
    out.e.push_back(e ? 1.0 : 0.0);
    out.f.push_back(f ? 1.0 : 0.0);
    out.ef.push_back(e && f ? 1.0 : 0.0);
  }
  out.acceptance_rate = chain.acceptance_rate();
  return out;
}

inline VertexSet pair_set(std::optional<Vertex> a, std::optional<Vertex> b) {
  if (!a) return {};
  return make_vertex_set({*a, *b});
}

}  // namespace detail

// Mixing probe for one pair of events: E read on its edges, F on its own,
// the two edge sets disjoint. The trace is sprinkled only on those edges.
inline MixingRow mixing_probe(const Graph& g, double beta, const LocalEvent& E, const LocalEvent& F,
                              const MixingSources& src, const SamplerConfig& cfg, bool fk = false,
                              unsigned threads = 1) {
  cfg.validate();
  const VertexSet ve = E.vertices(g), vf = F.vertices(g);
  for (Vertex v : ve) require(!std::binary_search(vf.begin(), vf.end(), v), "events E and F have overlapping supports");
  require(src.x.has_value() == src.y.has_value(), "mixing sources: give both x and y or neither");
  const bool sourced = src.x.has_value();
  if (sourced) {
    require(src.x_alt && src.y_alt, "mixing sources: x' and y' are required when x and y are set");
    require(*src.x != *src.y && *src.x != *src.y_alt && *src.x_alt != *src.y, "mixing sources must be distinct pairs");
    for (Vertex v : {*src.x, *src.y, *src.x_alt, *src.y_alt}) require(v < g.num_vertices(), "mixing source out of range");
  }

  std::vector<VertexSet> sets{detail::pair_set(src.x, src.y)};
  if (sourced) {
    sets.push_back(detail::pair_set(src.x, src.y_alt));
    sets.push_back(detail::pair_set(src.x_alt, src.y));
  }
  auto series = parallel_map<detail::MixingSeries>(sets.size(), threads, [&](std::size_t i) {
    return detail::run_mixing_chain(g, beta, sets[i], E, F, cfg, i, fk);
  });

  MixingRow row;
  const auto& base = series[0];
  row.n_samples = base.e.size();
  const std::size_t n = row.n_samples;
  const std::size_t b = default_batch_size(n);
  const std::size_t k = n / b;
  std::vector<std::vector<double>> batches(k, std::vector<double>(4, 0.0));
  for (std::size_t i = 0; i < k * b; ++i) {
    auto& bt = batches[i / b];
    bt[0] += base.e[i];
    bt[1] += base.f[i];
    bt[2] += base.ef[i];
    bt[3] += 1;
  }
  const EstimateResult be = batch_means(base.e), bf = batch_means(base.f), bef = batch_means(base.ef);
  row.p_e = be.mean;
  row.p_f = bf.mean;
  row.p_ef = bef.mean;
  row.covariance_delta = std::abs(row.p_ef - row.p_e * row.p_f);
  if (k > 0) {
    const JackknifeEstimate j = jackknife(batches, [](const std::vector<double>& t) {
      return t[2] / t[3] - (t[0] / t[3]) * (t[1] / t[3]);
    });
    row.covariance_se = j.std_error;
  }
  row.unreliable = be.unreliable || bf.unreliable;
  if (sourced) {
    const EstimateResult ey = batch_means(series[1].e);
    const EstimateResult fx = batch_means(series[2].f);
    row.y_swap_delta = std::abs(be.mean - ey.mean);
    row.y_swap_se = std::hypot(be.std_error, ey.std_error);
    row.x_swap_delta = std::abs(bf.mean - fx.mean);
    row.x_swap_se = std::hypot(bf.std_error, fx.std_error);
    row.unreliable = row.unreliable || ey.unreliable || fx.unreliable;
  }
  return row;
}

// Probe over scale pairs (n, N) with n <= N, using E = {0 joined to ∂Λ_n inside
// Λ_n} and F = {edge ((N+1)e1, (N+2)e1) open}.
inline std::vector<MixingRow> mixing_scan(const Graph& g, double beta, const std::vector<std::pair<int, int>>& scales,
                                          const MixingSources& src, const SamplerConfig& cfg, bool fk = false,
                                          unsigned threads = 1) {
  require(g.has_coordinates(), "mixing scan needs lattice coordinates");
  require(!scales.empty(), "mixing scan needs at least one (n, N) pair");
  std::vector<MixingRow> rows;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const auto [n, N] = scales[i];
    require(n >= 1 && N >= n, "mixing scales must satisfy 1 <= n <= N");
    const LocalEvent E = box_crossing_event(g, n);
    const LocalEvent F = far_edge_event(g, N);
    for (Vertex v : F.vertices(g)) require(g.sup_norm(v) > N, "event F must lie outside Lambda_N");
    SamplerConfig c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    MixingRow row = mixing_probe(g, beta, E, F, src, c, fk, threads);
    row.n = n;
    row.N = N;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rcising::experiments
