#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include <rcising/currents.hpp>
#include <rcising/error.hpp>
#include <rcising/graphs.hpp>
#include <rcising/rng.hpp>
#include <rcising/stats.hpp>
#include <rcising/union_find.hpp>

namespace rcising {

struct SamplerConfig {
  double beta = 0;
  std::vector<VertexSet> sources{VertexSet{}};  // one entry per independent replica
  std::uint64_t sweeps = 1000;                   // total, burn-in included
  std::uint64_t burn_in = 100;
  std::uint64_t thinning = 1;
  std::uint64_t seed = 0;
  // Worm in-sector visits that make up one sweep; 0 means one per vertex.
  std::uint64_t visits_per_sweep = 0;

  void validate() const {
    require(std::isfinite(beta) && beta >= 0, "beta must be finite and nonnegative");
    require(sweeps > burn_in, "sweeps must exceed burn_in");
    require(thinning >= 1, "thinning must be at least 1");
    for (const auto& s : sources) require(s.size() % 2 == 0, "each source set must have even size");
  }
  std::uint64_t recorded() const { return (sweeps - burn_in + thinning - 1) / thinning; }
};

// Heuristic default: ten sweeps per unit of graph diameter.
inline std::uint64_t default_burn_in(const Graph& g) {
  return 10 * std::max<std::uint64_t>(1, g.diameter_estimate());
}

// Shortest path from x to y as an edge list.
inline std::vector<EdgeId> bfs_path(const Graph& g, Vertex x, Vertex y) {
  std::vector<std::int64_t> via(g.num_vertices(), -1);
  std::vector<std::uint8_t> seen(g.num_vertices(), 0);
  std::queue<Vertex> q;
  q.push(x);
  seen[x] = 1;
  while (!q.empty() && !seen[y]) {
    const Vertex v = q.front();
    q.pop();
    for (EdgeId e : g.incident(v)) {
      const Vertex w = g.edge(e).other(v);
      if (seen[w]) continue;
      seen[w] = 1;
      via[w] = e;
      q.push(w);
    }
  }
  if (!seen[y]) throw ZeroMassError("sources lie in different components");
  std::vector<EdgeId> path;
  for (Vertex v = y; v != x;) {
    const auto e = static_cast<EdgeId>(via[v]);
    path.push_back(e);
    v = g.edge(e).other(v);
  }
  return path;
}

// Worm chain on (odd set O, tail a, head b) with ∂O = S Δ {a, b} and weight
// tanh(β)^|O|. States with a == b form the sector of parity configurations with
// sources S; the sequence of sector visits is itself a reversible Markov chain
// with the parity law of P^S as its stationary distribution.
//
// Each step picks, with probability 1/2 each:
//  - relocation: when a == b, move both to a uniform vertex (otherwise reject);
//  - head shift: cross a uniform incident edge of b, flipping its parity, with
//    Metropolis ratio tanh^{±1} · deg(b) / deg(b').
class WormChain {
 public:
  WormChain(const Graph& g, double beta, const VertexSet& S, Philox rng)
      : g_(&g), rng_(std::move(rng)), odd_(g.num_edges(), 0) {
    require(std::isfinite(beta) && beta >= 0, "beta must be finite and nonnegative");
    require(S.size() % 2 == 0, "source set must have even size");
    require(S.size() <= 2, "the worm handles |S| in {0, 2}; use independent replicas for more sources");
    require(g.num_vertices() > 0, "empty graph");
    if (!S.empty() && beta == 0) throw ZeroMassError("Z^S = 0 at beta = 0 for nonempty S");
    const double t = std::tanh(beta);
    up_ = t;
    down_ = t > 0 ? 1.0 / t : 0.0;
    if (S.size() == 2) {
      for (EdgeId e : bfs_path(g, S[0], S[1])) odd_[e] ^= 1;
      n_odd_ = 0;
      for (auto o : odd_) n_odd_ += o;
    }
  }

  WormChain(Graph&&, double, const VertexSet&, Philox) = delete;

  // One step; returns whether the chain is in the sector afterwards.
  bool step() {
    ++steps_;
    if (rng_() & 1u) {
      if (a_ == b_) {
        a_ = b_ = static_cast<Vertex>(rng_.index(g_->num_vertices()));
        ++accepted_;
      }
    } else {
      const auto inc = g_->incident(b_);
      if (!inc.empty()) {
        const EdgeId e = inc[rng_.index(inc.size())];
        const Vertex to = g_->edge(e).other(b_);
        const double ratio = (odd_[e] ? down_ : up_) * static_cast<double>(inc.size()) /
                             static_cast<double>(g_->degree(to));
        if (ratio >= 1.0 || rng_.uniform() < ratio) {
          odd_[e] ^= 1;
          n_odd_ += odd_[e] ? 1 : -1;
          b_ = to;
          ++accepted_;
        }
      }
    }
    if (a_ == b_) ++visits_;
    return a_ == b_;
  }

  // Runs until k further sector visits have occurred.
  void advance_visits(std::uint64_t k) {
    while (k > 0)
      if (step()) --k;
  }

  ParityState parity() const {
    ParityState p(odd_.size());
    for (std::size_t e = 0; e < odd_.size(); ++e)
      if (odd_[e]) p[static_cast<EdgeId>(e)] = Parity::Odd;
    return p;
  }

  const std::vector<std::uint8_t>& odd() const noexcept { return odd_; }
  std::int64_t odd_count() const noexcept { return n_odd_; }
  Vertex tail() const noexcept { return a_; }
  Vertex head() const noexcept { return b_; }
  bool in_sector() const noexcept { return a_ == b_; }
  std::uint64_t steps() const noexcept { return steps_; }
  std::uint64_t visits() const noexcept { return visits_; }
  double acceptance_rate() const noexcept {
    return steps_ ? static_cast<double>(accepted_) / static_cast<double>(steps_) : 0.0;
  }
  const Graph& graph() const noexcept { return *g_; }

 private:
  const Graph* g_;
  Philox rng_;
  std::vector<std::uint8_t> odd_;
  std::int64_t n_odd_ = 0;
  Vertex a_ = 0, b_ = 0;
  double up_ = 0, down_ = 0;
  std::uint64_t steps_ = 0, accepted_ = 0, visits_ = 0;
};

// Stream of parity states from the worm: one state per sweep, where a sweep is
// cfg.visits_per_sweep sector visits (default |V|).
class WormSampler {
 public:
  WormSampler(const Graph& g, double beta, const VertexSet& S, std::uint64_t seed, std::uint64_t replica = 0,
              std::uint64_t visits_per_sweep = 0)
      : chain_(g, beta, S, Philox(seed, replica)),
        per_sweep_(visits_per_sweep ? visits_per_sweep : g.num_vertices()) {}
  WormSampler(Graph&&, double, const VertexSet&, std::uint64_t, std::uint64_t = 0, std::uint64_t = 0) = delete;

  ParityState next() {
    chain_.advance_visits(per_sweep_);
    return chain_.parity();
  }
  void skip(std::uint64_t sweeps) { chain_.advance_visits(sweeps * per_sweep_); }
  const WormChain& chain() const noexcept { return chain_; }
  WormChain& chain() noexcept { return chain_; }
  double acceptance_rate() const noexcept { return chain_.acceptance_rate(); }

 private:
  WormChain chain_;
  std::uint64_t per_sweep_;
};

// Post-burn-in, thinned states of P^S restricted to parity (even edges read Zero).
inline std::vector<ParityState> worm_sample(const Graph& g, double beta, const VertexSet& S,
                                            const SamplerConfig& cfg) {
  cfg.validate();
  WormSampler w(g, beta, S, cfg.seed, 0, cfg.visits_per_sweep);
  w.skip(cfg.burn_in);
  std::vector<ParityState> out;
  out.reserve(cfg.recorded());
  for (std::uint64_t s = cfg.burn_in; s < cfg.sweeps; ++s) {
    if ((s - cfg.burn_in) % cfg.thinning == 0) {
      out.push_back(w.next());
    } else {
      w.skip(1);
    }
  }
  return out;
}

// Probability that a non-odd edge of a current carries positive multiplicity.
inline double even_open_probability(double beta) {
  const ClassWeights w(beta);
  return w.even_positive / w.even_total();
}

// Resolves each non-odd edge into Zero or EvenPositive with the conditional
// class weights 1 : (cosh β - 1); odd edges are kept.
inline ParityState refine_parity(const ParityState& p, double beta, Philox& rng) {
  const double q = even_open_probability(beta);
  ParityState out = p;
  for (std::size_t e = 0; e < p.size(); ++e) {
    const auto id = static_cast<EdgeId>(e);
    if (!p.odd(id)) out[id] = rng.bernoulli(q) ? Parity::EvenPositive : Parity::Zero;
  }
  return out;
}

// Trace of a current drawn from its parity: odd edges open, the others open
// with probability (cosh β - 1)/cosh β. Reads only odd/non-odd.
inline BondConfig sprinkle_multiplicity(const ParityState& p, double beta, Philox& rng) {
  const double q = even_open_probability(beta);
  BondConfig c(p.size());
  for (std::size_t e = 0; e < p.size(); ++e)
    c.open[e] = p.odd(static_cast<EdgeId>(e)) || rng.bernoulli(q) ? 1 : 0;
  return c;
}

// FK-Ising conditioned on F_S through the sprinkling coupling: the trace of a
// current with sources S, maxed with an independent Bernoulli(1 - e^{-β}) field.
class FkCouplingSampler {
 public:
  FkCouplingSampler(const Graph& g, double beta, const VertexSet& S, std::uint64_t seed,
                    std::uint64_t visits_per_sweep = 0)
      : worm_(g, beta, S, seed, 0, visits_per_sweep), rng_(seed, 1), beta_(beta) {}
  FkCouplingSampler(Graph&&, double, const VertexSet&, std::uint64_t, std::uint64_t = 0) = delete;

  BondConfig next() {
    BondConfig c = sprinkle_multiplicity(worm_.next(), beta_, rng_);
    const double p = -std::expm1(-beta_);
    for (auto& o : c.open) o = o | (rng_.bernoulli(p) ? 1 : 0);
    return c;
  }
  void skip(std::uint64_t sweeps) { worm_.skip(sweeps); }
  double acceptance_rate() const noexcept { return worm_.acceptance_rate(); }

 private:
  WormSampler worm_;
  Philox rng_;
  double beta_;
};

inline BondConfig fk_conditioned_sample(const Graph& g, double beta, const VertexSet& S, Philox& rng,
                                        std::uint64_t burn_in_sweeps = 0) {
  FkCouplingSampler s(g, beta, S, rng(), 0);
  s.skip(burn_in_sweeps ? burn_in_sweeps : default_burn_in(g));
  return s.next();
}

// Swendsen–Wang: bonds between equal spins open with probability 1 - e^{-2β},
// then each cluster takes a fresh uniform spin. The bond marginal is free
// FK-Ising (q = 2, p = 1 - e^{-2β}).
class SwendsenWang {
 public:
  SwendsenWang(const Graph& g, double beta, std::uint64_t seed)
      : g_(&g), rng_(seed, 2), p_(-std::expm1(-2 * beta)), spin_(g.num_vertices()), uf_(g.num_vertices()) {
    require(std::isfinite(beta) && beta >= 0, "beta must be finite and nonnegative");
    for (auto& s : spin_) s = static_cast<std::int8_t>(rng_() & 1u ? 1 : -1);
  }
  SwendsenWang(Graph&&, double, std::uint64_t) = delete;

  BondConfig next() {
    BondConfig c(g_->num_edges());
    uf_.reset(g_->num_vertices());
    for (EdgeId e = 0; e < g_->num_edges(); ++e) {
      const Edge& ed = g_->edge(e);
      if (spin_[ed.u] == spin_[ed.v] && rng_.bernoulli(p_)) {
        c.open[e] = 1;
        uf_.unite(ed.u, ed.v);
      }
    }
    std::vector<std::int8_t> flip(g_->num_vertices(), 0);
    for (Vertex v = 0; v < g_->num_vertices(); ++v) {
      const Vertex r = uf_.find(v);
      if (flip[r] == 0) flip[r] = static_cast<std::int8_t>(rng_() & 1u ? 1 : -1);
      spin_[v] = flip[r];
    }
    return c;
  }
  void skip(std::uint64_t sweeps) {
    for (std::uint64_t i = 0; i < sweeps; ++i) next();
  }
  double acceptance_rate() const noexcept { return 1.0; }

 private:
  const Graph* g_;
  Philox rng_;
  double p_;
  std::vector<std::int8_t> spin_;
  UnionFind uf_;
};

inline BondConfig sw_sample_fk(const Graph& g, double beta, Philox& rng, std::uint64_t burn_in_sweeps = 100) {
  SwendsenWang s(g, beta, rng());
  s.skip(burn_in_sweeps);
  return s.next();
}

// Mean of pred over thinned post-burn-in samples with batch-means errors.
// Sampler: next() -> sample, skip(k), acceptance_rate().
template <class Sampler, class Pred>
EstimateResult estimate(Sampler& sampler, Pred&& pred, const SamplerConfig& cfg) {
  cfg.validate();
  sampler.skip(cfg.burn_in);
  std::vector<double> x;
  x.reserve(cfg.recorded());
  for (std::uint64_t s = cfg.burn_in; s < cfg.sweeps; ++s) {
    if ((s - cfg.burn_in) % cfg.thinning == 0) {
      x.push_back(pred(sampler.next()) ? 1.0 : 0.0);
    } else {
      sampler.skip(1);
    }
  }
  EstimateResult r = batch_means(x);
  r.seed = cfg.seed;
  r.acceptance_rate = sampler.acceptance_rate();
  return r;
}

// Independent worm replicas, one per source set, for product measures.
class ReplicaSampler {
 public:
  ReplicaSampler(const Graph& g, const SamplerConfig& cfg) {
    for (std::size_t i = 0; i < cfg.sources.size(); ++i)
      replicas_.emplace_back(g, cfg.beta, cfg.sources[i], cfg.seed, i, cfg.visits_per_sweep);
  }
  std::vector<ParityState> next() {
    std::vector<ParityState> out;
    for (auto& r : replicas_) out.push_back(r.next());
    return out;
  }
  void skip(std::uint64_t sweeps) {
    for (auto& r : replicas_) r.skip(sweeps);
  }
  double acceptance_rate() const {
    double s = 0;
    for (const auto& r : replicas_) s += r.acceptance_rate();
    return replicas_.empty() ? 0.0 : s / static_cast<double>(replicas_.size());
  }

 private:
  std::vector<WormSampler> replicas_;
};

// Line-oriented spool: one parity string per line.
inline void write_parity_stream(std::ostream& out, const std::vector<ParityState>& states) {
  for (const auto& p : states) out << p.to_string() << '\n';
}

inline std::vector<ParityState> read_parity_stream(std::istream& in) {
  std::vector<ParityState> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(ParityState::from_string(line));
  }
  return out;
}

}  // namespace rcising
