#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <string>
#include <vector>

#include <rcising/lattice.hpp>
#include <rcising/samplers.hpp>
#include <rcising/stats.hpp>

namespace rcising::experiments {

// Estimates of ⟨σ0σx⟩ keyed by displacement x.
struct TwoPointTable {
  struct Entry {
    double value = 0;
    double se = 0;
  };

  int dim = 0;
  double beta = 0;
  std::string lattice;
  int period = 0;  // torus side; 0 for a non-periodic table

  std::size_t size() const noexcept { return entries_.size(); }

  // Entries in lexicographic order of x, for deterministic output.
  std::map<Coord, Entry> sorted() const {
    std::map<Coord, Entry> out;
    for (const auto& [k, e] : entries_) out.emplace(unpack(k), e);
    return out;
  }

  void set(const Coord& x, double value, double se = 0) {
    require(dim > 0 && static_cast<int>(x.size()) == dim, "two-point entry has the wrong dimension");
    const Coord c = canonical(x);
    if (!fits(c)) throw ConfigError("two-point displacement out of range: " + describe(x));
    auto [it, fresh] = entries_.insert_or_assign(pack(c), Entry{value, se});
    if (fresh) ++shell_count_[sup_norm_of(c)];
  }

  // Looks up x (wrapped on a torus), falling back to -x.
  const Entry* find(const Coord& x) const {
    if (static_cast<int>(x.size()) != dim) return nullptr;
    Coord c = canonical(x);
    if (const Entry* e = lookup(c)) return e;
    for (int& v : c) v = -v;
    return lookup(canonical(c));
  }
  bool has(const Coord& x) const { return find(x) != nullptr; }
  double value(const Coord& x) const {
    const Entry* e = find(x);
    if (!e) throw ConfigError("two-point table has no entry for " + describe(x));
    return e->value;
  }
  double se(const Coord& x) const {
    const Entry* e = find(x);
    return e ? e->se : 0.0;
  }

  // Largest R such that every x with |x|_∞ <= R has an entry; -1 if x = 0 is missing.
  // A shell holding every one of its points is full without further lookups.
  int radius() const {
    if (dim <= 0) return -1;
    for (int r = 0;; ++r) {
      const double expected = std::pow(2.0 * r + 1, dim) - (r == 0 ? 0.0 : std::pow(2.0 * r - 1, dim));
      const auto it = shell_count_.find(r);
      const double have = it == shell_count_.end() ? 0.0 : static_cast<double>(it->second);
      bool full = have == expected;
      if (!full) {
        full = true;
        for_each_in_box(dim, r, [&](const Coord& x) { full = full && (sup_norm_of(x) < r || has(x)); });
      }
      if (!full) return r - 1;
      if (period > 0 && 2 * (r + 1) >= period) return r;
    }
  }

  void validate(double tol = 1e-9) const {
    require(dim > 0, "two-point table needs a dimension");
    require(has(Coord(static_cast<std::size_t>(dim), 0)), "two-point table needs the x = 0 entry");
    require(std::abs(value(Coord(static_cast<std::size_t>(dim), 0)) - 1.0) <= tol, "two-point value at 0 must be 1");
    for (const auto& [k, e] : entries_)
      require(e.value >= -tol && e.value <= 1 + tol, "two-point values must lie in [0, 1]");
  }

  static void for_each_in_box(int dim, int r, const std::function<void(const Coord&)>& fn) {
    Coord x(static_cast<std::size_t>(dim), -r);
    while (true) {
      fn(x);
      int a = dim - 1;
      while (a >= 0 && x[a] == r) x[a--] = -r;
      if (a < 0) return;
      ++x[a];
    }
  }

  static std::string describe(const Coord& x) {
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ";" : "") + std::to_string(x[i]);
    return s;
  }

 private:
  int bits() const noexcept { return 64 / dim; }

  bool fits(const Coord& c) const noexcept {
    const std::int64_t limit = std::int64_t{1} << std::min(bits() - 1, 32);
    for (int v : c)
      if (v <= -limit || v >= limit) return false;
    return true;
  }

  std::uint64_t pack(const Coord& c) const noexcept {
    const int b = bits();
    const std::uint64_t mask = b == 64 ? ~0ULL : (1ULL << b) - 1;
    std::uint64_t k = 0;
    for (int v : c) k = (b == 64 ? 0 : k << b) | (static_cast<std::uint64_t>(static_cast<std::int64_t>(v)) & mask);
    return k;
  }

  Coord unpack(std::uint64_t k) const {
    const int b = bits();
    Coord c(static_cast<std::size_t>(dim));
    for (int a = dim - 1; a >= 0; --a) {
      const std::uint64_t raw = b == 64 ? k : k & ((1ULL << b) - 1);
      std::int64_t v = static_cast<std::int64_t>(raw);
      if (b < 64 && (raw >> (b - 1))) v -= static_cast<std::int64_t>(1ULL << b);
      c[a] = static_cast<int>(v);
      if (b < 64) k >>= b;
    }
    return c;
  }

  const Entry* lookup(const Coord& c) const {
    if (!fits(c)) return nullptr;
    const auto it = entries_.find(pack(c));
    return it == entries_.end() ? nullptr : &it->second;
  }

  static int sup_norm_of(const Coord& x) {
    int m = 0;
    for (int v : x) m = std::max(m, std::abs(v));
    return m;
  }

  Coord canonical(Coord x) const {
    if (period > 0)
      for (int& v : x) {
        v = ((v % period) + period) % period;
        if (2 * v > period) v -= period;
      }
    return x;
  }

  struct KeyHash {
    std::size_t operator()(std::uint64_t z) const noexcept {
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      return static_cast<std::size_t>(z ^ (z >> 31));
    }
  };

  std::unordered_map<std::uint64_t, Entry, KeyHash> entries_;
  std::map<int, std::size_t> shell_count_;
};

inline int sup_norm(const Coord& x) {
  int m = 0;
  for (int v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double euclidean_norm(const Coord& x) {
  double s = 0;
  for (int v : x) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

// χ_r = Σ_{|x|_∞ <= r} G(x) from a table.
inline double partial_susceptibility(const TwoPointTable& t, int r) {
  double s = 0;
  TwoPointTable::for_each_in_box(t.dim, r, [&](const Coord& x) { s += t.value(x); });
  return s;
}

struct TwoPointRun {
  TwoPointTable table;
  double chi = 0;
  double chi_se = 0;
  double xi = 0;  // second-moment correlation length
  bool finite_size_warning = false;
  std::uint64_t steps = 0;
  std::uint64_t visits = 0;
  EstimateResult diagnostics;  // of steps per sweep
};

// Sourceless worm on a torus. The fraction of steps with coinciding defects is
// 1/χ, and the head-tail displacement is distributed as G(x)/χ, so
// χ = steps / visits and G(x) = (steps at displacement x) / visits.
// Every step contributes; thinning does not apply.
inline TwoPointRun worm_two_point(const Graph& torus, const SamplerConfig& cfg) {
  cfg.validate();
  require(torus.geometry() == Geometry::Torus, "two-point runs need a torus");
  const std::size_t nv = torus.num_vertices();
  const int d = torus.dimension();
  const int L = torus.size();
  const std::uint64_t per_sweep = cfg.visits_per_sweep ? cfg.visits_per_sweep : nv;

  std::vector<int> coords(nv * static_cast<std::size_t>(d));
  for (Vertex v = 0; v < nv; ++v)
    for (int a = 0; a < d; ++a) coords[static_cast<std::size_t>(v) * d + a] = torus.coord(v, a);
  auto displacement_index = [&](Vertex a, Vertex b) {
    std::size_t idx = 0;
    for (int k = 0; k < d; ++k) {
      const int c = coords[static_cast<std::size_t>(b) * d + k] - coords[static_cast<std::size_t>(a) * d + k];
      idx = idx * static_cast<std::size_t>(L) + static_cast<std::size_t>(c < 0 ? c + L : c);
    }
    return idx;
  };

  WormChain chain(torus, cfg.beta, {}, Philox(cfg.seed, 0));
  chain.advance_visits(cfg.burn_in * per_sweep);

  const std::uint64_t n = cfg.sweeps - cfg.burn_in;
  const std::size_t n_hist = std::min<std::size_t>(std::max<std::size_t>(n / default_batch_size(n), 1), 128);
  std::vector<std::vector<std::uint64_t>> hist(n_hist, std::vector<std::uint64_t>(nv, 0));
  std::vector<double> steps_per_sweep;
  steps_per_sweep.reserve(n);

  Vertex tail = chain.tail(), head = chain.head();
  std::size_t disp = displacement_index(tail, head);
  for (std::uint64_t s = 0; s < n; ++s) {
    auto& h = hist[s * n_hist / n];
    const std::uint64_t start = chain.steps();
    for (std::uint64_t left = per_sweep; left > 0;) {
      const bool in = chain.step();
      if (chain.head() != head || chain.tail() != tail) {
        head = chain.head();
        tail = chain.tail();
        disp = displacement_index(tail, head);
      }
      ++h[disp];
      if (in) --left;
    }
    steps_per_sweep.push_back(static_cast<double>(chain.steps() - start));
  }

  TwoPointRun run;
  run.diagnostics = batch_means(steps_per_sweep);
  run.diagnostics.seed = cfg.seed;
  run.diagnostics.acceptance_rate = chain.acceptance_rate();
  run.chi = run.diagnostics.mean / static_cast<double>(per_sweep);
  run.chi_se = run.diagnostics.std_error / static_cast<double>(per_sweep);
  run.visits = n * per_sweep;
  for (double x : steps_per_sweep) run.steps += static_cast<std::uint64_t>(x);

  auto& t = run.table;
  t.dim = d;
  t.beta = cfg.beta;
  t.lattice = "torus d=" + std::to_string(d) + " L=" + std::to_string(L);
  t.period = L;
  std::vector<std::uint64_t> visits_per_batch(n_hist, 0);
  for (std::size_t b = 0; b < n_hist; ++b) visits_per_batch[b] = hist[b][0];
  double second_moment = 0;
  const Vertex o = torus.origin();
  for (Vertex v = 0; v < nv; ++v) {
    std::vector<double> ratio;
    for (std::size_t b = 0; b < n_hist; ++b)
      ratio.push_back(static_cast<double>(hist[b][v]) / static_cast<double>(visits_per_batch[b]));
    std::uint64_t total = 0;
    for (std::size_t b = 0; b < n_hist; ++b) total += hist[b][v];
    const double g = static_cast<double>(total) / static_cast<double>(run.visits);
    const EstimateResult bm = batch_means(ratio, 1);
    const Coord x = torus.displacement(o, v);
    t.set(x, g, bm.std_error);
    const double r = euclidean_norm(x);
    second_moment += r * r * g;
  }
  run.xi = std::sqrt(second_moment / (2.0 * d * run.chi));
  run.finite_size_warning = run.xi > L / 4.0;
  return run;
}

}  // namespace rcising::experiments
