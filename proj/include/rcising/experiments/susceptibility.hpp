#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <rcising/experiments/two_point.hpp>
#include <rcising/parallel.hpp>
#include <rcising/stats.hpp>

namespace rcising::experiments {

struct ScanRow {
  double beta = 0;
  double chi = 0;
  double chi_se = 0;
  double xi = 0;
  bool converged = true;
  bool finite_size_warning = false;
  EstimateResult diagnostics;

  double t(double beta_c) const { return 1.0 - beta / beta_c; }
  double scaled(double beta_c) const { return t(beta_c) * chi; }
  double scaled_se(double beta_c) const { return t(beta_c) * chi_se; }
};

struct ScanResult {
  int d = 0;
  double beta_c = 0;
  std::vector<ScanRow> rows;
  double A_hat = std::numeric_limits<double>::quiet_NaN();
  double A_se = std::numeric_limits<double>::quiet_NaN();
  std::size_t rows_used = 0;
  std::vector<double> residuals;  // of χ^{-1} against the fit, converged rows only
  double lower_bracket = 0;       // (2dβ_c)^{-1}
  bool lower_bracket_ok = true;   // lower bracket <= scaled + 3·SE on every row
  double max_scaled = 0;

  double ci_low() const { return A_hat - 1.96 * A_se; }
  double ci_high() const { return A_hat + 1.96 * A_se; }
};

// Fits χ^{-1} = t / A with t = 1 - β/β_c through the origin over converged rows,
// weighting by the propagated errors when every row has one.
inline ScanResult fit_susceptibility(std::vector<ScanRow> rows, double beta_c, int d) {
  require(beta_c > 0 && std::isfinite(beta_c), "beta_c must be positive");
  require(d >= 1, "dimension must be positive");
  ScanResult r;
  r.d = d;
  r.beta_c = beta_c;
  r.rows = std::move(rows);
  r.lower_bracket = 1.0 / (2.0 * d * beta_c);
  std::vector<double> t, y, se;
  for (const auto& row : r.rows) {
    require(row.beta > 0 && row.beta < beta_c, "every grid value must satisfy 0 < beta < beta_c");
    r.max_scaled = std::max(r.max_scaled, row.scaled(beta_c));
    if (r.lower_bracket > row.scaled(beta_c) + 3 * row.scaled_se(beta_c)) r.lower_bracket_ok = false;
    if (!row.converged) continue;
    t.push_back(row.t(beta_c));
    y.push_back(1.0 / row.chi);
    se.push_back(row.chi_se / (row.chi * row.chi));
  }
  r.rows_used = t.size();
  if (t.empty()) return r;
  const OriginFit f = fit_through_origin(t, y, se);
  r.A_hat = 1.0 / f.slope;
  r.A_se = f.slope_se / (f.slope * f.slope);
  r.residuals = f.residuals;
  return r;
}

// χ̂(β) from sourceless worm runs on the d-dimensional torus of side L, one job
// per grid value, followed by the fit.
inline ScanResult chi_scan_and_fit(int d, int L, const std::vector<double>& grid, double beta_c,
                                   const SamplerConfig& cfg, unsigned threads = 1) {
  require(!grid.empty(), "beta grid is empty");
  require(beta_c > 0 && std::isfinite(beta_c), "beta_c must be positive");
  for (double b : grid) require(b > 0 && b < beta_c, "every grid value must satisfy 0 < beta < beta_c");
  const Graph torus = build_lattice(d, L, Geometry::Torus);
  auto rows = parallel_map<ScanRow>(grid.size(), threads, [&](std::size_t i) {
    SamplerConfig c = cfg;
    c.beta = grid[i];
    c.seed = derive_seed(cfg.seed, i);
    const TwoPointRun run = worm_two_point(torus, c);
    ScanRow row;
    row.beta = grid[i];
    row.chi = run.chi;
    row.chi_se = run.chi_se;
    row.xi = run.xi;
    row.finite_size_warning = run.finite_size_warning;
    row.diagnostics = run.diagnostics;
    row.converged = !run.diagnostics.unreliable;
    return row;
  });
  return fit_susceptibility(std::move(rows), beta_c, d);
}

}  // namespace rcising::experiments
