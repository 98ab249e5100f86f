#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <rcising/experiments/two_point.hpp>

namespace rcising::experiments {

struct BubbleRow {
  int radius = 0;
  double bubble = 0;       // Σ_{Λ_r} G(x)^2
  double open_bubble = 0;  // Σ_{Λ_r} G(x) G(x - e1)
  double bubble_se = 0;    // entries treated as independent
  double open_bubble_se = 0;
};

// Partial bubble sums for r = 0..max_radius; max_radius < 0 means the table
// radius. Lookups of x - e1 may leave Λ_r but must exist in the table.
inline std::vector<BubbleRow> bubble_sums(const TwoPointTable& t, int max_radius = -1) {
  t.validate();
  const int R = t.radius();
  if (max_radius < 0) max_radius = R;
  require(max_radius <= R, "bubble radius exceeds the two-point table radius");
  std::vector<BubbleRow> rows(static_cast<std::size_t>(max_radius) + 1);
  std::vector<double> var_b(rows.size(), 0.0), var_o(rows.size(), 0.0);
  TwoPointTable::for_each_in_box(t.dim, max_radius, [&](const Coord& x) {
    Coord y = x;
    y[0] -= 1;
    const double g = t.value(x), gs = t.se(x);
    const double h = t.value(y), hs = t.se(y);
    const auto shell = static_cast<std::size_t>(sup_norm(x));
    rows[shell].bubble += g * g;
    rows[shell].open_bubble += g * h;
    var_b[shell] += 4 * g * g * gs * gs;
    var_o[shell] += h * h * gs * gs + g * g * hs * hs;
  });
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].radius = static_cast<int>(r);
    if (r > 0) {
      rows[r].bubble += rows[r - 1].bubble;
      rows[r].open_bubble += rows[r - 1].open_bubble;
      var_b[r] += var_b[r - 1];
      var_o[r] += var_o[r - 1];
    }
    rows[r].bubble_se = std::sqrt(var_b[r]);
    rows[r].open_bubble_se = std::sqrt(var_o[r]);
  }
  return rows;
}

struct ConstantReport {
  double inverse_amplitude = 0;     // 1 / Â
  double inverse_amplitude_se = 0;  // A_se / Â^2
  double normalised_probability = 0;  // 2dβ_c P̂
  double normalised_probability_se = 0;
  double lower_bound = 0;  // 1 / (1 + 2dβ_c B_open)
  double lower_bound_se = 0;
  double gap = 0;  // (1/Â) - 2dβ_c P̂
  double gap_se = 0;
  bool lower_bound_violated = false;  // P̂ below the bound by more than 3 combined SE
};

// Compares the fitted amplitude with the avoidance probability P̂ and the
// open-bubble lower bound on P̂.
inline ConstantReport constant_relation_report(int d, double beta_c, double A_hat, double A_se, double p_hat,
                                               double p_se, double open_bubble, double open_bubble_se) {
  require(d >= 1, "dimension must be positive");
  require(beta_c > 0 && std::isfinite(beta_c), "beta_c must be positive");
  require(A_hat > 0 && std::isfinite(A_hat), "A_hat must be positive");
  require(p_hat >= 0 && p_hat <= 1, "P_hat must lie in [0, 1]");
  require(open_bubble >= 0, "open bubble must be non-negative");
  const double c = 2.0 * d * beta_c;
  ConstantReport r;
  r.inverse_amplitude = 1.0 / A_hat;
  r.inverse_amplitude_se = A_se / (A_hat * A_hat);
  r.normalised_probability = c * p_hat;
  r.normalised_probability_se = c * p_se;
  r.lower_bound = 1.0 / (1.0 + c * open_bubble);
  r.lower_bound_se = c * open_bubble_se * r.lower_bound * r.lower_bound;
  r.gap = r.inverse_amplitude - r.normalised_probability;
  r.gap_se = std::hypot(r.inverse_amplitude_se, r.normalised_probability_se);
  r.lower_bound_violated = p_hat < r.lower_bound - 3.0 * std::hypot(p_se, r.lower_bound_se);
  return r;
}

}  // namespace rcising::experiments
