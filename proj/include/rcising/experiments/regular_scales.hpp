#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <rcising/experiments/two_point.hpp>

namespace rcising::experiments {

// Quantities behind (P1)-(P4) for one candidate n = 2^k, independent of (c, C).
struct ScaleMeasure {
  int k = 0;
  int n = 0;
  bool evaluated = false;
  std::string skip_reason;
  double p1_ratio = 0;     // max/min of G on the annulus
  double p2_constant = 0;  // smallest C satisfying (P2)
  double p3_growth = 0;    // (χ_{2n} - χ_n) / χ_n
  double inner_min = 0;    // min of G on Λ_n
  std::vector<double> shell_tail_max;  // [m] = max of G over table entries with |y|_∞ > m
};

struct RegularScaleRow {
  ScaleMeasure measure;
  bool p1 = false, p2 = false, p3 = false, p4 = false;
  bool p4_vacuous = false;  // no table entry beyond Λ_{Cn}
  double p4_ratio = 0;      // max_{y outside Λ_{Cn}} G(y) / min_{Λ_n} G

  int k() const { return measure.k; }
  bool evaluated() const { return measure.evaluated; }
  bool regular() const { return measure.evaluated && p1 && p2 && p3 && p4; }
  std::string failed() const {
    if (!measure.evaluated) return "skipped: " + measure.skip_reason;
    std::string s;
    for (auto [ok, tag] : {std::pair{p1, "(P1)"}, {p2, "(P2)"}, {p3, "(P3)"}, {p4, "(P4)"}})
      if (!ok) s += (s.empty() ? "" : " ") + std::string(tag);
    return s;
  }
};

// Measures Ann(n/2, 8n) = Λ_{8n} \ Λ_{floor(n/2)} for n = 2^k, k = 0, 1, ...,
// stopping at the first annulus that leaves the table. |x| is Euclidean in
// (P2), which is checked over all pairs.
inline std::vector<ScaleMeasure> measure_scales(const TwoPointTable& t) {
  t.validate();
  const int R = t.radius();
  require(R >= 1, "two-point table must cover at least Λ_1");

  std::vector<double> shell_max(static_cast<std::size_t>(R) + 1, 0.0);
  TwoPointTable::for_each_in_box(t.dim, R, [&](const Coord& y) {
    double& m = shell_max[static_cast<std::size_t>(sup_norm(y))];
    m = std::max(m, t.value(y));
  });
  std::vector<double> tail(static_cast<std::size_t>(R) + 1, 0.0);
  for (int m = R - 1; m >= 0; --m) tail[m] = std::max(tail[m + 1], shell_max[m + 1]);

  std::vector<ScaleMeasure> out;
  for (int k = 0;; ++k) {
    ScaleMeasure s;
    s.k = k;
    s.n = 1 << k;
    const int n = s.n;
    if (8 * n > R) {
      s.skip_reason = "table radius " + std::to_string(R) + " < 8n = " + std::to_string(8 * n);
      out.push_back(s);
      break;
    }
    s.evaluated = true;

    std::vector<int> xs;
    std::vector<double> gs, norms;
    double gmax = 0, gmin = std::numeric_limits<double>::infinity();
    TwoPointTable::for_each_in_box(t.dim, 8 * n, [&](const Coord& x) {
      if (sup_norm(x) <= n / 2) return;
      const double g = t.value(x);
      xs.insert(xs.end(), x.begin(), x.end());
      gs.push_back(g);
      norms.push_back(euclidean_norm(x));
      gmax = std::max(gmax, g);
      gmin = std::min(gmin, g);
    });
    s.p1_ratio = gmin > 0 ? gmax / gmin : std::numeric_limits<double>::infinity();

    const std::size_t m = gs.size();
    const int d = t.dim;
    double need = 0;
    for (std::size_t a = 0; a < m; ++a) {
      double worst = 0;  // max over b of (G(a) - G(b))^2 / |a - b|^2
      for (std::size_t b = 0; b < m; ++b) {
        const double diff = gs[a] - gs[b];
        if (diff == 0) continue;
        double dist2 = 0;
        for (int i = 0; i < d; ++i) {
          const double u = xs[a * d + i] - xs[b * d + i];
          dist2 += u * u;
        }
        worst = std::max(worst, diff * diff / dist2);
      }
      if (worst == 0) continue;
      need = std::max(need, gs[a] > 0 ? norms[a] * std::sqrt(worst) / gs[a] : std::numeric_limits<double>::infinity());
    }
    s.p2_constant = need;

    const double chi_n = partial_susceptibility(t, n);
    s.p3_growth = (partial_susceptibility(t, 2 * n) - chi_n) / chi_n;

    s.inner_min = std::numeric_limits<double>::infinity();
    TwoPointTable::for_each_in_box(t.dim, n, [&](const Coord& x) { s.inner_min = std::min(s.inner_min, t.value(x)); });
    s.shell_tail_max = tail;
    out.push_back(s);
  }
  return out;
}

inline RegularScaleRow classify_scale(const ScaleMeasure& s, double c, double C) {
  require(c > 0 && C > 0, "regular scales need c > 0 and C > 0");
  RegularScaleRow row;
  row.measure = s;
  if (!s.evaluated) return row;
  row.p1 = s.p1_ratio <= C;
  row.p2 = s.p2_constant <= C;
  row.p3 = s.p3_growth >= c;
  const int R = static_cast<int>(s.shell_tail_max.size()) - 1;
  const double limit = std::floor(C * s.n);
  if (limit >= R) {
    row.p4_vacuous = true;
    row.p4 = true;
  } else {
    const double outer = s.shell_tail_max[static_cast<std::size_t>(limit)];
    row.p4_ratio = s.inner_min > 0 ? outer / s.inner_min : std::numeric_limits<double>::infinity();
    row.p4 = outer <= 0.5 * s.inner_min;
  }
  return row;
}

inline std::vector<RegularScaleRow> classify_scales(const std::vector<ScaleMeasure>& ms, double c, double C) {
  std::vector<RegularScaleRow> rows;
  for (const auto& s : ms) rows.push_back(classify_scale(s, c, C));
  return rows;
}

inline std::vector<RegularScaleRow> regular_scale_detect(const TwoPointTable& t, double c, double C) {
  require(c > 0 && C > 0, "regular scales need c > 0 and C > 0");
  return classify_scales(measure_scales(t), c, C);
}

inline std::vector<int> regular_scales(const std::vector<RegularScaleRow>& rows) {
  std::vector<int> ks;
  for (const auto& r : rows)
    if (r.regular()) ks.push_back(r.k());
  return ks;
}

}  // namespace rcising::experiments
