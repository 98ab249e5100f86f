#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <rcising/error.hpp>

namespace rcising {

inline constexpr std::size_t kMinReliableBatches = 30;

struct EstimateResult {
  double mean = 0;
  double std_error = 0;  // batch means
  std::size_t n_samples = 0;
  std::size_t n_batches = 0;
  std::uint64_t seed = 0;
  double acceptance_rate = std::numeric_limits<double>::quiet_NaN();
  double tau_int = 0.5;       // integrated autocorrelation time, in samples
  bool unreliable = false;    // fewer than kMinReliableBatches batches
  bool undersampled = false;  // batches not much longer than 2·tau_int

  friend bool operator==(const EstimateResult&, const EstimateResult&) = default;
};

inline std::size_t default_batch_size(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
}

// Batch means over a scalar series. The tail that does not fill a batch is
// dropped from the error but kept in the mean.
inline EstimateResult batch_means(const std::vector<double>& x, std::size_t batch_size = 0) {
  EstimateResult r;
  r.n_samples = x.size();
  if (x.empty()) {
    r.mean = std::numeric_limits<double>::quiet_NaN();
    r.unreliable = true;
    return r;
  }
  r.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const std::size_t b = batch_size ? batch_size : default_batch_size(x.size());
  r.n_batches = x.size() / b;
  r.unreliable = r.n_batches < kMinReliableBatches;
  if (r.n_batches < 2) {
    r.std_error = std::numeric_limits<double>::infinity();
    r.undersampled = true;
    return r;
  }
  const std::size_t used = r.n_batches * b;
  const double mean_used = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(used), 0.0) /
                           static_cast<double>(used);
  double var_batch = 0, var_point = 0;
  for (std::size_t k = 0; k < r.n_batches; ++k) {
    double s = 0;
    for (std::size_t i = k * b; i < (k + 1) * b; ++i) {
      s += x[i];
      var_point += (x[i] - mean_used) * (x[i] - mean_used);
    }
    const double dev = s / static_cast<double>(b) - mean_used;
    var_batch += dev * dev;
  }
  var_batch /= static_cast<double>(r.n_batches - 1);
  var_point /= static_cast<double>(used - 1);
  r.std_error = std::sqrt(var_batch / static_cast<double>(r.n_batches));
  if (var_point > 0) {
    r.tau_int = std::max(0.5, 0.5 * static_cast<double>(b) * var_batch / var_point);
  }
  r.undersampled = static_cast<double>(b) < 10.0 * r.tau_int;
  return r;
}

// Jackknife over batches for a smooth function of several batch totals.
// batches[k][j] is the total of series j in batch k; fn maps the vector of
// overall totals (or leave-one-out totals) to the statistic.
struct JackknifeEstimate {
  double value = 0;
  double std_error = 0;
  std::size_t n_batches = 0;
  bool unreliable = false;
};

template <class Fn>
JackknifeEstimate jackknife(const std::vector<std::vector<double>>& batches, Fn&& fn) {
  JackknifeEstimate r;
  const std::size_t k = batches.size();
  require(k > 0, "jackknife: no batches");
  r.n_batches = k;
  r.unreliable = k < kMinReliableBatches;
  std::vector<double> sum(batches[0].size(), 0.0);
  for (const auto& b : batches) {
    require(b.size() == sum.size(), "jackknife: ragged batches");
    for (std::size_t j = 0; j < b.size(); ++j) sum[j] += b[j];
  }
  r.value = fn(sum);
  if (k < 2) {
    r.std_error = std::numeric_limits<double>::infinity();
    return r;
  }
  std::vector<double> loo(k);
  double avg = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> rest = sum;
    for (std::size_t j = 0; j < rest.size(); ++j) rest[j] -= batches[i][j];
    loo[i] = fn(rest);
    avg += loo[i];
  }
  avg /= static_cast<double>(k);
  double v = 0;
  for (double y : loo) v += (y - avg) * (y - avg);
  r.std_error = std::sqrt(v * static_cast<double>(k - 1) / static_cast<double>(k));
  return r;
}

// Weighted least squares of y = slope·t through the origin.
struct OriginFit {
  double slope = 0;
  double slope_se = 0;
  std::vector<double> residuals;
};

inline OriginFit fit_through_origin(const std::vector<double>& t, const std::vector<double>& y,
                                    const std::vector<double>& se = {}) {
  require(t.size() == y.size() && !t.empty(), "fit: need matching nonempty inputs");
  bool weighted = se.size() == t.size();
  for (double s : se) weighted = weighted && s > 0 && std::isfinite(s);
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = weighted ? 1.0 / (se[i] * se[i]) : 1.0;
    stt += w * t[i] * t[i];
    sty += w * t[i] * y[i];
  }
  require(stt > 0, "fit: design is degenerate");
  OriginFit f;
  f.slope = sty / stt;
  double rss = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    f.residuals.push_back(y[i] - f.slope * t[i]);
    const double w = weighted ? 1.0 / (se[i] * se[i]) : 1.0;
    rss += w * f.residuals.back() * f.residuals.back();
  }
  if (weighted) {
    f.slope_se = std::sqrt(1.0 / stt);
  } else if (t.size() > 1) {
    f.slope_se = std::sqrt(rss / static_cast<double>(t.size() - 1) / stt);
  }
  return f;
}

}  // namespace rcising
