#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "collapsim/distributions.hpp"
#include "collapsim/estimators.hpp"

namespace collapsim {

/// Zero histogram densities are replaced by this floor before the KL
/// ratio is formed, keeping the divergence finite on disjoint supports.
inline constexpr double kKlDensityFloor = 1e-10;

/// Equal-width density-normalized histogram: sum(densities) * bin width
/// is 1.
struct Histogram {
  std::vector<double> edges;      // length bins + 1, strictly increasing
  std::vector<double> densities;  // length bins

  double bin_width() const {
    return (edges.back() - edges.front()) / static_cast<double>(densities.size());
  }
};

/// Bins the samples over [lo, hi]; values outside the range are clamped
/// into the boundary bins, so every sample carries mass.
inline Histogram histogram_density(const SampleSet& samples, std::size_t bins,
                                   double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("histogram_density: lo must be < hi");
  if (bins == 0) throw std::invalid_argument("histogram_density: bins must be >= 1");
  if (samples.values.empty()) {
    throw std::invalid_argument("histogram_density: sample set is empty");
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (const double x : samples.values) {
    std::size_t idx = 0;
    if (x >= hi) {
      idx = bins - 1;
    } else if (x > lo) {
      idx = std::min(static_cast<std::size_t>((x - lo) / width), bins - 1);
    }
    ++counts[idx];
  }
  Histogram hist;
  hist.edges.reserve(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    hist.edges.push_back(lo + static_cast<double>(b) * width);
  }
  hist.densities.reserve(bins);
  const double n = static_cast<double>(samples.values.size());
  for (std::size_t b = 0; b < bins; ++b) {
    hist.densities.push_back(static_cast<double>(counts[b]) / (n * width));
  }
  return hist;
}

/// KL divergence between the histogram estimates of two sample sets,
/// binned over their shared range. Zero densities are floored at
/// kKlDensityFloor and both histograms are renormalized to probability
/// masses before summing p * ln(p/q).
inline double kl_divergence(const SampleSet& p, const SampleSet& q,
                            std::size_t bins = 100) {
  if (p.values.empty() || q.values.empty()) {
    throw std::invalid_argument("kl_divergence: sample sets must be non-empty");
  }
  double lo = p.values.front();
  double hi = lo;
  for (const double x : p.values) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  for (const double x : q.values) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (lo == hi) {
    // All values identical in both sets; any bin placement works.
    lo -= 0.5;
    hi += 0.5;
  }
  const Histogram hp = histogram_density(p, bins, lo, hi);
  const Histogram hq = histogram_density(q, bins, lo, hi);
  std::vector<double> pm(bins), qm(bins);
  double psum = 0.0, qsum = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    pm[b] = hp.densities[b] == 0.0 ? kKlDensityFloor : hp.densities[b];
    qm[b] = hq.densities[b] == 0.0 ? kKlDensityFloor : hq.densities[b];
    psum += pm[b];
    qsum += qm[b];
  }
  double kl = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double pb = pm[b] / psum;
    const double qb = qm[b] / qsum;
    kl += pb * std::log(pb / qb);
  }
  return kl;
}

/// Exact empirical Wasserstein-1 distance: the L1 distance between the
/// two empirical quantile functions, integrated piecewise over the
/// merged quantile breakpoints. Handles unequal sample sizes without
/// approximation.
inline double wasserstein1(const SampleSet& p, const SampleSet& q) {
  if (p.values.empty() || q.values.empty()) {
    throw std::invalid_argument("wasserstein1: sample sets must be non-empty");
  }
  std::vector<double> a = p.values;
  std::vector<double> b = q.values;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  double total = 0.0;
  double u = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    // Next breakpoint is min((i+1)/n, (j+1)/m); compare via cross
    // multiplication to keep the bookkeeping exact.
    const std::uint64_t lhs = static_cast<std::uint64_t>(i + 1) * m;
    const std::uint64_t rhs = static_cast<std::uint64_t>(j + 1) * n;
    const double next = lhs <= rhs ? static_cast<double>(i + 1) / static_cast<double>(n)
                                   : static_cast<double>(j + 1) / static_cast<double>(m);
    total += (next - u) * std::abs(a[i] - b[j]);
    u = next;
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
  }
  return total;
}

/// Squared Wasserstein-2 distance between two univariate normals:
/// (mu_a - mu_b)^2 + (sigma_a - sigma_b)^2.
inline double gaussian_w2_squared(const GaussianModel& a, const GaussianModel& b) {
  if (!(a.variance >= 0.0) || !(b.variance >= 0.0)) {
    throw std::invalid_argument("gaussian_w2_squared: variances must be non-negative");
  }
  const double dmean = a.mean - b.mean;
  const double dsigma = std::sqrt(a.variance) - std::sqrt(b.variance);
  return dmean * dmean + dsigma * dsigma;
}

}  // namespace collapsim
