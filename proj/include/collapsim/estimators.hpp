#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "collapsim/distributions.hpp"
#include "collapsim/rng.hpp"

namespace collapsim {

/// Gaussian-kernel density estimate. Stores the training samples
/// verbatim; bandwidth is the kernel standard deviation in data units.
struct KdeModel {
  std::vector<double> support_points;
  double bandwidth;
};

/// Normal fitted by the sample mean and the unbiased (M-1) variance.
struct GaussianModel {
  double mean;
  double variance;  // >= 0
};

inline KdeModel fit_kde(const SampleSet& samples, double bandwidth) {
  if (samples.values.empty()) {
    throw std::invalid_argument("fit_kde: sample set is empty");
  }
  if (!(bandwidth > 0.0)) {
    throw std::invalid_argument("fit_kde: bandwidth must be positive");
  }
  return KdeModel{samples.values, bandwidth};
}

/// Log density of the KDE at x, computed with log-sum-exp so that far
/// tails stay finite instead of underflowing to -inf.
inline double kde_log_density(const KdeModel& model, double x) {
  const auto& points = model.support_points;
  const double h = model.bandwidth;
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(points.size());
  for (const double p : points) {
    const double z = (x - p) / h;
    const double t = -0.5 * z * z;
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  double sum = 0.0;
  for (const double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum) - std::log(static_cast<double>(points.size())) -
         std::log(h) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Draws n samples: a uniformly chosen support point plus bandwidth-scaled
/// Gaussian noise. One sampling pass therefore adds bandwidth^2 to the
/// population variance in expectation.
inline SampleSet kde_sample(const KdeModel& model, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("kde_sample: n must be >= 1");
  SampleSet set;
  set.values.reserve(n);
  const auto& points = model.support_points;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = points[rng.bounded(points.size())];
    set.values.push_back(p + model.bandwidth * rng.normal());
  }
  return set;
}

inline GaussianModel fit_gaussian(const SampleSet& samples) {
  const auto& v = samples.values;
  if (v.size() < 2) {
    throw std::invalid_argument("fit_gaussian: at least 2 samples required");
  }
  double mean = 0.0;
  for (const double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) {
    const double d = x - mean;
    ss += d * d;
  }
  return GaussianModel{mean, ss / static_cast<double>(v.size() - 1)};
}

inline SampleSet gaussian_sample(const GaussianModel& model, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("gaussian_sample: n must be >= 1");
  if (!(model.variance >= 0.0)) {
    throw std::invalid_argument("gaussian_sample: variance must be non-negative");
  }
  const double stddev = std::sqrt(model.variance);
  SampleSet set;
  set.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    set.values.push_back(rng.normal(model.mean, stddev));
  }
  return set;
}

}  // namespace collapsim
