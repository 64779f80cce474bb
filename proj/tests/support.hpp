// Shared helpers for the test suites: plain-loop statistics and
// independent distribution oracles (Boost.Math for the gamma CDF), kept
// deliberately separate from the library implementations they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "collapsim/distributions.hpp"

namespace test_support {

inline double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double population_variance(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size());
}

inline double unbiased_variance(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Average ranks, ties shared.
inline std::vector<double> ranks_of(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks_of(x), ranks_of(y));
}

/// Least-squares slope of y against x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline double normal_cdf(double x, double mean, double stddev) {
  return 0.5 * std::erfc(-(x - mean) / (stddev * std::sqrt(2.0)));
}

inline double component_cdf(const collapsim::Component& c, double x) {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, collapsim::NormalComponent>) {
          return normal_cdf(x, d.mean, d.stddev);
        } else if constexpr (std::is_same_v<T, collapsim::UniformComponent>) {
          if (x <= d.low) return 0.0;
          if (x >= d.high) return 1.0;
          return (x - d.low) / (d.high - d.low);
        } else {
          if (x <= 0.0) return 0.0;
          return boost::math::gamma_p(d.shape, x / d.scale);
        }
      },
      c.dist);
}

inline double mixture_cdf(const collapsim::MixtureSpec& spec, double x) {
  double cdf = 0.0;
  for (const auto& c : spec.components()) {
    cdf += static_cast<double>(c.count) / static_cast<double>(spec.total()) *
           component_cdf(c, x);
  }
  return cdf;
}

/// Kolmogorov-Smirnov statistic of samples against an exact CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

/// Trapezoid rule on a uniform grid.
template <typename F>
double trapezoid(F&& f, double lo, double hi, std::size_t points) {
  const double h = (hi - lo) / static_cast<double>(points - 1);
  double sum = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i + 1 < points; ++i) {
    sum += f(lo + static_cast<double>(i) * h);
  }
  return sum * h;
}

}  // namespace test_support
