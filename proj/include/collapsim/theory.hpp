#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace collapsim {

/// Per-generation sample sizes for the Gaussian moment-matching chain,
/// plus the base variance of the source normal. Sizes must be >= 2 so
/// the unbiased variance divisor is defined.
class SampleSchedule {
 public:
  SampleSchedule(std::vector<std::size_t> sizes, double base_variance)
      : sizes_(std::move(sizes)), base_variance_(base_variance) {
    if (!(base_variance > 0.0)) {
      throw std::invalid_argument("SampleSchedule: base variance must be positive");
    }
    for (const std::size_t m : sizes_) {
      if (m < 2) throw std::invalid_argument("SampleSchedule: every size must be >= 2");
    }
  }

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  double base_variance() const { return base_variance_; }

 private:
  std::vector<std::size_t> sizes_;
  double base_variance_;
};

/// Closed-form collapse predictions for one schedule, leading terms only.
struct TheoryPrediction {
  double variance_ratio;     // Var / base variance, >= 1
  double expected_w2sq;
  double variance_of_w2sq;
};

namespace detail {
struct InverseSizeSums {
  double s1 = 0.0;  // sum 1/M_i
  double s2 = 0.0;  // sum 1/M_i^2
};

inline InverseSizeSums inverse_size_sums(const SampleSchedule& s) {
  InverseSizeSums sums;
  for (const std::size_t m : s.sizes()) {
    const double inv = 1.0 / static_cast<double>(m);
    sums.s1 += inv;
    sums.s2 += inv * inv;
  }
  return sums;
}
}  // namespace detail

/// Variance of generation-n samples after refitting through the
/// schedule: sigma^2 * (1 + sum_i 1/M_i). For constant M this grows
/// linearly, sigma^2 * (1 + n/M).
inline double predicted_variance(const SampleSchedule& schedule) {
  return schedule.base_variance() * (1.0 + detail::inverse_size_sums(schedule).s1);
}

/// Expected squared Wasserstein-2 distance between the source normal and
/// the refit normal after the schedule: (3/2) * sigma^2 * sum_i 1/M_i.
inline double expected_w2_squared(const SampleSchedule& schedule) {
  return 1.5 * schedule.base_variance() * detail::inverse_size_sums(schedule).s1;
}

/// Variance of that squared distance:
/// (1/2) * sigma^4 * (sum_i 3/M_i^2 + sum_{i != j} 4/(M_i M_j)), the
/// cross sum running over ordered pairs. Using S1 = sum 1/M_i and
/// S2 = sum 1/M_i^2 this collapses to (1/2) * sigma^4 * (4*S1^2 - S2).
inline double variance_of_w2_squared(const SampleSchedule& schedule) {
  const auto sums = detail::inverse_size_sums(schedule);
  const double sigma2 = schedule.base_variance();
  return 0.5 * sigma2 * sigma2 * (4.0 * sums.s1 * sums.s1 - sums.s2);
}

inline TheoryPrediction predict(const SampleSchedule& schedule) {
  const auto sums = detail::inverse_size_sums(schedule);
  const double sigma2 = schedule.base_variance();
  return TheoryPrediction{1.0 + sums.s1, 1.5 * sigma2 * sums.s1,
                          0.5 * sigma2 * sigma2 * (4.0 * sums.s1 * sums.s1 - sums.s2)};
}

}  // namespace collapsim
