#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "collapsim/rng.hpp"

namespace collapsim {

struct NormalComponent {
  double mean;
  double stddev;  // > 0
};

struct UniformComponent {
  double low;
  double high;  // > low
};

struct GammaComponent {
  double shape;  // > 0
  double scale;  // > 0
};

/// One mixture component together with the number of samples it
/// contributes. Weights are sample counts, not probabilities; densities
/// derive the weight as count/total.
struct Component {
  std::variant<NormalComponent, UniformComponent, GammaComponent> dist;
  std::size_t count;
};

inline Component normal_component(double mean, double stddev, std::size_t count) {
  if (!(stddev > 0.0)) {
    throw std::invalid_argument("normal_component: stddev must be positive");
  }
  if (count == 0) throw std::invalid_argument("normal_component: count must be >= 1");
  return Component{NormalComponent{mean, stddev}, count};
}

inline Component uniform_component(double low, double high, std::size_t count) {
  if (!(high > low)) {
    throw std::invalid_argument("uniform_component: high must exceed low");
  }
  if (count == 0) throw std::invalid_argument("uniform_component: count must be >= 1");
  return Component{UniformComponent{low, high}, count};
}

inline Component gamma_component(double shape, double scale, std::size_t count) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("gamma_component: shape and scale must be positive");
  }
  if (count == 0) throw std::invalid_argument("gamma_component: count must be >= 1");
  return Component{GammaComponent{shape, scale}, count};
}

/// Ground-truth source distribution: a fixed-count mixture. Immutable
/// after construction; total() is the sum of component counts.
class MixtureSpec {
 public:
  explicit MixtureSpec(std::vector<Component> components)
      : components_(std::move(components)) {
    if (components_.empty()) {
      throw std::invalid_argument("MixtureSpec: at least one component required");
    }
    total_ = 0;
    for (const auto& c : components_) {
      if (c.count == 0) throw std::invalid_argument("MixtureSpec: component count must be >= 1");
      total_ += c.count;
    }
  }

  const std::vector<Component>& components() const { return components_; }
  std::size_t total() const { return total_; }

 private:
  std::vector<Component> components_;
  std::size_t total_ = 0;
};

/// Ordered real-valued samples at one generation (generation 0 is the
/// original data).
struct SampleSet {
  std::vector<double> values;
  std::size_t generation = 0;
};

inline double normal_pdf(double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * std::numbers::pi));
}

inline double component_pdf(const Component& c, double x) {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NormalComponent>) {
          return normal_pdf(x, d.mean, d.stddev);
        } else if constexpr (std::is_same_v<T, UniformComponent>) {
          return (x >= d.low && x <= d.high) ? 1.0 / (d.high - d.low) : 0.0;
        } else {
          if (x <= 0.0) return d.shape == 1.0 && x == 0.0 ? 1.0 / d.scale : 0.0;
          return std::exp((d.shape - 1.0) * std::log(x) - x / d.scale -
                          std::lgamma(d.shape) - d.shape * std::log(d.scale));
        }
      },
      c.dist);
}

inline double component_mean(const Component& c) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NormalComponent>) {
          return d.mean;
        } else if constexpr (std::is_same_v<T, UniformComponent>) {
          return 0.5 * (d.low + d.high);
        } else {
          return d.shape * d.scale;
        }
      },
      c.dist);
}

inline double component_variance(const Component& c) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NormalComponent>) {
          return d.stddev * d.stddev;
        } else if constexpr (std::is_same_v<T, UniformComponent>) {
          const double w = d.high - d.low;
          return w * w / 12.0;
        } else {
          return d.shape * d.scale * d.scale;
        }
      },
      c.dist);
}

/// Draws exactly c.count values from the component's distribution.
inline std::vector<double> sample_component(const Component& c, Rng& rng) {
  std::vector<double> out;
  out.reserve(c.count);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        for (std::size_t i = 0; i < c.count; ++i) {
          if constexpr (std::is_same_v<T, NormalComponent>) {
            out.push_back(rng.normal(d.mean, d.stddev));
          } else if constexpr (std::is_same_v<T, UniformComponent>) {
            out.push_back(rng.uniform(d.low, d.high));
          } else {
            out.push_back(rng.gamma(d.shape, d.scale));
          }
        }
      },
      c.dist);
  return out;
}

/// Concatenates every component's draws and Fisher-Yates shuffles the
/// result. The returned set is generation 0.
inline SampleSet sample_mixture(const MixtureSpec& spec, Rng& rng) {
  SampleSet set;
  set.values.reserve(spec.total());
  for (const auto& c : spec.components()) {
    auto draws = sample_component(c, rng);
    set.values.insert(set.values.end(), draws.begin(), draws.end());
  }
  for (std::size_t i = set.values.size() - 1; i > 0; --i) {
    const std::size_t j = rng.bounded(i + 1);
    std::swap(set.values[i], set.values[j]);
  }
  set.generation = 0;
  return set;
}

/// Exact mixture density: sum of component densities weighted by
/// count/total.
inline double mixture_pdf(const MixtureSpec& spec, double x) {
  double density = 0.0;
  const auto total = static_cast<double>(spec.total());
  for (const auto& c : spec.components()) {
    density += static_cast<double>(c.count) / total * component_pdf(c, x);
  }
  return density;
}

inline double mixture_mean(const MixtureSpec& spec) {
  double mean = 0.0;
  const auto total = static_cast<double>(spec.total());
  for (const auto& c : spec.components()) {
    mean += static_cast<double>(c.count) / total * component_mean(c);
  }
  return mean;
}

/// Law of total variance over the components.
inline double mixture_variance(const MixtureSpec& spec) {
  const double mean = mixture_mean(spec);
  double second_moment = 0.0;
  const auto total = static_cast<double>(spec.total());
  for (const auto& c : spec.components()) {
    const double m = component_mean(c);
    second_moment += static_cast<double>(c.count) / total *
                     (component_variance(c) + m * m);
  }
  return second_moment - mean * mean;
}

/// Named source presets. "two-gauss-uniform", "three-gauss-uniform" and
/// "gamma-mix" are the composite sources used throughout the simulation
/// experiments; "gauss1d" is a plain standard normal for the
/// moment-matching chain.
inline MixtureSpec preset_mixture(std::string_view name) {
  if (name == "two-gauss-uniform") {
    return MixtureSpec({normal_component(-2.0, 0.5, 300),
                        normal_component(3.0, 1.0, 300),
                        uniform_component(-4.0, -3.0, 200)});
  }
  if (name == "three-gauss-uniform") {
    return MixtureSpec({normal_component(0.0, 0.1, 300),
                        normal_component(-2.0, 0.5, 300),
                        normal_component(3.0, 1.0, 300),
                        uniform_component(-4.0, -3.0, 200)});
  }
  if (name == "gamma-mix") {
    return MixtureSpec({gamma_component(2.0, 4.0, 300),
                        normal_component(-2.0, 0.5, 300),
                        normal_component(3.0, 1.0, 300),
                        uniform_component(-4.0, -3.0, 200)});
  }
  if (name == "gauss1d") {
    return MixtureSpec({normal_component(0.0, 1.0, 1000)});
  }
  throw std::invalid_argument("preset_mixture: unknown preset '" + std::string(name) + "'");
}

inline std::vector<std::string> preset_names() {
  return {"two-gauss-uniform", "three-gauss-uniform", "gamma-mix", "gauss1d"};
}

}  // namespace collapsim
