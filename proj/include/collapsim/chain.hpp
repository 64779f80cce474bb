#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "collapsim/distributions.hpp"
#include "collapsim/estimators.hpp"
#include "collapsim/metrics.hpp"
#include "collapsim/rng.hpp"
#include "collapsim/theory.hpp"

namespace collapsim {

enum class EstimatorKind { kKde, kGaussianMoments };

/// Full definition of one recursive fit/sample experiment. The sample
/// size is constant across generations; the seed makes the whole run
/// deterministic.
struct ChainConfig {
  MixtureSpec source;
  std::string preset;  // name echo for outputs; empty for custom sources
  EstimatorKind estimator = EstimatorKind::kKde;
  double bandwidth = 0.5;  // KDE only
  std::size_t iterations = 30;
  std::size_t sample_size = 30000;
  std::size_t kl_bins = 100;
  std::size_t snapshot_every = 3;
  std::uint64_t seed = 0;
};

inline void validate(const ChainConfig& config) {
  if (config.iterations < 1) {
    throw std::invalid_argument("ChainConfig: iterations must be >= 1");
  }
  if (config.sample_size < 2) {
    throw std::invalid_argument("ChainConfig: sample_size must be >= 2");
  }
  if (config.kl_bins < 1) {
    throw std::invalid_argument("ChainConfig: kl_bins must be >= 1");
  }
  if (config.snapshot_every < 1) {
    throw std::invalid_argument("ChainConfig: snapshot_every must be >= 1");
  }
  if (config.estimator == EstimatorKind::kKde && !(config.bandwidth > 0.0)) {
    throw std::invalid_argument("ChainConfig: bandwidth must be positive");
  }
}

/// Metrics and statistics for one generation. KL and W1 are measured
/// against the generation-0 samples. The theory columns are filled only
/// for moment-matching runs.
struct GenerationRecord {
  std::size_t generation = 0;
  double kl = 0.0;
  double w1 = 0.0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  std::optional<double> predicted_variance;
  std::optional<double> expected_w2sq;
  std::optional<double> gaussian_w2sq;
};

/// Histogram of one generation's samples together with the original
/// data's histogram on the same bins, for side-by-side plotting.
struct Snapshot {
  std::size_t generation = 0;
  Histogram samples;
  Histogram original;
};

struct ChainResult {
  ChainConfig config;
  std::vector<GenerationRecord> records;  // ordered, generation 1..n
  std::vector<Snapshot> snapshots;
  SampleSet original;       // generation 0
  SampleSet final_samples;  // generation `iterations`
};

namespace detail {

using Model = std::variant<KdeModel, GaussianModel>;

inline Model fit_model(const ChainConfig& config, const SampleSet& samples) {
  if (config.estimator == EstimatorKind::kKde) {
    return fit_kde(samples, config.bandwidth);
  }
  return fit_gaussian(samples);
}

inline SampleSet sample_model(const Model& model, std::size_t n, Rng& rng) {
  if (const auto* kde = std::get_if<KdeModel>(&model)) {
    return kde_sample(*kde, n, rng);
  }
  return gaussian_sample(std::get<GaussianModel>(model), n, rng);
}

inline double sample_mean(const std::vector<double>& v) {
  double mean = 0.0;
  for (const double x : v) mean += x;
  return mean / static_cast<double>(v.size());
}

inline double sample_variance_unbiased(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (const double x : v) {
    const double d = x - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(v.size() - 1);
}

inline Snapshot make_snapshot(std::size_t generation, const SampleSet& current,
                              const SampleSet& original, std::size_t bins) {
  double lo = current.values.front();
  double hi = lo;
  for (const double x : current.values) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  for (const double x : original.values) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return Snapshot{generation, histogram_density(current, bins, lo, hi),
                  histogram_density(original, bins, lo, hi)};
}

}  // namespace detail

/// Runs the recursive loop: draw the original data, fit the initial
/// model, then per generation sample `sample_size` points, measure them
/// against the original data, and refit. Records are 1-based; snapshots
/// are taken whenever generation % snapshot_every == 0.
///
/// For moment-matching runs the theory columns use the realized size
/// schedule: generation i's predicted variance sums over the i fits that
/// produced it (the original set of size total() plus i-1 resamples),
/// while expected_w2sq and the recorded gaussian_w2sq compare the fit of
/// the original data against the refit after generation i, i.e. sum over
/// the i resampling steps between those two fits.
inline ChainResult run_chain(const ChainConfig& config) {
  validate(config);
  Rng rng(config.seed);
  SampleSet original = sample_mixture(config.source, rng);
  detail::Model model = detail::fit_model(config, original);

  const bool gaussian_chain = config.estimator == EstimatorKind::kGaussianMoments;
  GaussianModel source_fit{0.0, 0.0};
  double source_variance = 0.0;
  if (gaussian_chain) {
    source_fit = std::get<GaussianModel>(model);
    source_variance = mixture_variance(config.source);
  }

  ChainResult result{config, {}, {}, original, {}};
  result.records.reserve(config.iterations);

  for (std::size_t gen = 1; gen <= config.iterations; ++gen) {
    SampleSet current = detail::sample_model(model, config.sample_size, rng);
    current.generation = gen;

    GenerationRecord rec;
    rec.generation = gen;
    rec.kl = kl_divergence(current, original, config.kl_bins);
    rec.w1 = wasserstein1(current, original);
    rec.sample_mean = detail::sample_mean(current.values);
    rec.sample_variance = detail::sample_variance_unbiased(current.values, rec.sample_mean);

    detail::Model refit = detail::fit_model(config, current);

    if (gaussian_chain) {
      // Sizes of the fits behind generation `gen`'s samples.
      std::vector<std::size_t> to_current(gen, config.sample_size);
      to_current[0] = config.source.total();
      rec.predicted_variance =
          predicted_variance(SampleSchedule(std::move(to_current), source_variance));
      // Resampling steps separating the source fit from the current refit.
      std::vector<std::size_t> between_fits(gen, config.sample_size);
      rec.expected_w2sq =
          expected_w2_squared(SampleSchedule(std::move(between_fits), source_variance));
      rec.gaussian_w2sq =
          gaussian_w2_squared(source_fit, std::get<GaussianModel>(refit));
    }

    if (gen % config.snapshot_every == 0) {
      result.snapshots.push_back(
          detail::make_snapshot(gen, current, original, config.kl_bins));
    }

    result.records.push_back(rec);
    if (gen == config.iterations) {
      result.final_samples = std::move(current);
    }
    model = std::move(refit);
  }
  return result;
}

/// Per-generation mean and sample standard deviation of every record
/// field across independent chains.
struct EnsembleResult {
  ChainConfig config;
  std::size_t chains = 0;
  std::vector<GenerationRecord> mean;
  std::vector<GenerationRecord> stddev;
};

/// Runs `chains` independent chains, chain c seeded with config.seed + c,
/// and aggregates the records. Chains may execute on up to `threads`
/// worker threads (0 picks the hardware concurrency); aggregation always
/// runs in chain-index order, so the result does not depend on thread
/// scheduling.
inline EnsembleResult run_ensemble(const ChainConfig& config, std::size_t chains,
                                   unsigned threads = 0) {
  if (chains < 1) throw std::invalid_argument("run_ensemble: chains must be >= 1");
  validate(config);

  std::vector<std::vector<GenerationRecord>> per_chain(chains);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, chains));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chains) return;
      ChainConfig chain_config = config;
      chain_config.seed = config.seed + static_cast<std::uint64_t>(c);
      per_chain[c] = run_chain(chain_config).records;
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const std::size_t gens = config.iterations;
  EnsembleResult result{config, chains, {}, {}};
  result.mean.resize(gens);
  result.stddev.resize(gens);

  auto aggregate = [&](auto&& field_of) {
    for (std::size_t g = 0; g < gens; ++g) {
      double sum = 0.0;
      for (std::size_t c = 0; c < chains; ++c) sum += field_of(per_chain[c][g]);
      const double mean = sum / static_cast<double>(chains);
      double ss = 0.0;
      for (std::size_t c = 0; c < chains; ++c) {
        const double d = field_of(per_chain[c][g]) - mean;
        ss += d * d;
      }
      const double sd =
          chains > 1 ? std::sqrt(ss / static_cast<double>(chains - 1)) : 0.0;
      field_of(result.mean[g]) = mean;
      field_of(result.stddev[g]) = sd;
    }
  };

  for (std::size_t g = 0; g < gens; ++g) {
    result.mean[g].generation = g + 1;
    result.stddev[g].generation = g + 1;
  }
  aggregate([](GenerationRecord& r) -> double& { return r.kl; });
  aggregate([](GenerationRecord& r) -> double& { return r.w1; });
  aggregate([](GenerationRecord& r) -> double& { return r.sample_mean; });
  aggregate([](GenerationRecord& r) -> double& { return r.sample_variance; });

  if (config.estimator == EstimatorKind::kGaussianMoments) {
    auto aggregate_optional = [&](auto&& member) {
      for (std::size_t g = 0; g < gens; ++g) {
        double sum = 0.0;
        for (std::size_t c = 0; c < chains; ++c) sum += *(per_chain[c][g].*member);
        const double mean = sum / static_cast<double>(chains);
        double ss = 0.0;
        for (std::size_t c = 0; c < chains; ++c) {
          const double d = *(per_chain[c][g].*member) - mean;
          ss += d * d;
        }
        result.mean[g].*member = mean;
        result.stddev[g].*member =
            chains > 1 ? std::sqrt(ss / static_cast<double>(chains - 1)) : 0.0;
      }
    };
    aggregate_optional(&GenerationRecord::predicted_variance);
    aggregate_optional(&GenerationRecord::expected_w2sq);
    aggregate_optional(&GenerationRecord::gaussian_w2sq);
  }
  return result;
}

/// Fraction of the peak density a local maximum must reach to count as a
/// mode. Without the floor, every isolated tail sample forms its own
/// microscopic KDE bump and gets counted.
inline constexpr double kModeDensityFloor = 0.01;

/// Counts the modes of a KDE fitted to the samples: the density is
/// evaluated on a uniform grid spanning the sample range plus three
/// bandwidths on each side, and interior local maxima reaching at least
/// kModeDensityFloor of the peak density are counted. Consecutive equal
/// values collapse into one candidate, so a symmetric peak landing
/// between grid points still counts once.
inline std::size_t count_modes(const SampleSet& samples, double bandwidth,
                               std::size_t grid_points) {
  if (!(bandwidth > 0.0)) {
    throw std::invalid_argument("count_modes: bandwidth must be positive");
  }
  if (grid_points < 3) {
    throw std::invalid_argument("count_modes: grid_points must be >= 3");
  }
  const KdeModel model = fit_kde(samples, bandwidth);
  const auto [min_it, max_it] =
      std::minmax_element(samples.values.begin(), samples.values.end());
  const double lo = *min_it - 3.0 * bandwidth;
  const double hi = *max_it + 3.0 * bandwidth;
  std::vector<double> density(grid_points);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    density[i] = kde_log_density(model, x);
    peak = std::max(peak, density[i]);
  }
  const double floor = peak + std::log(kModeDensityFloor);
  std::size_t modes = 0;
  std::size_t i = 1;
  while (i + 1 < grid_points) {
    if (density[i] > density[i - 1]) {
      std::size_t j = i;
      while (j + 1 < grid_points && density[j + 1] == density[j]) ++j;
      if (j + 1 < grid_points && density[j + 1] < density[j]) {
        if (density[j] >= floor) ++modes;
        i = j + 1;
        continue;
      }
      i = j + 1;
      continue;
    }
    ++i;
  }
  return modes;
}

}  // namespace collapsim
