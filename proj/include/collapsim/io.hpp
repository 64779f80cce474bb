#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "collapsim/chain.hpp"
#include "collapsim/version.hpp"

namespace collapsim {

/// Shortest decimal form that parses back to the exact same double.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline constexpr char kMetricsCsvHeader[] =
    "generation,kl,w1,sample_mean,sample_variance,predicted_variance,"
    "expected_w2sq,gaussian_w2sq";

/// Renders records as CSV, one row per generation. Optional columns are
/// left empty when absent (KDE runs).
inline std::string metrics_csv(const std::vector<GenerationRecord>& records) {
  std::string out(kMetricsCsvHeader);
  out += '\n';
  auto optional_cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const auto& rec : records) {
    out += std::to_string(rec.generation);
    out += ',';
    out += format_double(rec.kl);
    out += ',';
    out += format_double(rec.w1);
    out += ',';
    out += format_double(rec.sample_mean);
    out += ',';
    out += format_double(rec.sample_variance);
    out += ',';
    out += optional_cell(rec.predicted_variance);
    out += ',';
    out += optional_cell(rec.expected_w2sq);
    out += ',';
    out += optional_cell(rec.gaussian_w2sq);
    out += '\n';
  }
  return out;
}

/// Parses a metrics.csv produced by metrics_csv; losslessly inverts it.
inline std::vector<GenerationRecord> parse_metrics_csv(const std::string& csv) {
  std::vector<GenerationRecord> records;
  std::size_t pos = csv.find('\n');
  if (pos == std::string::npos) return records;
  ++pos;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string::npos) end = csv.size();
    const std::string_view line(csv.data() + pos, end - pos);
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        cells.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cells.size() != 8) {
      throw std::runtime_error("parse_metrics_csv: malformed row");
    }
    auto to_double = [](std::string_view s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("parse_metrics_csv: bad number");
      }
      return v;
    };
    GenerationRecord rec;
    rec.generation = static_cast<std::size_t>(to_double(cells[0]));
    rec.kl = to_double(cells[1]);
    rec.w1 = to_double(cells[2]);
    rec.sample_mean = to_double(cells[3]);
    rec.sample_variance = to_double(cells[4]);
    if (!cells[5].empty()) rec.predicted_variance = to_double(cells[5]);
    if (!cells[6].empty()) rec.expected_w2sq = to_double(cells[6]);
    if (!cells[7].empty()) rec.gaussian_w2sq = to_double(cells[7]);
    records.push_back(rec);
    pos = end + 1;
  }
  return records;
}

inline nlohmann::json component_json(const Component& c) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NormalComponent>) {
          j = {{"kind", "normal"}, {"mean", d.mean}, {"stddev", d.stddev}};
        } else if constexpr (std::is_same_v<T, UniformComponent>) {
          j = {{"kind", "uniform"}, {"low", d.low}, {"high", d.high}};
        } else {
          j = {{"kind", "gamma"}, {"shape", d.shape}, {"scale", d.scale}};
        }
      },
      c.dist);
  j["count"] = c.count;
  return j;
}

inline Component component_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  const std::size_t count = j.at("count");
  if (kind == "normal") return normal_component(j.at("mean"), j.at("stddev"), count);
  if (kind == "uniform") return uniform_component(j.at("low"), j.at("high"), count);
  if (kind == "gamma") return gamma_component(j.at("shape"), j.at("scale"), count);
  throw std::runtime_error("component_from_json: unknown kind '" + kind + "'");
}

/// Config echo: everything needed to reproduce the run, including the
/// resolved component list and the seed.
inline nlohmann::json config_json(const ChainConfig& config, std::size_t chains) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& c : config.source.components()) {
    components.push_back(component_json(c));
  }
  return nlohmann::json{
      {"preset", config.preset.empty() ? nlohmann::json() : nlohmann::json(config.preset)},
      {"components", components},
      {"estimator", config.estimator == EstimatorKind::kKde ? "kde" : "gaussian"},
      {"bandwidth", config.bandwidth},
      {"iterations", config.iterations},
      {"sample_size", config.sample_size},
      {"kl_bins", config.kl_bins},
      {"snapshot_every", config.snapshot_every},
      {"seed", config.seed},
      {"chains", chains},
  };
}

inline ChainConfig config_from_json(const nlohmann::json& j) {
  std::vector<Component> components;
  for (const auto& cj : j.at("components")) {
    components.push_back(component_from_json(cj));
  }
  ChainConfig config{MixtureSpec(std::move(components))};
  if (j.contains("preset") && !j.at("preset").is_null()) {
    config.preset = j.at("preset");
  }
  config.estimator = j.at("estimator") == "kde" ? EstimatorKind::kKde
                                                : EstimatorKind::kGaussianMoments;
  config.bandwidth = j.at("bandwidth");
  config.iterations = j.at("iterations");
  config.sample_size = j.at("sample_size");
  config.kl_bins = j.at("kl_bins");
  config.snapshot_every = j.at("snapshot_every");
  config.seed = j.at("seed");
  return config;
}

/// What a run left behind: the config echo, the emitted files (relative
/// to the output directory), and the wall-clock duration.
struct RunManifest {
  std::string version;
  nlohmann::json config;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("failed while writing '" + path.string() + "'");
  }
}

inline nlohmann::json snapshot_json(const Snapshot& snap) {
  return nlohmann::json{
      {"generation", snap.generation},
      {"edges", snap.samples.edges},
      {"densities", snap.samples.densities},
      {"original_densities", snap.original.densities},
  };
}

inline void prepare_out_dir(const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + out_dir.string() +
                             "': " + ec.message());
  }
}

inline RunManifest finish_manifest(const std::filesystem::path& out_dir,
                                   RunManifest manifest) {
  manifest.version = kVersion;
  nlohmann::json j{
      {"version", manifest.version},
      {"config", manifest.config},
      {"outputs", manifest.outputs},
      {"duration_seconds", manifest.duration_seconds},
  };
  write_file(out_dir / "manifest.json", j.dump(2) + "\n");
  manifest.outputs.push_back("manifest.json");
  return manifest;
}

}  // namespace detail

/// Writes metrics.csv, one snapshot_<generation>.json per snapshot, and
/// manifest.json into out_dir. Every path listed in the returned
/// manifest exists on return.
inline RunManifest write_outputs(const ChainResult& result,
                                 const std::filesystem::path& out_dir,
                                 double duration_seconds = 0.0) {
  detail::prepare_out_dir(out_dir);
  RunManifest manifest;
  manifest.config = config_json(result.config, 1);
  manifest.duration_seconds = duration_seconds;
  detail::write_file(out_dir / "metrics.csv", metrics_csv(result.records));
  manifest.outputs.push_back("metrics.csv");
  for (const auto& snap : result.snapshots) {
    const std::string name = "snapshot_" + std::to_string(snap.generation) + ".json";
    detail::write_file(out_dir / name, detail::snapshot_json(snap).dump(2) + "\n");
    manifest.outputs.push_back(name);
  }
  return detail::finish_manifest(out_dir, std::move(manifest));
}

/// Ensemble variant: metrics.csv holds per-generation ensemble means and
/// metrics_std.csv the matching standard deviations. No snapshots are
/// emitted for ensembles.
inline RunManifest write_outputs(const EnsembleResult& result,
                                 const std::filesystem::path& out_dir,
                                 double duration_seconds = 0.0) {
  detail::prepare_out_dir(out_dir);
  RunManifest manifest;
  manifest.config = config_json(result.config, result.chains);
  manifest.duration_seconds = duration_seconds;
  detail::write_file(out_dir / "metrics.csv", metrics_csv(result.mean));
  manifest.outputs.push_back("metrics.csv");
  detail::write_file(out_dir / "metrics_std.csv", metrics_csv(result.stddev));
  manifest.outputs.push_back("metrics_std.csv");
  return detail::finish_manifest(out_dir, std::move(manifest));
}

}  // namespace collapsim
