#pragma once

#include "fregrad/loss.hpp"
#include "fregrad/model.hpp"
#include "fregrad/prior.hpp"
#include "fregrad/schedule.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fregrad::config {

/// Thrown for malformed or unknown configuration entries.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct OptimizerConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 16;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct DataConfig {
  std::vector<std::string> paths;
  int segment_length = 16384;
  int sample_rate = 22050;

  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct TrainLoopConfig {
  long steps = 1000000;
  long checkpoint_every = 1000;

  friend bool operator==(const TrainLoopConfig&, const TrainLoopConfig&) = default;
};

/// Each flag switches off exactly one mechanism.
struct Ablations {
  bool freq_dconv = true;      // off: plain dilated conv of the same kernel and dilation
  bool separate_prior = true;  // off: one full-band prior shared by both sub-bands
  bool zero_snr = true;        // off: raw linear-beta schedule, no rescaling
  bool mag_loss = true;        // off: lambda = 0

  friend bool operator==(const Ablations&, const Ablations&) = default;
};

struct RunConfig {
  model::ModelConfig model;
  schedule::ScheduleConfig schedule;
  double lambda = 0.1;
  loss::MagLossConfig mag;
  prior::PriorConfig prior;
  dsp::MelConfig mel;
  OptimizerConfig optimizer;
  DataConfig data;
  TrainLoopConfig train;
  Ablations ablations;
  std::uint64_t seed = 0;

  /// Component configurations with the ablation flags applied.
  model::ModelConfig model_config() const;
  schedule::ScheduleConfig schedule_config() const;
  prior::PriorConfig prior_config() const;
  double effective_lambda() const;

  /// Cross-field checks (upsample factor == hop / 2, segment alignment, ...).
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Settings for the small model used in tests and smoke runs.
RunConfig toy_config();

std::string to_json(const RunConfig& config);
/// Unknown keys and type mismatches throw ConfigError naming the key path.
RunConfig from_json(const std::string& text);

RunConfig load(const std::filesystem::path& path);
void save(const std::filesystem::path& path, const RunConfig& config);

/// Dotted key paths whose values differ between the two configurations.
std::vector<std::string> differing_fields(const RunConfig& a, const RunConfig& b);

}  // namespace fregrad::config
