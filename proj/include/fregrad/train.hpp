#pragma once

#include "fregrad/checkpoint.hpp"
#include "fregrad/config.hpp"
#include "fregrad/diffusion.hpp"
#include "fregrad/model.hpp"
#include "fregrad/rng.hpp"
#include "fregrad/schedule.hpp"

#include <filesystem>
#include <functional>
#include <ostream>
#include <vector>

namespace fregrad::train {

/// Loads every WAV named by `paths`; directories contribute their *.wav files
/// in name order. An empty result raises ConfigError.
std::vector<dsp::Waveform> load_dataset(const std::vector<std::string>& paths, int sample_rate);

/// Adam with bias correction and a fixed learning rate.
class Adam {
 public:
  explicit Adam(const config::OptimizerConfig& config = {}) : config_(config) {}

  void step(const std::vector<model::NamedParameter>& parameters);

  long steps() const { return step_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  void set_state(long step, std::vector<Matrix> m, std::vector<Matrix> v);

 private:
  config::OptimizerConfig config_;
  long step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

struct LogRow {
  long step = 0;
  loss::BandTerms terms;
  double total = 0;
};

/// CSV header used by the loss log.
inline constexpr const char* kLossLogHeader = "step,L_diff_l,L_diff_h,L_mag_l,L_mag_h,L_final";
void write_log_row(std::ostream& out, const LogRow& row);

/// Owns the model, optimizer and the single RNG stream that drives crops,
/// timesteps and noise, so a checkpoint captures everything a step depends on.
class Trainer {
 public:
  Trainer(const config::RunConfig& config, std::vector<dsp::Waveform> clips);

  /// Restores model, optimizer, step counter and RNG from a checkpoint.
  void resume(const checkpoint::Checkpoint& checkpoint);

  /// One optimizer step on a freshly drawn batch.
  LogRow step();

  checkpoint::Checkpoint snapshot() const;

  long completed_steps() const { return step_; }
  const model::Denoiser& model() const { return model_; }
  model::Denoiser& model() { return model_; }
  const schedule::NoiseSchedule& schedule() const { return schedule_; }
  const config::RunConfig& config() const { return config_; }

 private:
  diffusion::TrainExample draw_example();

  config::RunConfig config_;
  std::vector<dsp::Waveform> clips_;
  model::Denoiser model_;
  schedule::NoiseSchedule schedule_;
  Adam adam_;
  Rng rng_;
  long step_ = 0;
};

struct RunOptions {
  std::filesystem::path out_dir;
  long steps = 0;                   // total step count to reach
  std::function<void(const LogRow&)> on_step;
};

/// Trains until `options.steps`, appending to out_dir/loss.csv (flushed every
/// step) and writing out_dir/step_<n>.ckpt periodically plus out_dir/last.ckpt
/// at exit.
void run(Trainer& trainer, const RunOptions& options);

}  // namespace fregrad::train
