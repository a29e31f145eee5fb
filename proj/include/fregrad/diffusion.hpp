#pragma once

#include "fregrad/dsp.hpp"
#include "fregrad/loss.hpp"
#include "fregrad/model.hpp"
#include "fregrad/prior.hpp"
#include "fregrad/rng.hpp"
#include "fregrad/schedule.hpp"

#include <functional>
#include <span>
#include <vector>

namespace fregrad::diffusion {

using dsp::WaveletPair;

/// x_t = sqrt(gamma) * x0 + sqrt(1 - gamma) * eps, per band.
WaveletPair forward_diffuse(const WaveletPair& x0, const WaveletPair& eps, Real gamma);

/// As above with gamma taken from the schedule at 1-based step t.
WaveletPair forward_diffuse(const WaveletPair& x0, int t, const WaveletPair& eps,
                            const schedule::NoiseSchedule& schedule);

/// x_{t-1} = mean_scale * x_t - eps_scale * eps_hat + sigma * z.
struct ReverseCoefficients {
  Real mean_scale;  // 1 / sqrt(1 - beta)
  Real eps_scale;   // beta / (sqrt(1 - beta) * sqrt(1 - gamma))
  Real sigma;       // sqrt((1 - gamma_prev) / (1 - gamma) * beta)
};

ReverseCoefficients reverse_coefficients(Real beta, Real gamma, Real gamma_prev);
ReverseCoefficients reverse_coefficients(const schedule::NoiseSchedule& schedule, int t);

/// One ancestral step. z is drawn from the prior for t > 1; the final step
/// (t == 1) adds no noise.
WaveletPair reverse_step(const WaveletPair& x_t, int t, const WaveletPair& eps_hat,
                         const schedule::NoiseSchedule& schedule, const prior::PriorVariance& prior, Rng& rng);

/// [2, L] matrix view of a pair (row 0 low, row 1 high) and back.
Matrix stack(const WaveletPair& pair);
WaveletPair unstack(const Eigen::Ref<const Matrix>& m);

struct SampleOptions {
  /// Called with every intermediate x_t (t = T..0) when set.
  std::function<void(int, const WaveletPair&)> on_step;
};

/// Runs the reverse chain from x_T ~ N(0, Sigma) and returns iDWT(x_0).
/// The chain operates exclusively on wavelet pairs; the waveform is formed
/// once, at the end.
dsp::Waveform sample(const model::Denoiser& model, const dsp::MelSpectrogram& mel,
                     const schedule::NoiseSchedule& schedule, const prior::PriorVariance& prior, Rng& rng,
                     const SampleOptions& options = {});

struct TrainExample {
  dsp::Waveform audio;
  dsp::MelSpectrogram mel;
};

struct TrainOptions {
  double lambda = 0.1;
  prior::PriorConfig prior;
  loss::MagLossConfig mag;
};

/// Noise and step drawn for one batch element.
struct Draw {
  int t = 0;
  WaveletPair eps;
  prior::PriorVariance prior = prior::PriorVariance::identity(1);
};

struct StepResult {
  double loss = 0;            // batch mean of the final objective
  loss::BandTerms terms;      // batch means of the four components
  std::vector<Draw> draws;
};

/// Forward + backward for one batch. Model gradients are reset first and hold
/// d(loss)/d(theta) on return; the optimizer update is left to the caller.
StepResult train_step(model::Denoiser& model, std::span<const TrainExample> batch,
                      const schedule::NoiseSchedule& schedule, const TrainOptions& options, Rng& rng);

}  // namespace fregrad::diffusion
