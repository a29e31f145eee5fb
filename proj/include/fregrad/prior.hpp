#pragma once

#include "fregrad/dsp.hpp"
#include "fregrad/rng.hpp"
#include "fregrad/types.hpp"

#include <utility>

namespace fregrad::prior {

struct PriorConfig {
  double sigma_min = 0.1;
  int split_bin = 40;
  /// When false both sub-bands share one prior built from the full mel band.
  bool separate = true;

  friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

/// Splits an N x 80 mel into bins [0, split_bin) and [split_bin, 80).
std::pair<Matrix, Matrix> split_mel(const dsp::MelSpectrogram& mel, int split_bin = 40);

/// Per-frame standard deviation from a log-mel segment:
/// sigma_i = sqrt(E_i / max_j E_j) with E_i the mean of exp(segment(i, :)),
/// clamped below at sigma_min.
Vector frame_sigma(const Eigen::Ref<const Matrix>& segment, double sigma_min = 0.1);

/// Repeats every frame value `samples_per_frame` times.
Vector expand_sigma(const Eigen::Ref<const Vector>& frame_sigma, int samples_per_frame);

/// As above, then crops or extends with the last frame to `target_length`.
/// Mismatches larger than one frame are rejected.
Vector expand_sigma(const Eigen::Ref<const Vector>& frame_sigma, int samples_per_frame,
                    Eigen::Index target_length);

/// Diagonal prior standard deviations for the two wavelet sub-bands.
class PriorVariance {
 public:
  /// Validates lengths and that every entry lies in [sigma_min, 1].
  PriorVariance(Vector sigma_low, Vector sigma_high, double sigma_min);

  const Vector& sigma_low() const { return sigma_low_; }
  const Vector& sigma_high() const { return sigma_high_; }
  double sigma_min() const { return sigma_min_; }
  Eigen::Index size() const { return sigma_low_.size(); }

  /// Unit prior (sigma == 1 everywhere); used when no mel conditioning is wanted.
  static PriorVariance identity(Eigen::Index length);

 private:
  Vector sigma_low_;
  Vector sigma_high_;
  double sigma_min_;
};

/// Builds per-sample sub-band priors for a signal whose sub-bands have
/// `subband_length` samples (hop_length / 2 samples per mel frame).
PriorVariance build_prior(const dsp::MelSpectrogram& mel, Eigen::Index subband_length,
                          const PriorConfig& config = {});

/// Independent N(0, sigma_i^2) draws per sub-band sample: low band first, then high.
dsp::WaveletPair sample_prior_noise(const PriorVariance& prior, Rng& rng);

}  // namespace fregrad::prior
