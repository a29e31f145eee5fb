#pragma once

#include "fregrad/autograd.hpp"
#include "fregrad/dsp.hpp"
#include "fregrad/prior.hpp"

#include <vector>

namespace fregrad::loss {

struct MagLossConfig {
  /// (fft_size, window_size, hop_size) per resolution, Hann windows.
  std::vector<dsp::StftConfig> resolutions{
      {512, 240, 50, dsp::Window::Hann},
      {1024, 600, 120, dsp::Window::Hann},
      {2048, 1200, 240, dsp::Window::Hann},
  };
  double log_floor = 1e-7;

  /// Longest window; inputs must be at least this long.
  int min_length() const;

  friend bool operator==(const MagLossConfig&, const MagLossConfig&) = default;
};

/// mean(((eps - eps_hat) / sigma)^2) over a single-row signal [1, L].
ag::Tensor diff_loss(const ag::Tensor& eps, const ag::Tensor& eps_hat, const Vector& sigma);

/// Mean over resolutions of mean |log|STFT(eps_hat)| - log|STFT(eps)||.
ag::Tensor mag_loss(const ag::Tensor& eps, const ag::Tensor& eps_hat, const MagLossConfig& config = {});

/// Value-only multi-resolution log-magnitude L1 distance between two signals.
double mag_loss_value(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                      const MagLossConfig& config = {});

struct BandTerms {
  double diff_low = 0;
  double diff_high = 0;
  double mag_low = 0;
  double mag_high = 0;
};

/// diff_low + lambda * mag_low + diff_high + lambda * mag_high.
double combine(const BandTerms& terms, double lambda);

struct FinalLoss {
  ag::Tensor total;
  BandTerms terms;
};

/// Two-band objective for eps / eps_hat stored as [2, L] (row 0 low, row 1 high).
/// With lambda == 0 the magnitude terms are still reported but carry no gradient.
FinalLoss final_loss(const ag::Tensor& eps, const ag::Tensor& eps_hat, const prior::PriorVariance& prior,
                     double lambda, const MagLossConfig& config = {});

}  // namespace fregrad::loss
