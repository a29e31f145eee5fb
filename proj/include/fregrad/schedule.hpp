#pragma once

#include "fregrad/types.hpp"

#include <iosfwd>

namespace fregrad::schedule {

/// beta[t] linearly interpolated from beta_start (t=1) to beta_end (t=T).
Vector linear_beta(int steps, double beta_start, double beta_end);

/// Cumulative product gamma[t] = prod_{i<=t} (1 - beta[i]).
Vector gamma_from_beta(const Eigen::Ref<const Vector>& beta);

/// Affine rescaling of sqrt(gamma) that pins the first entry and drives the
/// last entry to tau * sqrt(g1) / (sqrt(g1) - sqrt(gT) + tau):
///   s_new = sqrt(g1) / (sqrt(g1) - sqrt(gT) + tau) * (sqrt(gamma) - sqrt(gT) + tau)
Vector rescale_zero_snr(const Eigen::Ref<const Vector>& gamma, double tau);

/// gamma / (1 - gamma), elementwise.
Vector snr(const Eigen::Ref<const Vector>& gamma);

struct ScheduleConfig {
  int steps = 50;
  double beta_start = 1e-4;
  double beta_end = 0.05;
  double tau = 1e-4;
  bool zero_snr = true;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

/// Immutable diffusion schedule. Timesteps are 1-based (t in 1..T); vectors
/// are stored 0-based, so step t lives at index t - 1.
///
/// When zero_snr is enabled every consumer sees gamma_new = (sqrt_gamma_rescaled)^2
/// and the per-step beta is re-derived as 1 - gamma_new[t] / gamma_new[t-1].
/// With zero_snr disabled the raw beta and gamma are used unchanged.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(const ScheduleConfig& config = {});

  int steps() const { return config_.steps; }
  double tau() const { return config_.tau; }
  bool zero_snr() const { return config_.zero_snr; }
  const ScheduleConfig& config() const { return config_; }

  const Vector& beta() const { return beta_; }
  const Vector& gamma() const { return gamma_; }
  const Vector& sqrt_gamma_rescaled() const { return sqrt_gamma_rescaled_; }

  /// Noise level consumed by diffusion at step t (gamma_new or raw gamma).
  Real gamma_at(int t) const;
  /// gamma_at(t - 1) with gamma_at(0) == 1.
  Real gamma_prev(int t) const;
  /// Per-step beta consistent with gamma_at.
  Real beta_at(int t) const;

  const Vector& effective_gamma() const { return effective_gamma_; }
  const Vector& effective_beta() const { return effective_beta_; }

  /// CSV with columns t, beta, gamma, sqrt_gamma_rescaled, snr, snr_rescaled,
  /// log10_snr, log10_snr_rescaled.
  void write_csv(std::ostream& out) const;

 private:
  void check_step(int t) const;

  ScheduleConfig config_;
  Vector beta_;
  Vector gamma_;
  Vector sqrt_gamma_rescaled_;
  Vector effective_gamma_;
  Vector effective_beta_;
};

}  // namespace fregrad::schedule
