#include "fregrad/schedule.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace fregrad::schedule {

Vector linear_beta(int steps, double beta_start, double beta_end) {
  require(steps >= 1, "linear_beta: T must be >= 1");
  require(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0,
          "linear_beta: need 0 < beta_start <= beta_end < 1");
  Vector beta(steps);
  if (steps == 1) {
    beta[0] = static_cast<Real>(beta_start);
    return beta;
  }
  for (int i = 0; i < steps; ++i) {
    beta[i] = static_cast<Real>(beta_start + (beta_end - beta_start) * i / (steps - 1));
  }
  return beta;
}

Vector gamma_from_beta(const Eigen::Ref<const Vector>& beta) {
  require(beta.size() >= 1, "gamma_from_beta: empty beta");
  require((beta.array() > 0).all() && (beta.array() < 1).all(),
          "gamma_from_beta: every beta must lie in (0, 1)");
  Vector gamma(beta.size());
  Real acc = 1;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    acc *= 1 - beta[i];
    gamma[i] = acc;
  }
  return gamma;
}

Vector rescale_zero_snr(const Eigen::Ref<const Vector>& gamma, double tau) {
  require(tau > 0.0, "rescale_zero_snr: tau must be > 0 (it guards the division by zero in sampling)");
  require(gamma.size() >= 1, "rescale_zero_snr: empty gamma");
  require((gamma.array() > 0).all() && (gamma.array() < 1).all(),
          "rescale_zero_snr: gamma must lie in (0, 1)");
  for (Eigen::Index i = 1; i < gamma.size(); ++i) {
    require(gamma[i] < gamma[i - 1], "rescale_zero_snr: gamma must be strictly decreasing");
  }
  const Vector root = gamma.cwiseSqrt();
  const Real first = root[0];
  const Real last = root[root.size() - 1];
  const Real t = static_cast<Real>(tau);
  const Real scale = first / (first - last + t);
  return (scale * (root.array() - last + t)).matrix();
}

Vector snr(const Eigen::Ref<const Vector>& gamma) {
  require((gamma.array() < 1).all(), "snr: gamma == 1 has infinite SNR");
  require((gamma.array() >= 0).all(), "snr: gamma must be non-negative");
  return (gamma.array() / (1 - gamma.array())).matrix();
}

NoiseSchedule::NoiseSchedule(const ScheduleConfig& config) : config_(config) {
  beta_ = linear_beta(config.steps, config.beta_start, config.beta_end);
  gamma_ = gamma_from_beta(beta_);
  sqrt_gamma_rescaled_ = rescale_zero_snr(gamma_, config.tau);
  if (config.zero_snr) {
    effective_gamma_ = sqrt_gamma_rescaled_.cwiseAbs2();
    effective_beta_.resize(config.steps);
    Real prev = 1;
    for (int i = 0; i < config.steps; ++i) {
      effective_beta_[i] = 1 - effective_gamma_[i] / prev;
      prev = effective_gamma_[i];
    }
  } else {
    effective_gamma_ = gamma_;
    effective_beta_ = beta_;
  }
}

void NoiseSchedule::check_step(int t) const {
  require(t >= 1 && t <= config_.steps,
          "timestep " + std::to_string(t) + " outside 1.." + std::to_string(config_.steps));
}

Real NoiseSchedule::gamma_at(int t) const {
  check_step(t);
  return effective_gamma_[t - 1];
}

Real NoiseSchedule::gamma_prev(int t) const {
  check_step(t);
  return t == 1 ? Real(1) : effective_gamma_[t - 2];
}

Real NoiseSchedule::beta_at(int t) const {
  check_step(t);
  return effective_beta_[t - 1];
}

void NoiseSchedule::write_csv(std::ostream& out) const {
  const Vector rescaled_gamma = sqrt_gamma_rescaled_.cwiseAbs2();
  const Vector snr_raw = snr(gamma_);
  const Vector snr_new = snr(rescaled_gamma);
  out << "t,beta,gamma,sqrt_gamma_rescaled,snr,snr_rescaled,log10_snr,log10_snr_rescaled\n";
  out << std::setprecision(17);
  for (int i = 0; i < config_.steps; ++i) {
    out << (i + 1) << ',' << beta_[i] << ',' << gamma_[i] << ',' << sqrt_gamma_rescaled_[i] << ','
        << snr_raw[i] << ',' << snr_new[i] << ',' << std::log10(snr_raw[i]) << ','
        << std::log10(snr_new[i]) << '\n';
  }
}

}  // namespace fregrad::schedule
