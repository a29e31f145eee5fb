#include "fregrad/loss.hpp"

#include <algorithm>

namespace fregrad::loss {

int MagLossConfig::min_length() const {
  int longest = 0;
  for (const auto& r : resolutions) longest = std::max(longest, r.window_size);
  return longest;
}

ag::Tensor diff_loss(const ag::Tensor& eps, const ag::Tensor& eps_hat, const Vector& sigma) {
  require(eps.rows() == 1 && eps_hat.rows() == 1, "diff_loss: expected single-row signals");
  require(eps.cols() == eps_hat.cols() && eps.cols() == sigma.size(),
          "diff_loss: length mismatch between eps, eps_hat and sigma");
  require((sigma.array() > 0).all(), "diff_loss: sigma must be positive");
  const ag::Tensor weight = ag::Tensor::constant(sigma.cwiseInverse().transpose());
  return ag::mean(ag::square(ag::mul(ag::sub(eps, eps_hat), weight)));
}

ag::Tensor mag_loss(const ag::Tensor& eps, const ag::Tensor& eps_hat, const MagLossConfig& config) {
  require(!config.resolutions.empty(), "mag_loss: no resolutions configured");
  require(eps.rows() == 1 && eps_hat.rows() == 1 && eps.cols() == eps_hat.cols(),
          "mag_loss: expected two single-row signals of equal length");
  require(eps.cols() >= config.min_length(),
          "mag_loss: signal of " + std::to_string(eps.cols()) + " samples is shorter than the largest window (" +
              std::to_string(config.min_length()) + ")");
  const Real floor = static_cast<Real>(config.log_floor);
  ag::Tensor total;
  for (const auto& res : config.resolutions) {
    const ag::Tensor target = ag::log_clamped(ag::stft_magnitude(eps, res), floor);
    const ag::Tensor predicted = ag::log_clamped(ag::stft_magnitude(eps_hat, res), floor);
    const ag::Tensor term = ag::mean(ag::abs(ag::sub(predicted, target)));
    total = total.defined() ? ag::add(total, term) : term;
  }
  return ag::scale(total, Real(1) / static_cast<Real>(config.resolutions.size()));
}

double mag_loss_value(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                      const MagLossConfig& config) {
  require(a.size() == b.size(), "mag_loss_value: length mismatch");
  ag::NoGradGuard no_grad;
  const ag::Tensor ta = ag::Tensor::constant(a.transpose());
  const ag::Tensor tb = ag::Tensor::constant(b.transpose());
  return static_cast<double>(mag_loss(ta, tb, config).value()(0, 0));
}

double combine(const BandTerms& terms, double lambda) {
  return terms.diff_low + lambda * terms.mag_low + terms.diff_high + lambda * terms.mag_high;
}

FinalLoss final_loss(const ag::Tensor& eps, const ag::Tensor& eps_hat, const prior::PriorVariance& prior,
                     double lambda, const MagLossConfig& config) {
  require(eps.rows() == 2 && eps_hat.rows() == 2, "final_loss: expected [2, L] noise pairs");
  require(lambda >= 0.0, "final_loss: lambda must be non-negative");
  const auto [eps_low, eps_high] = ag::split_channels(eps, 1);
  const auto [hat_low, hat_high] = ag::split_channels(eps_hat, 1);

  FinalLoss out;
  const ag::Tensor diff_low = diff_loss(eps_low, hat_low, prior.sigma_low());
  const ag::Tensor diff_high = diff_loss(eps_high, hat_high, prior.sigma_high());
  out.terms.diff_low = diff_low.value()(0, 0);
  out.terms.diff_high = diff_high.value()(0, 0);
  ag::Tensor total = ag::add(diff_low, diff_high);
  if (lambda > 0.0) {
    const ag::Tensor mag_low = mag_loss(eps_low, hat_low, config);
    const ag::Tensor mag_high = mag_loss(eps_high, hat_high, config);
    out.terms.mag_low = mag_low.value()(0, 0);
    out.terms.mag_high = mag_high.value()(0, 0);
    total = ag::add(total, ag::scale(ag::add(mag_low, mag_high), static_cast<Real>(lambda)));
  } else {
    out.terms.mag_low = mag_loss_value(eps_low.value().transpose(), hat_low.value().transpose(), config);
    out.terms.mag_high = mag_loss_value(eps_high.value().transpose(), hat_high.value().transpose(), config);
  }
  out.total = total;
  return out;
}

}  // namespace fregrad::loss
