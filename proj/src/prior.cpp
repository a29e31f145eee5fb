#include "fregrad/prior.hpp"

#include <cmath>

namespace fregrad::prior {

std::pair<Matrix, Matrix> split_mel(const dsp::MelSpectrogram& mel, int split_bin) {
  require(mel.bins() == 80, "split_mel: expected 80 mel bins, got " + std::to_string(mel.bins()));
  require(split_bin > 0 && split_bin < mel.bins(), "split_mel: split bin out of range");
  return {mel.frames.leftCols(split_bin), mel.frames.rightCols(mel.bins() - split_bin)};
}

Vector frame_sigma(const Eigen::Ref<const Matrix>& segment, double sigma_min) {
  require(segment.rows() > 0 && segment.cols() > 0, "frame_sigma: empty segment");
  require(segment.allFinite(), "frame_sigma: non-finite mel values");
  require(sigma_min > 0.0 && sigma_min <= 1.0, "frame_sigma: sigma_min must lie in (0, 1]");
  const Vector energy = segment.array().exp().rowwise().mean();
  const Real peak = energy.maxCoeff();
  require(peak > 0, "frame_sigma: all frames have zero energy");
  return (energy / peak).cwiseSqrt().cwiseMax(static_cast<Real>(sigma_min)).cwiseMin(Real(1));
}

Vector expand_sigma(const Eigen::Ref<const Vector>& frame_sigma, int samples_per_frame) {
  require(samples_per_frame >= 1, "expand_sigma: samples_per_frame must be >= 1");
  Vector out(frame_sigma.size() * samples_per_frame);
  for (Eigen::Index i = 0; i < frame_sigma.size(); ++i) {
    out.segment(i * samples_per_frame, samples_per_frame).setConstant(frame_sigma[i]);
  }
  return out;
}

Vector expand_sigma(const Eigen::Ref<const Vector>& frame_sigma, int samples_per_frame,
                    Eigen::Index target_length) {
  require(frame_sigma.size() > 0, "expand_sigma: no frames");
  const Vector full = expand_sigma(frame_sigma, samples_per_frame);
  const Eigen::Index diff = full.size() - target_length;
  require(std::abs(diff) <= samples_per_frame,
          "expand_sigma: " + std::to_string(frame_sigma.size()) + " frames cannot cover " +
              std::to_string(target_length) + " samples");
  if (diff >= 0) return full.head(target_length);
  Vector out(target_length);
  out.head(full.size()) = full;
  out.tail(-diff).setConstant(frame_sigma[frame_sigma.size() - 1]);
  return out;
}

PriorVariance::PriorVariance(Vector sigma_low, Vector sigma_high, double sigma_min)
    : sigma_low_(std::move(sigma_low)), sigma_high_(std::move(sigma_high)), sigma_min_(sigma_min) {
  require(sigma_min_ > 0.0 && sigma_min_ <= 1.0, "PriorVariance: sigma_min must lie in (0, 1]");
  require(sigma_low_.size() == sigma_high_.size(), "PriorVariance: sub-band lengths differ");
  require(sigma_low_.size() > 0, "PriorVariance: empty prior");
  const auto in_range = [&](const Vector& s) {
    return s.allFinite() && (s.array() >= static_cast<Real>(sigma_min_)).all() &&
           (s.array() <= 1).all();
  };
  require(in_range(sigma_low_) && in_range(sigma_high_),
          "PriorVariance: every sigma must lie in [sigma_min, 1]");
}

PriorVariance PriorVariance::identity(Eigen::Index length) {
  return {Vector::Ones(length), Vector::Ones(length), 1.0};
}

PriorVariance build_prior(const dsp::MelSpectrogram& mel, Eigen::Index subband_length,
                          const PriorConfig& config) {
  require(mel.hop_length % 2 == 0, "build_prior: hop length must be even");
  const int spf = mel.hop_length / 2;
  if (!config.separate) {
    Vector shared = expand_sigma(frame_sigma(mel.frames, config.sigma_min), spf, subband_length);
    return {shared, shared, config.sigma_min};
  }
  const auto [low, high] = split_mel(mel, config.split_bin);
  return {expand_sigma(frame_sigma(low, config.sigma_min), spf, subband_length),
          expand_sigma(frame_sigma(high, config.sigma_min), spf, subband_length),
          config.sigma_min};
}

dsp::WaveletPair sample_prior_noise(const PriorVariance& prior, Rng& rng) {
  dsp::WaveletPair noise{Vector(prior.size()), Vector(prior.size())};
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    noise.low[i] = static_cast<Real>(rng.normal()) * prior.sigma_low()[i];
  }
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    noise.high[i] = static_cast<Real>(rng.normal()) * prior.sigma_high()[i];
  }
  return noise;
}

}  // namespace fregrad::prior
