#include "fregrad/diffusion.hpp"

#include <cmath>

namespace fregrad::diffusion {

WaveletPair forward_diffuse(const WaveletPair& x0, const WaveletPair& eps, Real gamma) {
  require(x0.low.size() == x0.high.size() && eps.low.size() == eps.high.size() && x0.size() == eps.size(),
          "forward_diffuse: length mismatch");
  require(gamma >= 0 && gamma <= 1, "forward_diffuse: gamma must lie in [0, 1]");
  const Real signal = std::sqrt(gamma);
  const Real noise = std::sqrt(1 - gamma);
  return {signal * x0.low + noise * eps.low, signal * x0.high + noise * eps.high};
}

WaveletPair forward_diffuse(const WaveletPair& x0, int t, const WaveletPair& eps,
                            const schedule::NoiseSchedule& schedule) {
  return forward_diffuse(x0, eps, schedule.gamma_at(t));
}

ReverseCoefficients reverse_coefficients(Real beta, Real gamma, Real gamma_prev) {
  require(beta >= 0 && beta < 1, "reverse_coefficients: beta must lie in [0, 1)");
  require(gamma >= 0 && gamma < 1, "reverse_coefficients: gamma must lie in [0, 1)");
  const Real root = std::sqrt(1 - beta);
  return {1 / root, beta / (root * std::sqrt(1 - gamma)),
          std::sqrt(std::max(Real(0), (1 - gamma_prev) / (1 - gamma) * beta))};
}

ReverseCoefficients reverse_coefficients(const schedule::NoiseSchedule& schedule, int t) {
  return reverse_coefficients(schedule.beta_at(t), schedule.gamma_at(t), schedule.gamma_prev(t));
}

WaveletPair reverse_step(const WaveletPair& x_t, int t, const WaveletPair& eps_hat,
                         const schedule::NoiseSchedule& schedule, const prior::PriorVariance& prior, Rng& rng) {
  require(t >= 1, "reverse_step: t must be >= 1");
  require(x_t.size() == eps_hat.size() && x_t.size() == prior.size(), "reverse_step: length mismatch");
  const ReverseCoefficients c = reverse_coefficients(schedule, t);
  WaveletPair out{c.mean_scale * x_t.low - c.eps_scale * eps_hat.low,
                  c.mean_scale * x_t.high - c.eps_scale * eps_hat.high};
  if (t > 1) {
    const WaveletPair z = prior::sample_prior_noise(prior, rng);
    out.low += c.sigma * z.low;
    out.high += c.sigma * z.high;
  }
  return out;
}

Matrix stack(const WaveletPair& pair) {
  Matrix m(2, pair.size());
  m.row(0) = pair.low.transpose();
  m.row(1) = pair.high.transpose();
  return m;
}

WaveletPair unstack(const Eigen::Ref<const Matrix>& m) {
  require(m.rows() == 2, "unstack: expected 2 rows");
  return {m.row(0).transpose(), m.row(1).transpose()};
}

dsp::Waveform sample(const model::Denoiser& model, const dsp::MelSpectrogram& mel,
                     const schedule::NoiseSchedule& schedule, const prior::PriorVariance& prior, Rng& rng,
                     const SampleOptions& options) {
  const Eigen::Index length = mel.frame_count() * model.config().upsample_factor();
  require(prior.size() == length, "sample: prior covers " + std::to_string(prior.size()) +
                                      " samples but the mel implies " + std::to_string(length));
  ag::NoGradGuard no_grad;
  const ag::Tensor conditioner = model.upsample(mel.frames);
  WaveletPair x = prior::sample_prior_noise(prior, rng);
  if (options.on_step) options.on_step(schedule.steps(), x);
  for (int t = schedule.steps(); t >= 1; --t) {
    const ag::Tensor eps_hat = model.forward_conditioned(ag::Tensor::constant(stack(x)), t, conditioner);
    x = reverse_step(x, t, unstack(eps_hat.value()), schedule, prior, rng);
    if (options.on_step) options.on_step(t - 1, x);
  }
  return {dsp::haar_idwt(x), mel.sample_rate};
}

StepResult train_step(model::Denoiser& model, std::span<const TrainExample> batch,
                      const schedule::NoiseSchedule& schedule, const TrainOptions& options, Rng& rng) {
  require(!batch.empty(), "train_step: empty batch");
  model.zero_grad();
  ag::Graph graph;
  StepResult result;
  ag::Tensor total;
  const Real inv_batch = Real(1) / static_cast<Real>(batch.size());
  for (const TrainExample& example : batch) {
    const Eigen::Index length = example.audio.size();
    require(length % 4 == 0, "train_step: waveform length must be a multiple of 4");
    const WaveletPair x0 = dsp::haar_dwt(example.audio.samples);
    prior::PriorVariance prior = prior::build_prior(example.mel, x0.size(), options.prior);

    Draw draw;
    draw.t = static_cast<int>(rng.uniform_int(1, schedule.steps()));
    draw.eps = prior::sample_prior_noise(prior, rng);
    const WaveletPair x_t = forward_diffuse(x0, draw.t, draw.eps, schedule);

    const ag::Tensor eps_hat = model.forward(ag::Tensor::constant(stack(x_t)), draw.t, example.mel.frames);
    const loss::FinalLoss l =
        loss::final_loss(ag::Tensor::constant(stack(draw.eps)), eps_hat, prior, options.lambda, options.mag);

    const ag::Tensor weighted = ag::scale(l.total, inv_batch);
    total = total.defined() ? ag::add(total, weighted) : weighted;
    result.terms.diff_low += l.terms.diff_low * inv_batch;
    result.terms.diff_high += l.terms.diff_high * inv_batch;
    result.terms.mag_low += l.terms.mag_low * inv_batch;
    result.terms.mag_high += l.terms.mag_high * inv_batch;
    draw.prior = std::move(prior);
    result.draws.push_back(std::move(draw));
  }
  result.loss = total.value()(0, 0);
  graph.backward(total);
  return result;
}

}  // namespace fregrad::diffusion
