#include "fregrad/model.hpp"

#include <cmath>
#include <numeric>

namespace fregrad::model {

namespace {

constexpr Real kUpsampleSlope = Real(0.4);

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = static_cast<Real>(stddev * rng.normal());
  }
  return m;
}

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = static_cast<Real>(bound * (2 * rng.uniform() - 1));
  }
  return m;
}

// Kaiming-normal weights, zero bias.
Conv make_conv(int c_in, int c_out, int kernel, int dilation, Rng& rng) {
  const double stddev = std::sqrt(2.0 / (c_in * kernel));
  return {ag::Tensor::parameter(normal_matrix(c_out, c_in * kernel, stddev, rng), {c_out, c_in, kernel}),
          ag::Tensor::parameter(Matrix::Zero(c_out, 1)), dilation};
}

Conv make_zero_conv(int c_in, int c_out, int kernel) {
  return {ag::Tensor::parameter(Matrix::Zero(c_out, c_in * kernel), {c_out, c_in, kernel}),
          ag::Tensor::parameter(Matrix::Zero(c_out, 1)), 1};
}

Linear make_linear(int in, int out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  return {ag::Tensor::parameter(uniform_matrix(out, in, bound, rng)),
          ag::Tensor::parameter(uniform_matrix(out, 1, bound, rng))};
}

}  // namespace

int ModelConfig::upsample_factor() const {
  return std::accumulate(upsample_strides.begin(), upsample_strides.end(), 1, std::multiplies<>());
}

void ModelConfig::validate() const {
  require(n_blocks >= 1, "model: n_blocks must be >= 1");
  require(dilation_cycle >= 1, "model: dilation_cycle must be >= 1");
  require(hidden >= 1, "model: hidden must be >= 1");
  require(embed_dim >= 4 && embed_dim % 2 == 0, "model: embed_dim must be even and >= 4");
  require(embed_hidden >= 1, "model: embed_hidden must be >= 1");
  require(mel_bins >= 1, "model: mel_bins must be >= 1");
  require(kernel_size >= 1 && kernel_size % 2 == 1, "model: kernel_size must be odd");
  require(!upsample_strides.empty(), "model: at least one upsampling stage is required");
  for (int s : upsample_strides) require(s >= 2 && s % 2 == 0, "model: upsampling strides must be even");
}

Vector sinusoidal_embedding(double t, int dim) {
  require(dim >= 4 && dim % 2 == 0, "sinusoidal_embedding: dim must be even and >= 4");
  const int half = dim / 2;
  Vector e(dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(10.0, 4.0 * i / (half - 1));
    e[i] = static_cast<Real>(std::sin(t * freq));
    e[half + i] = static_cast<Real>(std::cos(t * freq));
  }
  return e;
}

ag::Tensor freq_dconv(const ag::Tensor& y, const Conv& conv) {
  require(y.cols() % 2 == 0, "freq_dconv: temporal length must be even (got " +
                                 std::to_string(y.cols()) + ")");
  const auto [low, high] = ag::dwt_channelwise(y);
  const ag::Tensor hidden = conv(ag::concat_channels(low, high));
  const auto [out_low, out_high] = ag::split_channels(hidden, hidden.rows() / 2);
  return ag::idwt_channelwise(out_low, out_high);
}

ResBlock::ResBlock(const ModelConfig& config, int index, Rng& rng)
    : frequency_aware(config.freq_dconv), hidden(config.hidden) {
  const int d = config.hidden;
  step_projection = make_linear(config.embed_hidden, d, rng);
  conditioner_projection = make_conv(config.mel_bins, 2 * d, 1, 1, rng);
  if (config.freq_dconv) {
    dilated = make_conv(2 * d, 4 * d, config.kernel_size, config.dilation(index), rng);
  } else {
    dilated = make_conv(d, 2 * d, config.kernel_size, config.dilation(index), rng);
  }
  output_projection = make_conv(d, 2 * d, 1, 1, rng);
}

ResBlock::Output ResBlock::operator()(const ag::Tensor& y, const ag::Tensor& step_embedding,
                                      const ag::Tensor& conditioner) const {
  const ag::Tensor step = step_projection(step_embedding);
  const ag::Tensor shifted = ag::add_column(y, step);
  const ag::Tensor mixed = frequency_aware ? freq_dconv(shifted, dilated) : dilated(shifted);
  const ag::Tensor gates = ag::add(mixed, conditioner_projection(conditioner));
  const auto [gate, filter] = ag::split_channels(gates, hidden);
  const ag::Tensor activated = ag::mul(ag::sigmoid(gate), ag::tanh(filter));
  const auto [residual, skip] = ag::split_channels(output_projection(activated), hidden);
  const Real inv_sqrt2 = Real(1) / std::sqrt(Real(2));
  return {ag::scale(ag::add(y, residual), inv_sqrt2), skip};
}

Denoiser::Denoiser(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int d = config_.hidden;
  input_projection_ = make_conv(2, d, 1, 1, rng);
  embed_first_ = make_linear(config_.embed_dim, config_.embed_hidden, rng);
  embed_second_ = make_linear(config_.embed_hidden, config_.embed_hidden, rng);
  for (int stride : config_.upsample_strides) {
    const double bound = 1.0 / std::sqrt(3.0 * 2 * stride);
    upsample_weights_.push_back(ag::Tensor::parameter(uniform_matrix(3, 2 * stride, bound, rng)));
    upsample_biases_.push_back(ag::Tensor::parameter(uniform_matrix(1, 1, bound, rng)));
  }
  blocks_.reserve(config_.n_blocks);
  for (int i = 0; i < config_.n_blocks; ++i) blocks_.emplace_back(config_, i, rng);
  skip_projection_ = make_conv(d, d, 1, 1, rng);
  output_projection_ = make_zero_conv(d, 2, 1);
  register_parameters();
}

void Denoiser::register_parameters() {
  parameters_.clear();
  auto add = [this](std::string name, const ag::Tensor& t) { parameters_.push_back({std::move(name), t}); };
  add("input_projection.weight", input_projection_.weight);
  add("input_projection.bias", input_projection_.bias);
  add("step_embedding.0.weight", embed_first_.weight);
  add("step_embedding.0.bias", embed_first_.bias);
  add("step_embedding.1.weight", embed_second_.weight);
  add("step_embedding.1.bias", embed_second_.bias);
  for (std::size_t i = 0; i < upsample_weights_.size(); ++i) {
    add("upsampler." + std::to_string(i) + ".weight", upsample_weights_[i]);
    add("upsampler." + std::to_string(i) + ".bias", upsample_biases_[i]);
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "blocks." + std::to_string(i) + ".";
    const ResBlock& b = blocks_[i];
    add(p + "step_projection.weight", b.step_projection.weight);
    add(p + "step_projection.bias", b.step_projection.bias);
    add(p + "conditioner_projection.weight", b.conditioner_projection.weight);
    add(p + "conditioner_projection.bias", b.conditioner_projection.bias);
    add(p + "dilated.weight", b.dilated.weight);
    add(p + "dilated.bias", b.dilated.bias);
    add(p + "output_projection.weight", b.output_projection.weight);
    add(p + "output_projection.bias", b.output_projection.bias);
  }
  add("skip_projection.weight", skip_projection_.weight);
  add("skip_projection.bias", skip_projection_.bias);
  add("output_projection.weight", output_projection_.weight);
  add("output_projection.bias", output_projection_.bias);
}

Denoiser Denoiser::clone() const {
  Denoiser copy(config_, 0);
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    copy.parameters_[i].tensor.mutable_value() = parameters_[i].tensor.value();
  }
  return copy;
}

std::size_t Denoiser::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters_) n += static_cast<std::size_t>(p.tensor.numel());
  return n;
}

void Denoiser::zero_grad() {
  for (auto& p : parameters_) p.tensor.zero_grad();
}

ag::Tensor Denoiser::step_embedding(int t) const {
  require(t >= 1, "step_embedding: timestep must be >= 1 (got " + std::to_string(t) + ")");
  const ag::Tensor raw = ag::Tensor::constant(sinusoidal_embedding(t, config_.embed_dim));
  return ag::silu(embed_second_(ag::silu(embed_first_(raw))));
}

ag::Tensor Denoiser::upsample(const Matrix& mel) const {
  require(mel.cols() == config_.mel_bins, "upsample: expected " + std::to_string(config_.mel_bins) +
                                              " mel bins, got " + std::to_string(mel.cols()));
  require(mel.rows() >= 1, "upsample: empty mel");
  ag::Tensor x = ag::Tensor::constant(mel.transpose());
  for (std::size_t i = 0; i < upsample_weights_.size(); ++i) {
    const int stride = config_.upsample_strides[i];
    x = ag::leaky_relu(ag::conv_transpose2d(x, upsample_weights_[i], upsample_biases_[i], stride, 1, stride / 2),
                       kUpsampleSlope);
  }
  return x;
}

ag::Tensor Denoiser::forward(const ag::Tensor& noisy, int t, const Matrix& mel) const {
  require(noisy.cols() == mel.rows() * config_.upsample_factor(),
          "forward: sub-band length " + std::to_string(noisy.cols()) + " does not match " +
              std::to_string(mel.rows()) + " mel frames x " + std::to_string(config_.upsample_factor()));
  return forward_conditioned(noisy, t, upsample(mel));
}

ag::Tensor Denoiser::forward_conditioned(const ag::Tensor& noisy, int t, const ag::Tensor& conditioner) const {
  require(noisy.rows() == 2, "forward: expected a 2-channel wavelet pair");
  require(conditioner.rows() == config_.mel_bins && conditioner.cols() == noisy.cols(),
          "forward: conditioner shape does not match the input");
  const ag::Tensor embedding = step_embedding(t);
  ag::Tensor y = ag::relu(input_projection_(noisy));
  ag::Tensor skip_sum;
  for (const ResBlock& block : blocks_) {
    auto out = block(y, embedding, conditioner);
    y = out.residual;
    skip_sum = skip_sum.defined() ? ag::add(skip_sum, out.skip) : out.skip;
  }
  const ag::Tensor skip = ag::scale(skip_sum, Real(1) / std::sqrt(static_cast<Real>(blocks_.size())));
  return output_projection_(ag::relu(skip_projection_(skip)));
}

}  // namespace fregrad::model
