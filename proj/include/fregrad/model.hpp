#pragma once

#include "fregrad/autograd.hpp"
#include "fregrad/rng.hpp"
#include "fregrad/types.hpp"

#include <string>
#include <vector>

namespace fregrad::model {

struct ModelConfig {
  int n_blocks = 30;
  int dilation_cycle = 7;
  int hidden = 32;
  int embed_dim = 128;      // raw sinusoidal embedding width
  int embed_hidden = 512;   // width of the two dense layers after it
  int mel_bins = 80;
  std::vector<int> upsample_strides{16, 8};
  int kernel_size = 3;
  /// Frequency-aware dilated convolution; false selects a plain dilated conv.
  bool freq_dconv = true;

  int upsample_factor() const;
  int dilation(int block) const { return 1 << (block % dilation_cycle); }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// 1-D convolution layer; weight [C_out, C_in, K], bias [C_out, 1].
struct Conv {
  ag::Tensor weight;
  ag::Tensor bias;
  int dilation = 1;

  ag::Tensor operator()(const ag::Tensor& x) const { return ag::conv1d(x, weight, bias, dilation); }
};

/// Dense layer on column vectors; weight [out, in], bias [out, 1].
struct Linear {
  ag::Tensor weight;
  ag::Tensor bias;

  ag::Tensor operator()(const ag::Tensor& x) const {
    return ag::add(ag::matmul(weight, x), bias);
  }
};

/// Raw sinusoidal step encoding: dim/2 sines then dim/2 cosines of
/// t * 10^(4 i / (dim/2 - 1)).
Vector sinusoidal_embedding(double t, int dim);

/// Frequency-aware dilated convolution. y [C, L] with L even is split into
/// Haar sub-bands, channel-concatenated to [2C, L/2], convolved by `conv`
/// (weight [2C', 2C, K]), bisected into two [C', L/2] halves and recombined
/// by the inverse transform into [C', L].
ag::Tensor freq_dconv(const ag::Tensor& y, const Conv& conv);

class ResBlock {
 public:
  ResBlock() = default;
  ResBlock(const ModelConfig& config, int index, Rng& rng);

  struct Output {
    ag::Tensor residual;
    ag::Tensor skip;
  };

  /// y [D, L], step_embedding [embed_hidden, 1], conditioner [mel_bins, L].
  Output operator()(const ag::Tensor& y, const ag::Tensor& step_embedding,
                    const ag::Tensor& conditioner) const;

  Linear step_projection;
  Conv conditioner_projection;
  Conv dilated;
  Conv output_projection;
  bool frequency_aware = true;
  int hidden = 0;
};

struct NamedParameter {
  std::string name;
  ag::Tensor tensor;
};

/// Noise predictor over a 2-channel wavelet pair [2, L/2].
class Denoiser {
 public:
  Denoiser(const ModelConfig& config, std::uint64_t seed);
  Denoiser(const Denoiser&) = delete;
  Denoiser& operator=(const Denoiser&) = delete;
  Denoiser(Denoiser&&) = default;
  Denoiser& operator=(Denoiser&&) = default;

  const ModelConfig& config() const { return config_; }

  /// Deep copy with independent parameter storage.
  Denoiser clone() const;

  /// Step embedding after the two dense+swish layers, [embed_hidden, 1].
  ag::Tensor step_embedding(int t) const;

  /// mel is N x mel_bins; returns the conditioner [mel_bins, N * upsample_factor].
  ag::Tensor upsample(const Matrix& mel) const;

  /// noisy [2, L/2], 1-based step t, mel N x mel_bins with L/2 == N * upsample_factor.
  ag::Tensor forward(const ag::Tensor& noisy, int t, const Matrix& mel) const;
  /// Same, with a precomputed conditioner.
  ag::Tensor forward_conditioned(const ag::Tensor& noisy, int t, const ag::Tensor& conditioner) const;

  const std::vector<NamedParameter>& parameters() const { return parameters_; }
  std::size_t parameter_count() const;
  void zero_grad();

  const std::vector<ResBlock>& blocks() const { return blocks_; }
  const Conv& output_projection() const { return output_projection_; }

 private:
  void register_parameters();

  ModelConfig config_;
  Conv input_projection_;
  Linear embed_first_;
  Linear embed_second_;
  std::vector<ag::Tensor> upsample_weights_;
  std::vector<ag::Tensor> upsample_biases_;
  std::vector<ResBlock> blocks_;
  Conv skip_projection_;
  Conv output_projection_;
  std::vector<NamedParameter> parameters_;
};

}  // namespace fregrad::model
