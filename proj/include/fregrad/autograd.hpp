#pragma once

// Minimal reverse-mode automatic differentiation over dense 2-D tensors.
//
// A Tensor wraps a shared node holding an Eigen matrix. Sequences are stored
// as [channels, time] matrices; convolution weights keep their logical
// 3-D shape ([C_out, C_in, K]) in `shape()` and are stored flattened as
// rows = shape[0], cols = product of the remaining dims, row-major order of
// the trailing dims (column index = ci * K + k).
//
// Operations record themselves into the innermost live Graph on the current
// thread when at least one input requires a gradient. Without a Graph (or
// inside a NoGradGuard) nothing is recorded.

#include "fregrad/dsp.hpp"
#include "fregrad/types.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace fregrad::ag {

using Shape = std::vector<Eigen::Index>;

struct Node {
  Matrix value;
  Matrix grad;
  Shape shape;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);
  Tensor(Matrix value, Shape shape, bool requires_grad = false);

  /// Leaf tensor that accumulates gradients.
  static Tensor parameter(Matrix value, Shape shape = {});
  static Tensor constant(Matrix value) { return Tensor(std::move(value), false); }

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  /// Mutable access for optimizers and initializers; never call while a
  /// graph that reads this tensor is pending backward.
  Matrix& mutable_value() { return node_->value; }

  bool has_grad() const { return node_->grad.size() != 0; }
  /// Gradient, or zeros if nothing has been accumulated yet.
  Matrix grad() const;
  void zero_grad() { node_->grad.resize(0, 0); }

  const Shape& shape() const { return node_->shape; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  Eigen::Index numel() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  /// Independent leaf with the same value and requires_grad flag.
  Tensor clone() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend Tensor make_result(Matrix, Shape, std::vector<Tensor>, std::function<void(Node&)>);

  std::shared_ptr<Node> node_;
};

/// Tape of op records in creation (hence topological) order.
class Graph {
 public:
  Graph();
  ~Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  std::size_t size() const { return records_.size(); }

  /// Populates d(loss)/d(leaf) for every leaf requiring a gradient. Leaf
  /// gradients accumulate across calls; intermediate gradients are reset.
  void backward(const Tensor& loss);

  void clear() { records_.clear(); }

  static Graph* current();

 private:
  friend Tensor make_result(Matrix, Shape, std::vector<Tensor>, std::function<void(Node&)>);

  std::vector<std::shared_ptr<Node>> records_;
  Graph* previous_ = nullptr;
};

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// When enabled, every op result is checked for NaN/Inf and throws.
void set_debug_checks(bool enabled);
bool debug_checks();

/// Creates an op result; records it when any input requires a gradient.
Tensor make_result(Matrix value, Shape shape, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward);

// Elementwise ---------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// x [C, L] plus a column b [C, 1] broadcast over time.
Tensor add_column(const Tensor& x, const Tensor& b);
Tensor scale(const Tensor& x, Real factor);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
/// x * sigmoid(x)
Tensor silu(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, Real slope);
Tensor square(const Tensor& x);
Tensor abs(const Tensor& x);
/// log(max(x, floor)); zero gradient where x <= floor.
Tensor log_clamped(const Tensor& x, Real floor);

// Reductions and products ---------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor matmul(const Tensor& a, const Tensor& b);

// Channel bookkeeping -------------------------------------------------------

Tensor concat_channels(const Tensor& a, const Tensor& b);
std::pair<Tensor, Tensor> split_channels(const Tensor& x, Eigen::Index at);

/// Orthonormal Haar analysis applied to each row of x [C, L].
std::pair<Tensor, Tensor> dwt_channelwise(const Tensor& x);
Tensor idwt_channelwise(const Tensor& low, const Tensor& high);

// Convolutions --------------------------------------------------------------

/// Dilated cross-correlation with zero "same" padding of (K-1)*d/2 per side.
/// input [C_in, L], weight [C_out, C_in, K] (K odd), bias [C_out, 1] or undefined.
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias, int dilation = 1);

/// Transposed convolution: input [C_in, L], weight [C_in, C_out, K],
/// output length (L - 1) * stride - 2 * padding + K.
Tensor conv_transpose1d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
                        int padding);

/// Single-channel 2-D transposed convolution over a [H, W] image with unit
/// stride along H: weight [KH, KW], bias [1, 1]. Output
/// [H - 1 - 2 * pad_h + KH, (W - 1) * stride_w - 2 * pad_w + KW].
Tensor conv_transpose2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride_w, int pad_h, int pad_w);

// Spectral ------------------------------------------------------------------

/// STFT magnitude of a single-row signal x [1, L]: frames x (fft_size/2 + 1).
Tensor stft_magnitude(const Tensor& x, const dsp::StftConfig& config);

}  // namespace fregrad::ag
