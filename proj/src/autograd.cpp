#include "fregrad/autograd.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fregrad::ag {

namespace {

thread_local Graph* current_graph = nullptr;
thread_local bool grad_mode = true;
thread_local bool check_finite = false;

using TapMap = Eigen::Map<Matrix, 0, Eigen::OuterStride<>>;
using ConstTapMap = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

Shape shape_of(const Matrix& m) { return {m.rows(), m.cols()}; }

Eigen::Index product(const Shape& shape, std::size_t from) {
  return std::accumulate(shape.begin() + static_cast<std::ptrdiff_t>(from), shape.end(),
                         Eigen::Index{1}, std::multiplies<>());
}

Matrix& grad_of(Node& n) {
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

template <typename Expr>
void accumulate(Node& n, const Expr& g) {
  if (!n.requires_grad) return;
  grad_of(n) += g;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch [" + std::to_string(a.rows()) + "," +
              std::to_string(a.cols()) + "] vs [" + std::to_string(b.rows()) + "," +
              std::to_string(b.cols()) + "]");
}

// Tap k of a weight stored as rows x (inner * K) with column index i * K + k.
ConstTapMap tap(const Matrix& w, Eigen::Index inner, Eigen::Index kernel, Eigen::Index k) {
  return ConstTapMap(w.data() + k * w.rows(), w.rows(), inner, Eigen::OuterStride<>(kernel * w.rows()));
}

TapMap tap(Matrix& w, Eigen::Index inner, Eigen::Index kernel, Eigen::Index k) {
  return TapMap(w.data() + k * w.rows(), w.rows(), inner, Eigen::OuterStride<>(kernel * w.rows()));
}

}  // namespace

// Tensor ----------------------------------------------------------------------

Tensor::Tensor(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->shape = shape_of(value);
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor::Tensor(Matrix value, Shape shape, bool requires_grad) : node_(std::make_shared<Node>()) {
  require(!shape.empty() && shape[0] == value.rows() && product(shape, 1) == value.cols(),
          "Tensor: logical shape does not match storage");
  node_->shape = std::move(shape);
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::parameter(Matrix value, Shape shape) {
  if (shape.empty()) return Tensor(std::move(value), true);
  return Tensor(std::move(value), std::move(shape), true);
}

Matrix Tensor::grad() const {
  if (has_grad()) return node_->grad;
  return Matrix::Zero(rows(), cols());
}

Tensor Tensor::clone() const { return Tensor(node_->value, node_->shape, node_->requires_grad); }

// Graph -----------------------------------------------------------------------

Graph::Graph() : previous_(current_graph) { current_graph = this; }

Graph::~Graph() { current_graph = previous_; }

Graph* Graph::current() { return current_graph; }

void Graph::backward(const Tensor& loss) {
  require(loss.defined() && loss.rows() == 1 && loss.cols() == 1,
          "backward: loss must be a scalar tensor");
  require(loss.requires_grad(), "backward: loss does not depend on any parameter");
  for (const auto& node : records_) node->grad.resize(0, 0);
  grad_of(*loss.node())(0, 0) += 1;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    Node& node = **it;
    if (node.grad.size() != 0 && node.backward) node.backward(node);
  }
}

NoGradGuard::NoGradGuard() : previous_(grad_mode) { grad_mode = false; }

NoGradGuard::~NoGradGuard() { grad_mode = previous_; }

bool grad_enabled() { return grad_mode; }

void set_debug_checks(bool enabled) { check_finite = enabled; }

bool debug_checks() { return check_finite; }

Tensor make_result(Matrix value, Shape shape, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward) {
  if (check_finite && !value.allFinite()) throw Error("autograd: non-finite value produced");
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->shape = shape.empty() ? shape_of(node->value) : std::move(shape);
  node->is_leaf = false;
  const bool needs_grad =
      grad_mode && current_graph != nullptr &&
      std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.defined() && t.requires_grad(); });
  if (needs_grad) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.defined() ? t.node() : nullptr);
    node->backward = std::move(backward);
    current_graph->records_.push_back(node);
  }
  return Tensor(std::move(node));
}

// Elementwise -------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return make_result(a.value() + b.value(), {}, {a, b}, [](Node& self) {
    accumulate(*self.inputs[0], self.grad);
    accumulate(*self.inputs[1], self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return make_result(a.value() - b.value(), {}, {a, b}, [](Node& self) {
    accumulate(*self.inputs[0], self.grad);
    accumulate(*self.inputs[1], -self.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return make_result(a.value().cwiseProduct(b.value()), {}, {a, b}, [](Node& self) {
    accumulate(*self.inputs[0], self.grad.cwiseProduct(self.inputs[1]->value));
    accumulate(*self.inputs[1], self.grad.cwiseProduct(self.inputs[0]->value));
  });
}

Tensor add_column(const Tensor& x, const Tensor& b) {
  require(b.cols() == 1 && b.rows() == x.rows(), "add_column: bias must be [C, 1] matching x rows");
  Matrix out = x.value();
  out.colwise() += b.value().col(0);
  return make_result(std::move(out), {}, {x, b}, [](Node& self) {
    accumulate(*self.inputs[0], self.grad);
    accumulate(*self.inputs[1], self.grad.rowwise().sum());
  });
}

Tensor scale(const Tensor& x, Real factor) {
  return make_result(factor * x.value(), {}, {x}, [factor](Node& self) {
    accumulate(*self.inputs[0], factor * self.grad);
  });
}

Tensor tanh(const Tensor& x) {
  return make_result(x.value().array().tanh().matrix(), {}, {x}, [](Node& self) {
    accumulate(*self.inputs[0],
               (self.grad.array() * (1 - self.value.array().square())).matrix());
  });
}

Tensor sigmoid(const Tensor& x) {
  Matrix y = (1 / (1 + (-x.value().array()).exp())).matrix();
  return make_result(std::move(y), {}, {x}, [](Node& self) {
    accumulate(*self.inputs[0],
               (self.grad.array() * self.value.array() * (1 - self.value.array())).matrix());
  });
}

Tensor silu(const Tensor& x) {
  const auto& v = x.value().array();
  Matrix y = (v / (1 + (-v).exp())).matrix();
  return make_result(std::move(y), {}, {x}, [](Node& self) {
    const auto& in = self.inputs[0]->value.array();
    const auto s = 1 / (1 + (-in).exp());
    accumulate(*self.inputs[0], (self.grad.array() * (s * (1 + in * (1 - s)))).matrix());
  });
}

Tensor relu(const Tensor& x) {
  return make_result(x.value().cwiseMax(Real(0)), {}, {x}, [](Node& self) {
    accumulate(*self.inputs[0],
               (self.inputs[0]->value.array() > 0).select(self.grad, Matrix::Zero(self.grad.rows(), self.grad.cols())));
  });
}

Tensor leaky_relu(const Tensor& x, Real slope) {
  Matrix y = (x.value().array() > 0).select(x.value(), slope * x.value());
  return make_result(std::move(y), {}, {x}, [slope](Node& self) {
    accumulate(*self.inputs[0],
               (self.inputs[0]->value.array() > 0).select(self.grad, slope * self.grad));
  });
}

Tensor square(const Tensor& x) {
  return make_result(x.value().cwiseAbs2(), {}, {x}, [](Node& self) {
    accumulate(*self.inputs[0], 2 * self.grad.cwiseProduct(self.inputs[0]->value));
  });
}

Tensor abs(const Tensor& x) {
  return make_result(x.value().cwiseAbs(), {}, {x}, [](Node& self) {
    accumulate(*self.inputs[0], self.grad.cwiseProduct(self.inputs[0]->value.cwiseSign()));
  });
}

Tensor log_clamped(const Tensor& x, Real floor) {
  require(floor > 0, "log_clamped: floor must be positive");
  Matrix y = x.value().cwiseMax(floor).array().log().matrix();
  return make_result(std::move(y), {}, {x}, [floor](Node& self) {
    const auto& in = self.inputs[0]->value.array();
    accumulate(*self.inputs[0],
               (in > floor).select(self.grad.array() / in, Real(0)).matrix());
  });
}

// Reductions ------------------------------------------------------------------

Tensor sum(const Tensor& x) {
  Matrix y(1, 1);
  y(0, 0) = x.value().sum();
  return make_result(std::move(y), {}, {x}, [](Node& self) {
    const Node& in = *self.inputs[0];
    accumulate(*self.inputs[0], Matrix::Constant(in.value.rows(), in.value.cols(), self.grad(0, 0)));
  });
}

Tensor mean(const Tensor& x) {
  require(x.numel() > 0, "mean: empty tensor");
  Matrix y(1, 1);
  y(0, 0) = x.value().mean();
  return make_result(std::move(y), {}, {x}, [](Node& self) {
    const Node& in = *self.inputs[0];
    const Real g = self.grad(0, 0) / static_cast<Real>(in.value.size());
    accumulate(*self.inputs[0], Matrix::Constant(in.value.rows(), in.value.cols(), g));
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  return make_result(a.value() * b.value(), {}, {a, b}, [](Node& self) {
    Node& lhs = *self.inputs[0];
    Node& rhs = *self.inputs[1];
    if (lhs.requires_grad) grad_of(lhs).noalias() += self.grad * rhs.value.transpose();
    if (rhs.requires_grad) grad_of(rhs).noalias() += lhs.value.transpose() * self.grad;
  });
}

// Channels ----------------------------------------------------------------------

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.cols(), "concat_channels: temporal lengths differ");
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a.value(), b.value();
  const Eigen::Index split = a.rows();
  return make_result(std::move(out), {}, {a, b}, [split](Node& self) {
    accumulate(*self.inputs[0], self.grad.topRows(split));
    accumulate(*self.inputs[1], self.grad.bottomRows(self.grad.rows() - split));
  });
}

std::pair<Tensor, Tensor> split_channels(const Tensor& x, Eigen::Index at) {
  require(at > 0 && at < x.rows(), "split_channels: split index out of range");
  const Eigen::Index rest = x.rows() - at;
  Tensor top = make_result(x.value().topRows(at), {}, {x}, [](Node& self) {
    Node& in = *self.inputs[0];
    if (in.requires_grad) grad_of(in).topRows(self.grad.rows()) += self.grad;
  });
  Tensor bottom = make_result(x.value().bottomRows(rest), {}, {x}, [](Node& self) {
    Node& in = *self.inputs[0];
    if (in.requires_grad) grad_of(in).bottomRows(self.grad.rows()) += self.grad;
  });
  return {top, bottom};
}

std::pair<Tensor, Tensor> dwt_channelwise(const Tensor& x) {
  auto [low, high] = dsp::haar_dwt_rows(x.value());
  const Eigen::Index n = x.cols();
  const Real r = Real(1) / std::sqrt(Real(2));
  Tensor lo = make_result(std::move(low), {}, {x}, [n, r](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    Matrix& g = grad_of(in);
    g(Eigen::all, Eigen::seq(0, n - 2, 2)) += r * self.grad;
    g(Eigen::all, Eigen::seq(1, n - 1, 2)) += r * self.grad;
  });
  Tensor hi = make_result(std::move(high), {}, {x}, [n, r](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    Matrix& g = grad_of(in);
    g(Eigen::all, Eigen::seq(0, n - 2, 2)) += r * self.grad;
    g(Eigen::all, Eigen::seq(1, n - 1, 2)) -= r * self.grad;
  });
  return {lo, hi};
}

Tensor idwt_channelwise(const Tensor& low, const Tensor& high) {
  require_same_shape(low, high, "idwt_channelwise");
  return make_result(dsp::haar_idwt_rows(low.value(), high.value()), {}, {low, high}, [](Node& self) {
    auto [glow, ghigh] = dsp::haar_dwt_rows(self.grad);
    accumulate(*self.inputs[0], glow);
    accumulate(*self.inputs[1], ghigh);
  });
}

// Convolutions ------------------------------------------------------------------

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias, int dilation) {
  const Shape& ws = weight.shape();
  require(ws.size() == 3, "conv1d: weight must be [C_out, C_in, K]");
  const Eigen::Index c_out = ws[0], c_in = ws[1], kernel = ws[2];
  require(input.rows() == c_in, "conv1d: input has " + std::to_string(input.rows()) +
                                    " channels, weight expects " + std::to_string(c_in));
  require(kernel % 2 == 1, "conv1d: kernel size must be odd for same padding");
  require(dilation >= 1, "conv1d: dilation must be >= 1");
  require(!bias.defined() || (bias.rows() == c_out && bias.cols() == 1), "conv1d: bias must be [C_out, 1]");
  const Eigen::Index length = input.cols();
  const Eigen::Index half = (kernel - 1) / 2;

  Matrix out = Matrix::Zero(c_out, length);
  if (bias.defined()) out.colwise() += bias.value().col(0);
  const Matrix& x = input.value();
  const Matrix& w = weight.value();
  for (Eigen::Index k = 0; k < kernel; ++k) {
    const Eigen::Index offset = (k - half) * dilation;
    const Eigen::Index t0 = std::max<Eigen::Index>(0, -offset);
    const Eigen::Index t1 = std::min(length, length - offset);
    if (t1 <= t0) continue;
    out.middleCols(t0, t1 - t0).noalias() += tap(w, c_in, kernel, k) * x.middleCols(t0 + offset, t1 - t0);
  }

  std::vector<Tensor> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result(std::move(out), {}, std::move(inputs),
                     [c_in, kernel, half, dilation, length](Node& self) {
                       Node& in = *self.inputs[0];
                       Node& wn = *self.inputs[1];
                       const Matrix& g = self.grad;
                       for (Eigen::Index k = 0; k < kernel; ++k) {
                         const Eigen::Index offset = (k - half) * dilation;
                         const Eigen::Index t0 = std::max<Eigen::Index>(0, -offset);
                         const Eigen::Index t1 = std::min(length, length - offset);
                         if (t1 <= t0) continue;
                         const Eigen::Index n = t1 - t0;
                         if (in.requires_grad) {
                           grad_of(in).middleCols(t0 + offset, n).noalias() +=
                               tap(wn.value, c_in, kernel, k).transpose() * g.middleCols(t0, n);
                         }
                         if (wn.requires_grad) {
                           tap(grad_of(wn), c_in, kernel, k).noalias() +=
                               g.middleCols(t0, n) * in.value.middleCols(t0 + offset, n).transpose();
                         }
                       }
                       if (self.inputs.size() > 2) accumulate(*self.inputs[2], g.rowwise().sum());
                     });
}

Tensor conv_transpose1d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
                        int padding) {
  const Shape& ws = weight.shape();
  require(ws.size() == 3, "conv_transpose1d: weight must be [C_in, C_out, K]");
  const Eigen::Index c_in = ws[0], c_out = ws[1], kernel = ws[2];
  require(input.rows() == c_in, "conv_transpose1d: channel mismatch");
  require(stride >= 1 && padding >= 0, "conv_transpose1d: stride must be >= 1 and padding >= 0");
  require(!bias.defined() || (bias.rows() == c_out && bias.cols() == 1),
          "conv_transpose1d: bias must be [C_out, 1]");
  const Eigen::Index len_in = input.cols();
  const Eigen::Index len_out = (len_in - 1) * stride - 2 * padding + kernel;
  require(len_out >= 1, "conv_transpose1d: empty output");

  Matrix out = Matrix::Zero(c_out, len_out);
  if (bias.defined()) out.colwise() += bias.value().col(0);
  const Matrix& x = input.value();
  const Matrix& w = weight.value();
  for (Eigen::Index k = 0; k < kernel; ++k) {
    const Matrix y = tap(w, c_out, kernel, k).transpose() * x;
    for (Eigen::Index t = 0; t < len_in; ++t) {
      const Eigen::Index col = t * stride + k - padding;
      if (col >= 0 && col < len_out) out.col(col) += y.col(t);
    }
  }

  std::vector<Tensor> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result(std::move(out), {}, std::move(inputs),
                     [c_out, kernel, stride, padding, len_in, len_out](Node& self) {
                       Node& in = *self.inputs[0];
                       Node& wn = *self.inputs[1];
                       const Matrix& g = self.grad;
                       Matrix gathered(c_out, len_in);
                       for (Eigen::Index k = 0; k < kernel; ++k) {
                         for (Eigen::Index t = 0; t < len_in; ++t) {
                           const Eigen::Index col = t * stride + k - padding;
                           if (col >= 0 && col < len_out) {
                             gathered.col(t) = g.col(col);
                           } else {
                             gathered.col(t).setZero();
                           }
                         }
                         if (in.requires_grad) {
                           grad_of(in).noalias() += tap(wn.value, c_out, kernel, k) * gathered;
                         }
                         if (wn.requires_grad) {
                           tap(grad_of(wn), c_out, kernel, k).noalias() += in.value * gathered.transpose();
                         }
                       }
                       if (self.inputs.size() > 2) accumulate(*self.inputs[2], g.rowwise().sum());
                     });
}

namespace {

// Valid input index range [lo, hi) for out = in * stride + tap - pad inside [0, out_len).
std::pair<Eigen::Index, Eigen::Index> valid_range(Eigen::Index in_len, Eigen::Index out_len,
                                                  Eigen::Index stride, Eigen::Index tap_index,
                                                  Eigen::Index pad) {
  const Eigen::Index shift = tap_index - pad;
  Eigen::Index lo = shift >= 0 ? 0 : (-shift + stride - 1) / stride;
  Eigen::Index hi = out_len - 1 - shift < 0 ? 0 : (out_len - 1 - shift) / stride + 1;
  return {std::min(lo, in_len), std::min(hi, in_len)};
}

}  // namespace

Tensor conv_transpose2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride_w, int pad_h, int pad_w) {
  require(stride_w >= 1 && pad_h >= 0 && pad_w >= 0, "conv_transpose2d: bad stride/padding");
  require(!bias.defined() || (bias.rows() == 1 && bias.cols() == 1), "conv_transpose2d: bias must be [1, 1]");
  const Eigen::Index h_in = input.rows(), w_in = input.cols();
  const Eigen::Index kh = weight.rows(), kw = weight.cols();
  const Eigen::Index h_out = h_in - 1 - 2 * pad_h + kh;
  const Eigen::Index w_out = (w_in - 1) * stride_w - 2 * pad_w + kw;
  require(h_out >= 1 && w_out >= 1, "conv_transpose2d: empty output");

  Matrix out = Matrix::Constant(h_out, w_out, bias.defined() ? bias.value()(0, 0) : Real(0));
  const Matrix& x = input.value();
  const Matrix& w = weight.value();
  for (Eigen::Index i = 0; i < kh; ++i) {
    const auto [r0, r1] = valid_range(h_in, h_out, 1, i, pad_h);
    if (r1 <= r0) continue;
    for (Eigen::Index j = 0; j < kw; ++j) {
      const auto [c0, c1] = valid_range(w_in, w_out, stride_w, j, pad_w);
      if (c1 <= c0) continue;
      const Eigen::Index orow = r0 + i - pad_h;
      const Eigen::Index ocol = c0 * stride_w + j - pad_w;
      out(Eigen::seqN(orow, r1 - r0), Eigen::seqN(ocol, c1 - c0, stride_w)) +=
          w(i, j) * x(Eigen::seqN(r0, r1 - r0), Eigen::seqN(c0, c1 - c0));
    }
  }

  std::vector<Tensor> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result(std::move(out), {}, std::move(inputs),
                     [h_in, w_in, h_out, w_out, kh, kw, stride_w, pad_h, pad_w](Node& self) {
                       Node& in = *self.inputs[0];
                       Node& wn = *self.inputs[1];
                       const Matrix& g = self.grad;
                       for (Eigen::Index i = 0; i < kh; ++i) {
                         const auto [r0, r1] = valid_range(h_in, h_out, 1, i, pad_h);
                         if (r1 <= r0) continue;
                         for (Eigen::Index j = 0; j < kw; ++j) {
                           const auto [c0, c1] = valid_range(w_in, w_out, stride_w, j, pad_w);
                           if (c1 <= c0) continue;
                           const auto gblock = g(Eigen::seqN(r0 + i - pad_h, r1 - r0),
                                                 Eigen::seqN(c0 * stride_w + j - pad_w, c1 - c0, stride_w));
                           if (in.requires_grad) {
                             grad_of(in)(Eigen::seqN(r0, r1 - r0), Eigen::seqN(c0, c1 - c0)) +=
                                 wn.value(i, j) * gblock;
                           }
                           if (wn.requires_grad) {
                             grad_of(wn)(i, j) +=
                                 in.value(Eigen::seqN(r0, r1 - r0), Eigen::seqN(c0, c1 - c0))
                                     .cwiseProduct(gblock)
                                     .sum();
                           }
                         }
                       }
                       if (self.inputs.size() > 2) accumulate(*self.inputs[2], Matrix::Constant(1, 1, g.sum()));
                     });
}

// Spectral ----------------------------------------------------------------------

Tensor stft_magnitude(const Tensor& x, const dsp::StftConfig& config) {
  require(x.rows() == 1, "stft_magnitude: expected a single-row signal [1, L]");
  const Vector signal = x.value().row(0).transpose();
  auto spectrum = std::make_shared<dsp::ComplexMatrix>(dsp::stft(signal, config));
  Matrix magnitude = spectrum->cwiseAbs();
  return make_result(std::move(magnitude), {}, {x}, [spectrum, config](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    const Vector window = dsp::analysis_window(config);
    const int n_fft = config.fft_size;
    const int bins = n_fft / 2 + 1;
    const Eigen::Index length = in.value.cols();
    Matrix& gx = grad_of(in);
    Eigen::FFT<Real> fft;
    std::vector<std::complex<Real>> freq(n_fft), time(n_fft);
    for (Eigen::Index f = 0; f < spectrum->rows(); ++f) {
      std::fill(freq.begin(), freq.end(), std::complex<Real>(0));
      bool any = false;
      for (int k = 0; k < bins; ++k) {
        const std::complex<Real> s = (*spectrum)(f, k);
        const Real mag = std::abs(s);
        if (mag > 0 && self.grad(f, k) != 0) {
          freq[k] = self.grad(f, k) * s / mag;
          any = true;
        }
      }
      if (!any) continue;
      fft.inv(time, freq);  // (1/N) sum_k F_k exp(+i 2 pi k n / N)
      const Eigen::Index start = f * config.hop_size - n_fft / 2;
      for (int n = 0; n < n_fft; ++n) {
        if (window[n] == 0) continue;
        gx(0, dsp::reflect_index(start + n, length)) += window[n] * static_cast<Real>(n_fft) * time[n].real();
      }
    }
  });
}

}  // namespace fregrad::ag
