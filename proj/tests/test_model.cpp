#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fregrad/config.hpp"
#include "fregrad/model.hpp"
#include "fregrad/train.hpp"
#include "oracles.hpp"

#include <iostream>
#include <numbers>

using namespace fregrad;
using namespace fregrad::model;
using ag::Tensor;

namespace {

ModelConfig toy() { return config::toy_config().model; }

/// Indices where |a - b| exceeds a tiny threshold, as [first, last].
std::pair<Eigen::Index, Eigen::Index> support(const Matrix& a, const Matrix& b) {
  const Eigen::VectorXd diff = (a - b).cast<double>().cwiseAbs().colwise().maxCoeff().transpose();
  Eigen::Index first = -1, last = -1;
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    if (diff[i] > 1e-12) {
      if (first < 0) first = i;
      last = i;
    }
  }
  return {first, last};
}

Conv random_conv(int c_in, int c_out, int k, int d, Rng& rng) {
  return {Tensor::parameter(oracle::random_matrix(c_out, c_in * k, rng), {c_out, c_in, k}),
          Tensor::parameter(oracle::random_matrix(c_out, 1, rng)), d};
}

}  // namespace

TEST_CASE("raw sinusoidal embedding at t = 0") {
  const Vector e = sinusoidal_embedding(0.0, 128);
  CHECK(e.head(64).isZero(0));
  CHECK(e.tail(64).isOnes(0));
}

TEST_CASE("step embeddings have the right width and never collide") {
  const Denoiser m(ModelConfig{}, 1);
  std::vector<Matrix> emb;
  for (int t = 1; t <= 50; ++t) {
    emb.push_back(m.step_embedding(t).value());
    CHECK(emb.back().rows() == 512);
    CHECK(emb.back().cols() == 1);
  }
  double closest = 1e300;
  for (int i = 0; i < 50; ++i)
    for (int j = i + 1; j < 50; ++j) closest = std::min(closest, static_cast<double>((emb[i] - emb[j]).norm()));
  CHECK(closest > 1e-6);
  CHECK_THROWS_AS(m.step_embedding(0), InvalidArgument);
}

TEST_CASE("upsampler output lengths") {
  const Denoiser m(toy(), 2);
  Rng rng(1);
  CHECK(m.upsample(oracle::random_matrix(1, 80, rng)).cols() == 128);
  const Tensor c = m.upsample(oracle::random_matrix(100, 80, rng));
  CHECK(c.rows() == 80);
  CHECK(c.cols() == 12800);
  CHECK_THROWS_AS(m.upsample(Matrix::Zero(3, 40)), InvalidArgument);
}

TEST_CASE("freq_dconv zero input and shapes") {
  Rng rng(2);
  Conv conv = random_conv(64, 64, 3, 2, rng);
  conv.bias.mutable_value().setZero();
  const Tensor zero = Tensor::constant(Matrix::Zero(32, 12800));
  const Tensor out = freq_dconv(zero, conv);
  CHECK(out.rows() == 32);
  CHECK(out.cols() == 12800);
  CHECK(out.value().isZero(0));

  const auto [low, high] = ag::dwt_channelwise(zero);
  const Tensor cat = ag::concat_channels(low, high);
  CHECK(cat.rows() == 64);
  CHECK(cat.cols() == 6400);
  CHECK(conv(cat).rows() == 64);

  CHECK_THROWS_AS(freq_dconv(Tensor::constant(Matrix::Zero(32, 11)), conv), InvalidArgument);
}

TEST_CASE("freq_dconv doubles the receptive field of a plain dilated conv") {
  Rng rng(3);
  const int d_ch = 4, len = 256, p = 129;
  for (const int d : {1, 2, 4}) {
    const Conv plain = random_conv(d_ch, d_ch, 3, d, rng);
    const Conv freq = random_conv(2 * d_ch, 2 * d_ch, 3, d, rng);
    const Matrix base = Matrix::Zero(d_ch, len);
    Matrix impulse = base;
    impulse.col(p).setOnes();

    const auto [pf, pl] = support(plain(Tensor::constant(impulse)).value(), plain(Tensor::constant(base)).value());
    const auto [ff, fl] = support(freq_dconv(Tensor::constant(impulse), freq).value(),
                                  freq_dconv(Tensor::constant(base), freq).value());
    const auto plain_width = pl - pf + 1;
    const auto freq_width = fl - ff + 1;
    CHECK(plain_width == 2 * d + 1);
    CHECK(std::max(std::abs(ff - p), std::abs(fl - p)) <= 2 * d + 1);
    CHECK(freq_width >= 1.5 * plain_width);
  }
}

TEST_CASE("resblock with zeroed output projection passes the input through") {
  ModelConfig cfg = toy();
  Rng rng(4);
  ResBlock block(cfg, 1, rng);
  block.output_projection.weight.mutable_value().setZero();
  const Tensor y = Tensor::constant(oracle::random_matrix(cfg.hidden, 64, rng));
  const Tensor e = Tensor::constant(oracle::random_matrix(cfg.embed_hidden, 1, rng));
  const Tensor c = Tensor::constant(oracle::random_matrix(cfg.mel_bins, 64, rng));
  const auto out = block(y, e, c);
  CHECK((out.residual.value() - y.value() / std::sqrt(2.0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(out.skip.rows() == cfg.hidden);
  CHECK(out.skip.cols() == 64);
  CHECK(out.skip.value().isZero(0));
}

TEST_CASE("gradient reaches the conditioner projection") {
  ModelConfig cfg = toy();
  Rng rng(5);
  ResBlock block(cfg, 0, rng);
  const Tensor y = Tensor::constant(oracle::random_matrix(cfg.hidden, 32, rng));
  const Tensor e = Tensor::constant(oracle::random_matrix(cfg.embed_hidden, 1, rng));
  const Tensor c = Tensor::constant(oracle::random_matrix(cfg.mel_bins, 32, rng));
  ag::Graph g;
  const auto out = block(y, e, c);
  g.backward(ag::add(ag::sum(ag::square(out.residual)), ag::sum(out.skip)));
  CHECK(block.conditioner_projection.weight.grad().norm() > 0);
  CHECK(block.step_projection.weight.grad().norm() > 0);
}

TEST_CASE("forward shape, zero initial output and determinism") {
  const Denoiser m(toy(), 6);
  Rng rng(6);
  const Matrix mel = oracle::random_matrix(3, 80, rng);
  const Tensor x = Tensor::constant(oracle::random_matrix(2, 384, rng));
  const Tensor out = m.forward(x, 7, mel);
  CHECK(out.rows() == 2);
  CHECK(out.cols() == 384);
  CHECK(out.value().isZero(0));
  CHECK_THROWS_AS(m.forward(Tensor::constant(Matrix::Zero(2, 200)), 7, mel), InvalidArgument);

  const Denoiser a(toy(), 9), b(toy(), 9);
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    ag::Tensor pa = a.parameters()[i].tensor, pb = b.parameters()[i].tensor;
    pa.mutable_value() = oracle::random_matrix(pa.rows(), pa.cols(), rng, 0.3);
    pb.mutable_value() = pa.value();
  }
  CHECK(a.forward(x, 3, mel).value() == b.forward(x, 3, mel).value());
  CHECK_FALSE(a.forward(x, 3, mel).value().isZero(0));
}

TEST_CASE("clone is independent") {
  Denoiser a(toy(), 10);
  Denoiser b = a.clone();
  ag::Tensor w = a.parameters()[0].tensor;
  w.mutable_value().setConstant(3.0);
  CHECK(b.parameters()[0].tensor.value() != w.value());
  CHECK(b.parameters().size() == a.parameters().size());
}

TEST_CASE("default configuration parameter count") {
  const Denoiser m(ModelConfig{}, 0);
  const auto n = m.parameter_count();
  std::cout << "parameter count (30 blocks, cycle 7, D=32): " << n << "\n";
  CHECK(n >= 1250000);
  CHECK(n <= 2310000);
  CHECK(n == 1782548);
}

TEST_CASE("plain dilated conv ablation changes only the dilated layer") {
  ModelConfig plain = toy();
  plain.freq_dconv = false;
  const Denoiser a(toy(), 11), b(plain, 11);
  REQUIRE(a.parameters().size() == b.parameters().size());
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    const auto& pa = a.parameters()[i];
    const auto& pb = b.parameters()[i];
    CHECK(pa.name == pb.name);
    if (pa.name.find("dilated.weight") != std::string::npos) {
      CHECK(pa.tensor.shape() == ag::Shape{32, 16, 3});
      CHECK(pb.tensor.shape() == ag::Shape{16, 8, 3});
    } else if (pa.name.find("dilated.bias") != std::string::npos) {
      CHECK(pa.tensor.rows() == 32);
      CHECK(pb.tensor.rows() == 16);
    } else {
      CHECK(pa.tensor.shape() == pb.tensor.shape());
    }
  }
  for (std::size_t i = 0; i < a.blocks().size(); ++i) {
    CHECK(a.blocks()[i].dilated.dilation == b.blocks()[i].dilated.dilation);
    CHECK(a.blocks()[i].frequency_aware);
    CHECK_FALSE(b.blocks()[i].frequency_aware);
  }
}

TEST_CASE("dilation cycle") {
  const ModelConfig cfg;
  CHECK(cfg.dilation(0) == 1);
  CHECK(cfg.dilation(6) == 64);
  CHECK(cfg.dilation(7) == 1);
  CHECK(cfg.dilation(29) == 2);
  CHECK(cfg.upsample_factor() == 128);
}

TEST_CASE("toy model gradients match finite differences") {
  const Denoiser m(toy(), 12);
  Rng rng(12);
  std::vector<Tensor> params;
  for (const auto& p : m.parameters()) {
    ag::Tensor t = p.tensor;
    t.mutable_value() = oracle::random_matrix(t.rows(), t.cols(), rng, 0.3);
    params.push_back(t);
  }
  // One random entry per tensor on a short input; the acceptance suite runs the full sweep.
  const Matrix mel = oracle::random_matrix(1, 80, rng);
  const Tensor x = Tensor::constant(oracle::random_matrix(2, 128, rng));
  const Matrix r = oracle::random_matrix(2, 128, rng);
  const auto loss = [&] { return ag::sum(ag::mul(m.forward(x, 5, mel), Tensor::constant(r))); };
  std::vector<Matrix> analytic;
  {
    ag::Graph g;
    g.backward(loss());
    for (const auto& p : params) analytic.push_back(p.grad());
  }
  ag::NoGradGuard no_grad;
  double worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    ag::Tensor p = params[i];
    const Eigen::Index idx = static_cast<Eigen::Index>(rng.uniform_int(0, p.numel() - 1));
    Real& v = p.mutable_value().data()[idx];
    const Real saved = v;
    v = saved + 1e-5;
    const double up = loss().value()(0, 0);
    v = saved - 1e-5;
    const double down = loss().value()(0, 0);
    v = saved;
    const double fd = (up - down) / 2e-5;
    const double g = analytic[i].data()[idx];
    worst = std::max(worst, std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-6}));
  }
  CHECK(worst < 1e-4);
}

// A stride-s transposed conv with a 2s-wide kernel leaves a periodic ripple on a
// constant input, so this weak check is reported but not enforced.
TEST_CASE("smoke-trained upsampler keeps a time-constant mel nearly constant" * doctest::may_fail()) {
  config::RunConfig cfg = config::toy_config();
  Rng rng(13);
  Vector clip(8192);
  for (Eigen::Index i = 0; i < clip.size(); ++i) {
    clip[i] = 0.4 * std::sin(2 * std::numbers::pi * 180.0 * i / 22050) + 0.05 * rng.normal();
  }
  cfg.data.segment_length = 8192;
  train::Trainer trainer(cfg, {dsp::Waveform{clip, 22050}});
  for (int i = 0; i < 20; ++i) trainer.step();

  Matrix mel(4, 80);
  for (int b = 0; b < 80; ++b) mel.col(b).setConstant(-6.0 + 5.0 * std::sin(b / 7.0));
  // Interior columns only; the first and last frames see the transposed-conv edges.
  const Matrix c = trainer.model().upsample(mel).value().middleCols(128, 256);
  const Vector row_mean = c.rowwise().mean();
  const Eigen::RowVectorXd col_mean = c.colwise().mean();
  const double along_time = (c.colwise() - row_mean).array().square().mean();
  const double across_channels = (c.rowwise() - col_mean).array().square().mean();
  MESSAGE("variance along time " << along_time << ", across channels " << across_channels);
  CHECK(along_time < across_channels);
}
