#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fregrad/dsp.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fregrad;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fregrad_test_dsp";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_raw_wav(const std::filesystem::path& path, int channels, int bits, int format, int frames) {
  std::ofstream out(path, std::ios::binary);
  const auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  const auto put16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * channels * bits / 8);
  out.write("RIFF", 4);
  put32(36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(16);
  put16(static_cast<std::uint16_t>(format));
  put16(static_cast<std::uint16_t>(channels));
  put32(22050);
  put32(static_cast<std::uint32_t>(22050 * channels * bits / 8));
  put16(static_cast<std::uint16_t>(channels * bits / 8));
  put16(static_cast<std::uint16_t>(bits));
  out.write("data", 4);
  put32(data_bytes);
  for (std::uint32_t i = 0; i < data_bytes; ++i) out.put(static_cast<char>(i & 0x7f));
}

}  // namespace

TEST_CASE("haar_dwt worked examples") {
  const double r2 = std::sqrt(2.0);
  auto p = dsp::haar_dwt(Vector{{1.0, 1.0}});
  CHECK(p.low[0] == doctest::Approx(r2).epsilon(1e-15));
  CHECK(p.high[0] == 0.0);

  p = dsp::haar_dwt(Vector{{1.0, -1.0}});
  CHECK(p.low[0] == 0.0);
  CHECK(p.high[0] == doctest::Approx(r2).epsilon(1e-15));

  p = dsp::haar_dwt(Vector{{3.0, 1.0}});
  CHECK(p.low[0] == doctest::Approx(2.828427).epsilon(1e-6));
  CHECK(p.high[0] == doctest::Approx(1.414214).epsilon(1e-6));
}

TEST_CASE("haar_idwt worked examples") {
  Vector x = dsp::haar_idwt(dsp::WaveletPair{Vector{{std::sqrt(2.0)}}, Vector{{0.0}}});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-15));
  x = dsp::haar_idwt(dsp::WaveletPair{Vector{{0.0}}, Vector{{0.0}}});
  CHECK(x.size() == 2);
  CHECK(x.isZero(0));
}

TEST_CASE("haar rejects odd lengths and mismatched bands") {
  CHECK_THROWS_AS(dsp::haar_dwt(Vector{{1.0, 2.0, 3.0}}), InvalidArgument);
  CHECK_THROWS_AS(dsp::haar_dwt(Vector(0)), InvalidArgument);
  CHECK_THROWS_AS(dsp::haar_idwt(dsp::WaveletPair{Vector::Zero(2), Vector::Zero(3)}), InvalidArgument);
}

TEST_CASE("haar round trip, energy and linearity on random signals") {
  Rng rng(7);
  const Vector x = oracle::random_vector(1024, rng);
  const Vector y = oracle::random_vector(1024, rng);
  const auto px = dsp::haar_dwt(x);
  CHECK((dsp::haar_idwt(px) - x).cwiseAbs().maxCoeff() < 1e-12);

  const double ex = x.squaredNorm();
  CHECK(std::abs(ex - px.low.squaredNorm() - px.high.squaredNorm()) < 1e-9 * ex);

  const auto py = dsp::haar_dwt(y);
  const auto pz = dsp::haar_dwt((2.5 * x - 0.75 * y).eval());
  CHECK((pz.low - (2.5 * px.low - 0.75 * py.low)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((pz.high - (2.5 * px.high - 0.75 * py.high)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("haar matches the defining formulas elementwise") {
  Rng rng(3);
  const Vector x = oracle::random_vector(64, rng);
  const auto p = dsp::haar_dwt(x);
  for (int k = 0; k < 32; ++k) {
    CHECK(p.low[k] == doctest::Approx((x[2 * k] + x[2 * k + 1]) / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(p.high[k] == doctest::Approx((x[2 * k] - x[2 * k + 1]) / std::sqrt(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("row-wise haar agrees with the vector transform") {
  Rng rng(11);
  const Matrix m = oracle::random_matrix(3, 16, rng);
  const auto [low, high] = dsp::haar_dwt_rows(m);
  for (int r = 0; r < 3; ++r) {
    const auto p = dsp::haar_dwt(Vector(m.row(r).transpose()));
    CHECK((low.row(r).transpose() - p.low).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((high.row(r).transpose() - p.high).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK((dsp::haar_idwt_rows(low, high) - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("haar works in single precision") {
  const Eigen::VectorXf x = Eigen::VectorXf::Random(32);
  const auto p = dsp::haar_dwt(x);
  static_assert(std::is_same_v<decltype(p.low), Eigen::VectorXf>);
  CHECK((dsp::haar_idwt(p) - x).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("stft of zeros is zero and magnitude is homogeneous and sign invariant") {
  const dsp::StftConfig cfg{512, 240, 50, dsp::Window::Hann};
  CHECK(dsp::stft_magnitude(Vector::Zero(2000), cfg).isZero(0));

  Rng rng(5);
  const Vector x = oracle::random_vector(3000, rng);
  const Matrix m = dsp::stft_magnitude(x, cfg);
  CHECK((m.array() >= 0).all());
  CHECK((dsp::stft_magnitude(2 * x, cfg) - 2 * m).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((dsp::stft_magnitude(-x, cfg) - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stft of an exact-bin sinusoid peaks at that bin") {
  const int n_fft = 256, k0 = 19;
  const dsp::StftConfig cfg{n_fft, n_fft, 64, dsp::Window::Rectangular};
  Vector x(4096);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::cos(2 * std::numbers::pi * k0 * i / n_fft);
  const Matrix m = dsp::stft_magnitude(x, cfg);
  // Frames fully inside the signal see a whole number of periods.
  for (Eigen::Index f = 4; f < m.rows() - 4; ++f) {
    Eigen::Index arg;
    m.row(f).maxCoeff(&arg);
    CHECK(arg == k0);
    const auto frame = oracle::centered_frame(x, static_cast<int>(f), n_fft, n_fft, 64, false);
    CHECK(m(f, k0) == doctest::Approx(oracle::dft_magnitude(frame, k0)).epsilon(1e-10));
  }
}

TEST_CASE("stft matches a direct DFT including reflected edges") {
  Rng rng(9);
  const Vector x = oracle::random_vector(700, rng);
  const dsp::StftConfig cfg{512, 240, 50, dsp::Window::Hann};
  const Matrix m = dsp::stft_magnitude(x, cfg);
  CHECK(m.rows() == 14);
  CHECK(m.cols() == 257);
  for (int f : {0, 1, 7, 13}) {
    const auto frame = oracle::centered_frame(x, f, 512, 240, 50, true);
    for (int k : {0, 3, 100, 256}) {
      CHECK(m(f, k) == doctest::Approx(oracle::dft_magnitude(frame, k)).epsilon(1e-10));
    }
  }
}

TEST_CASE("stft rejects signals shorter than a window") {
  CHECK_THROWS_AS(dsp::stft_magnitude(Vector::Zero(100), dsp::StftConfig{512, 240, 50, dsp::Window::Hann}),
                  InvalidArgument);
  CHECK_THROWS_AS((dsp::StftConfig{256, 512, 50, dsp::Window::Hann}.validate()), InvalidArgument);
  CHECK_THROWS_AS((dsp::StftConfig{512, 240, 300, dsp::Window::Hann}.validate()), InvalidArgument);
}

TEST_CASE("mel spectrogram frame count, floor and energy ordering") {
  const auto zeros = dsp::mel_spectrogram({Vector::Zero(25600), 22050});
  CHECK(zeros.frame_count() == 100);
  CHECK(zeros.bins() == 80);
  CHECK((zeros.frames.array() == static_cast<Real>(std::log(1e-5))).all());

  Rng rng(1);
  Vector noise(22050);
  for (auto& v : noise) v = 2 * rng.uniform() - 1;
  const auto loud = dsp::mel_spectrogram({noise, 22050});
  const auto quiet = dsp::mel_spectrogram({0.01 * noise, 22050});
  CHECK(loud.frames.array().exp().mean() > quiet.frames.array().exp().mean());
  CHECK(loud.frames.allFinite());
}

TEST_CASE("mel filterbank is HTK spaced between 80 Hz and 8 kHz") {
  const dsp::MelConfig cfg;
  const Matrix fb = dsp::mel_filterbank(cfg);
  CHECK(fb.rows() == 80);
  CHECK(fb.cols() == 513);
  CHECK((fb.array() >= 0).all());
  CHECK(dsp::hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  CHECK(dsp::mel_to_hz(dsp::hz_to_mel(1234.5)) == doctest::Approx(1234.5));
  // No weight below fmin or above fmax.
  const double bin_hz = 22050.0 / 1024;
  for (Eigen::Index k = 0; k < fb.cols(); ++k) {
    if (k * bin_hz < 80.0 || k * bin_hz > 8000.0) CHECK(fb.col(k).isZero(0));
  }
  for (Eigen::Index b = 0; b < fb.rows(); ++b) CHECK(fb.row(b).maxCoeff() > 0);
}

TEST_CASE("wav round trip stays within quantization error") {
  Vector x(22050);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 0.8 * std::sin(2 * std::numbers::pi * 440 * i / 22050.0);
  const auto path = temp_path("sine.wav");
  dsp::write_wav(path, {x, 22050});
  const auto back = dsp::read_wav(path);
  CHECK(back.sample_rate == 22050);
  REQUIRE(back.size() == x.size());
  CHECK((back.samples - x).cwiseAbs().maxCoeff() <= 1.0 / 32768);
}

TEST_CASE("wav writer clamps out-of-range samples") {
  const auto path = temp_path("clamp.wav");
  dsp::write_wav(path, {Vector{{-3.0, 3.0, 0.5}}, 16000});
  const auto back = dsp::read_wav(path);
  CHECK(back.samples[0] == -1.0);
  CHECK(back.samples[1] == doctest::Approx(32767.0 / 32768));
  CHECK(back.sample_rate == 16000);
}

TEST_CASE("wav reader error variants") {
  const auto empty = temp_path("empty.wav");
  std::ofstream(empty).close();
  CHECK_THROWS_AS(dsp::read_wav(empty), FormatError);

  const auto stereo = temp_path("stereo.wav");
  write_raw_wav(stereo, 2, 16, 1, 100);
  CHECK_THROWS_AS(dsp::read_wav(stereo), UnsupportedFormat);

  const auto float_wav = temp_path("float.wav");
  write_raw_wav(float_wav, 1, 32, 3, 100);
  CHECK_THROWS_AS(dsp::read_wav(float_wav), UnsupportedFormat);

  CHECK_THROWS_AS(dsp::read_wav(temp_path("does_not_exist.wav")), IoError);

  try {
    dsp::read_wav(empty);
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("empty.wav") != std::string::npos);
  }
}

TEST_CASE("FGR1 matrix round trip and header") {
  Rng rng(2);
  const Matrix m = oracle::random_matrix(5, 80, rng);
  std::stringstream buf;
  dsp::write_matrix(buf, m);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "FGR1");
  CHECK(bytes.size() == 4 + 4 + 4 + 5 * 80 * 8);
  double first;
  std::memcpy(&first, bytes.data() + 12, 8);
  CHECK(first == m(0, 0));
  double second;
  std::memcpy(&second, bytes.data() + 20, 8);
  CHECK(second == m(0, 1));  // row-major
  CHECK(dsp::read_matrix(buf) == m);

  std::stringstream bad("FGR2xxxxxxxx");
  CHECK_THROWS_AS(dsp::read_matrix(bad), FormatError);
}
