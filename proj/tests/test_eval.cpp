#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fregrad/config.hpp"
#include "fregrad/diffusion.hpp"
#include "fregrad/eval.hpp"
#include "oracles.hpp"

#include <chrono>
#include <numbers>
#include <sstream>
#include <thread>

using namespace fregrad;
using namespace fregrad::eval;

namespace {

dsp::Waveform sine(double hz, Eigen::Index n, double amp = 0.5) {
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * hz * i / 22050);
  return {x, 22050};
}

dsp::Waveform noisy_tone(Eigen::Index n, Rng& rng) {
  dsp::Waveform w = sine(180, n, 0.3);
  w.samples += oracle::random_vector(n, rng, 0.05);
  return w;
}

constexpr double kMcdScale = 10.0 / std::numbers::ln10 * std::numbers::sqrt2;

}  // namespace

TEST_CASE("mae examples and loop oracle") {
  CHECK(mae(Vector{{1, 1}}, Vector{{0, 0}}) == 1.0);
  Rng rng(1);
  const Vector a = oracle::random_vector(1000, rng), b = oracle::random_vector(1200, rng);
  CHECK(mae(a, a) == 0.0);
  double acc = 0;
  for (int i = 0; i < 1000; ++i) acc += std::abs(a[i] - b[i]);
  CHECK(std::abs(mae(a, b) - acc / 1000) < 1e-12);
  CHECK(mae(a, b) == mae(b, a));
  CHECK_THROWS_AS(mae(Vector(0), a), InvalidArgument);
}

TEST_CASE("mr_stft_error is zero on identical input and symmetric") {
  Rng rng(2);
  const Vector a = oracle::random_vector(4000, rng), b = oracle::random_vector(4000, rng);
  CHECK(mr_stft_error(a, a) == 0.0);
  CHECK(mr_stft_error(a, b) == doctest::Approx(mr_stft_error(b, a)).epsilon(1e-14));
  CHECK(std::abs(mr_stft_error(a, b) - oracle::log_mag_l1(a, b, oracle::kLossResolutions)) < 1e-10);
  CHECK_THROWS_AS(mr_stft_error(a.head(100), b.head(100)), InvalidArgument);
}

TEST_CASE("mel cepstrum is an orthonormal DCT-II") {
  Rng rng(3);
  const Matrix m = oracle::random_matrix(3, 80, rng);
  const Matrix c = mel_cepstrum(m);
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 80; ++k) {
      double acc = 0;
      for (int n = 0; n < 80; ++n) acc += m(r, n) * std::cos(std::numbers::pi * k * (n + 0.5) / 80);
      acc *= std::sqrt((k == 0 ? 1.0 : 2.0) / 80);
      CHECK(std::abs(c(r, k) - acc) < 1e-12);
    }
    CHECK(c.row(r).norm() == doctest::Approx(m.row(r).norm()).epsilon(1e-12));
  }
}

TEST_CASE("mcd known offset on the first coefficient") {
  Rng rng(4);
  const Matrix cx = oracle::random_matrix(7, 80, rng);
  Matrix cy = cx;
  const double delta = 0.37;
  cy.col(1).array() += delta;
  CHECK(mcd_from_cepstra(cx, cy) == doctest::Approx(kMcdScale * delta).epsilon(1e-12));
  cy.col(0).array() += 5.0;
  cy.col(20).array() += 5.0;
  CHECK(mcd_from_cepstra(cx, cy) == doctest::Approx(kMcdScale * delta).epsilon(1e-12));

  // Same offset planted in the log-mel domain through the first cosine basis vector.
  Matrix log_mel = oracle::random_matrix(5, 80, rng);
  Matrix shifted = log_mel;
  for (int n = 0; n < 80; ++n) shifted.col(n).array() += delta * std::sqrt(2.0 / 80) * std::cos(std::numbers::pi * (n + 0.5) / 80);
  CHECK(mcd_from_cepstra(mel_cepstrum(log_mel), mel_cepstrum(shifted)) == doctest::Approx(kMcdScale * delta).epsilon(1e-10));
}

TEST_CASE("mcd13 is zero on identical input and ignores gain") {
  Rng rng(5);
  const dsp::Waveform x = noisy_tone(8192, rng);
  CHECK(mcd13(x, x) == 0.0);
  dsp::Waveform louder = x;
  louder.samples *= 2.0;
  CHECK(mcd13(x, louder) < 1e-9);
  const dsp::Waveform other = noisy_tone(8192, rng);
  CHECK(mcd13(x, other) > 0);
  CHECK(mcd13(x, other) == doctest::Approx(mcd13(other, x)).epsilon(1e-12));
}

TEST_CASE("f0 of synthetic tones") {
  const dsp::Waveform a = sine(100, 22050), b = sine(110, 22050);
  const auto same = rmse_f0(a, a);
  REQUIRE(same.has_value());
  CHECK(*same == 0.0);
  const auto diff = rmse_f0(a, b);
  REQUIRE(diff.has_value());
  CHECK(*diff == doctest::Approx(10.0).epsilon(0.1));
  CHECK(std::abs(*diff - 10.0) <= 1.0);
  CHECK(*rmse_f0(b, a) == doctest::Approx(*diff));

  const Vector f = track_f0(sine(200, 22050));
  CHECK(f.size() > 0);
  CHECK(std::abs(f[f.size() / 2] - 200.0) < 2.0);

  const dsp::Waveform silence{Vector::Zero(22050), 22050};
  CHECK_FALSE(rmse_f0(silence, silence).has_value());
  CHECK(track_f0(silence).isZero(0));
}

TEST_CASE("evaluate_pair on identical input") {
  Rng rng(6);
  const dsp::Waveform x = noisy_tone(16384, rng);
  const MetricReport r = evaluate_pair(x, x);
  CHECK(r.mae == 0.0);
  CHECK(r.mr_stft == 0.0);
  CHECK(r.mcd13 == 0.0);
  REQUIRE(r.rmse_f0.has_value());
  CHECK(*r.rmse_f0 == 0.0);
  CHECK_FALSE(r.rtf.has_value());
}

TEST_CASE("metrics CSV") {
  MetricReport a{"a.wav", 1, 2, 3, 4.0, {}};
  MetricReport b{"b.wav", 3, 4, 5, {}, 0.25};
  const MetricReport m = mean_report({a, b});
  CHECK(m.mae == 2);
  CHECK(m.mr_stft == 3);
  CHECK(*m.rmse_f0 == 4.0);
  CHECK(*m.rtf == 0.25);

  std::ostringstream out;
  write_csv(out, {a, b});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "name,mae,mr_stft,mcd13,rmse_f0,rtf");
  std::getline(in, line);
  CHECK(line.starts_with("a.wav,1,2,3,4,"));
  CHECK(line.ends_with("nan"));
  std::getline(in, line);
  CHECK(line.find(",nan,") != std::string::npos);
}

TEST_CASE("rtf of a sleeping stub") {
  const RtfMeasurement m =
      measure_rtf([] { std::this_thread::sleep_for(std::chrono::milliseconds(500)); }, 1.0, 3, false);
  CHECK(m.run_seconds.size() == 3);
  CHECK(m.rtf == doctest::Approx(0.5).epsilon(0.1));
  CHECK_FALSE(m.hardware.empty());
  CHECK(m.hardware == hardware_descriptor());
  CHECK_THROWS_AS(measure_rtf([] {}, 0.0), InvalidArgument);
}

TEST_CASE("rtf drops when the number of reverse steps is halved") {
  const model::Denoiser m(config::toy_config().model, 7);
  Rng rng(7);
  const dsp::Waveform audio = noisy_tone(4096, rng);
  const dsp::MelSpectrogram mel = dsp::mel_spectrogram(audio);
  const prior::PriorVariance p = prior::build_prior(mel, mel.frame_count() * 128);
  const auto rtf_for = [&](int steps) {
    schedule::ScheduleConfig cfg;
    cfg.steps = steps;
    const schedule::NoiseSchedule s(cfg);
    return measure_rtf([&] {
             Rng r(1);
             diffusion::sample(m, mel, s, p, r);
           },
           audio.duration())
        .rtf;
  };
  const double full = rtf_for(50), half = rtf_for(25);
  MESSAGE("rtf T=50 " << full << ", T=25 " << half);
  CHECK(half < full);
}
