#include "fregrad/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

namespace fregrad::eval {

namespace {

Eigen::Index common_length(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  const Eigen::Index n = std::min(x.size(), y.size());
  require(n > 0, "metric: empty input");
  return n;
}

Matrix dct_matrix(Eigen::Index n) {
  Matrix d(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double s = m == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (Eigen::Index k = 0; k < n; ++k) {
      d(m, k) = static_cast<Real>(s * std::cos(std::numbers::pi * m * (k + 0.5) / n));
    }
  }
  return d;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double mae(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  const Eigen::Index n = common_length(x, y);
  return static_cast<double>((x.head(n) - y.head(n)).cwiseAbs().mean());
}

double mr_stft_error(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                     const loss::MagLossConfig& config) {
  const Eigen::Index n = common_length(x, y);
  return loss::mag_loss_value(x.head(n), y.head(n), config);
}

Matrix mel_cepstrum(const Eigen::Ref<const Matrix>& log_mel) {
  require(log_mel.cols() > 0, "mel_cepstrum: no bins");
  return log_mel * dct_matrix(log_mel.cols()).transpose();
}

double mcd_from_cepstra(const Eigen::Ref<const Matrix>& cx, const Eigen::Ref<const Matrix>& cy, int order) {
  require(cx.cols() == cy.cols() && cx.cols() > order, "mcd: not enough cepstral coefficients");
  const Eigen::Index frames = std::min(cx.rows(), cy.rows());
  require(frames > 0, "mcd: no frames");
  const double k = 10.0 / std::log(10.0) * std::sqrt(2.0);
  const Matrix diff = cx.topRows(frames).middleCols(1, order) - cy.topRows(frames).middleCols(1, order);
  return k * static_cast<double>(diff.rowwise().norm().mean());
}

double mcd13(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::MelConfig& config) {
  const Eigen::Index n = common_length(x.samples, y.samples);
  const auto mx = dsp::mel_spectrogram({x.samples.head(n), x.sample_rate}, config);
  const auto my = dsp::mel_spectrogram({y.samples.head(n), y.sample_rate}, config);
  return mcd_from_cepstra(mel_cepstrum(mx.frames), mel_cepstrum(my.frames), 13);
}

Vector track_f0(const dsp::Waveform& x, const PitchConfig& config) {
  const double sr = x.sample_rate;
  const auto lag_min = static_cast<Eigen::Index>(std::floor(sr / config.fmax));
  const auto lag_max = static_cast<Eigen::Index>(std::ceil(sr / config.fmin));
  require(lag_max + 2 < config.frame_length, "track_f0: frame too short for the lowest f0");
  const Eigen::Index w = config.frame_length;
  const Eigen::Index frames = x.size() < w ? 0 : (x.size() - w) / config.hop_length + 1;
  Vector f0 = Vector::Zero(frames);
  std::vector<double> r(static_cast<std::size_t>(lag_max + 2));
  for (Eigen::Index f = 0; f < frames; ++f) {
    const auto frame = x.samples.segment(f * config.hop_length, w).cast<double>().eval();
    if (frame.squaredNorm() / static_cast<double>(w) < 1e-10) continue;
    for (Eigen::Index lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      const auto a = frame.head(w - lag);
      const auto b = frame.segment(lag, w - lag);
      const double denom = std::sqrt(a.squaredNorm() * b.squaredNorm());
      r[static_cast<std::size_t>(lag)] = denom > 0 ? a.dot(b) / denom : 0.0;
    }
    double peak = -1.0;
    for (Eigen::Index lag = lag_min; lag <= lag_max; ++lag) peak = std::max(peak, r[static_cast<std::size_t>(lag)]);
    if (peak < config.voicing_threshold) continue;
    for (Eigen::Index lag = lag_min; lag <= lag_max; ++lag) {
      const double c = r[static_cast<std::size_t>(lag)];
      const double left = r[static_cast<std::size_t>(lag - 1)];
      const double right = r[static_cast<std::size_t>(lag + 1)];
      if (c >= left && c >= right && c >= 0.9 * peak && c >= config.voicing_threshold) {
        const double curvature = left - 2 * c + right;
        const double delta = curvature != 0 ? 0.5 * (left - right) / curvature : 0.0;
        f0[f] = static_cast<Real>(sr / (static_cast<double>(lag) + delta));
        break;
      }
    }
  }
  return f0;
}

std::optional<double> rmse_f0(const dsp::Waveform& x, const dsp::Waveform& y, const PitchConfig& config) {
  const Vector fx = track_f0(x, config);
  const Vector fy = track_f0(y, config);
  const Eigen::Index frames = std::min(fx.size(), fy.size());
  double acc = 0;
  Eigen::Index voiced = 0;
  for (Eigen::Index i = 0; i < frames; ++i) {
    if (fx[i] > 0 && fy[i] > 0) {
      const double d = fx[i] - fy[i];
      acc += d * d;
      ++voiced;
    }
  }
  if (voiced == 0) return std::nullopt;
  return std::sqrt(acc / static_cast<double>(voiced));
}

MetricReport evaluate_pair(const dsp::Waveform& reference, const dsp::Waveform& generated) {
  require(reference.sample_rate == generated.sample_rate, "evaluate: sample rates differ");
  MetricReport r;
  r.mae = mae(reference.samples, generated.samples);
  r.mr_stft = mr_stft_error(reference.samples, generated.samples);
  dsp::MelConfig mel;
  mel.sample_rate = reference.sample_rate;
  r.mcd13 = mcd13(reference, generated, mel);
  r.rmse_f0 = rmse_f0(reference, generated);
  return r;
}

MetricReport mean_report(const std::vector<MetricReport>& rows) {
  MetricReport m;
  m.name = "mean";
  if (rows.empty()) return m;
  double f0 = 0, rtf = 0;
  int f0_count = 0, rtf_count = 0;
  for (const auto& r : rows) {
    m.mae += r.mae;
    m.mr_stft += r.mr_stft;
    m.mcd13 += r.mcd13;
    if (r.rmse_f0) f0 += *r.rmse_f0, ++f0_count;
    if (r.rtf) rtf += *r.rtf, ++rtf_count;
  }
  const auto n = static_cast<double>(rows.size());
  m.mae /= n;
  m.mr_stft /= n;
  m.mcd13 /= n;
  if (f0_count) m.rmse_f0 = f0 / f0_count;
  if (rtf_count) m.rtf = rtf / rtf_count;
  return m;
}

void write_csv(std::ostream& out, const std::vector<MetricReport>& rows) {
  const auto opt = [](const std::optional<double>& v) {
    std::ostringstream s;
    s << std::setprecision(10);
    if (v) s << *v; else s << "nan";
    return s.str();
  };
  out << "name,mae,mr_stft,mcd13,rmse_f0,rtf\n" << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.name << ',' << r.mae << ',' << r.mr_stft << ',' << r.mcd13 << ',' << opt(r.rmse_f0) << ','
        << opt(r.rtf) << '\n';
  }
}

std::string hardware_descriptor() {
  std::string model = "unknown cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(colon + 2);
      break;
    }
  }
  return model + " (" + std::to_string(std::thread::hardware_concurrency()) + " threads)";
}

RtfMeasurement measure_rtf(const std::function<void()>& run, double audio_seconds, int runs, bool warmup) {
  require(audio_seconds > 0, "measure_rtf: audio duration must be positive");
  require(runs >= 1, "measure_rtf: need at least one run");
  if (warmup) run();
  RtfMeasurement m;
  for (int i = 0; i < runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    run();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    m.run_seconds.push_back(elapsed.count());
  }
  m.rtf = median(m.run_seconds) / audio_seconds;
  m.hardware = hardware_descriptor();
  return m;
}

}  // namespace fregrad::eval
