#include "fregrad/dsp.hpp"

#include "fregrad/binary_io.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <fstream>
#include <numbers>
#include <vector>

namespace fregrad::dsp {

void StftConfig::validate() const {
  require(fft_size > 0 && window_size > 0 && hop_size > 0, "stft: sizes must be positive");
  require(window_size <= fft_size, "stft: window_size must not exceed fft_size");
  require(hop_size <= window_size, "stft: hop_size must not exceed window_size");
}

Eigen::Index stft_frame_count(Eigen::Index length, int hop_size) {
  return (length + hop_size - 1) / hop_size;
}

Vector analysis_window(const StftConfig& config) {
  config.validate();
  Vector w = Vector::Zero(config.fft_size);
  const int offset = (config.fft_size - config.window_size) / 2;
  for (int n = 0; n < config.window_size; ++n) {
    w[offset + n] = config.window == Window::Hann
                        ? Real(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / config.window_size))
                        : Real(1);
  }
  return w;
}

Eigen::Index reflect_index(Eigen::Index i, Eigen::Index length) {
  if (length == 1) return 0;
  const Eigen::Index period = 2 * (length - 1);
  Eigen::Index m = i % period;
  if (m < 0) m += period;
  return m < length ? m : period - m;
}

ComplexMatrix stft(const Eigen::Ref<const Vector>& signal, const StftConfig& config) {
  config.validate();
  const Eigen::Index length = signal.size();
  require(length >= config.window_size && length >= 2,
          "stft: signal of " + std::to_string(length) + " samples is shorter than one window (" +
              std::to_string(config.window_size) + ")");
  const Vector window = analysis_window(config);
  const Eigen::Index frames = stft_frame_count(length, config.hop_size);
  const int n_fft = config.fft_size;
  const int bins = n_fft / 2 + 1;

  Eigen::FFT<Real> fft;
  fft.SetFlag(Eigen::FFT<Real>::HalfSpectrum);
  std::vector<Real> frame(n_fft);
  std::vector<std::complex<Real>> spectrum;
  ComplexMatrix out(frames, bins);
  for (Eigen::Index f = 0; f < frames; ++f) {
    const Eigen::Index start = f * config.hop_size - n_fft / 2;
    for (int n = 0; n < n_fft; ++n) {
      frame[n] = window[n] * signal[reflect_index(start + n, length)];
    }
    fft.fwd(spectrum, frame);
    for (int k = 0; k < bins; ++k) out(f, k) = spectrum[k];
  }
  return out;
}

Matrix stft_magnitude(const Eigen::Ref<const Vector>& signal, const StftConfig& config) {
  return stft(signal, config).cwiseAbs();
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(const MelConfig& config) {
  require(config.n_mels > 0, "mel_filterbank: n_mels must be positive");
  require(0.0 <= config.fmin && config.fmin < config.fmax &&
              config.fmax <= config.sample_rate / 2.0,
          "mel_filterbank: need 0 <= fmin < fmax <= sample_rate / 2");
  const int bins = config.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(config.fmax);
  std::vector<double> edges(config.n_mels + 2);
  for (int i = 0; i < config.n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (config.n_mels + 1));
  }
  Matrix fb = Matrix::Zero(config.n_mels, bins);
  for (int m = 0; m < config.n_mels; ++m) {
    const double lo = edges[m], centre = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * config.sample_rate / config.fft_size;
      const double w = std::min((f - lo) / (centre - lo), (hi - f) / (hi - centre));
      if (w > 0.0) fb(m, k) = static_cast<Real>(w);
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const Waveform& waveform, const MelConfig& config) {
  require(waveform.size() > 0, "mel_spectrogram: empty signal");
  const Matrix power = stft(waveform.samples, config.stft()).cwiseAbs2();
  const Matrix fb = mel_filterbank(config);
  MelSpectrogram mel;
  mel.frames = (power * fb.transpose())
                   .cwiseMax(static_cast<Real>(config.log_floor))
                   .array()
                   .log()
                   .matrix();
  mel.hop_length = config.hop_length;
  mel.sample_rate = config.sample_rate;
  return mel;
}

// ---------------------------------------------------------------------------

namespace {

struct WavFormat {
  std::uint16_t audio_format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
};

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string where = " in " + path.string();
  try {
    if (io::get_tag(in) != "RIFF") throw FormatError("missing RIFF header" + where);
    io::get<std::uint32_t>(in);
    if (io::get_tag(in) != "WAVE") throw FormatError("missing WAVE tag" + where);

    WavFormat fmt;
    bool have_fmt = false;
    while (true) {
      const std::string id = io::get_tag(in);
      const auto size = io::get<std::uint32_t>(in);
      if (id == "fmt ") {
        if (size < 16) throw FormatError("fmt chunk too small" + where);
        fmt.audio_format = io::get<std::uint16_t>(in);
        fmt.channels = io::get<std::uint16_t>(in);
        fmt.sample_rate = io::get<std::uint32_t>(in);
        io::get<std::uint32_t>(in);  // byte rate
        io::get<std::uint16_t>(in);  // block align
        fmt.bits_per_sample = io::get<std::uint16_t>(in);
        in.seekg(size - 16 + (size & 1u), std::ios::cur);
        have_fmt = true;
      } else if (id == "data") {
        if (!have_fmt) throw FormatError("data chunk before fmt chunk" + where);
        if (fmt.audio_format != 1) {
          throw UnsupportedFormat("only PCM audio is supported (format tag " +
                                  std::to_string(fmt.audio_format) + ")" + where);
        }
        if (fmt.channels != 1) {
          throw UnsupportedFormat("only mono audio is supported (" +
                                  std::to_string(fmt.channels) + " channels)" + where);
        }
        if (fmt.bits_per_sample != 16) {
          throw UnsupportedFormat("only 16-bit samples are supported (" +
                                  std::to_string(fmt.bits_per_sample) + " bits)" + where);
        }
        if (fmt.sample_rate == 0) throw FormatError("zero sample rate" + where);
        const std::uint32_t count = size / 2;
        std::vector<std::int16_t> pcm(count);
        in.read(reinterpret_cast<char*>(pcm.data()), static_cast<std::streamsize>(count) * 2);
        if (!in) throw FormatError("truncated data chunk" + where);
        Waveform wav;
        wav.sample_rate = static_cast<int>(fmt.sample_rate);
        wav.samples.resize(count);
        for (std::uint32_t i = 0; i < count; ++i) wav.samples[i] = Real(pcm[i]) / Real(32768);
        return wav;
      } else {
        in.seekg(size + (size & 1u), std::ios::cur);
      }
    }
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    if (msg.find(where) != std::string::npos) throw;
    throw FormatError(msg + where);
  }
}

void write_wav(const std::filesystem::path& path, const Waveform& waveform) {
  require(waveform.sample_rate > 0, "write_wav: sample rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  const auto count = static_cast<std::uint32_t>(waveform.size());
  const std::uint32_t data_bytes = count * 2;
  io::put_tag(out, "RIFF");
  io::put<std::uint32_t>(out, 36 + data_bytes);
  io::put_tag(out, "WAVE");
  io::put_tag(out, "fmt ");
  io::put<std::uint32_t>(out, 16);
  io::put<std::uint16_t>(out, 1);
  io::put<std::uint16_t>(out, 1);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(waveform.sample_rate));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(waveform.sample_rate) * 2);
  io::put<std::uint16_t>(out, 2);
  io::put<std::uint16_t>(out, 16);
  io::put_tag(out, "data");
  io::put<std::uint32_t>(out, data_bytes);
  for (std::uint32_t i = 0; i < count; ++i) {
    const double x = std::clamp(static_cast<double>(waveform.samples[i]), -1.0, 1.0);
    const double q = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    io::put<std::int16_t>(out, static_cast<std::int16_t>(q));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_matrix(std::ostream& out, const Eigen::Ref<const Matrix>& m) {
  io::put_tag(out, "FGR1");
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) io::put<double>(out, static_cast<double>(m(r, c)));
  }
}

Matrix read_matrix(std::istream& in) {
  if (io::get_tag(in) != "FGR1") throw FormatError("bad FGR1 magic");
  const auto rows = io::get<std::uint32_t>(in);
  const auto cols = io::get<std::uint32_t>(in);
  Matrix m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = static_cast<Real>(io::get<double>(in));
  }
  return m;
}

void write_matrix(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  write_matrix(out, m);
  if (!out) throw IoError("write failed for " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_matrix(in);
  } catch (const FormatError& e) {
    throw FormatError(std::string(e.what()) + " in " + path.string());
  }
}

}  // namespace fregrad::dsp
