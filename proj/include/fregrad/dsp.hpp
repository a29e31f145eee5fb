#pragma once

#include "fregrad/types.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace fregrad::dsp {

// ---------------------------------------------------------------------------
// Haar wavelet pair
// ---------------------------------------------------------------------------

/// Low/high sub-bands of one orthonormal Haar level. Both have length L/2.
template <typename Scalar>
struct BasicWaveletPair {
  VectorX<Scalar> low;
  VectorX<Scalar> high;

  Eigen::Index size() const { return low.size(); }
};

using WaveletPair = BasicWaveletPair<Real>;

/// One-level orthonormal Haar analysis.
///   low[k]  = (x[2k] + x[2k+1]) / sqrt(2)
///   high[k] = (x[2k] - x[2k+1]) / sqrt(2)
/// Odd lengths are rejected; callers crop or pad first.
template <typename Derived>
BasicWaveletPair<typename Derived::Scalar> haar_dwt(const Eigen::MatrixBase<Derived>& signal) {
  using Scalar = typename Derived::Scalar;
  static_assert(Derived::IsVectorAtCompileTime || Derived::ColsAtCompileTime == Eigen::Dynamic,
                "haar_dwt expects a vector expression");
  const Eigen::Index n = signal.size();
  require(n >= 2 && n % 2 == 0,
          "haar_dwt: signal length must be even and >= 2 (got " + std::to_string(n) + ")");
  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  const VectorX<Scalar> x = signal.derived().reshaped();
  const auto even = x(Eigen::seq(0, n - 2, 2));
  const auto odd = x(Eigen::seq(1, n - 1, 2));
  return {inv_sqrt2 * (even + odd), inv_sqrt2 * (even - odd)};
}

/// Inverse of haar_dwt; the output interleaves (low+high)/sqrt2, (low-high)/sqrt2.
template <typename Scalar>
VectorX<Scalar> haar_idwt(const BasicWaveletPair<Scalar>& pair) {
  require(pair.low.size() == pair.high.size(),
          "haar_idwt: sub-band lengths differ (" + std::to_string(pair.low.size()) + " vs " +
              std::to_string(pair.high.size()) + ")");
  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  const Eigen::Index half = pair.low.size();
  VectorX<Scalar> out(2 * half);
  out(Eigen::seq(0, 2 * half - 2, 2)) = inv_sqrt2 * (pair.low + pair.high);
  out(Eigen::seq(1, 2 * half - 1, 2)) = inv_sqrt2 * (pair.low - pair.high);
  return out;
}

/// Channelwise Haar analysis of a [C, L] matrix (one row per channel).
template <typename Derived>
std::pair<MatrixX<typename Derived::Scalar>, MatrixX<typename Derived::Scalar>> haar_dwt_rows(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.cols();
  require(n >= 2 && n % 2 == 0,
          "haar_dwt_rows: length must be even and >= 2 (got " + std::to_string(n) + ")");
  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  const auto even = x(Eigen::all, Eigen::seq(0, n - 2, 2));
  const auto odd = x(Eigen::all, Eigen::seq(1, n - 1, 2));
  return {inv_sqrt2 * (even + odd), inv_sqrt2 * (even - odd)};
}

template <typename DerivedLow, typename DerivedHigh>
MatrixX<typename DerivedLow::Scalar> haar_idwt_rows(const Eigen::MatrixBase<DerivedLow>& low,
                                                    const Eigen::MatrixBase<DerivedHigh>& high) {
  using Scalar = typename DerivedLow::Scalar;
  require(low.rows() == high.rows() && low.cols() == high.cols(),
          "haar_idwt_rows: sub-band shapes differ");
  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  const Eigen::Index half = low.cols();
  MatrixX<Scalar> out(low.rows(), 2 * half);
  out(Eigen::all, Eigen::seq(0, 2 * half - 2, 2)) = inv_sqrt2 * (low + high);
  out(Eigen::all, Eigen::seq(1, 2 * half - 1, 2)) = inv_sqrt2 * (low - high);
  return out;
}

// ---------------------------------------------------------------------------
// STFT
// ---------------------------------------------------------------------------

enum class Window { Hann, Rectangular };

struct StftConfig {
  int fft_size = 1024;
  int window_size = 1024;
  int hop_size = 256;
  Window window = Window::Hann;

  void validate() const;

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

/// Number of centered frames for a signal of `length` samples: ceil(length / hop).
Eigen::Index stft_frame_count(Eigen::Index length, int hop_size);

/// Analysis window of `window_size` taps zero-padded and centered in `fft_size`.
Vector analysis_window(const StftConfig& config);

/// Index into a signal of `length` samples under repeated reflection about the
/// end samples (x[-1] = x[1], x[L] = x[L-2], ...).
Eigen::Index reflect_index(Eigen::Index i, Eigen::Index length);

/// Complex one-sided spectra, one row per frame, fft_size/2 + 1 columns.
/// Frame n is centered on sample n * hop; the signal is reflect-padded.
ComplexMatrix stft(const Eigen::Ref<const Vector>& signal, const StftConfig& config);

/// |stft(signal)|, frames x (fft_size/2 + 1).
Matrix stft_magnitude(const Eigen::Ref<const Vector>& signal, const StftConfig& config);

// ---------------------------------------------------------------------------
// Mel features
// ---------------------------------------------------------------------------

struct Waveform {
  Vector samples;
  int sample_rate = 22050;

  Eigen::Index size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

struct MelConfig {
  int sample_rate = 22050;
  int fft_size = 1024;
  int window_size = 1024;
  int hop_length = 256;
  int n_mels = 80;
  double fmin = 80.0;
  double fmax = 8000.0;
  double log_floor = 1e-5;

  friend bool operator==(const MelConfig&, const MelConfig&) = default;

  StftConfig stft() const { return {fft_size, window_size, hop_length, Window::Hann}; }
};

struct MelSpectrogram {
  Matrix frames;  // N x n_mels, natural log of clamped mel power
  int hop_length = 256;
  int sample_rate = 22050;

  Eigen::Index frame_count() const { return frames.rows(); }
  Eigen::Index bins() const { return frames.cols(); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// HTK-style triangular filterbank, n_mels x (fft_size/2 + 1), unnormalized.
Matrix mel_filterbank(const MelConfig& config);

MelSpectrogram mel_spectrogram(const Waveform& waveform, const MelConfig& config = {});

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Reads 16-bit PCM mono RIFF/WAVE. Throws IoError, FormatError or UnsupportedFormat.
Waveform read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono; samples are clamped to [-1, 1].
void write_wav(const std::filesystem::path& path, const Waveform& waveform);

/// FGR1 matrix container: "FGR1", u32 rows, u32 cols, row-major f64 little-endian.
void write_matrix(std::ostream& out, const Eigen::Ref<const Matrix>& m);
Matrix read_matrix(std::istream& in);
void write_matrix(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m);
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace fregrad::dsp
