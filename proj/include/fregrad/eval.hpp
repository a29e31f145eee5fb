#pragma once

#include "fregrad/dsp.hpp"
#include "fregrad/loss.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fregrad::eval {

/// Mean absolute difference over the common prefix of x and y.
double mae(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

/// Multi-resolution log-magnitude STFT distance on waveforms (common prefix).
double mr_stft_error(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                     const loss::MagLossConfig& config = {});

/// Orthonormal DCT-II of every row of a log-mel matrix (N x bins).
Matrix mel_cepstrum(const Eigen::Ref<const Matrix>& log_mel);

/// Frame-mean of (10 / ln 10) * sqrt(2) * ||c_x - c_y|| over coefficients 1..order.
double mcd_from_cepstra(const Eigen::Ref<const Matrix>& cx, const Eigen::Ref<const Matrix>& cy, int order = 13);

/// MCD over coefficients 1..13 from the mel front end, frame-aligned, no DTW.
double mcd13(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::MelConfig& config = {});

struct PitchConfig {
  double fmin = 70.0;
  double fmax = 400.0;
  int frame_length = 1024;
  int hop_length = 256;
  double voicing_threshold = 0.45;
};

/// Per-frame f0 in Hz from the normalized autocorrelation; 0 marks unvoiced frames.
Vector track_f0(const dsp::Waveform& x, const PitchConfig& config = {});

/// RMSE of f0 over frames voiced in both signals; nullopt when no frame is.
std::optional<double> rmse_f0(const dsp::Waveform& x, const dsp::Waveform& y, const PitchConfig& config = {});

struct MetricReport {
  std::string name;
  double mae = 0;
  double mr_stft = 0;
  double mcd13 = 0;
  std::optional<double> rmse_f0;
  std::optional<double> rtf;
};

MetricReport evaluate_pair(const dsp::Waveform& reference, const dsp::Waveform& generated);

/// Column-wise mean; optional columns average their defined entries.
MetricReport mean_report(const std::vector<MetricReport>& rows);

/// Header: name,mae,mr_stft,mcd13,rmse_f0,rtf; undefined values print as "nan".
void write_csv(std::ostream& out, const std::vector<MetricReport>& rows);

struct RtfMeasurement {
  double rtf = 0;  // median over runs of wall time / audio duration
  std::vector<double> run_seconds;
  std::string hardware;
};

/// Description of the host CPU used for timing reports.
std::string hardware_descriptor();

/// Times `run` `runs` times (after one warm-up call when `warmup`).
RtfMeasurement measure_rtf(const std::function<void()>& run, double audio_seconds, int runs = 3,
                           bool warmup = true);

}  // namespace fregrad::eval
