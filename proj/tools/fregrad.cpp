// fregrad: train / sample / evaluate / schedule-inspect.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include "fregrad/checkpoint.hpp"
#include "fregrad/config.hpp"
#include "fregrad/diffusion.hpp"
#include "fregrad/eval.hpp"
#include "fregrad/prior.hpp"
#include "fregrad/schedule.hpp"
#include "fregrad/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using namespace fregrad;

namespace {

struct UsageError : config::ConfigError {
  using config::ConfigError::ConfigError;
};

config::RunConfig load_or_default(const std::string& path) {
  return path.empty() ? config::RunConfig{} : config::load(path);
}

int cmd_train(const std::string& config_path, const std::string& out, std::optional<long> steps,
              std::optional<std::uint64_t> seed, const std::string& resume) {
  config::RunConfig cfg = config::load(config_path);
  if (seed) cfg.seed = *seed;
  if (steps) cfg.train.steps = *steps;
  cfg.validate();
  auto clips = train::load_dataset(cfg.data.paths, cfg.data.sample_rate);
  train::Trainer trainer(cfg, std::move(clips));
  if (!resume.empty()) {
    trainer.resume(checkpoint::load(resume));
    std::cout << "resumed " << resume << " at step " << trainer.completed_steps() << '\n';
  }
  std::cout << "parameters: " << trainer.model().parameter_count() << '\n';
  train::RunOptions options;
  options.out_dir = out;
  options.steps = cfg.train.steps;
  options.on_step = [](const train::LogRow& row) {
    if (row.step == 1 || row.step % 50 == 0) {
      std::cout << "step " << row.step << " loss " << std::setprecision(6) << row.total << '\n' << std::flush;
    }
  };
  train::run(trainer, options);
  std::cout << "wrote " << (fs::path(out) / "last.ckpt").string() << '\n';
  return 0;
}

dsp::MelSpectrogram load_mel_input(const fs::path& path, const config::RunConfig& cfg) {
  dsp::MelConfig mel = cfg.mel;
  mel.sample_rate = cfg.data.sample_rate;
  if (path.extension() == ".wav") {
    const dsp::Waveform w = dsp::read_wav(path);
    if (w.sample_rate != mel.sample_rate) {
      throw InvalidArgument(path.string() + ": sample rate " + std::to_string(w.sample_rate) + " differs from " +
                            std::to_string(mel.sample_rate));
    }
    return dsp::mel_spectrogram(w, mel);
  }
  dsp::MelSpectrogram m;
  m.frames = dsp::read_matrix(path);
  m.hop_length = mel.hop_length;
  m.sample_rate = mel.sample_rate;
  if (m.frames.cols() != mel.n_mels || m.frames.rows() == 0) {
    throw FormatError(path.string() + ": expected an N x " + std::to_string(mel.n_mels) + " mel matrix");
  }
  return m;
}

int cmd_sample(const std::string& ckpt_path, const std::vector<std::string>& inputs, const std::string& out,
               std::uint64_t seed, std::optional<int> steps, const std::string& config_path,
               const std::string& dump_dir) {
  const checkpoint::Checkpoint ckpt = checkpoint::load(ckpt_path);
  if (!config_path.empty()) {
    const config::RunConfig expected = config::load(config_path);
    std::vector<std::string> fields;
    for (const auto& f : config::differing_fields(ckpt.config, expected)) {
      // Data, run length and optimizer settings do not affect synthesis.
      if (f.rfind("data.", 0) && f.rfind("train.", 0) && f.rfind("optimizer.", 0) && f != "seed") fields.push_back(f);
    }
    if (!fields.empty()) {
      std::string list;
      for (const auto& f : fields) list += (list.empty() ? "" : ", ") + f;
      throw config::ConfigError("checkpoint " + ckpt_path + " does not match " + config_path + ": " + list);
    }
  }
  const model::Denoiser model = checkpoint::load_model(ckpt);
  schedule::ScheduleConfig sc = ckpt.config.schedule_config();
  if (steps) sc.steps = *steps;
  if (sc.steps < 1) throw UsageError("--steps must be >= 1");
  const schedule::NoiseSchedule schedule(sc);
  const prior::PriorConfig pc = ckpt.config.prior_config();

  fs::create_directories(out);
  if (!dump_dir.empty()) fs::create_directories(dump_dir);
  for (const auto& input : inputs) {
    const fs::path in(input);
    const dsp::MelSpectrogram mel = load_mel_input(in, ckpt.config);
    const Eigen::Index sub = mel.frame_count() * mel.hop_length / 2;
    const prior::PriorVariance prior = prior::build_prior(mel, sub, pc);
    dsp::Waveform audio;
    const double seconds = static_cast<double>(2 * sub) / mel.sample_rate;
    diffusion::SampleOptions options;
    if (!dump_dir.empty()) {
      // x_t as a 2 x L/2 FGR1 matrix per step, for debugging the reverse chain.
      options.on_step = [&](int t, const diffusion::WaveletPair& x) {
        char name[32];
        std::snprintf(name, sizeof name, "_t%03d.fgr1", t);
        dsp::write_matrix(fs::path(dump_dir) / (in.stem().string() + name), diffusion::stack(x));
      };
    }
    const auto timing = eval::measure_rtf(
        [&] {
          Rng rng(seed);
          audio = diffusion::sample(model, mel, schedule, prior, rng, options);
        },
        seconds, 1, false);
    const fs::path target = fs::path(out) / (in.stem().string() + ".wav");
    dsp::write_wav(target, audio);
    std::cout << target.string() << ": " << audio.size() << " samples, rtf " << std::setprecision(4) << timing.rtf
              << " (" << timing.hardware << ")\n";
  }
  return 0;
}

std::map<std::string, fs::path> wav_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (f.is_regular_file() && f.path().extension() == ".wav") out[f.path().filename().string()] = f.path();
  }
  return out;
}

int cmd_evaluate(const std::string& ref_dir, const std::string& gen_dir, const std::string& out) {
  const auto refs = wav_files(ref_dir);
  const auto gens = wav_files(gen_dir);
  std::vector<std::string> unmatched;
  for (const auto& [name, path] : refs) {
    if (!gens.count(name)) unmatched.push_back(name + " (missing from " + gen_dir + ")");
  }
  for (const auto& [name, path] : gens) {
    if (!refs.count(name)) unmatched.push_back(name + " (missing from " + ref_dir + ")");
  }
  if (!unmatched.empty()) {
    std::string list;
    for (const auto& u : unmatched) list += "\n  " + u;
    throw IoError("unmatched files:" + list);
  }
  if (refs.empty()) throw IoError("no .wav files in " + ref_dir);

  std::vector<eval::MetricReport> rows;
  for (const auto& [name, path] : refs) {
    eval::MetricReport r = eval::evaluate_pair(dsp::read_wav(path), dsp::read_wav(gens.at(name)));
    r.name = name;
    rows.push_back(std::move(r));
  }
  rows.push_back(eval::mean_report(rows));
  if (out.empty()) {
    eval::write_csv(std::cout, rows);
  } else {
    std::ofstream f(out);
    if (!f) throw IoError("cannot create " + out);
    eval::write_csv(f, rows);
    std::cout << "wrote " << out << '\n';
  }
  return 0;
}

int cmd_schedule_inspect(const std::string& config_path, std::optional<int> steps, std::optional<double> tau,
                         const std::string& out) {
  config::RunConfig cfg = load_or_default(config_path);
  if (steps) cfg.schedule.steps = *steps;
  if (tau) cfg.schedule.tau = *tau;
  cfg.validate();
  const schedule::NoiseSchedule s(cfg.schedule_config());
  if (out.empty()) {
    s.write_csv(std::cout);
  } else {
    std::ofstream f(out);
    if (!f) throw IoError("cannot create " + out);
    s.write_csv(f);
  }
  const Eigen::Index last = s.steps() - 1;
  const double before = static_cast<double>(s.gamma()[last] / (1 - s.gamma()[last]));
  const double g_new = static_cast<double>(s.sqrt_gamma_rescaled()[last] * s.sqrt_gamma_rescaled()[last]);
  const double after = g_new / (1 - g_new);
  std::ostream& summary = out.empty() ? std::cerr : std::cout;
  summary << std::setprecision(6) << "terminal SNR before rescale: " << before << '\n'
          << "terminal SNR after rescale:  " << after << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FreGrad wavelet-domain diffusion vocoder"};
  app.require_subcommand(1);

  std::string config_path, out, ckpt;
  std::optional<std::uint64_t> seed;
  std::optional<long> train_steps;
  std::optional<int> steps;
  std::optional<double> tau;
  std::vector<std::string> inputs;
  std::string ref_dir, gen_dir;
  std::string train_out = "run", sample_out = "samples";

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path, "run configuration (JSON)")->required();
  train->add_option("--out", train_out, "output directory for loss.csv and checkpoints")->default_val("run");
  train->add_option("--steps", train_steps, "total training steps (overrides train.steps)");
  train->add_option("--seed", seed, "seed (overrides the config)");
  train->add_option("--ckpt", ckpt, "checkpoint to resume from");

  auto* sample = app.add_subcommand("sample", "synthesize WAVs from mel matrices or reference WAVs");
  sample->add_option("--ckpt", ckpt, "trained checkpoint")->required();
  sample->add_option("inputs", inputs, ".wav files or FGR1 mel matrices (N x 80)")->required();
  sample->add_option("--out", sample_out, "output directory")->default_val("samples");
  std::uint64_t sample_seed = 0;
  sample->add_option("--seed", sample_seed, "sampling seed")->default_val(0);
  sample->add_option("--steps", steps, "number of reverse steps (schedule rebuilt from the config bounds)");
  sample->add_option("--config", config_path, "configuration the checkpoint must match");
  std::string dump_dir;
  sample->add_option("--dump-steps", dump_dir, "write every intermediate x_t to this directory");

  auto* evaluate = app.add_subcommand("evaluate", "compare generated WAVs against references");
  evaluate->add_option("ref_dir", ref_dir, "reference directory")->required();
  evaluate->add_option("gen_dir", gen_dir, "generated directory")->required();
  evaluate->add_option("--out", out, "metrics CSV (stdout when omitted)");

  auto* inspect = app.add_subcommand("schedule-inspect", "print the noise schedule as CSV");
  inspect->add_option("--config", config_path, "run configuration (defaults when omitted)");
  inspect->add_option("--steps", steps, "number of steps T");
  inspect->add_option("--tau", tau, "terminal noise floor");
  inspect->add_option("--out", out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(config_path, train_out, train_steps, seed, ckpt);
    if (*sample) return cmd_sample(ckpt, inputs, sample_out, sample_seed, steps, config_path, dump_dir);
    if (*evaluate) return cmd_evaluate(ref_dir, gen_dir, out);
    if (*inspect) return cmd_schedule_inspect(config_path, steps, tau, out);
  } catch (const config::ConfigError& e) {
    std::cerr << "fregrad: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fregrad: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
