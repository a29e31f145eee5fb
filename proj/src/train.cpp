#include "fregrad/train.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fregrad::train {

namespace {

constexpr int kAlignment = 512;  // DWT halves, then the mel hop must divide the sub-band

std::vector<checkpoint::Record> moment_records(const model::Denoiser& model, const std::vector<Matrix>& moments) {
  std::vector<checkpoint::Record> out;
  const auto& params = model.parameters();
  for (std::size_t i = 0; i < moments.size(); ++i) out.push_back({params[i].name, params[i].tensor.shape(), moments[i]});
  return out;
}

std::vector<Matrix> moment_values(const model::Denoiser& model, const std::vector<checkpoint::Record>& records,
                                  const char* which) {
  const auto& params = model.parameters();
  if (!records.empty() && records.size() != params.size()) {
    throw FormatError(std::string("checkpoint ") + which + " moments do not match the model");
  }
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].name != params[i].name || records[i].value.rows() != params[i].tensor.rows() ||
        records[i].value.cols() != params[i].tensor.cols()) {
      throw FormatError(std::string("checkpoint ") + which + " moment '" + records[i].name + "' does not match");
    }
    out.push_back(records[i].value);
  }
  return out;
}

}  // namespace

std::vector<dsp::Waveform> load_dataset(const std::vector<std::string>& paths, int sample_rate) {
  std::vector<std::filesystem::path> files;
  for (const std::string& entry : paths) {
    const std::filesystem::path p(entry);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& f : std::filesystem::directory_iterator(p)) {
        if (f.is_regular_file() && f.path().extension() == ".wav") found.push_back(f.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (std::filesystem::exists(p)) {
      files.push_back(p);
    } else {
      throw config::ConfigError("dataset path does not exist: " + entry);
    }
  }
  if (files.empty()) throw config::ConfigError("dataset is empty: no .wav files under data.paths");

  std::vector<dsp::Waveform> clips;
  for (const auto& f : files) {
    dsp::Waveform w = dsp::read_wav(f);
    if (w.sample_rate != sample_rate) {
      throw InvalidArgument(f.string() + ": sample rate " + std::to_string(w.sample_rate) + " differs from " +
                            std::to_string(sample_rate));
    }
    if (w.size() < kAlignment) {
      throw InvalidArgument(f.string() + ": clip shorter than " + std::to_string(kAlignment) + " samples");
    }
    clips.push_back(std::move(w));
  }
  return clips;
}

void Adam::step(const std::vector<model::NamedParameter>& parameters) {
  if (m_.empty()) {
    for (const auto& p : parameters) {
      m_.push_back(Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
      v_.push_back(Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
    }
  }
  require(m_.size() == parameters.size(), "Adam: parameter list changed");
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const auto lr = static_cast<Real>(config_.learning_rate);
  const auto eps = static_cast<Real>(config_.epsilon);
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    ag::Tensor p = parameters[i].tensor;
    const Matrix g = p.grad();
    m_[i] = Real(b1) * m_[i] + Real(1 - b1) * g;
    v_[i] = Real(b2) * v_[i] + Real(1 - b2) * g.cwiseAbs2();
    const Matrix m_hat = m_[i] / Real(c1);
    const Matrix v_hat = v_[i] / Real(c2);
    p.mutable_value().array() -= lr * m_hat.array() / (v_hat.array().sqrt() + eps);
  }
}

void Adam::set_state(long step, std::vector<Matrix> m, std::vector<Matrix> v) {
  require(m.size() == v.size(), "Adam: moment lists differ in size");
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

void write_log_row(std::ostream& out, const LogRow& row) {
  out << row.step << std::setprecision(17) << ',' << row.terms.diff_low << ',' << row.terms.diff_high << ','
      << row.terms.mag_low << ',' << row.terms.mag_high << ',' << row.total << '\n';
}

Trainer::Trainer(const config::RunConfig& config, std::vector<dsp::Waveform> clips)
    : config_(config),
      clips_(std::move(clips)),
      model_(config.model_config(), config.seed),
      schedule_(config.schedule_config()),
      adam_(config.optimizer),
      rng_(config.seed + 1) {
  config_.validate();
  if (clips_.empty()) throw config::ConfigError("training needs at least one clip");
  for (const auto& c : clips_) require(c.size() >= kAlignment, "training clip shorter than 512 samples");
}

void Trainer::resume(const checkpoint::Checkpoint& ckpt) {
  const auto diff = config::differing_fields(ckpt.config, config_);
  for (const auto& field : diff) {
    // Run length, data and checkpoint cadence may change between sessions.
    if (field.rfind("train.", 0) != 0 && field.rfind("data.", 0) != 0) {
      throw config::ConfigError("checkpoint configuration differs in '" + field + "'");
    }
  }
  checkpoint::restore_parameters(model_, ckpt.parameters);
  adam_.set_state(ckpt.optimizer_step, moment_values(model_, ckpt.first_moments, "first"),
                  moment_values(model_, ckpt.second_moments, "second"));
  rng_.set_state(ckpt.rng_state);
  step_ = ckpt.step;
}

diffusion::TrainExample Trainer::draw_example() {
  const auto& clip = clips_[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(clips_.size()) - 1))];
  const Eigen::Index usable = clip.size() / kAlignment * kAlignment;
  const Eigen::Index segment = std::min<Eigen::Index>(config_.data.segment_length, usable);
  const Eigen::Index offset = rng_.uniform_int(0, clip.size() - segment);
  diffusion::TrainExample ex;
  ex.audio = {clip.samples.segment(offset, segment), clip.sample_rate};
  dsp::MelConfig mel = config_.mel;
  mel.sample_rate = clip.sample_rate;
  ex.mel = dsp::mel_spectrogram(ex.audio, mel);
  return ex;
}

LogRow Trainer::step() {
  std::vector<diffusion::TrainExample> batch;
  for (int i = 0; i < config_.optimizer.batch_size; ++i) batch.push_back(draw_example());
  diffusion::TrainOptions options;
  options.lambda = config_.effective_lambda();
  options.prior = config_.prior_config();
  options.mag = config_.mag;
  const auto result = diffusion::train_step(model_, batch, schedule_, options, rng_);
  adam_.step(model_.parameters());
  ++step_;
  return {step_, result.terms, result.loss};
}

checkpoint::Checkpoint Trainer::snapshot() const {
  checkpoint::Checkpoint c;
  c.config = config_;
  c.step = step_;
  c.parameters = checkpoint::parameter_records(model_);
  c.optimizer_step = adam_.steps();
  c.first_moments = moment_records(model_, adam_.first_moments());
  c.second_moments = moment_records(model_, adam_.second_moments());
  c.rng_state = rng_.state();
  return c;
}

void run(Trainer& trainer, const RunOptions& options) {
  std::filesystem::create_directories(options.out_dir);
  const auto log_path = options.out_dir / "loss.csv";
  const bool fresh = trainer.completed_steps() == 0 || !std::filesystem::exists(log_path);
  std::ofstream log(log_path, fresh ? std::ios::trunc : std::ios::app);
  if (!log) throw IoError("cannot open loss log " + log_path.string());
  if (fresh) log << kLossLogHeader << '\n' << std::flush;

  const long every = trainer.config().train.checkpoint_every;
  while (trainer.completed_steps() < options.steps) {
    const LogRow row = trainer.step();
    write_log_row(log, row);
    log.flush();
    if (options.on_step) options.on_step(row);
    if (row.step % every == 0) {
      std::ostringstream name;
      name << "step_" << std::setw(7) << std::setfill('0') << row.step << ".ckpt";
      checkpoint::save(options.out_dir / name.str(), trainer.snapshot());
    }
  }
  checkpoint::save(options.out_dir / "last.ckpt", trainer.snapshot());
}

}  // namespace fregrad::train
