#include "fregrad/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace fregrad::config {

using nlohmann::json;

namespace {

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    const auto it = object_.find(key);
    if (it == object_.end()) return;
    try {
      target = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + child(key) + "' has the wrong type");
    }
  }

  Section section(const char* key) {
    seen_.insert(key);
    const auto it = object_.find(key);
    static const json empty = json::object();
    return Section(it == object_.end() ? empty : *it, child(key));
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    const auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + child(key.c_str()) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "config section '" + path_ + "'"; }

  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

json resolutions_json(const loss::MagLossConfig& mag) {
  json out = json::array();
  for (const auto& r : mag.resolutions) out.push_back({r.fft_size, r.window_size, r.hop_size});
  return out;
}

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out[prefix] = j;
  }
}

}  // namespace

model::ModelConfig RunConfig::model_config() const {
  model::ModelConfig m = model;
  m.freq_dconv = ablations.freq_dconv;
  m.mel_bins = mel.n_mels;
  return m;
}

schedule::ScheduleConfig RunConfig::schedule_config() const {
  schedule::ScheduleConfig s = schedule;
  s.zero_snr = ablations.zero_snr;
  return s;
}

prior::PriorConfig RunConfig::prior_config() const {
  prior::PriorConfig p = prior;
  p.separate = ablations.separate_prior;
  return p;
}

double RunConfig::effective_lambda() const { return ablations.mag_loss ? lambda : 0.0; }

void RunConfig::validate() const {
  model_config().validate();
  const auto require_config = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };
  require_config(schedule.steps >= 1, "schedule.steps must be >= 1");
  require_config(schedule.tau > 0.0, "schedule.tau must be > 0 (it prevents division by zero when sampling)");
  require_config(0.0 < schedule.beta_start && schedule.beta_start <= schedule.beta_end && schedule.beta_end < 1.0,
                 "schedule betas must satisfy 0 < beta_start <= beta_end < 1");
  require_config(lambda >= 0.0, "loss.lambda must be >= 0");
  require_config(!mag.resolutions.empty(), "loss.resolutions must not be empty");
  for (const auto& r : mag.resolutions) {
    require_config(r.fft_size > 0 && r.window_size > 0 && r.hop_size > 0 && r.window_size <= r.fft_size &&
                       r.hop_size <= r.window_size,
                   "loss.resolutions entries need 0 < hop <= window <= fft");
  }
  require_config(mel.n_mels == 80, "mel.n_mels must be 80");
  require_config(mel.hop_length == 2 * model.upsample_factor(),
                 "mel.hop_length must equal twice the model upsampling factor");
  require_config(prior.sigma_min > 0.0 && prior.sigma_min <= 1.0, "prior.sigma_min must lie in (0, 1]");
  require_config(optimizer.learning_rate > 0.0 && optimizer.batch_size >= 1, "optimizer settings out of range");
  require_config(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0,
                 "optimizer betas must lie in [0, 1)");
  require_config(data.sample_rate > 0, "data.sample_rate must be positive");
  require_config(data.segment_length > 0 && data.segment_length % (2 * mel.hop_length) == 0,
                 "data.segment_length must be a positive multiple of " + std::to_string(2 * mel.hop_length));
  require_config(train.steps >= 0 && train.checkpoint_every >= 1, "train settings out of range");
}

RunConfig toy_config() {
  RunConfig c;
  c.model.n_blocks = 4;
  c.model.hidden = 8;
  c.model.embed_dim = 16;
  c.model.embed_hidden = 32;
  c.optimizer.batch_size = 1;
  c.optimizer.learning_rate = 2e-3;
  c.train.steps = 500;
  c.train.checkpoint_every = 100;
  return c;
}

std::string to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["model"] = {{"n_blocks", c.model.n_blocks},
                {"dilation_cycle", c.model.dilation_cycle},
                {"hidden", c.model.hidden},
                {"embed_dim", c.model.embed_dim},
                {"embed_hidden", c.model.embed_hidden},
                {"kernel_size", c.model.kernel_size},
                {"upsample_strides", c.model.upsample_strides}};
  j["schedule"] = {{"steps", c.schedule.steps},
                   {"beta_start", c.schedule.beta_start},
                   {"beta_end", c.schedule.beta_end},
                   {"tau", c.schedule.tau}};
  j["loss"] = {{"lambda", c.lambda}, {"resolutions", resolutions_json(c.mag)}, {"log_floor", c.mag.log_floor}};
  j["prior"] = {{"sigma_min", c.prior.sigma_min}, {"split_bin", c.prior.split_bin}};
  j["mel"] = {{"fft_size", c.mel.fft_size},     {"window_size", c.mel.window_size}, {"hop_length", c.mel.hop_length},
              {"n_mels", c.mel.n_mels},         {"fmin", c.mel.fmin},               {"fmax", c.mel.fmax},
              {"log_floor", c.mel.log_floor}};
  j["optimizer"] = {{"learning_rate", c.optimizer.learning_rate},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon},
                    {"batch_size", c.optimizer.batch_size}};
  j["data"] = {{"paths", c.data.paths},
               {"segment_length", c.data.segment_length},
               {"sample_rate", c.data.sample_rate}};
  j["train"] = {{"steps", c.train.steps}, {"checkpoint_every", c.train.checkpoint_every}};
  j["ablations"] = {{"freq_dconv", c.ablations.freq_dconv},
                    {"separate_prior", c.ablations.separate_prior},
                    {"zero_snr", c.ablations.zero_snr},
                    {"mag_loss", c.ablations.mag_loss}};
  return j.dump(2);
}

RunConfig from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(j, "");
  root.read("seed", c.seed);

  Section m = root.section("model");
  m.read("n_blocks", c.model.n_blocks);
  m.read("dilation_cycle", c.model.dilation_cycle);
  m.read("hidden", c.model.hidden);
  m.read("embed_dim", c.model.embed_dim);
  m.read("embed_hidden", c.model.embed_hidden);
  m.read("kernel_size", c.model.kernel_size);
  m.read("upsample_strides", c.model.upsample_strides);
  m.finish();

  Section s = root.section("schedule");
  s.read("steps", c.schedule.steps);
  s.read("beta_start", c.schedule.beta_start);
  s.read("beta_end", c.schedule.beta_end);
  s.read("tau", c.schedule.tau);
  s.finish();

  Section l = root.section("loss");
  l.read("lambda", c.lambda);
  l.read("log_floor", c.mag.log_floor);
  if (const json* res = l.raw("resolutions")) {
    if (!res->is_array()) throw ConfigError("config key 'loss.resolutions' must be an array");
    c.mag.resolutions.clear();
    for (const auto& r : *res) {
      if (!r.is_array() || r.size() != 3 || !r[0].is_number_integer() || !r[1].is_number_integer() ||
          !r[2].is_number_integer()) {
        throw ConfigError("config key 'loss.resolutions' entries must be [fft_size, window_size, hop_size]");
      }
      c.mag.resolutions.push_back({r[0].get<int>(), r[1].get<int>(), r[2].get<int>(), dsp::Window::Hann});
    }
  }
  l.finish();

  Section p = root.section("prior");
  p.read("sigma_min", c.prior.sigma_min);
  p.read("split_bin", c.prior.split_bin);
  p.finish();

  Section mel = root.section("mel");
  mel.read("fft_size", c.mel.fft_size);
  mel.read("window_size", c.mel.window_size);
  mel.read("hop_length", c.mel.hop_length);
  mel.read("n_mels", c.mel.n_mels);
  mel.read("fmin", c.mel.fmin);
  mel.read("fmax", c.mel.fmax);
  mel.read("log_floor", c.mel.log_floor);
  mel.finish();

  Section o = root.section("optimizer");
  o.read("learning_rate", c.optimizer.learning_rate);
  o.read("beta1", c.optimizer.beta1);
  o.read("beta2", c.optimizer.beta2);
  o.read("epsilon", c.optimizer.epsilon);
  o.read("batch_size", c.optimizer.batch_size);
  o.finish();

  Section d = root.section("data");
  d.read("paths", c.data.paths);
  d.read("segment_length", c.data.segment_length);
  d.read("sample_rate", c.data.sample_rate);
  d.finish();
  c.mel.sample_rate = c.data.sample_rate;

  Section t = root.section("train");
  t.read("steps", c.train.steps);
  t.read("checkpoint_every", c.train.checkpoint_every);
  t.finish();

  Section a = root.section("ablations");
  a.read("freq_dconv", c.ablations.freq_dconv);
  a.read("separate_prior", c.ablations.separate_prior);
  a.read("zero_snr", c.ablations.zero_snr);
  a.read("mag_loss", c.ablations.mag_loss);
  a.finish();

  root.finish();
  return c;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return from_json(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << to_json(config) << '\n';
}

std::vector<std::string> differing_fields(const RunConfig& a, const RunConfig& b) {
  std::map<std::string, json> fa, fb;
  flatten(json::parse(to_json(a)), "", fa);
  flatten(json::parse(to_json(b)), "", fb);
  std::vector<std::string> out;
  for (const auto& [key, value] : fa) {
    const auto it = fb.find(key);
    if (it == fb.end() || it->second != value) out.push_back(key);
  }
  for (const auto& [key, value] : fb) {
    if (!fa.count(key)) out.push_back(key);
  }
  return out;
}

}  // namespace fregrad::config
