#include "fregrad/checkpoint.hpp"

#include "fregrad/binary_io.hpp"

#include <fstream>

namespace fregrad::checkpoint {

namespace {

void write_records(std::ostream& out, const std::vector<Record>& records) {
  io::put<std::uint64_t>(out, records.size());
  for (const Record& r : records) {
    io::put_string(out, r.name);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(r.shape.size()));
    for (const Eigen::Index d : r.shape) io::put<std::int64_t>(out, d);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(r.value.rows()));
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(r.value.cols()));
    for (Eigen::Index i = 0; i < r.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < r.value.cols(); ++j) io::put<double>(out, static_cast<double>(r.value(i, j)));
    }
  }
}

std::vector<Record> read_records(std::istream& in) {
  const auto count = io::get<std::uint64_t>(in);
  if (count > (1u << 20)) throw FormatError("implausible record count");
  std::vector<Record> records(count);
  for (Record& r : records) {
    r.name = io::get_string(in, 4096);
    const auto ndim = io::get<std::uint32_t>(in);
    if (ndim > 8) throw FormatError("record '" + r.name + "' has too many dimensions");
    r.shape.resize(ndim);
    for (auto& d : r.shape) d = io::get<std::int64_t>(in);
    const auto rows = io::get<std::uint32_t>(in);
    const auto cols = io::get<std::uint32_t>(in);
    if (static_cast<std::uint64_t>(rows) * cols > (1ull << 32)) throw FormatError("record '" + r.name + "' too large");
    r.value.resize(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) r.value(i, j) = static_cast<Real>(io::get<double>(in));
    }
  }
  return records;
}

}  // namespace

void write(std::ostream& out, const Checkpoint& c) {
  io::put_tag(out, "FGR1");
  io::put_tag(out, "CKPT");
  io::put<std::uint32_t>(out, kVersion);
  io::put_string(out, config::to_json(c.config));
  io::put<std::int64_t>(out, c.step);
  write_records(out, c.parameters);
  io::put<std::int64_t>(out, c.optimizer_step);
  write_records(out, c.first_moments);
  write_records(out, c.second_moments);
  io::put_string(out, c.rng_state);
}

Checkpoint read(std::istream& in) {
  if (io::get_tag(in) != "FGR1") throw FormatError("not an FGR1 file");
  if (io::get_tag(in) != "CKPT") throw FormatError("FGR1 file is not a checkpoint");
  const auto version = io::get<std::uint32_t>(in);
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.config = config::from_json(io::get_string(in));
  c.step = io::get<std::int64_t>(in);
  c.parameters = read_records(in);
  c.optimizer_step = io::get<std::int64_t>(in);
  c.first_moments = read_records(in);
  c.second_moments = read_records(in);
  c.rng_state = io::get_string(in, 1 << 20);
  return c;
}

void save(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot create checkpoint " + tmp.string());
    write(out, checkpoint);
    if (!out.flush()) throw IoError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  try {
    return read(in);
  } catch (const FormatError& e) {
    throw FormatError("corrupt checkpoint " + path.string() + ": " + e.what());
  } catch (const config::ConfigError& e) {
    throw FormatError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
}

std::vector<Record> parameter_records(const model::Denoiser& model) {
  std::vector<Record> out;
  out.reserve(model.parameters().size());
  for (const auto& p : model.parameters()) out.push_back({p.name, p.tensor.shape(), p.tensor.value()});
  return out;
}

void restore_parameters(model::Denoiser& model, const std::vector<Record>& records) {
  const auto& params = model.parameters();
  if (records.size() != params.size()) {
    throw FormatError("checkpoint has " + std::to_string(records.size()) + " parameters, model expects " +
                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Record& r = records[i];
    ag::Tensor t = params[i].tensor;
    if (r.name != params[i].name || r.shape != t.shape() || r.value.rows() != t.rows() || r.value.cols() != t.cols()) {
      throw FormatError("checkpoint parameter '" + r.name + "' does not match model parameter '" + params[i].name + "'");
    }
    t.mutable_value() = r.value;
  }
}

model::Denoiser load_model(const Checkpoint& checkpoint) {
  model::Denoiser m(checkpoint.config.model_config(), checkpoint.config.seed);
  restore_parameters(m, checkpoint.parameters);
  return m;
}

}  // namespace fregrad::checkpoint
