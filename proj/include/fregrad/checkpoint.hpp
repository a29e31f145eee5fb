#pragma once

// Training checkpoints in the FGR1 container:
//
//   "FGR1" "CKPT" u32 version
//   string  run configuration (JSON)
//   i64     step
//   u64     record count, then per record:
//             string name, u32 ndim, ndim x i64 dims, u32 rows, u32 cols, rows*cols f64 (row-major)
//   i64     optimizer step, then the first and second moment records in parameter order
//   string  RNG engine state
//
// Strings carry a u64 length prefix; integers are little-endian.

#include "fregrad/config.hpp"
#include "fregrad/model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fregrad::checkpoint {

inline constexpr std::uint32_t kVersion = 1;

struct Record {
  std::string name;
  ag::Shape shape;
  Matrix value;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Checkpoint {
  config::RunConfig config;
  long step = 0;
  std::vector<Record> parameters;
  long optimizer_step = 0;
  std::vector<Record> first_moments;
  std::vector<Record> second_moments;
  std::string rng_state;
};

void write(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read(std::istream& in);

/// Writes via a temporary file and rename so a crash never leaves a torn file.
void save(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// FormatError / IoError messages name the file.
Checkpoint load(const std::filesystem::path& path);

/// Snapshot of the model's parameters in registration order.
std::vector<Record> parameter_records(const model::Denoiser& model);

/// Copies records into the model; names, order and shapes must match exactly.
void restore_parameters(model::Denoiser& model, const std::vector<Record>& records);

/// Rebuilds a model from the checkpoint's configuration and parameters.
model::Denoiser load_model(const Checkpoint& checkpoint);

}  // namespace fregrad::checkpoint
