#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "spiro/model.hpp"
#include "spiro/optimizer.hpp"

namespace spiro {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct Checkpoint {
  TransformerConfig config;
  ModelParams params;
  OptimizerState optimizer;
  std::string rng_state;  // serialize_rng() text
  int epoch = 0;          // completed epochs when saved
  double val_loss = 0.0;
};

// Binary layout: magic "SPIROCKP", u32 version, u32 header length, header
// text (config + summary), u64 body length, body (tensors, optimizer
// moments, RNG state), u32 crc32 over all preceding bytes.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Reads and checksums the file but decodes only the header text.
struct CheckpointSummary {
  TransformerConfig config;
  int epoch = 0;
  double val_loss = 0.0;
  std::int64_t optimizer_step = 0;
  std::uint64_t parameter_count = 0;
  std::uint32_t crc32 = 0;
};
CheckpointSummary inspect_checkpoint(std::string_view bytes);

}  // namespace spiro
