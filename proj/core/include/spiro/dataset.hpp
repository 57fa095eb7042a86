#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spiro/fields.hpp"
#include "spiro/geometry.hpp"
#include "spiro/quantizer.hpp"

namespace spiro {

inline constexpr int kDatasetFormatVersion = 1;

struct DatasetManifest {
  int max_degree = 32;     // degrees 0 .. max_degree-1
  int num_fields = 1024;   // max_degree^2
  int num_points = 100;
  double spiral_c = 32.0;
  double t_margin = 1e-2;
  int bins = 16;
  double v_max = 1.0;
  std::uint64_t seed = 42;
  double split_fraction = 0.9;
  int format_version = kDatasetFormatVersion;

  // Manifest describing the full harmonic family for a degree bound.
  static DatasetManifest for_degree(int max_degree);

  void validate() const;
  SpiralCurve curve() const;
  Quantizer quantizer() const;

  friend bool operator==(const DatasetManifest&,
                         const DatasetManifest&) = default;
};

struct FieldSequence {
  HarmonicIndex field_idx;
  std::vector<TangentSample> samples;
};

// Every (l, m) with 0 <= l < max_degree, -l <= m <= l, ordered by l then m.
std::vector<HarmonicIndex> harmonic_family(int max_degree);

std::vector<FieldSequence> generate_corpus(const DatasetManifest& manifest);

// Divides both components by the largest absolute component in the
// sequence. A zero field is returned unchanged.
FieldSequence normalize_field(const FieldSequence& seq);

struct CorpusSplit {
  std::vector<int> train;
  std::vector<int> validation;
};

// Seeded shuffle of field indices [0, num_fields), then a cut at
// clamp(floor(num_fields * fraction), 1, num_fields - 1). Throws ConfigError
// if fewer than two fields or fraction outside (0, 1).
CorpusSplit split_corpus(int num_fields, double split_fraction,
                         std::uint64_t seed);

// One serialized field: normalized components plus their tokens.
struct FieldRecord {
  HarmonicIndex idx;
  std::vector<std::array<double, 2>> components;
  std::vector<int> tokens;

  friend bool operator==(const FieldRecord&, const FieldRecord&) = default;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<FieldRecord> records;

  CorpusSplit split() const;
  std::vector<std::vector<int>> token_sequences(
      std::span<const int> field_indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// generate -> normalize -> encode.
Dataset build_dataset(const DatasetManifest& manifest);

// Byte layout is documented in docs/dataset_format.md.
std::string serialize_dataset(const Dataset& dataset);
Dataset deserialize_dataset(std::string_view bytes);

void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

// Header-only view used by `inspect`. Verifies length and checksum without
// decoding the records; throws the same FormatError subclasses as a read.
struct DatasetSummary {
  DatasetManifest manifest;
  std::uint64_t payload_bytes = 0;
  std::uint32_t crc32 = 0;
};
DatasetSummary inspect_dataset(std::string_view bytes);

}  // namespace spiro
