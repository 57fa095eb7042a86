#include "spiro/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spiro/errors.hpp"
#include "spiro/random.hpp"

namespace spiro {

DatasetManifest DatasetManifest::for_degree(int max_degree) {
  DatasetManifest m;
  m.max_degree = max_degree;
  m.num_fields = max_degree * max_degree;
  return m;
}

void DatasetManifest::validate() const {
  if (format_version != kDatasetFormatVersion) {
    throw VersionMismatchError("unsupported dataset format version " +
                               std::to_string(format_version));
  }
  if (max_degree < 1 || max_degree > 64) {
    throw ConfigError("max_degree must be in [1, 64]");
  }
  if (num_fields != max_degree * max_degree) {
    throw ConfigError("num_fields must equal max_degree^2 (" +
                      std::to_string(max_degree * max_degree) + ")");
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw ConfigError("split fraction must lie in (0, 1)");
  }
  curve().validate();
  (void)quantizer();
}

SpiralCurve DatasetManifest::curve() const {
  return SpiralCurve{spiral_c, num_points, t_margin};
}

Quantizer DatasetManifest::quantizer() const { return Quantizer(bins, v_max); }

std::vector<HarmonicIndex> harmonic_family(int max_degree) {
  std::vector<HarmonicIndex> out;
  out.reserve(static_cast<std::size_t>(max_degree) * max_degree);
  for (int l = 0; l < max_degree; ++l) {
    for (int m = -l; m <= l; ++m) out.push_back({l, m});
  }
  return out;
}

std::vector<FieldSequence> generate_corpus(const DatasetManifest& manifest) {
  manifest.validate();
  const SpiralCurve curve = manifest.curve();
  std::vector<FieldSequence> corpus;
  corpus.reserve(static_cast<std::size_t>(manifest.num_fields));
  for (const auto& idx : harmonic_family(manifest.max_degree)) {
    corpus.push_back({idx, evaluate_on_spiral(HamiltonianField{idx}, curve)});
  }
  return corpus;
}

FieldSequence normalize_field(const FieldSequence& seq) {
  if (seq.samples.empty()) throw ConfigError("cannot normalize an empty sequence");
  double peak = 0.0;
  for (const auto& s : seq.samples) {
    peak = std::max({peak, std::abs(s.v_theta), std::abs(s.v_phi)});
  }
  FieldSequence out = seq;
  if (peak == 0.0) return out;
  for (auto& s : out.samples) {
    s.v_theta /= peak;
    s.v_phi /= peak;
  }
  return out;
}

CorpusSplit split_corpus(int num_fields, double split_fraction,
                         std::uint64_t seed) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw ConfigError("split fraction must lie in (0, 1)");
  }
  if (num_fields < 2) {
    throw ConfigError("cannot split fewer than 2 fields into non-empty sets");
  }
  std::vector<int> order(static_cast<std::size_t>(num_fields));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order.begin(), order.end(), rng);

  auto n_train = static_cast<int>(std::floor(num_fields * split_fraction));
  n_train = std::clamp(n_train, 1, num_fields - 1);
  CorpusSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train, order.end());
  return split;
}

CorpusSplit Dataset::split() const {
  return split_corpus(static_cast<int>(records.size()),
                      manifest.split_fraction, manifest.seed);
}

std::vector<std::vector<int>> Dataset::token_sequences(
    std::span<const int> field_indices) const {
  std::vector<std::vector<int>> out;
  out.reserve(field_indices.size());
  for (int i : field_indices) {
    out.push_back(records.at(static_cast<std::size_t>(i)).tokens);
  }
  return out;
}

Dataset build_dataset(const DatasetManifest& manifest) {
  const Quantizer q = [&] {
    manifest.validate();
    return manifest.quantizer();
  }();
  Dataset ds;
  ds.manifest = manifest;
  for (const auto& raw : generate_corpus(manifest)) {
    const FieldSequence seq = normalize_field(raw);
    FieldRecord rec;
    rec.idx = seq.field_idx;
    rec.components.reserve(seq.samples.size());
    rec.tokens.reserve(seq.samples.size());
    for (const auto& s : seq.samples) {
      rec.components.push_back({s.v_theta, s.v_phi});
      rec.tokens.push_back(q.encode(s.v_theta, s.v_phi));
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace spiro
