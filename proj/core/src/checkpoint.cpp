#include "spiro/checkpoint.hpp"

#include <algorithm>
#include <map>

#include "binary_io.hpp"
#include "spiro/errors.hpp"

namespace spiro {

namespace {

constexpr std::string_view kMagic = "SPIROCKP";

std::string header_text(const Checkpoint& c) {
  const auto& k = c.config;
  std::string h;
  h += "num_layers " + std::to_string(k.num_layers) + "\n";
  h += "num_heads " + std::to_string(k.num_heads) + "\n";
  h += "d_model " + std::to_string(k.d_model) + "\n";
  h += "d_ff " + std::to_string(k.d_ff) + "\n";
  h += "vocab_size " + std::to_string(k.vocab_size) + "\n";
  h += "max_seq_len " + std::to_string(k.max_seq_len) + "\n";
  h += "dropout_rate " + io::format_double(k.dropout_rate) + "\n";
  h += "epoch " + std::to_string(c.epoch) + "\n";
  h += "val_loss " + io::format_double(c.val_loss) + "\n";
  h += "optimizer_step " + std::to_string(c.optimizer.step) + "\n";
  h += "parameter_count " + std::to_string(c.params.parameter_count()) + "\n";
  return h;
}

struct Frame {
  CheckpointSummary summary;
  std::string_view body;
};

Frame parse_frame(std::string_view bytes) {
  const auto lead = std::min(bytes.size(), kMagic.size());
  if (bytes.substr(0, lead) != kMagic.substr(0, lead)) {
    throw MalformedError("checkpoint: not a spiro checkpoint (bad magic)");
  }
  if (bytes.size() < kMagic.size()) {
    throw TruncationError("checkpoint: truncated (file shorter than magic)");
  }
  io::ByteReader r(bytes.substr(kMagic.size()), "checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointFormatVersion) {
    throw VersionMismatchError("checkpoint: format version " +
                               std::to_string(version) + ", expected " +
                               std::to_string(kCheckpointFormatVersion));
  }
  const std::uint32_t header_len = r.u32();
  const std::string_view header = r.bytes(header_len);
  const std::uint64_t body_len = r.u64();
  if (body_len > r.remaining()) {
    throw TruncationError("checkpoint: truncated body (" +
                          std::to_string(r.remaining()) + " of " +
                          std::to_string(body_len) + " bytes)");
  }
  const std::string_view body = r.bytes(static_cast<std::size_t>(body_len));
  const std::uint32_t stored = r.u32();
  if (r.remaining() != 0) {
    throw MalformedError("checkpoint: trailing bytes after checksum");
  }
  const std::size_t covered = bytes.size() - 4;
  const std::uint32_t actual = io::crc32(bytes.substr(0, covered));
  if (actual != stored) {
    throw ChecksumError("checkpoint: checksum mismatch");
  }

  std::map<std::string, std::string, std::less<>> kv;
  std::size_t pos = 0;
  while (pos < header.size()) {
    const auto nl = header.find('\n', pos);
    if (nl == std::string_view::npos) {
      throw MalformedError("checkpoint: unterminated header line");
    }
    const auto line = header.substr(pos, nl - pos);
    pos = nl + 1;
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos) {
      throw MalformedError("checkpoint: malformed header line");
    }
    kv.emplace(std::string(line.substr(0, sp)), std::string(line.substr(sp + 1)));
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw MalformedError(std::string("checkpoint: header lacks '") + key + "'");
    }
    return it->second;
  };
  auto get_int = [&](const char* key) {
    return static_cast<int>(io::parse_int(get(key), key));
  };

  Frame f;
  auto& s = f.summary;
  s.config.num_layers = get_int("num_layers");
  s.config.num_heads = get_int("num_heads");
  s.config.d_model = get_int("d_model");
  s.config.d_ff = get_int("d_ff");
  s.config.vocab_size = get_int("vocab_size");
  s.config.max_seq_len = get_int("max_seq_len");
  s.config.dropout_rate = io::parse_double(get("dropout_rate"), "dropout_rate");
  s.epoch = get_int("epoch");
  s.val_loss = io::parse_double(get("val_loss"), "val_loss");
  s.optimizer_step = io::parse_int(get("optimizer_step"), "optimizer_step");
  s.parameter_count = io::parse_u64(get("parameter_count"), "parameter_count");
  s.crc32 = stored;
  try {
    s.config.validate();
  } catch (const ConfigError& e) {
    throw MalformedError(std::string("checkpoint: invalid config: ") + e.what());
  }
  f.body = body;
  return f;
}

void read_matrix(io::ByteReader& r, Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.params.check_shapes(ckpt.config);
  const auto tensors = ckpt.params.tensors();
  if (ckpt.optimizer.first_moment.size() != tensors.size() ||
      ckpt.optimizer.second_moment.size() != tensors.size()) {
    throw ConfigError("checkpoint: optimizer state does not match parameters");
  }

  io::ByteWriter body;
  body.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto* t : tensors) {
    body.str(t->name);
    body.u32(static_cast<std::uint32_t>(t->value.rows()));
    body.u32(static_cast<std::uint32_t>(t->value.cols()));
    for (Eigen::Index i = 0; i < t->value.size(); ++i) body.f64(t->value.data()[i]);
  }
  body.u64(static_cast<std::uint64_t>(ckpt.optimizer.step));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Matrix& m = ckpt.optimizer.first_moment[i];
    const Matrix& v = ckpt.optimizer.second_moment[i];
    for (Eigen::Index j = 0; j < m.size(); ++j) body.f64(m.data()[j]);
    for (Eigen::Index j = 0; j < v.size(); ++j) body.f64(v.data()[j]);
  }
  body.str(ckpt.rng_state);

  const std::string header = header_text(ckpt);
  io::ByteWriter out;
  out.bytes(kMagic);
  out.u32(kCheckpointFormatVersion);
  out.u32(static_cast<std::uint32_t>(header.size()));
  out.bytes(header);
  out.u64(body.data().size());
  out.bytes(body.data());
  out.u32(io::crc32(out.data()));
  return out.take();
}

CheckpointSummary inspect_checkpoint(std::string_view bytes) {
  return parse_frame(bytes).summary;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  const Frame f = parse_frame(bytes);
  Checkpoint c;
  c.config = f.summary.config;
  c.epoch = f.summary.epoch;
  c.val_loss = f.summary.val_loss;
  c.params = ModelParams::zeros(c.config);
  auto tensors = c.params.tensors();

  io::ByteReader r(f.body, "checkpoint");
  const std::uint32_t count = r.u32();
  if (count != tensors.size()) {
    throw MalformedError("checkpoint: tensor count disagrees with config");
  }
  for (auto* t : tensors) {
    const std::string name = r.str();
    const auto rows = r.u32();
    const auto cols = r.u32();
    if (name != t->name || rows != t->value.rows() || cols != t->value.cols()) {
      throw MalformedError("checkpoint: tensor '" + name +
                           "' does not match the expected '" + t->name + "'");
    }
    read_matrix(r, t->value);
  }
  c.optimizer = OptimizerState::for_params(c.params);
  c.optimizer.step = static_cast<std::int64_t>(r.u64());
  if (c.optimizer.step != f.summary.optimizer_step) {
    throw MalformedError("checkpoint: optimizer step disagrees with header");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    read_matrix(r, c.optimizer.first_moment[i]);
    read_matrix(r, c.optimizer.second_moment[i]);
  }
  c.rng_state = r.str();
  if (r.remaining() != 0) {
    throw MalformedError("checkpoint: unexpected bytes at end of body");
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(io::read_file(path));
}

}  // namespace spiro
