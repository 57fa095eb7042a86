#include <gtest/gtest.h>

#include <filesystem>

#include "spiro/checkpoint.hpp"
#include "spiro/errors.hpp"

namespace spiro {
namespace {

Checkpoint sample_checkpoint() {
  TransformerConfig c;
  c.num_layers = 2;
  c.num_heads = 2;
  c.d_model = 8;
  c.d_ff = 16;
  c.vocab_size = 20;
  c.max_seq_len = 10;
  Rng rng(17);
  Checkpoint k;
  k.config = c;
  k.params = ModelParams::init(c, rng);
  k.optimizer = OptimizerState::for_params(k.params);
  k.optimizer.step = 12;
  for (auto& m : k.optimizer.first_moment) m.setRandom();
  for (auto& v : k.optimizer.second_moment) v = Matrix::Random(v.rows(), v.cols()).cwiseAbs();
  rng.discard(5);
  k.rng_state = serialize_rng(rng);
  k.epoch = 4;
  k.val_loss = 2.718281828459045;
  return k;
}

void expect_same(const Checkpoint& a, const Checkpoint& b) {
  EXPECT_EQ(a.config, b.config);
  EXPECT_EQ(a.epoch, b.epoch);
  EXPECT_EQ(a.val_loss, b.val_loss);
  EXPECT_EQ(a.rng_state, b.rng_state);
  EXPECT_EQ(a.optimizer.step, b.optimizer.step);
  const auto ta = a.params.tensors();
  const auto tb = b.params.tensors();
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    EXPECT_EQ(ta[i]->name, tb[i]->name);
    EXPECT_EQ(ta[i]->value, tb[i]->value);
    EXPECT_EQ(a.optimizer.first_moment[i], b.optimizer.first_moment[i]);
    EXPECT_EQ(a.optimizer.second_moment[i], b.optimizer.second_moment[i]);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Checkpoint k = sample_checkpoint();
  const std::string bytes = serialize_checkpoint(k);
  const Checkpoint back = deserialize_checkpoint(bytes);
  expect_same(k, back);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
  EXPECT_EQ(deserialize_rng(back.rng_state), deserialize_rng(k.rng_state));
}

TEST(Checkpoint, FileRoundTripAndInspect) {
  const auto path = std::filesystem::temp_directory_path() / "spiro_ckpt_roundtrip.ckpt";
  const Checkpoint k = sample_checkpoint();
  save_checkpoint(path, k);
  expect_same(k, load_checkpoint(path));
  const std::string bytes = serialize_checkpoint(k);
  const CheckpointSummary s = inspect_checkpoint(bytes);
  EXPECT_EQ(s.config, k.config);
  EXPECT_EQ(s.epoch, 4);
  EXPECT_EQ(s.optimizer_step, 12);
  EXPECT_EQ(s.parameter_count, k.params.parameter_count());
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), IoError);
}

TEST(Checkpoint, CorruptionClasses) {
  const std::string bytes = serialize_checkpoint(sample_checkpoint());

  std::string version = bytes;
  version[8] = 2;
  EXPECT_THROW(deserialize_checkpoint(version), VersionMismatchError);

  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, 4)), TruncationError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)),
               TruncationError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 2)),
               TruncationError);

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  EXPECT_THROW(deserialize_checkpoint(flipped), ChecksumError);

  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(magic), MalformedError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "z"), MalformedError);
}

TEST(Checkpoint, EveryByteFlipIsRejected) {
  const std::string bytes = serialize_checkpoint(sample_checkpoint());
  for (std::size_t i = 0; i < bytes.size(); i += 7) {
    std::string b = bytes;
    b[i] ^= 0x01;
    EXPECT_THROW(deserialize_checkpoint(b), FormatError) << "offset " << i;
  }
}

TEST(Checkpoint, RejectsMismatchedOptimizerState) {
  Checkpoint k = sample_checkpoint();
  k.optimizer.first_moment.pop_back();
  EXPECT_THROW(serialize_checkpoint(k), ConfigError);
}

}  // namespace
}  // namespace spiro
