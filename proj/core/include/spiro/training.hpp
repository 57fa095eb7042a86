#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spiro/checkpoint.hpp"
#include "spiro/model.hpp"
#include "spiro/optimizer.hpp"

namespace spiro {

using Sequences = std::vector<std::vector<int>>;

struct LossResult {
  double loss = 0.0;
  Matrix dlogits;           // (softmax - onehot) / count, 0 on ignored rows
  std::int64_t count = 0;   // rows that carry a target
  std::int64_t correct = 0; // argmax == target
};

// Targets per logit row: the next token of the same sequence, or -1 on each
// sequence's final position.
std::vector<int> next_token_targets(TokenBatch batch);

// Mean cross-entropy over rows with target >= 0.
LossResult next_token_loss(const Matrix& logits, std::span<const int> targets);

// argmax(logits row) == target, counted over rows with target >= 0. Ties
// resolve to the lowest index.
std::int64_t count_correct(const Matrix& logits, std::span<const int> targets);

struct TrainConfig {
  int epochs = 2000;
  int batch_size = 32;
  AdamConfig optimizer;
  std::optional<int> early_stop_patience;  // epochs without val improvement
  std::uint64_t seed = 42;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::int64_t positions = 0;
};

// Eval-mode loss/accuracy over a set of sequences. Touches no RNG and
// leaves params (including grad buffers) untouched.
EvalResult evaluate(const ModelParams& params, const TransformerConfig& config,
                    const Sequences& sequences, int batch_size = 64);

// Return false to stop training after this epoch.
using EpochCallback =
    std::function<bool(const EpochMetrics&, const ModelParams&)>;

struct TrainResult {
  std::vector<EpochMetrics> history;
  Checkpoint best;  // lowest validation loss seen
  Checkpoint last;
  int best_epoch = 0;
  bool early_stopped = false;
};

// Seeds one engine from config.seed, initializes parameters from it, then
// per epoch: seeded shuffle, mini-batch forward/backward/step, eval-mode
// pass over both sets. Throws NumericalError naming epoch and batch on a
// non-finite loss.
TrainResult train(const TransformerConfig& model_config, const Sequences& train_set,
                  const Sequences& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Columns: epoch,train_loss,train_acc,val_loss,val_acc
void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> history);

struct SearchSpace {
  std::vector<int> num_layers{1, 2};
  std::vector<int> num_heads{2, 4};
  std::vector<double> dropout_rate{0.0, 0.1, 0.2};
  std::vector<double> learning_rate{3e-4, 1e-3, 3e-3};
  std::vector<int> d_model{32, 64};
  int budget = 8;
  int epochs_per_trial = 20;
  std::uint64_t seed = 7;

  // Throws ConfigError if any candidate set is empty, budget < 1, or no
  // combination yields a valid TransformerConfig.
  void validate(const TransformerConfig& base) const;
};

struct TrialResult {
  int trial = 0;  // sampling order
  TransformerConfig model;
  double learning_rate = 0.0;
  bool ok = false;
  std::string error;  // set when training the trial failed
  double best_val_loss = 0.0;
  double best_val_accuracy = 0.0;
  double final_train_accuracy = 0.0;
  int best_epoch = 0;
};

// Draws `budget` configs from the space (base supplies vocab, d_ff ratio and
// max_seq_len), trains each with base_train but epochs_per_trial epochs, and
// returns results ranked by best validation loss; failed trials rank last.
std::vector<TrialResult> random_search(const SearchSpace& space,
                                       const TransformerConfig& base,
                                       const TrainConfig& base_train,
                                       const Sequences& train_set,
                                       const Sequences& val_set);

// The config a trial would train, without training it.
std::vector<std::pair<TransformerConfig, double>> sample_search_configs(
    const SearchSpace& space, const TransformerConfig& base);

// Columns: rank,trial,layers,heads,d_model,d_ff,dropout,lr,best_val_loss,
// best_val_acc,final_train_acc,best_epoch,status
void write_trials_csv(std::ostream& out, std::span<const TrialResult> results);

}  // namespace spiro
