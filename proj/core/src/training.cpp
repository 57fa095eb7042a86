#include "spiro/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "spiro/errors.hpp"
#include "spiro/random.hpp"

namespace spiro {

std::vector<int> next_token_targets(TokenBatch batch) {
  std::vector<int> targets;
  for (const auto& seq : batch) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      targets.push_back(i + 1 < seq.size() ? seq[i + 1] : -1);
    }
  }
  return targets;
}

namespace {

Eigen::Index argmax_row(const Matrix& logits, Eigen::Index r) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < logits.cols(); ++c) {
    if (logits(r, c) > logits(r, best)) best = c;
  }
  return best;
}

}  // namespace

std::int64_t count_correct(const Matrix& logits, std::span<const int> targets) {
  if (static_cast<std::size_t>(logits.rows()) != targets.size()) {
    throw ConfigError("count_correct: logits/targets length mismatch");
  }
  std::int64_t correct = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int t = targets[static_cast<std::size_t>(r)];
    if (t >= 0 && argmax_row(logits, r) == t) ++correct;
  }
  return correct;
}

LossResult next_token_loss(const Matrix& logits, std::span<const int> targets) {
  if (static_cast<std::size_t>(logits.rows()) != targets.size()) {
    throw ConfigError("next_token_loss: " + std::to_string(logits.rows()) +
                      " logit rows but " + std::to_string(targets.size()) +
                      " targets");
  }
  LossResult out;
  out.dlogits = Matrix::Zero(logits.rows(), logits.cols());
  for (int t : targets) {
    if (t >= logits.cols()) throw ConfigError("target outside vocabulary");
    if (t >= 0) ++out.count;
  }
  if (out.count == 0) return out;

  const double inv = 1.0 / static_cast<double>(out.count);
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int t = targets[static_cast<std::size_t>(r)];
    if (t < 0) continue;
    const double m = logits.row(r).maxCoeff();
    const Eigen::ArrayXd e = (logits.row(r).array() - m).exp().transpose();
    const double sum = e.sum();
    total += m + std::log(sum) - logits(r, t);
    out.dlogits.row(r) = (e / sum * inv).transpose().matrix();
    out.dlogits(r, t) -= inv;
    if (argmax_row(logits, r) == t) ++out.correct;
  }
  out.loss = total * inv;
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (early_stop_patience && *early_stop_patience < 1) {
    throw ConfigError("early-stop patience must be >= 1");
  }
  optimizer.validate();
}

EvalResult evaluate(const ModelParams& params, const TransformerConfig& config,
                    const Sequences& sequences, int batch_size) {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  double loss_sum = 0.0;
  std::int64_t positions = 0;
  std::int64_t correct = 0;
  std::size_t i = 0;
  while (i < sequences.size()) {
    // group consecutive sequences of equal length
    std::size_t j = i + 1;
    while (j < sequences.size() && j - i < static_cast<std::size_t>(batch_size) &&
           sequences[j].size() == sequences[i].size()) {
      ++j;
    }
    const TokenBatch batch(sequences.data() + i, j - i);
    const Matrix logits = forward_logits(params, config, batch);
    const auto targets = next_token_targets(batch);
    const LossResult lr = next_token_loss(logits, targets);
    loss_sum += lr.loss * static_cast<double>(lr.count);
    positions += lr.count;
    correct += lr.correct;
    i = j;
  }
  EvalResult out;
  out.positions = positions;
  if (positions > 0) {
    out.loss = loss_sum / static_cast<double>(positions);
    out.accuracy = static_cast<double>(correct) / static_cast<double>(positions);
  }
  return out;
}

TrainResult train(const TransformerConfig& model_config, const Sequences& train_set,
                  const Sequences& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  if (train_set.empty() || val_set.empty()) {
    throw ConfigError("training and validation sets must be non-empty");
  }

  Rng rng(config.seed);
  ModelParams params = ModelParams::init(model_config, rng);
  OptimizerState state = OptimizerState::for_params(params);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bs = static_cast<std::size_t>(config.batch_size);

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  Sequences batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += bs, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + bs);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train_set[order[k]]);
      const ForwardTrace trace =
          forward(params, model_config, batch, Mode::kTrain, &rng);
      const LossResult loss =
          next_token_loss(trace.logits, next_token_targets(batch));
      if (!std::isfinite(loss.loss)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index));
      }
      backward(trace, params, loss.dlogits);
      optimizer_step(params, state, config.optimizer);
    }

    const EvalResult tr = evaluate(params, model_config, train_set);
    const EvalResult va = evaluate(params, model_config, val_set);
    if (!std::isfinite(tr.loss) || !std::isfinite(va.loss)) {
      throw NumericalError("non-finite evaluation loss at epoch " +
                           std::to_string(epoch));
    }
    const EpochMetrics m{epoch, tr.loss, tr.accuracy, va.loss, va.accuracy};
    result.history.push_back(m);

    if (va.loss < best_val) {
      best_val = va.loss;
      since_best = 0;
      result.best_epoch = epoch;
      result.best = Checkpoint{model_config, params, state, serialize_rng(rng),
                               epoch, va.loss};
    } else {
      ++since_best;
    }

    bool keep_going = !on_epoch || on_epoch(m, params);
    if (config.early_stop_patience && since_best >= *config.early_stop_patience) {
      result.early_stopped = true;
      keep_going = false;
    }
    if (!keep_going || epoch == config.epochs) {
      result.last = Checkpoint{model_config, std::move(params), std::move(state),
                               serialize_rng(rng), epoch, va.loss};
      break;
    }
  }
  return result;
}

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> history) {
  const auto old_precision = out.precision(17);
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << m.train_loss << ',' << m.train_accuracy << ','
        << m.val_loss << ',' << m.val_accuracy << '\n';
  }
  out.precision(old_precision);
}

}  // namespace spiro
