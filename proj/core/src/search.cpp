#include <algorithm>
#include <exception>
#include <string>

#include "spiro/errors.hpp"
#include "spiro/random.hpp"
#include "spiro/training.hpp"

namespace spiro {

namespace {

TransformerConfig make_config(const TransformerConfig& base, int layers,
                              int heads, int d_model, double dropout) {
  TransformerConfig c = base;
  c.num_layers = layers;
  c.num_heads = heads;
  c.dropout_rate = dropout;
  // keep the base feed-forward expansion ratio
  c.d_ff = std::max(1, base.d_ff * d_model / base.d_model);
  c.d_model = d_model;
  return c;
}

bool is_valid(const TransformerConfig& c) {
  try {
    c.validate();
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

template <typename T>
const T& pick(const std::vector<T>& options, Rng& rng) {
  return options[uniform_index(rng, options.size())];
}

}  // namespace

void SearchSpace::validate(const TransformerConfig& base) const {
  if (num_layers.empty() || num_heads.empty() || dropout_rate.empty() ||
      learning_rate.empty() || d_model.empty()) {
    throw ConfigError("search space has an empty candidate set");
  }
  if (budget < 1) throw ConfigError("search budget must be >= 1");
  if (epochs_per_trial < 1) throw ConfigError("epochs per trial must be >= 1");
  for (double lr : learning_rate) {
    if (!(lr > 0.0)) throw ConfigError("search learning rates must be positive");
  }
  bool any = false;
  for (int l : num_layers) {
    for (int h : num_heads) {
      for (int d : d_model) {
        for (double p : dropout_rate) {
          any = any || is_valid(make_config(base, l, h, d, p));
        }
      }
    }
  }
  if (!any) throw ConfigError("no combination in the search space is valid");
}

std::vector<std::pair<TransformerConfig, double>> sample_search_configs(
    const SearchSpace& space, const TransformerConfig& base) {
  space.validate(base);
  Rng rng(space.seed);
  std::vector<std::pair<TransformerConfig, double>> out;
  for (int trial = 0; trial < space.budget; ++trial) {
    // Rejection keeps the draw uniform over the valid combinations.
    for (;;) {
      const int layers = pick(space.num_layers, rng);
      const int heads = pick(space.num_heads, rng);
      const int d_model = pick(space.d_model, rng);
      const double dropout = pick(space.dropout_rate, rng);
      const double lr = pick(space.learning_rate, rng);
      const TransformerConfig c = make_config(base, layers, heads, d_model, dropout);
      if (is_valid(c)) {
        out.emplace_back(c, lr);
        break;
      }
    }
  }
  return out;
}

std::vector<TrialResult> random_search(const SearchSpace& space,
                                       const TransformerConfig& base,
                                       const TrainConfig& base_train,
                                       const Sequences& train_set,
                                       const Sequences& val_set) {
  const auto configs = sample_search_configs(space, base);
  std::vector<TrialResult> results;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    TrialResult r;
    r.trial = static_cast<int>(i);
    r.model = configs[i].first;
    r.learning_rate = configs[i].second;
    TrainConfig tc = base_train;
    tc.epochs = space.epochs_per_trial;
    tc.optimizer.learning_rate = r.learning_rate;
    try {
      const TrainResult tr = train(r.model, train_set, val_set, tc);
      const auto& best = tr.history[static_cast<std::size_t>(tr.best_epoch - 1)];
      r.ok = true;
      r.best_val_loss = best.val_loss;
      r.best_val_accuracy = best.val_accuracy;
      r.final_train_accuracy = tr.history.back().train_accuracy;
      r.best_epoch = tr.best_epoch;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const TrialResult& a, const TrialResult& b) {
                     if (a.ok != b.ok) return a.ok;
                     if (!a.ok) return false;
                     return a.best_val_loss < b.best_val_loss;
                   });
  return results;
}

void write_trials_csv(std::ostream& out, std::span<const TrialResult> results) {
  const auto old_precision = out.precision(17);
  out << "rank,trial,layers,heads,d_model,d_ff,dropout,lr,best_val_loss,"
         "best_val_acc,final_train_acc,best_epoch,status\n";
  int rank = 1;
  for (const auto& r : results) {
    out << rank++ << ',' << r.trial << ',' << r.model.num_layers << ','
        << r.model.num_heads << ',' << r.model.d_model << ',' << r.model.d_ff
        << ',' << r.model.dropout_rate << ',' << r.learning_rate << ',';
    if (r.ok) {
      out << r.best_val_loss << ',' << r.best_val_accuracy << ','
          << r.final_train_accuracy << ',' << r.best_epoch << ",ok\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << ",,,," << "failed: " << msg << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace spiro
