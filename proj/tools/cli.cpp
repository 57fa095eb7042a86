#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "spiro/checkpoint.hpp"
#include "spiro/dataset.hpp"
#include "spiro/errors.hpp"
#include "spiro/training.hpp"

namespace spiro::cli {

namespace {

constexpr const char* kDefaultDataset = "spiro_dataset.spd";
constexpr const char* kDefaultCheckpoint = "spiro_model.ckpt";
constexpr const char* kDefaultMetrics = "spiro_metrics.csv";
constexpr const char* kDefaultTrials = "spiro_trials.csv";

// Thrown for flag combinations CLI11 cannot check on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

CLI::Validator open_interval(double lo, double hi) {
  return CLI::Validator(
      [lo, hi](const std::string& s) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(s, v) || !(v > lo && v < hi)) {
          return "value " + s + " not in (" + CLI::detail::to_string(lo) + ", " +
                 CLI::detail::to_string(hi) + ")";
        }
        return {};
      },
      "in (" + CLI::detail::to_string(lo) + ", " + CLI::detail::to_string(hi) +
          ")");
}

CLI::Validator half_open(double lo, double hi) {
  return CLI::Validator(
      [lo, hi](const std::string& s) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(s, v) || !(v >= lo && v < hi)) {
          return "value " + s + " not in [" + CLI::detail::to_string(lo) + ", " +
                 CLI::detail::to_string(hi) + ")";
        }
        return {};
      },
      "in [" + CLI::detail::to_string(lo) + ", " + CLI::detail::to_string(hi) +
          ")");
}

const CLI::Validator kPositive = open_interval(0.0, HUGE_VAL);

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << std::fixed << v;
  return s.str();
}

// ---------------------------------------------------------------- gen-data

struct GenDataOptions {
  DatasetManifest manifest;
  std::string out = kDefaultDataset;
};

void add_gen_data(CLI::App& app, GenDataOptions& o) {
  auto* m = &o.manifest;
  app.add_option("--max-degree", m->max_degree,
                 "Harmonic degrees 0..N-1, giving N^2 fields")
      ->capture_default_str()
      ->check(CLI::Range(1, 200));
  app.add_option("--num-points", m->num_points, "Samples per spiral")
      ->capture_default_str()
      ->check(CLI::Range(2, 100000));
  app.add_option("--c", m->spiral_c, "Spiral winding constant")
      ->capture_default_str()
      ->check(kPositive);
  app.add_option("--t-margin", m->t_margin, "Distance kept from each pole in t")
      ->capture_default_str()
      ->check(half_open(0.0, kPi / 2));
  app.add_option("--bins", m->bins, "Quantization bins per component")
      ->capture_default_str()
      ->check(CLI::Range(1, 256));
  app.add_option("--v-max", m->v_max, "Quantizer clamp magnitude")
      ->capture_default_str()
      ->check(kPositive);
  app.add_option("--seed", m->seed, "Train/validation split seed")
      ->capture_default_str();
  app.add_option("--split", m->split_fraction, "Training fraction of the fields")
      ->capture_default_str()
      ->check(open_interval(0.0, 1.0));
  app.add_option("--out", o.out, "Dataset file to write")->capture_default_str();
}

int cmd_gen_data(GenDataOptions o, std::ostream& out) {
  o.manifest.num_fields = o.manifest.max_degree * o.manifest.max_degree;
  try {
    o.manifest.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const Dataset ds = build_dataset(o.manifest);
  write_dataset(o.out, ds);
  const CorpusSplit split = ds.split();
  const std::string bytes = serialize_dataset(ds);
  out << "wrote " << o.out << "\n"
      << "fields " << ds.records.size() << "\n"
      << "points " << o.manifest.num_points << "\n"
      << "vocab " << o.manifest.quantizer().vocab_size() << "\n"
      << "train " << split.train.size() << "\n"
      << "validation " << split.validation.size() << "\n"
      << "crc32 " << hex32(inspect_dataset(bytes).crc32) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ shared model

struct ModelFlags {
  TransformerConfig model;
  TrainConfig train;
  int patience = 0;  // 0 = early stopping off
};

void add_model_flags(CLI::App& app, ModelFlags& f) {
  app.add_option("--layers", f.model.num_layers, "Transformer blocks")
      ->capture_default_str()
      ->check(CLI::Range(1, 64));
  app.add_option("--heads", f.model.num_heads, "Attention heads")
      ->capture_default_str()
      ->check(CLI::Range(1, 64));
  app.add_option("--d-model", f.model.d_model, "Embedding width")
      ->capture_default_str()
      ->check(CLI::Range(2, 4096));
  app.add_option("--d-ff", f.model.d_ff, "Feed-forward width")
      ->capture_default_str()
      ->check(CLI::Range(1, 16384));
  app.add_option("--dropout", f.model.dropout_rate, "Dropout rate")
      ->capture_default_str()
      ->check(half_open(0.0, 1.0));
}

void add_train_flags(CLI::App& app, ModelFlags& f) {
  auto& t = f.train;
  app.add_option("--epochs", t.epochs, "Training epochs")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000000));
  app.add_option("--batch-size", t.batch_size, "Sequences per step")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000));
  app.add_option("--lr", t.optimizer.learning_rate, "Learning rate")
      ->capture_default_str()
      ->check(kPositive);
  app.add_option("--beta1", t.optimizer.beta1)->capture_default_str()->check(half_open(0.0, 1.0));
  app.add_option("--beta2", t.optimizer.beta2)->capture_default_str()->check(half_open(0.0, 1.0));
  app.add_option("--eps", t.optimizer.eps)->capture_default_str()->check(kPositive);
  app.add_option("--weight-decay", t.optimizer.weight_decay, "Decoupled decay on weight matrices")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--early-stop", f.patience,
                 "Stop after N epochs without validation improvement (0 = off)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", t.seed, "Initialization, shuffling and dropout seed")
      ->capture_default_str();
}

void validate_model_flags(ModelFlags& f) {
  if (f.patience > 0) f.train.early_stop_patience = f.patience;
  try {
    f.model.validate();
    f.train.validate();
  } catch (const ConfigError& e) {
    throw UsageError(std::string("invalid model or training flags: ") + e.what());
  }
}

struct Splits {
  Sequences train;
  Sequences validation;
};

Splits load_splits(const Dataset& ds) {
  const CorpusSplit s = ds.split();
  return {ds.token_sequences(s.train), ds.token_sequences(s.validation)};
}

void check_compatible(const TransformerConfig& c, const DatasetManifest& m) {
  const int vocab = m.quantizer().vocab_size();
  if (c.vocab_size != vocab) {
    throw ConfigError("checkpoint vocabulary " + std::to_string(c.vocab_size) +
                      " does not match the dataset vocabulary " +
                      std::to_string(vocab));
  }
  if (c.max_seq_len < m.num_points) {
    throw ConfigError("checkpoint context " + std::to_string(c.max_seq_len) +
                      " is shorter than the dataset sequences (" +
                      std::to_string(m.num_points) + ")");
  }
}

std::string metrics_line(const EpochMetrics& m) {
  return "train_loss=" + fmt(m.train_loss) + " train_acc=" + fmt(m.train_accuracy, 4) +
         " val_loss=" + fmt(m.val_loss) + " val_acc=" + fmt(m.val_accuracy, 4);
}

// ------------------------------------------------------------------- train

struct TrainOptions {
  ModelFlags flags;
  std::string data = kDefaultDataset;
  std::string checkpoint = kDefaultCheckpoint;
  std::string last_checkpoint;
  std::string metrics = kDefaultMetrics;
  int log_every = 10;
};

void add_train(CLI::App& app, TrainOptions& o) {
  app.add_option("--data", o.data, "Dataset file")->capture_default_str();
  app.add_option("--checkpoint", o.checkpoint, "Best-validation checkpoint to write")
      ->capture_default_str();
  app.add_option("--last-checkpoint", o.last_checkpoint,
                 "Also write the final-epoch checkpoint here");
  app.add_option("--metrics", o.metrics, "Per-epoch metrics CSV to write")
      ->capture_default_str();
  app.add_option("--log-every", o.log_every, "Print metrics every N epochs (0 = quiet)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_model_flags(app, o.flags);
  add_train_flags(app, o.flags);
}

int cmd_train(TrainOptions o, std::ostream& out) {
  validate_model_flags(o.flags);
  const Dataset ds = read_dataset(o.data);
  o.flags.model.vocab_size = ds.manifest.quantizer().vocab_size();
  o.flags.model.max_seq_len = ds.manifest.num_points;
  const Splits s = load_splits(ds);

  const TrainResult r = train(
      o.flags.model, s.train, s.validation, o.flags.train,
      [&](const EpochMetrics& m, const ModelParams&) {
        if (o.log_every > 0 && (m.epoch % o.log_every == 0 || m.epoch == 1)) {
          out << "epoch " << m.epoch << " " << metrics_line(m) << "\n" << std::flush;
        }
        return true;
      });

  {
    std::ofstream csv(o.metrics, std::ios::binary);
    if (!csv) throw IoError("cannot open '" + o.metrics + "' for writing");
    write_metrics_csv(csv, r.history);
    if (!csv.flush()) throw IoError("error while writing '" + o.metrics + "'");
  }
  save_checkpoint(o.checkpoint, r.best);
  if (!o.last_checkpoint.empty()) save_checkpoint(o.last_checkpoint, r.last);

  const EpochMetrics& last = r.history.back();
  out << "final epoch=" << last.epoch << " " << metrics_line(last) << "\n"
      << "best epoch=" << r.best_epoch << " val_loss=" << fmt(r.best.val_loss) << "\n";
  if (r.early_stopped) out << "early stopped\n";
  out << "wrote " << o.checkpoint << "\n"
      << "wrote " << o.metrics << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalOptions {
  std::string data = kDefaultDataset;
  std::string checkpoint = kDefaultCheckpoint;
  std::string split = "all";
  int batch_size = 64;
};

void add_eval(CLI::App& app, EvalOptions& o) {
  app.add_option("--data", o.data, "Dataset file")->capture_default_str();
  app.add_option("--checkpoint", o.checkpoint, "Checkpoint file")->capture_default_str();
  app.add_option("--split", o.split, "Which split to evaluate")
      ->capture_default_str()
      ->check(CLI::IsMember({"train", "validation", "all"}));
  app.add_option("--batch-size", o.batch_size, "Sequences per forward pass")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000));
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const Dataset ds = read_dataset(o.data);
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  check_compatible(ck.config, ds.manifest);
  const Splits s = load_splits(ds);
  auto report = [&](const char* name, const Sequences& seqs) {
    const EvalResult r = evaluate(ck.params, ck.config, seqs, o.batch_size);
    out << name << " loss=" << fmt(r.loss) << " accuracy=" << fmt(r.accuracy, 4)
        << " positions=" << r.positions << "\n";
  };
  if (o.split != "validation") report("train", s.train);
  if (o.split != "train") report("validation", s.validation);
  return kExitOk;
}

// ----------------------------------------------------------------- predict

struct PredictOptions {
  std::string data = kDefaultDataset;
  std::string checkpoint = kDefaultCheckpoint;
  int field = 0;
  int prefix = 50;
  double temperature = 0.0;
  std::uint64_t seed = 42;
};

void add_predict(CLI::App& app, PredictOptions& o) {
  app.add_option("--data", o.data, "Dataset file")->capture_default_str();
  app.add_option("--checkpoint", o.checkpoint, "Checkpoint file")->capture_default_str();
  app.add_option("--field", o.field, "Field index in the dataset")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--prefix", o.prefix, "Known tokens k; the rest are generated")
      ->capture_default_str();
  app.add_option("--temperature", o.temperature,
                 "Sampling temperature; 0 decodes greedily")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "Sampling seed (unused when greedy)")
      ->capture_default_str();
}

int pick_token(const Matrix& logits, double temperature, Rng& rng) {
  const auto row = logits.row(logits.rows() - 1);
  Eigen::Index best = 0;
  row.maxCoeff(&best);
  if (temperature == 0.0) return static_cast<int>(best);
  const Eigen::ArrayXd w = ((row.array() - row(best)) / temperature).exp().transpose();
  double u = uniform01(rng) * w.sum();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    u -= w(i);
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(best);
}

int cmd_predict(const PredictOptions& o, std::ostream& out) {
  const Dataset ds = read_dataset(o.data);
  const int n = ds.manifest.num_points;
  if (o.prefix < 1 || o.prefix > n) {
    throw UsageError("--prefix: value " + std::to_string(o.prefix) + " not in [1, " +
                     std::to_string(n) + "]; at least one context token is required");
  }
  if (o.field >= static_cast<int>(ds.records.size())) {
    throw UsageError("--field: value " + std::to_string(o.field) +
                     " out of range for a dataset of " +
                     std::to_string(ds.records.size()) + " fields");
  }
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  check_compatible(ck.config, ds.manifest);

  const FieldRecord& rec = ds.records[static_cast<std::size_t>(o.field)];
  const Quantizer q = ds.manifest.quantizer();
  std::vector<int> seq(rec.tokens.begin(), rec.tokens.begin() + o.prefix);
  Rng rng(o.seed);
  while (static_cast<int>(seq.size()) < n) {
    const std::vector<std::vector<int>> batch{seq};
    seq.push_back(pick_token(forward_logits(ck.params, ck.config, batch),
                             o.temperature, rng));
  }

  int matches = 0;
  for (int i = o.prefix; i < n; ++i) matches += seq[i] == rec.tokens[i] ? 1 : 0;
  out << "# field=" << o.field << " l=" << rec.idx.degree << " m=" << rec.idx.order
      << " prefix=" << o.prefix << " generated=" << n - o.prefix
      << " matching=" << matches << "\n";
  out << "position,source,token,v_theta,v_phi,true_token\n";
  out.precision(17);
  for (int i = 0; i < n; ++i) {
    const auto v = q.decode(seq[static_cast<std::size_t>(i)]);
    out << i << ',' << (i < o.prefix ? "prefix" : "generated") << ','
        << seq[static_cast<std::size_t>(i)] << ',' << v[0] << ',' << v[1] << ','
        << rec.tokens[static_cast<std::size_t>(i)] << '\n';
  }
  return kExitOk;
}

// --------------------------------------------------------------------- hpo

struct HpoOptions {
  SearchSpace space;
  ModelFlags flags;
  std::string data = kDefaultDataset;
  std::string out = kDefaultTrials;
};

void add_hpo(CLI::App& app, HpoOptions& o) {
  auto& s = o.space;
  app.add_option("--data", o.data, "Dataset file")->capture_default_str();
  app.add_option("--out", o.out, "Trial results CSV to write")->capture_default_str();
  app.add_option("--budget", s.budget, "Number of trials")
      ->capture_default_str()
      ->check(CLI::Range(1, 100000));
  app.add_option("--epochs-per-trial", s.epochs_per_trial)
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000));
  app.add_option("--seed", s.seed, "Sampling seed")->capture_default_str();
  app.add_option("--layers-set", s.num_layers)->delimiter(',')->capture_default_str()
      ->check(CLI::Range(1, 64));
  app.add_option("--heads-set", s.num_heads)->delimiter(',')->capture_default_str()
      ->check(CLI::Range(1, 64));
  app.add_option("--dropout-set", s.dropout_rate)->delimiter(',')->capture_default_str()
      ->check(half_open(0.0, 1.0));
  app.add_option("--lr-set", s.learning_rate)->delimiter(',')->capture_default_str()
      ->check(kPositive);
  app.add_option("--d-model-set", s.d_model)->delimiter(',')->capture_default_str()
      ->check(CLI::Range(2, 4096));
  app.add_option("--d-model", o.flags.model.d_model, "Base width for the d-ff ratio")
      ->capture_default_str()
      ->check(CLI::Range(2, 4096));
  app.add_option("--d-ff", o.flags.model.d_ff, "Base feed-forward width")
      ->capture_default_str()
      ->check(CLI::Range(1, 16384));
  app.add_option("--batch-size", o.flags.train.batch_size)
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000));
  app.add_option("--train-seed", o.flags.train.seed, "Seed for each trial's training")
      ->capture_default_str();
}

int cmd_hpo(HpoOptions o, std::ostream& out) {
  const Dataset ds = read_dataset(o.data);
  o.flags.model.vocab_size = ds.manifest.quantizer().vocab_size();
  o.flags.model.max_seq_len = ds.manifest.num_points;
  try {
    o.space.validate(o.flags.model);
  } catch (const ConfigError& e) {
    throw UsageError(std::string("invalid search space: ") + e.what());
  }
  const Splits s = load_splits(ds);
  const auto results =
      random_search(o.space, o.flags.model, o.flags.train, s.train, s.validation);
  {
    std::ofstream csv(o.out, std::ios::binary);
    if (!csv) throw IoError("cannot open '" + o.out + "' for writing");
    write_trials_csv(csv, results);
    if (!csv.flush()) throw IoError("error while writing '" + o.out + "'");
  }
  int rank = 1;
  for (const auto& r : results) {
    out << "rank " << rank++ << " trial=" << r.trial << " layers=" << r.model.num_layers
        << " heads=" << r.model.num_heads << " d_model=" << r.model.d_model
        << " dropout=" << r.model.dropout_rate << " lr=" << r.learning_rate;
    if (r.ok) {
      out << " best_val_loss=" << fmt(r.best_val_loss)
          << " best_val_acc=" << fmt(r.best_val_accuracy, 4) << "\n";
    } else {
      out << " failed: " << r.error << "\n";
    }
  }
  out << "wrote " << o.out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- inspect

struct InspectOptions {
  std::string path;
  bool tensors = false;
};

void add_inspect(CLI::App& app, InspectOptions& o) {
  app.add_option("path", o.path, "Dataset or checkpoint file")->required();
  app.add_flag("--tensors", o.tensors, "Also decode and summarize every tensor or record");
}

const char* failure_kind(const FormatError& e) {
  if (dynamic_cast<const ChecksumError*>(&e)) return "checksum";
  if (dynamic_cast<const VersionMismatchError*>(&e)) return "version";
  if (dynamic_cast<const TruncationError*>(&e)) return "truncated";
  return "malformed";
}

void print_dataset(const std::string& bytes, bool records, std::ostream& out) {
  const DatasetSummary s = inspect_dataset(bytes);
  const auto& m = s.manifest;
  out << "kind=dataset\n"
      << "format_version=" << m.format_version << "\n"
      << "max_degree=" << m.max_degree << "\n"
      << "num_fields=" << m.num_fields << "\n"
      << "num_points=" << m.num_points << "\n"
      << "spiral_c=" << m.spiral_c << "\n"
      << "t_margin=" << m.t_margin << "\n"
      << "bins=" << m.bins << "\n"
      << "v_max=" << m.v_max << "\n"
      << "vocab=" << m.quantizer().vocab_size() << "\n"
      << "seed=" << m.seed << "\n"
      << "split_fraction=" << m.split_fraction << "\n"
      << "payload_bytes=" << s.payload_bytes << "\n"
      << "crc32=" << hex32(s.crc32) << "\n";
  if (records) {
    const Dataset ds = deserialize_dataset(bytes);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      const auto& r = ds.records[i];
      const auto [lo, hi] = std::minmax_element(r.tokens.begin(), r.tokens.end());
      out << "record " << i << " l=" << r.idx.degree << " m=" << r.idx.order
          << " token_min=" << *lo << " token_max=" << *hi << "\n";
    }
  }
}

void print_checkpoint(const std::string& bytes, bool tensors, std::ostream& out) {
  const CheckpointSummary s = inspect_checkpoint(bytes);
  const auto& c = s.config;
  out << "kind=checkpoint\n"
      << "format_version=" << kCheckpointFormatVersion << "\n"
      << "layers=" << c.num_layers << "\n"
      << "heads=" << c.num_heads << "\n"
      << "d_model=" << c.d_model << "\n"
      << "d_ff=" << c.d_ff << "\n"
      << "vocab=" << c.vocab_size << "\n"
      << "max_seq_len=" << c.max_seq_len << "\n"
      << "dropout=" << c.dropout_rate << "\n"
      << "epoch=" << s.epoch << "\n"
      << "val_loss=" << s.val_loss << "\n"
      << "optimizer_step=" << s.optimizer_step << "\n"
      << "parameters=" << s.parameter_count << "\n"
      << "crc32=" << hex32(s.crc32) << "\n";
  if (tensors) {
    const Checkpoint ck = deserialize_checkpoint(bytes);
    for (const auto* t : ck.params.tensors()) {
      out << "tensor " << t->name << " " << t->value.rows() << "x" << t->value.cols()
          << " norm=" << t->value.norm() << "\n";
    }
  }
}

int cmd_inspect(const InspectOptions& o, std::ostream& out, std::ostream& err) {
  const std::string bytes = read_bytes(o.path);
  try {
    if (bytes.rfind("SPIROCKP", 0) == 0) {
      print_checkpoint(bytes, o.tensors, out);
    } else if (bytes.rfind("SPIRO-DATASET", 0) == 0) {
      print_dataset(bytes, o.tensors, out);
    } else {
      throw MalformedError(o.path + ": neither a spiro dataset nor a checkpoint");
    }
  } catch (const FormatError& e) {
    out << "checksum=FAILED kind=" << failure_kind(e) << "\n";
    err << "spiro: error: " << e.what() << "\n";
    return kExitFailure;
  }
  out << "checksum=OK\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Next-token transformer over Hamiltonian vector fields on the sphere",
               "spiro"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  GenDataOptions gen;
  TrainOptions train_opts;
  EvalOptions eval_opts;
  PredictOptions predict_opts;
  HpoOptions hpo_opts;
  InspectOptions inspect_opts;

  auto* gen_cmd = app.add_subcommand("gen-data", "Generate and write the token corpus");
  add_gen_data(*gen_cmd, gen);
  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset");
  add_train(*train_cmd, train_opts);
  auto* eval_cmd = app.add_subcommand("eval", "Loss and accuracy per split");
  add_eval(*eval_cmd, eval_opts);
  auto* predict_cmd =
      app.add_subcommand("predict", "Continue one field's sequence from a prefix");
  add_predict(*predict_cmd, predict_opts);
  auto* hpo_cmd = app.add_subcommand("hpo", "Seeded random hyperparameter search");
  add_hpo(*hpo_cmd, hpo_opts);
  auto* inspect_cmd =
      app.add_subcommand("inspect", "Print a dataset or checkpoint header");
  add_inspect(*inspect_cmd, inspect_opts);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "spiro: error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*train_cmd) return cmd_train(train_opts, out);
    if (*eval_cmd) return cmd_eval(eval_opts, out);
    if (*predict_cmd) return cmd_predict(predict_opts, out);
    if (*hpo_cmd) return cmd_hpo(hpo_opts, out);
    return cmd_inspect(inspect_opts, out, err);
  } catch (const UsageError& e) {
    err << "spiro: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "spiro: error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace spiro::cli
